//! Hermite series: coefficients `a_j = ∫ f ℋ_j`, partial sums, Cesàro and
//! de la Vallée Poussin means as coefficient multipliers, and the kernels
//! `K_j(t,s) = Σ_{i≤j} ℋ_i(t)ℋ_i(s)` and `K^m = (1/m) Σ_{j<m} K_j`.

use crate::error::{Error, Result};
use crate::hermite::{fill_hermite_sequence, HermiteWalker};
use crate::integrate::{integrate_vector, Domain, PanelOptions, VectorIntegrand};
use crate::interpolation::WeightedPolyEval;
use crate::quadrature::{build_rule, QuadratureRule};
use crate::space::{weighted_lp_norm_with, Decay, FunctionHandle, NormSpec, VectorValue, TAIL_MARGIN};
use rayon::prelude::*;

/// `a_0, …, a_n`, each in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCoefficients {
    dim: usize,
    coeffs: Vec<f64>,
}

impl HermiteCoefficients {
    /// Row-major: `dim` entries per index.
    pub fn from_flat(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || coeffs.is_empty() || coeffs.len() % dim != 0 {
            return Err(Error::shape("coefficient array", dim.max(1), coeffs.len()));
        }
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(Self { dim, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coeffs
    }

    /// Keeps `a_0, …, a_m`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        self.check_index(m)?;
        Ok(Self {
            dim: self.dim,
            coeffs: self.coeffs[..(m + 1) * self.dim].to_vec(),
        })
    }

    fn check_index(&self, m: usize) -> Result<()> {
        if m > self.degree() {
            return Err(Error::Usage(format!(
                "index {m} exceeds the available coefficient degree {}",
                self.degree()
            )));
        }
        Ok(())
    }

    /// `Σ_{j≤last} w(j) a_j ℋ_j` as a weighted polynomial.
    pub fn with_multiplier(&self, last: usize, w: impl Fn(usize) -> f64) -> Result<WeightedPolyEval> {
        self.check_index(last)?;
        let mut c = Vec::with_capacity((last + 1) * self.dim);
        for j in 0..=last {
            let wj = w(j);
            c.extend(self.get(j).iter().map(|a| wj * a));
        }
        WeightedPolyEval::from_coefficients(self.dim, c)
    }
}

struct CoefficientIntegrand<'a> {
    f: &'a FunctionHandle,
    n: usize,
}

impl VectorIntegrand for CoefficientIntegrand<'_> {
    fn len(&self) -> usize {
        (self.n + 1) * self.f.dim()
    }

    fn accumulate(&self, t: f64, weight: f64, acc: &mut [f64]) {
        let d = self.f.dim();
        let mut buf = [0.0; 8];
        let mut heap;
        let v: &mut [f64] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        self.f.eval_into(t, v);
        v.iter_mut().for_each(|x| *x *= weight);
        let mut w = HermiteWalker::new(t);
        for j in 0..=self.n {
            if j > 0 {
                w.advance();
            }
            let h = w.value();
            if h == 0.0 && j > 0 {
                continue;
            }
            acc[j * d..(j + 1) * d]
                .iter_mut()
                .zip(v.iter())
                .for_each(|(a, x)| *a += h * x);
        }
    }
}

/// `a_j = ∫ f(t) ℋ_j(t) dt` for `j ≤ n`.
pub fn coefficients(f: &FunctionHandle, n: usize) -> Result<HermiteCoefficients> {
    coefficients_with(f, n, &PanelOptions::default())
}

pub fn coefficients_with(f: &FunctionHandle, n: usize, opts: &PanelOptions) -> Result<HermiteCoefficients> {
    if f.decay() == Decay::Unknown {
        return Err(Error::Usage(
            "handle declares no decay; Hermite coefficients may not exist".into(),
        ));
    }
    let rule = build_rule(n)?;
    let t_max = rule.sqrt_big_n() + TAIL_MARGIN;
    let mut pts: Vec<f64> = rule.nodes().to_vec();
    let mut x = rule.nodes()[0].abs() + 0.5;
    while x < t_max {
        pts.extend([x, -x]);
        x += 0.5;
    }
    pts.extend([t_max, -t_max, 0.0]);
    let domain = Domain::from_breakpoints(&pts);
    let v = integrate_vector(&CoefficientIntegrand { f, n }, &domain, opts)?;
    HermiteCoefficients::from_flat(f.dim(), v)
}

/// Cesàro multiplier `(1 − j/m)_+`.
pub fn cesaro_multiplier(j: usize, m: usize) -> f64 {
    if j >= m {
        0.0
    } else {
        1.0 - j as f64 / m as f64
    }
}

/// Multiplier of `V_{2n}`: `1` up to `2n`, linear down to `0` at `4n`.
pub fn vallee_poussin_multiplier(j: usize, n: usize) -> f64 {
    if j <= 2 * n {
        1.0
    } else if j >= 4 * n {
        0.0
    } else {
        (4 * n - j) as f64 / (2 * n) as f64
    }
}

/// `P_m f(t) = Σ_{j≤m} a_j ℋ_j(t)`.
pub fn partial_sum(c: &HermiteCoefficients, m: usize, t: f64) -> Result<VectorValue> {
    Ok(c.with_multiplier(m, |_| 1.0)?.eval(t))
}

/// `σ_m f(t) = Σ_{j<m} (1 − j/m) a_j ℋ_j(t)`.
pub fn cesaro_mean(c: &HermiteCoefficients, m: usize, t: f64) -> Result<VectorValue> {
    Ok(cesaro_operator(c, m)?.eval(t))
}

pub fn cesaro_operator(c: &HermiteCoefficients, m: usize) -> Result<WeightedPolyEval> {
    if m == 0 {
        return Err(Error::Usage("Cesàro mean needs m ≥ 1".into()));
    }
    c.with_multiplier(m - 1, |j| cesaro_multiplier(j, m))
}

/// `V_{2n} f(t) = (2σ_{4n} − σ_{2n}) f(t)`.
pub fn vallee_poussin(c: &HermiteCoefficients, n: usize, t: f64) -> Result<VectorValue> {
    Ok(vallee_poussin_operator(c, n)?.eval(t))
}

pub fn vallee_poussin_operator(c: &HermiteCoefficients, n: usize) -> Result<WeightedPolyEval> {
    if n == 0 {
        return Err(Error::Usage("de la Vallée Poussin mean needs n ≥ 1".into()));
    }
    if c.degree() + 1 < 4 * n {
        return Err(Error::Usage(format!(
            "V_2n with n = {n} needs coefficients up to {}, have {}",
            4 * n - 1,
            c.degree()
        )));
    }
    c.with_multiplier(4 * n - 1, |j| vallee_poussin_multiplier(j, n))
}

/// Radius (relative to `1 + max(|t|, |s|)`) below which the kernel is summed
/// directly instead of through the Christoffel–Darboux quotient.
const CD_SWITCH: f64 = 1e-3;

/// `K_j(t, s) = Σ_{i≤j} ℋ_i(t) ℋ_i(s)`.
pub fn kernel(j: usize, t: f64, s: f64) -> f64 {
    let mut wt = HermiteWalker::new(t);
    let mut ws = HermiteWalker::new(s);
    if (t - s).abs() < CD_SWITCH * (1.0 + t.abs().max(s.abs())) {
        let mut acc = wt.value() * ws.value();
        for _ in 0..j {
            wt.advance();
            ws.advance();
            acc += wt.value() * ws.value();
        }
        return acc;
    }
    wt.advance_to(j + 1);
    ws.advance_to(j + 1);
    let (tj1, tj) = (wt.value(), wt.previous());
    let (sj1, sj) = (ws.value(), ws.previous());
    ((j as f64 + 1.0) / 2.0).sqrt() * (tj1 * sj - tj * sj1) / (t - s)
}

/// `K^m(t, s) = Σ_{i<m} (1 − i/m) ℋ_i(t) ℋ_i(s)`.
pub fn cesaro_kernel(m: usize, t: f64, s: f64) -> f64 {
    let mut wt = HermiteWalker::new(t);
    let mut ws = HermiteWalker::new(s);
    let mut acc = 0.0;
    for i in 0..m {
        if i > 0 {
            wt.advance();
            ws.advance();
        }
        acc += cesaro_multiplier(i, m) * (wt.value() * ws.value());
    }
    acc
}

/// The handle `t ↦ K^m(t, s)`.
pub fn cesaro_kernel_handle(m: usize, s: f64) -> FunctionHandle {
    let mut hs = Vec::new();
    fill_hermite_sequence(s, &mut hs, m.saturating_sub(1));
    let coeffs: Vec<f64> = hs.iter().enumerate().map(|(i, h)| cesaro_multiplier(i, m) * h).collect();
    let poly = WeightedPolyEval::from_coefficients(1, coeffs).expect("non-empty coefficients");
    poly.to_handle()
}

/// 129 Chebyshev-spaced points on `[−√N − 2, √N + 2]`, `N = 2n + 3`.
pub fn default_s_grid(n: usize) -> Vec<f64> {
    let c = (2.0 * n as f64 + 3.0).sqrt() + 2.0;
    (0..=128)
        .map(|k| {
            let x = c * (k as f64 * std::f64::consts::PI / 128.0).cos();
            if k == 64 {
                0.0
            } else {
                x
            }
        })
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Usage("empty s-grid".into()));
    }
    if grid.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("s-grid entries must be finite".into()));
    }
    Ok(())
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, &v| m.max(v))
}

/// `max_{s ∈ grid} ∫ |K^m(t, s)| dt`.
pub fn freud_poiani_scan(m: usize, s_grid: &[f64]) -> Result<f64> {
    if m == 0 {
        return Err(Error::Usage("kernel scan needs m ≥ 1".into()));
    }
    check_grid(s_grid)?;
    let rule = build_rule(m - 1)?;
    let spec = NormSpec::scalar(1.0)?;
    let values = s_grid
        .par_iter()
        .map(|&s| weighted_lp_norm_with(&cesaro_kernel_handle(m, s), &spec, &rule, &PanelOptions::default()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(max_of(&values))
}

/// `max_{s ∈ grid} Σ_{|t_j| ≤ δ√N} μ_j |K^m(t_j, s)|` for `m ≤ 4n`.
pub fn discrete_kernel_scan(rule: &QuadratureRule, m: usize, delta: f64, s_grid: &[f64]) -> Result<f64> {
    if m == 0 || m > 4 * rule.degree() {
        return Err(Error::Usage(format!(
            "discrete kernel scan needs 1 ≤ m ≤ 4n = {}, got {m}",
            4 * rule.degree()
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    check_grid(s_grid)?;
    let bound = delta * rule.sqrt_big_n();
    let kept: Vec<usize> = (0..rule.len()).filter(|&j| rule.nodes()[j].abs() <= bound).collect();
    let values: Vec<f64> = s_grid
        .par_iter()
        .map(|&s| {
            let k = cesaro_kernel_handle(m, s);
            let mut out = [0.0];
            kept.iter()
                .map(|&j| {
                    k.eval_into(rule.nodes()[j], &mut out);
                    rule.mu()[j] * out[0].abs()
                })
                .sum()
        })
        .collect();
    Ok(max_of(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_value, PI_POW_NEG_QUARTER};

    fn hermite_handle(k: usize) -> FunctionHandle {
        FunctionHandle::scalar(Decay::Gaussian, move |t| hermite_value(k, t).unwrap().value)
    }

    #[test]
    fn coefficients_of_hermite_functions() {
        for k in [0usize, 3, 17] {
            let c = coefficients(&hermite_handle(k), 24).unwrap();
            for j in 0..=24 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((c.get(j)[0] - expect).abs() < 1e-9, "k={k} j={j}: {}", c.get(j)[0]);
            }
        }
        let zero = FunctionHandle::scalar(Decay::Gaussian, |_| 0.0);
        assert!(coefficients(&zero, 5).unwrap().as_flat().iter().all(|&a| a == 0.0));
        let unknown = FunctionHandle::scalar(Decay::Unknown, |_| 1.0);
        assert!(matches!(coefficients(&unknown, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn vector_coefficients() {
        let f = FunctionHandle::new(2, Decay::Gaussian, |t, out| {
            let v = hermite_value(0, t).unwrap().value + hermite_value(2, t).unwrap().value;
            out[0] = v;
            out[1] = v;
        });
        let c = coefficients(&f, 4).unwrap();
        for (j, expect) in [(0, 1.0), (1, 0.0), (2, 1.0), (3, 0.0), (4, 0.0)] {
            assert!((c.get(j)[0] - expect).abs() < 1e-10);
            assert!((c.get(j)[1] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn means_and_multipliers() {
        let unit = |k: usize, len: usize| {
            let mut v = vec![0.0; len];
            v[k] = 1.0;
            HermiteCoefficients::from_flat(1, v).unwrap()
        };
        let t = 0.7;
        let h = |k| hermite_value(k, t).unwrap().value;
        assert!((partial_sum(&unit(3, 6), 4, t).unwrap().0[0] - h(3)).abs() < 1e-15);
        assert_eq!(partial_sum(&unit(3, 6), 2, t).unwrap().0[0], 0.0);
        assert!(partial_sum(&unit(3, 6), 6, t).is_err());
        assert!((cesaro_mean(&unit(1, 4), 2, t).unwrap().0[0] - 0.5 * h(1)).abs() < 1e-15);
        assert!((cesaro_mean(&unit(0, 4), 1, t).unwrap().0[0] - h(0)).abs() < 1e-15);
        assert!(cesaro_mean(&unit(0, 4), 0, t).is_err());

        let n = 4;
        let len = 4 * n + 4;
        assert!((vallee_poussin(&unit(2 * n, len), n, t).unwrap().0[0] - h(2 * n)).abs() < 1e-15);
        assert!((vallee_poussin(&unit(3 * n, len), n, t).unwrap().0[0] - 0.5 * h(3 * n)).abs() < 1e-15);
        assert_eq!(vallee_poussin(&unit(4 * n, len), n, t).unwrap().0[0], 0.0);
        assert!(vallee_poussin(&unit(0, 4 * n - 1), n, t).is_err());

        // 2σ_{4n} − σ_{2n} termwise equals the trapezoid.
        for n in 1..20 {
            for j in 0..5 * n {
                let lhs = 2.0 * cesaro_multiplier(j, 4 * n) - cesaro_multiplier(j, 2 * n);
                assert!((lhs - vallee_poussin_multiplier(j, n)).abs() < 1e-15, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn kernel_forms_agree() {
        let k0 = kernel(0, 0.3, -1.1);
        let expect = PI_POW_NEG_QUARTER.powi(2) * (-(0.09 + 1.21) / 2.0f64).exp();
        assert!((k0 - expect).abs() < 1e-15);
        for j in [1usize, 7, 40, 150] {
            for (t, s) in [(0.3, -1.1), (2.0, 2.0005), (5.0, 4.0), (-3.0, 8.0), (1.0, 1.1)] {
                let direct: f64 = (0..=j)
                    .map(|i| hermite_value(i, t).unwrap().value * hermite_value(i, s).unwrap().value)
                    .sum();
                let k = kernel(j, t, s);
                let scale = direct.abs().max(1e-3);
                assert!((k - direct).abs() < 1e-10 * scale, "j={j} ({t},{s}): {k} vs {direct}");
                assert_eq!(k, kernel(j, s, t));
            }
        }
    }

    #[test]
    fn kernel_reproduces() {
        let j = 6;
        let t = 0.4;
        for i in [2usize, 6, 9] {
            let f = FunctionHandle::scalar(Decay::Gaussian, move |s| kernel(j, t, s));
            let c = coefficients(&f, 12).unwrap();
            let expect = if i <= j { hermite_value(i, t).unwrap().value } else { 0.0 };
            assert!((c.get(i)[0] - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn scans() {
        let v = freud_poiani_scan(1, &[0.0, 1.0]).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-9, "{v}");
        let coarse = freud_poiani_scan(4, &[0.0, 2.0]).unwrap();
        let fine = freud_poiani_scan(4, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(fine >= coarse);
        assert!(freud_poiani_scan(3, &[]).is_err());

        let rule = build_rule(8).unwrap();
        let grid: Vec<f64> = default_s_grid(8);
        assert_eq!(grid.len(), 129);
        let d = discrete_kernel_scan(&rule, 1, 1.0, &[0.0]).unwrap();
        // Σ μ_j |K_0(t_j, 0)| = π^{-1/2} Σ λ_j e^{t_j²/2}; compare against the integral √2.
        assert!((d - 2f64.sqrt()).abs() < 1e-3, "{d}");
        assert!(discrete_kernel_scan(&rule, 33, 0.9, &grid).is_err());
        assert!(discrete_kernel_scan(&rule, 3, 0.9, &[]).is_err());
        let a = discrete_kernel_scan(&rule, 5, 0.9, &[1.3]).unwrap();
        let b = discrete_kernel_scan(&rule, 5, 0.9, &[-1.3]).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn projection_idempotence() {
        let f = FunctionHandle::scalar(Decay::Algebraic, |t| 1.0 / (1.0 + t * t));
        let c = coefficients(&f, 20).unwrap();
        let p = c.with_multiplier(10, |_| 1.0).unwrap().to_handle();
        let c2 = coefficients(&p, 10).unwrap();
        for j in 0..=10 {
            assert!((c2.get(j)[0] - c.get(j)[0]).abs() < 1e-8);
        }
    }
}
