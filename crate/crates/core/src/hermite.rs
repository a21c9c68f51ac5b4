//! L2-normalised Hermite functions `ℋ_n(t) = h_n(t) e^{-t²/2}`.
//!
//! Everything here works with the exponentially weighted functions directly:
//! the raw polynomials `h_n` overflow double precision close to the turning
//! point `√(2n+3)` once `n` reaches a few hundred. The three-term recurrence
//!
//! ```text
//! ℋ_{k+1}(t) = t √(2/(k+1)) ℋ_k(t) − √(k/(k+1)) ℋ_{k−1}(t)
//! ```
//!
//! is run on a mantissa with a separately tracked logarithmic scale, so that
//! the starting value `π^{-1/4} e^{-t²/2}` never underflows before the
//! recurrence has had a chance to grow it back.
//!
//! The module also carries the phase function `Φ` and the envelope scale used
//! to describe the size of `ℋ_{n+1}` between consecutive zeros.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// `π^{-1/4}`, the value of `ℋ_0(0)`.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;
// ln(1e150)
const LN_RESCALE: f64 = 345.387_763_949_107_1;
// Below this log-scale the cached factor exp(scale) may lose precision or
// underflow, so values are assembled through exp(scale + ln|m|) instead.
const DIRECT_FACTOR_FLOOR: f64 = -600.0;
// Mantissas stay below ~1e308, so any scale under this gives an exact zero.
const ZERO_BELOW: f64 = -1500.0;

fn check_abscissa(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("abscissa must be finite, got {t}")))
    }
}

/// Value of a single Hermite function together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteValue {
    pub n: usize,
    pub t: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Forward walker over `ℋ_0(t), ℋ_1(t), …` at a fixed abscissa.
///
/// The walker keeps `ℋ_{k−1}` and `ℋ_k` as scaled mantissas; `value` and
/// `derivative` undo the scaling on demand.
#[derive(Debug, Clone)]
pub struct HermiteWalker {
    t: f64,
    k: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
    factor: f64,
}

impl HermiteWalker {
    /// Starts at `ℋ_0(t)`. `t` must be finite.
    pub fn new(t: f64) -> Self {
        let log_scale = -0.5 * t * t;
        Self {
            t,
            k: 0,
            prev: 0.0,
            cur: PI_POW_NEG_QUARTER,
            log_scale,
            factor: log_scale.exp(),
        }
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn abscissa(&self) -> f64 {
        self.t
    }

    #[inline]
    fn unscale(&self, mantissa: f64) -> f64 {
        if self.log_scale >= DIRECT_FACTOR_FLOOR || mantissa == 0.0 {
            mantissa * self.factor
        } else if self.log_scale < ZERO_BELOW {
            0.0
        } else {
            mantissa.signum() * (self.log_scale + mantissa.abs().ln()).exp()
        }
    }

    /// `ℋ_k(t)` for the current index `k`.
    #[inline]
    pub fn value(&self) -> f64 {
        self.unscale(self.cur)
    }

    /// `ℋ_{k−1}(t)`; zero when `k = 0`.
    #[inline]
    pub fn previous(&self) -> f64 {
        self.unscale(self.prev)
    }

    /// `ℋ_k'(t) = √(2k) ℋ_{k−1}(t) − t ℋ_k(t)`.
    #[inline]
    pub fn derivative(&self) -> f64 {
        let m = (2.0 * self.k as f64).sqrt() * self.prev - self.t * self.cur;
        self.unscale(m)
    }

    /// Moves from `ℋ_k` to `ℋ_{k+1}`.
    #[inline]
    pub fn advance(&mut self) {
        let k = self.k as f64;
        let next = self.t * (2.0 / (k + 1.0)).sqrt() * self.cur - (k / (k + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        if self.cur.abs() > RESCALE_ABOVE {
            self.cur *= RESCALE_BY;
            self.prev *= RESCALE_BY;
            self.log_scale += LN_RESCALE;
            self.factor = self.log_scale.exp();
        }
    }

    /// Advances until the current index equals `n` (no-op if already there).
    pub fn advance_to(&mut self, n: usize) {
        debug_assert!(n >= self.k);
        while self.k < n {
            self.advance();
        }
    }
}

/// `[ℋ_0(t), …, ℋ_{n_max}(t)]`.
pub fn eval_hermite_sequence(n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_abscissa(t)?;
    let mut out = Vec::with_capacity(n_max + 1);
    fill_hermite_sequence(t, &mut out, n_max);
    Ok(out)
}

/// Writes `ℋ_0(t)…ℋ_{n_max}(t)` into `out` (cleared first). Caller guarantees finite `t`.
pub(crate) fn fill_hermite_sequence(t: f64, out: &mut Vec<f64>, n_max: usize) {
    out.clear();
    let mut w = HermiteWalker::new(t);
    out.push(w.value());
    for _ in 0..n_max {
        w.advance();
        out.push(w.value());
    }
}

/// `(ℋ_n(t), ℋ_n'(t))`.
pub fn eval_hermite_pair(n: usize, t: f64) -> Result<(f64, f64)> {
    check_abscissa(t)?;
    Ok(hermite_pair_unchecked(n, t))
}

#[inline]
pub(crate) fn hermite_pair_unchecked(n: usize, t: f64) -> (f64, f64) {
    let mut w = HermiteWalker::new(t);
    w.advance_to(n);
    (w.value(), w.derivative())
}

#[inline]
pub(crate) fn hermite_unchecked(n: usize, t: f64) -> f64 {
    let mut w = HermiteWalker::new(t);
    w.advance_to(n);
    w.value()
}

/// Convenience wrapper returning a [`HermiteValue`].
pub fn hermite_value(n: usize, t: f64) -> Result<HermiteValue> {
    let (value, derivative) = eval_hermite_pair(n, t)?;
    Ok(HermiteValue {
        n,
        t,
        value,
        derivative,
    })
}

/// Phase function `Φ` on `[0, 1]`, defined by `(2/3) Φ(x)^{3/2} = ∫_x^1 √(1−s²) ds`.
///
/// With `θ = arccos x` the integral is `(2θ − sin 2θ)/4`; the difference is
/// expanded in a series for small `θ` to avoid cancellation near `x = 1`.
pub fn phi(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("phi requires x in [0, 1], got {x}")));
    }
    // arccos(x) = 2 asin(√((1−x)/2)), accurate where 1−x is small.
    let theta = 2.0 * ((1.0 - x) / 2.0).sqrt().asin();
    let u = 2.0 * theta;
    let u_minus_sin = if u < 0.25 {
        // u − sin u = u³/3! − u⁵/5! + u⁷/7! − …
        let u2 = u * u;
        let mut term = u * u2 / 6.0;
        let mut sum = 0.0;
        let mut k = 3.0;
        for _ in 0..7 {
            sum += term;
            term *= -u2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        u - u.sin()
    };
    let integral = u_minus_sin / 4.0;
    Ok((1.5 * integral).powf(2.0 / 3.0))
}

/// `n^{-1/8} (√N − |t|)^{-1/4}` with `N = 2n + 3`: the order of magnitude of
/// `|ℋ_{n+1}|` between the zeros next to `t`.
pub fn envelope_scale(n: usize, t: f64) -> Result<f64> {
    check_abscissa(t)?;
    if n == 0 {
        return Err(Error::Domain("envelope scale needs n >= 1".into()));
    }
    let sqrt_n = (2.0 * n as f64 + 3.0).sqrt();
    let gap = sqrt_n - t.abs();
    if gap <= 0.0 {
        return Err(Error::Domain(format!(
            "|t| = {} must be below sqrt(N) = {sqrt_n}",
            t.abs()
        )));
    }
    Ok((n as f64).powf(-0.125) * gap.powf(-0.25))
}

const SUP_SAMPLES: usize = 64;
const GOLDEN_TOL: f64 = 1e-10;

/// `sup{|ℋ_{n+1}(t)| : t ∈ [a, b]}` by dense sampling followed by
/// golden-section refinement around the best sample.
pub fn local_sup_abs(n: usize, a: f64, b: f64) -> Result<f64> {
    check_abscissa(a)?;
    check_abscissa(b)?;
    if !(a < b) && (a - b).abs() >= 1e-14 {
        return Err(Error::Domain(format!("local_sup_abs needs a < b, got [{a}, {b}]")));
    }
    let f = |t: f64| hermite_unchecked(n + 1, t).abs();
    if b - a < 1e-14 {
        return Ok(f(a));
    }
    let h = (b - a) / SUP_SAMPLES as f64;
    let mut best_k = 0;
    let mut best = f(a);
    for k in 1..=SUP_SAMPLES {
        let t = if k == SUP_SAMPLES { b } else { a + h * k as f64 };
        let v = f(t);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let centre = a + h * best_k as f64;
    let lo = (centre - h).max(a);
    let hi = (centre + h).min(b);
    let (_, refined) = golden_section_max(f, lo, hi, GOLDEN_TOL);
    Ok(best.max(refined))
}

/// Maximises a unimodal function on `[lo, hi]`; returns `(argmax, max)`.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    [(x1, f1), (x2, f2), (mid, fm)]
        .into_iter()
        .fold((mid, fm), |acc, c| if c.1 > acc.1 { c } else { acc })
}

/// `∫_x^1 √(1−s²) ds` through the elementary antiderivative. Kept for tests
/// and diagnostics; [`phi`] uses the cancellation-free form.
pub fn phi_integral(x: f64) -> f64 {
    PI / 4.0 - 0.5 * (x.asin() + x * (1.0 - x * x).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sequence_at_origin() {
        let v = eval_hermite_sequence(0, 0.0).unwrap();
        assert_eq!(v.len(), 1);
        assert!(close(v[0], 0.751_125_544_4, 1e-10));

        let v = eval_hermite_sequence(2, 0.0).unwrap();
        assert_eq!(v.len(), 3);
        assert!(close(v[0], PI_POW_NEG_QUARTER, 1e-15));
        assert_eq!(v[1], 0.0);
        assert!(close(v[2], -PI_POW_NEG_QUARTER / 2f64.sqrt(), 1e-15));
        assert!(close(v[2], -0.531_125_966_0, 1e-10));
    }

    #[test]
    fn matches_extended_precision_oracle() {
        // Frozen from scripts/oracles.py (50-digit recurrence).
        let cases = [
            (200, 1.0, 0.070_078_424_892_676_400_596),
            (1000, 5.0, -0.118_450_356_505_143_044_53),
            (57, -3.25, -0.060_665_569_451_370_871_483),
            (500, 31.0, -0.098_623_215_306_475_185_497),
            (30, 12.0, 3.559_079_519_025_543_195_6e-12),
        ];
        for (n, t, expected) in cases {
            let got = eval_hermite_sequence(n, t).unwrap()[n];
            assert!(close(got, expected, 1e-12), "H_{n}({t}) = {got}, want {expected}");
            let (pair, _) = eval_hermite_pair(n, t).unwrap();
            assert_eq!(pair, got);
        }
    }

    #[test]
    fn no_overflow_far_out() {
        let v = eval_hermite_sequence(2000, 60.0).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v[2000].abs() < 1.0);
        let (h, d) = eval_hermite_pair(1_000_000, 900.0).unwrap();
        assert!(h.is_finite() && d.is_finite());
        let (h, _) = eval_hermite_pair(100, 1000.0).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn non_finite_abscissa_is_rejected() {
        assert!(matches!(eval_hermite_sequence(3, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(eval_hermite_pair(3, f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn pair_closed_forms() {
        let (h, d) = eval_hermite_pair(1, 0.0).unwrap();
        assert_eq!(h, 0.0);
        assert!(close(d, 2f64.sqrt() * PI_POW_NEG_QUARTER, 1e-15));
        assert!(close(d, 1.062_251_932_1, 1e-10));

        let (h, d) = eval_hermite_pair(0, 1.0).unwrap();
        let expected = PI_POW_NEG_QUARTER * (-0.5f64).exp();
        assert!(close(h, expected, 1e-15));
        assert!(close(d, -expected, 1e-15));
    }

    #[test]
    fn ode_residual_by_finite_differences() {
        // ℋ_63'' + (N − t²) ℋ_63 = 0 with N = 2·62 + 3 = 127.
        let n = 63;
        let big_n = 2.0 * n as f64 + 1.0;
        let step = 1e-4;
        let mut state = 0x2545_f491_4f6c_dd1du64;
        for _ in 0..100 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let t = -12.0 + 24.0 * (state >> 11) as f64 / (1u64 << 53) as f64;
            let (h, _) = eval_hermite_pair(n, t).unwrap();
            let (_, dp) = eval_hermite_pair(n, t + step).unwrap();
            let (_, dm) = eval_hermite_pair(n, t - step).unwrap();
            let second = (dp - dm) / (2.0 * step);
            let residual = (second + (big_n - t * t) * h).abs();
            assert!(residual <= 1e-6 * big_n, "t = {t}, residual = {residual}");
        }
    }

    #[test]
    fn recurrence_consistency() {
        for &t in &[-7.5, -1.0, 0.3, 2.2, 9.9] {
            let v = eval_hermite_sequence(120, t).unwrap();
            for k in 1..120 {
                let kf = k as f64;
                let a = t * (2.0 / (kf + 1.0)).sqrt() * v[k];
                let b = (kf / (kf + 1.0)).sqrt() * v[k - 1];
                let scale = a.abs().max(b.abs()).max(v[k + 1].abs());
                assert!((v[k + 1] - (a - b)).abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(1.0).unwrap(), 0.0);
        assert!(close(phi(0.0).unwrap(), (3.0 * PI / 8.0).powf(2.0 / 3.0), 1e-15));
        // Frozen from scripts/oracles.py (adaptive quadrature of the defining integral).
        assert!(close(phi(0.5).unwrap(), 0.596_449_357_339_296_971_17, 1e-12));
        assert!(close(phi(0.9).unwrap(), 0.124_717_480_941_409_707_82, 1e-12));
        assert!(close(phi(0.999).unwrap(), 0.001_259_795_043_387_826_500_1, 1e-12));
        assert!(phi(-0.1).is_err());
        assert!(phi(1.5).is_err());
    }

    #[test]
    fn phi_is_comparable_to_one_minus_x_squared() {
        let lo = 2f64.powf(-2.0 / 3.0);
        let hi = 2f64.powf(2.0 / 3.0);
        let mut prev = f64::INFINITY;
        for k in 0..10_000 {
            let x = k as f64 / 10_000.0;
            let v = phi(x).unwrap();
            assert!(v < prev, "phi not decreasing at {x}");
            prev = v;
            let ratio = v / (1.0 - x * x);
            assert!(ratio >= lo && ratio <= hi, "ratio {ratio} at {x}");
        }
    }

    #[test]
    fn phi_agrees_with_elementary_antiderivative() {
        for k in 0..=50 {
            let x = k as f64 / 60.0;
            let direct = (1.5 * phi_integral(x)).powf(2.0 / 3.0);
            assert!(close(phi(x).unwrap(), direct, 1e-13));
        }
    }

    #[test]
    fn envelope_scale_values() {
        for n in [1usize, 7, 100] {
            let expected = (n as f64).powf(-0.125) * (2.0 * n as f64 + 3.0).powf(-0.125);
            assert!(close(envelope_scale(n, 0.0).unwrap(), expected, 1e-15));
        }
        assert!(close(envelope_scale(13, 3.0).unwrap(), 0.583_952_447_167_703_2, 1e-13));
        assert_eq!(envelope_scale(13, 2.5).unwrap(), envelope_scale(13, -2.5).unwrap());
        assert!(envelope_scale(13, 29f64.sqrt()).is_err());
        assert!(envelope_scale(0, 0.0).is_err());
    }

    #[test]
    fn local_sup_of_first_hermite_function() {
        let expected = 2f64.sqrt() * PI_POW_NEG_QUARTER * (-0.5f64).exp();
        let got = local_sup_abs(0, -1.0, 1.0).unwrap();
        assert!(close(got, expected, 1e-12));
        assert!(close(got, 0.6443, 1e-4));
    }

    #[test]
    fn local_sup_on_degenerate_interval() {
        let v = local_sup_abs(4, 0.7, 0.7).unwrap();
        assert_eq!(v, hermite_unchecked(5, 0.7).abs());
    }
}
