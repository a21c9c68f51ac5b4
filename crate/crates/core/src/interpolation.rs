//! Weighted Lagrange interpolation at the zeros of `ℋ_{n+1}` and the discrete
//! (Marcinkiewicz–Zygmund) norms built from the Gauss–Hermite weights `μ_j`.
//!
//! Everything is stored and evaluated in weighted form. Node data are kept as
//! `y_j = f(t_j) e^{−t_j²/2}`, and the interpolant is evaluated as
//!
//! ```text
//! g(t) = Σ_j y_j ℋ_{n+1}(t) / (ℋ_{n+1}'(t_j)(t − t_j)),
//! ```
//!
//! which equals `(I_n f)(t) e^{−t²/2}` without ever forming `h_{n+1}(t)`.
//!
//! Node indices are 0-based and follow the descending node order of
//! [`QuadratureRule`].

use crate::error::{Error, Result};
use crate::hermite::{hermite_unchecked, HermiteWalker};
use crate::quadrature::QuadratureRule;
use crate::space::{lq_norm, Decay, FunctionHandle, NormSpec, VectorValue};
use std::sync::Arc;

/// Below this fraction of the local node spacing the basis function of the
/// nearby node switches to its Taylor expansion.
const NEAR_NODE: f64 = 1e-3;

/// Values at the nodes of a degree-`n` rule, stored weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues {
    n: usize,
    dim: usize,
    nodes: Arc<[f64]>,
    weighted: Vec<f64>,
}

impl NodeValues {
    fn check_len(rule: &QuadratureRule, dim: usize, len: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if len != rule.len() * dim {
            return Err(Error::shape("node values", rule.len() * dim, len));
        }
        Ok(())
    }

    /// Row-major raw samples `f(t_j)` (`dim` entries per node).
    pub fn from_raw_flat(rule: &QuadratureRule, dim: usize, mut data: Vec<f64>) -> Result<Self> {
        Self::check_len(rule, dim, data.len())?;
        for (j, &t) in rule.nodes().iter().enumerate() {
            let w = (-0.5 * t * t).exp();
            data[j * dim..(j + 1) * dim].iter_mut().for_each(|x| *x *= w);
        }
        Self::from_weighted_flat(rule, dim, data)
    }

    /// Row-major weighted samples `f(t_j) e^{−t_j²/2}`.
    pub fn from_weighted_flat(rule: &QuadratureRule, dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_len(rule, dim, data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("node values must be finite".into()));
        }
        Ok(Self {
            n: rule.degree(),
            dim,
            nodes: rule.nodes().into(),
            weighted: data,
        })
    }

    pub fn from_raw(rule: &QuadratureRule, values: &[VectorValue]) -> Result<Self> {
        let (dim, flat) = flatten(rule, values)?;
        Self::from_raw_flat(rule, dim, flat)
    }

    pub fn from_weighted(rule: &QuadratureRule, values: &[VectorValue]) -> Result<Self> {
        let (dim, flat) = flatten(rule, values)?;
        Self::from_weighted_flat(rule, dim, flat)
    }

    /// Degree parameter of the rule the values belong to.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `f(t_j) e^{−t_j²/2}`.
    pub fn weighted(&self, j: usize) -> &[f64] {
        &self.weighted[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weighted_flat(&self) -> &[f64] {
        &self.weighted
    }

    /// `f(t_j)`; overflows to infinity for large `|t_j|`.
    pub fn raw(&self, j: usize) -> Vec<f64> {
        let t = self.nodes[j];
        let w = (0.5 * t * t).exp();
        self.weighted(j).iter().map(|x| x * w).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.weighted.iter_mut().for_each(|x| *x *= s);
        out
    }

    fn check_rule(&self, rule: &QuadratureRule) -> Result<()> {
        if rule.degree() != self.n {
            return Err(Error::shape("node values vs rule", rule.len(), self.len()));
        }
        Ok(())
    }
}

fn flatten(rule: &QuadratureRule, values: &[VectorValue]) -> Result<(usize, Vec<f64>)> {
    if values.len() != rule.len() {
        return Err(Error::shape("node values", rule.len(), values.len()));
    }
    let dim = values.first().map(VectorValue::dim).unwrap_or(1);
    let mut flat = Vec::with_capacity(values.len() * dim);
    for v in values {
        if v.dim() != dim {
            return Err(Error::shape("node value dimension", dim, v.dim()));
        }
        flat.extend_from_slice(v.components());
    }
    Ok((dim, flat))
}

#[derive(Debug)]
struct LagrangeData {
    n: usize,
    big_n: f64,
    nodes: Arc<[f64]>,
    derivs: Vec<f64>,
    near: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Mode {
    Lagrange(Arc<LagrangeData>),
    /// `Σ_k c_k ℋ_k(t)`, row-major coefficients.
    Coefficients(Arc<Vec<f64>>),
}

/// A weighted polynomial `q(t) e^{−t²/2}` with values in `R^d`.
#[derive(Debug, Clone)]
pub struct WeightedPolyEval {
    dim: usize,
    degree: usize,
    mode: Mode,
}

/// `ℋ_{n+1}(t) / (ℋ_{n+1}'(t_j)(t − t_j))` given `h = ℋ_{n+1}(t)`.
#[inline]
fn basis_factor(h: f64, t: f64, tj: f64, dj: f64, near: f64, big_n: f64) -> f64 {
    let delta = t - tj;
    if delta.abs() < near {
        let d2 = delta * delta;
        1.0 + (tj * tj - big_n) * d2 / 6.0 + tj * d2 * delta / 6.0
    } else {
        h / (dj * delta)
    }
}

impl WeightedPolyEval {
    /// `Σ_k c_k ℋ_k(t)`; `coeffs` holds `dim` entries per index `k`.
    pub fn from_coefficients(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || coeffs.len() % dim != 0 || coeffs.is_empty() {
            return Err(Error::shape("coefficient array", dim.max(1), coeffs.len()));
        }
        let degree = coeffs.len() / dim - 1;
        Ok(Self {
            dim,
            degree,
            mode: Mode::Coefficients(Arc::new(coeffs)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial degree bound.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        match &self.mode {
            Mode::Lagrange(data) => {
                let h = hermite_unchecked(data.n + 1, t);
                for (j, &tj) in data.nodes.iter().enumerate() {
                    let c = basis_factor(h, t, tj, data.derivs[j], data.near[j], data.big_n);
                    let y = &data.values[j * self.dim..(j + 1) * self.dim];
                    out.iter_mut().zip(y).for_each(|(o, v)| *o += c * v);
                }
            }
            Mode::Coefficients(c) => {
                let mut w = HermiteWalker::new(t);
                let d = self.dim;
                for k in 0..=self.degree {
                    if k > 0 {
                        w.advance();
                    }
                    let hk = w.value();
                    out.iter_mut()
                        .zip(&c[k * d..(k + 1) * d])
                        .for_each(|(o, ck)| *o += ck * hk);
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> VectorValue {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        VectorValue(out)
    }

    pub fn to_handle(&self) -> FunctionHandle {
        let me = self.clone();
        FunctionHandle::new(self.dim, Decay::Gaussian, move |t, out| me.eval_into(t, out))
    }
}

/// Coefficient of `y_j = f(t_j) e^{−t_j²/2}` in the weighted interpolant at
/// `t`, i.e. `e^{−t²/2} l_j(t) e^{t_j²/2}`. Equals `δ_ij` at `t = t_i`.
pub fn weighted_lagrange_basis(rule: &QuadratureRule, j: usize, t: f64) -> Result<f64> {
    if j >= rule.len() {
        return Err(Error::Usage(format!(
            "node index {j} out of range for a rule with {} nodes",
            rule.len()
        )));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("abscissa must be finite, got {t}")));
    }
    let h = hermite_unchecked(rule.degree() + 1, t);
    let near = NEAR_NODE * rule.local_spacing(j);
    Ok(basis_factor(h, t, rule.nodes()[j], rule.derivatives()[j], near, rule.big_n()))
}

/// The weighted interpolant `(I_n f) e^{−t²/2}` of the node values.
pub fn interpolate(rule: &QuadratureRule, nv: &NodeValues) -> Result<WeightedPolyEval> {
    nv.check_rule(rule)?;
    let near = (0..rule.len()).map(|j| NEAR_NODE * rule.local_spacing(j)).collect();
    Ok(WeightedPolyEval {
        dim: nv.dim,
        degree: rule.degree(),
        mode: Mode::Lagrange(Arc::new(LagrangeData {
            n: rule.degree(),
            big_n: rule.big_n(),
            nodes: rule.nodes().into(),
            derivs: rule.derivatives().to_vec(),
            near,
            values: nv.weighted.clone(),
        })),
    })
}

fn mz_sum(rule: &QuadratureRule, nv: &NodeValues, spec: &NormSpec, keep: impl Fn(f64) -> bool) -> Result<f64> {
    nv.check_rule(rule)?;
    if nv.dim != spec.dim() {
        return Err(Error::shape("node value dimension", spec.dim(), nv.dim));
    }
    let p = spec.p();
    let mut terms = Vec::with_capacity(rule.len());
    for (j, (&t, &mu)) in rule.nodes().iter().zip(rule.mu()).enumerate() {
        if keep(t) {
            terms.push((mu, lq_norm(nv.weighted(j), spec.q())));
        }
    }
    if p.is_infinite() {
        return Ok(terms.iter().fold(0.0, |m, &(_, v)| m.max(v)));
    }
    let scale = terms.iter().fold(0.0f64, |m, &(_, v)| m.max(v));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = terms.iter().map(|&(mu, v)| mu * (v / scale).powf(p)).sum();
    Ok(scale * s.powf(1.0 / p))
}

/// `(Σ_j μ_j ‖f(t_j) e^{−t_j²/2}‖^p)^{1/p}`; for `p = ∞` the maximum of the
/// weighted node norms.
pub fn discrete_mz_norm(rule: &QuadratureRule, nv: &NodeValues, spec: &NormSpec) -> Result<f64> {
    mz_sum(rule, nv, spec, |_| true)
}

/// As [`discrete_mz_norm`], restricted to nodes with `|t_j| ≤ δ √N`.
pub fn restricted_mz_norm(rule: &QuadratureRule, nv: &NodeValues, spec: &NormSpec, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let bound = delta * rule.sqrt_big_n();
    mz_sum(rule, nv, spec, |t| t.abs() <= bound)
}
