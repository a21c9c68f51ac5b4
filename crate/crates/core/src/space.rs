//! Finite-dimensional value spaces `(R^d, ℓ_q)`, vector-valued function
//! handles, and the weighted norm `‖g‖_p = (∫ ‖g(t)‖^p dt)^{1/p}`.
//!
//! A [`FunctionHandle`] always evaluates the weighted function `g`, i.e. the
//! thing whose norm is taken. For an interpolant or partial sum of `f` this is
//! `f(t) e^{−t²/2}`.

use crate::error::{Error, Result};
use crate::integrate::{integrate, Domain, Integrand, PanelOptions};
use crate::interpolation::NodeValues;
use crate::quadrature::{build_rule, QuadratureRule};
use std::fmt;
use std::sync::Arc;

/// Distance beyond `√(2n+3)` at which integration stops for Gaussian-decay
/// handles.
pub const TAIL_MARGIN: f64 = 12.0;

/// Dimension and exponents of `L_p(R; (R^d, ℓ_q))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    d: usize,
    q: f64,
    p: f64,
}

impl NormSpec {
    /// `q` may be infinite; `p` may be infinite only for discrete norms.
    pub fn new(d: usize, q: f64, p: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("inner exponent q must be in [1, ∞], got {q}")));
        }
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("outer exponent p must be in [1, ∞], got {p}")));
        }
        Ok(Self { d, q, p })
    }

    pub fn scalar(p: f64) -> Result<Self> {
        Self::new(1, 2.0, p)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p' = p/(p−1)`.
    pub fn dual_exponent(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else if self.p.is_infinite() {
            1.0
        } else {
            self.p / (self.p - 1.0)
        }
    }

    pub fn with_p(self, p: f64) -> Result<Self> {
        Self::new(self.d, self.q, p)
    }
}

/// ℓ_q norm of a slice.
pub fn lq_norm(v: &[f64], q: f64) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if q.is_infinite() || max == 0.0 || !max.is_finite() {
        return max;
    }
    if q == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if q == 2.0 {
        let s: f64 = v.iter().map(|x| (x / max) * (x / max)).sum();
        return max * s.sqrt();
    }
    let s: f64 = v.iter().map(|x| (x.abs() / max).powf(q)).sum();
    max * s.powf(1.0 / q)
}

/// An element of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue(pub Vec<f64>);

impl VectorValue {
    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self, q: f64) -> f64 {
        lq_norm(&self.0, q)
    }
}

impl From<Vec<f64>> for VectorValue {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `‖v‖_X` for `X = (R^d, ℓ_q)`.
pub fn norm_x(v: &VectorValue, spec: &NormSpec) -> Result<f64> {
    if v.dim() != spec.d {
        return Err(Error::shape("norm_x", spec.d, v.dim()));
    }
    Ok(v.norm(spec.q))
}

/// How a handle decays at infinity; decides the integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    /// `(polynomial) · e^{−t²/2}`: negligible beyond `√(2n+3) + 12`.
    Gaussian,
    /// Decays at least like `|t|^{−1−ε}` after taking the `p`-th power; tails
    /// are integrated explicitly.
    Algebraic,
    /// No decay declared; norms are refused.
    Unknown,
}

type EvalFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// A deterministic, thread-safe map `t ↦ g(t) ∈ R^d`.
#[derive(Clone)]
pub struct FunctionHandle {
    dim: usize,
    decay: Decay,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("dim", &self.dim)
            .field("decay", &self.decay)
            .finish_non_exhaustive()
    }
}

impl FunctionHandle {
    /// `eval(t, out)` must fill `out` (length `dim`).
    pub fn new<F>(dim: usize, decay: Decay, eval: F) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            dim,
            decay,
            eval: Arc::new(eval),
        }
    }

    pub fn scalar<F>(decay: Decay, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, decay, move |t, out| out[0] = eval(t))
    }

    /// The weighted handle `t ↦ f(t) e^{−t²/2}` of an unweighted `f`.
    ///
    /// Values of `f` beyond what `e^{−t²/2}` can absorb overflow; use this for
    /// moderate growth only.
    pub fn from_plain<F>(dim: usize, decay: Decay, f: F) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(dim, decay, move |t, out| {
            f(t, out);
            let w = (-0.5 * t * t).exp();
            out.iter_mut().for_each(|x| *x *= w);
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    #[inline]
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        (self.eval)(t, out)
    }

    pub fn eval(&self, t: f64) -> VectorValue {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        VectorValue(out)
    }

    /// `s · g`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        Self::new(self.dim, self.decay, move |t, out| {
            inner(t, out);
            out.iter_mut().for_each(|x| *x *= s);
        })
    }

    /// `g − h`; decays like the slower of the two.
    pub fn difference(&self, other: &FunctionHandle) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::shape("function difference", self.dim, other.dim));
        }
        let decay = match (self.decay, other.decay) {
            (Decay::Unknown, _) | (_, Decay::Unknown) => Decay::Unknown,
            (Decay::Gaussian, Decay::Gaussian) => Decay::Gaussian,
            _ => Decay::Algebraic,
        };
        let a = Arc::clone(&self.eval);
        let b = Arc::clone(&other.eval);
        let dim = self.dim;
        Ok(Self::new(dim, decay, move |t, out| {
            a(t, out);
            let mut tmp = [0.0; 8];
            if dim <= tmp.len() {
                b(t, &mut tmp[..dim]);
                out.iter_mut().zip(&tmp[..dim]).for_each(|(x, y)| *x -= y);
            } else {
                let mut tmp = vec![0.0; dim];
                b(t, &mut tmp);
                out.iter_mut().zip(&tmp).for_each(|(x, y)| *x -= y);
            }
        }))
    }
}

/// `‖g(t)‖_q^p`, with switch functions at the places where it may have kinks.
struct NormPower<'a> {
    g: &'a FunctionHandle,
    q: f64,
    p: f64,
}

impl NormPower<'_> {
    fn pair_switches(&self) -> bool {
        self.q.is_infinite() && self.g.dim > 1
    }
}

impl Integrand for NormPower<'_> {
    fn switch_count(&self) -> usize {
        let d = self.g.dim;
        if self.pair_switches() {
            d + d * (d - 1) / 2
        } else {
            d
        }
    }

    fn eval(&self, t: f64, work: &mut Vec<f64>, switches: &mut [f64]) -> f64 {
        let d = self.g.dim;
        work.resize(d, 0.0);
        self.g.eval_into(t, work);
        switches[..d].copy_from_slice(work);
        if self.pair_switches() {
            let mut k = d;
            for i in 0..d {
                for j in i + 1..d {
                    switches[k] = work[i].abs() - work[j].abs();
                    k += 1;
                }
            }
        }
        let n = lq_norm(work, self.q);
        if self.p == 2.0 {
            n * n
        } else if self.p == 1.0 {
            n
        } else {
            n.powf(self.p)
        }
    }
}

fn check_handle(g: &FunctionHandle, spec: &NormSpec) -> Result<()> {
    if g.dim != spec.d {
        return Err(Error::shape("weighted norm", spec.d, g.dim));
    }
    if g.decay == Decay::Unknown {
        return Err(Error::Usage(
            "handle declares no decay; the weighted norm may diverge".into(),
        ));
    }
    if spec.p.is_infinite() {
        return Err(Error::Usage(
            "p = ∞ is not supported by the integrated norm; sample densely instead".into(),
        ));
    }
    Ok(())
}

/// Panel breakpoints for a degree-`n` integrand: the rule's nodes, half-unit
/// steps out to `√(2n+3) + 12`.
pub fn norm_domain(rule: &QuadratureRule, decay: Decay) -> Domain {
    let t_max = rule.sqrt_big_n() + TAIL_MARGIN;
    let mut pts: Vec<f64> = rule.nodes().to_vec();
    let outer = rule.nodes().first().copied().unwrap_or(0.0).abs();
    let mut x = outer + 0.5;
    while x < t_max {
        pts.push(x);
        pts.push(-x);
        x += 0.5;
    }
    pts.push(t_max);
    pts.push(-t_max);
    if rule.is_empty() || outer == 0.0 {
        pts.push(0.0);
    }
    let domain = Domain::from_breakpoints(&pts);
    match decay {
        Decay::Algebraic => domain.with_tails(t_max),
        _ => domain,
    }
}

/// `‖g‖_p` using the zeros of `ℋ_{n+1}` for `rule` of degree `n` as panel breakpoints.
pub fn weighted_lp_norm_with(
    g: &FunctionHandle,
    spec: &NormSpec,
    rule: &QuadratureRule,
    opts: &PanelOptions,
) -> Result<f64> {
    check_handle(g, spec)?;
    let domain = norm_domain(rule, g.decay);
    let integrand = NormPower {
        g,
        q: spec.q,
        p: spec.p,
    };
    let v = integrate(&integrand, &domain, opts)?;
    Ok(v.max(0.0).powf(1.0 / spec.p))
}

/// `(∫_a^b ‖g(t)‖_q^p dt)^{1/p}`, with the nodes of `rule` inside `[a, b]` as
/// breakpoints.
pub fn weighted_lp_norm_on_interval(
    g: &FunctionHandle,
    spec: &NormSpec,
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    opts: &PanelOptions,
) -> Result<f64> {
    check_handle(g, spec)?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    let mut pts: Vec<f64> = rule.nodes().iter().copied().filter(|t| *t > a && *t < b).collect();
    let steps = ((b - a) / 0.5).ceil() as usize;
    pts.extend((0..=steps).map(|k| (a + 0.5 * k as f64).min(b)));
    let integrand = NormPower {
        g,
        q: spec.q,
        p: spec.p,
    };
    let v = integrate(&integrand, &Domain::from_breakpoints(&pts), opts)?;
    Ok(v.max(0.0).powf(1.0 / spec.p))
}

/// `‖g‖_p = (∫ ‖g(t)‖_q^p dt)^{1/p}` for a handle of degree at most `n_hint`.
pub fn weighted_lp_norm(g: &FunctionHandle, spec: &NormSpec, n_hint: usize) -> Result<f64> {
    check_handle(g, spec)?;
    let rule = build_rule(n_hint)?;
    weighted_lp_norm_with(g, spec, &rule, &PanelOptions::default())
}

/// Samples an unweighted `f` at the nodes of `rule`.
pub fn sample_at_nodes<F>(rule: &QuadratureRule, dim: usize, f: F) -> NodeValues
where
    F: Fn(f64, &mut [f64]),
{
    let mut data = vec![0.0; rule.len() * dim];
    for (j, &t) in rule.nodes().iter().enumerate() {
        f(t, &mut data[j * dim..(j + 1) * dim]);
    }
    NodeValues::from_raw_flat(rule, dim, data).expect("sample buffer matches rule")
}

/// Samples a weighted handle `g = f e^{−t²/2}` at the nodes of `rule`.
pub fn sample_weighted_at_nodes(rule: &QuadratureRule, g: &FunctionHandle) -> NodeValues {
    let dim = g.dim();
    let mut data = vec![0.0; rule.len() * dim];
    for (j, &t) in rule.nodes().iter().enumerate() {
        g.eval_into(t, &mut data[j * dim..(j + 1) * dim]);
    }
    NodeValues::from_weighted_flat(rule, dim, data).expect("sample buffer matches rule")
}
