//! Composite 16-point Gauss–Legendre panel integration with kink splitting and
//! dyadic refinement.
//!
//! Integrands of the form `‖g(t)‖^p` are piecewise analytic: they lose
//! smoothness only where some "switch" function (a component of `g`, or the
//! difference of two component magnitudes for the max-norm) changes sign.
//! Each base panel is sampled, sign changes of the switches are located by
//! regula falsi, and the panel is cut at those points. Every resulting piece
//! is then refined by bisection until the 16-point estimate of the piece and
//! of its two halves agree to within the piece's share of the tolerance.
//!
//! Panels are processed in parallel; contributions are collected in panel
//! order and combined by pairwise summation, so the result does not depend on
//! the number of worker threads.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::sync::OnceLock;

/// An integrand together with optional switch functions whose sign changes
/// mark points where the integrand is not smooth.
pub trait Integrand: Sync {
    fn switch_count(&self) -> usize {
        0
    }

    /// Returns the integrand at `t`; writes the switch values into `switches`
    /// (of length [`switch_count`](Self::switch_count)). `work` is scratch
    /// space owned by the calling worker.
    fn eval(&self, t: f64, work: &mut Vec<f64>, switches: &mut [f64]) -> f64;
}

impl<F> Integrand for F
where
    F: Fn(f64) -> f64 + Sync,
{
    fn eval(&self, t: f64, _work: &mut Vec<f64>, _switches: &mut [f64]) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PanelOptions {
    /// Target accuracy relative to the coarse estimate of the whole integral.
    pub rel_tol: f64,
    /// Equal sub-panels per breakpoint interval before refinement.
    pub split: usize,
    pub max_depth: usize,
    /// Absolute floor on the tolerance. Integrands that are pure rounding noise
    /// (differences of nearly equal functions) need it to terminate early.
    pub abs_tol: f64,
    /// Bisections allowed per piece; the remainder counts as unresolved.
    pub max_panels: usize,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            split: 1,
            max_depth: 40,
            abs_tol: 0.0,
            max_panels: 1 << 12,
        }
    }
}

impl PanelOptions {
    /// Resolves `∫ ‖e‖^p` only down to `floor^p`, so the norm of `e` is
    /// accurate to about `floor` in absolute terms.
    pub fn with_norm_floor(mut self, floor: f64, p: f64) -> Self {
        self.abs_tol = floor.powf(p);
        self
    }
}

/// Change of variables applied on a panel.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// `t = sign · origin · e^s`, `dt = origin · e^s ds`.
    ExpTail { origin: f64, sign: f64 },
}

impl Map {
    /// Abscissa and Jacobian at parameter `s`.
    #[inline]
    fn point(self, s: f64) -> (f64, f64) {
        match self {
            Map::Identity => (s, 1.0),
            Map::ExpTail { origin, sign } => {
                let jac = origin * s.exp();
                (sign * jac, jac)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
}

/// Integration domain assembled from finite breakpoints and optional
/// semi-infinite tails.
#[derive(Debug, Clone, Default)]
pub struct Domain {
    panels: Vec<Panel>,
}

// Tails stop at |t| = 1e100, where every integrand we handle is negligible.
const TAIL_LIMIT: f64 = 1e100;
const TAIL_PANEL: f64 = 1.0;

impl Domain {
    /// Panels between consecutive entries of `breakpoints` (sorted internally;
    /// duplicates dropped).
    pub fn from_breakpoints(breakpoints: &[f64]) -> Self {
        let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
        let panels = pts
            .windows(2)
            .map(|w| Panel {
                a: w[0],
                b: w[1],
                map: Map::Identity,
            })
            .collect();
        Self { panels }
    }

    /// Adds `(−∞, −origin]` and `[origin, ∞)` through the substitution
    /// `|t| = origin · e^s`.
    pub fn with_tails(mut self, origin: f64) -> Self {
        assert!(origin > 0.0, "tail origin must be positive");
        let s_max = (TAIL_LIMIT / origin).ln();
        let count = (s_max / TAIL_PANEL).ceil() as usize;
        for sign in [-1.0, 1.0] {
            for k in 0..count {
                let a = k as f64 * TAIL_PANEL;
                let b = ((k + 1) as f64 * TAIL_PANEL).min(s_max);
                self.panels.push(Panel {
                    a,
                    b,
                    map: Map::ExpTail { origin, sign },
                });
            }
        }
        self
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }
}

/// Nodes and weights of the 16-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre::<16>())
}

fn gauss_legendre<const M: usize>() -> ([f64; M], [f64; M]) {
    let mut x = [0.0; M];
    let mut w = [0.0; M];
    let m = M as f64;
    for i in 0..M.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=M {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[M - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[M - 1 - i] = wi;
    }
    (x, w)
}

struct Worker<'a, F: Integrand + ?Sized> {
    f: &'a F,
    map: Map,
    work: Vec<f64>,
    sw: Vec<f64>,
}

impl<F: Integrand + ?Sized> Worker<'_, F> {
    #[inline]
    fn value(&mut self, s: f64) -> f64 {
        let (t, jac) = self.map.point(s);
        jac * self.f.eval(t, &mut self.work, &mut self.sw)
    }

    fn gl(&mut self, a: f64, b: f64) -> f64 {
        let (x, w) = gauss_legendre_16();
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for i in 0..16 {
            acc += w[i] * self.value(c + h * x[i]);
        }
        acc * h
    }

    /// Splits `[a, b]` at the sign changes of the switch functions.
    fn cut_points(&mut self, a: f64, b: f64) -> Vec<f64> {
        let k = self.f.switch_count();
        let mut cuts = vec![a];
        if k == 0 {
            cuts.push(b);
            return cuts;
        }
        let (x, _) = gauss_legendre_16();
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut samples = Vec::with_capacity(18);
        samples.push(a);
        samples.extend(x.iter().map(|xi| c + h * xi));
        samples.push(b);
        let mut vals = Vec::with_capacity(18 * k);
        for &s in &samples {
            self.value(s);
            vals.extend_from_slice(&self.sw);
        }
        let mut roots = Vec::new();
        for i in 0..samples.len() - 1 {
            for sidx in 0..k {
                let fl = vals[i * k + sidx];
                let fr = vals[(i + 1) * k + sidx];
                if fl == 0.0 && i > 0 {
                    roots.push(samples[i]);
                } else if fl * fr < 0.0 {
                    roots.push(self.locate(sidx, samples[i], samples[i + 1], fl, fr));
                }
            }
        }
        roots.sort_by(|p, q| p.total_cmp(q));
        let min_gap = 1e-12 * (b - a);
        for r in roots {
            if r - cuts.last().copied().unwrap_or(a) > min_gap && b - r > min_gap {
                cuts.push(r);
            }
        }
        cuts.push(b);
        cuts
    }

    /// Illinois variant of regula falsi on switch `idx`, bracket `[a, b]`.
    fn locate(&mut self, idx: usize, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
        let tol = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300);
        let mut side = 0i8;
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            x = (a * fb - b * fa) / (fb - fa);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            self.value(x);
            let fx = self.sw[idx];
            if fx * fb > 0.0 {
                b = x;
                fb = fx;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else if fx * fa > 0.0 {
                a = x;
                fa = fx;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                return x;
            }
            if b - a <= tol {
                break;
            }
        }
        x
    }

    fn refine(&mut self, a: f64, b: f64, whole: f64, tol: f64, depth: usize, budget: &mut Budget) -> f64 {
        let m = 0.5 * (a + b);
        let left = self.gl(a, m);
        let right = self.gl(m, b);
        let halves = left + right;
        let diff = (halves - whole).abs();
        if diff <= tol {
            return halves;
        }
        if !budget.take(depth) || m <= a || m >= b {
            budget.unresolved += diff;
            return halves;
        }
        self.refine(a, m, left, 0.5 * tol, depth + 1, budget) + self.refine(m, b, right, 0.5 * tol, depth + 1, budget)
    }
}

/// Refinement allowance of one piece.
struct Budget {
    panels: usize,
    max_depth: usize,
    unresolved: f64,
}

impl Budget {
    fn new(opts: &PanelOptions) -> Self {
        Self {
            panels: opts.max_panels,
            max_depth: opts.max_depth,
            unresolved: 0.0,
        }
    }

    fn take(&mut self, depth: usize) -> bool {
        if depth >= self.max_depth || self.panels == 0 {
            return false;
        }
        self.panels -= 1;
        true
    }
}

/// Sums in a fixed binary tree so the result is independent of scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Integrates `f` over `domain`.
pub fn integrate<F: Integrand + ?Sized>(f: &F, domain: &Domain, opts: &PanelOptions) -> Result<f64> {
    let split = opts.split.max(1);
    let base: Vec<Panel> = domain
        .panels
        .iter()
        .flat_map(|p| {
            let h = (p.b - p.a) / split as f64;
            (0..split).map(move |k| Panel {
                a: p.a + h * k as f64,
                b: if k + 1 == split { p.b } else { p.a + h * (k + 1) as f64 },
                map: p.map,
            })
        })
        .collect();

    let new_worker = |map: Map| Worker {
        f,
        map,
        work: Vec::new(),
        sw: vec![0.0; f.switch_count()],
    };

    // Phase 1: cut at kinks, coarse estimate per piece.
    let pieces: Vec<Vec<(Panel, f64)>> = base
        .par_iter()
        .map(|p| {
            let mut w = new_worker(p.map);
            let cuts = w.cut_points(p.a, p.b);
            cuts.windows(2)
                .map(|c| {
                    let piece = Panel {
                        a: c[0],
                        b: c[1],
                        map: p.map,
                    };
                    (piece, w.gl(c[0], c[1]))
                })
                .collect()
        })
        .collect();
    let pieces: Vec<(Panel, f64)> = pieces.into_iter().flatten().collect();
    let coarse: Vec<f64> = pieces.iter().map(|p| p.1).collect();
    let estimate = pairwise_sum(&coarse);
    if !estimate.is_finite() {
        return Err(Error::Numerical("integrand produced non-finite values".into()));
    }
    if pieces.is_empty() {
        return Ok(0.0);
    }

    // Phase 2: dyadic refinement of every piece against its share of the tolerance.
    let tol = (opts.rel_tol * estimate.abs()).max(opts.abs_tol) / pieces.len() as f64;
    let refined: Vec<(f64, f64)> = pieces
        .par_iter()
        .map(|(p, whole)| {
            let mut w = new_worker(p.map);
            let mut budget = Budget::new(opts);
            let v = w.refine(p.a, p.b, *whole, tol, 0, &mut budget);
            (v, budget.unresolved)
        })
        .collect();
    let values: Vec<f64> = refined.iter().map(|r| r.0).collect();
    let unresolved: f64 = refined.iter().map(|r| r.1).sum();
    let total = pairwise_sum(&values);
    if !total.is_finite() {
        return Err(Error::Numerical("integrand produced non-finite values".into()));
    }
    if unresolved > (1e-6 * total.abs()).max(opts.abs_tol).max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "panel integration did not converge (unresolved {unresolved:e} of {total:e})"
        )));
    }
    Ok(total)
}

/// A vector of integrands evaluated together, e.g. all Hermite coefficients
/// of one function.
pub trait VectorIntegrand: Sync {
    fn len(&self) -> usize;

    /// Adds `weight · f(t)` into `acc`.
    fn accumulate(&self, t: f64, weight: f64, acc: &mut [f64]);
}

fn gl_vector<F: VectorIntegrand + ?Sized>(f: &F, map: Map, a: f64, b: f64) -> Vec<f64> {
    let (x, w) = gauss_legendre_16();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = vec![0.0; f.len()];
    for i in 0..16 {
        let (t, jac) = map.point(c + h * x[i]);
        f.accumulate(t, w[i] * h * jac, &mut acc);
    }
    acc
}

fn max_diff(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(z)
        .fold(0.0f64, |m, ((a, b), c)| m.max((a + b - c).abs()))
}

#[allow(clippy::too_many_arguments)]
fn refine_vector<F: VectorIntegrand + ?Sized>(
    f: &F,
    map: Map,
    a: f64,
    b: f64,
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
    budget: &mut Budget,
) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let left = gl_vector(f, map, a, m);
    let mut right = gl_vector(f, map, m, b);
    let diff = max_diff(&left, &right, &whole);
    if diff <= tol || m <= a || m >= b || !budget.take(depth) {
        if diff > tol {
            budget.unresolved = budget.unresolved.max(diff);
        }
        right.iter_mut().zip(&left).for_each(|(r, l)| *r += l);
        return right;
    }
    let mut l = refine_vector(f, map, a, m, left, 0.5 * tol, depth + 1, budget);
    let r = refine_vector(f, map, m, b, right, 0.5 * tol, depth + 1, budget);
    l.iter_mut().zip(&r).for_each(|(x, y)| *x += y);
    l
}

fn pairwise_sum_vectors(xs: &[Vec<f64>], len: usize) -> Vec<f64> {
    match xs.len() {
        0 => vec![0.0; len],
        1 => xs[0].clone(),
        _ => {
            let mid = xs.len() / 2;
            let mut l = pairwise_sum_vectors(&xs[..mid], len);
            let r = pairwise_sum_vectors(&xs[mid..], len);
            l.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
            l
        }
    }
}

/// Integrates every component of `f` over `domain` on shared panels.
///
/// Refinement is driven by the largest component error against
/// `rel_tol · max_k |I_k|`; no kink detection is performed, so callers should
/// put known non-smooth points into the breakpoints.
pub fn integrate_vector<F: VectorIntegrand + ?Sized>(f: &F, domain: &Domain, opts: &PanelOptions) -> Result<Vec<f64>> {
    let len = f.len();
    let split = opts.split.max(1);
    let base: Vec<Panel> = domain
        .panels
        .iter()
        .flat_map(|p| {
            let h = (p.b - p.a) / split as f64;
            (0..split).map(move |k| Panel {
                a: p.a + h * k as f64,
                b: if k + 1 == split { p.b } else { p.a + h * (k + 1) as f64 },
                map: p.map,
            })
        })
        .collect();
    if base.is_empty() {
        return Ok(vec![0.0; len]);
    }
    let coarse: Vec<Vec<f64>> = base.par_iter().map(|p| gl_vector(f, p.map, p.a, p.b)).collect();
    let estimate = pairwise_sum_vectors(&coarse, len);
    if estimate.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("integrand produced non-finite values".into()));
    }
    let scale = estimate.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = (opts.rel_tol * scale).max(opts.abs_tol) / base.len() as f64;
    let refined: Vec<(Vec<f64>, f64)> = base
        .par_iter()
        .zip(coarse)
        .map(|(p, whole)| {
            let mut budget = Budget::new(opts);
            let v = refine_vector(f, p.map, p.a, p.b, whole, tol, 0, &mut budget);
            (v, budget.unresolved)
        })
        .collect();
    let unresolved = refined.iter().fold(0.0f64, |m, r| m.max(r.1));
    let values: Vec<Vec<f64>> = refined.into_iter().map(|r| r.0).collect();
    let total = pairwise_sum_vectors(&values, len);
    if unresolved > (1e-6 * scale).max(opts.abs_tol).max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "panel integration did not converge (unresolved {unresolved:e})"
        )));
    }
    Ok(total)
}
