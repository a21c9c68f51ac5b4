//! Gauss–Hermite quadrature at the zeros of `H_{n+1}`.
//!
//! A [`QuadratureRule`] of degree parameter `n` has `n + 1` nodes
//! `t_1 > … > t_{n+1}` and integrates `q(t) e^{-t²}` exactly for polynomials
//! of degree `≤ 2n + 1`. Besides the Gaussian weights `λ_j` it stores the
//! exponential-free weights `μ_j = λ_j e^{t_j²} = 2 / ℋ_{n+1}'(t_j)²`, which
//! remain representable for every supported `n` while `λ_j` underflows at the
//! outermost nodes once `t_j² > 708`.
//!
//! Indices in this module are zero-based: `nodes()[0]` is the largest zero.

use crate::error::{Error, Result};
use crate::hermite::hermite_pair_unchecked;
use crate::tridiag::symmetric_tridiagonal_eigenvalues;

/// Largest supported degree parameter.
pub const MAX_DEGREE: usize = 100_000;

const NEWTON_STEPS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    n: usize,
    big_n: f64,
    nodes: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    derivs: Vec<f64>,
}

impl QuadratureRule {
    /// Degree parameter; the rule has `n + 1` nodes.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `N = 2n + 3`.
    pub fn big_n(&self) -> f64 {
        self.big_n
    }

    /// `√N`, the bound on all nodes.
    pub fn sqrt_big_n(&self) -> f64 {
        self.big_n.sqrt()
    }

    /// Zeros of `H_{n+1}` in descending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Gaussian weights `λ_j`; entries underflow to zero where `t_j² ≳ 745`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `ln λ_j = ln μ_j − t_j²`, finite even where `λ_j` underflows.
    pub fn log_lambda(&self, j: usize) -> f64 {
        self.mu[j].ln() - self.nodes[j] * self.nodes[j]
    }

    /// Weights `μ_j = λ_j e^{t_j²}`.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `ℋ_{n+1}'(t_j)`.
    pub fn derivatives(&self) -> &[f64] {
        &self.derivs
    }

    /// Gap to the nearest neighbouring node (the whole span for a one-point rule).
    pub fn local_spacing(&self, j: usize) -> f64 {
        let left = if j > 0 { self.nodes[j - 1] - self.nodes[j] } else { f64::INFINITY };
        let right = if j + 1 < self.nodes.len() {
            self.nodes[j] - self.nodes[j + 1]
        } else {
            f64::INFINITY
        };
        let s = left.min(right);
        if s.is_finite() {
            s
        } else {
            self.sqrt_big_n()
        }
    }

    /// Reassembles a rule from stored nodes and weights (e.g. a parsed `nodes`
    /// dump). Derivatives are recomputed from the nodes.
    pub fn from_parts(n: usize, nodes: Vec<f64>, lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let len = n + 1;
        for (ctx, v) in [("nodes", &nodes), ("lambda", &lambda), ("mu", &mu)] {
            if v.len() != len {
                return Err(Error::shape(ctx, len, v.len()));
            }
        }
        let derivs = nodes.iter().map(|&t| hermite_pair_unchecked(n + 1, t).1).collect();
        Ok(Self {
            n,
            big_n: 2.0 * n as f64 + 3.0,
            nodes,
            lambda,
            mu,
            derivs,
        })
    }
}

/// Builds the `(n+1)`-point Gauss–Hermite rule.
///
/// Initial guesses are the eigenvalues of the Jacobi matrix (zero diagonal,
/// off-diagonal `√(k/2)`); each non-negative guess is then polished by Newton
/// steps on `ℋ_{n+1}` and mirrored, so node antisymmetry holds exactly.
pub fn build_rule(n: usize) -> Result<QuadratureRule> {
    if n > MAX_DEGREE {
        return Err(Error::Capacity(format!(
            "degree parameter {n} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    let size = n + 1;
    let off: Vec<f64> = (1..size).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let guesses = symmetric_tridiagonal_eigenvalues(&vec![0.0; size], &off)?;

    let half = (n + 2) / 2;
    let has_centre = size % 2 == 1;
    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_derivs = Vec::with_capacity(half);
    for (j, &guess) in guesses.iter().take(half).enumerate() {
        let (t, d) = if has_centre && j + 1 == half {
            (0.0, hermite_pair_unchecked(n + 1, 0.0).1)
        } else {
            polish_zero(n + 1, guess.abs())?
        };
        pos_nodes.push(t);
        pos_derivs.push(d);
    }

    let mut nodes = vec![0.0; size];
    let mut derivs = vec![0.0; size];
    // ℋ_{n+1}' has parity (−1)^n.
    let deriv_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    for j in 0..half {
        nodes[j] = pos_nodes[j];
        derivs[j] = pos_derivs[j];
        nodes[size - 1 - j] = -pos_nodes[j];
        derivs[size - 1 - j] = deriv_sign * pos_derivs[j];
    }
    if has_centre {
        nodes[half - 1] = 0.0;
    }

    if nodes.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Numerical(format!(
            "Hermite zeros for n = {n} are not strictly descending"
        )));
    }

    let mu: Vec<f64> = derivs.iter().map(|d| 2.0 / (d * d)).collect();
    let lambda = mu.iter().zip(&nodes).map(|(m, t)| m * (-t * t).exp()).collect();
    Ok(QuadratureRule {
        n,
        big_n: 2.0 * n as f64 + 3.0,
        nodes,
        lambda,
        mu,
        derivs,
    })
}

fn polish_zero(order: usize, guess: f64) -> Result<(f64, f64)> {
    let mut t = guess;
    for _ in 0..NEWTON_STEPS {
        let (h, d) = hermite_pair_unchecked(order, t);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Numerical(format!(
                "vanishing derivative while polishing zero of H_{order} near {t}"
            )));
        }
        let step = h / d;
        t -= step;
        if step.abs() <= 2.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if !t.is_finite() {
        return Err(Error::Numerical(format!("Newton diverged for zero of H_{order}")));
    }
    let (_, d) = hermite_pair_unchecked(order, t);
    Ok((t, d))
}

/// `Σ λ_j s_j`: the Gaussian integral `∫ q(t) e^{-t²} dt` when `s_j = q(t_j)`
/// and `deg q ≤ 2n + 1`.
pub fn integrate_gaussian(rule: &QuadratureRule, samples: &[f64]) -> Result<f64> {
    if samples.len() != rule.len() {
        return Err(Error::shape("integrate_gaussian samples", rule.len(), samples.len()));
    }
    Ok(rule.lambda.iter().zip(samples).map(|(l, s)| l * s).sum())
}

/// Checks `t_{j+1}^{n+1} < t_j^{n} < t_j^{n+1}` for all `j`: the zeros of
/// `H_n` (rule of degree `n − 1`) separate those of `H_{n+1}` (degree `n`).
pub fn zeros_interlace(rule_n: &QuadratureRule, rule_n_minus_1: &QuadratureRule) -> Result<bool> {
    if rule_n.degree() != rule_n_minus_1.degree() + 1 {
        return Err(Error::Usage(format!(
            "zeros_interlace needs consecutive degrees, got {} and {}",
            rule_n.degree(),
            rule_n_minus_1.degree()
        )));
    }
    let outer = rule_n.nodes();
    Ok(rule_n_minus_1
        .nodes()
        .iter()
        .enumerate()
        .all(|(j, &inner)| outer[j + 1] < inner && inner < outer[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::eval_hermite_sequence;
    use std::f64::consts::PI;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn one_point_rule() {
        let r = build_rule(0).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.lambda()[0] - SQRT_PI).abs() < 1e-14);
        assert!((r.lambda()[0] - 1.772_453_850_9).abs() < 1e-10);
    }

    #[test]
    fn two_point_rule() {
        let r = build_rule(1).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.nodes()[0] - s).abs() < 1e-15);
        assert!((r.nodes()[1] + s).abs() < 1e-15);
        for &l in r.lambda() {
            assert!((l - SQRT_PI / 2.0).abs() < 1e-14);
            assert!((l - 0.886_226_925_5).abs() < 1e-10);
        }
    }

    #[test]
    fn three_point_rule() {
        let r = build_rule(2).unwrap();
        let s = 1.5f64.sqrt();
        assert!((r.nodes()[0] - s).abs() < 1e-15);
        assert_eq!(r.nodes()[1], 0.0);
        assert!((r.nodes()[2] + s).abs() < 1e-15);
        let expected = [SQRT_PI / 6.0, 2.0 * SQRT_PI / 3.0, SQRT_PI / 6.0];
        for (l, e) in r.lambda().iter().zip(expected) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    #[test]
    fn invariants_hold() {
        for n in [3usize, 10, 47, 128, 300] {
            let r = build_rule(n).unwrap();
            let sqrt_n = r.sqrt_big_n();
            assert_eq!(r.len(), n + 1);
            for j in 0..=n {
                assert_eq!(r.nodes()[j], -r.nodes()[n - j]);
                assert_eq!(r.mu()[j], r.mu()[n - j]);
                assert!(r.nodes()[j].abs() < sqrt_n);
                assert!(r.mu()[j] > 0.0 && r.lambda()[j] > 0.0);
            }
            assert!(r.nodes()[0] <= (2.0 * n as f64 + 3.0).sqrt());
            let total: f64 = r.lambda().iter().sum();
            assert!((total - SQRT_PI).abs() < 1e-12, "n = {n}: {total}");
            // μ decreasing towards the centre.
            for j in 0..(n + 2) / 2 - 1 {
                assert!(r.mu()[j] > r.mu()[j + 1]);
            }
        }
    }

    #[test]
    fn newton_contract() {
        for n in [5usize, 64, 255, 1024] {
            let r = build_rule(n).unwrap();
            for j in 0..=n {
                let (h, d) = hermite_pair_unchecked(n + 1, r.nodes()[j]);
                let bound = 1e-13 * d.abs() * r.local_spacing(j);
                assert!(h.abs() <= bound, "n = {n}, j = {j}: |h| = {}", h.abs());
            }
        }
    }

    #[test]
    fn weight_identity_through_lower_neighbour() {
        // μ_j = 1 / ((n+1) ℋ_n(t_j)²) at zeros of ℋ_{n+1}.
        let n = 200;
        let r = build_rule(n).unwrap();
        for (j, &t) in r.nodes().iter().enumerate() {
            let h_n = eval_hermite_sequence(n, t).unwrap()[n];
            let alt = 1.0 / ((n as f64 + 1.0) * h_n * h_n);
            assert!((alt / r.mu()[j] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_integrals() {
        let r1 = build_rule(1).unwrap();
        let t2: Vec<f64> = r1.nodes().iter().map(|t| t * t).collect();
        assert!((integrate_gaussian(&r1, &t2).unwrap() - SQRT_PI / 2.0).abs() < 1e-14);

        let r2 = build_rule(2).unwrap();
        let t4: Vec<f64> = r2.nodes().iter().map(|t| t.powi(4)).collect();
        assert!((integrate_gaussian(&r2, &t4).unwrap() - 3.0 * SQRT_PI / 4.0).abs() < 1e-14);

        let r = build_rule(33).unwrap();
        let ones = vec![1.0; r.len()];
        assert!((integrate_gaussian(&r, &ones).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!(matches!(integrate_gaussian(&r, &[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn interlacing() {
        let r0 = build_rule(0).unwrap();
        let r1 = build_rule(1).unwrap();
        let r2 = build_rule(2).unwrap();
        assert!(zeros_interlace(&r1, &r0).unwrap());
        assert!(zeros_interlace(&r2, &r1).unwrap());
        assert!(matches!(zeros_interlace(&r2, &r2), Err(Error::Usage(_))));
        assert!(zeros_interlace(&r1, &r2).is_err());
        for n in [10usize, 99, 512] {
            let a = build_rule(n).unwrap();
            let b = build_rule(n - 1).unwrap();
            assert!(zeros_interlace(&a, &b).unwrap());
        }
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(build_rule(MAX_DEGREE + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn log_lambda_is_finite_where_lambda_underflows() {
        let r = build_rule(600).unwrap();
        assert_eq!(r.lambda()[0], 0.0);
        assert!(r.log_lambda(0).is_finite());
        assert!(r.log_lambda(0) < -700.0);
    }
}
