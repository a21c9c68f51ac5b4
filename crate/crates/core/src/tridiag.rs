//! Eigenvalues of a real symmetric tridiagonal matrix by QL iteration with
//! implicit Wilkinson shifts (eigenvalues only, no eigenvectors).

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Returns the eigenvalues of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples rows `i` and `i+1`), sorted
/// in descending order.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::shape("tridiagonal off-diagonal", n - 1, off.len()));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Numerical(format!(
                    "tridiagonal QL did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("tridiagonal QL produced non-finite eigenvalues".into()));
    }
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        // [[1, 2], [2, 1]] has eigenvalues 3 and −1.
        let ev = symmetric_tridiagonal_eigenvalues(&[1.0, 1.0], &[2.0]).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-14);
        assert!((ev[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn discrete_laplacian() {
        // tridiag(−1, 2, −1) of size n: 2 − 2 cos(kπ/(n+1)).
        let n = 50;
        let ev = symmetric_tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        let mut expected: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn already_diagonal() {
        let ev = symmetric_tridiagonal_eigenvalues(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ev, vec![3.0, 2.0, -1.0]);
    }

    #[test]
    fn shape_mismatch() {
        assert!(symmetric_tridiagonal_eigenvalues(&[1.0, 2.0], &[1.0, 1.0]).is_err());
        assert!(symmetric_tridiagonal_eigenvalues(&[], &[]).unwrap().is_empty());
    }
}
