use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// `|A x - b|_2`
    pub residual: f64,
}

/// Lawson–Hanson active-set solver for `min |A x - b|_2` subject to `x >= 0`.
///
/// Stops when the KKT violation (largest positive gradient component over the
/// active set) falls below `1e-10 * sigma_1(A) * |b|`; fails after `10 n` iterations.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::invalid("nnls: dimension mismatch"));
    }
    let bnorm = b.norm();
    if bnorm == 0.0 || n == 0 {
        return Ok(NnlsSolution { x: DVector::zeros(n), iterations: 0, residual: bnorm });
    }
    // work with |b| = 1 so the tolerance is scale free
    let bs = b / bnorm;
    let sigma1 = a.clone().singular_values().max();
    let tol = 1e-10 * sigma1;
    let max_iter = 10 * n;

    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let mut iterations = 0;
    let at = a.transpose();

    loop {
        let w = &at * (&bs - a * &x);
        let mut blocked = vec![false; n];
        let mut entered = None;
        // pick the most violating index whose unconstrained solve is positive
        loop {
            let cand = (0..n)
                .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
                .max_by(|&i, &j| w[i].total_cmp(&w[j]));
            let Some(j) = cand else { break };
            passive[j] = true;
            let z = solve_passive(a, &bs, &passive);
            if z[j] > 0.0 {
                entered = Some(z);
                break;
            }
            passive[j] = false;
            blocked[j] = true;
        }
        let Some(mut z) = entered else { break };

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NoConvergence { iterations: max_iter });
            }
            if (0..n).all(|i| !passive[i] || z[i] > 0.0) {
                x = z;
                break;
            }
            let mut step = f64::INFINITY;
            for i in 0..n {
                if passive[i] && z[i] <= 0.0 {
                    step = step.min(x[i] / (x[i] - z[i]));
                }
            }
            for i in 0..n {
                if passive[i] {
                    x[i] += step * (z[i] - x[i]);
                }
            }
            for i in 0..n {
                if passive[i] && x[i] <= 1e-300 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            z = solve_passive(a, &bs, &passive);
        }
    }

    x *= bnorm;
    let residual = (a * &x - b).norm();
    Ok(NnlsSolution { x, iterations, residual })
}

/// Unconstrained least squares on the passive columns; zero elsewhere.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut out = DVector::zeros(passive.len());
    if cols.is_empty() {
        return out;
    }
    let sub = a.select_columns(cols.iter());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-14 * (a.nrows().max(cols.len()) as f64);
    let z = svd.solve(b, eps).expect("svd computed with u and v");
    for (k, &c) in cols.iter().enumerate() {
        out[c] = z[k];
    }
    out
}
