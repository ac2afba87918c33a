use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::DGOperator;
use crate::linalg::{axpy, dot, norm2, scale};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaMethod {
    /// Power iteration, stopped on the relative Rayleigh-quotient change.
    Power,
    /// Restarted Lanczos, stopped when the top Ritz value settles (or its
    /// residual bound drops below the tolerance).
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaOptions {
    pub method: LambdaMethod,
    pub tol: f64,
    pub max_iters: usize,
    /// Multiplier applied to the estimate (1.0 = exact `λ_max`).
    pub safety: f64,
    pub seed: u64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        Self {
            method: LambdaMethod::Lanczos,
            tol: 1e-10,
            max_iters: 20_000,
            safety: 1.0,
            seed: 7,
        }
    }
}

impl LambdaOptions {
    pub fn power() -> Self {
        Self {
            method: LambdaMethod::Power,
            ..Self::default()
        }
    }
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);
    v
}

/// Largest eigenvalue of a symmetric positive semidefinite `op`.
pub fn estimate_lambda_with(op: impl Fn(&[f64], &mut [f64]), n: usize, opts: &LambdaOptions) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    if !(1.0..=1.2).contains(&opts.safety) {
        return Err(Error::invalid("safety factor must lie in [1, 1.2]"));
    }
    let est = match opts.method {
        LambdaMethod::Power => power(&op, n, opts)?,
        LambdaMethod::Lanczos => lanczos(&op, n, opts)?,
    };
    Ok(est * opts.safety)
}

/// `Λ_k` for the coefficient form of `op`.
pub fn estimate_lambda(op: &DGOperator, opts: &LambdaOptions) -> Result<f64> {
    estimate_lambda_with(|x, y| op.apply_into(x, y), op.n(), opts)
}

fn power(op: &impl Fn(&[f64], &mut [f64]), n: usize, opts: &LambdaOptions) -> Result<f64> {
    let mut v = start_vector(n, opts.seed);
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    for _ in 0..opts.max_iters {
        op(&v, &mut w);
        let rq = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        if (rq - prev).abs() <= opts.tol * rq.abs() {
            return Ok(rq);
        }
        prev = rq;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    Err(Error::NumericalFailure {
        message: format!("power iteration did not converge in {} steps", opts.max_iters),
        estimate: Some(prev),
    })
}

fn lanczos(op: &impl Fn(&[f64], &mut [f64]), n: usize, opts: &LambdaOptions) -> Result<f64> {
    const BASIS: usize = 40;
    let mut start = start_vector(n, opts.seed);
    let mut best: f64 = 0.0;
    let mut used = 0;
    let mut settled = 0;
    while used < opts.max_iters {
        let m_max = BASIS.min(n);
        let mut q: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut last_y = vec![1.0];
        for j in 0..m_max {
            op(&q[j], &mut w);
            used += 1;
            let a = dot(&q[j], &w);
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for qi in &q {
                    let c = dot(qi, &w);
                    axpy(-c, qi, &mut w);
                }
            }
            let b = norm2(&w);
            let (theta, y) = top_ritz(&alpha, &beta);
            let resid = b * y[j].abs();
            if used > 1 && (theta - best).abs() <= opts.tol * theta.abs() {
                settled += 1;
            } else {
                settled = 0;
            }
            best = theta;
            last_y = y;
            if settled >= 3 || resid <= opts.tol * theta.abs() || b <= 1e-14 * theta.abs() || j + 1 == n {
                return Ok(theta);
            }
            beta.push(b);
            let mut next = w.clone();
            scale(1.0 / b, &mut next);
            q.push(next);
        }
        // restart from the current Ritz vector
        start = vec![0.0; n];
        for (yi, qi) in last_y.iter().zip(&q) {
            axpy(*yi, qi, &mut start);
        }
        let ns = norm2(&start);
        scale(1.0 / ns, &mut start);
    }
    Err(Error::NumericalFailure {
        message: format!("Lanczos did not converge in {} operator applications", opts.max_iters),
        estimate: Some(best),
    })
}

/// Largest eigenpair of the Lanczos tridiagonal matrix.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(t);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}
