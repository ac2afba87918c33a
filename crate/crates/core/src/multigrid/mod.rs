//! Richardson smoothing, the W-cycle, the outer multigrid iteration and an
//! unpreconditioned CG baseline.
//!
//! Levels are indexed from 0 (coarsest) in code; tables and reports use the
//! 1-based level count `k`.

mod lambda;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use lambda::{estimate_lambda, estimate_lambda_with, LambdaMethod, LambdaOptions};

use crate::assembly::{assemble_operator, DGOperator, MethodConfig};
use crate::linalg::{axpy, dot, norm2, EnvelopeCholesky};
use crate::space::DGLevel;
use crate::transfer::{build_prolongation, galerkin_coarse_operator, TransferPair};
use crate::{Error, Result};

/// `m` steps of `z ← z + Λ^{-1}(g − A z)`.
pub fn richardson(op: &DGOperator, lambda: f64, g: &[f64], z: &mut [f64], steps: usize) {
    if steps == 0 {
        return;
    }
    let mut az = vec![0.0; z.len()];
    let inv = 1.0 / lambda;
    for _ in 0..steps {
        op.apply_into(z, &mut az);
        for ((zi, gi), ai) in z.iter_mut().zip(g).zip(&az) {
            *zi += inv * (gi - ai);
        }
    }
}

/// How a table's single smoothing count `m` maps to pre/post steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingSplit {
    /// `m1 = m2 = m`
    Both,
    /// `m1 + m2 = m`, `m1 = ⌈m/2⌉`
    Total,
}

impl FromStr for SmoothingSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both" | "m1=m2=m" | "symmetric" => Ok(SmoothingSplit::Both),
            "total" | "m1+m2=m" | "split" => Ok(SmoothingSplit::Total),
            other => Err(Error::invalid(format!("unknown smoothing split '{other}'"))),
        }
    }
}

impl fmt::Display for SmoothingSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothingSplit::Both => "both",
            SmoothingSplit::Total => "total",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleParams {
    pub m1: usize,
    pub m2: usize,
}

impl CycleParams {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 + m2 == 0 {
            return Err(Error::invalid("at least one smoothing step is required"));
        }
        Ok(Self { m1, m2 })
    }

    pub fn from_m(m: usize, split: SmoothingSplit) -> Result<Self> {
        match split {
            SmoothingSplit::Both => Self::new(m, m),
            SmoothingSplit::Total => Self::new(m.div_ceil(2), m / 2),
        }
    }
}

/// Levels, operators, transfers and smoother bounds of one multigrid solve.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub levels: Vec<Arc<DGLevel>>,
    pub operators: Vec<Arc<DGOperator>>,
    /// `transfers[i]` prolongs from level `i` to level `i + 1`.
    pub transfers: Vec<Arc<TransferPair>>,
    pub lambdas: Vec<f64>,
    coarse: Arc<EnvelopeCholesky>,
}

impl Hierarchy {
    /// Assemble from operators and transfers; missing `lambda_max` values
    /// are estimated.
    pub fn new(operators: Vec<DGOperator>, transfers: Vec<TransferPair>, opts: &LambdaOptions) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::invalid("hierarchy needs at least one level"));
        }
        if transfers.len() + 1 != operators.len() {
            return Err(Error::invalid("need one transfer between consecutive levels"));
        }
        for (i, t) in transfers.iter().enumerate() {
            if t.p.ncols() != operators[i].n() || t.p.nrows() != operators[i + 1].n() {
                return Err(Error::invalid(format!("transfer {i} does not match the operators")));
            }
        }
        let mut ops = Vec::with_capacity(operators.len());
        let mut lambdas = Vec::with_capacity(operators.len());
        for mut op in operators {
            let l = match op.lambda_max {
                Some(l) => l,
                None => estimate_lambda(&op, opts)?,
            };
            op.lambda_max = Some(l);
            lambdas.push(l);
            ops.push(Arc::new(op));
        }
        let coarse = Arc::new(EnvelopeCholesky::factor(&ops[0].matrix)?);
        Ok(Self {
            levels: ops.iter().map(|o| o.level.clone()).collect(),
            operators: ops,
            transfers: transfers.into_iter().map(Arc::new).collect(),
            lambdas,
            coarse,
        })
    }

    fn transfers_for(spaces: &[Arc<DGLevel>]) -> Result<Vec<TransferPair>> {
        spaces.windows(2).map(|w| build_prolongation(&w[0], &w[1])).collect()
    }

    /// Operators assembled on every level.
    pub fn assembled(spaces: &[Arc<DGLevel>], config: &MethodConfig, opts: &LambdaOptions) -> Result<Self> {
        let ops = spaces
            .iter()
            .map(|s| assemble_operator(s, config))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops, Self::transfers_for(spaces)?, opts)
    }

    /// Finest operator assembled, coarser ones inherited by restriction.
    pub fn inherited(spaces: &[Arc<DGLevel>], config: &MethodConfig, opts: &LambdaOptions) -> Result<Self> {
        let transfers = Self::transfers_for(spaces)?;
        let fine = spaces.last().ok_or_else(|| Error::invalid("no levels"))?;
        let mut ops = vec![assemble_operator(fine, config)?];
        for t in transfers.iter().rev() {
            let next = galerkin_coarse_operator(ops.last().expect("fine operator"), &[t])?;
            ops.push(next);
        }
        ops.reverse();
        Self::new(ops, transfers, opts)
    }

    /// The first `k` levels (the coarse factorization is shared).
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n_levels() {
            return Err(Error::invalid(format!("cannot keep {k} of {} levels", self.n_levels())));
        }
        Ok(Self {
            levels: self.levels[..k].to_vec(),
            operators: self.operators[..k].to_vec(),
            transfers: self.transfers[..k - 1].to_vec(),
            lambdas: self.lambdas[..k].to_vec(),
            coarse: self.coarse.clone(),
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &DGOperator {
        self.operators.last().expect("non-empty hierarchy")
    }

    /// `A_1^{-1} g` on the coarsest level.
    pub fn coarse_solve(&self, g: &[f64]) -> Vec<f64> {
        let mut z = self.coarse.solve(g);
        let s = self.operators[0].scale;
        z.iter_mut().for_each(|x| *x *= s);
        z
    }
}

/// `MG_W(k, g, z0, m1, m2)` with `k` the 0-based level index.
pub fn wcycle(hier: &Hierarchy, k: usize, g: &[f64], z0: &[f64], params: &CycleParams) -> Vec<f64> {
    if k == 0 {
        return hier.coarse_solve(g);
    }
    let op = &hier.operators[k];
    let lambda = hier.lambdas[k];
    let mut z = z0.to_vec();
    richardson(op, lambda, g, &mut z, params.m1);
    let mut r = op.apply(&z);
    for (ri, gi) in r.iter_mut().zip(g) {
        *ri = gi - *ri;
    }
    let t = &hier.transfers[k - 1];
    let rc = t.restrict(&r);
    let zero = vec![0.0; rc.len()];
    let ebar = wcycle(hier, k - 1, &rc, &zero, params);
    let e = wcycle(hier, k - 1, &rc, &ebar, params);
    axpy(1.0, &t.prolong(&e), &mut z);
    richardson(op, lambda, g, &mut z, params.m2);
    z
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Stop early once `‖r_n‖/‖r_0‖` exceeds this (or is not finite).
    pub divergence: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 10_000,
            divergence: 1e10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r_n‖₂` for `n = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// `exp(ln(‖r_N‖/‖r_0‖)/N)`, defined for `N > 0`.
    pub rho: Option<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

pub const REPORT_CSV_HEADER: &str = "method,grid,p,k,m1,m2,N,rho,converged,wall_time";

impl SolveReport {
    fn finish(history: Vec<f64>, converged: bool, start: Instant) -> Self {
        let n = history.len() - 1;
        let rho = if n > 0 && history[0] > 0.0 {
            Some(((history[n] / history[0]).ln() / n as f64).exp())
        } else {
            None
        };
        Self {
            iterations: n,
            residual_history: history,
            rho,
            converged,
            wall_time: start.elapsed(),
        }
    }

    /// Convergence factor over the last `tail` iterations.
    pub fn tail_rho(&self, tail: usize) -> Option<f64> {
        let n = self.iterations;
        if n == 0 || tail == 0 {
            return None;
        }
        let t = tail.min(n);
        let (a, b) = (self.residual_history[n - t], self.residual_history[n]);
        Some(((b / a).ln() / t as f64).exp())
    }

    pub fn csv_row(&self, method: &str, grid: &str, p: usize, k: usize, m1: usize, m2: usize) -> String {
        format!(
            "{method},{grid},{p},{k},{m1},{m2},{},{},{},{:.6}",
            self.iterations,
            self.rho.map_or(String::from("-"), |r| format!("{r:.4}")),
            self.converged,
            self.wall_time.as_secs_f64()
        )
    }
}

fn residual(op: &DGOperator, f: &[f64], z: &[f64], r: &mut [f64]) -> f64 {
    op.apply_into(z, r);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    norm2(r)
}

/// Repeated W-cycles on the finest level until `‖r_N‖/‖r_0‖ ≤ tol`.
pub fn solve_mg(
    hier: &Hierarchy,
    f: &[f64],
    params: &CycleParams,
    opts: &SolveOptions,
    z0: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let op = hier.finest();
    if f.len() != op.n() {
        return Err(Error::invalid("right-hand side has the wrong length"));
    }
    let k = hier.n_levels() - 1;
    let mut z = z0.map_or_else(|| vec![0.0; f.len()], <[f64]>::to_vec);
    let mut r = vec![0.0; f.len()];
    let r0 = residual(op, f, &z, &mut r);
    let mut history = vec![r0];
    if r0 == 0.0 {
        return Ok((z, SolveReport::finish(history, true, start)));
    }
    let mut converged = false;
    for _ in 0..opts.max_iters {
        z = wcycle(hier, k, f, &z, params);
        let rn = residual(op, f, &z, &mut r);
        history.push(rn);
        let ratio = rn / r0;
        if ratio <= opts.tol {
            converged = true;
            break;
        }
        if !ratio.is_finite() || ratio > opts.divergence {
            break;
        }
    }
    Ok((z, SolveReport::finish(history, converged, start)))
}

/// Unpreconditioned CG on the coefficient form, same stopping rule.
pub fn solve_cg(op: &DGOperator, f: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.n();
    if f.len() != n {
        return Err(Error::invalid("right-hand side has the wrong length"));
    }
    let mut x = vec![0.0; n];
    let mut r = f.to_vec();
    let r0 = norm2(&r);
    let mut history = vec![r0];
    if r0 == 0.0 {
        return Ok((x, SolveReport::finish(history, true, start)));
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut converged = false;
    for _ in 0..opts.max_iters {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let a = rr / pap;
        axpy(a, &p, &mut x);
        axpy(-a, &ap, &mut r);
        let rr_new = dot(&r, &r);
        history.push(rr_new.sqrt());
        if rr_new.sqrt() <= opts.tol * r0 {
            converged = true;
            break;
        }
        let b = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + b * *pi;
        }
    }
    Ok((x, SolveReport::finish(history, converged, start)))
}
