//! Dense estimators for the quantities that drive the convergence theory:
//! the scale of norms `|||·|||_{s,k}`, smoothing and approximation constants,
//! explicit error-propagation operators, and discretization orders.
//!
//! Everything here works on dense matrices and is limited by a size cap;
//! table reproduction only needs [`crate::multigrid`].

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble_operator, assemble_rhs, dg_error, DGOperator, MethodConfig};
use crate::linalg::{dot, fit_loglog_slope, norm2, EnvelopeCholesky};
use crate::mesh::{build_initial_mesh, refine_uniform, ElementShape, Rectangle};
use crate::multigrid::{wcycle, CycleParams, Hierarchy};
use crate::space::{DGLevel, GridFunction};
use crate::transfer::{POperator, TransferPair};
use crate::{Error, Result};

/// Largest system handled by the dense tools unless told otherwise.
pub const DEFAULT_DENSE_CAP: usize = 3000;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capacity(format!(
            "{n} unknowns exceed the dense limit of {cap}; use a coarser mesh or a lower degree"
        )));
    }
    Ok(())
}

/// Eigenpairs of `A_k` with respect to `(·,·)_k`.
///
/// `vectors` has Euclidean-orthonormal columns; the `(·,·)_k`-normalized
/// eigenfunctions are `vectors / √scale`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub level: Arc<DGLevel>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub scale: f64,
}

pub fn spectral_decompose(op: &DGOperator) -> Result<SpectralDecomposition> {
    spectral_decompose_with_cap(op, DEFAULT_DENSE_CAP)
}

pub fn spectral_decompose_with_cap(op: &DGOperator, cap: usize) -> Result<SpectralDecomposition> {
    check_cap(op.n(), cap)?;
    let a = symmetrized(op.to_dense());
    let eig = nalgebra::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..op.n()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(op.n(), op.n(), |r, c| eig.eigenvectors[(r, order[c])]);
    if eigenvalues[0] <= 0.0 {
        return Err(Error::numerical(format!(
            "operator is not positive definite (λ_min = {:e})",
            eigenvalues[0]
        )));
    }
    Ok(SpectralDecomposition {
        level: op.level.clone(),
        eigenvalues,
        vectors,
        scale: op.scale,
    })
}

/// Eigenvalues only, ascending. Cheaper than [`spectral_decompose`].
pub fn operator_eigenvalues(op: &DGOperator, cap: usize) -> Result<Vec<f64>> {
    check_cap(op.n(), cap)?;
    let mut ev: Vec<f64> = symmetrized(op.to_dense()).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn symmetrized(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Euclidean eigen-coordinates `Qᵀ v`.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        (self.vectors.tr_mul(&DVector::from_column_slice(v))).iter().copied().collect()
    }

    /// `|||v|||_{s,k} = √((A^s v, v)_k)`
    pub fn norm_s(&self, v: &[f64], s: f64) -> f64 {
        let c = self.coordinates(v);
        let sum: f64 = c.iter().zip(&self.eigenvalues).map(|(ci, l)| l.powf(s) * ci * ci).sum();
        (sum * self.scale).sqrt()
    }

    /// `‖A − QΛQᵀ‖₂ / ‖A‖₂`, bounded by the Frobenius norm.
    pub fn reconstruction_error(&self, op: &DGOperator) -> f64 {
        let a = op.to_dense();
        let l = DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        let r = &self.vectors * l * self.vectors.transpose();
        (a - r).norm() / self.lambda_max()
    }
}

fn norm_exponents_ok(s: f64, t: f64) -> Result<()> {
    if !(0.0 <= t && t <= s && s <= 2.0) {
        return Err(Error::invalid(format!("need 0 ≤ t ≤ s ≤ 2, got s = {s}, t = {t}")));
    }
    Ok(())
}

fn smoothing_value(l: f64, lambda: f64, m: usize, s: f64, t: f64) -> f64 {
    (1.0 - l / lambda).abs().powi(m as i32) * l.powf(0.5 * (s - t))
}

/// `sup_v |||G^m v|||_s / |||v|||_t = max_i |1 − λ_i/Λ|^m λ_i^{(s−t)/2}`
/// with `G = I − Λ^{-1} A`.
pub fn smoothing_constant(eigenvalues: &[f64], lambda: f64, m: usize, s: f64, t: f64) -> Result<f64> {
    norm_exponents_ok(s, t)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid("smoother bound must be positive"));
    }
    Ok(eigenvalues
        .iter()
        .map(|&l| smoothing_value(l, lambda, m, s, t))
        .fold(0.0, f64::max))
}

/// `|||G^m v|||_s / |||v|||_t` for one vector, with `G^m v` computed by
/// sparse Richardson sweeps.
pub fn smoothing_ratio(op: &DGOperator, decomp: &SpectralDecomposition, lambda: f64, m: usize, s: f64, t: f64, v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    let zero = vec![0.0; v.len()];
    crate::multigrid::richardson(op, lambda, &zero, &mut w, m);
    decomp.norm_s(&w, s) / decomp.norm_s(v, t)
}

/// Largest ratio over `samples` random vectors: a lower bound for
/// [`smoothing_constant`].
pub fn smoothing_random_lower_bound(
    op: &DGOperator,
    decomp: &SpectralDecomposition,
    lambda: f64,
    m: usize,
    s: f64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    norm_exponents_ok(s, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let v: Vec<f64> = (0..op.n()).map(|_| rng.random::<f64>() - 0.5).collect();
        best = best.max(smoothing_ratio(op, decomp, lambda, m, s, t, &v));
    }
    Ok(best)
}

/// The smoothing constant for integer `(s − t)/2`, maximized by power
/// iteration on `A^{(s−t)/2} G^m` using only operator applications.
pub fn smoothing_constant_power(op: &DGOperator, lambda: f64, m: usize, s: f64, t: f64, iters: usize, seed: u64) -> Result<f64> {
    norm_exponents_ok(s, t)?;
    let half = 0.5 * (s - t);
    if half.fract() != 0.0 {
        return Err(Error::invalid("power oracle needs an integer (s − t)/2"));
    }
    let powers = half as usize;
    let n = op.n();
    let zero = vec![0.0; n];
    let apply = |v: &[f64]| {
        let mut w = v.to_vec();
        crate::multigrid::richardson(op, lambda, &zero, &mut w, m);
        for _ in 0..powers {
            w = op.apply(&w);
        }
        w
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut est = 0.0;
    // B is symmetric, so ‖B²‖ = ‖B‖² converges monotonically from below.
    for _ in 0..iters {
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let w = apply(&apply(&v));
        est = dot(&v, &w).max(0.0).sqrt();
        v = w;
    }
    Ok(est)
}

/// `sup_v |||(I − R P)v|||_0 / |||v|||_2` for one two-level pair.
///
/// With `A = M_f/h_f²`, this is `‖(I − R P) A^{-1}‖₂`, and
/// `(I − R P)A^{-1} = h_f² (M_f^{-1} − R M_c^{-1} Rᵀ)` is symmetric.
pub fn approximation_constant(fine_op: &DGOperator, coarse_op: &DGOperator, pair: &TransferPair) -> Result<f64> {
    approximation_constant_with_cap(fine_op, coarse_op, pair, DEFAULT_DENSE_CAP)
}

pub fn approximation_constant_with_cap(fine_op: &DGOperator, coarse_op: &DGOperator, pair: &TransferPair, cap: usize) -> Result<f64> {
    check_cap(fine_op.n(), cap)?;
    if coarse_op.n() != pair.coarse.n_dofs || fine_op.n() != pair.fine.n_dofs {
        return Err(Error::invalid("operators do not match the transfer pair"));
    }
    let mf = symmetrized(fine_op.matrix.to_dense());
    let mc = symmetrized(coarse_op.matrix.to_dense());
    let mf_inv = dense_spd_inverse(mf)?;
    let mc_inv = dense_spd_inverse(mc)?;
    let r = pair.p.to_dense();
    let d = (mf_inv - &r * mc_inv * r.transpose()) * fine_op.scale;
    let ev = symmetrized(d).symmetric_eigenvalues();
    Ok(ev.iter().fold(0.0, |a: f64, b| a.max(b.abs())))
}

fn dense_spd_inverse(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::numerical("matrix is not positive definite"))?;
    Ok(chol.solve(&DMatrix::identity(n, n)))
}

/// Explicit `E_{k,m1,m2}` on one hierarchy level.
#[derive(Clone, Debug)]
pub struct ErrorPropagator {
    /// 0-based level index.
    pub level: usize,
    pub matrix: DMatrix<f64>,
    /// `|||E|||_1`, the operator norm in the energy inner product.
    pub energy_norm: f64,
    pub spectral_radius: f64,
}

/// Recursive construction
/// `E_k = G^{m2} (I − R (I − E_{k−1}²) P) G^{m1}`, `E_1 = 0`.
pub fn build_error_propagator(hier: &Hierarchy, k: usize, params: &CycleParams) -> Result<ErrorPropagator> {
    build_error_propagator_with_cap(hier, k, params, DEFAULT_DENSE_CAP)
}

pub fn build_error_propagator_with_cap(hier: &Hierarchy, k: usize, params: &CycleParams, cap: usize) -> Result<ErrorPropagator> {
    if k >= hier.n_levels() {
        return Err(Error::invalid(format!("level {k} is outside a {}-level hierarchy", hier.n_levels())));
    }
    check_cap(hier.operators[k].n(), cap)?;
    let matrix = propagator_matrix(hier, k, params)?;
    let m = symmetrized(hier.operators[k].matrix.to_dense());
    let l = m
        .cholesky()
        .ok_or_else(|| Error::numerical("operator is not positive definite"))?
        .l();
    // energy geometry: B = Lᵀ E L^{-T}
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    let b = &lt * &matrix * lt_inv;
    let energy_norm = b.singular_values().iter().fold(0.0, |a: f64, s| a.max(*s));
    let spectral_radius = matrix
        .complex_eigenvalues()
        .iter()
        .fold(0.0, |a: f64, z| a.max(z.norm()));
    Ok(ErrorPropagator {
        level: k,
        matrix,
        energy_norm,
        spectral_radius,
    })
}

fn propagator_matrix(hier: &Hierarchy, k: usize, params: &CycleParams) -> Result<DMatrix<f64>> {
    let op = &hier.operators[k];
    let n = op.n();
    if k == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let g = DMatrix::identity(n, n) - op.to_dense() / hier.lambdas[k];
    let coarse = propagator_matrix(hier, k - 1, params)?;
    let nc = coarse.nrows();
    let inner = DMatrix::identity(nc, nc) - &coarse * &coarse;
    let t = &hier.transfers[k - 1];
    let p_op = POperator::new(&hier.operators[k - 1], op, t)?.to_dense();
    let r = t.p.to_dense();
    let mid = DMatrix::identity(n, n) - r * inner * p_op;
    Ok(g.pow(params.m2 as u32) * mid * g.pow(params.m1 as u32))
}

/// `E e` computed by one programmatic W-cycle with `g = 0` and `z0 = e`.
pub fn cycle_error_map(hier: &Hierarchy, k: usize, params: &CycleParams, e: &[f64]) -> Vec<f64> {
    let zero = vec![0.0; e.len()];
    wcycle(hier, k, &zero, e, params)
}

/// One `(parameter, value)` series with its fitted log-log slope.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub name: String,
    pub parameter: String,
    pub points: Vec<(f64, f64)>,
}

impl Sweep {
    pub fn new(name: impl Into<String>, parameter: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            parameter: parameter.into(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.points.push((x, y));
    }

    pub fn slope(&self) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self.points.iter().copied().unzip();
        fit_loglog_slope(&x, &y)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.parameter, self.name);
        for (x, y) in &self.points {
            let _ = writeln!(s, "{x},{y:.10e}");
        }
        let _ = writeln!(s, "# slope,{:.6}", self.slope());
        s
    }
}

fn unit_level(n: usize, shape: ElementShape, p: usize) -> Result<Arc<DGLevel>> {
    let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, n, shape)?;
    Ok(Arc::new(DGLevel::new(Arc::new(mesh), p)?))
}

/// Smoothing constant (`s = 2`, `t = 0`) against `p` at fixed mesh and `m`,
/// with `Λ = λ_max`.
pub fn smoothing_sweep_p(config: &MethodConfig, shape: ElementShape, n_cells: usize, m: usize, ps: &[usize]) -> Result<Sweep> {
    let mut sweep = Sweep::new("smoothing_constant", "p");
    for &p in ps {
        let op = assemble_operator(&unit_level(n_cells, shape, p)?, config)?;
        let ev = operator_eigenvalues(&op, DEFAULT_DENSE_CAP)?;
        let lambda = *ev.last().expect("non-empty");
        sweep.push(p as f64, smoothing_constant(&ev, lambda, m, 2.0, 0.0)?);
    }
    Ok(sweep)
}

/// Smoothing constant (`s = 2`, `t = 0`) against `1 + m` at fixed mesh and
/// degree.
pub fn smoothing_sweep_m(config: &MethodConfig, shape: ElementShape, n_cells: usize, p: usize, ms: &[usize]) -> Result<Sweep> {
    let mut sweep = Sweep::new("smoothing_constant", "1+m");
    let op = assemble_operator(&unit_level(n_cells, shape, p)?, config)?;
    let ev = operator_eigenvalues(&op, DEFAULT_DENSE_CAP)?;
    let lambda = *ev.last().expect("non-empty");
    for &m in ms {
        sweep.push((1 + m) as f64, smoothing_constant(&ev, lambda, m, 2.0, 0.0)?);
    }
    Ok(sweep)
}

/// Approximation constant of one h-step from an `n`-cell mesh, for each `n`.
/// The sweep parameter is the coarse `h`.
pub fn approximation_sweep_h(config: &MethodConfig, shape: ElementShape, coarse_cells: &[usize], p: usize) -> Result<Sweep> {
    let mut sweep = Sweep::new("approximation_constant", "h");
    for &n in coarse_cells {
        let (c, f) = h_pair(n, shape, p)?;
        sweep.push(c.h(), two_level_constant(&c, &f, config)?);
    }
    Ok(sweep)
}

/// Approximation constant of one h-step from an `n`-cell mesh against `p`.
pub fn approximation_sweep_p(config: &MethodConfig, shape: ElementShape, coarse_cells: usize, ps: &[usize]) -> Result<Sweep> {
    let mut sweep = Sweep::new("approximation_constant", "p");
    for &p in ps {
        let (c, f) = h_pair(coarse_cells, shape, p)?;
        sweep.push(p as f64, two_level_constant(&c, &f, config)?);
    }
    Ok(sweep)
}

fn h_pair(n: usize, shape: ElementShape, p: usize) -> Result<(Arc<DGLevel>, Arc<DGLevel>)> {
    let coarse = build_initial_mesh(Rectangle::UNIT_SQUARE, n, shape)?;
    let fine = refine_uniform(&coarse)?;
    Ok((
        Arc::new(DGLevel::new(Arc::new(coarse), p)?.with_index(1)),
        Arc::new(DGLevel::new(Arc::new(fine), p)?.with_index(2)),
    ))
}

fn two_level_constant(coarse: &Arc<DGLevel>, fine: &Arc<DGLevel>, config: &MethodConfig) -> Result<f64> {
    check_cap(fine.n_dofs, DEFAULT_DENSE_CAP)?;
    let pair = crate::transfer::build_prolongation(coarse, fine)?;
    let a_c = assemble_operator(coarse, config)?;
    let a_f = assemble_operator(fine, config)?;
    approximation_constant(&a_f, &a_c, &pair)
}

/// Manufactured problem `−Δu = f` with `u = 0` on the boundary.
pub struct Manufactured {
    pub u: fn([f64; 2]) -> f64,
    pub grad_u: fn([f64; 2]) -> [f64; 2],
    pub f: fn([f64; 2]) -> f64,
}

impl Manufactured {
    /// `u = sin(πx) sin(πy)`
    pub fn sine() -> Self {
        use std::f64::consts::PI;
        Self {
            u: |x| (PI * x[0]).sin() * (PI * x[1]).sin(),
            grad_u: |x| {
                [
                    PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                    PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                ]
            },
            f: |x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub p: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub l2_error: f64,
    pub dg_error: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub rows: Vec<ErrorRow>,
}

impl ConvergenceStudy {
    fn orders(&self, p: usize, pick: impl Fn(&ErrorRow) -> f64) -> Option<f64> {
        let rows: Vec<&ErrorRow> = self.rows.iter().filter(|r| r.p == p).collect();
        if rows.len() < 2 {
            return None;
        }
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = rows.iter().map(|r| pick(r)).collect();
        Some(fit_loglog_slope(&h, &e))
    }

    /// Fitted `h`-order of the `L²` error for degree `p`.
    pub fn l2_order(&self, p: usize) -> Option<f64> {
        self.orders(p, |r| r.l2_error)
    }

    /// Fitted `h`-order of the DG-norm error for degree `p`.
    pub fn dg_order(&self, p: usize) -> Option<f64> {
        self.orders(p, |r| r.dg_error)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,h,n_dofs,l2_error,dg_error\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{:.10e},{:.10e}", r.p, r.h, r.n_dofs, r.l2_error, r.dg_error);
        }
        s
    }
}

/// Discrete solutions on `base_cells · 2^j` meshes, `j = 0..=refinements`,
/// solved directly.
pub fn convergence_study(
    config: &MethodConfig,
    shape: ElementShape,
    base_cells: usize,
    ps: &[usize],
    refinements: usize,
    problem: &Manufactured,
) -> Result<ConvergenceStudy> {
    config.validate(shape)?;
    let mut rows = Vec::new();
    for &p in ps {
        let mut mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, base_cells, shape)?;
        for j in 0..=refinements {
            if j > 0 {
                mesh = refine_uniform(&mesh)?;
            }
            let level = Arc::new(DGLevel::new(Arc::new(mesh.clone()), p)?);
            let op = assemble_operator(&level, config)?;
            let mut b = assemble_rhs(&level, problem.f);
            b.iter_mut().for_each(|x| *x *= op.scale);
            let x = EnvelopeCholesky::factor(&op.matrix)?.solve(&b);
            let uh = GridFunction::from_coeffs(level.clone(), x)?;
            rows.push(ErrorRow {
                p,
                h: level.h(),
                n_dofs: level.n_dofs,
                l2_error: uh.l2_error(problem.u),
                dg_error: dg_error(&uh, problem.grad_u, config),
            });
        }
    }
    Ok(ConvergenceStudy { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigrid::{estimate_lambda, LambdaOptions};

    fn sipg_op(n: usize, shape: ElementShape, p: usize) -> DGOperator {
        assemble_operator(&unit_level(n, shape, p).unwrap(), &MethodConfig::sipg()).unwrap()
    }

    #[test]
    fn single_element_has_positive_spectrum() {
        let d = spectral_decompose(&sipg_op(1, ElementShape::Quad, 1)).unwrap();
        assert_eq!(d.n(), 4);
        assert!(d.lambda_min() > 0.0);
    }

    #[test]
    fn reconstruction_and_power_iteration_agree() {
        let op = sipg_op(2, ElementShape::Triangle, 2);
        let d = spectral_decompose(&op).unwrap();
        assert!(d.reconstruction_error(&op) < 1e-8);
        let l = estimate_lambda(&op, &LambdaOptions::default()).unwrap();
        assert!((l - d.lambda_max()).abs() <= 1e-8 * l);
    }

    #[test]
    fn norm_scale() {
        let op = sipg_op(2, ElementShape::Quad, 1);
        let d = spectral_decompose(&op).unwrap();
        let v: Vec<f64> = (0..op.n()).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!((d.norm_s(&v, 0.0).powi(2) - op.scale * dot(&v, &v)).abs() < 1e-12);
        let a = op.bilinear(&v, &v);
        assert!((d.norm_s(&v, 1.0).powi(2) - a).abs() < 1e-10 * a);
        let psi: Vec<f64> = d.vectors.column(3).iter().map(|x| x / op.scale.sqrt()).collect();
        assert!((d.norm_s(&psi, 2.0) - d.eigenvalues[3]).abs() < 1e-9 * d.eigenvalues[3]);
    }

    #[test]
    fn smoothing_constant_edge_cases() {
        let ev = [1.0, 3.0, 4.0];
        assert_eq!(smoothing_constant(&ev, 4.0, 0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(smoothing_constant(&[4.0], 4.0, 1, 2.0, 0.0).unwrap(), 0.0);
        assert!(smoothing_constant(&ev, 4.0, 1, 0.0, 1.0).is_err());
        assert!(smoothing_constant(&ev, 4.0, 1, 3.0, 0.0).is_err());
    }

    #[test]
    fn capacity_is_enforced() {
        let op = sipg_op(2, ElementShape::Quad, 1);
        assert!(matches!(spectral_decompose_with_cap(&op, 10), Err(Error::Capacity(_))));
    }

    #[test]
    fn sweep_csv_has_slope() {
        let mut s = Sweep::new("c", "p");
        s.push(1.0, 2.0);
        s.push(2.0, 8.0);
        let csv = s.to_csv();
        assert!(csv.starts_with("p,c\n"));
        assert!(csv.contains("# slope,2.000000"));
    }
}
