//! Stiffness operators for the symmetric DG family, load vectors and the DG
//! norm.
//!
//! All methods share one face formulation. With `ε_± = ±1`, `⟦v⟧ = Σ ε_s v_s n_F`
//! and side weights `ω_± = 1/2 ± β·n_F` (one-sided on the boundary),
//!
//! ```text
//! A(w, v) = Σ_T ∫ ∇w·∇v − Σ_F ∫ ⟦v⟧·Σ ω_s ∇w_s − Σ_F ∫ ⟦w⟧·Σ ω_s ∇v_s
//!         + Σ_F σ ∫ ⟦w⟧·⟦v⟧ + θ ∫ G(w)·G(v)
//! ```
//!
//! where `G(v) = R(⟦v⟧) + L(β·⟦v⟧)`. The Bassi and Brezzi variants drop the
//! penalty in favour of `α Σ_F ∫ r_F(⟦w⟧)·r_F(⟦v⟧)`.

mod face;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use face::FaceLifting;
use face::FaceData;

use crate::linalg::{BlockSparse, BlockSparseBuilder};
use crate::mesh::{ElementShape, Face, FaceKind};
use crate::space::{DGLevel, GridFunction};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Sipg,
    SipgDelta,
    Ldg,
    BassiEtAl,
    BrezziEtAl,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_', '(', ')'], "").as_str() {
            "sipg" => Ok(Method::Sipg),
            "sipgdelta" | "sipgd" => Ok(Method::SipgDelta),
            "ldg" => Ok(Method::Ldg),
            "bassi" | "bassietal" => Ok(Method::BassiEtAl),
            "brezzi" | "brezzietal" => Ok(Method::BrezziEtAl),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sipg => "sipg",
            Method::SipgDelta => "sipg-delta",
            Method::Ldg => "ldg",
            Method::BassiEtAl => "bassi",
            Method::BrezziEtAl => "brezzi",
        })
    }
}

/// Element length entering the penalty `σ = α p² / h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyLength {
    /// Element diameter.
    Diameter,
    /// Cell size of the structured grid (side length of a square cell,
    /// leg length of a right triangle).
    CellSize,
}

impl FromStr for PenaltyLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "diameter" => Ok(PenaltyLength::Diameter),
            "cell" | "cell-size" | "cellsize" | "spacing" => Ok(PenaltyLength::CellSize),
            other => Err(Error::invalid(format!("unknown penalty length '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub alpha: f64,
    /// Average weight of the plus side, SIPG(δ) only.
    pub delta: f64,
    /// Constant flux vector, LDG only.
    pub beta: [f64; 2],
    pub penalty_length: PenaltyLength,
}

impl MethodConfig {
    pub const DEFAULT_ALPHA: f64 = 10.0;
    pub const DEFAULT_DELTA: f64 = 0.75;

    pub fn new(method: Method) -> Self {
        Self {
            method,
            alpha: Self::DEFAULT_ALPHA,
            delta: Self::DEFAULT_DELTA,
            beta: [0.0, 0.0],
            penalty_length: PenaltyLength::CellSize,
        }
    }

    pub fn sipg() -> Self {
        Self::new(Method::Sipg)
    }

    pub fn ldg() -> Self {
        Self::new(Method::Ldg)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_beta(mut self, beta: [f64; 2]) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_penalty_length(mut self, l: PenaltyLength) -> Self {
        self.penalty_length = l;
        self
    }

    pub fn theta(&self) -> f64 {
        match self.method {
            Method::Ldg | Method::BrezziEtAl => 1.0,
            Method::Sipg | Method::SipgDelta | Method::BassiEtAl => 0.0,
        }
    }

    fn has_penalty(&self) -> bool {
        !matches!(self.method, Method::BassiEtAl | Method::BrezziEtAl)
    }

    /// `β · n_F` for a face with normal `n`.
    pub fn beta_dot(&self, n: [f64; 2]) -> f64 {
        match self.method {
            Method::SipgDelta => self.delta - 0.5,
            Method::Ldg => self.beta[0] * n[0] + self.beta[1] * n[1],
            _ => 0.0,
        }
    }

    pub fn validate(&self, shape: ElementShape) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid("penalty coefficient alpha must be positive"));
        }
        if self.method == Method::SipgDelta && !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::invalid("delta must lie in [0, 1]"));
        }
        if !self.beta.iter().all(|b| b.is_finite()) {
            return Err(Error::invalid("beta must be finite"));
        }
        if matches!(self.method, Method::BassiEtAl | Method::BrezziEtAl) && shape != ElementShape::Quad {
            return Err(Error::UnsupportedConfiguration(format!(
                "the {} method needs a quadrilateral mesh",
                self.method
            )));
        }
        Ok(())
    }
}

/// `α p² / min(h⁺, h⁻)` on interior faces, `α p² / h_T` on boundary faces.
pub fn penalty_coefficient(alpha: f64, p: usize, h_plus: f64, h_minus: Option<f64>) -> f64 {
    let h = h_minus.map_or(h_plus, |hm| h_plus.min(hm));
    alpha * (p * p) as f64 / h
}

/// Penalty `σ_F` of one face.
pub fn penalty(level: &DGLevel, face: &Face, config: &MethodConfig) -> f64 {
    let len = |e: usize| match config.penalty_length {
        PenaltyLength::Diameter => level.mesh.elements[e].diameter,
        PenaltyLength::CellSize => level.mesh.spacing,
    };
    penalty_coefficient(config.alpha, level.degree, len(face.element_plus), face.element_minus.map(len))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Assembled,
    Inherited,
}

/// Level operator `A_k`, stored as `(M, h_k²)` with `M_ij = A_k(φ_j, φ_i)`.
/// On coefficient vectors it acts as `M / scale`.
#[derive(Clone, Debug)]
pub struct DGOperator {
    pub level: Arc<DGLevel>,
    pub matrix: BlockSparse,
    pub scale: f64,
    /// Spectral bound `Λ_k` used by the smoother, once estimated.
    pub lambda_max: Option<f64>,
    pub kind: OperatorKind,
}

impl DGOperator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `y = h^{-2} M x`
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec(x, y);
        let s = 1.0 / self.scale;
        y.iter_mut().for_each(|v| *v *= s);
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `A(w, v) = vᵀ M w`
    pub fn bilinear(&self, w: &[f64], v: &[f64]) -> f64 {
        crate::linalg::dot(v, &self.matrix.apply(w))
    }

    /// Dense coefficient form `h^{-2} M`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense() / self.scale
    }

    /// `‖M − Mᵀ‖_max / ‖M‖_max`
    pub fn relative_symmetry_defect(&self) -> f64 {
        self.matrix.symmetry_defect() / self.matrix.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Matrix Market coordinate export of `M` (1-based indices).
    pub fn write_matrix_market(&self, mut w: impl Write) -> Result<()> {
        let trip: Vec<_> = self.matrix.triplets().filter(|t| t.2 != 0.0).collect();
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "% scale {:e}", self.scale)?;
        writeln!(w, "{} {} {}", self.n(), self.n(), trip.len())?;
        for (i, j, v) in trip {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

fn face_b(config: &MethodConfig, face: &Face) -> f64 {
    if face.kind == FaceKind::Interior {
        config.beta_dot(face.normal)
    } else {
        0.0
    }
}

/// Volume stiffness `∫_T ∇φ_j · ∇φ_i` for one element.
fn element_stiffness(level: &DGLevel, element: usize) -> DMatrix<f64> {
    let n = level.n_local;
    let e = &level.mesh.elements[element];
    let jac = e.map.det().abs();
    let mut k = DMatrix::zeros(n, n);
    let mut g = vec![[0.0; 2]; n];
    for (q, w) in level.quadrature.weights.iter().enumerate() {
        for (gi, r) in g.iter_mut().zip(level.table.grads_at(q)) {
            *gi = e.map.push_gradient(*r);
        }
        let wq = w * jac;
        for j in 0..n {
            for i in 0..n {
                k[(i, j)] += wq * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

/// Liftings of every face for the given configuration.
pub fn assemble_lifting(level: &DGLevel, config: &MethodConfig) -> Vec<FaceLifting> {
    level
        .mesh
        .faces
        .iter()
        .map(|f| FaceLifting::from_face_data(f.id, &FaceData::new(level, f, face_b(config, f))))
        .collect()
}

fn add_block(b: &mut BlockSparseBuilder, r: usize, c: usize, m: &DMatrix<f64>) {
    b.add_with(r, c, |i, j| m[(i, j)]);
}

/// `θ ∫ G(w)·G(v)`, the lifting-product term alone (θ taken as 1).
pub fn assemble_lifting_product(level: &DGLevel, liftings: &[FaceLifting]) -> BlockSparse {
    let ne = level.n_elements();
    let n = level.n_local;
    let mut builder = BlockSparseBuilder::new(ne, ne, n, n);
    let elem_faces = level.mesh.element_faces();
    for (t, faces) in elem_faces.iter().enumerate() {
        // R_T^c as a sum of column blocks keyed by source element
        let mut cols: [BTreeMap<usize, DMatrix<f64>>; 2] = [BTreeMap::new(), BTreeMap::new()];
        let mut jac = 0.0;
        for &f in faces {
            let lf = &liftings[f];
            let s = lf.elements.iter().position(|&e| e == t).expect("incident face");
            jac = lf.jacobians[s];
            for (src, &es) in lf.elements.iter().enumerate() {
                for c in 0..2 {
                    let entry = cols[c].entry(es).or_insert_with(|| DMatrix::zeros(n, n));
                    *entry += &lf.blocks[s][src] * lf.normal[c];
                }
            }
        }
        for c in 0..2 {
            for (&a, ma) in &cols[c] {
                for (&b, mb) in &cols[c] {
                    add_block(&mut builder, a, b, &((ma.transpose() * mb) * jac));
                }
            }
        }
    }
    builder.build()
}

/// Per-face `α Σ_F ∫ r_F(⟦w⟧)·r_F(⟦v⟧)` stabilization of the Bassi/Brezzi
/// forms.
fn add_lifting_stabilization(builder: &mut BlockSparseBuilder, liftings: &[FaceLifting], alpha: f64) {
    for lf in liftings {
        for (s, jac) in lf.jacobians.iter().enumerate() {
            for (a, &ea) in lf.elements.iter().enumerate() {
                for (b, &eb) in lf.elements.iter().enumerate() {
                    let m = lf.blocks[s][a].transpose() * &lf.blocks[s][b] * (alpha * jac);
                    add_block(builder, ea, eb, &m);
                }
            }
        }
    }
}

/// Assemble `A_k` on `level`.
pub fn assemble_operator(level: &Arc<DGLevel>, config: &MethodConfig) -> Result<DGOperator> {
    config.validate(level.shape())?;
    let ne = level.n_elements();
    let n = level.n_local;
    let mut builder = BlockSparseBuilder::new(ne, ne, n, n);
    for e in 0..ne {
        add_block(&mut builder, e, e, &element_stiffness(level, e));
    }
    for f in &level.mesh.faces {
        let fd = FaceData::new(level, f, face_b(config, f));
        let sigma = if config.has_penalty() {
            penalty(level, f, config)
        } else {
            0.0
        };
        let ns = fd.sides.len();
        let fluxes: Vec<Vec<DMatrix<f64>>> = (0..ns).map(|s| (0..ns).map(|t| fd.flux(s, t)).collect()).collect();
        for s in 0..ns {
            for t in 0..ns {
                let mut k = -(&fluxes[s][t]) - fluxes[t][s].transpose();
                if sigma != 0.0 {
                    k += fd.mass(s, t) * (sigma * fd.sides[s].eps * fd.sides[t].eps);
                }
                add_block(&mut builder, fd.sides[s].element, fd.sides[t].element, &k);
            }
        }
    }
    let theta = config.theta();
    let mut matrix = if matches!(config.method, Method::BassiEtAl | Method::BrezziEtAl) {
        let liftings = assemble_lifting(level, config);
        add_lifting_stabilization(&mut builder, &liftings, config.alpha);
        let m = builder.build();
        if theta != 0.0 {
            m.add_scaled(theta, &assemble_lifting_product(level, &liftings))
        } else {
            m
        }
    } else {
        builder.build()
    };
    if theta != 0.0 && config.method == Method::Ldg {
        let liftings = assemble_lifting(level, config);
        matrix = matrix.add_scaled(theta, &assemble_lifting_product(level, &liftings));
    }
    Ok(DGOperator {
        level: level.clone(),
        matrix,
        scale: level.scale(),
        lambda_max: None,
        kind: OperatorKind::Assembled,
    })
}

/// Consistency term `Σ_T ∫ ∇w · G(v)` computed through the liftings, i.e.
/// by projecting `∇w` onto the vector DG space. Returns `N` with
/// `N_ij = ∫ ∇φ_j · G(φ_i)`; for the flux assembly the same term appears
/// as the face integrals.
pub fn assemble_consistency_via_lifting(level: &DGLevel, liftings: &[FaceLifting]) -> BlockSparse {
    let ne = level.n_elements();
    let n = level.n_local;
    // D_T^c[k, j] = (1/|J|) ∫_T ∂_c φ_j φ_k
    let grad_coeffs = |t: usize| -> [DMatrix<f64>; 2] {
        let e = &level.mesh.elements[t];
        let mut d = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for (q, w) in level.quadrature.weights.iter().enumerate() {
            let vals = level.table.values_at(q);
            for (j, r) in level.table.grads_at(q).iter().enumerate() {
                let g = e.map.push_gradient(*r);
                for k in 0..n {
                    d[0][(k, j)] += w * g[0] * vals[k];
                    d[1][(k, j)] += w * g[1] * vals[k];
                }
            }
        }
        d
    };
    let mut builder = BlockSparseBuilder::new(ne, ne, n, n);
    let elem_faces = level.mesh.element_faces();
    for (t, faces) in elem_faces.iter().enumerate() {
        let d = grad_coeffs(t);
        for &f in faces {
            let lf = &liftings[f];
            let s = lf.elements.iter().position(|&e| e == t).expect("incident face");
            let jac = lf.jacobians[s];
            for (src, &es) in lf.elements.iter().enumerate() {
                for c in 0..2 {
                    let m = lf.blocks[s][src].transpose() * &d[c] * (jac * lf.normal[c]);
                    add_block(&mut builder, es, t, &m);
                }
            }
        }
    }
    builder.build()
}

/// Load vector `b_i = h_k^{-2} ∫ f φ_i`.
pub fn assemble_rhs(level: &Arc<DGLevel>, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let n = level.n_local;
    let inv_scale = 1.0 / level.scale();
    let mut b = vec![0.0; level.n_dofs];
    for e in &level.mesh.elements {
        let jac = e.map.det().abs();
        let blk = &mut b[e.id * n..(e.id + 1) * n];
        for (q, (pt, w)) in level.quadrature.points.iter().zip(&level.quadrature.weights).enumerate() {
            let fv = w * jac * inv_scale * f(e.map.apply(*pt));
            for (bi, phi) in blk.iter_mut().zip(level.table.values_at(q)) {
                *bi += fv * phi;
            }
        }
    }
    b
}

/// `Σ_F σ ∫ ⟦w⟧·⟦v⟧`
pub fn assemble_jump_penalty(level: &DGLevel, config: &MethodConfig) -> BlockSparse {
    let ne = level.n_elements();
    let n = level.n_local;
    let mut builder = BlockSparseBuilder::new(ne, ne, n, n);
    for f in &level.mesh.faces {
        let fd = FaceData::new(level, f, 0.0);
        let sigma = penalty(level, f, config);
        for s in 0..fd.sides.len() {
            for t in 0..fd.sides.len() {
                let m = fd.mass(s, t) * (sigma * fd.sides[s].eps * fd.sides[t].eps);
                add_block(&mut builder, fd.sides[s].element, fd.sides[t].element, &m);
            }
        }
    }
    builder.build()
}

/// Matrix of the squared DG norm: broken `H¹` seminorm plus penalized jumps.
pub fn assemble_dg_norm(level: &DGLevel, config: &MethodConfig) -> BlockSparse {
    let ne = level.n_elements();
    let n = level.n_local;
    let mut builder = BlockSparseBuilder::new(ne, ne, n, n);
    for e in 0..ne {
        add_block(&mut builder, e, e, &element_stiffness(level, e));
    }
    builder.build().add_scaled(1.0, &assemble_jump_penalty(level, config))
}

/// `‖v‖_DG`
pub fn dg_norm(v: &GridFunction, config: &MethodConfig) -> f64 {
    let m = assemble_dg_norm(&v.level, config);
    crate::linalg::dot(&v.coeffs, &m.apply(&v.coeffs)).max(0.0).sqrt()
}

/// `‖u − v‖_DG` for a continuous `u` vanishing on the boundary, given its
/// gradient.
pub fn dg_error(v: &GridFunction, grad_u: impl Fn([f64; 2]) -> [f64; 2], config: &MethodConfig) -> f64 {
    let h1 = v.h1_seminorm_error(grad_u);
    let j = assemble_jump_penalty(&v.level, config);
    let jump = crate::linalg::dot(&v.coeffs, &j.apply(&v.coeffs)).max(0.0);
    (h1 * h1 + jump).sqrt()
}
