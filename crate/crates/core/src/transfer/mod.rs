//! Intergrid transfer: prolongation by natural embedding `V_{k-1} ⊆ V_k`,
//! restriction as its `(·,·)`-adjoint, inherited coarse operators and the
//! projection `P_k^{k-1}` used by the analysis tools.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::assembly::{DGOperator, OperatorKind};
use crate::linalg::{BlockSparse, BlockSparseBuilder, EnvelopeCholesky};
use crate::space::{DGLevel, RefQuadrature, Tabulation};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    H,
    P,
    HP,
}

/// Prolongation `R^k_{k-1}` between two consecutive levels.
#[derive(Clone, Debug)]
pub struct TransferPair {
    pub fine: Arc<DGLevel>,
    pub coarse: Arc<DGLevel>,
    /// `n_k × n_{k-1}`, block `(child, parent)`.
    pub p: BlockSparse,
    pub step_kind: StepKind,
    /// `(h_k / h_{k-1})^d`
    pub scale_ratio: f64,
}

impl TransferPair {
    pub fn prolong(&self, v: &[f64]) -> Vec<f64> {
        self.p.apply(v)
    }

    /// `scale_ratio · Pᵀ w`, the adjoint of `prolong` in the level inner
    /// products.
    pub fn restrict(&self, w: &[f64]) -> Vec<f64> {
        let mut out = self.p.apply_transpose(w);
        out.iter_mut().for_each(|x| *x *= self.scale_ratio);
        out
    }

    pub fn restrict_into(&self, w: &[f64], out: &mut [f64]) {
        self.p.tr_mul_vec(w, out);
        out.iter_mut().for_each(|x| *x *= self.scale_ratio);
    }
}

/// Build `R^k_{k-1}`. The fine mesh must be the uniform refinement of the
/// coarse one (h, hp) or the same mesh (p), with `p_fine ≥ p_coarse`.
pub fn build_prolongation(coarse: &Arc<DGLevel>, fine: &Arc<DGLevel>) -> Result<TransferPair> {
    if fine.degree < coarse.degree {
        return Err(Error::invalid("fine degree is lower than coarse degree"));
    }
    if fine.shape() != coarse.shape() {
        return Err(Error::invalid("levels have different element shapes"));
    }
    let same_mesh = Arc::ptr_eq(&fine.mesh, &coarse.mesh)
        || (fine.n_elements() == coarse.n_elements()
            && fine
                .mesh
                .elements
                .iter()
                .zip(&coarse.mesh.elements)
                .all(|(a, b)| a.map == b.map));
    let step_kind = if same_mesh {
        StepKind::P
    } else {
        let nested = fine.n_elements() == 4 * coarse.n_elements()
            && fine
                .mesh
                .elements
                .iter()
                .all(|e| e.parent_id.is_some_and(|p| p == e.id / 4 && p < coarse.n_elements()));
        if !nested {
            return Err(Error::invalid("fine mesh is not the refinement of the coarse mesh"));
        }
        if fine.degree == coarse.degree {
            StepKind::H
        } else {
            StepKind::HP
        }
    };

    let (nf, nc) = (fine.n_local, coarse.n_local);
    let quad = RefQuadrature::exact_for(fine.shape(), fine.degree + coarse.degree);
    let fine_tab = Tabulation::new(&fine.basis, &quad.points);
    let mut builder = BlockSparseBuilder::new(fine.n_elements(), coarse.n_elements(), nf, nc);
    let mut block_cache: Vec<(crate::mesh::AffineMap, DMatrix<f64>)> = Vec::new();
    for e in &fine.mesh.elements {
        let parent = if step_kind == StepKind::P { e.id } else { e.id / 4 };
        let pmap = &coarse.mesh.elements[parent].map;
        // reference-to-reference map of the child inside its parent
        let rel = pmap.inverse().compose(&e.map);
        let blk = match block_cache.iter().find(|(m, _)| m.approx_eq(&rel, 1e-13)) {
            Some((_, b)) => b.clone(),
            None => {
                let mut b = DMatrix::zeros(nf, nc);
                let mut cv = vec![0.0; nc];
                for (q, (pt, w)) in quad.points.iter().zip(&quad.weights).enumerate() {
                    coarse.basis.eval(rel.apply(*pt), &mut cv, None);
                    let fv = fine_tab.values_at(q);
                    for i in 0..nf {
                        for j in 0..nc {
                            b[(i, j)] += w * fv[i] * cv[j];
                        }
                    }
                }
                block_cache.push((rel, b.clone()));
                b
            }
        };
        builder.add_with(e.id, parent, |i, j| blk[(i, j)]);
    }
    Ok(TransferPair {
        fine: fine.clone(),
        coarse: coarse.clone(),
        p: builder.build(),
        step_kind,
        scale_ratio: fine.scale() / coarse.scale(),
    })
}

/// Product of a chain of prolongations ordered fine to coarse:
/// `chain[0]` ends on the finest level.
pub fn composite_prolongation(chain: &[&TransferPair]) -> Result<Option<BlockSparse>> {
    let mut acc: Option<BlockSparse> = None;
    for (i, t) in chain.iter().enumerate() {
        if i > 0 && !Arc::ptr_eq(&chain[i - 1].coarse, &t.fine) {
            return Err(Error::invalid("transfer chain is not contiguous"));
        }
        acc = Some(match acc {
            None => t.p.clone(),
            Some(a) => a.matmul(&t.p),
        });
    }
    Ok(acc)
}

/// Inherited operator `M^R = Pᵀ M_K P` on the coarsest level of `chain`
/// (ordered fine to coarse, `chain[0].fine` is the level of `fine_op`).
pub fn galerkin_coarse_operator(fine_op: &DGOperator, chain: &[&TransferPair]) -> Result<DGOperator> {
    let Some(first) = chain.first() else {
        return Ok(fine_op.clone());
    };
    if !Arc::ptr_eq(&first.fine, &fine_op.level) {
        return Err(Error::invalid("transfer chain does not start at the operator's level"));
    }
    let mut m = fine_op.matrix.clone();
    for (i, t) in chain.iter().enumerate() {
        if i > 0 && !Arc::ptr_eq(&chain[i - 1].coarse, &t.fine) {
            return Err(Error::invalid("transfer chain is not contiguous"));
        }
        m = t.p.transpose().matmul(&m).matmul(&t.p);
    }
    let level = chain.last().expect("non-empty").coarse.clone();
    Ok(DGOperator {
        scale: level.scale(),
        level,
        matrix: m,
        lambda_max: None,
        kind: OperatorKind::Inherited,
    })
}

/// `P_k^{k-1} = A_{k-1}^{-1} R^{k-1}_k A_k`; on coefficients this is
/// `M_{k-1}^{-1} Pᵀ M_k`.
#[derive(Clone, Debug)]
pub struct POperator {
    factor: EnvelopeCholesky,
    pt_m: BlockSparse,
}

impl POperator {
    pub fn new(coarse_op: &DGOperator, fine_op: &DGOperator, pair: &TransferPair) -> Result<Self> {
        if coarse_op.n() != pair.coarse.n_dofs || fine_op.n() != pair.fine.n_dofs {
            return Err(Error::invalid("operators do not match the transfer pair"));
        }
        Ok(Self {
            factor: EnvelopeCholesky::factor(&coarse_op.matrix)?,
            pt_m: pair.p.transpose().matmul(&fine_op.matrix),
        })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.factor.solve(&self.pt_m.apply(v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.pt_m.ncols();
        let mut out = DMatrix::zeros(self.pt_m.nrows(), n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            e[j] = 0.0;
            out.set_column(j, &nalgebra::DVector::from_vec(col));
        }
        out
    }
}

/// Build `P_k^{k-1}`.
pub fn build_p_operator(coarse_op: &DGOperator, fine_op: &DGOperator, pair: &TransferPair) -> Result<POperator> {
    POperator::new(coarse_op, fine_op, pair)
}
