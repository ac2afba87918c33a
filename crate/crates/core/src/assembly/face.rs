use nalgebra::DMatrix;

use crate::mesh::{Face, FaceKind};
use crate::space::DGLevel;

/// One element's view of a face: traces at the face quadrature points.
#[derive(Clone, Debug)]
pub(crate) struct Side {
    pub element: usize,
    /// `+1` on the plus side, `-1` on the minus side (jump sign).
    pub eps: f64,
    /// Average weight of this side's trace.
    pub omega: f64,
    /// `|det J_T|`
    pub jac: f64,
    /// Basis values, `nq × n` row-major.
    pub vals: Vec<f64>,
    /// Normal derivatives `∇φ · n_F`, `nq × n` row-major.
    pub dn: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct FaceData {
    pub n: usize,
    /// Physical weights (already multiplied by the face length).
    pub weights: Vec<f64>,
    pub normal: [f64; 2],
    pub sides: Vec<Side>,
}

impl FaceData {
    /// `b` is `β · n_F`; interior averages use `ω_± = 1/2 ± b`, boundary
    /// faces use the one-sided trace.
    pub fn new(level: &DGLevel, face: &Face, b: f64) -> Self {
        let n = level.n_local;
        let nq = level.face_points.len();
        let weights: Vec<f64> = level.face_weights.iter().map(|w| w * face.length).collect();
        let points: Vec<[f64; 2]> = level
            .face_points
            .iter()
            .map(|&t| level.mesh.face_point(face, t))
            .collect();
        let mut sides = Vec::with_capacity(2);
        let mut push_side = |element: usize, eps: f64, omega: f64| {
            let mut vals = vec![0.0; nq * n];
            let mut dn = vec![0.0; nq * n];
            let mut g = vec![[0.0; 2]; n];
            for (q, x) in points.iter().enumerate() {
                level.eval_physical(element, *x, &mut vals[q * n..(q + 1) * n], &mut g);
                for (d, gi) in dn[q * n..(q + 1) * n].iter_mut().zip(&g) {
                    *d = gi[0] * face.normal[0] + gi[1] * face.normal[1];
                }
            }
            sides.push(Side {
                element,
                eps,
                omega,
                jac: level.mesh.elements[element].map.det().abs(),
                vals,
                dn,
            });
        };
        match (face.kind, face.element_minus) {
            (FaceKind::Interior, Some(minus)) => {
                push_side(face.element_plus, 1.0, 0.5 + b);
                push_side(minus, -1.0, 0.5 - b);
            }
            _ => push_side(face.element_plus, 1.0, 1.0),
        }
        Self {
            n,
            weights,
            normal: face.normal,
            sides,
        }
    }

    /// `∫_F φ^s_i φ^t_j`
    pub fn mass(&self, s: usize, t: usize) -> DMatrix<f64> {
        let n = self.n;
        let (a, b) = (&self.sides[s], &self.sides[t]);
        let mut m = DMatrix::zeros(n, n);
        for (q, w) in self.weights.iter().enumerate() {
            let va = &a.vals[q * n..(q + 1) * n];
            let vb = &b.vals[q * n..(q + 1) * n];
            for j in 0..n {
                let wj = w * vb[j];
                for i in 0..n {
                    m[(i, j)] += va[i] * wj;
                }
            }
        }
        m
    }

    /// `∫_F ω_t (∇φ^t_j · n) ε_s φ^s_i`
    pub fn flux(&self, s: usize, t: usize) -> DMatrix<f64> {
        let n = self.n;
        let (a, b) = (&self.sides[s], &self.sides[t]);
        let c = b.omega * a.eps;
        let mut m = DMatrix::zeros(n, n);
        for (q, w) in self.weights.iter().enumerate() {
            let va = &a.vals[q * n..(q + 1) * n];
            let db = &b.dn[q * n..(q + 1) * n];
            for j in 0..n {
                let wj = c * w * db[j];
                for i in 0..n {
                    m[(i, j)] += va[i] * wj;
                }
            }
        }
        m
    }
}

/// Lifting of the jump on one face, restricted to the incident elements.
///
/// For side `s` and source side `t`, `blocks[s][t]` maps the coefficients of
/// `v` on element `t` to the coefficients, on element `s`, of the scalar
/// factor `ℓ` in `r_F(⟦v⟧) + l_F(β·⟦v⟧) = ℓ n_F`. Because the basis is
/// `L²(T̂)`-orthonormal the local mass matrix is `|det J| I`, so no solve
/// is needed.
#[derive(Clone, Debug)]
pub struct FaceLifting {
    pub face: usize,
    pub normal: [f64; 2],
    pub elements: Vec<usize>,
    pub jacobians: Vec<f64>,
    pub blocks: Vec<Vec<DMatrix<f64>>>,
}

impl FaceLifting {
    pub(crate) fn from_face_data(face: usize, fd: &FaceData) -> Self {
        let ns = fd.sides.len();
        let blocks = (0..ns)
            .map(|s| {
                let side = &fd.sides[s];
                (0..ns)
                    .map(|t| fd.mass(s, t) * (-side.omega * fd.sides[t].eps / side.jac))
                    .collect()
            })
            .collect();
        Self {
            face,
            normal: fd.normal,
            elements: fd.sides.iter().map(|s| s.element).collect(),
            jacobians: fd.sides.iter().map(|s| s.jac).collect(),
            blocks,
        }
    }

    /// Coefficients of the lifting's scalar factor on each incident element.
    pub fn apply(&self, coeffs: &[f64], n_local: usize) -> Vec<Vec<f64>> {
        (0..self.elements.len())
            .map(|s| {
                let mut out = vec![0.0; n_local];
                for (t, &et) in self.elements.iter().enumerate() {
                    let v = &coeffs[et * n_local..(et + 1) * n_local];
                    let b = &self.blocks[s][t];
                    for i in 0..n_local {
                        out[i] += (0..n_local).map(|j| b[(i, j)] * v[j]).sum::<f64>();
                    }
                }
                out
            })
            .collect()
    }

    /// `‖lifting(v)‖²_{L²(Ω)}`
    pub fn norm_squared(&self, coeffs: &[f64], n_local: usize) -> f64 {
        self.apply(coeffs, n_local)
            .iter()
            .zip(&self.jacobians)
            .map(|(c, j)| j * c.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }
}
