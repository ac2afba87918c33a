//! Discrete spaces `V_k`: one degree per level, an `L²(T̂)`-orthonormal
//! modal basis on every element, and the inner product
//! `(u, v)_k = h_k² Σ u_i v_i`.

mod basis;
mod quadrature;

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

pub use basis::{local_dimension, shifted_legendre, ReferenceBasis};
pub use quadrature::{gauss_legendre, RefQuadrature};

use crate::mesh::{ElementShape, MeshHierarchy, MeshLevel};
use crate::{Error, Result};

/// Basis values and reference gradients tabulated at a set of points.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub n: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(basis: &ReferenceBasis, points: &[[f64; 2]]) -> Self {
        let n = basis.len();
        let mut values = vec![0.0; n * points.len()];
        let mut grads = vec![[0.0; 2]; n * points.len()];
        for (q, pt) in points.iter().enumerate() {
            basis.eval(*pt, &mut values[q * n..(q + 1) * n], Some(&mut grads[q * n..(q + 1) * n]));
        }
        Self { n, values, grads }
    }

    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n..(q + 1) * self.n]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.n..(q + 1) * self.n]
    }
}

/// The DG space on one level.
#[derive(Debug)]
pub struct DGLevel {
    pub mesh: Arc<MeshLevel>,
    pub degree: usize,
    /// Level number within its hierarchy (1 = coarsest); 0 when standalone.
    pub index: usize,
    pub basis: ReferenceBasis,
    pub quadrature: RefQuadrature,
    /// Volume tabulation at `quadrature` points.
    pub table: Tabulation,
    /// Gauss rule on `[0, 1]` for faces, `p + 2` points.
    pub face_points: Vec<f64>,
    pub face_weights: Vec<f64>,
    pub n_local: usize,
    pub n_dofs: usize,
}

impl DGLevel {
    pub fn new(mesh: Arc<MeshLevel>, degree: usize) -> Result<Self> {
        let basis = ReferenceBasis::new(mesh.shape, degree)?;
        let quadrature = RefQuadrature::exact_for(mesh.shape, 2 * degree + 2);
        let table = Tabulation::new(&basis, &quadrature.points);
        let (face_points, face_weights) = gauss_legendre(degree + 2);
        let n_local = basis.len();
        let n_dofs = n_local * mesh.n_elements();
        Ok(Self {
            mesh,
            degree,
            index: 0,
            basis,
            quadrature,
            table,
            face_points,
            face_weights,
            n_local,
            n_dofs,
        })
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    pub fn shape(&self) -> ElementShape {
        self.mesh.shape
    }

    /// Mesh size `h_k` (largest element diameter).
    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    /// `h_k^d`, the weight of the discrete inner product.
    pub fn scale(&self) -> f64 {
        self.mesh.h * self.mesh.h
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn block(&self, element: usize) -> std::ops::Range<usize> {
        element * self.n_local..(element + 1) * self.n_local
    }

    /// Values and physical gradients of the local basis of `element` at the
    /// physical point `x`.
    pub fn eval_physical(&self, element: usize, x: [f64; 2], vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let map = &self.mesh.elements[element].map;
        let xi = map.inverse_apply(x);
        self.basis.eval(xi, vals, Some(grads));
        for g in grads.iter_mut() {
            *g = map.push_gradient(*g);
        }
    }
}

/// Spaces for every level of a mesh hierarchy.
pub fn build_spaces(meshes: &MeshHierarchy, degrees: &[usize]) -> Result<Vec<Arc<DGLevel>>> {
    if degrees.len() != meshes.n_levels() {
        return Err(Error::invalid("one degree per mesh level is required"));
    }
    meshes
        .levels
        .iter()
        .zip(degrees)
        .enumerate()
        .map(|(k, (m, &p))| Ok(Arc::new(DGLevel::new(m.clone(), p)?.with_index(k + 1))))
        .collect()
}

/// `v = Σ v_i φ_i` on one level.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub level: Arc<DGLevel>,
    pub coeffs: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(level: Arc<DGLevel>) -> Self {
        let n = level.n_dofs;
        Self {
            level,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(level: Arc<DGLevel>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != level.n_dofs {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                level.n_dofs,
                coeffs.len()
            )));
        }
        Ok(Self { level, coeffs })
    }

    fn check_element(&self, element: usize) -> Result<()> {
        if element >= self.level.n_elements() {
            return Err(Error::invalid(format!("element {element} out of range")));
        }
        Ok(())
    }

    /// Value at reference point `xi` of `element`.
    pub fn evaluate(&self, element: usize, xi: [f64; 2]) -> Result<f64> {
        self.check_element(element)?;
        let vals = self.level.basis.values(xi);
        let c = &self.coeffs[self.level.block(element)];
        Ok(vals.iter().zip(c).map(|(a, b)| a * b).sum())
    }

    /// Physical gradient at reference point `xi` of `element`.
    pub fn gradient(&self, element: usize, xi: [f64; 2]) -> Result<[f64; 2]> {
        self.check_element(element)?;
        let n = self.level.n_local;
        let mut vals = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        self.level.basis.eval(xi, &mut vals, Some(&mut grads));
        let c = &self.coeffs[self.level.block(element)];
        let mut g = [0.0; 2];
        for (gi, ci) in grads.iter().zip(c) {
            g[0] += ci * gi[0];
            g[1] += ci * gi[1];
        }
        Ok(self.level.mesh.elements[element].map.push_gradient(g))
    }

    /// `‖v‖_{L²(Ω)}` by quadrature.
    pub fn l2_norm(&self) -> f64 {
        self.l2_error(|_| 0.0)
    }

    /// `‖v − f‖_{L²(Ω)}` with a quadrature rule a few degrees above `2p`.
    pub fn l2_error(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let lvl = &self.level;
        let quad = RefQuadrature::exact_for(lvl.shape(), 2 * lvl.degree + 6);
        let tab = Tabulation::new(&lvl.basis, &quad.points);
        let mut sum = 0.0;
        for e in &lvl.mesh.elements {
            let c = &self.coeffs[lvl.block(e.id)];
            let jac = e.map.det().abs();
            for (q, (pt, w)) in quad.points.iter().zip(&quad.weights).enumerate() {
                let v: f64 = tab.values_at(q).iter().zip(c).map(|(a, b)| a * b).sum();
                let d = v - f(e.map.apply(*pt));
                sum += w * jac * d * d;
            }
        }
        sum.sqrt()
    }

    /// Broken `H¹` seminorm of `v − u` given the exact gradient `grad_u`.
    pub fn h1_seminorm_error(&self, grad_u: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
        let lvl = &self.level;
        let quad = RefQuadrature::exact_for(lvl.shape(), 2 * lvl.degree + 6);
        let tab = Tabulation::new(&lvl.basis, &quad.points);
        let mut sum = 0.0;
        for e in &lvl.mesh.elements {
            let c = &self.coeffs[lvl.block(e.id)];
            let jac = e.map.det().abs();
            for (q, (pt, w)) in quad.points.iter().zip(&quad.weights).enumerate() {
                let mut g = [0.0; 2];
                for (gi, ci) in tab.grads_at(q).iter().zip(c) {
                    g[0] += ci * gi[0];
                    g[1] += ci * gi[1];
                }
                let g = e.map.push_gradient(g);
                let gu = grad_u(e.map.apply(*pt));
                sum += w * jac * ((g[0] - gu[0]).powi(2) + (g[1] - gu[1]).powi(2));
            }
        }
        sum.sqrt()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# level={} n={}", self.level.index, self.coeffs.len())?;
        for c in &self.coeffs {
            writeln!(w, "{c:e}")?;
        }
        Ok(())
    }

    /// Coefficients from CSV written by [`GridFunction::write_csv`].
    pub fn read_csv(level: Arc<DGLevel>, r: impl BufRead) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut header = None;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                header = Some(parse_header(h)?);
                continue;
            }
            coeffs.push(
                line.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad coefficient '{line}': {e}")))?,
            );
        }
        let (idx, n) = header.ok_or_else(|| Error::Parse("missing header".into()))?;
        check_header(&level, idx, n, coeffs.len())?;
        Self::from_coeffs(level, coeffs)
    }

    /// Little-endian binary: `u64` level index, `u64` length, `f64` values.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.level.index as u64).to_le_bytes())?;
        w.write_all(&(self.coeffs.len() as u64).to_le_bytes())?;
        for c in &self.coeffs {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(level: Arc<DGLevel>, mut r: impl Read) -> Result<Self> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let idx = u64::from_le_bytes(buf) as usize;
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        check_header(&level, idx, n, n)?;
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            coeffs.push(f64::from_le_bytes(buf));
        }
        Self::from_coeffs(level, coeffs)
    }
}

fn parse_header(h: &str) -> Result<(usize, usize)> {
    let mut idx = None;
    let mut n = None;
    for tok in h.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token '{tok}'")))?;
        let v: usize = v.parse().map_err(|_| Error::Parse(format!("bad header value '{tok}'")))?;
        match k {
            "level" => idx = Some(v),
            "n" => n = Some(v),
            _ => {}
        }
    }
    match (idx, n) {
        (Some(i), Some(n)) => Ok((i, n)),
        _ => Err(Error::Parse("header needs level and n".into())),
    }
}

fn check_header(level: &DGLevel, idx: usize, n: usize, found: usize) -> Result<()> {
    if n != level.n_dofs || found != n {
        return Err(Error::Parse(format!(
            "header says {n} coefficients, level has {}, file has {found}",
            level.n_dofs
        )));
    }
    if idx != level.index {
        return Err(Error::Parse(format!("file is for level {idx}, not {}", level.index)));
    }
    Ok(())
}

/// `(u, v)_k = h_k² Σ u_i v_i`.
pub fn discrete_inner_product(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if !Arc::ptr_eq(&u.level, &v.level) {
        return Err(Error::invalid("grid functions live on different levels"));
    }
    Ok(u.level.scale() * crate::linalg::dot(&u.coeffs, &v.coeffs))
}

/// Elementwise `L²` projection. With an orthonormal reference basis the
/// coefficients are the moments `∫_T̂ (f ∘ F_T) φ̂_i`.
pub fn l2_project(f: impl Fn([f64; 2]) -> f64, level: &Arc<DGLevel>) -> GridFunction {
    let n = level.n_local;
    let mut coeffs = vec![0.0; level.n_dofs];
    for e in &level.mesh.elements {
        let c = &mut coeffs[e.id * n..(e.id + 1) * n];
        for (q, (pt, w)) in level.quadrature.points.iter().zip(&level.quadrature.weights).enumerate() {
            let fv = w * f(e.map.apply(*pt));
            for (ci, phi) in c.iter_mut().zip(level.table.values_at(q)) {
                *ci += fv * phi;
            }
        }
    }
    GridFunction {
        level: level.clone(),
        coeffs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_initial_mesh, Rectangle};

    fn level(n: usize, shape: ElementShape, p: usize) -> Arc<DGLevel> {
        let m = build_initial_mesh(Rectangle::UNIT_SQUARE, n, shape).unwrap();
        Arc::new(DGLevel::new(Arc::new(m), p).unwrap())
    }

    #[test]
    fn dof_counts() {
        let l = level(4, ElementShape::Quad, 2);
        assert_eq!(l.n_local, 9);
        assert_eq!(l.n_dofs, 9 * 16);
        let t = level(4, ElementShape::Triangle, 2);
        assert_eq!(t.n_dofs, 6 * 32);
    }

    #[test]
    fn inner_product_formula() {
        let m = build_initial_mesh(Rectangle::UNIT_SQUARE, 1, ElementShape::Quad).unwrap();
        let l = Arc::new(DGLevel::new(Arc::new(m), 1).unwrap());
        let mut u = GridFunction::zeros(l.clone());
        u.coeffs[0] = 1.0;
        let h = l.h();
        assert!((discrete_inner_product(&u, &u).unwrap() - h * h).abs() < 1e-15);
        let mut v = GridFunction::zeros(l.clone());
        v.coeffs[1] = 1.0;
        assert_eq!(discrete_inner_product(&u, &v).unwrap(), 0.0);
        let other = GridFunction::zeros(level(1, ElementShape::Quad, 1));
        assert!(discrete_inner_product(&u, &other).is_err());
    }

    #[test]
    fn constants_and_polynomials_are_reproduced() {
        for shape in [ElementShape::Quad, ElementShape::Triangle] {
            let l = level(3, shape, 2);
            let one = l2_project(|_| 1.0, &l);
            assert!(one.l2_error(|_| 1.0) < 1e-13);
            let g = one.gradient(2, [0.3, 0.2]).unwrap();
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            let poly = |x: [f64; 2]| 1.0 + x[0] - 2.0 * x[1] + x[0] * x[1] + x[1] * x[1];
            assert!(l2_project(poly, &l).l2_error(poly) < 1e-12);
        }
    }

    #[test]
    fn xy_at_cell_center() {
        let l = level(1, ElementShape::Quad, 2);
        let u = l2_project(|x| x[0] * x[1], &l);
        assert!((u.evaluate(0, [0.5, 0.5]).unwrap() - 0.25).abs() < 1e-14);
        assert!(u.evaluate(1, [0.5, 0.5]).is_err());
    }

    #[test]
    fn projection_error_order() {
        let f = |x: [f64; 2]| (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| l2_project(f, &level(n, ElementShape::Quad, 3)).l2_error(f))
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio / 16.0 - 1.0).abs() < 0.15, "ratio {ratio}");
        }
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let l = Arc::new(
            DGLevel::new(
                Arc::new(build_initial_mesh(Rectangle::UNIT_SQUARE, 2, ElementShape::Triangle).unwrap()),
                1,
            )
            .unwrap()
            .with_index(3),
        );
        let u = l2_project(|x| x[0].exp() - x[1], &l);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let v = GridFunction::read_csv(l.clone(), buf.as_slice()).unwrap();
        assert_eq!(u.coeffs, v.coeffs);
        let mut bin = Vec::new();
        u.write_binary(&mut bin).unwrap();
        let w = GridFunction::read_binary(l.clone(), bin.as_slice()).unwrap();
        assert_eq!(u.coeffs, w.coeffs);
        assert!(GridFunction::read_csv(l, "1.0\n".as_bytes()).is_err());
    }
}
