use super::quadrature::RefQuadrature;
use crate::mesh::ElementShape;
use crate::{Error, Result};

/// Values and derivatives of the `L²(0,1)`-orthonormal shifted Legendre
/// polynomials `√(2n+1) P_n(2x-1)`, `n = 0..=p`.
pub fn shifted_legendre(p: usize, x: f64, vals: &mut [f64], ders: &mut [f64]) {
    let t = 2.0 * x - 1.0;
    let mut pv = vec![0.0; p + 1];
    let mut pd = vec![0.0; p + 1];
    pv[0] = 1.0;
    if p >= 1 {
        pv[1] = t;
        pd[1] = 1.0;
    }
    for n in 1..p {
        pv[n + 1] = ((2 * n + 1) as f64 * t * pv[n] - n as f64 * pv[n - 1]) / (n + 1) as f64;
        pd[n + 1] = pd[n - 1] + (2 * n + 1) as f64 * pv[n];
    }
    for n in 0..=p {
        let s = ((2 * n + 1) as f64).sqrt();
        vals[n] = s * pv[n];
        ders[n] = 2.0 * s * pd[n];
    }
}

/// Jacobi polynomials `P_n^{(a,0)}(t)` and derivatives, `n = 0..=p`.
fn jacobi(p: usize, a: f64, t: f64, vals: &mut [f64], ders: &mut [f64]) {
    vals[0] = 1.0;
    ders[0] = 0.0;
    if p == 0 {
        return;
    }
    vals[1] = 0.5 * (a + 2.0) * t + 0.5 * a;
    ders[1] = 0.5 * (a + 2.0);
    for n in 1..p {
        let nf = n as f64;
        let c = 2.0 * nf + a;
        let a1 = 2.0 * (nf + 1.0) * (nf + a + 1.0) * c;
        let a2 = (c + 1.0) * a * a;
        let a3 = c * (c + 1.0) * (c + 2.0);
        let a4 = 2.0 * nf * (nf + a) * (c + 2.0);
        vals[n + 1] = ((a2 + a3 * t) * vals[n] - a4 * vals[n - 1]) / a1;
        ders[n + 1] = ((a2 + a3 * t) * ders[n] + a3 * vals[n] - a4 * ders[n - 1]) / a1;
    }
}

/// `L²(T̂)`-orthonormal polynomial basis on a reference element.
///
/// On the square: tensor products of shifted Legendre polynomials (degree
/// `p` in each variable). On the simplex: the collapsed-coordinate Dubiner
/// basis for total degree `p`, normalized numerically.
#[derive(Clone, Debug)]
pub struct ReferenceBasis {
    shape: ElementShape,
    degree: usize,
    modes: Vec<(usize, usize)>,
    /// Per-mode normalization (simplex only).
    norms: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(shape: ElementShape, degree: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::invalid("polynomial degree must be at least 1"));
        }
        let p = degree;
        let modes: Vec<(usize, usize)> = match shape {
            ElementShape::Quad => (0..=p).flat_map(|a| (0..=p).map(move |b| (a, b))).collect(),
            ElementShape::Triangle => (0..=p)
                .flat_map(|total| (0..=total).rev().map(move |i| (i, total - i)))
                .collect(),
        };
        let mut basis = Self {
            shape,
            degree,
            norms: vec![1.0; modes.len()],
            modes,
        };
        if shape == ElementShape::Triangle {
            let quad = RefQuadrature::exact_for(shape, 2 * degree);
            let n = basis.len();
            let mut acc = vec![0.0; n];
            let mut v = vec![0.0; n];
            for (pt, w) in quad.points.iter().zip(&quad.weights) {
                basis.eval(*pt, &mut v, None);
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += w * x * x;
                }
            }
            basis.norms = acc.iter().map(|a| 1.0 / a.sqrt()).collect();
        }
        Ok(basis)
    }

    fn eval_dubiner(&self, xi: [f64; 2], vals: &mut [f64], grads: Option<&mut [[f64; 2]]>) {
        let p = self.degree;
        let (x, y) = (xi[0], xi[1]);
        // collapsed coordinates: a in [-1,1] along x, s = 1 - y
        let s = 1.0 - y;
        let a = if s.abs() > 1e-14 { 2.0 * x / s - 1.0 } else { 0.0 };
        let b = 2.0 * y - 1.0;
        let mut la = vec![0.0; p + 1];
        let mut da = vec![0.0; p + 1];
        jacobi(p, 0.0, a, &mut la, &mut da);
        let mut spow = vec![1.0; p + 2];
        for i in 1..=p + 1 {
            spow[i] = spow[i - 1] * s;
        }
        let mut jb = vec![0.0; p + 1];
        let mut jd = vec![0.0; p + 1];
        let mut grads = grads;
        for (k, &(i, j)) in self.modes.iter().enumerate() {
            jacobi(p - i, (2 * i + 1) as f64, b, &mut jb[..=p - i], &mut jd[..=p - i]);
            let nrm = self.norms[k];
            vals[k] = nrm * la[i] * spow[i] * jb[j];
            if let Some(g) = grads.as_deref_mut() {
                let si1 = if i >= 1 { spow[i - 1] } else { 0.0 };
                let dx = 2.0 * da[i] * si1 * jb[j];
                let dy = da[i] * (1.0 + a) * si1 * jb[j] - la[i] * i as f64 * si1 * jb[j]
                    + la[i] * spow[i] * 2.0 * jd[j];
                g[k] = [nrm * dx, nrm * dy];
            }
        }
    }

    fn eval_tensor(&self, xi: [f64; 2], vals: &mut [f64], grads: Option<&mut [[f64; 2]]>) {
        let p = self.degree;
        let mut lx = vec![0.0; p + 1];
        let mut dx = vec![0.0; p + 1];
        let mut ly = vec![0.0; p + 1];
        let mut dy = vec![0.0; p + 1];
        shifted_legendre(p, xi[0], &mut lx, &mut dx);
        shifted_legendre(p, xi[1], &mut ly, &mut dy);
        for (k, &(a, b)) in self.modes.iter().enumerate() {
            vals[k] = lx[a] * ly[b];
        }
        if let Some(g) = grads {
            for (k, &(a, b)) in self.modes.iter().enumerate() {
                g[k] = [dx[a] * ly[b], lx[a] * dy[b]];
            }
        }
    }

    pub fn shape(&self) -> ElementShape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Basis values (and optionally reference gradients) at `xi`.
    pub fn eval(&self, xi: [f64; 2], vals: &mut [f64], grads: Option<&mut [[f64; 2]]>) {
        match self.shape {
            ElementShape::Quad => self.eval_tensor(xi, vals, grads),
            ElementShape::Triangle => self.eval_dubiner(xi, vals, grads),
        }
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.eval(xi, &mut v, None);
        v
    }

    /// Value of the first (constant) basis function, `1/√|T̂|`.
    pub fn constant_value(&self) -> f64 {
        match self.shape {
            ElementShape::Quad => 1.0,
            ElementShape::Triangle => 2f64.sqrt(),
        }
    }
}

/// Number of basis functions for degree `p`.
pub fn local_dimension(shape: ElementShape, p: usize) -> usize {
    match shape {
        ElementShape::Quad => (p + 1) * (p + 1),
        ElementShape::Triangle => (p + 1) * (p + 2) / 2,
    }
}
