use crate::mesh::ElementShape;

/// Gauss–Legendre rule with `n` points on `[0, 1]`; weights sum to 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        // map from [-1, 1] to [0, 1]
        nodes[n - 1 - i] = 0.5 * (t + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (nodes, weights)
}

/// `P_n(t)` and `P_n'(t)` on `[-1, 1]`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Quadrature rule on a reference element. Weights sum to the reference
/// area (1 for the square, 1/2 for the simplex).
#[derive(Clone, Debug)]
pub struct RefQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl RefQuadrature {
    /// Rule with `n` Gauss points per direction: tensor product on the
    /// square, collapsed (Duffy) tensor rule on the simplex. Exact for
    /// polynomials of degree `2n - 2` on the simplex and `2n - 1` per
    /// variable on the square.
    pub fn new(shape: ElementShape, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                match shape {
                    ElementShape::Quad => {
                        points.push([x[i], x[j]]);
                        weights.push(w[i] * w[j]);
                    }
                    ElementShape::Triangle => {
                        let u = x[i];
                        points.push([u, x[j] * (1.0 - u)]);
                        weights.push(w[i] * w[j] * (1.0 - u));
                    }
                }
            }
        }
        Self { points, weights }
    }

    /// Rule exact for total degree `degree` (and, on the square, for that
    /// degree in each variable).
    pub fn exact_for(shape: ElementShape, degree: usize) -> Self {
        Self::new(shape, degree / 2 + 2)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
