use std::sync::Arc;

use dgmg::analysis::*;
use dgmg::assembly::{assemble_operator, MethodConfig};
use dgmg::experiment::{OperatorMode, Scenario};
use dgmg::linalg::fit_slope;
use dgmg::mesh::{build_initial_mesh, ElementShape, Rectangle};
use dgmg::space::DGLevel;
use dgmg::transfer::build_prolongation;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn level(n: usize, shape: ElementShape, p: usize) -> Arc<DGLevel> {
    let m = build_initial_mesh(Rectangle::UNIT_SQUARE, n, shape).unwrap();
    Arc::new(DGLevel::new(Arc::new(m), p).unwrap())
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

#[test]
fn generalized_cauchy_schwarz() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for shape in [ElementShape::Quad, ElementShape::Triangle] {
        let op = assemble_operator(&level(2, shape, 2), &MethodConfig::sipg()).unwrap();
        let d = spectral_decompose(&op).unwrap();
        for _ in 0..500 {
            let v = random_vec(op.n(), &mut rng);
            let w = random_vec(op.n(), &mut rng);
            let a = op.bilinear(&v, &w).abs();
            for s in [0.0, 0.5, 1.0] {
                let bound = d.norm_s(&v, 1.0 + s) * d.norm_s(&w, 1.0 - s);
                assert!(a <= bound * (1.0 + 1e-12), "s = {s}: {a} > {bound}");
            }
        }
    }
}

#[test]
fn smoothing_closed_form_bounds_and_matches_maximization() {
    let op = assemble_operator(&level(2, ElementShape::Quad, 2), &MethodConfig::sipg()).unwrap();
    let d = spectral_decompose(&op).unwrap();
    let lambda = d.lambda_max();
    for (m, s, t) in [(1, 2.0, 0.0), (3, 2.0, 0.0), (2, 1.0, 1.0), (2, 1.5, 0.5)] {
        let exact = smoothing_constant(&d.eigenvalues, lambda, m, s, t).unwrap();
        let lower = smoothing_random_lower_bound(&op, &d, lambda, m, s, t, 1000, 3).unwrap();
        assert!(lower <= exact * (1.0 + 1e-12), "m={m} s={s} t={t}: {lower} > {exact}");
        if ((s - t) / 2.0_f64).fract() == 0.0 {
            let power = smoothing_constant_power(&op, lambda, m, s, t, 400, 3).unwrap();
            assert!((power - exact).abs() <= 1e-3 * exact, "m={m}: {power} vs {exact}");
        }
    }
}

#[test]
fn approximation_defect_vanishes_on_coarse_range_when_inherited() {
    let h = Scenario::h_multigrid(MethodConfig::sipg(), ElementShape::Quad, 2, 1, 2)
        .with_mode(OperatorMode::Inherited)
        .hierarchy()
        .unwrap();
    let t = &h.transfers[0];
    let p = dgmg::transfer::build_p_operator(&h.operators[0], &h.operators[1], t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = random_vec(h.operators[0].n(), &mut rng);
    let v = t.prolong(&w);
    let rp = t.prolong(&p.apply(&v));
    let defect = v.iter().zip(&rp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(defect < 1e-10);
    let c = approximation_constant(&h.operators[1], &h.operators[0], t).unwrap();
    assert!(c > 0.0 && c.is_finite());
}

#[test]
fn approximation_constant_decreases_with_h() {
    let s = approximation_sweep_h(&MethodConfig::sipg(), ElementShape::Quad, &[2, 4], 1).unwrap();
    assert!(s.points[1].1 < 0.5 * s.points[0].1);
    let coarse = level(2, ElementShape::Quad, 1);
    let fine = level(4, ElementShape::Quad, 1);
    assert!(build_prolongation(&coarse, &fine).is_err(), "independent meshes are not nested");
}

#[test]
fn inherited_smoothing_constant_grows_by_two_per_level() {
    // C_k h_k² for inherited operators should scale like 2^{K−k}
    let levels = 4;
    let h = Scenario::h_multigrid(MethodConfig::sipg(), ElementShape::Quad, 2, 1, levels)
        .with_mode(OperatorMode::Inherited)
        .hierarchy()
        .unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for k in 0..levels {
        let op = &h.operators[k];
        let ev = operator_eigenvalues(op, DEFAULT_DENSE_CAP).unwrap();
        let c = smoothing_constant(&ev, h.lambdas[k], 2, 2.0, 0.0).unwrap();
        x.push((levels - 1 - k) as f64);
        y.push((c * op.scale).log2());
    }
    let slope = fit_slope(&x, &y);
    assert!((slope - 1.0).abs() <= 0.25, "slope {slope}");
}

#[test]
fn discretization_error_decreases_under_refinement() {
    let st = convergence_study(&MethodConfig::sipg(), ElementShape::Triangle, 2, &[1, 2], 2, &Manufactured::sine()).unwrap();
    for p in [1, 2] {
        let rows: Vec<_> = st.rows.iter().filter(|r| r.p == p).collect();
        for w in rows.windows(2) {
            assert!(w[1].l2_error < w[0].l2_error && w[1].dg_error < w[0].dg_error);
        }
    }
    assert!(st.to_csv().starts_with("p,h,n_dofs,l2_error,dg_error\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn smoothing_constant_is_monotone_in_m(m in 1usize..20, t in 0.0f64..1.0) {
        let op = assemble_operator(&level(2, ElementShape::Triangle, 1), &MethodConfig::sipg()).unwrap();
        let ev = operator_eigenvalues(&op, DEFAULT_DENSE_CAP).unwrap();
        let lambda = *ev.last().unwrap();
        let a = smoothing_constant(&ev, lambda, m, 2.0, t).unwrap();
        let b = smoothing_constant(&ev, lambda, m + 1, 2.0, t).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-14));
    }

    #[test]
    fn norm_s_is_log_convex_in_s(seed in any::<u64>(), s in 0.0f64..2.0) {
        let op = assemble_operator(&level(2, ElementShape::Quad, 1), &MethodConfig::sipg()).unwrap();
        let d = spectral_decompose(&op).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vec(op.n(), &mut rng);
        // interpolation: |||v|||_s² ≤ |||v|||_0^{2−s} |||v|||_2^{s}
        let lhs = d.norm_s(&v, s).powi(2);
        let rhs = d.norm_s(&v, 0.0).powf(2.0 - s) * d.norm_s(&v, 2.0).powf(s);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }
}
