//! End-to-end acceptance checks, one verdict line per criterion.
//!
//! `cargo test --test acceptance` runs everything (tens of minutes on one
//! core). Pass criterion numbers to run a subset:
//! `cargo test --test acceptance -- 1 9 10`.
//!
//! Failed criteria are reported but do not fail the process unless
//! `DGMG_ACCEPTANCE_STRICT=1` is set.

use std::sync::Arc;
use std::time::Instant;

use dgmg::analysis::*;
use dgmg::assembly::*;
use dgmg::experiment::*;
use dgmg::linalg::{dot, fit_loglog_slope};
use dgmg::mesh::*;
use dgmg::multigrid::*;
use dgmg::space::{build_spaces, DGLevel, GridFunction};
use dgmg::transfer::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("     {}", what.into()));
    }
}

type Criterion = (usize, &'static str, fn() -> dgmg::Result<Verdict>);

const TABLE1_MS: [usize; 13] = [1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 18, 20];

fn table_spec(kind: TableKind, config: MethodConfig, shape: ElementShape, cells: usize) -> TableSpec {
    TableSpec {
        kind,
        config,
        shape,
        cells,
        p: 1,
        m: 6,
        ps: Vec::new(),
        ms: Vec::new(),
        ks: Vec::new(),
        split: SmoothingSplit::Both,
        rhs: Rhs::Sine,
        solve: SolveOptions::default(),
        lambda: LambdaOptions::default(),
    }
}

/// Iteration-count tables: constant load, and a CG cap above the largest
/// reported count.
fn count_spec(kind: TableKind, config: MethodConfig, shape: ElementShape, cells: usize) -> TableSpec {
    let mut s = table_spec(kind, config, shape, cells);
    s.rhs = Rhs::One;
    s.solve.max_iters = 100_000;
    s
}

fn rho(t: &Table, row: usize, k: usize) -> Option<f64> {
    t.cell(row, k).filter(|c| c.converged).and_then(|c| c.rho)
}

fn show(v: &mut Verdict, title: &str, t: &Table) {
    v.note(title.to_string());
    for line in t.render().lines() {
        v.note(format!("  {line}"));
    }
}

fn fmt_rho(r: Option<f64>) -> String {
    r.map_or("-".into(), |x| format!("{x:.4}"))
}

fn within_rel(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn table1() -> dgmg::Result<Verdict> {
    let mut spec = table_spec(TableKind::HVsM, MethodConfig::sipg(), ElementShape::Quad, 4);
    spec.ms = TABLE1_MS.to_vec();
    spec.ks = vec![2, 3, 4, 5];
    let t = run_table(&spec)?;
    let mut v = Verdict::new();
    show(&mut v, "SIPG, Cartesian, p=1", &t);
    for (m, k, paper) in [(6, 3, 0.5896), (10, 4, 0.5009), (20, 5, 0.3267)] {
        let r = rho(&t, m, k);
        v.check(
            r.is_some_and(|x| (x - paper).abs() <= 0.10),
            format!("m={m} k={k}: {} vs {paper} (±0.10)", fmt_rho(r)),
        );
    }
    for &m in TABLE1_MS.iter().filter(|&&m| m >= 5) {
        let rs: Vec<Option<f64>> = spec.ks.iter().map(|&k| rho(&t, m, k)).collect();
        let ok = rs.iter().all(Option::is_some);
        let vals: Vec<f64> = rs.iter().flatten().copied().collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
        v.check(ok && spread < 0.05, format!("m={m}: spread over k=2..5 is {spread:.4} (< 0.05)"));
    }
    Ok(v)
}

fn table1_ldg() -> dgmg::Result<Verdict> {
    let mut spec = table_spec(TableKind::HVsM, MethodConfig::ldg(), ElementShape::Triangle, 4);
    spec.ms = vec![1, 2, 3, 4, 5];
    spec.ks = vec![2, 3, 4, 5];
    let t = run_table(&spec)?;
    let mut v = Verdict::new();
    show(&mut v, "LDG, triangles, p=1", &t);
    for m in 1..=4 {
        let diverged = spec.ks.iter().all(|&k| t.cell(m, k).is_some_and(|c| !c.converged));
        v.check(diverged, format!("m={m}: no convergence within 10000 iterations at every k"));
    }
    for (k, paper) in [(2, 0.9041), (3, 0.9102), (4, 0.9097), (5, 0.9103)] {
        let r = rho(&t, 5, k);
        v.check(
            r.is_some_and(|x| (x - paper).abs() <= 0.05),
            format!("m=5 k={k}: {} vs {paper} (±0.05)", fmt_rho(r)),
        );
    }
    Ok(v)
}

fn table2() -> dgmg::Result<Verdict> {
    let mut spec = table_spec(TableKind::HInherited, MethodConfig::sipg(), ElementShape::Triangle, 4);
    spec.ms = TABLE1_MS.to_vec();
    spec.ks = (2..=7).collect();
    let t = run_table(&spec)?;
    let mut v = Verdict::new();
    show(&mut v, "SIPG, triangles, p=1, inherited coarse operators", &t);
    for &m in &TABLE1_MS {
        let rs: Vec<Option<f64>> = spec.ks.iter().map(|&k| rho(&t, m, k)).collect();
        let ok = rs.iter().all(Option::is_some) && rs.windows(2).all(|w| w[1].unwrap_or(0.0) > w[0].unwrap_or(1.0));
        v.check(ok, format!("m={m}: ρ strictly increasing in k=2..7"));
    }
    for (k, paper) in [(2, 0.8766), (7, 0.9387)] {
        let r = rho(&t, 1, k);
        v.check(
            r.is_some_and(|x| (x - paper).abs() <= 0.10),
            format!("m=1 k={k}: {} vs {paper} (±0.10)", fmt_rho(r)),
        );
    }
    Ok(v)
}

fn table3() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    for (name, cfg, shape) in [
        ("SIPG, Cartesian", MethodConfig::sipg(), ElementShape::Quad),
        ("LDG, triangles", MethodConfig::ldg(), ElementShape::Triangle),
    ] {
        let mut spec = count_spec(TableKind::HVsP, cfg, shape, 4);
        spec.ps = (1..=6).collect();
        spec.ks = vec![2, 3, 4];
        let t = run_table(&spec)?;
        show(&mut v, &format!("{name}, m=6"), &t);
        for &k in &spec.ks {
            let counts: Vec<Option<usize>> = spec
                .ps
                .iter()
                .map(|&p| t.cell(p, k).filter(|c| c.converged).map(|c| c.iterations))
                .collect();
            let grows = counts.iter().all(Option::is_some) && counts.windows(2).all(|w| w[1] > w[0]);
            v.check(grows, format!("{name} k={k}: W-cycle counts increase with p: {counts:?}"));
            for &p in &spec.ps {
                let mg = t.cell(p, k).filter(|c| c.converged).map(|c| c.iterations);
                let cg = t.cg_count(p, Some(k)).filter(|c| c.converged).map(|c| c.iterations);
                v.check(
                    matches!((mg, cg), (Some(a), Some(b)) if a < b),
                    format!("{name} p={p} k={k}: W-cycle {mg:?} < CG {cg:?}"),
                );
            }
        }
        if cfg.method == Method::Sipg {
            let cg = t.cg_count(1, Some(2)).map(|c| c.iterations).unwrap_or(0);
            v.check(within_rel(cg as f64, 65.0, 0.15), format!("CG p=1 k=2: {cg} vs 65 (±15%)"));
        }
    }
    Ok(v)
}

fn table45() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    for (name, cfg, shape, cg_paper) in [
        ("SIPG, Cartesian", MethodConfig::sipg(), ElementShape::Quad, 1347.0),
        ("LDG, triangles", MethodConfig::ldg(), ElementShape::Triangle, 3495.0),
    ] {
        let mut spec = count_spec(TableKind::PVsM, cfg, shape, 16);
        spec.p = 5;
        spec.ms = vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20];
        spec.ks = vec![2, 3, 4];
        let t4 = run_table(&spec)?;
        show(&mut v, &format!("{name}, p=5, h=0.0625"), &t4);
        let cg = t4.cg_count(5, None).filter(|c| c.converged).map_or(0, |c| c.iterations);
        v.check(within_rel(cg as f64, cg_paper, 0.15), format!("{name} CG p=5: {cg} vs {cg_paper} (±15%)"));
        if cfg.method == Method::Sipg {
            let r = rho(&t4, 10, 2);
            v.check(
                r.is_some_and(|x| (x - 0.82).abs() <= 0.10),
                format!("p=5 m=10 k=2: {} vs 0.82 (±0.10)", fmt_rho(r)),
            );
        }
        let mut below = true;
        for &m in &spec.ms {
            for &k in &spec.ks {
                below &= t4.cell(m, k).is_some_and(|c| c.converged && c.iterations < cg);
            }
        }
        v.check(below, format!("{name}: W-cycle below CG in every m ≥ 2, k cell at p=5"));

        let mut spec = count_spec(TableKind::PVsP, cfg, shape, 16);
        spec.m = 10;
        spec.ps = (2..=6).collect();
        spec.ks = vec![2, 3, 4];
        let t5 = run_table(&spec)?;
        show(&mut v, &format!("{name}, m=10, h=0.0625"), &t5);
        let mut below = true;
        for &p in &spec.ps {
            let cg = t5.cg_count(p, None).filter(|c| c.converged).map_or(0, |c| c.iterations);
            for &k in spec.ks.iter().filter(|&&k| k <= p) {
                below &= t5.cell(p, k).is_some_and(|c| c.converged && c.iterations < cg);
            }
        }
        v.check(below, format!("{name}: W-cycle below CG at every p=2..6, k ≤ p"));
    }
    Ok(v)
}

fn spectral_scaling() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let cfg = MethodConfig::sipg();
    let h = Scenario::h_multigrid(cfg, ElementShape::Quad, 4, 1, 4).hierarchy()?;
    let inv_h: Vec<f64> = h.levels.iter().map(|l| 1.0 / l.h()).collect();
    let slope_h = fit_loglog_slope(&inv_h, &h.lambdas);
    v.note(format!("λ_max vs 1/h (p=1, 4..32 cells): {:?}", h.lambdas));
    v.check((slope_h - 2.0).abs() <= 0.2, format!("exponent in 1/h: {slope_h:.3} (2 ± 0.2)"));

    let ps: Vec<usize> = (2..=6).collect();
    let mut lam = Vec::new();
    for &p in &ps {
        let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, 4, ElementShape::Quad)?;
        let op = assemble_operator(&Arc::new(DGLevel::new(Arc::new(mesh), p)?), &cfg)?;
        lam.push(estimate_lambda(&op, &LambdaOptions::default())?);
    }
    let pf: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let slope_p = fit_loglog_slope(&pf, &lam);
    v.note(format!("λ_max vs p (4×4 cells, p=2..6): {lam:?}"));
    v.check((slope_p - 4.0).abs() <= 0.5, format!("exponent in p: {slope_p:.3} (4 ± 0.5)"));

    // inherited against rediscretized: the ratio should double per level below K
    let levels = 5;
    let base = Scenario::h_multigrid(cfg, ElementShape::Triangle, 4, 1, levels);
    let assembled = base.hierarchy()?;
    let inherited = base.with_mode(OperatorMode::Inherited).hierarchy()?;
    let ratio: Vec<f64> = (0..levels).map(|k| inherited.lambdas[k] / assembled.lambdas[k]).collect();
    v.note(format!("λ_max(A^R_k)/λ_max(A_k), k=1..{levels}: {ratio:.3?}"));
    for k in 0..levels - 1 {
        let growth = ratio[k] / ratio[k + 1];
        v.check(
            within_rel(growth, 2.0, 0.25),
            format!("level {} vs {}: growth {growth:.3} (2 ± 25%)", k + 1, k + 2),
        );
    }
    Ok(v)
}

fn smoothing() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let cfg = MethodConfig::sipg();
    let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, 4, ElementShape::Quad)?;
    let op = assemble_operator(&Arc::new(DGLevel::new(Arc::new(mesh), 2)?), &cfg)?;
    let d = spectral_decompose(&op)?;
    let lambda = d.lambda_max();
    for m in [1, 2, 6] {
        let exact = smoothing_constant(&d.eigenvalues, lambda, m, 2.0, 0.0)?;
        let lower = smoothing_random_lower_bound(&op, &d, lambda, m, 2.0, 0.0, 2000, 7)?;
        let power = smoothing_constant_power(&op, lambda, m, 2.0, 0.0, 500, 7)?;
        v.check(
            lower <= exact * (1.0 + 1e-12) && (power - exact).abs() <= 1e-3 * exact,
            format!("m={m}: closed form {exact:.6e}, maximized {power:.6e}, random-vector bound {lower:.6e}"),
        );
    }
    let ps: Vec<usize> = (1..=10).collect();
    let sp = smoothing_sweep_p(&cfg, ElementShape::Quad, 4, 2, &ps)?;
    let slope_p = sp.slope();
    v.check((slope_p - 4.0).abs() <= 0.6, format!("p-slope (h=0.25, m=2, p=1..10): {slope_p:.3} (4 ± 0.6)"));
    let ms: Vec<usize> = (1..=20).collect();
    let sm = smoothing_sweep_m(&cfg, ElementShape::Quad, 16, 2, &ms)?;
    let slope_m = sm.slope();
    v.check((slope_m + 1.0).abs() <= 0.2, format!("(1+m)-slope (h=0.0625, p=2, m=1..20): {slope_m:.3} (−1 ± 0.2)"));
    Ok(v)
}

fn approximation() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let cfg = MethodConfig::sipg();
    let sh = approximation_sweep_h(&cfg, ElementShape::Quad, &[4, 8], 1)?;
    v.note(format!("h sweep (p=1): {:?}", sh.points));
    let slope_h = sh.slope();
    v.check((slope_h - 2.0).abs() <= 0.2, format!("h-exponent: {slope_h:.3} (2 ± 0.2)"));
    let sp = approximation_sweep_p(&cfg, ElementShape::Quad, 4, &[1, 2, 3, 4, 5])?;
    v.note(format!("p sweep (h=0.25): {:?}", sp.points));
    let decay = -sp.slope();
    v.check((1.0..=2.0).contains(&decay), format!("p-decay exponent: {decay:.3} (in [1, 2])"));
    Ok(v)
}

fn error_operator() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let h = Scenario::h_multigrid(MethodConfig::sipg(), ElementShape::Quad, 4, 1, 2).hierarchy()?;
    let n = h.finest().n();
    v.note(format!("two levels, {n} unknowns on the fine level"));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let opts = SolveOptions { tol: 1e-14, ..Default::default() };
    for m in [1, 2, 6] {
        let params = CycleParams::from_m(m, SmoothingSplit::Both)?;
        let e = build_error_propagator(&h, 1, &params)?;
        let (_, rep) = solve_mg(&h, &b, &params, &opts, None)?;
        let tail = rep.tail_rho(10).unwrap_or(f64::NAN);
        v.check(
            (e.spectral_radius - tail).abs() <= 0.02,
            format!("m={m}: spectral radius of E {:.4}, measured ρ {tail:.4} (±0.02)", e.spectral_radius),
        );
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let by_cycle = cycle_error_map(&h, 1, &params, &x);
        let by_matrix = &e.matrix * nalgebra::DVector::from_column_slice(&x);
        let scale = by_matrix.amax().max(1.0);
        let diff = by_cycle.iter().zip(by_matrix.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v.check(diff <= 1e-10 * scale, format!("m={m}: one cycle vs E·e, max difference {diff:.2e}"));
    }
    Ok(v)
}

fn orders() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let st = convergence_study(&MethodConfig::sipg(), ElementShape::Quad, 4, &[1, 2, 3], 3, &Manufactured::sine())?;
    for line in st.to_csv().lines() {
        v.note(line.to_string());
    }
    for p in [1, 2, 3] {
        let l2 = st.l2_order(p).unwrap_or(f64::NAN);
        let dg = st.dg_order(p).unwrap_or(f64::NAN);
        let pf = p as f64;
        v.check((l2 - (pf + 1.0)).abs() <= 0.15, format!("p={p}: L² order {l2:.3} ({} ± 0.15)", p + 1));
        v.check((dg - pf).abs() <= 0.15, format!("p={p}: DG order {dg:.3} ({p} ± 0.15)"));
    }
    Ok(v)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn structural() -> dgmg::Result<Verdict> {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rv = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };
    let shapes = [ElementShape::Quad, ElementShape::Triangle];

    let mut sym = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for shape in shapes {
        for method in [Method::Sipg, Method::SipgDelta, Method::Ldg, Method::BassiEtAl, Method::BrezziEtAl] {
            let cfg = MethodConfig::new(method);
            if cfg.validate(shape).is_err() {
                continue;
            }
            for p in [1, 3] {
                let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, 2, shape)?;
                let op = assemble_operator(&Arc::new(DGLevel::new(Arc::new(mesh), p)?), &cfg)?;
                sym = sym.max(op.relative_symmetry_defect());
                min_eig = min_eig.min(operator_eigenvalues(&op, DEFAULT_DENSE_CAP)?[0]);
            }
        }
    }
    v.check(sym <= 1e-10, format!("operator symmetry defect {sym:.2e} (≤ 1e-10)"));
    v.check(min_eig > 0.0, format!("smallest eigenvalue at α=10 over all methods {min_eig:.3e} (> 0)"));

    let (mut adj, mut embed, mut energy) = (0.0f64, 0.0f64, 0.0f64);
    for shape in shapes {
        for step in [HierarchyStep::H, HierarchyStep::P, HierarchyStep::HP] {
            let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, 2, shape)?;
            let (hm, deg) = build_hierarchy(mesh, &[step], 2, 1)?;
            let s = build_spaces(&hm, &deg)?;
            let t = build_prolongation(&s[0], &s[1])?;
            for _ in 0..5 {
                let x = rv(s[0].n_dofs);
                let y = rv(s[1].n_dofs);
                let lhs = s[1].scale() * dot(&t.prolong(&x), &y);
                let rhs = s[0].scale() * dot(&x, &t.restrict(&y));
                adj = adj.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            }
            let c = GridFunction::from_coeffs(s[0].clone(), rv(s[0].n_dofs))?;
            let f = GridFunction::from_coeffs(s[1].clone(), t.prolong(&c.coeffs))?;
            for e in &s[1].mesh.elements {
                let parent = if step == HierarchyStep::P { e.id } else { e.id / 4 };
                let xi = if shape == ElementShape::Triangle { [0.2, 0.3] } else { [0.3, 0.7] };
                let vc = c.evaluate(parent, s[0].mesh.elements[parent].map.inverse_apply(e.map.apply(xi)))?;
                embed = embed.max((f.evaluate(e.id, xi)? - vc).abs() / (1.0 + vc.abs()));
            }
            let fine = assemble_operator(&s[1], &MethodConfig::sipg())?;
            let coarse = galerkin_coarse_operator(&fine, &[&t])?;
            let x = rv(s[0].n_dofs);
            let px = t.prolong(&x);
            let (a, b) = (coarse.bilinear(&x, &x), fine.bilinear(&px, &px));
            energy = energy.max((a - b).abs() / b);
        }
    }
    v.check(adj <= 1e-12, format!("restriction adjointness defect {adj:.2e} (≤ 1e-12)"));
    v.check(embed <= 1e-12, format!("prolongation embedding defect {embed:.2e} (≤ 1e-12)"));
    v.check(energy <= 1e-12, format!("inherited energy identity defect {energy:.2e} (≤ 1e-12)"));

    let (mut fixed, mut selfadj) = (0.0f64, 0.0f64);
    for shape in shapes {
        for mode in [OperatorMode::Assembled, OperatorMode::Inherited] {
            let h = Scenario::h_multigrid(MethodConfig::sipg(), shape, 2, 2, 3).with_mode(mode).hierarchy()?;
            let op = h.finest();
            let u = rv(op.n());
            let z = wcycle(&h, 2, &op.apply(&u), &u, &CycleParams::new(2, 2)?);
            fixed = fixed.max(max_diff(&z, &u) / u.iter().fold(1.0, |m: f64, x| m.max(x.abs())));
            let (x, y) = (rv(op.n()), rv(op.n()));
            let zero = vec![0.0; op.n()];
            let (mut gx, mut gy) = (x.clone(), y.clone());
            richardson(op, h.lambdas[2], &zero, &mut gx, 1);
            richardson(op, h.lambdas[2], &zero, &mut gy, 1);
            let (l, r) = (op.bilinear(&gx, &y), op.bilinear(&x, &gy));
            selfadj = selfadj.max((l - r).abs() / (l.abs() + r.abs()));
        }
    }
    v.check(fixed <= 1e-12, format!("W-cycle fixed-point defect {fixed:.2e} (≤ 1e-12)"));
    v.check(selfadj <= 1e-10, format!("smoother self-adjointness defect {selfadj:.2e} (≤ 1e-10)"));

    // α‖r_F(⟦v⟧)‖² / ‖√σ⟦v⟧‖² ranges on a mesh and its refinement
    let cfg = MethodConfig::sipg();
    for shape in shapes {
        let coarse = build_initial_mesh(Rectangle::UNIT_SQUARE, 2, shape)?;
        let fine = refine_uniform(&coarse)?;
        let mut ranges = Vec::new();
        for mesh in [coarse, fine] {
            let l = Arc::new(DGLevel::new(Arc::new(mesh), 2)?);
            let lifts = assemble_lifting(&l, &cfg);
            let jumps = assemble_jump_penalty(&l, &cfg);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for _ in 0..50 {
                let x = rv(l.n_dofs);
                let lift: f64 = lifts.iter().map(|f| f.norm_squared(&x, l.n_local)).sum();
                let r = cfg.alpha * lift / dot(&x, &jumps.apply(&x));
                lo = lo.min(r);
                hi = hi.max(r);
            }
            ranges.push((lo, hi));
        }
        let (a, b) = (ranges[0], ranges[1]);
        v.check(
            b.0 > 0.5 * a.0 && b.1 < 2.0 * a.1,
            format!("{shape} lifting ratio range [{:.3}, {:.3}] then [{:.3}, {:.3}] after refinement", a.0, a.1, b.0, b.1),
        );
    }
    Ok(v)
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "h-multigrid factors, SIPG Cartesian", table1),
        (2, "h-multigrid non-convergence pattern, LDG triangles", table1_ldg),
        (3, "inherited coarse operators deteriorate with levels", table2),
        (4, "h-multigrid iteration counts against CG", table3),
        (5, "p-multigrid iteration counts against CG", table45),
        (6, "spectral scaling of the largest eigenvalue", spectral_scaling),
        (7, "smoothing property constants", smoothing),
        (8, "approximation property constants", approximation),
        (9, "explicit error propagation operator", error_operator),
        (10, "discretization error orders", orders),
        (11, "structural invariants", structural),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("DGMG_ACCEPTANCE_STRICT").is_ok_and(|s| s == "1");
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, lines) = match run() {
            Ok(v) => (v.pass, v.lines),
            Err(e) => (false, vec![format!("FAIL error: {e}")]),
        };
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id:>2}: {} {name} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
        for l in lines {
            println!("    {l}");
        }
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        if strict {
            std::process::exit(1);
        }
    }
}
