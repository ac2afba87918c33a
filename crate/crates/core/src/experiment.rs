//! Experiment scenarios: hierarchy recipes for h- and p-multigrid runs, and
//! the sweep tables built from them.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{assemble_operator, assemble_rhs, MethodConfig};
use crate::mesh::{build_hierarchy, build_initial_mesh, ElementShape, HierarchyStep, Rectangle};
use crate::multigrid::{solve_cg, solve_mg, CycleParams, Hierarchy, LambdaOptions, SmoothingSplit, SolveOptions, SolveReport};
use crate::space::{build_spaces, DGLevel};
use crate::{Error, Result};

/// Load data for table runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rhs {
    /// `f = 2π² sin(πx) sin(πy)`
    Sine,
    /// `f ≡ 1`
    One,
}

impl Rhs {
    pub fn eval(self, x: [f64; 2]) -> f64 {
        use std::f64::consts::PI;
        match self {
            Rhs::Sine => 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin(),
            Rhs::One => 1.0,
        }
    }

    pub fn load(self, level: &Arc<DGLevel>) -> Vec<f64> {
        assemble_rhs(level, |x| self.eval(x))
    }
}

impl FromStr for Rhs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sine" | "sin" | "manufactured" => Ok(Rhs::Sine),
            "one" | "1" | "constant" => Ok(Rhs::One),
            other => Err(Error::invalid(format!("unknown right-hand side '{other}'"))),
        }
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rhs::Sine => "sine",
            Rhs::One => "one",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    Assembled,
    Inherited,
}

impl FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "assembled" | "non-inherited" => Ok(OperatorMode::Assembled),
            "inherited" | "galerkin" => Ok(OperatorMode::Inherited),
            other => Err(Error::invalid(format!("unknown operator mode '{other}'"))),
        }
    }
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorMode::Assembled => "assembled",
            OperatorMode::Inherited => "inherited",
        })
    }
}

/// Recipe for one multigrid hierarchy on the unit square.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: MethodConfig,
    pub shape: ElementShape,
    /// Cells per side of the coarsest mesh.
    pub base_cells: usize,
    pub steps: Vec<HierarchyStep>,
    pub p_coarse: usize,
    pub p_increment: usize,
    pub mode: OperatorMode,
    pub lambda: LambdaOptions,
}

impl Scenario {
    /// `levels` nested meshes from `h_1 = 1/base_cells`, fixed degree.
    pub fn h_multigrid(config: MethodConfig, shape: ElementShape, base_cells: usize, p: usize, levels: usize) -> Self {
        Self {
            config,
            shape,
            base_cells,
            steps: vec![HierarchyStep::H; levels.saturating_sub(1)],
            p_coarse: p,
            p_increment: 0,
            mode: OperatorMode::Assembled,
            lambda: LambdaOptions::default(),
        }
    }

    /// `levels` degrees `p − levels + 1, …, p` on one mesh.
    pub fn p_multigrid(config: MethodConfig, shape: ElementShape, cells: usize, p: usize, levels: usize) -> Result<Self> {
        if levels == 0 || p + 1 < levels + 1 {
            return Err(Error::invalid(format!("degree {p} cannot support {levels} p-levels")));
        }
        Ok(Self {
            config,
            shape,
            base_cells: cells,
            steps: vec![HierarchyStep::P; levels - 1],
            p_coarse: p + 1 - levels,
            p_increment: 1,
            mode: OperatorMode::Assembled,
            lambda: LambdaOptions::default(),
        })
    }

    pub fn with_mode(mut self, mode: OperatorMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn n_levels(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn spaces(&self) -> Result<Vec<Arc<DGLevel>>> {
        self.config.validate(self.shape)?;
        let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, self.base_cells, self.shape)?;
        let (h, degrees) = build_hierarchy(mesh, &self.steps, self.p_coarse, self.p_increment as i64)?;
        build_spaces(&h, &degrees)
    }

    pub fn hierarchy(&self) -> Result<Hierarchy> {
        let spaces = self.spaces()?;
        match self.mode {
            OperatorMode::Assembled => Hierarchy::assembled(&spaces, &self.config, &self.lambda),
            OperatorMode::Inherited => Hierarchy::inherited(&spaces, &self.config, &self.lambda),
        }
    }
}

/// Outcome of one solve, without timing so that output is reproducible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellResult {
    pub iterations: usize,
    pub rho: Option<f64>,
    pub converged: bool,
}

impl From<&SolveReport> for CellResult {
    fn from(r: &SolveReport) -> Self {
        Self {
            iterations: r.iterations,
            rho: r.rho,
            converged: r.converged,
        }
    }
}

/// W-cycle iteration on the finest level of `hier` from a zero guess.
pub fn run_multigrid(hier: &Hierarchy, rhs: Rhs, params: &CycleParams, opts: &SolveOptions) -> Result<SolveReport> {
    let level = hier.levels.last().expect("non-empty hierarchy");
    let (_, report) = solve_mg(hier, &rhs.load(level), params, opts, None)?;
    Ok(report)
}

/// CG on the operator assembled on `level`.
pub fn run_cg(level: &Arc<DGLevel>, config: &MethodConfig, rhs: Rhs, opts: &SolveOptions) -> Result<SolveReport> {
    let op = assemble_operator(level, config)?;
    let (_, report) = solve_cg(&op, &rhs.load(level), opts)?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    /// ρ against `m` and `k`.
    HVsM,
    /// ρ against `m` and `k` with inherited coarse operators.
    HInherited,
    /// Iterations against `p` and `k`, with CG counts per `(p, k)`.
    HVsP,
    /// p-multigrid iterations against `m` and `k`, with one CG count.
    PVsM,
    /// p-multigrid iterations against `p` and `k`, with CG counts per `p`.
    PVsP,
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h-vs-m" => Ok(TableKind::HVsM),
            "h-inherited" => Ok(TableKind::HInherited),
            "h-vs-p" => Ok(TableKind::HVsP),
            "p-vs-m" => Ok(TableKind::PVsM),
            "p-vs-p" => Ok(TableKind::PVsP),
            other => Err(Error::invalid(format!("unknown table '{other}'"))),
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::HVsM => "h-vs-m",
            TableKind::HInherited => "h-inherited",
            TableKind::HVsP => "h-vs-p",
            TableKind::PVsM => "p-vs-m",
            TableKind::PVsP => "p-vs-p",
        })
    }
}

/// Everything a sweep needs besides the row and column ranges.
#[derive(Clone, Debug)]
pub struct TableSpec {
    pub kind: TableKind,
    pub config: MethodConfig,
    pub shape: ElementShape,
    /// Coarsest mesh for h-multigrid, the only mesh for p-multigrid.
    pub cells: usize,
    /// Fixed degree (`HVsM`, `HInherited`, `PVsM`).
    pub p: usize,
    /// Fixed smoothing count (`HVsP`, `PVsP`).
    pub m: usize,
    pub ps: Vec<usize>,
    pub ms: Vec<usize>,
    pub ks: Vec<usize>,
    pub split: SmoothingSplit,
    pub rhs: Rhs,
    pub solve: SolveOptions,
    pub lambda: LambdaOptions,
}

/// One solved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub method: String,
    pub grid: String,
    pub p: usize,
    pub k: usize,
    pub m1: usize,
    pub m2: usize,
    pub mode: String,
    pub result: CellResult,
}

pub const RECORD_CSV_HEADER: &str = "method,grid,p,k,m1,m2,mode,N,rho,converged";

impl Record {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.grid,
            self.p,
            self.k,
            self.m1,
            self.m2,
            self.mode,
            self.result.iterations,
            self.result.rho.map_or(String::from("-"), |r| format!("{r:.4}")),
            self.result.converged
        )
    }
}

/// CG baseline attached to a table; `k` is `None` when it does not depend on
/// the number of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CgRecord {
    pub p: usize,
    pub k: Option<usize>,
    pub result: CellResult,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub kind: TableKind,
    pub row_label: &'static str,
    pub row_keys: Vec<usize>,
    pub ks: Vec<usize>,
    /// `cells[row][col]`; `None` where the configuration does not exist.
    pub cells: Vec<Vec<Option<CellResult>>>,
    pub cg: Vec<CgRecord>,
    pub records: Vec<Record>,
}

impl Table {
    pub fn cell(&self, row_key: usize, k: usize) -> Option<CellResult> {
        let r = self.row_keys.iter().position(|&x| x == row_key)?;
        let c = self.ks.iter().position(|&x| x == k)?;
        self.cells[r][c]
    }

    pub fn cg_count(&self, p: usize, k: Option<usize>) -> Option<CellResult> {
        self.cg.iter().find(|c| c.p == p && c.k == k).map(|c| c.result)
    }

    fn shows_counts(&self) -> bool {
        !matches!(self.kind, TableKind::HVsM | TableKind::HInherited)
    }

    fn format_cell(&self, c: Option<CellResult>) -> String {
        match c {
            Some(c) if c.converged => {
                let rho = c.rho.unwrap_or(0.0);
                if self.shows_counts() {
                    format!("{} ({rho:.2})", c.iterations)
                } else {
                    format!("{rho:.4}")
                }
            }
            _ => String::from("-"),
        }
    }

    /// The sweep laid out like a printed table: one row per row key, one
    /// column per level count, then the CG baselines.
    pub fn render(&self) -> String {
        let mut s = String::from(self.row_label);
        for k in &self.ks {
            let _ = write!(s, ",k={k}");
        }
        s.push('\n');
        for (key, row) in self.row_keys.iter().zip(&self.cells) {
            let _ = write!(s, "{}={key}", self.row_label);
            for c in row {
                let _ = write!(s, ",{}", self.format_cell(*c));
            }
            s.push('\n');
        }
        if !self.cg.is_empty() {
            s.push_str("CG iteration counts\n");
            for c in &self.cg {
                let n = if c.result.converged {
                    c.result.iterations.to_string()
                } else {
                    String::from("-")
                };
                match c.k {
                    Some(k) => {
                        let _ = writeln!(s, "p={},k={k},{n}", c.p);
                    }
                    None => {
                        let _ = writeln!(s, "p={},{n}", c.p);
                    }
                }
            }
        }
        s
    }

    /// One row per solve, then one per CG baseline (`m1 = m2 = 0`,
    /// mode `cg`).
    pub fn records_csv(&self) -> String {
        let mut s = format!("{RECORD_CSV_HEADER}\n");
        for r in &self.records {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        let method = self.records.first().map_or(String::new(), |r| r.method.clone());
        let grid = self.records.first().map_or(String::new(), |r| r.grid.clone());
        for c in &self.cg {
            let rec = Record {
                method: method.clone(),
                grid: grid.clone(),
                p: c.p,
                k: c.k.unwrap_or(0),
                m1: 0,
                m2: 0,
                mode: String::from("cg"),
                result: c.result,
            };
            s.push_str(&rec.csv_row());
            s.push('\n');
        }
        s
    }
}

fn record(spec: &TableSpec, p: usize, k: usize, params: &CycleParams, mode: OperatorMode, r: CellResult) -> Record {
    Record {
        method: spec.config.method.to_string(),
        grid: spec.shape.to_string(),
        p,
        k,
        m1: params.m1,
        m2: params.m2,
        mode: mode.to_string(),
        result: r,
    }
}

/// Run every cell of a sweep, in a fixed order.
pub fn run_table(spec: &TableSpec) -> Result<Table> {
    if spec.ks.is_empty() || spec.ks.contains(&0) {
        return Err(Error::invalid("level counts must be positive"));
    }
    let k_max = *spec.ks.iter().max().expect("non-empty");
    let mut records = Vec::new();
    let mut cg = Vec::new();
    let (row_label, row_keys, cells) = match spec.kind {
        TableKind::HVsM | TableKind::HInherited => {
            let params: Vec<CycleParams> = spec
                .ms
                .iter()
                .map(|&m| CycleParams::from_m(m, spec.split))
                .collect::<Result<_>>()?;
            let mut cells = vec![vec![None; spec.ks.len()]; spec.ms.len()];
            let mode = if spec.kind == TableKind::HVsM {
                OperatorMode::Assembled
            } else {
                OperatorMode::Inherited
            };
            let mut scenario = Scenario::h_multigrid(spec.config, spec.shape, spec.cells, spec.p, k_max).with_mode(mode);
            scenario.lambda = spec.lambda;
            // assembled hierarchies nest, so one build serves every k
            let shared = if mode == OperatorMode::Assembled {
                Some(scenario.hierarchy()?)
            } else {
                None
            };
            for (c, &k) in spec.ks.iter().enumerate() {
                let hier = match &shared {
                    Some(h) => h.truncated(k)?,
                    None => {
                        let mut s = scenario.clone();
                        s.steps.truncate(k - 1);
                        s.hierarchy()?
                    }
                };
                for (r, p) in params.iter().enumerate() {
                    let res = CellResult::from(&run_multigrid(&hier, spec.rhs, p, &spec.solve)?);
                    records.push(record(spec, spec.p, k, p, mode, res));
                    cells[r][c] = Some(res);
                }
            }
            ("m", spec.ms.clone(), cells)
        }
        TableKind::HVsP => {
            let params = CycleParams::from_m(spec.m, spec.split)?;
            let mut cells = vec![vec![None; spec.ks.len()]; spec.ps.len()];
            for (r, &p) in spec.ps.iter().enumerate() {
                let mut scenario = Scenario::h_multigrid(spec.config, spec.shape, spec.cells, p, k_max);
                scenario.lambda = spec.lambda;
                let full = scenario.hierarchy()?;
                for (c, &k) in spec.ks.iter().enumerate() {
                    let hier = full.truncated(k)?;
                    let res = CellResult::from(&run_multigrid(&hier, spec.rhs, &params, &spec.solve)?);
                    records.push(record(spec, p, k, &params, OperatorMode::Assembled, res));
                    cells[r][c] = Some(res);
                    let fine = hier.levels.last().expect("non-empty");
                    let (_, rep) = solve_cg(hier.finest(), &spec.rhs.load(fine), &spec.solve)?;
                    cg.push(CgRecord {
                        p,
                        k: Some(k),
                        result: CellResult::from(&rep),
                    });
                }
            }
            ("p", spec.ps.clone(), cells)
        }
        TableKind::PVsM | TableKind::PVsP => {
            let (rows, fixed_p): (Vec<usize>, bool) = if spec.kind == TableKind::PVsM {
                (spec.ms.clone(), true)
            } else {
                (spec.ps.clone(), false)
            };
            let mut cells = vec![vec![None; spec.ks.len()]; rows.len()];
            let degrees = if fixed_p { vec![spec.p] } else { spec.ps.clone() };
            for &p in &degrees {
                let levels = spec.ks.iter().copied().filter(|&k| k <= p).max();
                let mut hier_full = None;
                if let Some(kk) = levels {
                    let mut scenario = Scenario::p_multigrid(spec.config, spec.shape, spec.cells, p, kk)?;
                    scenario.lambda = spec.lambda;
                    hier_full = Some(scenario.hierarchy()?);
                }
                for (c, &k) in spec.ks.iter().enumerate() {
                    let Some(full) = hier_full.as_ref().filter(|_| k <= p) else {
                        continue;
                    };
                    // keep the finest k levels: p, p−1, …, p−k+1
                    let hier = finest_levels(full, k, spec)?;
                    let row_params: Vec<(usize, CycleParams)> = if fixed_p {
                        spec.ms
                            .iter()
                            .enumerate()
                            .map(|(r, &m)| Ok((r, CycleParams::from_m(m, spec.split)?)))
                            .collect::<Result<_>>()?
                    } else {
                        let r = spec.ps.iter().position(|&x| x == p).expect("row exists");
                        vec![(r, CycleParams::from_m(spec.m, spec.split)?)]
                    };
                    for (r, params) in row_params {
                        let res = CellResult::from(&run_multigrid(&hier, spec.rhs, &params, &spec.solve)?);
                        records.push(record(spec, p, k, &params, OperatorMode::Assembled, res));
                        cells[r][c] = Some(res);
                    }
                }
                let mesh = build_initial_mesh(Rectangle::UNIT_SQUARE, spec.cells, spec.shape)?;
                let level = Arc::new(DGLevel::new(Arc::new(mesh), p)?);
                cg.push(CgRecord {
                    p,
                    k: None,
                    result: CellResult::from(&run_cg(&level, &spec.config, spec.rhs, &spec.solve)?),
                });
            }
            (if fixed_p { "m" } else { "p" }, rows, cells)
        }
    };
    Ok(Table {
        kind: spec.kind,
        row_label,
        row_keys,
        ks: spec.ks.clone(),
        cells,
        cg,
        records,
    })
}

/// The `k` finest levels of a p-hierarchy, rebuilt so that the coarsest
/// kept level is solved directly.
fn finest_levels(full: &Hierarchy, k: usize, spec: &TableSpec) -> Result<Hierarchy> {
    let n = full.n_levels();
    if k == n {
        return Ok(full.clone());
    }
    let ops = full.operators[n - k..].iter().map(|o| (**o).clone()).collect();
    let transfers = full.transfers[n - k..].iter().map(|t| (**t).clone()).collect();
    Hierarchy::new(ops, transfers, &spec.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: TableKind) -> TableSpec {
        TableSpec {
            kind,
            config: MethodConfig::sipg(),
            shape: ElementShape::Quad,
            cells: 2,
            p: 2,
            m: 8,
            ps: vec![1, 2],
            ms: vec![6, 10],
            ks: vec![1, 2],
            split: SmoothingSplit::Both,
            rhs: Rhs::One,
            solve: SolveOptions::default(),
            lambda: LambdaOptions::default(),
        }
    }

    #[test]
    fn names_round_trip() {
        for k in [TableKind::HVsM, TableKind::HInherited, TableKind::HVsP, TableKind::PVsM, TableKind::PVsP] {
            assert_eq!(k.to_string().parse::<TableKind>().unwrap(), k);
        }
        for r in [Rhs::Sine, Rhs::One] {
            assert_eq!(r.to_string().parse::<Rhs>().unwrap(), r);
        }
        assert!("q-vs-m".parse::<TableKind>().is_err());
    }

    #[test]
    fn p_scenario_degrees() {
        let s = Scenario::p_multigrid(MethodConfig::sipg(), ElementShape::Quad, 2, 5, 3).unwrap();
        let sp = s.spaces().unwrap();
        assert_eq!(sp.iter().map(|l| l.degree).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(Scenario::p_multigrid(MethodConfig::sipg(), ElementShape::Quad, 2, 2, 3).is_err());
    }

    #[test]
    fn small_tables_fill_every_cell() {
        for kind in [TableKind::HVsM, TableKind::HInherited, TableKind::HVsP, TableKind::PVsM, TableKind::PVsP] {
            let t = run_table(&spec(kind)).unwrap();
            assert_eq!(t.cells.len(), t.row_keys.len());
            let filled = t.cells.iter().flatten().filter(|c| c.is_some()).count();
            assert_eq!(filled, t.records.len());
            for r in &t.records {
                assert!(r.result.converged, "{kind}: {r:?}");
            }
            let text = t.render();
            assert!(text.lines().count() > t.row_keys.len());
        }
    }

    #[test]
    fn p_vs_p_marks_missing_levels() {
        let mut s = spec(TableKind::PVsP);
        s.ks = vec![2, 3];
        let t = run_table(&s).unwrap();
        assert!(t.cell(1, 2).is_none());
        assert!(t.cell(2, 3).is_none());
        assert!(t.cell(2, 2).is_some());
        assert!(t.render().contains("p=1,-,-"));
    }
}
