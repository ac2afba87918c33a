use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dgmg::analysis::{approximation_sweep_h, approximation_sweep_p, smoothing_sweep_m, smoothing_sweep_p};
use dgmg::experiment::{run_multigrid, run_table, CellResult, Record, Scenario, RECORD_CSV_HEADER};
use dgmg::mesh::{build_initial_mesh, refine_uniform, Rectangle};
use dgmg::multigrid::CycleParams;

mod config;

use config::{cells_for, preset, MultigridKind, Overrides, RunConfig, Target, PRESETS};

#[derive(Parser)]
#[command(name = "dgmg", version, about = "hp-DG Poisson solver with W-cycle multigrid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one hierarchy, solve once, print one CSV record.
    Solve(RunArgs),
    /// Sweep a table of configurations.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// One CSV row per solve instead of the table layout.
        #[arg(long)]
        records: bool,
    },
    /// Dense estimates of the smoothing and approximation constants.
    Estimate(RunArgs),
    /// Mesh statistics per refinement level.
    Mesh {
        #[command(flatten)]
        run: RunArgs,
        /// Print vertices, elements and faces of the finest level.
        #[arg(long)]
        dump: bool,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with settings (applied after the preset).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// sipg | sipg-delta | ldg | bassi | brezzi
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// LDG flux direction, e.g. `0.5,0.5`
    #[arg(long, value_delimiter = ',', num_args = 2)]
    beta: Option<Vec<f64>>,
    /// cell-size | diameter
    #[arg(long)]
    penalty_length: Option<String>,
    /// quad | triangle
    #[arg(long)]
    grid: Option<String>,
    /// Coarsest spacing of h-hierarchies.
    #[arg(long)]
    h1: Option<f64>,
    /// Spacing of p-hierarchies and dense estimates.
    #[arg(long)]
    h: Option<f64>,
    /// h | p
    #[arg(long)]
    multigrid: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ps: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ms: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// both (m1 = m2 = m) | total (m1 + m2 = m)
    #[arg(long)]
    split: Option<String>,
    /// assembled | inherited
    #[arg(long)]
    mode: Option<String>,
    /// sine | one
    #[arg(long)]
    rhs: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// h-vs-m | h-inherited | h-vs-p | p-vs-m | p-vs-p
    #[arg(long)]
    table: Option<String>,
    /// smoothing-p | smoothing-m | approximation-p | approximation-h
    #[arg(long)]
    target: Option<String>,
    /// Write CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut layers = match &self.preset {
            Some(name) => preset(name)?,
            None => Overrides::default(),
        };
        if let Some(path) = &self.config {
            layers.overlay(&Overrides::from_file(path)?);
        }
        let beta = match self.beta.as_deref() {
            Some([x, y]) => Some([*x, *y]),
            Some(_) => bail!("beta needs two components"),
            None => None,
        };
        layers.overlay(&Overrides {
            method: self.method.clone(),
            alpha: self.alpha,
            delta: self.delta,
            beta,
            penalty_length: self.penalty_length.clone(),
            grid: self.grid.clone(),
            h1: self.h1,
            h: self.h,
            multigrid: self.multigrid.clone(),
            levels: self.levels,
            p: self.p,
            m: self.m,
            ps: self.ps.clone(),
            ms: self.ms.clone(),
            ks: self.ks.clone(),
            split: self.split.clone(),
            mode: self.mode.clone(),
            rhs: self.rhs.clone(),
            tol: self.tol,
            max_iters: self.max_iters,
            seed: self.seed,
            table: self.table.clone(),
            target: self.target.clone(),
            output: self.output.clone(),
        });
        RunConfig::resolve(&layers)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => write_stdout(text),
    }
}

/// A closed pipe (`dgmg ... | head`) is not an error.
fn write_stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn solve(cfg: &RunConfig) -> Result<()> {
    let scenario = match cfg.multigrid {
        MultigridKind::H => Scenario::h_multigrid(cfg.method, cfg.shape, cells_for(cfg.h1)?, cfg.p, cfg.levels),
        MultigridKind::P => Scenario::p_multigrid(cfg.method, cfg.shape, cells_for(cfg.h)?, cfg.p, cfg.levels)?,
    };
    let mut scenario = scenario.with_mode(cfg.mode);
    scenario.lambda = cfg.lambda;
    let hier = scenario.hierarchy()?;
    let params = CycleParams::from_m(cfg.m, cfg.split)?;
    let report = run_multigrid(&hier, cfg.rhs, &params, &cfg.solve)?;
    let record = Record {
        method: cfg.method.method.to_string(),
        grid: cfg.shape.to_string(),
        p: cfg.p,
        k: cfg.levels,
        m1: params.m1,
        m2: params.m2,
        mode: cfg.mode.to_string(),
        result: CellResult::from(&report),
    };
    eprintln!(
        "N = {}, rho = {}, converged = {}, {} unknowns",
        report.iterations,
        report.rho.map_or("-".into(), |r| format!("{r:.4}")),
        report.converged,
        hier.finest().n()
    );
    emit(cfg, &format!("{RECORD_CSV_HEADER}\n{}\n", record.csv_row()))
}

fn bench(cfg: &RunConfig, records: bool) -> Result<()> {
    let table = run_table(&cfg.table_spec()?)?;
    emit(cfg, &if records { table.records_csv() } else { table.render() })
}

fn estimate(cfg: &RunConfig) -> Result<()> {
    let Some(target) = cfg.target else {
        bail!("no estimate target selected (set `target` or use a fig1 preset)");
    };
    let cells = cells_for(cfg.h)?;
    let sweep = match target {
        Target::SmoothingP => smoothing_sweep_p(&cfg.method, cfg.shape, cells, cfg.m, &cfg.ps)?,
        Target::SmoothingM => smoothing_sweep_m(&cfg.method, cfg.shape, cells, cfg.p, &cfg.ms)?,
        Target::ApproximationP => approximation_sweep_p(&cfg.method, cfg.shape, cells, &cfg.ps)?,
        Target::ApproximationH => {
            let base = cells_for(cfg.h1)?;
            let coarse: Vec<usize> = (0..cfg.levels).map(|i| base << i).collect();
            approximation_sweep_h(&cfg.method, cfg.shape, &coarse, cfg.p)?
        }
    };
    emit(cfg, &sweep.to_csv())
}

fn mesh(cfg: &RunConfig, dump: bool) -> Result<()> {
    let mut level = build_initial_mesh(Rectangle::UNIT_SQUARE, cells_for(cfg.h1)?, cfg.shape)?;
    let mut text = String::from("level,elements,interior_faces,boundary_faces,h\n");
    for k in 1..=cfg.levels {
        if k > 1 {
            level = refine_uniform(&level)?;
        }
        text.push_str(&format!(
            "{k},{},{},{},{}\n",
            level.n_elements(),
            level.n_interior_faces(),
            level.n_boundary_faces(),
            level.h
        ));
    }
    if dump {
        text.push_str(&level.dump());
    }
    emit(cfg, &text)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => solve(&args.resolve()?),
        Command::Bench { run, records } => bench(&run.resolve()?, records),
        Command::Estimate(args) => estimate(&args.resolve()?),
        Command::Mesh { run, dump } => mesh(&run.resolve()?, dump),
        Command::Presets => {
            let text: String = PRESETS.iter().map(|(name, about)| format!("{name:<12} {about}\n")).collect();
            write_stdout(&text)
        }
    }
}
