//! Run configuration: built-in defaults, overlaid by a preset, a TOML file
//! and command-line flags, in that order.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dgmg::assembly::{Method, MethodConfig, PenaltyLength};
use dgmg::experiment::{OperatorMode, Rhs, TableKind, TableSpec};
use dgmg::mesh::ElementShape;
use dgmg::multigrid::{LambdaOptions, SmoothingSplit, SolveOptions};
use serde::Deserialize;

/// A sparse set of settings. Every layer is one of these.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<[f64; 2]>,
    pub penalty_length: Option<String>,
    pub grid: Option<String>,
    /// Coarsest mesh spacing for h-multigrid.
    pub h1: Option<f64>,
    /// Mesh spacing for p-multigrid.
    pub h: Option<f64>,
    /// `h` or `p`, used by `solve`.
    pub multigrid: Option<String>,
    pub levels: Option<usize>,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub ps: Option<Vec<usize>>,
    pub ms: Option<Vec<usize>>,
    pub ks: Option<Vec<usize>>,
    pub split: Option<String>,
    pub mode: Option<String>,
    pub rhs: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
    pub table: Option<String>,
    pub target: Option<String>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $(if $src.$f.is_some() { $dst.$f = $src.$f.clone(); })*
    };
}

impl Overrides {
    /// Later layers win field by field.
    pub fn overlay(&mut self, top: &Overrides) {
        overlay!(
            self, top, method, alpha, delta, beta, penalty_length, grid, h1, h, multigrid, levels, p, m, ps, ms, ks,
            split, mode, rhs, tol, max_iters, seed, table, target, output
        );
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration file")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }
}

pub const TABLE_MS: [usize; 13] = [1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 18, 20];

pub const PRESETS: [(&str, &str); 15] = [
    ("table1-sipg", "h-multigrid factors vs m and k, SIPG on squares, p=1"),
    ("table1-ldg", "h-multigrid factors vs m and k, LDG on triangles, p=1"),
    ("table2", "as table1 with inherited coarse operators, SIPG on triangles, k=2..7"),
    ("table3-sipg", "h-multigrid iteration counts vs p and k, SIPG, m=6, with CG"),
    ("table3-ldg", "h-multigrid iteration counts vs p and k, LDG, m=6, with CG"),
    ("table4-sipg", "p-multigrid iteration counts vs m and k, SIPG, p=5, h=0.0625"),
    ("table4-ldg", "p-multigrid iteration counts vs m and k, LDG, p=5, h=0.0625"),
    ("table5-sipg", "p-multigrid iteration counts vs p and k, SIPG, m=10, h=0.0625"),
    ("table5-ldg", "p-multigrid iteration counts vs p and k, LDG, m=10, h=0.0625"),
    ("fig1a", "smoothing constant vs p, h=0.25, m=2"),
    ("fig1b", "smoothing constant vs m, h=0.0625, p=2"),
    ("fig1c", "approximation constant vs p, h=0.25"),
    ("table3", "alias of table3-sipg"),
    ("table4", "alias of table4-sipg"),
    ("table5", "alias of table5-sipg"),
];

pub fn preset(name: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    let method = |o: &mut Overrides, ldg: bool| {
        o.method = Some(if ldg { "ldg" } else { "sipg" }.into());
        o.grid = Some(if ldg { "triangle" } else { "quad" }.into());
    };
    // iteration-count tables use a constant load and a CG cap above their largest counts
    let counts = |o: &mut Overrides| {
        o.rhs = Some("one".into());
        o.max_iters = Some(100_000);
    };
    match name {
        "table1-sipg" | "table1-ldg" => {
            method(&mut o, name.ends_with("ldg"));
            o.table = Some("h-vs-m".into());
            o.p = Some(1);
            o.ms = Some(TABLE_MS.to_vec());
            o.ks = Some(vec![2, 3, 4, 5]);
        }
        "table2" => {
            o.method = Some("sipg".into());
            o.grid = Some("triangle".into());
            o.table = Some("h-inherited".into());
            o.p = Some(1);
            o.ms = Some(TABLE_MS.to_vec());
            o.ks = Some((2..=7).collect());
        }
        "table3" | "table3-sipg" | "table3-ldg" => {
            method(&mut o, name.ends_with("ldg"));
            counts(&mut o);
            o.table = Some("h-vs-p".into());
            o.m = Some(6);
            o.ps = Some((1..=6).collect());
            o.ks = Some(vec![2, 3, 4]);
        }
        "table4" | "table4-sipg" | "table4-ldg" => {
            method(&mut o, name.ends_with("ldg"));
            counts(&mut o);
            o.table = Some("p-vs-m".into());
            o.p = Some(5);
            o.ms = Some(vec![1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
            o.ks = Some(vec![2, 3, 4]);
        }
        "table5" | "table5-sipg" | "table5-ldg" => {
            method(&mut o, name.ends_with("ldg"));
            counts(&mut o);
            o.table = Some("p-vs-p".into());
            o.m = Some(10);
            o.ps = Some((2..=6).collect());
            o.ks = Some(vec![2, 3, 4]);
        }
        "fig1a" => {
            method(&mut o, false);
            o.target = Some("smoothing-p".into());
            o.h = Some(0.25);
            o.m = Some(2);
            o.ps = Some((1..=10).collect());
        }
        "fig1b" => {
            method(&mut o, false);
            o.target = Some("smoothing-m".into());
            o.h = Some(0.0625);
            o.p = Some(2);
            o.ms = Some((1..=20).collect());
        }
        "fig1c" => {
            method(&mut o, false);
            o.target = Some("approximation-p".into());
            o.h = Some(0.25);
            o.ps = Some((1..=5).collect());
        }
        other => bail!("unknown preset '{other}' (see `dgmg presets`)"),
    }
    Ok(o)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultigridKind {
    H,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    SmoothingP,
    SmoothingM,
    ApproximationP,
    ApproximationH,
}

/// Fully resolved and validated settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub method: MethodConfig,
    pub shape: ElementShape,
    pub h1: f64,
    pub h: f64,
    pub multigrid: MultigridKind,
    pub levels: usize,
    pub p: usize,
    pub m: usize,
    pub ps: Vec<usize>,
    pub ms: Vec<usize>,
    pub ks: Vec<usize>,
    pub split: SmoothingSplit,
    pub mode: OperatorMode,
    pub rhs: Rhs,
    pub solve: SolveOptions,
    pub lambda: LambdaOptions,
    pub table: Option<TableKind>,
    pub target: Option<Target>,
    pub output: Option<PathBuf>,
}

/// Number of cells per side for a spacing that must divide the unit square.
pub fn cells_for(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 1.0) {
        bail!("mesh spacing must lie in (0, 1], got {h}");
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-9 {
        bail!("mesh spacing {h} does not divide the unit square");
    }
    Ok(n as usize)
}

fn parse<T: std::str::FromStr>(value: Option<&String>, default: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = value.map_or(default, String::as_str);
    s.parse().map_err(|e| anyhow::anyhow!("{what}: {e}"))
}

impl RunConfig {
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let method: Method = parse(o.method.as_ref(), "sipg", "method")?;
        let mut config = MethodConfig::new(method)
            .with_alpha(o.alpha.unwrap_or(MethodConfig::DEFAULT_ALPHA))
            .with_beta(o.beta.unwrap_or([0.0, 0.0]));
        if let Some(d) = o.delta {
            config = config.with_delta(d);
        }
        if let Some(pl) = &o.penalty_length {
            config = config.with_penalty_length(pl.parse::<PenaltyLength>()?);
        }
        let shape: ElementShape = parse(o.grid.as_ref(), "quad", "grid")?;
        config.validate(shape)?;
        let multigrid = match o.multigrid.as_deref().unwrap_or("h") {
            "h" => MultigridKind::H,
            "p" => MultigridKind::P,
            other => bail!("multigrid must be 'h' or 'p', got '{other}'"),
        };
        let target = o
            .target
            .as_deref()
            .map(|t| match t {
                "smoothing-p" => Ok(Target::SmoothingP),
                "smoothing-m" => Ok(Target::SmoothingM),
                "approximation-p" => Ok(Target::ApproximationP),
                "approximation-h" => Ok(Target::ApproximationH),
                other => Err(anyhow::anyhow!("unknown estimate target '{other}'")),
            })
            .transpose()?;
        let table = o.table.as_ref().map(|t| t.parse::<TableKind>()).transpose()?;
        let tol = o.tol.unwrap_or(1e-8);
        if !(tol > 0.0 && tol < 1.0) {
            bail!("tol must lie in (0, 1), got {tol}");
        }
        let max_iters = o.max_iters.unwrap_or(10_000);
        if max_iters == 0 {
            bail!("max-iters must be positive");
        }
        let p = o.p.unwrap_or(1);
        let levels = o.levels.unwrap_or(2);
        if p == 0 || levels == 0 {
            bail!("p and levels must be positive");
        }
        let lists = [("ps", &o.ps), ("ms", &o.ms), ("ks", &o.ks)];
        for (name, list) in lists {
            if list.as_ref().is_some_and(|l| l.is_empty()) {
                bail!("{name} must not be empty");
            }
        }
        let cfg = RunConfig {
            method: config,
            shape,
            h1: o.h1.unwrap_or(0.25),
            h: o.h.unwrap_or(0.0625),
            multigrid,
            levels,
            p,
            m: o.m.unwrap_or(6),
            ps: o.ps.clone().unwrap_or_else(|| vec![p]),
            ms: o.ms.clone().unwrap_or_else(|| vec![o.m.unwrap_or(6)]),
            ks: o.ks.clone().unwrap_or_else(|| vec![levels]),
            split: parse(o.split.as_ref(), "both", "split")?,
            mode: parse(o.mode.as_ref(), "assembled", "mode")?,
            rhs: parse(o.rhs.as_ref(), "sine", "rhs")?,
            solve: SolveOptions {
                tol,
                max_iters,
                ..SolveOptions::default()
            },
            lambda: LambdaOptions {
                seed: o.seed.unwrap_or(LambdaOptions::default().seed),
                ..LambdaOptions::default()
            },
            table,
            target,
            output: o.output.clone(),
        };
        cells_for(cfg.h1).context("h1")?;
        cells_for(cfg.h).context("h")?;
        Ok(cfg)
    }

    pub fn table_spec(&self) -> Result<TableSpec> {
        let Some(kind) = self.table else {
            bail!("no table selected (set `table` or use a table preset)");
        };
        let cells = match kind {
            TableKind::PVsM | TableKind::PVsP => cells_for(self.h)?,
            _ => cells_for(self.h1)?,
        };
        Ok(TableSpec {
            kind,
            config: self.method,
            shape: self.shape,
            cells,
            p: self.p,
            m: self.m,
            ps: self.ps.clone(),
            ms: self.ms.clone(),
            ks: self.ks.clone(),
            split: self.split,
            rhs: self.rhs,
            solve: self.solve,
            lambda: self.lambda,
        })
    }
}
