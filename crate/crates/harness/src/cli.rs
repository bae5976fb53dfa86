//! The `tentspace` command line.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use tentspace::decomp::{check_whitney, whitney};
use tentspace::functionals::{a_fun, bmo_norm, bmo_profile, c_fun_from, n_fun, ConeFunctional};
use tentspace::FunctionalProfile;
use tentspace::paraproduct::{lp_norm, paraproduct};
use tentspace::tsf::{from_json, load_tsf, save_tsf, to_json, TsfData};
use tentspace::{BanachSpaceDesc, HalfSpaceField, SampledFunction};

use crate::config::{ExperimentConfig, GridSpec};
use crate::report::{Report, Table};
use crate::suites::{run_suite, Setup};

#[derive(Debug, Parser)]
#[command(name = "tentspace", version, about = "Tent-space functionals on periodic grids")]
pub struct Cli {
    /// JSON configuration; for `suite` it is merged over the suite preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: the config's `out`, else `tentspace-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Repeat on a refined grid and check band stability.
    #[arg(long, global = true)]
    pub refine: bool,
    /// Worker threads; `TENTSPACE_THREADS` takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Encoding of field dumps.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsf)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsf,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// `F(y, t) = f * ψ_t` on the configured scales.
    Resolve(Inputs),
    /// Conical square function `A^(α)`.
    Afun {
        #[command(flatten)]
        inputs: Inputs,
        /// Truncation height; omitted means untruncated.
        #[arg(long)]
        height: Option<f64>,
    },
    /// Carleson functional `C_q^(α)` for every q in the config.
    Cfun(Inputs),
    /// Nontangential maximal function of `u * φ_t` (or of a scalar field).
    Nfun(Inputs),
    /// BMO norm and profile.
    Bmo(Inputs),
    /// Whitney cubes of `{‖f‖ > level}`.
    Whitney {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
    },
    /// `P(f, u)` with `f` from `--input` and scalar `u` from `--input2`.
    Paraproduct(Inputs),
    /// Run an experiment suite.
    Suite {
        /// charBMO, AC, duality, carleson_embedding, paraproduct or good_lambda.
        name: String,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct Inputs {
    /// TSF1 file (`.json` for the text form); default: first corpus member.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Second input, for `paraproduct`.
    #[arg(long)]
    pub input2: Option<PathBuf>,
}

/// Process exit status for a run result.
pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

fn configure_threads(cli_threads: Option<usize>) -> Result<()> {
    let env = std::env::var("TENTSPACE_THREADS").ok();
    let threads = match env.as_deref() {
        Some(v) => Some(v.trim().parse::<usize>().with_context(|| format!("TENTSPACE_THREADS = {v:?}"))?),
        None => cli_threads,
    };
    if let Some(k) = threads {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let mut cfg = match &cli.command {
        Command::Suite { name } => ExperimentConfig::for_suite(name, text.as_deref())?,
        _ => match &text {
            Some(t) => ExperimentConfig::from_json(t)?,
            None => ExperimentConfig::default(),
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.refine {
        cfg.refine = true;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    // an input file fixes the spatial grid
    let first = match &cli.command {
        Command::Resolve(i) | Command::Cfun(i) | Command::Nfun(i) | Command::Bmo(i) | Command::Paraproduct(i) => i.input.as_deref(),
        Command::Afun { inputs, .. } | Command::Whitney { inputs, .. } => inputs.input.as_deref(),
        Command::Suite { .. } => None,
    };
    if let Some(p) = first {
        let grid = match read_data(p)? {
            TsfData::Function(f) => f.grid,
            TsfData::Field(f) => f.grid,
        };
        cfg.grid = GridSpec {
            dim: grid.dim,
            n: grid.n,
            period: grid.period,
        };
        cfg.validate()?;
    }
    Ok(cfg)
}

fn read_data(path: &Path) -> Result<TsfData<f64>> {
    let data = if path.extension().is_some_and(|e| e == "json") {
        from_json(&std::fs::read_to_string(path)?)?
    } else {
        load_tsf(path)?
    };
    Ok(data)
}

fn write_data(dir: &Path, stem: &str, data: &TsfData<f64>, format: Format) -> Result<PathBuf> {
    let path = match format {
        Format::Tsf => dir.join(format!("{stem}.tsf")),
        Format::Json => dir.join(format!("{stem}.json")),
    };
    match format {
        Format::Tsf => save_tsf(&path, data)?,
        Format::Json => std::fs::write(&path, to_json(data)?)?,
    }
    Ok(path)
}

/// The input function, or the first member of the corpus (`partner` for the second input).
fn function_input(cfg: &ExperimentConfig, setup: &Setup, path: Option<&Path>, space: BanachSpaceDesc, partner: bool) -> Result<SampledFunction> {
    if let Some(p) = path {
        return match read_data(p)? {
            TsfData::Function(f) => Ok(f),
            TsfData::Field(_) => bail!("{} holds a half-space field, expected a function", p.display()),
        };
    }
    let corpus = if partner { setup.partner(cfg, &space)? } else { setup.corpus(cfg, &space)? };
    match corpus.into_iter().next() {
        Some(item) => Ok(item.function),
        None => bail!("no --input given and the corpus is empty"),
    }
}

/// A half-space field: read directly, or resolved from a function input.
fn field_input(cfg: &ExperimentConfig, setup: &Setup, inputs: &Inputs) -> Result<HalfSpaceField> {
    if let Some(p) = &inputs.input {
        if let TsfData::Field(f) = read_data(p)? {
            return Ok(f);
        }
    }
    setup.resolve(&function_input(cfg, setup, inputs.input.as_deref(), cfg.space.desc()?, false)?)
}

fn profile_out(report: &mut Report, dir: &Path, stem: &str, p: &FunctionalProfile, format: Format) -> Result<()> {
    let mut w = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
    p.write_csv(&mut w)?;
    write_data(dir, stem, &TsfData::Function(p.to_function()), format)?;
    report.value(&format!("{stem}_sup"), p.sup());
    for &q in &report.config.p_list.clone() {
        report.value(&format!("{stem}_l{q}"), p.lp_norm(q));
    }
    Ok(())
}

fn run_command(cli: &Cli, cfg: &ExperimentConfig, dir: &Path) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let fmt = cli.format;
    let gauss = cfg.gauss();
    let report = match &cli.command {
        Command::Suite { name } => run_suite(name, cfg)?,
        Command::Resolve(inputs) => {
            let mut r = Report::new("resolve", cfg);
            let f = function_input(cfg, &setup, inputs.input.as_deref(), cfg.space.desc()?, false)?;
            let field = setup.resolve(&f)?;
            let path = write_data(dir, "field", &TsfData::Field(field.clone()), fmt)?;
            let mut t = Table::new("scales", &["k", "t", "l2_norm"]);
            for k in 0..field.scales.count {
                let slice = field.scale_slice(k);
                let l2 = (slice.iter().map(|z| z.norm_sqr()).sum::<f64>() * field.grid.cell_measure()).sqrt();
                t.push(vec![json!(k), json!(field.scales.node(k)), json!(l2)]);
            }
            r.tables.push(t);
            r.check("written", true, path.display().to_string(), None);
            r
        }
        Command::Afun { inputs, height } => {
            let mut r = Report::new("afun", cfg);
            let field = field_input(cfg, &setup, inputs)?;
            let a = a_fun(&field, cfg.alpha, *height, &gauss)?;
            profile_out(&mut r, dir, "afun", &a, fmt)?;
            r
        }
        Command::Cfun(inputs) => {
            let mut r = Report::new("cfun", cfg);
            let field = field_input(cfg, &setup, inputs)?;
            let cone = ConeFunctional::new(&field, cfg.alpha, &gauss)?;
            for &q in &cfg.q_list {
                profile_out(&mut r, dir, &format!("cfun_q{q}"), &c_fun_from(&cone, q)?, fmt)?;
            }
            r
        }
        Command::Nfun(inputs) => {
            let mut r = Report::new("nfun", cfg);
            let big = match inputs.input.as_deref().map(read_data).transpose()? {
                Some(TsfData::Field(g)) => g,
                Some(TsfData::Function(u)) => setup.smoothed(&u)?,
                None => setup.smoothed(&function_input(cfg, &setup, None, BanachSpaceDesc::scalar(), true)?)?,
            };
            profile_out(&mut r, dir, "nfun", &n_fun(&big, cfg.alpha)?, fmt)?;
            r
        }
        Command::Bmo(inputs) => {
            let mut r = Report::new("bmo", cfg);
            let f = function_input(cfg, &setup, inputs.input.as_deref(), cfg.space.desc()?, false)?;
            r.value("bmo_norm", bmo_norm(&f));
            profile_out(&mut r, dir, "bmo_profile", &bmo_profile(&f), fmt)?;
            r
        }
        Command::Whitney { inputs, level } => {
            let mut r = Report::new("whitney", cfg);
            let f = function_input(cfg, &setup, inputs.input.as_deref(), cfg.space.desc()?, false)?;
            let mask: Vec<bool> = f.norms().iter().map(|v| *v > *level).collect();
            let w = whitney(&f.grid, &mask)?;
            let mut t = Table::new("cubes", &["level", "index0", "index1", "side", "corner0", "corner1", "diam"]);
            for c in &w.cubes {
                let corner = c.corner(&f.grid);
                t.push(vec![json!(c.level), json!(c.index[0]), json!(c.index[1]), json!(c.side(&f.grid)), json!(corner[0]), json!(corner[1]), json!(c.diam(&f.grid))]);
            }
            r.tables.push(t);
            r.value("cubes", w.cubes.len() as f64);
            let check = check_whitney(&w, &mask);
            r.check("whitney", check.is_valid(), format!("{} cubes, {} violations", w.cubes.len(), check.violations.len()), None);
            r
        }
        Command::Paraproduct(inputs) => {
            let mut r = Report::new("paraproduct", cfg);
            let f = function_input(cfg, &setup, inputs.input.as_deref(), cfg.space.desc()?, false)?;
            let u = function_input(cfg, &setup, inputs.input2.as_deref(), BanachSpaceDesc::scalar(), true)?;
            let p = paraproduct(&f, &u, &setup.psi, &setup.phi, &setup.scales)?;
            write_data(dir, "paraproduct", &TsfData::Function(p.field.clone()), fmt)?;
            for &q in &cfg.p_list {
                r.value(&format!("paraproduct_l{q}"), lp_norm(&p.field, q)?);
            }
            r.value("tail", p.tail);
            r.value("truncated", p.truncated as u8 as f64);
            r
        }
    };
    Ok(report)
}

/// Parses nothing; runs an already parsed command line and writes its outputs.
pub fn run(cli: &Cli) -> Result<Report> {
    configure_threads(cli.threads)?;
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("tentspace-out"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut report = run_command(cli, &cfg, &dir)?;
    report.wall_clock_s = start.elapsed().as_secs_f64();
    report.write(&dir)?;
    Ok(report)
}
