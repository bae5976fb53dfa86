//! Experiment suites. Each measures a family of inequalities over a corpus
//! and records bands and pass/fail checks in a [`Report`].

use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;
use tentspace::calderon::{nondegeneracy_margin, resolve};
use tentspace::{BanachSpaceDesc, HalfSpaceField, RandomSource, SampledFunction, ScaleGrid, SpatialGrid, TestFunction};

use crate::config::{CorpusSpec, ExperimentConfig};
use crate::corpus::{generate_corpus, CorpusItem};
use crate::report::Report;

pub mod ac;
pub mod carleson;
pub mod char_bmo;
pub mod duality;
pub mod good_lambda;
pub mod paraproduct;

pub const SUITES: [&str; 6] = ["charBMO", "AC", "duality", "carleson_embedding", "paraproduct", "good_lambda"];

/// Random stream numbers under the run seed.
pub const STREAM_CORPUS: u64 = 0;
pub const STREAM_PARTNER: u64 = 2;
pub const STREAM_PROBES: u64 = 3;

/// Grids, test functions and corpora shared by the suites.
pub struct Setup {
    pub grid: SpatialGrid,
    pub scales: ScaleGrid,
    pub psi: TestFunction,
    pub phi: TestFunction,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let psi = cfg.psi_function()?;
        let phi = cfg.phi_function(&psi)?;
        Ok(Self {
            grid: cfg.spatial_grid()?,
            scales: cfg.scale_grid()?,
            psi,
            phi,
        })
    }

    pub fn corpus(&self, cfg: &ExperimentConfig, space: &BanachSpaceDesc) -> Result<Vec<CorpusItem>> {
        generate_corpus(&cfg.corpus, &self.grid, space, &RandomSource::with_stream(cfg.seed, STREAM_CORPUS))
    }

    /// Second corpus; defaults to the main spec when none is configured.
    pub fn partner(&self, cfg: &ExperimentConfig, space: &BanachSpaceDesc) -> Result<Vec<CorpusItem>> {
        let spec: &CorpusSpec = cfg.partner.as_ref().unwrap_or(&cfg.corpus);
        generate_corpus(spec, &self.grid, space, &RandomSource::with_stream(cfg.seed, STREAM_PARTNER))
    }

    pub fn resolve(&self, f: &SampledFunction) -> Result<HalfSpaceField> {
        Ok(resolve(f, &self.psi, &self.scales)?)
    }

    /// `U(y, t_k) = (u * φ_{t_k})(y)`.
    pub fn smoothed(&self, u: &SampledFunction) -> Result<HalfSpaceField> {
        Ok(resolve(u, &self.phi, &self.scales)?)
    }

    /// Fails on a `ψ` whose transform vanishes along some direction at every scale.
    pub fn require_nondegenerate(&self, cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
        let margin = nondegeneracy_margin(&self.psi, 16, &self.scales);
        report.value("psi_margin", margin);
        if !(margin > cfg.tolerances.zero) {
            bail!("ψ = {} is degenerate on this scale grid (margin {margin:.3e})", cfg.psi);
        }
        Ok(())
    }
}

/// Corpus cases in parallel, results in corpus order.
pub fn per_case<T: Send, I: Sync>(items: &[I], f: impl Fn(usize, &I) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    items.par_iter().enumerate().map(|(i, item)| f(i, item)).collect()
}

/// Spearman rank correlation, average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut s = 0;
        while s < idx.len() {
            let mut e = s;
            while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[s]] {
                e += 1;
            }
            let avg = (s + e) as f64 / 2.0;
            for &i in &idx[s..=e] {
                r[i] = avg;
            }
            s = e + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Which refinement `--refine` applies for a suite.
fn refined_config(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentConfig> {
    match name {
        "paraproduct" => cfg.refined_in_scale(),
        _ => cfg.refined_spatially(),
    }
}

fn measure(name: &str, cfg: &ExperimentConfig) -> Result<Report> {
    match name {
        "charBMO" => char_bmo::measure(cfg),
        "AC" => ac::measure(cfg),
        "duality" => duality::measure(cfg),
        "carleson_embedding" => carleson::measure(cfg),
        "paraproduct" => paraproduct::measure(cfg),
        "good_lambda" => good_lambda::measure(cfg),
        other => bail!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")),
    }
}

/// Stability factor allowed for a band under refinement.
fn band_factor(cfg: &ExperimentConfig, band: &str) -> f64 {
    if band.starts_with("maximal") {
        cfg.tolerances.maximal_stability
    } else {
        cfg.tolerances.stability
    }
}

/// Runs a suite; with `cfg.refine`, repeats it on the refined configuration
/// and checks that every band end moves by less than the stability factor.
pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = measure(name, cfg)?;
    if cfg.refine {
        let fine_cfg = refined_config(name, cfg)?;
        let fine = measure(name, &fine_cfg)?;
        for (band, a) in &report.bands.clone() {
            let Some(b) = fine.bands.get(band) else { continue };
            let factor = band_factor(cfg, band);
            let moved = |x: f64, y: f64| if x == y { 1.0 } else { (x / y).max(y / x) };
            let worst = moved(a.min, b.min).max(moved(a.max, b.max));
            report.check(
                &format!("refine_{band}"),
                worst.is_finite() && worst < factor,
                format!("[{:.4e}, {:.4e}] -> [{:.4e}, {:.4e}], moved x{worst:.3}", a.min, a.max, b.min, b.max),
                Some(factor),
            );
        }
        report.refinement = Some(Box::new(fine));
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
