//! `‖C_q(F)‖_∞ / ‖f‖_BMO` over a corpus, with its equivariances.

use anyhow::Result;
use rand::Rng;
use serde_json::json;
use tentspace::calderon::resolve;
use tentspace::functionals::{bmo_norm, c_fun_from, ConeFunctional};
use tentspace::{RandomSource, SampledFunction, ScaleGrid};

use super::{per_case, spearman, Setup, STREAM_PROBES};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

struct Case {
    bmo: f64,
    /// Per q: `(sup C_q, sup C_q after the shift, sup C_q of the dilate)`.
    sups: Vec<(f64, f64, f64)>,
    bmo_dilated: f64,
}

fn sups(setup: &Setup, cfg: &ExperimentConfig, f: &SampledFunction, scales: &ScaleGrid) -> Result<Vec<f64>> {
    let field = resolve(f, &setup.psi, scales)?;
    let cone = ConeFunctional::new(&field, cfg.alpha, &cfg.gauss())?;
    cfg.q_list.iter().map(|&q| Ok(c_fun_from(&cone, q)?.sup())).collect()
}

pub fn measure(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let mut report = Report::new("charBMO", cfg);
    setup.require_nondegenerate(cfg, &mut report)?;
    let space = cfg.space.desc()?;
    let corpus = setup.corpus(cfg, &space)?;
    let g = setup.grid;
    let mut probe = RandomSource::with_stream(cfg.seed, STREAM_PROBES).rng();
    let shifts: Vec<[isize; 2]> = corpus
        .iter()
        .map(|_| {
            let mut v = [probe.random_range(1..g.n as i64) as isize, 0];
            if g.dim == 2 {
                v[1] = probe.random_range(0..g.n as i64) as isize;
            }
            v
        })
        .collect();
    let s = setup.scales;
    let half = ScaleGrid::new(s.t_min / 2.0, s.t_max / 2.0, s.count)?;
    let cases = per_case(&corpus, |i, item| {
        let f = &item.function;
        let base = sups(&setup, cfg, f, &s)?;
        let moved = sups(&setup, cfg, &f.shifted(shifts[i]), &s)?;
        let dil = f.dilated(2);
        let dilated = sups(&setup, cfg, &dil, &half)?;
        Ok(Case {
            bmo: bmo_norm(f),
            sups: (0..base.len()).map(|j| (base[j], moved[j], dilated[j])).collect(),
            bmo_dilated: bmo_norm(&dil),
        })
    })?;

    let tol = cfg.tolerances;
    let mut table = Table::new(
        "cases",
        &["index", "family", "amplitude", "q", "bmo", "cq_sup", "ratio", "ratio_shifted", "ratio_dilated", "drift"],
    );
    let mut excluded = 0;
    for (j, &q) in cfg.q_list.iter().enumerate() {
        let mut ratios = Vec::new();
        let (mut bmos, mut cqs) = (Vec::new(), Vec::new());
        let (mut worst_shift, mut worst_drift) = (0.0f64, 0.0f64);
        for (item, c) in corpus.iter().zip(&cases) {
            let (sup, sup_moved, sup_dil) = c.sups[j];
            let meta = &item.meta;
            if c.bmo <= tol.zero || c.bmo_dilated <= tol.zero {
                if j == 0 {
                    excluded += 1;
                }
                table.push(vec![json!(meta.index), json!(meta.family), json!(meta.amplitude), json!(q), json!(c.bmo), json!(sup), json!(null), json!(null), json!(null), json!(null)]);
                continue;
            }
            let r = sup / c.bmo;
            let r_moved = sup_moved / c.bmo;
            let r_dil = sup_dil / c.bmo_dilated;
            let drift = (r_dil / r - 1.0).abs();
            worst_shift = worst_shift.max((r_moved - r).abs() / r);
            worst_drift = worst_drift.max(drift);
            ratios.push(r);
            bmos.push(c.bmo);
            cqs.push(sup);
            table.push(vec![json!(meta.index), json!(meta.family), json!(meta.amplitude), json!(q), json!(c.bmo), json!(sup), json!(r), json!(r_moved), json!(r_dil), json!(drift)]);
        }
        let Some(band) = report.band(&format!("ratio_q{q}"), ratios.iter().copied()) else {
            report.skip(&format!("band_q{q}"), "every corpus member was excluded by the zero guard");
            continue;
        };
        report.check(
            &format!("translation_q{q}"),
            worst_shift <= tol.equivariance,
            format!("max relative change {worst_shift:.2e}, one random grid shift per member"),
            Some(tol.equivariance),
        );
        report.check(
            &format!("dilation_q{q}"),
            worst_drift <= tol.dilation_drift,
            format!("max drift {worst_drift:.4} under x -> 2x with scales halved"),
            Some(tol.dilation_drift),
        );
        report.check(
            &format!("band_q{q}"),
            band.width() <= tol.band_ratio,
            format!("[{:.4}, {:.4}], max/min = {:.3}", band.min, band.max, band.width()),
            Some(tol.band_ratio),
        );
        if ratios.len() >= 3 {
            let rho = spearman(&bmos, &cqs);
            report.value(&format!("rank_correlation_q{q}"), rho);
            report.check(
                &format!("rank_correlation_q{q}"),
                rho >= tol.rank_correlation,
                format!("Spearman({{bmo}}, {{sup C_q}}) = {rho:.4}"),
                Some(tol.rank_correlation),
            );
        } else {
            report.skip(&format!("rank_correlation_q{q}"), "fewer than 3 nonzero members");
        }
    }
    report.value("excluded_zero", excluded as f64);
    report.tables.push(table);
    Ok(report)
}
