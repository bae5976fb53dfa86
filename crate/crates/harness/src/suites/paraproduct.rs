//! `R(f, u, p) = ‖P(f, u)‖_p / (‖f‖_BMO ‖u‖_p)`, the zero cases, and the
//! pointwise bound `N^(α)(u * φ_t) ≤ c M(u)`.

use anyhow::Result;
use serde_json::json;
use tentspace::functionals::{bmo_norm, maximal_fn, n_fun};
use tentspace::paraproduct::{lp_norm, paraproduct};
use tentspace::{BanachSpaceDesc, Complex64, SampledFunction};

use super::{per_case, Setup};
use crate::config::{ExperimentConfig, PhiChoice};
use crate::corpus::CorpusItem;
use crate::report::{Report, Table};

struct Case {
    bmo: f64,
    /// `(‖P‖_p, ‖u‖_p)` per p.
    norms: Vec<(f64, f64)>,
    tail: f64,
    truncated: bool,
}

/// Largest `N^(α)(u * φ_t)(x) / M u(x)` over the corpus and the grid.
pub fn maximal_constant(setup: &Setup, alpha: f64, us: &[CorpusItem]) -> Result<f64> {
    let per = per_case(us, |_, item| {
        let big = setup.smoothed(&item.function)?;
        let n = n_fun(&big, alpha)?;
        let m = maximal_fn(&item.function)?;
        Ok(n.values.iter().zip(&m.values).filter(|(_, m)| **m > 0.0).map(|(n, m)| n / m).fold(0.0, f64::max))
    })?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// `2(2α φ(0) + 1)` for the unit Gaussian on the line.
pub fn gaussian_maximal_bound(alpha: f64) -> f64 {
    2.0 * (2.0 * alpha / (2.0 * std::f64::consts::PI).sqrt() + 1.0)
}

pub fn measure(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let mut report = Report::new("paraproduct", cfg);
    setup.require_nondegenerate(cfg, &mut report)?;
    let space = cfg.space.desc()?;
    let fs = setup.corpus(cfg, &space)?;
    let us = setup.partner(cfg, &BanachSpaceDesc::scalar())?;
    let cases = per_case(&fs, |i, item| {
        let u = &us[i].function;
        let pp = paraproduct(&item.function, u, &setup.psi, &setup.phi, &setup.scales)?;
        let norms = cfg
            .p_list
            .iter()
            .map(|&p| Ok((lp_norm(&pp.field, p)?, lp_norm(u, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Case {
            bmo: bmo_norm(&item.function),
            norms,
            tail: pp.tail,
            truncated: pp.truncated,
        })
    })?;
    let tol = cfg.tolerances;

    let mut table = Table::new("cases", &["index", "p", "bmo_f", "norm_u", "norm_p", "ratio", "tail", "truncated"]);
    let mut all = Vec::new();
    for (j, &p) in cfg.p_list.iter().enumerate() {
        let mut ratios = Vec::new();
        for (item, c) in fs.iter().zip(&cases) {
            let (np, nu) = c.norms[j];
            let live = c.bmo > tol.zero && nu > tol.zero;
            let r = if live { Some(np / (c.bmo * nu)) } else { None };
            ratios.extend(r);
            table.push(vec![json!(item.meta.index), json!(p), json!(c.bmo), json!(nu), json!(np), json!(r), json!(c.tail), json!(c.truncated)]);
        }
        report.band(&format!("ratio_p{p}"), ratios.iter().copied());
        all.extend(ratios);
    }
    report.tables.push(table);
    let truncated = cases.iter().filter(|c| c.truncated).count();
    report.value("truncated_cases", truncated as f64);
    if let Some(band) = report.band("ratio", all.iter().copied()) {
        match tol.paraproduct_baseline {
            Some(b) => {
                let bound = b * tol.baseline_factor;
                report.check("baseline", band.max <= bound, format!("max R = {:.4} vs baseline {b:.4} x {}", band.max, tol.baseline_factor), Some(bound));
            }
            None => report.skip("baseline", format!("no stored baseline; measured max R = {:.4}", band.max)),
        }
    }

    // zero cases
    let d = space.dim;
    let c: Vec<Complex64> = (0..d).map(|j| Complex64::new(1.0 + j as f64, -0.5 * j as f64)).collect();
    let cnorm = space.norm_of(&c);
    let constant = SampledFunction::constant(setup.grid, space, &c)?;
    if let Some(u) = us.first() {
        let z = lp_norm(&paraproduct(&constant, &u.function, &setup.psi, &setup.phi, &setup.scales)?.field, 2.0)?;
        report.check("constant_f", z < tol.zero * cnorm, format!("‖P(c, u)‖_2 = {z:.2e}"), Some(tol.zero));
    }
    if let Some(f) = fs.first() {
        if cfg.phi == PhiChoice::Complementary {
            let one = SampledFunction::constant(setup.grid, BanachSpaceDesc::scalar(), &[Complex64::new(1.0, 0.0)])?;
            let z = lp_norm(&paraproduct(&f.function, &one, &setup.psi, &setup.phi, &setup.scales)?.field, 2.0)?;
            report.check("constant_u", z < tol.zero, format!("‖P(f, 1)‖_2 = {z:.2e}"), Some(tol.zero));
        } else {
            report.skip("constant_u", "u ≡ 1 is annihilated only with the complementary φ");
        }
    }

    let c_max = maximal_constant(&setup, cfg.alpha, &us)?;
    report.value("maximal_c", c_max);
    report.band("maximal_c", [c_max]);
    let closed = (cfg.phi == PhiChoice::GaussBump && setup.grid.dim == 1).then(|| gaussian_maximal_bound(cfg.alpha));
    report.check(
        "maximal_domination",
        c_max.is_finite() && closed.is_none_or(|b| c_max <= b),
        match closed {
            Some(b) => format!("N(u*φ_t) ≤ c M(u) with c = {c_max:.4} (closed-form bound {b:.4})"),
            None => format!("N(u*φ_t) ≤ c M(u) with c = {c_max:.4}"),
        },
        closed,
    );
    Ok(report)
}
