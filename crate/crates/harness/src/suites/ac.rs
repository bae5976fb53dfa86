//! `L^p` comparisons between the conical square function `A` and the
//! Carleson functional `C_q`, and between apertures.

use anyhow::Result;
use serde_json::json;
use tentspace::functionals::{a_fun, c_fun, c_fun_from, maximal_of_values, ConeFunctional};
use tentspace::HalfSpaceField;

use super::{per_case, Setup};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

/// Norms for one `(α, q, p)`.
struct Norms {
    alpha: f64,
    q: f64,
    p: f64,
    a: f64,
    a_unit: f64,
    c: f64,
    /// `‖M(A^q)^{1/q}‖_p`, which dominates `‖C_q‖_p` pointwise.
    maximal: f64,
}

fn norms(cfg: &ExperimentConfig, field: &HalfSpaceField) -> Result<Vec<Norms>> {
    let gauss = cfg.gauss();
    let unit = a_fun(field, 1.0, None, &gauss)?;
    let mut out = Vec::new();
    for &alpha in &cfg.alpha_list {
        let cone = ConeFunctional::new(field, alpha, &gauss)?;
        let a = cone.profile(None);
        for &q in &cfg.q_list {
            let c = c_fun_from(&cone, q)?;
            let pow: Vec<f64> = a.values.iter().map(|v| v.powf(q)).collect();
            let mut m = maximal_of_values(&field.grid, &pow);
            for v in m.values.iter_mut() {
                *v = v.powf(1.0 / q);
            }
            for &p in &cfg.p_list {
                out.push(Norms {
                    alpha,
                    q,
                    p,
                    a: a.lp_norm(p),
                    a_unit: unit.lp_norm(p),
                    c: c.lp_norm(p),
                    maximal: m.lp_norm(p),
                });
            }
        }
    }
    Ok(out)
}

pub fn measure(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let mut report = Report::new("AC", cfg);
    let space = cfg.space.desc()?;
    let corpus = setup.corpus(cfg, &space)?;
    let cases = per_case(&corpus, |_, item| norms(cfg, &setup.resolve(&item.function)?))?;

    let zero = HalfSpaceField::zeros(setup.grid, setup.scales, space);
    let gauss = cfg.gauss();
    let za = a_fun(&zero, cfg.alpha, None, &gauss)?.sup();
    let zc = c_fun(&zero, cfg.q_list[0], cfg.alpha, &gauss)?.sup();
    report.check("zero_field", za == 0.0 && zc == 0.0, format!("sup A = {za}, sup C_q = {zc}"), None);

    let mut table = Table::new("cases", &["index", "alpha", "q", "p", "norm_a", "norm_a_unit", "norm_cq", "norm_maximal", "maximal_constant"]);
    for (item, rows) in corpus.iter().zip(&cases) {
        for r in rows {
            table.push(vec![
                json!(item.meta.index),
                json!(r.alpha),
                json!(r.q),
                json!(r.p),
                json!(r.a),
                json!(r.a_unit),
                json!(r.c),
                json!(r.maximal),
                json!(r.maximal / r.a),
            ]);
        }
    }
    report.tables.push(table);

    let combos = cases.first().map(|c| c.len()).unwrap_or(0);
    let zero_tol = cfg.tolerances.zero;
    for j in 0..combos {
        let (alpha, q, p) = (cases[0][j].alpha, cases[0][j].q, cases[0][j].p);
        let tag = format!("a{alpha}_q{q}_p{p}");
        let live: Vec<&Norms> = cases.iter().map(|c| &c[j]).filter(|r| r.a > zero_tol && r.c > zero_tol).collect();
        report.band(&format!("a_over_c_{tag}"), live.iter().map(|r| r.a / r.c));
        if alpha != 1.0 {
            report.band(&format!("aperture_a{alpha}_p{p}"), live.iter().map(|r| r.a / r.a_unit));
        }
        if q < p {
            let constant = live.iter().map(|r| r.maximal / r.a).fold(0.0, f64::max);
            report.value(&format!("maximal_constant_{tag}"), constant);
            let worst = cases.iter().map(|c| &c[j]).map(|r| r.c - r.maximal * (1.0 + 1e-12)).fold(f64::NEG_INFINITY, f64::max);
            report.check(
                &format!("c_le_maximal_{tag}"),
                worst <= 0.0,
                format!("‖C_q‖_p ≤ C‖A‖_p with logged C = {constant:.4}; worst excess {worst:.2e}"),
                Some(1e-12),
            );
        } else {
            report.skip(&format!("c_le_maximal_{tag}"), format!("needs q < p, got q = {q}, p = {p}"));
        }
    }
    Ok(report)
}
