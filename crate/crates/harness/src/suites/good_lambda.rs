//! The good-λ inequality `|{A^(α) > 2λ}| ≤ |{C_q > γλ}| + C γ^q |{A^(β) > λ}|`
//! with the least `C` fitted per `γ`.

use anyhow::Result;
use serde_json::json;
use tentspace::decomp::{good_lambda_table, GoodLambdaTable};
use tentspace::functionals::{c_fun_from, ConeFunctional};
use tentspace::HalfSpaceField;

use super::{per_case, Setup};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

pub fn measure(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let mut report = Report::new("good_lambda", cfg);
    let space = cfg.space.desc()?;
    let corpus = setup.corpus(cfg, &space)?;
    let beta = cfg.beta();
    let gauss = cfg.gauss();
    let tables = per_case(&corpus, |_, item| {
        let f = setup.resolve(&item.function)?;
        let cone = ConeFunctional::new(&f, cfg.alpha, &gauss)?;
        let a = cone.profile(None);
        let a_max = a.sup();
        let lambdas: Vec<f64> = (1..=cfg.lambda_points).map(|j| a_max * j as f64 / 8.0).collect();
        cfg.q_list
            .iter()
            .map(|&q| {
                let cq = c_fun_from(&cone, q)?;
                let ratio = a.values.iter().zip(&cq.values).filter(|(_, c)| **c > 0.0).map(|(a, c)| a / c).fold(0.0, f64::max);
                Ok((good_lambda_table(&f, cfg.alpha, beta, q, &cfg.gamma_list, &lambdas, &gauss)?, ratio))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let ratio_max: Vec<f64> = (0..cfg.q_list.len()).map(|j| tables.iter().map(|t| t[j].1).fold(0.0, f64::max)).collect();
    for (&q, r) in cfg.q_list.iter().zip(&ratio_max) {
        report.value(&format!("max_a_over_cq_q{q}"), *r);
    }
    let tables: Vec<Vec<GoodLambdaTable>> = tables.into_iter().map(|t| t.into_iter().map(|(t, _)| t).collect()).collect();
    let tol = cfg.tolerances;

    let mut rows = Table::new("rows", &["index", "q", "gamma", "lambda", "m_lhs", "m_cq", "m_beta", "fitted_c"]);
    for (item, per_q) in corpus.iter().zip(&tables) {
        for t in per_q {
            for r in &t.rows {
                rows.push(vec![json!(item.meta.index), json!(t.q), json!(r.gamma), json!(r.lambda), json!(r.m_lhs), json!(r.m_cq), json!(r.m_beta), json!(r.fitted_c)]);
            }
        }
    }
    report.tables.push(rows);
    report.value("wraps", tables.iter().flatten().any(|t| t.wraps) as u8 as f64);

    let mut pooled_table = Table::new("pooled", &["q", "gamma", "pooled_c"]);
    for (j, &q) in cfg.q_list.iter().enumerate() {
        let all: Vec<_> = tables.iter().map(|t| &t[j]).collect();
        let holds = all.iter().filter(|t| t.holds()).count();
        report.check(&format!("holds_q{q}"), holds == all.len(), format!("{holds}/{} fields satisfy the inequality with finite fitted C", all.len()), None);
        let pooled: Vec<(f64, f64)> = cfg
            .gamma_list
            .iter()
            .map(|&g| {
                let c = all.iter().flat_map(|t| t.fitted()).filter(|(gg, _)| *gg == g).map(|(_, c)| c).fold(0.0, f64::max);
                (g, c)
            })
            .collect();
        for &(g, c) in &pooled {
            pooled_table.push(vec![json!(q), json!(g), json!(c)]);
            report.band(&format!("pooled_c_q{q}_g{g}"), [c]);
        }
        let positive: Vec<f64> = pooled.iter().map(|p| p.1).filter(|&c| c > 0.0).collect();
        match (positive.iter().copied().reduce(f64::min), positive.iter().copied().reduce(f64::max)) {
            (Some(lo), Some(hi)) => {
                report.check(
                    &format!("gamma_consistency_q{q}"),
                    hi / lo < tol.gamma_consistency && hi.is_finite(),
                    format!("pooled C over γ with C > 0: [{lo:.4}, {hi:.4}], max/min = {:.3}", hi / lo),
                    Some(tol.gamma_consistency),
                );
            }
            _ => {
                report.check(
                    &format!("gamma_consistency_q{q}"),
                    true,
                    format!("fitted C is 0 for every γ: {{A > 2λ}} ⊆ {{C_q > γλ}} on every field (max A/C_q = {:.3})", ratio_max[j]),
                    Some(tol.gamma_consistency),
                );
            }
        }
    }
    report.tables.push(pooled_table);

    let zero = HalfSpaceField::zeros(setup.grid, setup.scales, space);
    let t = good_lambda_table(&zero, cfg.alpha, beta, cfg.q_list[0], &cfg.gamma_list, &[1.0], &gauss)?;
    report.check("zero_field", t.holds() && t.rows.iter().all(|r| r.m_lhs == 0.0), "F ≡ 0 is vacuous", None);
    Ok(report)
}
