//! `∬ |⟨F, G⟩| dy dt/t ≤ C(ρ, q) ∫ C_q(F) A(G) dx` with `C = ρ / (1 − ρ^{-q})`.

use anyhow::Result;
use serde_json::json;
use tentspace::decomp::{fubini_defect, nonnegative_field, stopping_time_for};
use tentspace::functionals::{a_fun, c_fun};
use tentspace::{BanachSpaceDesc, HalfSpaceField};

use super::{per_case, Setup};
use crate::config::ExperimentConfig;
use crate::report::{Report, Table};

/// `|⟨F(y, t_k), G(y, t_k)⟩|` as a nonnegative scalar field.
fn pairing_field(f: &HalfSpaceField, g: &HalfSpaceField) -> HalfSpaceField {
    nonnegative_field(f.grid, f.scales, |i, k| {
        f.value(i, k).iter().zip(g.value(i, k)).map(|(a, b)| a * b).sum::<tentspace::Complex64>().norm()
    })
}

/// Left side over the cone-eligible scales, `Δy^n Δlog t` per atom.
fn lhs(h: &HalfSpaceField) -> f64 {
    let levels = h.scales.cone_levels(None);
    let w = h.grid.cell_measure() * h.scales.dlog();
    (0..levels).map(|k| h.scale_slice(k).iter().map(|z| z.re).sum::<f64>() * w).sum()
}

struct Sides {
    q: f64,
    lhs: f64,
    rhs: f64,
    /// `C₀ ∫ ∬_{Γ^{τ(x)}(x)} |⟨F,G⟩| dμ dx`, the middle of the chain.
    fubini: f64,
}

fn sides(cfg: &ExperimentConfig, f: &HalfSpaceField, g: &HalfSpaceField) -> Result<Vec<Sides>> {
    let gauss = cfg.gauss();
    let h = pairing_field(f, g);
    let left = lhs(&h);
    let ag = a_fun(g, cfg.alpha, None, &gauss)?;
    let cell = f.grid.cell_measure();
    cfg.q_list
        .iter()
        .map(|&q| {
            let cq = c_fun(f, q, cfg.alpha, &gauss)?;
            let rhs = cq.values.iter().zip(&ag.values).map(|(c, a)| c * a).sum::<f64>() * cell;
            let tau = stopping_time_for(f, q, cfg.rho, cfg.alpha, &gauss)?;
            let fubini = fubini_defect(&h, &tau)?.lhs;
            Ok(Sides { q, lhs: left, rhs, fubini })
        })
        .collect()
}

pub fn constant(rho: f64, q: f64) -> f64 {
    rho / (1.0 - rho.powf(-q))
}

pub fn measure(cfg: &ExperimentConfig) -> Result<Report> {
    let setup = Setup::new(cfg)?;
    let mut report = Report::new("duality", cfg);
    let space = cfg.space.desc()?;
    let fs = setup.corpus(cfg, &space)?;
    let gs = setup.partner(cfg, &space.dual())?;
    let cases = per_case(&fs, |i, item| {
        let f = setup.resolve(&item.function)?;
        let g = setup.resolve(&gs[i].function)?;
        sides(cfg, &f, &g)
    })?;
    let slack = cfg.tolerances.duality_slack;

    let mut table = Table::new("cases", &["index", "q", "lhs", "rhs", "fubini_middle", "ratio", "bound"]);
    for (item, rows) in fs.iter().zip(&cases) {
        for s in rows {
            let c = constant(cfg.rho, s.q);
            table.push(vec![json!(item.meta.index), json!(s.q), json!(s.lhs), json!(s.rhs), json!(s.fubini), json!(s.lhs / s.rhs), json!(c * (1.0 + slack))]);
        }
    }
    report.tables.push(table);
    for (j, &q) in cfg.q_list.iter().enumerate() {
        let c = constant(cfg.rho, q);
        let bound = c * (1.0 + slack);
        report.value(&format!("constant_q{q}"), c);
        let rows: Vec<&Sides> = cases.iter().map(|r| &r[j]).collect();
        let failures = rows.iter().filter(|s| !(s.lhs <= bound * s.rhs)).count();
        let worst = rows.iter().map(|s| s.lhs / s.rhs).filter(|r| r.is_finite()).fold(0.0, f64::max);
        report.band(&format!("ratio_q{q}"), rows.iter().map(|s| s.lhs / s.rhs).filter(|r| r.is_finite()));
        report.check(
            &format!("duality_q{q}"),
            failures == 0,
            format!("{} cases, worst lhs/rhs = {worst:.4} vs bound {bound:.3} (C = {c:.3})", rows.len()),
            Some(bound),
        );
        let chain = rows.iter().filter(|s| !(s.lhs <= s.fubini * (1.0 + cfg.tolerances.fubini))).count();
        report.check(
            &format!("fubini_step_q{q}"),
            chain == 0,
            format!("{chain} cases with lhs above the stopped-cone integral"),
            Some(cfg.tolerances.fubini),
        );
    }

    // G = 0 and the scalar F = G case
    let f0 = setup.resolve(&fs.first().map(|c| c.function.clone()).unwrap_or_else(|| tentspace::SampledFunction::zeros(setup.grid, space)))?;
    let zero = HalfSpaceField::zeros(setup.grid, setup.scales, space.dual());
    let z = sides(cfg, &f0, &zero)?;
    report.check("zero_partner", z.iter().all(|s| s.lhs == 0.0 && s.rhs == 0.0), format!("lhs = {}, rhs = {}", z[0].lhs, z[0].rhs), None);
    if let Some(item) = fs.first() {
        let scalar = item.function.clone();
        let scalar = tentspace::SampledFunction::new(scalar.grid, BanachSpaceDesc::scalar(), scalar.component(0))?;
        let fsc = setup.resolve(&scalar)?;
        let s = sides(cfg, &fsc, &fsc)?;
        for r in &s {
            report.value(&format!("scalar_self_ratio_q{}", r.q), r.lhs / r.rhs);
        }
        let ok = s.iter().all(|r| r.lhs <= constant(cfg.rho, r.q) * (1.0 + slack) * r.rhs);
        report.check("scalar_self_pair", ok, format!("lhs/rhs = {:.4}", s[0].lhs / s[0].rhs), Some(slack));
    }
    Ok(report)
}
