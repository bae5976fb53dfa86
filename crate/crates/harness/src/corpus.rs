//! Reproducible test inputs.
//!
//! Members are defined by formulas in the continuous variable `x ∈ [0, L)^n`,
//! so the same seed gives the same function at every resolution.

use std::f64::consts::TAU;

use anyhow::Result;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use tentspace::field::torus_dist;
use tentspace::space::complex_gaussian;
use tentspace::{BanachSpaceDesc, RandomSource, SampledFunction, SpatialGrid};

use crate::config::{CorpusSpec, Family, Mixing};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub family: Family,
    pub index: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub meta: CorpusMeta,
    pub function: SampledFunction,
}

type Scalar = Box<dyn Fn(&[f64; 2]) -> Complex64 + Send + Sync>;

fn scalar_draw(spec: &CorpusSpec, grid: &SpatialGrid, rng: &RandomSource) -> Scalar {
    let mut r = rng.rng();
    let l = grid.period;
    let dim = grid.dim;
    match spec.family {
        Family::BmoLog => {
            let x0 = [r.random_range(0.0..l), if dim == 2 { r.random_range(0.0..l) } else { 0.0 }];
            let g = *grid;
            let floor = grid.spacing() / 2.0;
            Box::new(move |p| {
                let d = torus_dist(&g, &p[..dim], &x0[..dim]).max(floor);
                Complex64::new((l / d).ln(), 0.0)
            })
        }
        Family::BmoStep => {
            let boxes: Vec<(f64, f64)> = (0..dim).map(|_| (r.random_range(0.0..l), r.random_range(l / 8.0..l / 2.0))).collect();
            Box::new(move |p| {
                let inside = boxes.iter().enumerate().all(|(a, &(lo, w))| (p[a] - lo).rem_euclid(l) < w);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
        }
        Family::Lacunary => {
            let mut terms = Vec::new();
            let mut f = 1usize;
            while f <= spec.band {
                terms.push((f as f64, Complex64::from_polar(1.0, r.random_range(0.0..TAU))));
                f *= 2;
            }
            Box::new(move |p| {
                let s = if dim == 2 { p[0] + p[1] } else { p[0] };
                terms.iter().map(|&(f, a)| a * Complex64::from_polar(1.0, TAU * f * s / l)).sum()
            })
        }
        Family::BandlimitedRandom => {
            let b = spec.band as i64;
            let modes: Vec<[i64; 2]> = if dim == 1 {
                (-b..=b).map(|m| [m, 0]).collect()
            } else {
                (-b..=b).flat_map(|m| (-b..=b).map(move |k| [m, k])).collect()
            };
            let norm = 1.0 / (modes.len() as f64).sqrt();
            let coeffs: Vec<Complex64> = modes.iter().map(|_| complex_gaussian::<f64, _>(&mut r) * norm).collect();
            Box::new(move |p| {
                modes
                    .iter()
                    .zip(&coeffs)
                    .map(|(m, c)| c * Complex64::from_polar(1.0, TAU * (m[0] as f64 * p[0] + m[1] as f64 * p[1]) / l))
                    .sum()
            })
        }
        Family::LpRandom => {
            let cells = spec.cells;
            let vals: Vec<Complex64> = (0..cells.pow(dim as u32)).map(|_| complex_gaussian(&mut r)).collect();
            Box::new(move |p| {
                let idx = |a: usize| ((p[a] / l * cells as f64) as usize).min(cells - 1);
                let i = if dim == 2 { idx(0) * cells + idx(1) } else { idx(0) };
                vals[i]
            })
        }
    }
}

/// `count` members of the family over `space`, reproducible from `rng`.
pub fn generate_corpus(spec: &CorpusSpec, grid: &SpatialGrid, space: &BanachSpaceDesc, rng: &RandomSource) -> Result<Vec<CorpusItem>> {
    let d = space.dim;
    (0..spec.count)
        .map(|j| {
            let member = rng.derive(j as u64);
            let mut r = member.derive(u64::MAX).rng();
            let amplitude = if spec.spread > 1.0 {
                spec.amplitude * spec.spread.powf(r.random_range(-1.0..=1.0))
            } else {
                spec.amplitude
            };
            let draws: Vec<Scalar> = match spec.mixing {
                Mixing::RankOne => vec![scalar_draw(spec, grid, &member.derive(0))],
                _ => (0..d).map(|c| scalar_draw(spec, grid, &member.derive(c as u64))).collect(),
            };
            let mix: Vec<Complex64> = match spec.mixing {
                Mixing::Independent => (0..d * d).map(|i| Complex64::new(if i % (d + 1) == 0 { 1.0 } else { 0.0 }, 0.0)).collect(),
                Mixing::RankOne => (0..d).map(|_| complex_gaussian(&mut r)).collect(),
                Mixing::Mixed => {
                    let s = 1.0 / (d as f64).sqrt();
                    (0..d * d).map(|_| complex_gaussian::<f64, _>(&mut r) * s).collect()
                }
            };
            let function = SampledFunction::from_fn(*grid, *space, |p, c| {
                let v = match spec.mixing {
                    Mixing::RankOne => draws[0](&p) * mix[c],
                    _ => (0..d).map(|j| mix[c * d + j] * draws[j](&p)).sum(),
                };
                v * amplitude
            });
            Ok(CorpusItem {
                meta: CorpusMeta {
                    family: spec.family,
                    index: j,
                    amplitude,
                },
                function,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tentspace::functionals::bmo_norm;

    fn spec(family: Family, count: usize) -> CorpusSpec {
        CorpusSpec {
            family,
            count,
            ..CorpusSpec::default()
        }
    }

    #[test]
    fn empty_and_reproducible() {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let x = BanachSpaceDesc::ell(1.0, 3).unwrap();
        assert!(generate_corpus(&spec(Family::Lacunary, 0), &g, &x, &RandomSource::new(1)).unwrap().is_empty());
        for fam in [Family::BmoLog, Family::BmoStep, Family::Lacunary, Family::BandlimitedRandom, Family::LpRandom] {
            for mixing in [Mixing::Independent, Mixing::RankOne, Mixing::Mixed] {
                let s = CorpusSpec { mixing, spread: 2.0, ..spec(fam, 3) };
                let a = generate_corpus(&s, &g, &x, &RandomSource::new(7)).unwrap();
                let b = generate_corpus(&s, &g, &x, &RandomSource::new(7)).unwrap();
                for (p, q) in a.iter().zip(&b) {
                    assert_eq!(p.meta, q.meta);
                    let bits = |f: &SampledFunction| f.values.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>();
                    assert_eq!(bits(&p.function), bits(&q.function));
                }
            }
        }
    }

    #[test]
    fn resolution_consistent() {
        let s = spec(Family::LpRandom, 2);
        let x = BanachSpaceDesc::scalar();
        let a = generate_corpus(&s, &SpatialGrid::line(128, 1.0).unwrap(), &x, &RandomSource::new(3)).unwrap();
        let b = generate_corpus(&s, &SpatialGrid::line(256, 1.0).unwrap(), &x, &RandomSource::new(3)).unwrap();
        for i in 0..128 {
            assert_eq!(a[1].function.values[i], b[1].function.values[2 * i]);
        }
    }

    #[test]
    fn bmo_log_is_finite_and_positive() {
        let g = SpatialGrid::line(512, 1.0).unwrap();
        let c = generate_corpus(&spec(Family::BmoLog, 3), &g, &BanachSpaceDesc::scalar(), &RandomSource::new(2)).unwrap();
        for item in &c {
            let b = bmo_norm(&item.function);
            assert!(b > 0.0 && b.is_finite());
        }
    }

    #[test]
    fn lacunary_has_unit_coefficients() {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let c = generate_corpus(&spec(Family::Lacunary, 1), &g, &BanachSpaceDesc::scalar(), &RandomSource::new(2)).unwrap();
        // five terms of modulus one: mean of |f|² over the torus is 5
        let ms = c[0].function.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        assert!((ms - 5.0).abs() < 1e-12);
    }
}
