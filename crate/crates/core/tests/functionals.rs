use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use tentspace::calderon::TestFunction;
use tentspace::field::{cone_region_at, HalfSpaceField, Region, SampledFunction};
use tentspace::functionals::{
    a_fun, bmo_norm, bmo_profile, c_fun, c_fun_from, carleson_box_sup, maximal_fn, maximal_of_values, n_fun,
    ConeFunctional,
};
use tentspace::gaussnorm::GaussConfig;
use tentspace::paraproduct::convolve;
use tentspace::space::complex_gaussian;
use tentspace::{BanachSpaceDesc, RandomSource, ScaleGrid, SpatialGrid};

type C = Complex<f64>;

fn line() -> (SpatialGrid, ScaleGrid) {
    (SpatialGrid::line(64, 1.0).unwrap(), ScaleGrid::new(1.5 / 64.0, 0.25, 10).unwrap())
}

fn random_field(g: SpatialGrid, s: ScaleGrid, space: BanachSpaceDesc, seed: u64) -> HalfSpaceField<f64> {
    let mut r = RandomSource::new(seed).rng();
    HalfSpaceField::from_fn(g, s, space, |_, _, _| complex_gaussian(&mut r))
}

fn random_function(g: SpatialGrid, seed: u64) -> SampledFunction<f64> {
    let mut r = RandomSource::new(seed).rng();
    SampledFunction::from_fn(g, BanachSpaceDesc::scalar(), |_, _| complex_gaussian(&mut r))
}

#[test]
fn scalar_area_function_is_conical_quadrature() {
    let (g, s) = line();
    let f = random_field(g, s, BanachSpaceDesc::scalar(), 1);
    for (alpha, h) in [(1.0, None), (0.5, Some(0.1)), (2.0, Some(0.03))] {
        let prof = a_fun(&f, alpha, h, &GaussConfig::default()).unwrap();
        assert!(prof.is_exact());
        for x in 0..g.len() {
            let r: Region<f64> = cone_region_at(&g, &s, x, alpha, h);
            let want: f64 = r.atoms.iter().map(|a| a.weight * f.value(a.i, a.k)[0].norm_sqr()).sum();
            assert!((prof.values[x].powi(2) - want).abs() <= 1e-12 * want);
        }
    }
    let z = HalfSpaceField::<f64>::zeros(g, s, BanachSpaceDesc::hilbert(2));
    assert!(a_fun(&z, 1.0, None, &GaussConfig::default()).unwrap().values.iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn area_function_monotone(seed in any::<u64>(), a1 in 0.2..3.0f64, a2 in 0.2..3.0f64, h1 in 0.01..0.3f64, h2 in 0.01..0.3f64) {
        let (g, s) = line();
        let f = random_field(g, s, BanachSpaceDesc::hilbert(2), seed);
        let cfg = GaussConfig::default();
        let lo = a_fun(&f, a1.min(a2), Some(h1.min(h2)), &cfg).unwrap();
        let hi = a_fun(&f, a1.max(a2), Some(h1.max(h2)), &cfg).unwrap();
        for (a, b) in lo.values.iter().zip(&hi.values) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn functionals_are_translation_equivariant(seed in any::<u64>(), v0 in -9isize..9, v1 in -9isize..9) {
        let g = SpatialGrid::new(2, 16, 1.0).unwrap();
        let s = ScaleGrid::new(1.5 / 16.0, 0.25, 5).unwrap();
        let f = random_field(g, s, BanachSpaceDesc::hilbert(2), seed);
        let sf = f.shifted([v0, v1]);
        let cfg = GaussConfig::default();
        let at = |i: usize| g.offset(i, [v0, v1]);
        let (a, b) = (a_fun(&f, 1.0, None, &cfg).unwrap(), a_fun(&sf, 1.0, None, &cfg).unwrap());
        let (c, d) = (c_fun(&f, 2.0, 1.0, &cfg).unwrap(), c_fun(&sf, 2.0, 1.0, &cfg).unwrap());
        let sc = random_field(g, s, BanachSpaceDesc::scalar(), seed ^ 1);
        let (n, m) = (n_fun(&sc, 1.0).unwrap(), n_fun(&sc.shifted([v0, v1]), 1.0).unwrap());
        let u = random_function(g, seed);
        let (p, q) = (maximal_fn(&u).unwrap(), maximal_fn(&u.shifted([v0, v1])).unwrap());
        let (o, w) = (bmo_profile(&u), bmo_profile(&u.shifted([v0, v1])));
        for i in 0..g.len() {
            prop_assert_eq!(a.values[i], b.values[at(i)]);
            prop_assert_eq!(c.values[i], d.values[at(i)]);
            prop_assert_eq!(n.values[i], m.values[at(i)]);
            prop_assert_eq!(p.values[i], q.values[at(i)]);
            prop_assert_eq!(o.values[i], w.values[at(i)]);
        }
        prop_assert_eq!(bmo_norm(&u), bmo_norm(&u.shifted([v0, v1])));
    }
}

#[test]
fn carleson_functional_monotone_in_q_and_dominated() {
    let (g, s) = line();
    for space in [BanachSpaceDesc::hilbert(2), BanachSpaceDesc::ell(1.0, 2).unwrap()] {
        let f = random_field(g, s, space, 5);
        let cfg = GaussConfig { trials: 400, method: tentspace::McMethod::Covariance, ..GaussConfig::with_seed(3) };
        let cone = ConeFunctional::new(&f, 1.0, &cfg).unwrap();
        let qs = [0.5, 1.0, 2.0, 3.0];
        let profs: Vec<_> = qs.iter().map(|&q| c_fun_from(&cone, q).unwrap()).collect();
        for w in profs.windows(2) {
            for x in 0..g.len() {
                // common draws make the MC values pathwise monotone as well
                assert!(w[0].values[x] <= w[1].values[x] + 1e-12);
            }
        }
        let (amax, _) = cone.sweep(Some(s.t_max));
        for (q, prof) in qs.iter().zip(&profs) {
            let pow: Vec<f64> = amax.iter().map(|a| a.powf(*q)).collect();
            let m = maximal_of_values(&g, &pow);
            for x in 0..g.len() {
                assert!(prof.values[x] <= m.values[x].powf(1.0 / q) + 1e-12);
            }
        }
    }
    let z = HalfSpaceField::<f64>::zeros(g, s, BanachSpaceDesc::scalar());
    assert_eq!(c_fun(&z, 2.0, 1.0, &GaussConfig::default()).unwrap().sup(), 0.0);
}

/// `sup C₂(F)²` against the Carleson box sup. For `n = 1`, `α = 1` the
/// continuum comparison gives the band `[α, 2α(1 + α)] = [1, 4]`; the grid
/// discretisation is allowed a factor 2 either way.
#[test]
fn carleson_cylinders_band() {
    let (g, s) = (SpatialGrid::line(128, 1.0).unwrap(), ScaleGrid::new(1.5 / 128.0, 0.25, 16).unwrap());
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = RandomSource::new(seed).rng();
        let amp: Vec<f64> = (0..s.count).map(|_| r.random_range(0.0..2.0)).collect();
        let f = HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |i, k, _| {
            let bump = if (i as f64 / 128.0 - 0.3).abs() < 0.1 { 3.0 } else { 1.0 };
            complex_gaussian::<f64, _>(&mut r) * amp[k] * bump
        });
        let c2 = c_fun(&f, 2.0, 1.0, &GaussConfig::default()).unwrap().sup().powi(2);
        let ratio = c2 / carleson_box_sup(&f);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    println!("C2^2 / box sup in [{lo:.3}, {hi:.3}]");
    assert!(lo >= 0.5 && hi <= 8.0, "[{lo}, {hi}]");
}

#[test]
fn nontangential_examples() {
    let (g, s) = line();
    let c = HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |_, _, _| C::new(0.0, -2.5));
    assert!(n_fun(&c, 1.0).unwrap().values.iter().all(|&v| v == 2.5));
    let (y0, k0) = (20usize, 4usize);
    let one = HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |i, k, _| {
        C::new(if i == y0 && k == k0 { 1.0 } else { 0.0 }, 0.0)
    });
    for alpha in [0.5, 1.0, 2.0] {
        let prof = n_fun(&one, alpha).unwrap();
        for x in 0..g.len() {
            let inside = g.index_dist(x, y0) < alpha * s.node(k0);
            assert_eq!(prof.values[x], if inside { 1.0 } else { 0.0 });
        }
    }
    assert!(n_fun(&random_field(g, s, BanachSpaceDesc::hilbert(2), 1), 1.0).is_err());
}

#[test]
fn nontangential_is_lower_semicontinuous_under_refinement() {
    for seed in 0..5u64 {
        let (g, s) = line();
        let f = random_field(g, s, BanachSpaceDesc::scalar(), seed);
        let coarse = n_fun(&f, 1.0).unwrap();
        let fine = n_fun(&f.refined_spatially().unwrap(), 1.0).unwrap();
        for x in 0..g.len() {
            assert!(fine.values[2 * x] >= coarse.values[x] - 1e-12);
        }
    }
}

/// With `Φ(w) = sup_{|v|<α} φ(w − v)` radial decreasing, `|u*φ_t(y)| ≤ ‖Φ‖₁ M u(x)`
/// for `|y − x| < αt`; `‖Φ‖₁ = 2αφ(0) + 1` for the unit Gaussian. Dyadic radii
/// lose at most a factor 2 more, so `c = 2(2αφ(0) + 1)`.
#[test]
fn nontangential_dominated_by_maximal_function() {
    let g = SpatialGrid::line(256, 1.0).unwrap();
    let s = ScaleGrid::new(3.0 / 256.0, 1.0 / 32.0, 8).unwrap();
    let phi = TestFunction::gauss_bump(1).unwrap();
    let alpha = 1.0;
    let c = 2.0 * (2.0 * alpha / (2.0 * std::f64::consts::PI).sqrt() + 1.0);
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let u = random_function(g, seed);
        let slices: Vec<SampledFunction<f64>> = (0..s.count).map(|k| convolve(&u, &phi, s.node(k)).unwrap()).collect();
        let big = HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |i, k, _| slices[k].values[i]);
        let n = n_fun(&big, alpha).unwrap();
        let m = maximal_fn(&u).unwrap();
        for x in 0..g.len() {
            worst = worst.max(n.values[x] / m.values[x]);
        }
    }
    println!("max N(U)/M(u) = {worst:.3}, bound {c:.3}");
    assert!(worst <= c);
}

#[test]
fn bmo_examples() {
    let g = SpatialGrid::line(64, 1.0).unwrap();
    let k = SampledFunction::constant(g, BanachSpaceDesc::ell(3.0, 2).unwrap(), &[C::new(1.0, 2.0), C::new(-1.0, 0.0)]).unwrap();
    assert_eq!(bmo_norm(&k), 0.0);
    let step = SampledFunction::from_fn(g, BanachSpaceDesc::scalar(), |p, _| C::new(if p[0] < 0.5 { 1.0 } else { 0.0 }, 0.0));
    // every grid-centred ball B(c, jΔy), j ≤ N/4
    let mut brute: f64 = 0.0;
    for c in 0..64usize {
        for j in 1..=16usize {
            let pts: Vec<usize> = (0..64).filter(|&y| g.index_dist(c, y) < j as f64 / 64.0).collect();
            let mean = pts.iter().map(|&y| step.values[y].re).sum::<f64>() / pts.len() as f64;
            let osc = pts.iter().map(|&y| (step.values[y].re - mean).abs()).sum::<f64>() / pts.len() as f64;
            brute = brute.max(osc);
        }
    }
    assert!((bmo_norm(&step) - brute).abs() < 1e-15, "{} vs {brute}", bmo_norm(&step));
}

#[test]
fn maximal_function_examples() {
    let g = SpatialGrid::new(2, 16, 1.0).unwrap();
    let k = SampledFunction::constant(g, BanachSpaceDesc::scalar(), &[C::new(0.0, 3.0)]).unwrap();
    assert!(maximal_fn(&k).unwrap().values.iter().all(|&v| (v - 3.0).abs() < 1e-14));
    let u = random_function(g, 2);
    let m = maximal_fn(&u).unwrap();
    for x in 0..g.len() {
        assert!(m.values[x] >= u.values[x].norm());
    }
}

/// `‖Mg‖₂/‖g‖₂` for piecewise constant `g`, computed at `N` and `2N`.
#[test]
fn maximal_l2_constant_is_stable() {
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let g = SpatialGrid::line(128, 1.0).unwrap();
        let mut r = RandomSource::new(seed).rng();
        let cells: Vec<f64> = (0..16).map(|_| r.random_range(-1.0f64..1.0).powi(3)).collect();
        let mut c = Vec::new();
        for n in [g.n, 2 * g.n] {
            let grid = SpatialGrid::line(n, 1.0).unwrap();
            let u = SampledFunction::from_fn(grid, BanachSpaceDesc::scalar(), |p, _| C::new(cells[(p[0] * 16.0) as usize % 16], 0.0));
            let m = maximal_fn(&u).unwrap();
            let l2 = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / n as f64).sqrt();
            c.push(l2(&m.values) / l2(&u.values.iter().map(|z| z.norm()).collect::<Vec<_>>()));
        }
        ratios.push((c[0], c[1]));
    }
    let worst = ratios.iter().map(|(a, b)| (a - b).abs() / a).fold(0.0, f64::max);
    println!("C_2 at N, 2N: {ratios:?}");
    assert!(worst < 0.1, "{worst}");
}
