use num_complex::Complex;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use tentspace::field::{cone_region, HalfSpaceField, Region};
use tentspace::gaussnorm::{duality_defect, gauss_norm, unimodular_invariance_defect, GaussConfig, McMethod};
use tentspace::space::complex_gaussian;
use tentspace::{BanachSpaceDesc, RandomSource, ScaleGrid, SpatialGrid};

type C = Complex<f64>;

fn grids() -> (SpatialGrid, ScaleGrid) {
    (SpatialGrid::line(32, 1.0).unwrap(), ScaleGrid::new(0.05, 0.25, 6).unwrap())
}

fn random_field(space: BanachSpaceDesc, seed: u64) -> HalfSpaceField<f64> {
    let (g, s) = grids();
    let mut r = RandomSource::new(seed).rng();
    HalfSpaceField::from_fn(g, s, space, |_, _, _| complex_gaussian(&mut r))
}

fn phases(seed: u64) -> HalfSpaceField<f64> {
    let (g, s) = grids();
    let mut r = RandomSource::new(seed).rng();
    HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |_, _, _| {
        C::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU))
    })
}

fn cone(x: f64, alpha: f64) -> Region<f64> {
    let (g, s) = grids();
    cone_region(&g, &s, &[x], alpha, None)
}

/// Weighted `L²(dμ)` norm summed directly over the region atoms.
fn l2_oracle(h: &HalfSpaceField<f64>, r: &Region<f64>) -> f64 {
    r.atoms.iter().map(|a| a.weight * h.value(a.i, a.k)[0].norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn rank_one_field() {
    let space = BanachSpaceDesc::ell(1.0, 3).unwrap();
    let xi = [C::new(1.0, -0.5), C::new(0.0, 2.0), C::new(-0.3, 0.0)];
    let h = random_field(BanachSpaceDesc::scalar(), 41);
    let (g, s) = grids();
    let f = HalfSpaceField::from_fn(g, s, space, |i, k, c| h.value(i, k)[0] * xi[c]);
    let r = cone(0.3, 1.5);
    let want = l2_oracle(&h, &r) * space.norm_of(&xi);
    for method in [McMethod::Atoms, McMethod::Covariance] {
        let est = gauss_norm(&f, &r, &GaussConfig { method, ..GaussConfig::with_seed(7) }).unwrap();
        assert!((est.value - want).abs() <= 3.0 * est.stderr, "{method:?}: {} ± {} vs {want}", est.value, est.stderr);
    }
}

#[test]
fn forced_monte_carlo_matches_hilbert_value() {
    let space = BanachSpaceDesc::hilbert(3);
    let mut misses = 0;
    for case in 0..100u64 {
        let f = random_field(space, 1000 + case);
        let r = cone((case as f64 * 0.37) % 1.0, 1.0);
        let exact = gauss_norm(&f, &r, &GaussConfig::default()).unwrap();
        assert!(exact.exact && exact.stderr == 0.0);
        let cfg = GaussConfig { force_mc: true, ..GaussConfig::with_seed(case) };
        let mc = gauss_norm(&f, &r, &cfg).unwrap();
        if (mc.value - exact.value).abs() > 3.0 * mc.stderr {
            misses += 1;
        }
    }
    assert_eq!(misses, 0);
}

#[test]
fn ell1_ellinf_duality_over_fifty_pairs() {
    let x = BanachSpaceDesc::ell(1.0, 2).unwrap();
    for case in 0..50u64 {
        let f = random_field(x, 2 * case);
        let g = random_field(x.dual(), 2 * case + 1);
        let r = cone(0.5, 1.0 + (case % 3) as f64);
        let d = duality_defect(&f, &g, &r, &GaussConfig::with_seed(case)).unwrap();
        assert!(d.value <= 3.0 * d.stderr, "case {case}: {} ({})", d.value, d.stderr);
    }
}

#[test]
fn unimodular_invariance() {
    let l1 = BanachSpaceDesc::ell(1.0, 3).unwrap();
    for case in 0..20u64 {
        let f = random_field(l1, 300 + case);
        let d = unimodular_invariance_defect(&f, &cone(0.1, 1.0), &phases(case), &GaussConfig::with_seed(case)).unwrap();
        assert!(d.value <= 3.0 * d.stderr, "case {case}: {} ({})", d.value, d.stderr);
    }
    let f = random_field(BanachSpaceDesc::hilbert(2), 5);
    let d = unimodular_invariance_defect(&f, &cone(0.1, 1.0), &phases(9), &GaussConfig::default()).unwrap();
    assert!(d.value < 1e-12 && d.stderr == 0.0);
}

#[test]
fn multiplier_contraction() {
    let (g, s) = grids();
    for space in [BanachSpaceDesc::hilbert(2), BanachSpaceDesc::ell(1.0, 2).unwrap(), BanachSpaceDesc::ell_inf(3).unwrap()] {
        for case in 0..5u64 {
            let f = random_field(space, 70 + case);
            let mut r = RandomSource::new(case).rng();
            let m = HalfSpaceField::from_fn(g, s, BanachSpaceDesc::scalar(), |_, _, _| {
                C::from_polar(r.random_range(0.0..1.0), r.random_range(0.0..std::f64::consts::TAU))
            });
            let reg = cone(0.6, 2.0);
            let cfg = GaussConfig::with_seed(case);
            let a = gauss_norm(&f.multiplied_by(&m).unwrap(), &reg, &cfg).unwrap();
            let b = gauss_norm(&f, &reg, &cfg).unwrap();
            assert!(a.value <= b.value + 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
        }
    }
}

#[test]
fn atom_order_does_not_matter() {
    for space in [BanachSpaceDesc::hilbert(3), BanachSpaceDesc::ell(3.0, 3).unwrap()] {
        let f = random_field(space, 8);
        let r = cone(0.25, 2.0);
        let mut shuffled = r.clone();
        shuffled.atoms.shuffle(&mut RandomSource::new(1).rng());
        assert_ne!(shuffled.atoms, r.atoms);
        for method in [McMethod::Atoms, McMethod::Covariance] {
            let cfg = GaussConfig { method, trials: 300, ..GaussConfig::with_seed(4) };
            let a = gauss_norm(&f, &r, &cfg).unwrap();
            let b = gauss_norm(&f, &shuffled, &cfg).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn homogeneity(seed in any::<u64>(), re in -4.0..4.0f64, im in -4.0..4.0f64, q in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]) {
        let space = BanachSpaceDesc::new(2, tentspace::Exponent::from_f64(q).unwrap()).unwrap();
        let f = random_field(space, seed);
        let c = C::new(re, im);
        let r = cone(0.7, 1.0);
        let cfg = GaussConfig { trials: 200, ..GaussConfig::with_seed(seed) };
        let a = gauss_norm(&f.scaled(c), &r, &cfg).unwrap();
        let b = gauss_norm(&f, &r, &cfg).unwrap();
        let tol = if a.exact { 1e-12 * b.value * c.norm() } else { 3.0 * a.stderr.max(1e-12) };
        prop_assert!((a.value - c.norm() * b.value).abs() <= tol + 1e-14);
    }

    #[test]
    fn hilbert_value_monotone_in_region(seed in any::<u64>(), a1 in 0.2..3.0f64, a2 in 0.2..3.0f64, x in 0.0..1.0f64) {
        let f = random_field(BanachSpaceDesc::hilbert(2), seed);
        let small = cone(x, a1.min(a2));
        let big = cone(x, a1.max(a2));
        let cfg = GaussConfig::default();
        prop_assert!(gauss_norm(&f, &small, &cfg).unwrap().value <= gauss_norm(&f, &big, &cfg).unwrap().value);
    }
}

#[test]
fn rejects_regions_outside_the_field() {
    let f = random_field(BanachSpaceDesc::hilbert(2), 1);
    let (g, _) = grids();
    let wide = ScaleGrid::new(0.05, 0.25, 9).unwrap();
    let r: Region<f64> = cone_region(&g, &wide, &[0.5], 1.0, None);
    assert!(gauss_norm(&f, &r, &GaussConfig::default()).is_err());
}
