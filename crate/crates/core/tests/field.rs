use proptest::prelude::*;
use tentspace::field::{box_region, cone_region, cone_region_at, torus_dist, Region};
use tentspace::{Ball, ScaleGrid, SpatialGrid};

/// Distance by explicit minimisation over the 3^n neighbouring shifts.
fn shift_dist(l: f64, x: &[f64], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    let shifts: Vec<Vec<f64>> = if x.len() == 1 {
        (-1..=1).map(|a| vec![a as f64 * l]).collect()
    } else {
        (-1..=1).flat_map(|a| (-1..=1).map(move |b| vec![a as f64 * l, b as f64 * l])).collect()
    };
    for s in shifts {
        let d: f64 = x.iter().zip(y).zip(&s).map(|((a, b), s)| (b + s - a).powi(2)).sum();
        best = best.min(d.sqrt());
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn torus_distance_is_a_metric(pts in prop::collection::vec(0.0..1.0f64, 6)) {
        let g = SpatialGrid::new(2, 16, 1.0).unwrap();
        let (a, b, c) = (&pts[0..2], &pts[2..4], &pts[4..6]);
        let ab = torus_dist(&g, a, b);
        prop_assert!((ab - torus_dist(&g, b, a)).abs() < 1e-15);
        prop_assert!((ab - shift_dist(1.0, a, b)).abs() < 1e-12);
        prop_assert!(torus_dist(&g, a, c) <= ab + torus_dist(&g, b, c) + 1e-12);
    }

    #[test]
    fn cone_weights_monotone(a1 in 0.1..3.0f64, a2 in 0.1..3.0f64, h1 in 0.01..0.4f64, h2 in 0.01..0.4f64, x in 0.0..1.0f64) {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let s = ScaleGrid::new(0.02, 0.25, 9).unwrap();
        let (al, ah) = (a1.min(a2), a1.max(a2));
        let (hl, hh) = (h1.min(h2), h1.max(h2));
        let small: Region<f64> = cone_region(&g, &s, &[x], al, Some(hl));
        let big: Region<f64> = cone_region(&g, &s, &[x], ah, Some(hh));
        prop_assert!(small.is_subset_of(&big));
        prop_assert!(small.measure() <= big.measure());
    }

    #[test]
    fn cone_masks_translate(x in 0usize..256, v0 in -20isize..20, v1 in -20isize..20, alpha in 0.3..2.0f64) {
        let g = SpatialGrid::new(2, 16, 1.0).unwrap();
        let s = ScaleGrid::new(0.07, 0.25, 5).unwrap();
        let a: Region<f64> = cone_region_at(&g, &s, x, alpha, None);
        let b: Region<f64> = cone_region_at(&g, &s, g.offset(x, [v0, v1]), alpha, None);
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.atoms.iter().zip(&b.atoms) {
            prop_assert_eq!(g.offset(p.i, [v0, v1]), q.i);
            prop_assert_eq!(p.k, q.k);
            prop_assert_eq!(p.weight, q.weight);
        }
    }

    #[test]
    fn box_sum_identity(c in 0.0..1.0f64, j in 2u32..6) {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let s = ScaleGrid::new(0.01, 0.25, 12).unwrap();
        let ball = Ball::new(&g, [c, 0.0], 1.0 / (1u32 << j) as f64).unwrap();
        let r: Region<f64> = box_region(&g, &s, &ball);
        let pts = g.ball_points(&ball).len() as f64;
        let lv = s.nodes().iter().filter(|&&t| t < ball.radius).count() as f64;
        let want = pts * g.cell_measure() * lv * s.dlog();
        prop_assert!((r.measure() - want).abs() <= 1e-13 * want.max(1e-300));
    }
}

/// `∬_{|y|<t, t_0<t<1} dy dt/t^{n+1}` from an independent 2-D quadrature at
/// four times the resolution, compared with the region measure.
#[test]
fn cone_measure_matches_fine_quadrature() {
    for dim in [1usize, 2] {
        let n = if dim == 1 { 1024 } else { 128 };
        let g = SpatialGrid::new(dim, n, 8.0).unwrap();
        let s = ScaleGrid::new(0.25, 2.0, 64).unwrap();
        let r: Region<f64> = cone_region(&g, &s, &[0.0, 0.0], 1.0, Some(1.0));
        let levels = s.cone_levels(Some(1.0));
        let (lo, hi) = (s.node(0).ln() - s.dlog() / 2.0, s.node(levels - 1).ln() + s.dlog() / 2.0);
        // fine oracle: 4× finer in y and in log t, ball volume counted by cells
        let fine = 4 * n;
        let dy = 8.0 / fine as f64;
        let m = 4 * levels;
        let hs = (hi - lo) / m as f64;
        let mut total = 0.0;
        for j in 0..m {
            let t = (lo + (j as f64 + 0.5) * hs).exp();
            let half = (t / dy).ceil() as i64 + 1;
            let mut count = 0usize;
            if dim == 1 {
                count = (-half..=half).filter(|&a| (a as f64 * dy).abs() < t).count();
            } else {
                for a in -half..=half {
                    for b in -half..=half {
                        if ((a * a + b * b) as f64).sqrt() * dy < t {
                            count += 1;
                        }
                    }
                }
            }
            total += count as f64 * dy.powi(dim as i32) * hs / t.powi(dim as i32);
        }
        assert!((r.measure() / total - 1.0).abs() < 0.01, "n={dim}: {} vs {total}", r.measure());
    }
}

#[test]
fn full_radius_box_covers_half_the_line() {
    let g = SpatialGrid::line(128, 1.0).unwrap();
    let s = ScaleGrid::new(0.01, 0.25, 8).unwrap();
    let ball = Ball::new(&g, [0.0, 0.0], 0.25).unwrap();
    let r: Region<f64> = box_region(&g, &s, &ball);
    let ys: std::collections::BTreeSet<usize> = r.atoms.iter().map(|a| a.i).collect();
    assert_eq!(ys.len(), 63);
    assert!(r.atoms.iter().all(|a| a.weight > 0.0));
}
