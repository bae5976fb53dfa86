//! Cyclic FFTs on the spatial grid and its frequency lattice.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::SpatialGrid;
use crate::scalar::{from_usize, Real};

/// Angular frequency `ξ_m = 2π m / L` of lattice index `i`, with `m ∈ [-N/2, N/2)` per axis.
pub fn lattice_frequency(grid: &SpatialGrid, i: usize) -> [f64; 2] {
    let c = grid.coords(i);
    let n = grid.n as isize;
    let w = |m: usize| {
        let m = m as isize;
        let m = if m >= n / 2 { m - n } else { m };
        2.0 * std::f64::consts::PI * m as f64 / grid.period
    };
    if grid.dim == 1 {
        [w(c[0]), 0.0]
    } else {
        [w(c[0]), w(c[1])]
    }
}

/// Forward and inverse plans for one grid. The inverse is normalised so that
/// `inverse(forward(x)) = x`.
#[derive(Clone)]
pub struct FourierPlan<T: Real> {
    grid: SpatialGrid,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> FourierPlan<T> {
    pub fn new(grid: &SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn run(&self, plan: &Arc<dyn Fft<T>>, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.grid.len());
        plan.process(data);
        if self.grid.dim == 2 {
            let n = self.grid.n;
            transpose(data, n);
            plan.process(data);
            transpose(data, n);
        }
    }

    /// Unnormalised DFT, `X_m = Σ_j x_j e^{-i ξ_m y_j}`.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(&self.fwd, data);
    }

    /// Inverse DFT including the `1/N^n` factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(&self.inv, data);
        let s = T::one() / from_usize::<T>(data.len());
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

fn transpose<T: Copy>(data: &mut [T], n: usize) {
    for r in 0..n {
        for c in r + 1..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}
