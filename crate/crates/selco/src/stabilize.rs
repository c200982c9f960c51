//! Numerical stabilization for the optimization: smooth Heaviside blending
//! between linear and nonlinear element models, and the density filter with
//! linear distance weighting.

use crate::fem::element::{ElementMatrix, ElementVector};
use crate::model::DesignSpace;

/// Parameters of the smoothed Heaviside used for energy interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    pub beta: f64,
    pub eta: f64,
}

impl Default for InterpolationParams {
    fn default() -> Self {
        InterpolationParams {
            beta: 500.0,
            eta: 0.01,
        }
    }
}

/// gamma = [tanh(beta eta) + tanh(beta (x - eta))] / [tanh(beta eta) + tanh(beta (1 - eta))]
///
/// Monotone in `x`; 0 at x = 0 and exactly 1 at x = 1.
pub fn heaviside_weight(x_e: f64, p: &InterpolationParams) -> f64 {
    let t0 = (p.beta * p.eta).tanh();
    (t0 + (p.beta * (x_e - p.eta)).tanh()) / (t0 + (p.beta * (1.0 - p.eta)).tanh())
}

/// Blends nonlinear and linear element contributions and scales by the
/// design variable: K = x (gamma K_NL + (1-gamma) K_L), same for f.
pub fn interpolate_element(
    x_e: f64,
    gamma: f64,
    k_nl: &ElementMatrix,
    k_l: &ElementMatrix,
    f_nl: &ElementVector,
    f_l: &ElementVector,
) -> (ElementMatrix, ElementVector) {
    let k = x_e * (gamma * k_nl + (1.0 - gamma) * k_l);
    let f = x_e * (gamma * f_nl + (1.0 - gamma) * f_l);
    (k, f)
}

/// Density filter: per-element neighbor lists with precomputed linear
/// weights w = R - |P_i - P_e| over element centroids.
#[derive(Debug, Clone)]
pub struct FilterKernel {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl FilterKernel {
    /// Builds the kernel for a regular grid; `radius` is in mm.
    /// Neighborhoods use strict inequality, so every weight is positive and
    /// each element always includes itself with the maximal weight R.
    pub fn new(space: &DesignSpace, radius: f64) -> Self {
        let m = space.n_elements();
        let dx = space.dx();
        let dy = space.dy();
        let span_x = (radius / dx).ceil() as isize;
        let span_y = (radius / dy).ceil() as isize;
        let mut neighbors = Vec::with_capacity(m);
        for e in 0..m {
            let (ex, ey) = space.element_grid_pos(e);
            let mut list = Vec::new();
            for oy in -span_y..=span_y {
                let iy = ey as isize + oy;
                if iy < 0 || iy >= space.nely as isize {
                    continue;
                }
                for ox in -span_x..=span_x {
                    let ix = ex as isize + ox;
                    if ix < 0 || ix >= space.nelx as isize {
                        continue;
                    }
                    let d = ((ox as f64 * dx).powi(2) + (oy as f64 * dy).powi(2)).sqrt();
                    if d < radius {
                        list.push((space.element_id(ix as usize, iy as usize), radius - d));
                    }
                }
            }
            neighbors.push(list);
        }
        FilterKernel { neighbors }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.neighbors.len());
        self.neighbors
            .iter()
            .map(|list| {
                let mut num = 0.0;
                let mut den = 0.0;
                for &(i, w) in list {
                    num += w * x[i];
                    den += w;
                }
                num / den
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> InterpolationParams {
        InterpolationParams::default()
    }

    #[test]
    fn heaviside_endpoint_values() {
        let p = params();
        assert_eq!(heaviside_weight(0.0, &p), 0.0);
        assert_eq!(heaviside_weight(1.0, &p), 1.0);
    }

    #[test]
    fn heaviside_threshold_value() {
        let p = params();
        let g = heaviside_weight(0.01, &p);
        assert!((g - 0.5).abs() < 1e-3, "gamma(eta) = {g}");
    }

    #[test]
    fn heaviside_monotone_on_grid() {
        let p = params();
        let mut prev = -1.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let g = heaviside_weight(x, &p);
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn interpolation_limits() {
        let k_nl = ElementMatrix::identity() * 3.0;
        let k_l = ElementMatrix::identity();
        let f_nl = ElementVector::repeat(2.0);
        let f_l = ElementVector::repeat(1.0);
        let (k, f) = interpolate_element(0.5, 1.0, &k_nl, &k_l, &f_nl, &f_l);
        assert!((k - 0.5 * k_nl).norm() < 1e-15);
        assert!((f - 0.5 * f_nl).norm() < 1e-15);
        let (k, f) = interpolate_element(0.5, 0.0, &k_nl, &k_l, &f_nl, &f_l);
        assert!((k - 0.5 * k_l).norm() < 1e-15);
        assert!((f - 0.5 * f_l).norm() < 1e-15);
    }

    #[test]
    fn solid_element_is_exactly_nonlinear() {
        // gamma(1) = 1 exactly, so x_e = 1 yields the pure nonlinear model.
        let p = params();
        assert_eq!(heaviside_weight(1.0, &p), 1.0);
    }

    fn row_of_three() -> DesignSpace {
        DesignSpace::new(3.0, 1.0, 3, 1, 1.0).unwrap()
    }

    #[test]
    fn filter_hand_example() {
        let kernel = FilterKernel::new(&row_of_three(), 1.5);
        let xt = kernel.apply(&[1.0, 0.0, 0.0]);
        assert!((xt[0] - 0.75).abs() < 1e-12);
        assert!((xt[1] - 0.2).abs() < 1e-12);
        assert!(xt[2].abs() < 1e-12);
    }

    #[test]
    fn filter_preserves_uniform_fields() {
        let space = DesignSpace::new(4.0, 3.0, 4, 3, 1.0).unwrap();
        let kernel = FilterKernel::new(&space, 1.5);
        let xt = kernel.apply(&vec![0.37; 12]);
        for v in xt {
            assert!((v - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn tiny_radius_is_identity() {
        let space = DesignSpace::new(4.0, 3.0, 4, 3, 1.0).unwrap();
        let kernel = FilterKernel::new(&space, 0.5);
        let x: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let xt = kernel.apply(&x);
        for (a, b) in x.iter().zip(&xt) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn filter_bounded_by_field_range() {
        let space = DesignSpace::new(5.0, 5.0, 5, 5, 1.0).unwrap();
        let kernel = FilterKernel::new(&space, 2.2);
        let x: Vec<f64> = (0..25).map(|i| ((i * 17) % 11) as f64 / 10.0).collect();
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in kernel.apply(&x) {
            assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
        }
    }

    #[test]
    fn filter_damps_checkerboard() {
        let space = DesignSpace::new(6.0, 6.0, 6, 6, 1.0).unwrap();
        let kernel = FilterKernel::new(&space, 1.5);
        let x: Vec<f64> = (0..36)
            .map(|e| {
                let (ex, ey) = space.element_grid_pos(e);
                ((ex + ey) % 2) as f64
            })
            .collect();
        let xt = kernel.apply(&x);
        let dev = |v: &[f64]| {
            v.iter()
                .map(|a| (a - 0.5).abs())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        assert!(dev(&xt) < dev(&x));
    }

    #[test]
    fn filter_is_linear() {
        let space = DesignSpace::new(4.0, 4.0, 4, 4, 1.0).unwrap();
        let kernel = FilterKernel::new(&space, 1.5);
        let a: Vec<f64> = (0..16).map(|i| (i as f64) / 16.0).collect();
        let b: Vec<f64> = (0..16).map(|i| ((16 - i) as f64) / 20.0).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + 3.0 * y).collect();
        let fa = kernel.apply(&a);
        let fb = kernel.apply(&b);
        let fsum = kernel.apply(&sum);
        for i in 0..16 {
            assert!((fsum[i] - (2.0 * fa[i] + 3.0 * fb[i])).abs() < 1e-12);
        }
    }
}
