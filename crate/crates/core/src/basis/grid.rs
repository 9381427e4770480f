use serde::{Deserialize, Serialize};

/// Uniform grid on [−L, L]², symmetric about the origin. For integrands that
/// reduce to one dimension the same half-width and point count are used
/// along a single axis or radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub half_width: f64,
    pub points: usize,
}

/// Hermite mass sits inside |x| ≲ √λ; the window is this factor times √(2λ).
const WINDOW_FACTOR: f64 = 1.2;
/// Gaussian tails of the lowest modes need a fixed minimum window.
const MIN_HALF_WIDTH: f64 = 7.0;
const POINTS_1D: usize = 2048;
const POINTS_2D: usize = 512;
/// Samples per shortest local wavelength 2π/√λ.
const SAMPLES_PER_WAVELENGTH: f64 = 16.0;

impl Grid2D {
    pub fn new(half_width: f64, points: usize) -> Self {
        assert!(half_width > 0.0 && points >= 2, "grid needs a positive width and two points");
        Self { half_width, points }
    }

    pub fn half_width_for(lambda_max: f64) -> f64 {
        (WINDOW_FACTOR * (2.0 * lambda_max).sqrt()).max(MIN_HALF_WIDTH)
    }

    /// Default for integrands that reduce to one dimension: 2048 points, or
    /// more if that does not resolve the shortest wavelength.
    pub fn for_1d(lambda_max: f64) -> Self {
        let l = Self::half_width_for(lambda_max);
        let wavelength = 2.0 * std::f64::consts::PI / lambda_max.sqrt();
        let needed = (l * SAMPLES_PER_WAVELENGTH / wavelength).ceil() as usize + 1;
        Self::new(l, POINTS_1D.max(needed))
    }

    /// Default for genuinely two-dimensional integrands (512²).
    pub fn for_2d(lambda_max: f64) -> Self {
        Self::new(Self::half_width_for(lambda_max), POINTS_2D)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// Same window with twice the resolution.
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * self.points - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_covering() {
        let g = Grid2D::new(3.0, 7);
        let c = g.coords();
        assert_eq!(c[0], -3.0);
        assert!((c[6] - 3.0).abs() < 1e-15);
        assert_eq!(c[3], 0.0);
        assert_eq!(g.refined().points, 13);
    }

    #[test]
    fn one_dimensional_default_resolves_high_modes() {
        let small = Grid2D::for_1d(10.0);
        assert_eq!(small.points, 2048);
        let large = Grid2D::for_1d(4098.0);
        assert!(large.points > 2048);
        assert!(large.spacing() < 2.0 * std::f64::consts::PI / 4098f64.sqrt() / 8.0);
    }
}
