//! Quadrature rules on `[-1, 1]` and on the unit sphere of a fiber.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Unit directions and solid-angle weights covering `S^{n-1}`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub dirs: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// `n = 2`: `azimuth` equispaced points on the circle.
    /// `n = 3`: `polar` Gauss-Legendre nodes in `cos(theta)` times
    /// `azimuth` equispaced longitudes.
    pub fn new(n: usize, polar: usize, azimuth: usize) -> Self {
        match n {
            2 => {
                let w = 2.0 * PI / azimuth as f64;
                let dirs = (0..azimuth)
                    .map(|k| {
                        let t = w * k as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                Self {
                    dirs,
                    weights: vec![w; azimuth],
                }
            }
            3 => {
                let (z, wz) = gauss_legendre(polar);
                let dphi = 2.0 * PI / azimuth as f64;
                let mut dirs = Vec::with_capacity(polar * azimuth);
                let mut weights = Vec::with_capacity(polar * azimuth);
                for (zi, wi) in z.iter().zip(&wz) {
                    let r = (1.0 - zi * zi).sqrt();
                    for k in 0..azimuth {
                        let p = dphi * k as f64;
                        dirs.push(vec![r * p.cos(), r * p.sin(), *zi]);
                        weights.push(wi * dphi);
                    }
                }
                Self { dirs, weights }
            }
            _ => panic!("fiber sphere quadrature is implemented for n = 2, 3 only"),
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.dirs.iter().zip(&self.weights).map(|(d, w)| w * f(d)).sum()
    }
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // exact up to degree 9
        let i8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i8 - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_and_second_moment() {
        let g = SphereGrid::new(3, 16, 32);
        assert!((g.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
        let m = g.integrate(|u| u[0] * u[0]);
        assert!((m - 4.0 * PI / 3.0).abs() < 1e-12);
        let c = SphereGrid::new(2, 0, 64);
        assert!((c.integrate(|u| u[1] * u[1]) - PI).abs() < 1e-12);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }
}
