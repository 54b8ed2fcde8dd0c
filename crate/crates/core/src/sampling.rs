//! Seeded samplers. Every random draw in the crate goes through a
//! `ChaCha8Rng`, so runs are reproducible from the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{ABMetric, ChartGeometry, TangentSample};
use crate::spray::phi_admissible;

/// Chart points are kept inside this radius, away from the chart boundary.
pub const CHART_RADIUS: f64 = 0.9;
const MAX_TRIES: usize = 10_000;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// Uniform in the open ball of the given radius.
    pub fn point_in_ball(&mut self, n: usize, radius: f64) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
            let r2: f64 = v.iter().map(|a| a * a).sum();
            if r2 < 1.0 {
                return v.into_iter().map(|a| a * radius).collect();
            }
        }
    }

    /// Uniform on the unit sphere.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.point_in_ball(n, 1.0);
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if r > 1e-3 {
                return v.into_iter().map(|a| a / r).collect();
            }
        }
    }

    /// A direction at `x` with `s = beta/alpha` inside `[-(1 - margin) b, (1 - margin) b]`
    /// where the profile is evaluable and positive.
    pub fn admissible_direction<G: ChartGeometry>(&mut self, m: &ABMetric<G>, x: &[f64], margin: f64) -> Result<Vec<f64>> {
        let b = m.b_len(x)?;
        for _ in 0..MAX_TRIES {
            let y = self.unit_vector(m.dim());
            let (alpha, s) = m.alpha_s(x, &y)?;
            if alpha > 0.0 && s.abs() <= (1.0 - margin) * b.max(0.0) + if b == 0.0 { 1.0 } else { 0.0 } && phi_admissible(&m.phi, s) {
                return Ok(y);
            }
        }
        Err(Error::Invalid("no admissible direction found".into()))
    }

    /// Random admissible tangent samples at random chart points.
    pub fn tangent_samples<G: ChartGeometry>(&mut self, m: &ABMetric<G>, count: usize, margin: f64) -> Result<Vec<TangentSample>> {
        (0..count)
            .map(|_| {
                let x = self.point_in_ball(m.dim(), CHART_RADIUS);
                let y = self.admissible_direction(m, &x, margin)?;
                Ok(TangentSample::new(x, y))
            })
            .collect()
    }

    /// Flag `(y, u)` with `u` a random vector bounded away from `y`'s line.
    pub fn flag<G: ChartGeometry>(&mut self, m: &ABMetric<G>, x: &[f64], margin: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let y = self.admissible_direction(m, x, margin)?;
        loop {
            let u = self.unit_vector(m.dim());
            let c: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
            if c.abs() < 0.95 {
                return Ok((y, u));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PhiSpec;
    use crate::s3::make_berger;

    #[test]
    fn deterministic_for_seed() {
        let a: Vec<_> = (0..5).map({
            let mut s = Sampler::new(7);
            move |_| s.point_in_ball(3, 0.9)
        }).collect();
        let mut s = Sampler::new(7);
        for p in &a {
            assert_eq!(*p, s.point_in_ball(3, 0.9));
            assert!(p.iter().map(|v| v * v).sum::<f64>() < 0.81);
        }
    }

    #[test]
    fn kropina_directions_avoid_zero_beta() {
        let m = make_berger(1.0).unwrap().with_phi(PhiSpec::Kropina { sign: 1.0 });
        let mut s = Sampler::new(3);
        for t in s.tangent_samples(&m, 20, 0.05).unwrap() {
            let (_, sv) = m.alpha_s(&t.x, &t.y).unwrap();
            assert!(sv > 0.0);
        }
    }
}
