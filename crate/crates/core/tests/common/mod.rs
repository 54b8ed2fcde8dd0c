//! Test-only oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use finsler_ab::metric::{ABMetric, PhiSpec, TangentSample};
use finsler_ab::ode::{solve_phi_ivp, IvpOptions, OdeSpec};
use finsler_ab::s3::{make_berger, BergerSphere};
use finsler_ab::spray::spray_generic;

pub const FD_STEP: f64 = 1e-5;

/// Central-difference gradient of `f` at `z`.
pub fn fd_grad(f: impl Fn(&[f64]) -> f64, z: &[f64], h: f64) -> Vec<f64> {
    (0..z.len())
        .map(|p| {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[p] += h;
            zm[p] -= h;
            (f(&zp) - f(&zm)) / (2.0 * h)
        })
        .collect()
}

/// Spray values as a function of the stacked vector `(x, y)`.
pub fn spray_of_z(m: &ABMetric<BergerSphere>, z: &[f64], i: usize) -> f64 {
    let n = z.len() / 2;
    spray_generic(m, &TangentSample::new(&z[..n], &z[n..])).unwrap().g[i]
}

pub fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn berger(eps: f64, phi: PhiSpec) -> ABMetric<BergerSphere> {
    make_berger(eps).unwrap().with_phi(phi)
}

/// Profile solved from the sphere equation with `phi(0) = 1`, `phi'(0) = dphi0`.
pub fn sphere_profile(k_sign: i8, b: f64, dphi0: f64) -> PhiSpec {
    let sol = solve_phi_ivp(OdeSpec::sphere(k_sign, b).unwrap(), 1.0, dphi0, IvpOptions::default()).unwrap();
    PhiSpec::Numeric(Arc::new(sol))
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / v.len() as f64;
    (mean, var.sqrt())
}
