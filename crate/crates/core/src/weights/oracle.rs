//! Monte Carlo check of the closed-form norms.
//!
//! Polar coordinates in each variable give `(2 pi)^m int x^{2 alpha + 1} dx`
//! over the radial part of the domain. With `u_j = x_j^{2 p_j}` and then
//! `w_j = u_j^{c_j}`, `c_j = (alpha_j + 1)/p_j`, the integrand becomes
//!
//! ```text
//!   prod_j pi / (p_j c_j) * 1{F(u) < 1} * (1 - F(u))^s,   w in [0,1]^m
//! ```
//!
//! which is bounded for `s >= 0`. The cube is split into equal slabs along
//! the first radial coordinate and every slab gets the same number of
//! uniform samples.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::EggDomainSpec;
use crate::error::{check_dim, Error, Result};
use crate::lattice::MultiIndex;

pub const MIN_ORACLE_BUDGET: u64 = 10_000;
const SLABS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

impl OracleEstimate {
    /// `|value - estimate|` measured in standard errors.
    /// A zero-variance estimate (constant integrand) only tolerates rounding.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (value - self.estimate).abs();
        if self.standard_error > 0.0 {
            diff / self.standard_error
        } else if diff <= 1e-12 * value.abs() {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Stratified Monte Carlo estimate of `int_domain |z^alpha|^2 rho^s dV`,
/// deterministic for a given seed.
pub fn oracle_norm(
    domain: &EggDomainSpec,
    s: f64,
    alpha: &MultiIndex,
    budget: u64,
    seed: u64,
) -> Result<OracleEstimate> {
    check_dim(domain.dim(), alpha.dim())?;
    if budget < MIN_ORACLE_BUDGET {
        return Err(Error::InvalidInput(format!(
            "oracle budget {budget} is below {MIN_ORACLE_BUDGET}"
        )));
    }
    if !(s.is_finite() && s > -1.0) {
        return Err(Error::Domain(format!("weight exponent s = {s} must exceed -1")));
    }
    let m = domain.dim();
    let p = domain.half_powers();
    let inv_c: Vec<f64> = alpha
        .as_slice()
        .iter()
        .zip(&p)
        .map(|(&a, &p)| p / (a as f64 + 1.0))
        .collect();
    let prefactor: f64 = p
        .iter()
        .zip(&inv_c)
        .map(|(&p, &ic)| PI / p * ic)
        .product();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_slab = budget / SLABS;
    let mut u = vec![0.0; m];
    let mut mean = 0.0;
    let mut var_of_mean = 0.0;
    for slab in 0..SLABS {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..per_slab {
            for (j, uj) in u.iter_mut().enumerate() {
                let w: f64 = if j == 0 {
                    (slab as f64 + rng.random::<f64>()) / SLABS as f64
                } else {
                    rng.random()
                };
                *uj = w.powf(inv_c[j]);
            }
            let f = domain.evaluate_terms(&u);
            let v = if f < 1.0 {
                if s == 0.0 {
                    1.0
                } else {
                    (1.0 - f).powf(s)
                }
            } else {
                0.0
            };
            sum += v;
            sum_sq += v * v;
        }
        let n = per_slab as f64;
        let slab_mean = sum / n;
        let slab_var = (sum_sq / n - slab_mean * slab_mean).max(0.0) * n / (n - 1.0);
        mean += slab_mean / SLABS as f64;
        var_of_mean += slab_var / n / (SLABS * SLABS) as f64;
    }
    Ok(OracleEstimate {
        estimate: prefactor * mean,
        standard_error: prefactor * var_of_mean.sqrt(),
    })
}
