//! Norm bookkeeping for the slice map of a box module.
//!
//! For an egg `Omega_1`, a shuffle `j` and a multi-index `i` on it, the
//! monomial `z^n` with `n|_j = i` and `n' = n` off `j` satisfies
//!
//! ```text
//!   omega(Omega_1, n) = K(i) * omega_s(Omega_{1,j}, n'),
//!   K(i) = pi^q / prod p_{j^l} * prod Gamma(c_l) / Gamma(sum c_l + 1),
//!   s    = sum c_l,   c_l = (i^l + 1) / p_{j^l}.
//! ```
//!
//! Differentiating `i` times in the `j` variables and restricting to the
//! slice sends `z^n` to `i! z^{n'}`, so the amplitude making the slice map
//! isometric is `sqrt(K(i)) / i!`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{ln_gamma, EggDomainSpec, WeightFunction};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{indices_up_to, shuffles, MultiIndex, Shuffle};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsometryFactor {
    /// `K(i) = omega(n) / omega_s(n')`.
    pub norm_ratio: f64,
    /// Weight exponent of the target space on the slice.
    pub slice_weight: f64,
    /// `i! = prod_l i^l!`.
    pub derivative_factorial: f64,
}

impl IsometryFactor {
    /// Amplitude applied to the `i`-th derivative so that the slice map is
    /// an isometry.
    pub fn coefficient(&self) -> f64 {
        self.norm_ratio.sqrt() / self.derivative_factorial
    }
}

pub fn isometry_factor(
    domain: &EggDomainSpec,
    shuffle: &Shuffle,
    i: &[u32],
) -> Result<IsometryFactor> {
    if domain.depth() != 1 {
        return Err(Error::InvalidInput(format!(
            "slice isometry needs a depth-1 egg, got depth {}",
            domain.depth()
        )));
    }
    check_dim(shuffle.len(), i.len())?;
    if let Some(&last) = shuffle.indices().last() {
        if last >= domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: last + 1,
            });
        }
    }
    let p = domain.half_powers();
    let mut log_k = 0.0;
    let mut s = 0.0;
    let mut log_fact = 0.0;
    for (&j, &il) in shuffle.indices().iter().zip(i) {
        let c = (il as f64 + 1.0) / p[j];
        log_k += (PI / p[j]).ln() + ln_gamma(c);
        s += c;
        log_fact += ln_gamma(il as f64 + 1.0);
    }
    log_k -= ln_gamma(s + 1.0);
    Ok(IsometryFactor {
        norm_ratio: log_k.exp(),
        slice_weight: s,
        derivative_factorial: log_fact.exp(),
    })
}

/// `|K(i) omega_s(n') / omega(n) - 1|` for one shuffle and point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryResidual {
    /// 1-based.
    pub shuffle: Vec<usize>,
    pub point: MultiIndex,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub cap: u32,
    pub checked: usize,
    pub max_residual: f64,
    pub residuals: Vec<IsometryResidual>,
}

/// Checks `omega(n) = K(n|_j) omega_s(n')` for every shuffle with
/// `q >= 1` and every `|n| <= cap`. When every coordinate is constrained
/// the slice norm is the empty product 1.
pub fn isometry_residuals(domain: &EggDomainSpec, cap: u32) -> Result<IsometryReport> {
    let m = domain.dim();
    let full = WeightFunction::bergman(domain.clone());
    let points = indices_up_to(m, cap);
    let mut residuals = Vec::new();
    for q in 1..=m {
        for sh in shuffles(q, m) {
            let slice = domain.restrict(&sh)?;
            for n in &points {
                let i: Vec<u32> = sh.indices().iter().map(|&j| n[j]).collect();
                let rest: Vec<u32> = (0..m).filter(|j| !sh.contains(*j)).map(|j| n[j]).collect();
                let f = isometry_factor(domain, &sh, &i)?;
                let log_slice = match &slice {
                    Some(d) => WeightFunction::new(d.clone(), f.slice_weight)?
                        .log_omega(&MultiIndex::new(rest))?,
                    None => 0.0,
                };
                let residual =
                    (f.norm_ratio.ln() + log_slice - full.log_omega(n)?).exp_m1().abs();
                residuals.push(IsometryResidual {
                    shuffle: sh.one_based(),
                    point: n.clone(),
                    residual,
                });
            }
        }
    }
    Ok(IsometryReport {
        cap,
        checked: residuals.len(),
        max_residual: residuals.iter().fold(0.0, |a, r| a.max(r.residual)),
        residuals,
    })
}
