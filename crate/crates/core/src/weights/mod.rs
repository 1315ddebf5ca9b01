//! Closed-form monomial norms `||z^alpha||^2` on nested egg domains.
//!
//! After polar coordinates in every variable and the substitution
//! `u_j = |z_j|^{2 p_j}`, each leaf contributes a factor `pi / p_j` and a
//! radial exponent `c_j = (alpha_j + 1) / p_j`. A group with exponent `e`
//! collapses its children through one multivariate Beta factor:
//!
//! ```text
//!   K_group = prod K_child * B(c_child..) / e,   c_group = sum c_child / e
//! ```
//!
//! The root (exponent 1) does the same without the `1/e` and then integrates
//! the last radial variable against `(1 - t)^s`, giving
//! `Gamma(C) Gamma(s+1) / Gamma(C+s+1)` (which is `1/C` at `s = 0`).
//!
//! Everything is evaluated in log space and exponentiated once.

mod domain;
mod isometry;
mod oracle;

use std::f64::consts::PI;
use std::sync::Arc;

use dashmap::DashMap;

pub use domain::{EggDomainSpec, EggNode};
pub use isometry::{
    isometry_factor, isometry_residuals, IsometryFactor, IsometryReport, IsometryResidual,
};
pub use oracle::{oracle_norm, OracleEstimate, MIN_ORACLE_BUDGET};

use crate::error::{check_dim, Error, Result};
use crate::lattice::MultiIndex;

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln( prod Gamma(x_j) / Gamma(sum x_j) )`.
pub fn log_multibeta(args: &[f64]) -> Result<f64> {
    if args.is_empty() {
        return Err(Error::Domain("Beta function of no arguments".into()));
    }
    if let Some(bad) = args.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Domain(format!(
            "Beta function argument {bad} is not positive"
        )));
    }
    Ok(log_multibeta_unchecked(args))
}

fn log_multibeta_unchecked(args: &[f64]) -> f64 {
    if args.len() == 1 {
        return 0.0;
    }
    let sum: f64 = args.iter().sum();
    args.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(sum)
}

fn check_weight_exponent(s: f64) -> Result<()> {
    if s.is_finite() && s > -1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight exponent s = {s} must exceed -1")))
    }
}

/// `(ln K, c)` for a subtree; `alpha` is consumed in leaf order.
fn accumulate(node: &EggNode, alpha: &mut std::slice::Iter<'_, u32>) -> (f64, f64) {
    match node {
        EggNode::Leaf { power, .. } => {
            let p = power / 2.0;
            let a = *alpha.next().expect("alpha length checked") as f64;
            ((PI / p).ln(), (a + 1.0) / p)
        }
        EggNode::Group { exponent, children } => {
            let (log_k, c) = combine(children, alpha);
            (log_k - exponent.ln(), c / exponent)
        }
    }
}

fn combine(children: &[EggNode], alpha: &mut std::slice::Iter<'_, u32>) -> (f64, f64) {
    let mut log_k = 0.0;
    let mut cs = Vec::with_capacity(children.len());
    for child in children {
        let (k, c) = accumulate(child, alpha);
        log_k += k;
        cs.push(c);
    }
    (log_k + log_multibeta_unchecked(&cs), cs.iter().sum())
}

fn log_omega_closed_form(domain: &EggDomainSpec, s: f64, alpha: &MultiIndex) -> f64 {
    let mut it = alpha.as_slice().iter();
    let (log_k, c) = combine(domain.children(), &mut it);
    let radial = if s == 0.0 {
        -c.ln()
    } else {
        ln_gamma(c) + ln_gamma(s + 1.0) - ln_gamma(c + s + 1.0)
    };
    log_k + radial
}

/// `||z^alpha||^2` in the weighted Bergman space `L^2_{a,s}(domain)`.
pub fn omega(domain: &EggDomainSpec, s: f64, alpha: &MultiIndex) -> Result<f64> {
    check_dim(domain.dim(), alpha.dim())?;
    check_weight_exponent(s)?;
    Ok(log_omega_closed_form(domain, s, alpha).exp())
}

struct Inner {
    domain: EggDomainSpec,
    s: f64,
    cache: DashMap<MultiIndex, f64>,
}

/// `alpha -> ||z^alpha||^2` for a fixed domain and weight exponent, with a
/// shared memo of `ln omega`. Cloning shares the memo.
#[derive(Clone)]
pub struct WeightFunction {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightFunction")
            .field("domain", &self.inner.domain)
            .field("s", &self.inner.s)
            .finish()
    }
}

impl WeightFunction {
    pub fn new(domain: EggDomainSpec, s: f64) -> Result<Self> {
        check_weight_exponent(s)?;
        Ok(WeightFunction {
            inner: Arc::new(Inner {
                domain,
                s,
                cache: DashMap::new(),
            }),
        })
    }

    /// Unweighted Bergman space of `domain`.
    pub fn bergman(domain: EggDomainSpec) -> Self {
        Self::new(domain, 0.0).expect("s = 0 is valid")
    }

    pub fn domain(&self) -> &EggDomainSpec {
        &self.inner.domain
    }

    pub fn s(&self) -> f64 {
        self.inner.s
    }

    pub fn dim(&self) -> usize {
        self.inner.domain.dim()
    }

    pub fn log_omega(&self, alpha: &MultiIndex) -> Result<f64> {
        check_dim(self.dim(), alpha.dim())?;
        Ok(self.log_omega_unchecked(alpha))
    }

    pub fn omega(&self, alpha: &MultiIndex) -> Result<f64> {
        self.log_omega(alpha).map(f64::exp)
    }

    pub(crate) fn log_omega_unchecked(&self, alpha: &MultiIndex) -> f64 {
        if let Some(v) = self.inner.cache.get(alpha) {
            return *v;
        }
        let v = log_omega_closed_form(&self.inner.domain, self.inner.s, alpha);
        self.inner.cache.insert(alpha.clone(), v);
        v
    }

    /// `ln( omega(n + e_i) / omega(n) )`.
    pub(crate) fn log_ratio_up(&self, n: &MultiIndex, i: usize) -> f64 {
        self.log_omega_unchecked(&n.raised(i)) - self.log_omega_unchecked(n)
    }

    /// Number of memoized entries.
    pub fn cache_len(&self) -> usize {
        self.inner.cache.len()
    }
}
