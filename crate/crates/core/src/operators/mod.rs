//! Region-constrained weighted shifts and their commutators.
//!
//! In the orthonormal basis `e_n = z^n / sqrt(omega(n))` the coordinate
//! multiplication compressed to a lattice region `R` acts as
//!
//! ```text
//!   T_i e_n = sqrt(omega(n + e_i) / omega(n)) e_{n + e_i}   if n + e_i in R,
//!           = 0                                             otherwise.
//! ```
//!
//! The full lattice gives `M_{z_i}`, a box gives the box module, and `C(I)`
//! gives the compression to `I^perp`. All amplitudes come from log ratios
//! of adjacent norms.

mod scan;

use rayon::prelude::*;
use serde::Serialize;

pub use scan::{
    essential_normality_scan, schatten_scan, CriticalEstimate, DecayFit, PairScan,
    PairSchatten, SchattenOptions, SpectralScanReport,
};

use crate::error::{check_dim, Error, Result};
use crate::lattice::{indices_of_degree, LatticeBox, LatticeRegion, MultiIndex};
use crate::weights::WeightFunction;

/// `T_{z_i}` on a lattice region.
#[derive(Clone, Debug)]
pub struct ShiftOperator {
    coordinate: usize,
    region: LatticeRegion,
    weights: WeightFunction,
}

impl ShiftOperator {
    /// `coordinate` is 0-based.
    pub fn new(coordinate: usize, region: LatticeRegion, weights: WeightFunction) -> Result<Self> {
        check_dim(weights.dim(), region.dim())?;
        check_coordinate(coordinate, region.dim())?;
        Ok(ShiftOperator {
            coordinate,
            region,
            weights,
        })
    }

    pub fn coordinate(&self) -> usize {
        self.coordinate
    }

    pub fn region(&self) -> &LatticeRegion {
        &self.region
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }
}

fn check_coordinate(i: usize, dim: usize) -> Result<()> {
    if i < dim {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "coordinate {} out of range 1..={dim}",
            i + 1
        )))
    }
}

fn check_member(region: &LatticeRegion, n: &MultiIndex) -> Result<()> {
    check_dim(region.dim(), n.dim())?;
    if region.contains(n) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{n} lies outside the region")))
    }
}

/// `sqrt(omega(n+e_i)/omega(n))` if `n + e_i` stays in the region, else 0.
/// `n` is assumed to be a member.
pub(crate) fn amplitude(region: &LatticeRegion, w: &WeightFunction, n: &MultiIndex, i: usize) -> f64 {
    let up = n.raised(i);
    if region.contains(&up) {
        (0.5 * (w.log_omega_unchecked(&up) - w.log_omega_unchecked(n))).exp()
    } else {
        0.0
    }
}

/// Coefficient of `e_{n+e_i}` in `T_i e_n`.
pub fn shift_amplitude(op: &ShiftOperator, n: &MultiIndex) -> Result<f64> {
    check_member(&op.region, n)?;
    Ok(amplitude(&op.region, &op.weights, n, op.coordinate))
}

/// Eigenvalue of `[T_i, T_i^*]` at `e_n`: `lambda' - lambda''` with
/// `lambda' = omega(n)/omega(n-e_i)` when `n - e_i` is in the region and
/// `lambda'' = omega(n+e_i)/omega(n)` when `n + e_i` is.
pub fn self_commutator_diagonal(
    i: usize,
    region: &LatticeRegion,
    w: &WeightFunction,
    n: &MultiIndex,
) -> Result<f64> {
    check_dim(w.dim(), region.dim())?;
    check_coordinate(i, region.dim())?;
    check_member(region, n)?;
    Ok(diagonal_entry(i, region, w, n))
}

fn diagonal_entry(i: usize, region: &LatticeRegion, w: &WeightFunction, n: &MultiIndex) -> f64 {
    let log_n = w.log_omega_unchecked(n);
    let lower = match n.lowered(i) {
        Some(down) if region.contains(&down) => (log_n - w.log_omega_unchecked(&down)).exp(),
        _ => 0.0,
    };
    let up = n.raised(i);
    let upper = if region.contains(&up) {
        (w.log_omega_unchecked(&up) - log_n).exp()
    } else {
        0.0
    };
    lower - upper
}

/// Coefficient of `e_{n+e_i-e_k}` in `[T_i, T_k^*] e_n` for `i != k`:
/// `T_i T_k^*` goes down then up, `T_k^* T_i` up then down.
fn cross_entry(
    i: usize,
    k: usize,
    region: &LatticeRegion,
    w: &WeightFunction,
    n: &MultiIndex,
) -> Option<(MultiIndex, f64)> {
    let down = n.lowered(k)?;
    let target = down.raised(i);
    if !region.contains(&target) {
        return Some((target, 0.0));
    }
    let lw = |m: &MultiIndex| w.log_omega_unchecked(m);
    let down_up = if region.contains(&down) {
        let l_down = lw(&down);
        (0.5 * (lw(n) - l_down) + 0.5 * (lw(&target) - l_down)).exp()
    } else {
        0.0
    };
    let up = n.raised(i);
    let up_down = if region.contains(&up) {
        let l_up = lw(&up);
        (0.5 * (l_up - lw(n)) + 0.5 * (l_up - lw(&target))).exp()
    } else {
        0.0
    };
    Some((target, down_up - up_down))
}

/// One nonzero matrix entry `<e_target, [T_i, T_k^*] e_source>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorEntry {
    pub source: MultiIndex,
    pub target: MultiIndex,
    pub value: f64,
}

/// Nonzero entries of `[T_i, T_k^*]` on sources with `|n| <= cap`, in
/// graded lexicographic order of the source. Coordinates are 0-based here.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorTable {
    pub i: usize,
    pub k: usize,
    pub cap: u32,
    pub entries: Vec<CommutatorEntry>,
}

/// Entry (target, value) of `[T_i, T_k^*]` at a region member `n`, if the
/// target exists in the lattice.
pub(crate) fn commutator_entry(
    i: usize,
    k: usize,
    region: &LatticeRegion,
    w: &WeightFunction,
    n: &MultiIndex,
) -> Option<(MultiIndex, f64)> {
    if i == k {
        Some((n.clone(), diagonal_entry(i, region, w, n)))
    } else {
        cross_entry(i, k, region, w, n)
    }
}

pub fn commutator_entries(
    i: usize,
    k: usize,
    region: &LatticeRegion,
    w: &WeightFunction,
    cap: u32,
) -> Result<CommutatorTable> {
    check_dim(w.dim(), region.dim())?;
    check_coordinate(i, region.dim())?;
    check_coordinate(k, region.dim())?;
    let dim = region.dim();
    let shells: Vec<Vec<CommutatorEntry>> = (0..=cap)
        .into_par_iter()
        .map(|d| {
            indices_of_degree(dim, d)
                .into_iter()
                .filter(|n| region.contains(n))
                .filter_map(|n| {
                    let (target, value) = commutator_entry(i, k, region, w, &n)?;
                    (value != 0.0).then_some(CommutatorEntry {
                        source: n,
                        target,
                        value,
                    })
                })
                .collect()
        })
        .collect();
    Ok(CommutatorTable {
        i,
        k,
        cap,
        entries: shells.into_iter().flatten().collect(),
    })
}

/// Squared amplitude `omega(n+e_i)/omega(n)` of `[M_{z_i}, P]` at a point
/// `n` sitting on the face `n^i = b` of the box.
pub fn projection_commutator_rho(
    b: &LatticeBox,
    w: &WeightFunction,
    i: usize,
    n: &MultiIndex,
) -> Result<f64> {
    check_dim(w.dim(), b.dim())?;
    check_dim(b.dim(), n.dim())?;
    check_coordinate(i, b.dim())?;
    match b.limit(i) {
        Some(bound) if n[i] == bound && b.contains(n) => {
            Ok(w.log_ratio_up(n, i).exp())
        }
        Some(bound) => Err(Error::InvalidInput(format!(
            "{n} is not on the face n{} = {bound} of the box",
            i + 1
        ))),
        None => Err(Error::InvalidInput(format!(
            "coordinate {} is not constrained by the box",
            i + 1
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MonomialIdeal, Shuffle};
    use crate::weights::EggDomainSpec;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from(v)
    }

    fn disc() -> WeightFunction {
        WeightFunction::bergman(EggDomainSpec::egg(&[1.0]).unwrap())
    }

    fn ball(m: usize) -> WeightFunction {
        WeightFunction::bergman(EggDomainSpec::ball(m))
    }

    #[test]
    fn amplitude_examples() {
        let op = ShiftOperator::new(0, LatticeRegion::full(1), disc()).unwrap();
        let a = shift_amplitude(&op, &mi(&[0])).unwrap();
        assert!((a - 0.5f64.sqrt()).abs() < 1e-15);

        let b = LatticeBox::new(2, &Shuffle::new(vec![0], 2).unwrap(), &[0]).unwrap();
        let op = ShiftOperator::new(0, LatticeRegion::from_box(&b), ball(2)).unwrap();
        assert_eq!(shift_amplitude(&op, &mi(&[0, 3])).unwrap(), 0.0);
        assert!(shift_amplitude(&op, &mi(&[1, 3])).is_err());

        let op = ShiftOperator::new(1, LatticeRegion::full(2), ball(2)).unwrap();
        let a = shift_amplitude(&op, &mi(&[1, 1])).unwrap();
        assert!((a - 0.4f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn disc_self_commutator() {
        let full = LatticeRegion::full(1);
        let w = disc();
        assert!((self_commutator_diagonal(0, &full, &w, &mi(&[0])).unwrap() + 0.5).abs() < 1e-15);
        for n in 0..200u32 {
            let lam = self_commutator_diagonal(0, &full, &w, &mi(&[n])).unwrap();
            let expect = -1.0 / ((n as f64 + 1.0) * (n as f64 + 2.0));
            assert!(((lam - expect) / expect).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn truncated_self_commutator() {
        // box {n1 <= 2} in the ball: at the face only lambda' survives
        let b = LatticeBox::new(2, &Shuffle::new(vec![0], 2).unwrap(), &[2]).unwrap();
        let r = LatticeRegion::from_box(&b);
        let w = ball(2);
        let n = mi(&[2, 4]);
        let lam = self_commutator_diagonal(0, &r, &w, &n).unwrap();
        let expect = w.omega(&n).unwrap() / w.omega(&mi(&[1, 4])).unwrap();
        assert!((lam - expect).abs() < 1e-14);
        // finite box {n1 <= 0}: both neighbours excluded in coordinate 1
        let b = LatticeBox::new(2, &Shuffle::new(vec![0], 2).unwrap(), &[0]).unwrap();
        let r = LatticeRegion::from_box(&b);
        assert_eq!(self_commutator_diagonal(0, &r, &w, &mi(&[0, 3])).unwrap(), 0.0);
    }

    #[test]
    fn compression_kills_crossings() {
        let ideal = MonomialIdeal::from_exponents(2, &[vec![1, 1]]).unwrap();
        let r = LatticeRegion::complement_of(ideal);
        let t = commutator_entries(0, 1, &r, &ball(2), 10).unwrap();
        for e in &t.entries {
            assert!(r.contains(&e.source) && r.contains(&e.target));
        }
        // the only crossing inside C(<z1 z2>) is (0,1) -> (1,0)
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].source, mi(&[0, 1]));
    }

    #[test]
    fn diagonal_table_matches_pointwise() {
        let r = LatticeRegion::full(2);
        let w = ball(2);
        let t = commutator_entries(1, 1, &r, &w, 6).unwrap();
        for e in &t.entries {
            assert_eq!(e.value, self_commutator_diagonal(1, &r, &w, &e.source).unwrap());
        }
    }

    #[test]
    fn rho_examples() {
        let w = ball(2);
        let b = LatticeBox::new(2, &Shuffle::new(vec![0], 2).unwrap(), &[0]).unwrap();
        let rho = projection_commutator_rho(&b, &w, 0, &mi(&[0, 0])).unwrap();
        assert!((rho - 1.0 / 3.0).abs() < 1e-14);
        for n2 in 0..50u32 {
            let rho = projection_commutator_rho(&b, &w, 0, &mi(&[0, n2])).unwrap();
            assert!((rho - 1.0 / (n2 as f64 + 3.0)).abs() < 1e-13);
        }
        assert!(projection_commutator_rho(&b, &w, 1, &mi(&[0, 0])).is_err());
        let b = LatticeBox::new(2, &Shuffle::new(vec![0], 2).unwrap(), &[2]).unwrap();
        assert!(projection_commutator_rho(&b, &w, 0, &mi(&[1, 0])).is_err());
    }

    #[test]
    fn rho_finite_rank_one_variable() {
        let w = disc();
        let b = LatticeBox::new(1, &Shuffle::new(vec![0], 1).unwrap(), &[4]).unwrap();
        let rho = projection_commutator_rho(&b, &w, 0, &mi(&[4])).unwrap();
        assert!((rho - 5.0 / 6.0).abs() < 1e-14);
    }
}
