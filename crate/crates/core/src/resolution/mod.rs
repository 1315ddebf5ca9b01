//! The complex `0 -> Ibar -> A_0 -> A_1 -> ... -> A_k -> 0` built from a box
//! cover `B_1..B_k` of `C(I)`.
//!
//! `A_q` is the direct sum over `q`-subsets `I` of the labels of the
//! intersection box modules `H(B_I)`, with `A_0` the full lattice. The
//! differential adds one label at a time:
//!
//! ```text
//!   (Psi_q X)^{J} = sum_{s in J} sign(J \ s, s) X^{J \ s},
//!   sign(I, s) = (-1)^{#{i in I : i < s}},
//! ```
//!
//! restricted to the points of `B_J`. Everything acts diagonally in the
//! lattice point `n`: the coefficient complex at `n` only sees the labels
//! `S(n) = {i : n in B_i}`. Because the sign only depends on the relative
//! order of labels, that complex is the same matrix for every `n` with the
//! same `|S(n)|`, which is what the verifiers memoize on.

mod local;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{AddAssign, Neg};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{
    box_intersect, indices_up_to, BoxCover, LatticeBox, MonomialIdeal, MultiIndex,
};
use crate::weights::WeightFunction;

pub use local::integer_rank;
use local::local_complex;

/// Largest level enumerated by [`Resolution::level`].
pub const MAX_LEVEL_SIZE: u128 = 1 << 20;

/// Points whose label set is larger than this are reported as uncertified.
pub const DEFAULT_LABEL_BUDGET: usize = 22;

/// Hard ceiling for the label budget; local complexes use `u32` masks.
pub const MAX_LABEL_BUDGET: usize = 30;

/// Sign convention used by `Psi`. Only [`SignRule::Alternating`] gives a
/// complex; the other exists to check that the verifiers notice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SignRule {
    Alternating,
    Unsigned,
}

impl SignRule {
    /// Sign of `X^I -> Y^{I + s}` given `#{i in I : i < s}`.
    pub(crate) fn sign(self, below: usize) -> i64 {
        match self {
            SignRule::Alternating if below % 2 == 1 => -1,
            _ => 1,
        }
    }
}

/// Amplitude used by `T_i` on the target level of a module-map check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AmplitudeRule {
    /// `sqrt(omega(n+e_i)/omega(n))`.
    Normalized,
    /// `omega(n+e_i)/omega(n)`, the monomial-basis matrix entry.
    Unnormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub label_budget: usize,
    pub sign_rule: SignRule,
    pub target_amplitude: AmplitudeRule,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            label_budget: DEFAULT_LABEL_BUDGET,
            sign_rule: SignRule::Alternating,
            target_amplitude: AmplitudeRule::Normalized,
        }
    }
}

impl VerifyOptions {
    fn validate(&self) -> Result<()> {
        if self.label_budget > MAX_LABEL_BUDGET {
            return Err(Error::InvalidInput(format!(
                "label budget {} exceeds {MAX_LABEL_BUDGET}",
                self.label_budget
            )));
        }
        Ok(())
    }
}

/// `C(n, r)`, or `None` on overflow.
pub(crate) fn binomial(n: usize, r: usize) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for t in 0..r {
        acc = acc.checked_mul((n - t) as u128)? / (t as u128 + 1);
    }
    Some(acc)
}

/// One summand `H(B_I)` of a level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summand {
    /// 0-based labels, increasing.
    pub labels: Vec<usize>,
    pub region: LatticeBox,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolution {
    cover: BoxCover,
}

pub fn build_resolution(cover: BoxCover) -> Result<Resolution> {
    if cover.is_empty() {
        return Err(Error::InvalidInput("resolution needs a nonempty cover".into()));
    }
    Ok(Resolution { cover })
}

/// Successor of `c` in colex order among subsets of `0..k`.
fn next_colex(c: &mut [usize], k: usize) -> bool {
    let q = c.len();
    for t in 0..q {
        let limit = if t + 1 < q { c[t + 1] } else { k };
        if c[t] + 1 < limit {
            c[t] += 1;
            for (u, v) in c[..t].iter_mut().enumerate() {
                *v = u;
            }
            return true;
        }
    }
    false
}

impl Resolution {
    pub fn cover(&self) -> &BoxCover {
        &self.cover
    }

    /// Number of boxes `k`; the levels run over `q = 0..=k`.
    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cover.dim()
    }

    /// `C(k, q)`.
    pub fn level_size(&self, q: usize) -> Option<u128> {
        binomial(self.len(), q)
    }

    fn check_labels(&self, labels: &[usize]) -> Result<()> {
        let sorted = labels.windows(2).all(|w| w[0] < w[1]);
        if !sorted || labels.last().is_some_and(|&l| l >= self.len()) {
            return Err(Error::InvalidInput(format!(
                "{labels:?} is not an increasing subset of 0..{}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `B_I`; the empty label set gives the full lattice.
    pub fn summand_box(&self, labels: &[usize]) -> Result<LatticeBox> {
        self.check_labels(labels)?;
        let boxes: Vec<LatticeBox> = labels.iter().map(|&l| self.cover.boxes()[l].clone()).collect();
        box_intersect(self.dim(), &boxes)
    }

    /// Summands of `A_q` in colex order of the label sets.
    pub fn level(&self, q: usize) -> Result<Vec<Summand>> {
        let k = self.len();
        if q > k {
            return Err(Error::InvalidInput(format!("level {q} exceeds {k}")));
        }
        match self.level_size(q) {
            Some(n) if n <= MAX_LEVEL_SIZE => {}
            _ => {
                return Err(Error::TooLarge(format!(
                    "level {q} of a {k}-box resolution has more than {MAX_LEVEL_SIZE} summands"
                )))
            }
        }
        let mut c: Vec<usize> = (0..q).collect();
        let mut out = Vec::new();
        loop {
            out.push(Summand {
                region: self.summand_box(&c)?,
                labels: c.clone(),
            });
            if !next_colex(&mut c, k) {
                return Ok(out);
            }
        }
    }

    /// `S(n)`: labels of the boxes containing `n`.
    pub fn labels_at(&self, n: &MultiIndex) -> Result<Vec<usize>> {
        check_dim(self.dim(), n.dim())?;
        Ok(self.labels_at_unchecked(n))
    }

    fn labels_at_unchecked(&self, n: &MultiIndex) -> Vec<usize> {
        self.cover
            .boxes()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains(n))
            .map(|(l, _)| l)
            .collect()
    }
}

/// Scalars a coefficient vector can carry.
pub trait Amplitude: Copy + Default + PartialEq + AddAssign + Neg<Output = Self> {}

impl<T: Copy + Default + PartialEq + AddAssign + Neg<Output = T>> Amplitude for T {}

/// An element of `A_q` on finitely many points: `(I, n) -> X^I_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector<T> {
    level: usize,
    entries: BTreeMap<(Vec<usize>, MultiIndex), T>,
}

impl<T: Amplitude> CoefficientVector<T> {
    pub fn new(level: usize) -> Self {
        CoefficientVector {
            level,
            entries: BTreeMap::new(),
        }
    }

    /// The basis vector `e_{I, n}`.
    pub fn basis(labels: Vec<usize>, n: MultiIndex, value: T) -> Self {
        let mut x = Self::new(labels.len());
        x.add(labels, n, value);
        x
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Adds `value` to the `(labels, n)` coefficient; exact zeros are dropped.
    pub fn add(&mut self, labels: Vec<usize>, n: MultiIndex, value: T) {
        match self.entries.entry((labels, n)) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                if *e.get() == T::default() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if value != T::default() {
                    e.insert(value);
                }
            }
        }
    }

    pub fn get(&self, labels: &[usize], n: &MultiIndex) -> T {
        self.entries
            .get(&(labels.to_vec(), n.clone()))
            .copied()
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &MultiIndex, T)> {
        self.entries.iter().map(|((l, n), v)| (l.as_slice(), n, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `Psi_q : A_q -> A_{q+1}` for `q < k`.
pub fn psi_apply<T: Amplitude>(
    res: &Resolution,
    q: usize,
    x: &CoefficientVector<T>,
) -> Result<CoefficientVector<T>> {
    psi_apply_with(res, q, x, SignRule::Alternating)
}

pub fn psi_apply_with<T: Amplitude>(
    res: &Resolution,
    q: usize,
    x: &CoefficientVector<T>,
    rule: SignRule,
) -> Result<CoefficientVector<T>> {
    let k = res.len();
    if q >= k {
        return Err(Error::InvalidInput(format!(
            "Psi_{q} is not defined for a {k}-box resolution"
        )));
    }
    if x.level != q {
        return Err(Error::InvalidInput(format!(
            "vector lives on level {}, expected {q}",
            x.level
        )));
    }
    let mut y = CoefficientVector::new(q + 1);
    for (labels, n, v) in x.iter() {
        check_dim(res.dim(), n.dim())?;
        if !res.summand_box(labels)?.contains(n) {
            return Err(Error::InvalidInput(format!(
                "{n} is outside the box of {labels:?}"
            )));
        }
        let here = res.labels_at_unchecked(n);
        for &s in here.iter().filter(|s| !labels.contains(s)) {
            // n lies in B_{I+s} exactly when s is in S(n), since n is in B_I
            let below = labels.iter().filter(|&&i| i < s).count();
            let mut target = labels.to_vec();
            target.insert(below, s);
            let value = if rule.sign(below) < 0 { -v } else { v };
            y.add(target, n.clone(), value);
        }
    }
    Ok(y)
}

/// Points with `|n| <= cap` and their label sets, in graded lex order.
fn points_with_labels(res: &Resolution, cap: u32) -> Vec<(MultiIndex, Vec<usize>)> {
    indices_up_to(res.dim(), cap)
        .into_par_iter()
        .map(|n| {
            let s = res.labels_at_unchecked(&n);
            (n, s)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainComplexReport {
    pub cap: u32,
    pub points: usize,
    pub max_labels: usize,
    pub label_budget: usize,
    /// Points whose coefficient complex fails `Psi_{q+1} Psi_q = 0`.
    pub failures: Vec<MultiIndex>,
    /// Points skipped because `|S(n)|` exceeds the budget.
    pub uncertified: Vec<MultiIndex>,
    pub holds: bool,
}

/// Checks `Psi_{q+1} Psi_q = 0` in integer arithmetic on every basis
/// vector `e_{I,n}`, `|n| <= cap`, all levels.
pub fn verify_chain_complex(res: &Resolution, cap: u32) -> Result<ChainComplexReport> {
    verify_chain_complex_with(res, cap, &VerifyOptions::default())
}

pub fn verify_chain_complex_with(
    res: &Resolution,
    cap: u32,
    opts: &VerifyOptions,
) -> Result<ChainComplexReport> {
    opts.validate()?;
    let points = points_with_labels(res, cap);
    let mut report = ChainComplexReport {
        cap,
        points: points.len(),
        max_labels: points.iter().map(|p| p.1.len()).max().unwrap_or(0),
        label_budget: opts.label_budget,
        failures: Vec::new(),
        uncertified: Vec::new(),
        holds: false,
    };
    for (n, labels) in points {
        let j = labels.len();
        if j > opts.label_budget {
            report.uncertified.push(n);
        } else if !local_complex(j, opts.sign_rule).chain_ok {
            report.failures.push(n);
        }
    }
    report.holds = report.failures.is_empty() && report.uncertified.is_empty();
    Ok(report)
}

/// Coefficient complex at one lattice point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointExactness {
    pub point: MultiIndex,
    /// `S(n)`, 0-based.
    pub labels: Vec<usize>,
    /// `dims[q] = #{I in S_q(k) : n in B_I}`.
    pub dims: Vec<u64>,
    /// `ranks[q] = rank Psi_q` at `n`; empty when uncertified.
    pub ranks: Vec<u64>,
    /// `homology[0] = ker Psi_0`, `homology[q] = ker Psi_q / im Psi_{q-1}`.
    pub homology: Vec<u64>,
    pub in_ideal: bool,
    pub certified: bool,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub cap: u32,
    pub label_budget: usize,
    pub max_labels: usize,
    pub points: Vec<PointExactness>,
    pub failures: Vec<MultiIndex>,
    pub uncertified: Vec<MultiIndex>,
    pub exact: bool,
}

/// Exact integer ranks of the coefficient complex at every `|n| <= cap`.
///
/// A point passes when all homology at levels `>= 1` vanishes and the
/// level-0 kernel is everything if `z^n` is in the ideal and zero otherwise.
pub fn verify_exactness_pointwise(
    res: &Resolution,
    ideal: &MonomialIdeal,
    cap: u32,
) -> Result<ExactnessReport> {
    verify_exactness_pointwise_with(res, ideal, cap, &VerifyOptions::default())
}

pub fn verify_exactness_pointwise_with(
    res: &Resolution,
    ideal: &MonomialIdeal,
    cap: u32,
    opts: &VerifyOptions,
) -> Result<ExactnessReport> {
    opts.validate()?;
    check_dim(res.dim(), ideal.dim())?;
    let points = points_with_labels(res, cap);
    let max_labels = points.iter().map(|p| p.1.len()).max().unwrap_or(0);
    let records: Vec<PointExactness> = points
        .into_iter()
        .map(|(n, labels)| {
            let j = labels.len();
            let in_ideal = ideal.contains_unchecked(&n);
            let dims: Vec<u64> = (0..=j)
                .map(|q| binomial(j, q).map_or(u64::MAX, |v| v.min(u64::MAX as u128) as u64))
                .collect();
            let mut rec = PointExactness {
                point: n,
                labels,
                dims,
                ranks: Vec::new(),
                homology: Vec::new(),
                in_ideal,
                certified: false,
                verified: false,
            };
            if j <= opts.label_budget {
                let local = local_complex(j, opts.sign_rule);
                if let Some(ranks) = &local.ranks {
                    rec.homology = (0..=j)
                        .map(|q| {
                            let out = ranks.get(q).copied().unwrap_or(0);
                            let inc = if q == 0 { 0 } else { ranks[q - 1] };
                            rec.dims[q] - out - inc
                        })
                        .collect();
                    rec.ranks = ranks.clone();
                    rec.certified = true;
                    let kernel0 = rec.homology[0];
                    let higher_zero = rec.homology[1..].iter().all(|&h| h == 0);
                    rec.verified =
                        higher_zero && if in_ideal { kernel0 == 1 } else { kernel0 == 0 };
                }
            }
            rec
        })
        .collect();
    let failures = records
        .iter()
        .filter(|r| r.certified && !r.verified)
        .map(|r| r.point.clone())
        .collect::<Vec<_>>();
    let uncertified = records
        .iter()
        .filter(|r| !r.certified)
        .map(|r| r.point.clone())
        .collect::<Vec<_>>();
    Ok(ExactnessReport {
        cap,
        label_budget: opts.label_budget,
        max_labels,
        exact: failures.is_empty() && uncertified.is_empty(),
        points: records,
        failures,
        uncertified,
    })
}

/// `T_i` applied summand-wise: each summand is the box-constrained shift on
/// its own intersection box.
pub fn shift_apply(
    res: &Resolution,
    w: &WeightFunction,
    i: usize,
    x: &CoefficientVector<f64>,
    rule: AmplitudeRule,
) -> Result<CoefficientVector<f64>> {
    check_dim(res.dim(), w.dim())?;
    if i >= res.dim() {
        return Err(Error::InvalidInput(format!("coordinate {} out of range", i + 1)));
    }
    let mut y = CoefficientVector::new(x.level());
    for (labels, n, v) in x.iter() {
        let up = n.raised(i);
        if res.summand_box(labels)?.contains(&up) {
            let log_ratio = w.log_ratio_up(n, i);
            let a = match rule {
                AmplitudeRule::Normalized => (0.5 * log_ratio).exp(),
                AmplitudeRule::Unnormalized => log_ratio.exp(),
            };
            y.add(labels.to_vec(), up, a * v);
        }
    }
    Ok(y)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleMapReport {
    pub q: usize,
    pub cap: u32,
    /// Number of (basis vector, coordinate) pairs compared.
    pub checked: u64,
    pub max_residual: f64,
    pub uncertified: Vec<MultiIndex>,
    pub holds: bool,
}

pub const MODULE_MAP_TOLERANCE: f64 = 1e-12;

/// Checks `Psi_q T_i = T_i Psi_q` on every basis vector `e_{I,n}` of `A_q`
/// with `|n| <= cap` and every coordinate `i`.
pub fn verify_module_map(
    res: &Resolution,
    w: &WeightFunction,
    q: usize,
    cap: u32,
) -> Result<ModuleMapReport> {
    verify_module_map_with(res, w, q, cap, &VerifyOptions::default())
}

pub fn verify_module_map_with(
    res: &Resolution,
    w: &WeightFunction,
    q: usize,
    cap: u32,
    opts: &VerifyOptions,
) -> Result<ModuleMapReport> {
    opts.validate()?;
    check_dim(res.dim(), w.dim())?;
    if q >= res.len() {
        return Err(Error::InvalidInput(format!(
            "Psi_{q} is not defined for a {}-box resolution",
            res.len()
        )));
    }
    let points = points_with_labels(res, cap);
    let per_point: Vec<Result<(u64, f64, bool)>> = points
        .par_iter()
        .map(|(n, labels)| {
            let j = labels.len();
            if j > opts.label_budget {
                return Ok((0, 0.0, false));
            }
            let mut checked = 0;
            let mut worst: f64 = 0.0;
            let mut c: Vec<usize> = (0..q).collect();
            if q > j {
                return Ok((0, 0.0, true));
            }
            loop {
                let subset: Vec<usize> = c.iter().map(|&t| labels[t]).collect();
                let x = CoefficientVector::basis(subset, n.clone(), 1.0);
                for i in 0..res.dim() {
                    let lhs = psi_apply(res, q, &shift_apply(res, w, i, &x, AmplitudeRule::Normalized)?)?;
                    let rhs = shift_apply(res, w, i, &psi_apply(res, q, &x)?, opts.target_amplitude)?;
                    worst = worst.max(max_difference(&lhs, &rhs));
                    checked += 1;
                }
                if !next_colex(&mut c, j) {
                    break;
                }
            }
            Ok((checked, worst, true))
        })
        .collect();
    let mut report = ModuleMapReport {
        q,
        cap,
        checked: 0,
        max_residual: 0.0,
        uncertified: Vec::new(),
        holds: false,
    };
    for ((n, _), r) in points.iter().zip(per_point) {
        let (checked, worst, certified) = r?;
        report.checked += checked;
        report.max_residual = report.max_residual.max(worst);
        if !certified {
            report.uncertified.push(n.clone());
        }
    }
    report.holds = report.uncertified.is_empty() && report.max_residual <= MODULE_MAP_TOLERANCE;
    Ok(report)
}

/// Largest entrywise difference, relative to `max(1, |entry|)`.
fn max_difference(a: &CoefficientVector<f64>, b: &CoefficientVector<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (l, n, v) in a.iter() {
        let u = b.get(l, n);
        worst = worst.max((v - u).abs() / v.abs().max(u.abs()).max(1.0));
    }
    for (l, n, u) in b.iter() {
        if a.get(l, n) == 0.0 {
            worst = worst.max(u.abs() / u.abs().max(1.0));
        }
    }
    worst
}

/// `sum_{q >= 1} (-1)^{q-1} #{I in S_q(k) : n in B_I}`.
pub fn euler_indicator(res: &Resolution, n: &MultiIndex) -> Result<i64> {
    let j = res.labels_at(n)?.len();
    let mut total: i128 = 0;
    for q in 1..=j {
        let c = binomial(j, q)
            .and_then(|c| i128::try_from(c).ok())
            .ok_or_else(|| Error::TooLarge(format!("C({j}, {q}) overflows")))?;
        total = if q % 2 == 1 {
            total.checked_add(c)
        } else {
            total.checked_sub(c)
        }
        .ok_or_else(|| Error::TooLarge(format!("alternating sum over {j} labels overflows")))?;
    }
    i64::try_from(total).map_err(|_| Error::TooLarge("euler indicator overflows".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiNormReport {
    pub q: usize,
    /// Operator norm of `Psi_q` on the truncation.
    pub norm: f64,
    /// `sqrt((k - q)(q + 1))`.
    pub bound: f64,
    pub uncertified: Vec<MultiIndex>,
    pub within_bound: bool,
}

/// Norm of `Psi_q` on `|n| <= cap`. The basis `e_{I,n}` is orthogonal with
/// the same norm in every summand, so this is the largest norm of the
/// integer coefficient matrices.
pub fn psi_norm(res: &Resolution, q: usize, cap: u32, opts: &VerifyOptions) -> Result<PsiNormReport> {
    opts.validate()?;
    let k = res.len();
    if q >= k {
        return Err(Error::InvalidInput(format!(
            "Psi_{q} is not defined for a {k}-box resolution"
        )));
    }
    let mut norm: f64 = 0.0;
    let mut uncertified = Vec::new();
    for (n, labels) in points_with_labels(res, cap) {
        let j = labels.len();
        if j > opts.label_budget {
            uncertified.push(n);
        } else if q < j {
            norm = norm.max(local::differential_norm(j, q, opts.sign_rule));
        }
    }
    let bound = (((k - q) * (q + 1)) as f64).sqrt();
    Ok(PsiNormReport {
        q,
        norm,
        bound,
        within_bound: uncertified.is_empty() && norm <= bound * (1.0 + 1e-9),
        uncertified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{complement_cover, Shuffle};
    use crate::weights::EggDomainSpec;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::from(v)
    }

    fn diag_ideal() -> MonomialIdeal {
        MonomialIdeal::from_exponents(2, &[vec![1, 1]]).unwrap()
    }

    fn diag_resolution() -> Resolution {
        build_resolution(complement_cover(&diag_ideal())).unwrap()
    }

    #[test]
    fn levels_of_two_box_cover() {
        let res = diag_resolution();
        assert_eq!(res.len(), 2);
        assert_eq!(res.level(0).unwrap()[0].region, LatticeBox::full(2));
        assert_eq!(res.level(1).unwrap().len(), 2);
        let top = res.level(2).unwrap();
        assert_eq!(top.len(), 1);
        let sh = Shuffle::new(vec![0, 1], 2).unwrap();
        assert_eq!(top[0].region, LatticeBox::new(2, &sh, &[0, 0]).unwrap());
        assert!(res.level(3).is_err());
    }

    #[test]
    fn colex_counts_and_order() {
        let bx = |b: u32| LatticeBox::new(3, &Shuffle::new(vec![0], 3).unwrap(), &[b]).unwrap();
        let cover = BoxCover::new(3, vec![bx(1), bx(2), bx(3), bx(4)]).unwrap();
        let res = build_resolution(cover).unwrap();
        let l2: Vec<Vec<usize>> = res.level(2).unwrap().into_iter().map(|s| s.labels).collect();
        assert_eq!(
            l2,
            vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(res.level(3).unwrap().len(), 4);
        assert!(build_resolution(BoxCover::new(3, vec![]).unwrap()).is_err());
    }

    #[test]
    fn psi_sign_example() {
        let res = diag_resolution();
        // label 1 is the second smallest of {0, 1}: sign -1
        let x = CoefficientVector::basis(vec![0], mi(&[0, 0]), 3i64);
        let y = psi_apply(&res, 1, &x).unwrap();
        assert_eq!(y.get(&[0, 1], &mi(&[0, 0])), -3);
        let x = CoefficientVector::basis(vec![1], mi(&[0, 0]), 3i64);
        let y = psi_apply(&res, 1, &x).unwrap();
        assert_eq!(y.get(&[0, 1], &mi(&[0, 0])), 3);
        let y = psi_apply(&res, 0, &CoefficientVector::basis(vec![], mi(&[0, 0]), 1i64)).unwrap();
        assert_eq!(y.get(&[0], &mi(&[0, 0])), 1);
        assert_eq!(y.get(&[1], &mi(&[0, 0])), 1);
        // outside the top box nothing survives
        let x = CoefficientVector::basis(vec![0], mi(&[0, 4]), 1i64);
        assert!(psi_apply(&res, 1, &x).unwrap().is_empty());
        assert!(psi_apply(&res, 2, &CoefficientVector::<i64>::new(2)).is_err());
    }

    #[test]
    fn psi_squared_vanishes_on_basis() {
        let ideal = MonomialIdeal::from_exponents(3, &[vec![2, 1, 0], vec![0, 1, 2], vec![1, 0, 1]]).unwrap();
        let res = build_resolution(complement_cover(&ideal)).unwrap();
        for q in 0..res.len().saturating_sub(1) {
            for s in res.level(q).unwrap() {
                for n in indices_up_to(3, 4).into_iter().filter(|n| s.region.contains(n)) {
                    let x = CoefficientVector::basis(s.labels.clone(), n, 1i64);
                    let y = psi_apply(&res, q, &x).unwrap();
                    assert!(y.len() <= res.len() - q);
                    assert!(psi_apply(&res, q + 1, &y).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn chain_complex_and_sabotage() {
        let res = diag_resolution();
        assert!(verify_chain_complex(&res, 8).unwrap().holds);
        let bad = VerifyOptions {
            sign_rule: SignRule::Unsigned,
            ..Default::default()
        };
        assert!(!verify_chain_complex_with(&res, 8, &bad).unwrap().holds);
        let single = build_resolution(complement_cover(
            &MonomialIdeal::from_exponents(1, &[vec![3]]).unwrap(),
        ))
        .unwrap();
        assert_eq!(single.len(), 1);
        assert!(verify_chain_complex(&single, 8).unwrap().holds);
    }

    #[test]
    fn exactness_at_origin_and_in_ideal() {
        let res = diag_resolution();
        let rep = verify_exactness_pointwise(&res, &diag_ideal(), 6).unwrap();
        assert!(rep.exact);
        let origin = &rep.points[0];
        assert_eq!(origin.dims, vec![1, 2, 1]);
        assert_eq!(origin.ranks, vec![1, 1]);
        assert_eq!(origin.homology, vec![0, 0, 0]);
        let inside = rep.points.iter().find(|p| p.point == mi(&[1, 1])).unwrap();
        assert!(inside.in_ideal && inside.labels.is_empty());
        assert_eq!(inside.homology, vec![1]);
    }

    #[test]
    fn exactness_flags_wrong_cover() {
        // a cover of a smaller region than C(I): points of C(I) left uncovered
        let res = build_resolution(BoxCover::new(2, vec![LatticeBox::new(
            2,
            &Shuffle::new(vec![0], 2).unwrap(),
            &[0],
        )
        .unwrap()])
        .unwrap())
        .unwrap();
        let rep = verify_exactness_pointwise(&res, &diag_ideal(), 4).unwrap();
        assert!(!rep.exact);
        assert!(rep.failures.contains(&mi(&[1, 0])));
    }

    #[test]
    fn module_map_and_sabotage() {
        let res = diag_resolution();
        let ball = WeightFunction::bergman(EggDomainSpec::ball(2));
        let egg = WeightFunction::bergman(EggDomainSpec::egg(&[2.0, 1.0]).unwrap());
        for w in [&ball, &egg] {
            for q in 0..res.len() {
                let r = verify_module_map(&res, w, q, 8).unwrap();
                assert!(r.holds && r.checked > 0, "{r:?}");
            }
        }
        let bad = VerifyOptions {
            target_amplitude: AmplitudeRule::Unnormalized,
            ..Default::default()
        };
        // the top box of this cover is a single point, where T_i vanishes
        assert!(verify_module_map_with(&res, &ball, 1, 8, &bad).unwrap().holds);
        assert!(!verify_module_map_with(&res, &ball, 0, 8, &bad).unwrap().holds);
    }

    #[test]
    fn euler_matches_membership() {
        let ideal = MonomialIdeal::from_exponents(2, &[vec![2, 1], vec![0, 3]]).unwrap();
        let res = build_resolution(complement_cover(&ideal)).unwrap();
        for n in indices_up_to(2, 10) {
            let e = euler_indicator(&res, &n).unwrap();
            assert_eq!(e, if ideal.contains(&n).unwrap() { 0 } else { 1 });
        }
    }

    #[test]
    fn psi_norm_bounded() {
        let ideal = MonomialIdeal::from_exponents(3, &[vec![1, 1, 1], vec![2, 0, 0]]).unwrap();
        let res = build_resolution(complement_cover(&ideal)).unwrap();
        for q in 0..res.len() {
            let r = psi_norm(&res, q, 6, &VerifyOptions::default()).unwrap();
            assert!(r.within_bound, "{r:?}");
        }
    }
}
