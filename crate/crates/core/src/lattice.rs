//! Multi-indices, shuffles, boxes and monomial ideals.
//!
//! Coordinates are 0-based everywhere inside the crate. Anything that is
//! serialized for a report (shuffles in particular) is written 1-based.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

/// An exponent vector `n = (n^1, ..., n^m)` in `N^m`.
///
/// Ordered by graded lexicographic order: total degree first, then the
/// plain lexicographic order of the exponent vectors.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit vector `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|n|`.
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    /// `n + e_i`.
    pub fn raised(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// `n - e_i`, or `None` when the coordinate is already zero.
    pub fn lowered(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(MultiIndex(v))
    }

    /// Componentwise `self <= other`, i.e. `z^self` divides `z^other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All multi-indices of exact degree `d` in `dim` variables, lexicographically
/// ascending.
pub fn indices_of_degree(dim: usize, d: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == dim {
            prefix.push(d);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=d {
            prefix.push(first);
            rec(dim, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if d == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    rec(dim, d, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// All multi-indices with `|n| <= cap`, in graded lexicographic order.
pub fn indices_up_to(dim: usize, cap: u32) -> Vec<MultiIndex> {
    (0..=cap).flat_map(|d| indices_of_degree(dim, d)).collect()
}

/// A strictly increasing list of coordinates (a q-shuffle of `{1..m}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Shuffle(Vec<usize>);

impl Shuffle {
    /// Builds a shuffle from 0-based coordinates.
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "shuffle {indices:?} is not strictly increasing"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidInput(format!(
                    "shuffle entry {} exceeds dimension {dim}",
                    last + 1
                )));
            }
        }
        Ok(Shuffle(indices))
    }

    /// Builds a shuffle from 1-based coordinates, as written in reports.
    pub fn from_one_based(indices: &[usize], dim: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidInput("1-based shuffle contains 0".into()));
        }
        Shuffle::new(indices.iter().map(|&j| j - 1).collect(), dim)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }
}

/// All q-shuffles of `{0..dim-1}` in lexicographic order.
pub fn shuffles(q: usize, dim: usize) -> Vec<Shuffle> {
    fn rec(start: usize, q: usize, dim: usize, cur: &mut Vec<usize>, out: &mut Vec<Shuffle>) {
        if cur.len() == q {
            out.push(Shuffle(cur.clone()));
            return;
        }
        for j in start..dim {
            cur.push(j);
            rec(j + 1, q, dim, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, q, dim, &mut Vec::new(), &mut out);
    out
}

/// The box `{ n : n^{j^i} <= b^i }` attached to a shuffle and bounds.
///
/// Stored as one optional limit per coordinate, so containment and
/// intersection are per-coordinate comparisons.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    limits: Vec<Option<u32>>,
}

impl LatticeBox {
    pub fn new(dim: usize, shuffle: &Shuffle, bounds: &[u32]) -> Result<Self> {
        check_dim(shuffle.len(), bounds.len())?;
        if let Some(&last) = shuffle.indices().last() {
            if last >= dim {
                return Err(Error::InvalidInput(format!(
                    "box constrains coordinate {} in dimension {dim}",
                    last + 1
                )));
            }
        }
        let mut limits = vec![None; dim];
        for (&j, &b) in shuffle.indices().iter().zip(bounds) {
            limits[j] = Some(b);
        }
        Ok(LatticeBox { limits })
    }

    /// The whole lattice `N^dim` (empty shuffle).
    pub fn full(dim: usize) -> Self {
        LatticeBox {
            limits: vec![None; dim],
        }
    }

    pub fn from_limits(limits: Vec<Option<u32>>) -> Self {
        LatticeBox { limits }
    }

    pub fn dim(&self) -> usize {
        self.limits.len()
    }

    pub fn limits(&self) -> &[Option<u32>] {
        &self.limits
    }

    pub fn limit(&self, j: usize) -> Option<u32> {
        self.limits[j]
    }

    pub fn shuffle(&self) -> Shuffle {
        Shuffle(
            self.limits
                .iter()
                .enumerate()
                .filter_map(|(j, b)| b.map(|_| j))
                .collect(),
        )
    }

    pub fn bounds(&self) -> Vec<u32> {
        self.limits.iter().filter_map(|b| *b).collect()
    }

    /// Membership of a multi-index; dimensions are assumed to agree.
    pub fn contains(&self, n: &MultiIndex) -> bool {
        self.limits
            .iter()
            .zip(n.as_slice())
            .all(|(b, &x)| b.is_none_or(|b| x <= b))
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        self.limits
            .iter()
            .zip(&other.limits)
            .all(|(mine, theirs)| match (mine, theirs) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(a), Some(b)) => b <= a,
            })
    }

    pub fn intersect(&self, other: &LatticeBox) -> LatticeBox {
        let limits = self
            .limits
            .iter()
            .zip(&other.limits)
            .map(|(a, b)| match (a, b) {
                (None, x) | (x, None) => *x,
                (Some(a), Some(b)) => Some(*a.min(b)),
            })
            .collect();
        LatticeBox { limits }
    }

    /// Whether every coordinate is constrained (the box is finite).
    pub fn is_finite(&self) -> bool {
        self.limits.iter().all(Option::is_some)
    }

    /// The pure-power ideal `<z_j^{b_j+1}>` whose complement is this box.
    pub fn defining_ideal(&self) -> MonomialIdeal {
        let dim = self.dim();
        let generators = self
            .limits
            .iter()
            .enumerate()
            .filter_map(|(j, b)| {
                b.map(|b| {
                    let mut v = vec![0; dim];
                    v[j] = b + 1;
                    MultiIndex(v)
                })
            })
            .collect();
        MonomialIdeal { dim, generators }
    }
}

impl fmt::Debug for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .limits
            .iter()
            .enumerate()
            .filter_map(|(j, b)| b.map(|b| format!("n{}<={}", j + 1, b)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for LatticeBox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Box", 2)?;
        st.serialize_field("shuffle", &self.shuffle().one_based())?;
        st.serialize_field("bounds", &self.bounds())?;
        st.end()
    }
}

/// Intersection of a list of boxes; the empty list gives the full lattice.
pub fn box_intersect(dim: usize, boxes: &[LatticeBox]) -> Result<LatticeBox> {
    let mut acc = LatticeBox::full(dim);
    for b in boxes {
        check_dim(dim, b.dim())?;
        acc = acc.intersect(b);
    }
    Ok(acc)
}

/// A monomial ideal given by generator exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialIdeal {
    dim: usize,
    generators: Vec<MultiIndex>,
}

impl MonomialIdeal {
    /// Rejects generators of the wrong length and duplicated generators.
    pub fn new(dim: usize, generators: Vec<MultiIndex>) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &generators {
            check_dim(dim, g.dim())?;
            if !seen.insert(g.clone()) {
                return Err(Error::InvalidInput(format!("duplicate generator {g}")));
            }
        }
        Ok(MonomialIdeal { dim, generators })
    }

    pub fn from_exponents(dim: usize, generators: &[Vec<u32>]) -> Result<Self> {
        Self::new(
            dim,
            generators.iter().map(|g| MultiIndex(g.clone())).collect(),
        )
    }

    /// The zero ideal; its complement is all of `N^dim`.
    pub fn zero(dim: usize) -> Self {
        MonomialIdeal {
            dim,
            generators: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[MultiIndex] {
        &self.generators
    }

    /// Drops every generator divisible by another one. Survivors keep their
    /// original relative order.
    pub fn minimized(&self) -> MonomialIdeal {
        let generators = self
            .generators
            .iter()
            .enumerate()
            .filter(|(k, g)| {
                !self
                    .generators
                    .iter()
                    .enumerate()
                    .any(|(l, h)| l != *k && h.divides(g))
            })
            .map(|(_, g)| g.clone())
            .collect();
        MonomialIdeal {
            dim: self.dim,
            generators,
        }
    }

    pub fn is_minimized(&self) -> bool {
        self.minimized().generators.len() == self.generators.len()
    }

    /// Whether the ideal contains the constant 1.
    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(MultiIndex::is_zero)
    }

    /// `z^n` belongs to the ideal iff some generator divides it.
    pub fn contains(&self, n: &MultiIndex) -> Result<bool> {
        check_dim(self.dim, n.dim())?;
        Ok(self.contains_unchecked(n))
    }

    pub(crate) fn contains_unchecked(&self, n: &MultiIndex) -> bool {
        self.generators.iter().any(|g| g.divides(n))
    }
}

pub fn ideal_contains(ideal: &MonomialIdeal, n: &MultiIndex) -> Result<bool> {
    ideal.contains(n)
}

/// A finite family of boxes whose union is meant to be some `C(I)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCover {
    dim: usize,
    boxes: Vec<LatticeBox>,
}

impl BoxCover {
    pub fn new(dim: usize, boxes: Vec<LatticeBox>) -> Result<Self> {
        for b in &boxes {
            check_dim(dim, b.dim())?;
        }
        Ok(BoxCover { dim, boxes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[LatticeBox] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Membership in the union of the boxes.
    pub fn contains(&self, n: &MultiIndex) -> bool {
        self.boxes.iter().any(|b| b.contains(n))
    }
}

/// Box cover of the complementary space `C(I)`.
///
/// Every tuple `s in {1..m}^l` yields the box constraining the coordinates
/// `{s_1..s_l}`, with bound `min{ alpha_i^{s_i} - 1 : s_i = j }` on
/// coordinate `j`. Tuples hitting a zero exponent give empty boxes and are
/// skipped. Tuples are walked in lexicographic order and repeated boxes are
/// kept once, at their first occurrence. The ideal is minimized first.
pub fn complement_cover(ideal: &MonomialIdeal) -> BoxCover {
    let dim = ideal.dim();
    let ideal = ideal.minimized();
    let gens = ideal.generators();
    if ideal.is_unit() {
        return BoxCover {
            dim,
            boxes: Vec::new(),
        };
    }
    let l = gens.len();
    let mut boxes = Vec::new();
    let mut seen = HashSet::new();
    if dim == 0 {
        // N^0 is a single point and the only proper monomial ideal is zero.
        return BoxCover {
            dim,
            boxes: vec![LatticeBox::full(0)],
        };
    }
    let mut tuple = vec![0usize; l];
    loop {
        let mut limits: Vec<Option<u32>> = vec![None; dim];
        let mut empty = false;
        for (g, &j) in gens.iter().zip(&tuple) {
            let a = g[j];
            if a == 0 {
                empty = true;
                break;
            }
            let b = a - 1;
            limits[j] = Some(limits[j].map_or(b, |old| old.min(b)));
        }
        if !empty {
            let b = LatticeBox { limits };
            if seen.insert(b.clone()) {
                boxes.push(b);
            }
        }
        // next tuple in lexicographic order
        let mut pos = l;
        loop {
            if pos == 0 {
                return BoxCover { dim, boxes };
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < dim {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Removes every box contained in another box of the cover. Among equal
/// boxes the first is kept.
pub fn prune_cover(cover: &BoxCover) -> BoxCover {
    let boxes = &cover.boxes;
    let kept = boxes
        .iter()
        .enumerate()
        .filter(|(k, b)| {
            !boxes.iter().enumerate().any(|(l, other)| {
                l != *k && other.contains_box(b) && (other != *b || l < *k)
            })
        })
        .map(|(_, b)| b.clone())
        .collect();
    BoxCover {
        dim: cover.dim,
        boxes: kept,
    }
}

/// A lattice subset given as the complement `C(J)` of a monomial ideal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeRegion {
    ideal: MonomialIdeal,
}

impl LatticeRegion {
    pub fn complement_of(ideal: MonomialIdeal) -> Self {
        LatticeRegion { ideal }
    }

    /// The whole lattice, as the complement of the zero ideal.
    pub fn full(dim: usize) -> Self {
        LatticeRegion {
            ideal: MonomialIdeal::zero(dim),
        }
    }

    pub fn from_box(b: &LatticeBox) -> Self {
        LatticeRegion {
            ideal: b.defining_ideal(),
        }
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim()
    }

    pub fn ideal(&self) -> &MonomialIdeal {
        &self.ideal
    }

    pub fn contains(&self, n: &MultiIndex) -> bool {
        n.dim() == self.dim() && !self.ideal.contains_unchecked(n)
    }

    /// Whether the region is finite, i.e. every coordinate has a pure power
    /// among the generators.
    pub fn is_finite(&self) -> bool {
        (0..self.dim()).all(|j| {
            self.ideal
                .generators()
                .iter()
                .any(|g| g.as_slice().iter().enumerate().all(|(l, &x)| l == j || x == 0))
        })
    }
}

/// Members of the region with `|n| <= cap`, in graded lexicographic order.
pub fn enumerate_region(region: &LatticeRegion, cap: u32) -> Vec<MultiIndex> {
    if region.ideal.is_unit() {
        return Vec::new();
    }
    indices_up_to(region.dim(), cap)
        .into_iter()
        .filter(|n| region.contains(n))
        .collect()
}
