//! Nested egg domains `(..(sum |z_j|^{2p_j})^a + ..)^.. < 1` as a tree.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Shuffle;

/// One node of a nested egg domain.
///
/// A leaf stands for the term `|z|^{power}`; `power` is the full exponent
/// `2p`, as in the JSON schema. A group stands for `(sum of children)^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EggNode {
    Leaf { coordinate: String, power: f64 },
    Group { exponent: f64, children: Vec<EggNode> },
}

impl EggNode {
    /// A leaf `|z|^{2p}` given the half power `p`.
    pub fn leaf(coordinate: impl Into<String>, p: f64) -> Self {
        EggNode::Leaf {
            coordinate: coordinate.into(),
            power: 2.0 * p,
        }
    }

    pub fn group(exponent: f64, children: Vec<EggNode>) -> Self {
        EggNode::Group { exponent, children }
    }

    fn depth(&self) -> usize {
        match self {
            EggNode::Leaf { .. } => 0,
            EggNode::Group { children, .. } => {
                1 + children.iter().map(EggNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, f64)>) {
        match self {
            EggNode::Leaf { coordinate, power } => out.push((coordinate, *power)),
            EggNode::Group { children, .. } => {
                children.iter().for_each(|c| c.collect_leaves(out));
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            EggNode::Leaf { power, coordinate } => {
                if !(power.is_finite() && *power > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "leaf {coordinate} has nonpositive power {power}"
                    )));
                }
            }
            EggNode::Group { exponent, children } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "group exponent {exponent} is not positive"
                    )));
                }
                if children.is_empty() {
                    return Err(Error::InvalidInput("empty group".into()));
                }
                for c in children {
                    c.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Removes the leaves whose DFS position is in `drop`; empty groups
    /// disappear with them.
    fn without_leaves(&self, drop: &[bool], next: &mut usize) -> Option<EggNode> {
        match self {
            EggNode::Leaf { .. } => {
                let k = *next;
                *next += 1;
                (!drop[k]).then(|| self.clone())
            }
            EggNode::Group { exponent, children } => {
                let kept: Vec<EggNode> = children
                    .iter()
                    .filter_map(|c| c.without_leaves(drop, next))
                    .collect();
                (!kept.is_empty()).then_some(EggNode::Group {
                    exponent: *exponent,
                    children: kept,
                })
            }
        }
    }
}

/// A nested egg domain. The root is a group with exponent fixed at 1.
/// Coordinates are numbered by the depth-first order of the leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct EggDomainSpec {
    children: Vec<EggNode>,
    leaves: Vec<(String, f64)>,
}

impl EggDomainSpec {
    pub fn new(children: Vec<EggNode>) -> Result<Self> {
        let root = EggNode::Group {
            exponent: 1.0,
            children,
        };
        root.validate()?;
        let mut leaves = Vec::new();
        root.collect_leaves(&mut leaves);
        let mut seen = HashSet::new();
        for (name, _) in &leaves {
            if !seen.insert(*name) {
                return Err(Error::InvalidInput(format!(
                    "coordinate label {name} appears twice"
                )));
            }
        }
        let leaves = leaves.into_iter().map(|(n, p)| (n.to_owned(), p)).collect();
        let EggNode::Group { children, .. } = root else {
            unreachable!()
        };
        Ok(EggDomainSpec { children, leaves })
    }

    /// `Omega_1 = { sum |z_j|^{2 p_j} < 1 }` with coordinates `z1..zm`.
    pub fn egg(p: &[f64]) -> Result<Self> {
        Self::new(
            p.iter()
                .enumerate()
                .map(|(j, &p)| EggNode::leaf(format!("z{}", j + 1), p))
                .collect(),
        )
    }

    /// The unit ball of `C^m`.
    pub fn ball(m: usize) -> Self {
        Self::egg(&vec![1.0; m]).expect("ball is a valid egg")
    }

    pub fn children(&self) -> &[EggNode] {
        &self.children
    }

    /// Number of complex coordinates (leaves).
    pub fn dim(&self) -> usize {
        self.leaves.len()
    }

    /// `1` for `Omega_1`, `2` for `Omega_2`, and so on.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(EggNode::depth).max().unwrap_or(0)
    }

    pub fn coordinate_names(&self) -> Vec<&str> {
        self.leaves.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Leaf half powers `p_j` in coordinate order.
    pub fn half_powers(&self) -> Vec<f64> {
        self.leaves.iter().map(|(_, pw)| pw / 2.0).collect()
    }

    /// The slice `{ z_j = 0 : j in shuffle }`, i.e. the same tree with those
    /// leaves removed. `None` when nothing is left.
    pub fn restrict(&self, shuffle: &Shuffle) -> Result<Option<EggDomainSpec>> {
        let mut drop = vec![false; self.dim()];
        for &j in shuffle.indices() {
            if j >= self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: j + 1,
                });
            }
            drop[j] = true;
        }
        let mut next = 0;
        let kept: Vec<EggNode> = self
            .children
            .iter()
            .filter_map(|c| c.without_leaves(&drop, &mut next))
            .collect();
        if kept.is_empty() {
            Ok(None)
        } else {
            EggDomainSpec::new(kept).map(Some)
        }
    }

    /// Value of the nested sum `F` at the leaf terms `u_j = |z_j|^{2p_j}`.
    /// The domain is `{F < 1}`.
    pub(crate) fn evaluate_terms(&self, u: &[f64]) -> f64 {
        fn eval(node: &EggNode, u: &[f64], next: &mut usize) -> f64 {
            match node {
                EggNode::Leaf { .. } => {
                    let v = u[*next];
                    *next += 1;
                    v
                }
                EggNode::Group { exponent, children } => {
                    let sum: f64 = children.iter().map(|c| eval(c, u, next)).sum();
                    sum.powf(*exponent)
                }
            }
        }
        let mut next = 0;
        self.children.iter().map(|c| eval(c, u, &mut next)).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootJson {
    exponent: f64,
    children: Vec<EggNode>,
}

impl Serialize for EggDomainSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RootJson {
            exponent: 1.0,
            children: self.children.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EggDomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RootJson::deserialize(d)?;
        if raw.exponent != 1.0 {
            return Err(serde::de::Error::custom(format!(
                "root exponent must be 1, got {}",
                raw.exponent
            )));
        }
        EggDomainSpec::new(raw.children).map_err(serde::de::Error::custom)
    }
}
