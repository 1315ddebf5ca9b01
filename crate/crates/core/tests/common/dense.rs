use std::collections::HashMap;

use bergbox::lattice::{indices_up_to, LatticeRegion, MultiIndex};
use bergbox::operators::commutator_entries;
use bergbox::weights::WeightFunction;
use nalgebra::DMatrix;

/// Dense matrices of the shifts on `{n in region : |n| <= cap + 1}`,
/// built from plain norm ratios.
pub struct Dense {
    pub index: HashMap<MultiIndex, usize>,
    pub points: Vec<MultiIndex>,
    pub shifts: Vec<DMatrix<f64>>,
}

pub fn dense_shifts(region: &LatticeRegion, w: &WeightFunction, cap: u32) -> Dense {
    let m = region.dim();
    let points: Vec<MultiIndex> = indices_up_to(m, cap + 1)
        .into_iter()
        .filter(|n| region.contains(n))
        .collect();
    let index: HashMap<MultiIndex, usize> =
        points.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect();
    let shifts = (0..m)
        .map(|i| {
            let mut t = DMatrix::zeros(points.len(), points.len());
            for (col, n) in points.iter().enumerate() {
                let up = n.raised(i);
                if let Some(&row) = index.get(&up) {
                    t[(row, col)] = (w.omega(&up).unwrap() / w.omega(n).unwrap()).sqrt();
                }
            }
            t
        })
        .collect();
    Dense {
        index,
        points,
        shifts,
    }
}

/// Compares `[T_i, T_k^*]` with the sparse table on columns `|n| <= cap`,
/// where the truncation does not cut the two-step compositions.
pub fn compare_commutators(region: &LatticeRegion, w: &WeightFunction, cap: u32) -> f64 {
    let dense = dense_shifts(region, w, cap);
    let m = region.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for k in 0..m {
            let (ti, tk) = (&dense.shifts[i], &dense.shifts[k]);
            let c = ti * tk.transpose() - tk.transpose() * ti;
            let table = commutator_entries(i, k, region, w, cap).unwrap();
            let sparse: HashMap<(usize, usize), f64> = table
                .entries
                .iter()
                .map(|e| ((dense.index[&e.target], dense.index[&e.source]), e.value))
                .collect();
            for (col, n) in dense.points.iter().enumerate() {
                if n.degree() > cap as u64 {
                    continue;
                }
                for row in 0..dense.points.len() {
                    let s = sparse.get(&(row, col)).copied().unwrap_or(0.0);
                    worst = worst.max((c[(row, col)] - s).abs());
                }
            }
            for e in &table.entries {
                assert!(e.source.degree() <= cap as u64);
            }
        }
    }
    worst
}
