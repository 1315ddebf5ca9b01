//! Shell-by-shell diagnostics of the commutators `[T_i, T_k^*]`.
//!
//! Every commutator here has at most one nonzero entry per row and column,
//! so its singular values are the absolute values of its entries and the
//! Schatten sums are plain sums over lattice points.

use rayon::prelude::*;
use serde::Serialize;

use super::{commutator_entry, CommutatorEntry};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{indices_of_degree, LatticeRegion};
use crate::weights::WeightFunction;

/// Commutator data for one ordered pair of coordinates (0-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScan {
    pub i: usize,
    pub k: usize,
    /// `shell_sup[d] = max |entry|` over sources with `|n| = d`.
    pub shell_sup: Vec<f64>,
    /// Nonzero entries. Left empty by [`schatten_scan`].
    pub entries: Vec<CommutatorEntry>,
    pub schatten: Option<PairSchatten>,
}

/// Schatten partial sums of one commutator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSchatten {
    /// `partial_sums[j][N] = S_{p_j}(N)`.
    pub partial_sums: Vec<Vec<f64>>,
    /// `(S_p(N) - S_p(N-w)) / (S_p(N/2) - S_p(N/2-w))`; `None` when both
    /// increments vanish.
    pub tail_ratio: Vec<Option<f64>>,
    /// Local decay exponent of the shell mass from a log-log fit over
    /// `[N/2, N]`; convergence needs it above 1.
    pub shell_exponent: Vec<Option<f64>>,
    pub converges: Vec<bool>,
    pub critical: CriticalEstimate,
}

/// Estimated infimum of the summable exponents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CriticalEstimate {
    /// Interpolated crossing of the tail ratio through the threshold.
    pub estimate: Option<f64>,
    pub uncertainty: Option<f64>,
    /// Largest grid value that diverges.
    pub lower: Option<f64>,
    /// Smallest grid value that converges.
    pub upper: Option<f64>,
    /// Crossing of the fitted shell exponent through 1.
    pub regression_estimate: Option<f64>,
    /// The commutator vanishes on the tail: summable for every p.
    pub finite_rank: bool,
}

/// Power fit `sup_d ~ C d^exponent` on the last third of the shells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub tail_start: u32,
    pub exponent: Option<f64>,
    pub prefactor: Option<f64>,
    pub monotone_tail: bool,
    pub finite_rank: bool,
    pub decay_observed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralScanReport {
    pub dim: usize,
    pub cap: u32,
    pub pairs: Vec<PairScan>,
    /// Maximum of the per-pair shell suprema.
    pub shell_sup: Vec<f64>,
    pub decay: DecayFit,
    pub p_grid: Vec<f64>,
    /// Worst pair: the tuple is p-summable only if every pair is.
    pub critical: Option<CriticalEstimate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchattenOptions {
    /// Only scan `[T_i, T_i^*]`.
    pub diagonal_only: bool,
    /// Tail increment width `w` in `S_p(N) - S_p(N-w)`.
    pub window: u32,
    /// A tail ratio below this counts as convergent. `0.5` corresponds to
    /// shell mass decaying like `d^{-1}`.
    pub ratio_threshold: f64,
    /// Floor for the reported uncertainty.
    pub min_uncertainty: f64,
}

impl Default for SchattenOptions {
    fn default() -> Self {
        SchattenOptions {
            diagonal_only: false,
            window: 5,
            ratio_threshold: 0.5,
            min_uncertainty: 0.2,
        }
    }
}

fn all_pairs(dim: usize, diagonal_only: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for k in 0..dim {
            if !diagonal_only || i == k {
                out.push((i, k));
            }
        }
    }
    out
}

/// Nonzero entries of every pair on the shell `|n| = d`.
fn shell_entries(
    region: &LatticeRegion,
    w: &WeightFunction,
    pairs: &[(usize, usize)],
    d: u32,
) -> Vec<Vec<CommutatorEntry>> {
    let points: Vec<_> = indices_of_degree(region.dim(), d)
        .into_iter()
        .filter(|n| region.contains(n))
        .collect();
    pairs
        .iter()
        .map(|&(i, k)| {
            points
                .iter()
                .filter_map(|n| {
                    let (target, value) = commutator_entry(i, k, region, w, n)?;
                    (value != 0.0).then(|| CommutatorEntry {
                        source: n.clone(),
                        target,
                        value,
                    })
                })
                .collect()
        })
        .collect()
}

fn sup_abs(entries: &[CommutatorEntry]) -> f64 {
    entries.iter().fold(0.0f64, |s, e| s.max(e.value.abs()))
}

fn check_scan_input(region: &LatticeRegion, w: &WeightFunction, cap: u32, min_cap: u32) -> Result<()> {
    check_dim(w.dim(), region.dim())?;
    if cap < min_cap {
        return Err(Error::InvalidInput(format!(
            "degree cap {cap} is below the minimum {min_cap}"
        )));
    }
    Ok(())
}

fn max_over_pairs(pairs: &[PairScan], cap: u32) -> Vec<f64> {
    (0..=cap as usize)
        .map(|d| pairs.iter().fold(0.0f64, |s, p| s.max(p.shell_sup[d])))
        .collect()
}

/// Shell suprema and entry tables of all `[T_i, T_k^*]` for `|n| <= cap`.
pub fn essential_normality_scan(
    region: &LatticeRegion,
    w: &WeightFunction,
    cap: u32,
) -> Result<SpectralScanReport> {
    check_scan_input(region, w, cap, 5)?;
    let pairs = all_pairs(region.dim(), false);
    let shells: Vec<Vec<Vec<CommutatorEntry>>> = (0..=cap)
        .into_par_iter()
        .map(|d| shell_entries(region, w, &pairs, d))
        .collect();
    let mut scans: Vec<PairScan> = pairs
        .iter()
        .map(|&(i, k)| PairScan {
            i,
            k,
            shell_sup: Vec::with_capacity(cap as usize + 1),
            entries: Vec::new(),
            schatten: None,
        })
        .collect();
    for shell in shells {
        for (scan, entries) in scans.iter_mut().zip(shell) {
            scan.shell_sup.push(sup_abs(&entries));
            scan.entries.extend(entries);
        }
    }
    let shell_sup = max_over_pairs(&scans, cap);
    Ok(SpectralScanReport {
        dim: region.dim(),
        cap,
        decay: fit_decay(&shell_sup),
        shell_sup,
        pairs: scans,
        p_grid: Vec::new(),
        critical: None,
    })
}

/// Schatten partial sums on a grid of exponents with a critical-exponent
/// estimate per pair.
pub fn schatten_scan(
    region: &LatticeRegion,
    w: &WeightFunction,
    p_grid: &[f64],
    cap: u32,
    options: &SchattenOptions,
) -> Result<SpectralScanReport> {
    check_scan_input(region, w, cap, 20)?;
    if p_grid.is_empty() || p_grid.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::InvalidInput("p grid must be nonempty and positive".into()));
    }
    if p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("p grid must be strictly increasing".into()));
    }
    if options.window == 0 || 2 * options.window > cap / 2 {
        return Err(Error::InvalidInput(format!(
            "tail window {} does not fit under cap {cap}",
            options.window
        )));
    }
    if !(options.ratio_threshold > 0.0 && options.ratio_threshold < 1.0) {
        return Err(Error::InvalidInput("ratio threshold must lie in (0, 1)".into()));
    }
    let pairs = all_pairs(region.dim(), options.diagonal_only);
    // per shell, per pair: (sup, shell mass for each p)
    let shells: Vec<Vec<(f64, Vec<f64>)>> = (0..=cap)
        .into_par_iter()
        .map(|d| {
            shell_entries(region, w, &pairs, d)
                .into_iter()
                .map(|entries| {
                    let masses = p_grid
                        .iter()
                        .map(|&p| entries.iter().map(|e| e.value.abs().powf(p)).sum())
                        .collect();
                    (sup_abs(&entries), masses)
                })
                .collect()
        })
        .collect();

    let scans: Vec<PairScan> = pairs
        .iter()
        .enumerate()
        .map(|(idx, &(i, k))| {
            let shell_sup: Vec<f64> = shells.iter().map(|s| s[idx].0).collect();
            let masses: Vec<Vec<f64>> = (0..p_grid.len())
                .map(|j| shells.iter().map(|s| s[idx].1[j]).collect())
                .collect();
            PairScan {
                i,
                k,
                shell_sup,
                entries: Vec::new(),
                schatten: Some(pair_schatten(&masses, p_grid, options)),
            }
        })
        .collect();

    let critical = worst_pair(scans.iter().filter_map(|s| s.schatten.as_ref()));
    let shell_sup = max_over_pairs(&scans, cap);
    Ok(SpectralScanReport {
        dim: region.dim(),
        cap,
        decay: fit_decay(&shell_sup),
        shell_sup,
        pairs: scans,
        p_grid: p_grid.to_vec(),
        critical: Some(critical),
    })
}

fn pair_schatten(masses: &[Vec<f64>], p_grid: &[f64], opts: &SchattenOptions) -> PairSchatten {
    let cap = masses[0].len() - 1;
    let half = cap / 2;
    let w = opts.window as usize;
    let partial_sums: Vec<Vec<f64>> = masses
        .iter()
        .map(|m| {
            m.iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let increment = |s: &[f64], n: usize| s[n] - s[n - w];
    let tail_ratio: Vec<Option<f64>> = partial_sums
        .iter()
        .map(|s| {
            let late = increment(s, cap);
            let early = increment(s, half);
            if early > 0.0 {
                Some(late / early)
            } else if late > 0.0 {
                Some(f64::INFINITY)
            } else {
                None
            }
        })
        .collect();
    let shell_exponent: Vec<Option<f64>> = masses
        .iter()
        .map(|m| loglog_slope(half.max(1)..=cap, m).map(|(slope, _)| -slope))
        .collect();
    let converges: Vec<bool> = tail_ratio
        .iter()
        .map(|r| r.is_none_or(|r| r < opts.ratio_threshold))
        .collect();

    let finite_rank = tail_ratio.iter().all(Option::is_none);
    let mut critical = CriticalEstimate {
        finite_rank,
        ..Default::default()
    };
    if !finite_rank {
        let log_ratio: Vec<f64> = tail_ratio
            .iter()
            .map(|r| r.map_or(f64::NEG_INFINITY, f64::ln))
            .collect();
        match converges.iter().position(|&c| c) {
            Some(0) => critical.upper = Some(p_grid[0]),
            Some(j) => {
                critical.lower = Some(p_grid[j - 1]);
                critical.upper = Some(p_grid[j]);
                critical.estimate = Some(crossing(
                    p_grid[j - 1],
                    p_grid[j],
                    log_ratio[j - 1],
                    log_ratio[j],
                    opts.ratio_threshold.ln(),
                ));
                critical.uncertainty =
                    Some(opts.min_uncertainty.max((p_grid[j] - p_grid[j - 1]) / 2.0));
            }
            None => critical.lower = p_grid.last().copied(),
        }
        critical.regression_estimate = (1..p_grid.len()).find_map(|j| {
            let (a, b) = (shell_exponent[j - 1]?, shell_exponent[j]?);
            (a <= 1.0 && b > 1.0).then(|| crossing(p_grid[j - 1], p_grid[j], a, b, 1.0))
        });
    }
    PairSchatten {
        partial_sums,
        tail_ratio,
        shell_exponent,
        converges,
        critical,
    }
}

/// Linear interpolation of the grid value where `y` crosses `level`.
fn crossing(p0: f64, p1: f64, y0: f64, y1: f64, level: f64) -> f64 {
    if !(y0.is_finite() && y1.is_finite()) || y0 == y1 {
        return 0.5 * (p0 + p1);
    }
    let t = ((level - y0) / (y1 - y0)).clamp(0.0, 1.0);
    p0 + t * (p1 - p0)
}

/// The pair with the largest critical exponent. A pair known only to
/// diverge on the whole grid dominates everything.
fn worst_pair<'a>(pairs: impl Iterator<Item = &'a PairSchatten>) -> CriticalEstimate {
    let key = |c: &CriticalEstimate| {
        if c.finite_rank {
            f64::NEG_INFINITY
        } else if c.estimate.is_none() && c.upper.is_none() {
            f64::INFINITY
        } else {
            c.estimate.or(c.upper).unwrap_or(f64::NEG_INFINITY)
        }
    };
    let mut best: Option<CriticalEstimate> = None;
    for p in pairs {
        let c = p.critical;
        if best.is_none_or(|b| key(&c) > key(&b)) {
            best = Some(c);
        }
    }
    best.unwrap_or(CriticalEstimate {
        finite_rank: true,
        ..Default::default()
    })
}

/// Least-squares slope and intercept of `ln y` against `ln d` over the
/// positive values in `range`.
fn loglog_slope(range: std::ops::RangeInclusive<usize>, y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = range
        .filter(|&d| d >= 1 && y[d] > 0.0)
        .map(|d| ((d as f64).ln(), y[d].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn fit_decay(shell_sup: &[f64]) -> DecayFit {
    let cap = shell_sup.len() - 1;
    let start = cap - cap / 3;
    let tail = &shell_sup[start..];
    let finite_rank = tail.iter().all(|&s| s == 0.0);
    let monotone_tail = tail.windows(2).all(|w| w[1] <= w[0]);
    let fit = loglog_slope(start..=cap, shell_sup);
    let exponent = fit.map(|f| f.0);
    let decay_observed = finite_rank
        || (monotone_tail && exponent.is_some_and(|e| e < 0.0) && tail[tail.len() - 1] < tail[0]);
    DecayFit {
        tail_start: start as u32,
        exponent,
        prefactor: fit.map(|f| f.1.exp()),
        monotone_tail,
        finite_rank,
        decay_observed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeBox, MonomialIdeal, Shuffle};
    use crate::weights::EggDomainSpec;

    fn disc() -> WeightFunction {
        WeightFunction::bergman(EggDomainSpec::egg(&[1.0]).unwrap())
    }

    #[test]
    fn disc_shell_sup_closed_form() {
        let r = essential_normality_scan(&LatticeRegion::full(1), &disc(), 60).unwrap();
        for (d, s) in r.shell_sup.iter().enumerate() {
            let expect = 1.0 / ((d as f64 + 1.0) * (d as f64 + 2.0));
            assert!(((s - expect) / expect).abs() < 1e-10);
        }
        assert!((r.decay.exponent.unwrap() + 2.0).abs() < 0.1);
        assert!(r.decay.decay_observed);
    }

    #[test]
    fn ball_decay_exponent() {
        let w = WeightFunction::bergman(EggDomainSpec::ball(2));
        let r = essential_normality_scan(&LatticeRegion::full(2), &w, 60).unwrap();
        assert!((r.decay.exponent.unwrap() + 1.0).abs() < 0.2, "{:?}", r.decay);
        assert!(r.decay.monotone_tail);
        assert_eq!(r.pairs.len(), 4);
    }

    #[test]
    fn finite_box_is_finite_rank() {
        let b = LatticeBox::new(2, &Shuffle::new(vec![0, 1], 2).unwrap(), &[2, 3]).unwrap();
        let w = WeightFunction::bergman(EggDomainSpec::ball(2));
        let r = essential_normality_scan(&LatticeRegion::from_box(&b), &w, 12).unwrap();
        assert!(r.shell_sup[6..].iter().all(|&s| s == 0.0));
        assert!(r.decay.finite_rank && r.decay.decay_observed);
    }

    #[test]
    fn disc_schatten_bracket() {
        let r = schatten_scan(
            &LatticeRegion::full(1),
            &disc(),
            &[0.4, 0.6],
            200,
            &SchattenOptions::default(),
        )
        .unwrap();
        let s = r.pairs[0].schatten.as_ref().unwrap();
        assert_eq!(s.converges, vec![false, true]);
        for sums in &s.partial_sums {
            assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        }
        let c = r.critical.unwrap();
        assert!((c.estimate.unwrap() - 0.5).abs() < 0.1);
    }

    #[test]
    fn ball_schatten_near_two() {
        let w = WeightFunction::bergman(EggDomainSpec::ball(2));
        let grid: Vec<f64> = (0..=12).map(|j| 1.0 + 0.25 * j as f64).collect();
        let opts = SchattenOptions {
            diagonal_only: true,
            ..Default::default()
        };
        let r = schatten_scan(&LatticeRegion::full(2), &w, &grid, 200, &opts).unwrap();
        let c = r.critical.unwrap();
        assert!((c.estimate.unwrap() - 2.0).abs() <= 0.2, "{c:?}");
        assert!(c.regression_estimate.is_some());
    }

    #[test]
    fn finite_region_schatten() {
        let ideal = MonomialIdeal::from_exponents(2, &[vec![3, 0], vec![0, 2]]).unwrap();
        let w = WeightFunction::bergman(EggDomainSpec::ball(2));
        let r = schatten_scan(
            &LatticeRegion::complement_of(ideal),
            &w,
            &[1.0, 2.0],
            20,
            &SchattenOptions::default(),
        )
        .unwrap();
        assert!(r.critical.unwrap().finite_rank);
    }

    #[test]
    fn rejects_bad_input() {
        let r = LatticeRegion::full(1);
        let o = SchattenOptions::default();
        assert!(essential_normality_scan(&r, &disc(), 4).is_err());
        assert!(schatten_scan(&r, &disc(), &[1.0], 19, &o).is_err());
        assert!(schatten_scan(&r, &disc(), &[], 40, &o).is_err());
        assert!(schatten_scan(&r, &disc(), &[2.0, 1.0], 40, &o).is_err());
        assert!(schatten_scan(&r, &disc(), &[-1.0], 40, &o).is_err());
    }
}
