//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use bergbox::lattice::{
    complement_cover, indices_up_to, prune_cover, BoxCover, LatticeRegion, MonomialIdeal,
};
use bergbox::operators::{essential_normality_scan, schatten_scan, SchattenOptions};
use bergbox::resolution::{
    build_resolution, euler_indicator, verify_chain_complex, verify_exactness_pointwise,
    verify_module_map,
};
use bergbox::weights::{isometry_residuals, omega, oracle_norm, EggDomainSpec, WeightFunction};
use common::dense::compare_commutators;
use common::*;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Runs a criterion and prints its line. A criterion that overruns its time
/// limit fails.
fn criterion(label: &str, limit: Duration, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = v.pass && in_time;
    println!(
        "criterion {label}: {} ({}; {:.2}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn ball_reduction() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in 1..=4 {
        let d = EggDomainSpec::ball(m);
        for alpha in indices_up_to(m, 20) {
            let expect = ball_norm(alpha.as_slice());
            let got = omega(&d, 0.0, &alpha).unwrap();
            worst = worst.max(((got - expect) / expect).abs());
            count += 1;
        }
    }
    verdict(worst <= 1e-12, format!("{count} indices, max rel err {worst:.2e}"))
}

fn oracle_agreement() -> Verdict {
    let mut rng = rng(2718);
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let leaves = rng.random_range(1..=5);
        let d = random_nested(&mut rng, leaves, 3);
        let alpha = random_alpha(&mut rng, leaves, 8);
        let s = rng.random_range(0.0..=3.0);
        let exact = omega(&d, s, &alpha).unwrap();
        let est = oracle_norm(&d, s, &alpha, 1_000_000, 1000 + k).unwrap();
        let z = est.z_score(exact);
        worst = worst.max(z);
        if z <= 3.0 {
            within += 1;
        }
    }
    verdict(within >= 47, format!("{within}/50 within 3 SE, max z {worst:.2}"))
}

fn isometry_identity() -> Verdict {
    let mut rng = rng(31);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for m in 1..=4 {
        for _ in 0..3 {
            let d = random_egg(&mut rng, m);
            let r = isometry_residuals(&d, 15).unwrap();
            worst = worst.max(r.max_residual);
            checked += r.checked;
        }
    }
    verdict(worst <= 1e-10, format!("{checked} checks, max residual {worst:.2e}"))
}

fn criterion_ideals() -> Vec<MonomialIdeal> {
    let mut rng = rng(2024);
    (0..200).map(|_| random_ideal(&mut rng, 4, 4, 5)).collect()
}

fn cover_correctness(ideals: &[MonomialIdeal]) -> Verdict {
    let mut mismatches = 0;
    let mut euler = 0;
    for ideal in ideals {
        let raw = complement_cover(ideal);
        let pruned = prune_cover(&raw);
        let res = build_resolution(raw.clone()).ok();
        for n in indices_up_to(ideal.dim(), 12) {
            let outside = !ideal.contains(&n).unwrap();
            if raw.contains(&n) != outside || pruned.contains(&n) != outside {
                mismatches += 1;
            }
            let e = res.as_ref().map_or(0, |r| euler_indicator(r, &n).unwrap());
            if e != outside as i64 {
                euler += 1;
            }
        }
    }
    verdict(
        mismatches == 0 && euler == 0,
        format!("{mismatches} cover mismatches, {euler} Euler indicator mismatches"),
    )
}

fn resolution_checks(ideals: &[MonomialIdeal], pruned: bool) -> Verdict {
    let mut failures = 0;
    let mut uncertified = 0;
    let mut ideals_uncertified = 0;
    let mut max_labels = 0;
    for ideal in ideals {
        let raw = complement_cover(ideal);
        let cover = if pruned { prune_cover(&raw) } else { raw };
        let res = build_resolution(cover).unwrap();
        let chain = verify_chain_complex(&res, 10).unwrap();
        let exact = verify_exactness_pointwise(&res, ideal, 10).unwrap();
        failures += chain.failures.len() + exact.failures.len();
        let u = chain.uncertified.len() + exact.uncertified.len();
        uncertified += u;
        ideals_uncertified += (u > 0) as usize;
        max_labels = max_labels.max(exact.max_labels);
    }
    verdict(
        failures == 0 && uncertified == 0,
        format!(
            "{failures} failures, {uncertified} uncertified points in {ideals_uncertified} ideals, \
             max labels per point {max_labels}"
        ),
    )
}

fn module_maps() -> Verdict {
    let mut rng = rng(77);
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    let mut checks = 0;
    for _ in 0..20 {
        let m = rng.random_range(1..=3);
        let domain = random_nested(&mut rng, m, 2);
        let s = rng.random_range(0.0..2.0);
        let w = WeightFunction::new(domain, s).unwrap();
        let ideal = random_ideal_in(&mut rng, m, 4, 5);
        let res = build_resolution(prune_cover(&complement_cover(&ideal))).unwrap();
        for q in 0..res.len() {
            let r = verify_module_map(&res, &w, q, 8).unwrap();
            worst = worst.max(r.max_residual);
            checks += r.checked;
            failed += (!r.holds) as usize;
        }
    }
    verdict(
        failed == 0 && worst <= 1e-12,
        format!("{checks} checks, {failed} failing levels, max residual {worst:.2e}"),
    )
}

fn commutator_oracle() -> Verdict {
    let mut rng = rng(8);
    let mut worst: f64 = 0.0;
    let mut regions = 0;
    for m in 1..=3 {
        for _ in 0..3 {
            let w = WeightFunction::bergman(random_nested(&mut rng, m, 2));
            let rs = [
                LatticeRegion::full(m),
                LatticeRegion::from_box(&random_box(&mut rng, m, 4)),
                LatticeRegion::complement_of(random_ideal_in(&mut rng, m, 4, 5)),
            ];
            for r in &rs {
                worst = worst.max(compare_commutators(r, &w, 8));
                regions += 1;
            }
        }
    }
    verdict(worst <= 1e-12, format!("{regions} regions, max abs err {worst:.2e}"))
}

fn schatten_threshold(p: &[f64], expect: f64, tol: f64) -> Verdict {
    let w = WeightFunction::bergman(EggDomainSpec::egg(p).unwrap());
    let grid: Vec<f64> = (0..=30).map(|k| 1.0 + 0.1 * k as f64).collect();
    let opts = SchattenOptions {
        diagonal_only: true,
        ..Default::default()
    };
    let r = schatten_scan(&LatticeRegion::full(2), &w, &grid, 1000, &opts).unwrap();
    let c = r.critical.unwrap_or_default();
    let Some(est) = c.estimate else {
        return verdict(false, format!("p={p:?}: no estimate"));
    };
    verdict(
        (est - expect).abs() <= tol,
        format!(
            "p={p:?}: estimate {est:.4} +- {:.2}, regression {:.4}, target {expect} +- {tol}",
            c.uncertainty.unwrap_or(f64::NAN),
            c.regression_estimate.unwrap_or(f64::NAN)
        ),
    )
}

fn decay_evidence() -> Verdict {
    let mut rng = rng(60);
    let w = WeightFunction::bergman(EggDomainSpec::ball(2));
    let mut monotone = 0;
    let mut exponents = Vec::new();
    for _ in 0..10 {
        let region = LatticeRegion::complement_of(random_ideal_in(&mut rng, 2, 4, 5));
        let r = essential_normality_scan(&region, &w, 60).unwrap();
        let start = r.decay.tail_start as usize;
        let pairs_ok = r
            .pairs
            .iter()
            .all(|p| p.shell_sup[start..].windows(2).all(|s| s[1] <= s[0]));
        if r.decay.monotone_tail && pairs_ok {
            monotone += 1;
        }
        if let Some(e) = r.decay.exponent {
            exponents.push(format!("{e:.2}"));
        } else {
            exponents.push("finite".into());
        }
    }
    verdict(
        monotone == 10,
        format!("{monotone}/10 monotone tails, fitted exponents [{}]", exponents.join(", ")),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let ideals = criterion_ideals();
    let raw_boxes = ideals.iter().map(|i| complement_cover(i).len()).max().unwrap_or(0);
    let pruned_boxes: Vec<BoxCover> = ideals.iter().map(|i| prune_cover(&complement_cover(i))).collect();
    let pruned_max = pruned_boxes.iter().map(BoxCover::len).max().unwrap_or(0);
    println!("criterion ideals: 200, max raw cover {raw_boxes} boxes, max pruned cover {pruned_max} boxes");

    let results = [
        criterion("1 ball reduction", secs(1), ball_reduction),
        criterion("2 oracle agreement", secs(300), oracle_agreement),
        criterion("3 isometry identity", secs(30), isometry_identity),
        criterion("4 cover correctness", secs(30), || cover_correctness(&ideals)),
        criterion("5 resolution (pruned covers)", secs(120), || resolution_checks(&ideals, true)),
        criterion("5 resolution (raw covers)", secs(120), || resolution_checks(&ideals, false)),
        criterion("6 module map", secs(60), module_maps),
        criterion("7 commutator oracle", secs(60), commutator_oracle),
        criterion("8 Schatten threshold m=2 p=(1,1)", secs(120), || {
            schatten_threshold(&[1.0, 1.0], 2.0, 0.2)
        }),
        criterion("8 Schatten threshold m=2 p=(3,1)", secs(120), || {
            schatten_threshold(&[3.0, 1.0], 3.0, 0.3)
        }),
        criterion("9 decay evidence", secs(60), decay_evidence),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} of {} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
