#![allow(dead_code)]

pub mod dense;

use bergbox::lattice::{LatticeBox, MonomialIdeal, MultiIndex, Shuffle};
use bergbox::weights::{EggDomainSpec, EggNode};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero distinct generators with entries in `0..=max_exp`, minimized.
pub fn random_ideal_in(rng: &mut ChaCha8Rng, m: usize, max_gens: usize, max_exp: u32) -> MonomialIdeal {
    let l = rng.random_range(1..=max_gens);
    let mut gens: Vec<Vec<u32>> = Vec::new();
    while gens.len() < l {
        let g: Vec<u32> = (0..m).map(|_| rng.random_range(0..=max_exp)).collect();
        if g.iter().all(|&e| e == 0) || gens.contains(&g) {
            continue;
        }
        gens.push(g);
    }
    MonomialIdeal::from_exponents(m, &gens).unwrap().minimized()
}

/// `m` uniform in `1..=max_m`, then [`random_ideal_in`].
pub fn random_ideal(rng: &mut ChaCha8Rng, max_m: usize, max_gens: usize, max_exp: u32) -> MonomialIdeal {
    let m = rng.random_range(1..=max_m);
    random_ideal_in(rng, m, max_gens, max_exp)
}

pub fn random_egg(rng: &mut ChaCha8Rng, m: usize) -> EggDomainSpec {
    let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..3.0)).collect();
    EggDomainSpec::egg(&p).unwrap()
}

/// A nested egg with exactly `leaves` coordinates and depth at most
/// `max_depth` (1 = a plain egg).
pub fn random_nested(rng: &mut ChaCha8Rng, leaves: usize, max_depth: usize) -> EggDomainSpec {
    let mut next = 0;
    let children = nested_children(rng, leaves, max_depth, &mut next);
    EggDomainSpec::new(children).unwrap()
}

fn nested_children(rng: &mut ChaCha8Rng, leaves: usize, depth: usize, next: &mut usize) -> Vec<EggNode> {
    let mut out = Vec::new();
    let mut left = leaves;
    while left > 0 {
        let chunk = rng.random_range(1..=left);
        left -= chunk;
        if depth > 1 && rng.random_bool(0.6) {
            let e = rng.random_range(0.5..2.0);
            out.push(EggNode::group(e, nested_children(rng, chunk, depth - 1, next)));
        } else {
            for _ in 0..chunk {
                *next += 1;
                out.push(EggNode::leaf(format!("z{next}"), rng.random_range(0.5..3.0)));
            }
        }
    }
    out
}

/// Multi-index with total degree uniform in `0..=max_degree`.
pub fn random_alpha(rng: &mut ChaCha8Rng, m: usize, max_degree: u32) -> MultiIndex {
    let d = rng.random_range(0..=max_degree);
    let mut v = vec![0u32; m];
    for _ in 0..d {
        v[rng.random_range(0..m)] += 1;
    }
    MultiIndex::new(v)
}

/// A box constraining a random nonempty set of coordinates.
pub fn random_box(rng: &mut ChaCha8Rng, m: usize, max_bound: u32) -> LatticeBox {
    let mut coords: Vec<usize> = (0..m).collect();
    coords.shuffle(rng);
    let q = rng.random_range(1..=m);
    let mut chosen = coords[..q].to_vec();
    chosen.sort_unstable();
    let bounds: Vec<u32> = (0..q).map(|_| rng.random_range(0..=max_bound)).collect();
    LatticeBox::new(m, &Shuffle::new(chosen, m).unwrap(), &bounds).unwrap()
}

/// `pi^m alpha! / (|alpha| + m)!` evaluated with exact integer factorials
/// up to the f64 conversion.
pub fn ball_norm(alpha: &[u32]) -> f64 {
    let m = alpha.len() as u32;
    let fact = |n: u32| (1..=n).fold(1.0f64, |a, k| a * k as f64);
    let num: f64 = alpha.iter().map(|&a| fact(a)).product();
    let d: u32 = alpha.iter().sum();
    std::f64::consts::PI.powi(m as i32) * num / fact(d + m)
}
