//! Shared helpers for the property suites: seeded randomness and independent
//! dense-elimination oracles. Nothing here may call into the sparse solver it
//! is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use maass_core::{CoeffFn, Index, QuadSpace, Rational, Region, SeedFn, SeedKey};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Small random rational, occasionally zero.
pub fn rand_rational(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

pub fn rand_nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let v = rand_rational(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// The four Gram matrices the acceptance grid uses.
pub fn test_spaces() -> Vec<Arc<QuadSpace>> {
    vec![
        Arc::new(QuadSpace::new(vec![]).unwrap()),
        Arc::new(QuadSpace::new(vec![vec![2]]).unwrap()),
        Arc::new(QuadSpace::new(vec![vec![4]]).unwrap()),
        Arc::new(QuadSpace::new(vec![vec![2, 1], vec![1, 2]]).unwrap()),
    ]
}

/// Random seed supported on roughly `density` of the slice keys with
/// `n <= n_max`.
pub fn random_seed(qs: &Arc<QuadSpace>, n_max: i64, density: f64, rng: &mut ChaCha8Rng) -> SeedFn {
    let mut table = BTreeMap::new();
    for n in 0..=n_max {
        for v in qs.dual_vectors_within(2 * n) {
            if rng.gen_bool(density) {
                table.insert(SeedKey::new(n, v), rand_nonzero_rational(rng));
            }
        }
    }
    SeedFn::new(qs.clone(), table).unwrap()
}

/// Random coefficient function supported on lattice points of the region box
/// (not necessarily cone points).
pub fn random_coefffn(
    qs: &Arc<QuadSpace>,
    region: Region,
    points: usize,
    rng: &mut ChaCha8Rng,
) -> CoeffFn {
    let mut table = BTreeMap::new();
    for _ in 0..points {
        let a = rng.gen_range(0..=region.a_max);
        let b = rng.gen_range(0..=region.b_max);
        let v: Vec<i64> = (0..qs.rank()).map(|_| rng.gen_range(-6..=6)).collect();
        table.insert(Index::new(a, v, b), rand_nonzero_rational(rng));
    }
    CoeffFn::new(qs.clone(), region, table, None).unwrap()
}

/// Dense Gaussian elimination rank, used as an independent oracle against the
/// sparse solver. Rows are shuffled first so the elimination order differs
/// from the solver's.
pub fn dense_rank_shuffled(mut rows: Vec<Vec<Rational>>, rng: &mut ChaCha8Rng) -> usize {
    rows.shuffle(rng);
    dense_rank(rows)
}

pub fn dense_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot_row) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &pivot;
                for c in col..ncols {
                    let sub = &factor * &rows[rank][c];
                    rows[r][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
