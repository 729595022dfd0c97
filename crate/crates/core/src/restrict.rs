//! Coefficient-level restriction along a quadratic sublattice embedding.
//!
//! An embedding is an integer matrix `E` with `E^T S E = S'` for a smaller
//! even positive definite Gram matrix `S'`. Substituting `w = E w'` into an
//! expansion collapses the dual vectors through the adjoint projection
//! `v' = E^T v`, so restriction acts on coefficients as a fiber sum over
//! `{v : E^T v = v'}` at fixed `(a, b)`. The identity
//! `v . (E w') = (E^T v) . w'` is the whole story, and `eval_series` before
//! and after restriction certifies it numerically.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::Zero;
use thiserror::Error;

use crate::coeffs::{CoeffFn, Prime, Weight};
use crate::lattice::{Index, LatticeError, QuadSpace, Rational};
use crate::maass::{is_maass, maass_lift, MaassReport, SeedFn};
use crate::symmetry::{check_symmetry, SymmetryReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RestrictError {
    #[error("embedding matrix row {row} has {got} entries, expected {expected}")]
    BadShape {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("embedding has more columns ({target_rank}) than the source rank ({source_rank})")]
    RankIncrease {
        source_rank: usize,
        target_rank: usize,
    },
    #[error("induced Gram matrix is not a valid quadratic space: {0}")]
    TargetInvalid(#[from] LatticeError),
}

/// A sublattice embedding `(Z^{m'}, S') -> (Z^m, S)` with `E^T S E = S'`.
#[derive(Debug, Clone)]
pub struct Embedding {
    source_gram: Vec<Vec<i64>>,
    matrix: Vec<Vec<i64>>,
    target: Arc<QuadSpace>,
}

impl Embedding {
    /// Validates the shape of `E` (source rank rows, target rank columns) and
    /// that the induced Gram matrix `E^T S E` is itself even and positive
    /// definite, which forces `E` to have full column rank.
    pub fn new(source: &QuadSpace, matrix: Vec<Vec<i64>>) -> Result<Self, RestrictError> {
        let m = source.rank();
        if matrix.len() != m {
            return Err(RestrictError::BadShape {
                row: 0,
                got: matrix.len(),
                expected: m,
            });
        }
        let mp = matrix.first().map_or(0, |r| r.len());
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != mp {
                return Err(RestrictError::BadShape {
                    row,
                    got: r.len(),
                    expected: mp,
                });
            }
        }
        if mp > m {
            return Err(RestrictError::RankIncrease {
                source_rank: m,
                target_rank: mp,
            });
        }
        // S' = E^T S E
        let mut target_gram = vec![vec![0i64; mp]; mp];
        for i in 0..mp {
            for j in 0..mp {
                let mut acc: i128 = 0;
                for r in 0..m {
                    for s in 0..m {
                        acc += matrix[r][i] as i128
                            * source.gram()[r][s] as i128
                            * matrix[s][j] as i128;
                    }
                }
                target_gram[i][j] =
                    i64::try_from(acc).map_err(|_| LatticeError::EntryOverflow)?;
            }
        }
        let target = Arc::new(QuadSpace::new(target_gram)?);
        Ok(Embedding {
            source_gram: source.gram().to_vec(),
            matrix,
            target,
        })
    }

    pub fn source_gram(&self) -> &[Vec<i64>] {
        &self.source_gram
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn target(&self) -> &Arc<QuadSpace> {
        &self.target
    }

    /// Adjoint projection of dual coordinates: `v' = E^T v`.
    pub fn project_dual(&self, v: &[i64]) -> Vec<i64> {
        assert!(
            v.len() == self.source_gram.len(),
            "dimension mismatch: vector of length {} against source rank {}",
            v.len(),
            self.source_gram.len()
        );
        let mp = self.target.rank();
        (0..mp)
            .map(|j| {
                let mut acc: i64 = 0;
                for (i, &vi) in v.iter().enumerate() {
                    acc += self.matrix[i][j] * vi;
                }
                acc
            })
            .collect()
    }

    /// Composition with a further embedding of the target: the matrix is
    /// `E1 * E2`.
    pub fn compose(&self, inner: &Embedding) -> Result<Embedding, RestrictError> {
        let m = self.source_gram.len();
        let mid = self.target.rank();
        let mp = inner.target.rank();
        assert_eq!(
            inner.source_gram,
            self.target.gram(),
            "composition requires matching middle quadratic space"
        );
        let mut matrix = vec![vec![0i64; mp]; m];
        for i in 0..m {
            for j in 0..mp {
                for t in 0..mid {
                    matrix[i][j] += self.matrix[i][t] * inner.matrix[t][j];
                }
            }
        }
        let source = QuadSpace::new(self.source_gram.clone()).expect("source Gram already valid");
        Embedding::new(&source, matrix)
    }
}

/// Restriction of a coefficient function: fiber sums over `E^T v = v'` at
/// fixed `(a, b)`, over the target quadratic space, with the region carried
/// over. Projection can only shrink the dual norm, so cone support projects
/// to cone support; this is asserted.
pub fn restrict_coeffs(f: &CoeffFn, emb: &Embedding) -> CoeffFn {
    assert!(
        f.qs().gram() == emb.source_gram(),
        "coefficient function does not live on the embedding's source space"
    );
    let target = emb.target().clone();
    let mut table: BTreeMap<Index, Rational> = BTreeMap::new();
    for (x, value) in f.support() {
        let projected = Index::new(x.a, emb.project_dual(&x.v), x.b);
        if f.qs().in_cone(x) {
            assert!(
                target.in_cone(&projected),
                "projection of cone point {x} left the cone"
            );
        }
        *table.entry(projected).or_insert_with(Rational::zero) += value;
    }
    table.retain(|_, v| !v.is_zero());
    let mut out = CoeffFn::new(target, f.region(), table, f.weight_hint())
        .expect("projected keys stay in region");
    if let Some(k) = f.weight_hint() {
        out = out.with_weight_hint(k);
    }
    out
}

#[derive(Debug, Clone)]
pub struct RestrictionReport {
    pub maass: MaassReport,
    pub symmetry: SymmetryReport,
}

impl RestrictionReport {
    pub fn passed(&self) -> bool {
        self.maass.passed() && self.symmetry.passed()
    }
}

/// Lifts a seed over the source lattice, restricts along the embedding, and
/// runs both coefficient checks over the target lattice. A restricted lift
/// should pass both with zero violations.
pub fn check_restriction(
    seed: &SeedFn,
    k: Weight,
    emb: &Embedding,
    a_max: i64,
    b_max: i64,
    primes: &[Prime],
) -> RestrictionReport {
    let lifted = maass_lift(seed, k, a_max, b_max);
    let restricted = restrict_coeffs(&lifted, emb);
    RestrictionReport {
        maass: is_maass(&restricted, k),
        symmetry: check_symmetry(&restricted, k, primes),
    }
}
