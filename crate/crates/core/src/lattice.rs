//! Exact arithmetic on the quadratic space `(Z^m, S)` and its index lattice.
//!
//! A quadratic space is described by an even positive definite integral Gram
//! matrix `S` of rank `m`. A Fourier index is an integer triple `(a, v, b)`
//! with `v` of length `m`; `v` encodes the dual-lattice vector `S^{-1} v`, so
//! "the dual vector is divisible by `n`" is the plain integer condition
//! `n | v`. The cone consists of the indices with `a, b >= 0` and
//! `2ab - v^T S^{-1} v >= 0`; holomorphic Fourier expansions are supported
//! there.
//!
//! Everything here is exact: `i64`/`i128` for lattice data, `BigRational` for
//! quadratic form values. No floating point.

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("Gram matrix row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("Gram matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("Gram matrix is not even: diagonal entry S[{i}][{i}] = {value} is odd")]
    NotEven { i: usize, value: i64 },
    #[error("Gram matrix is not positive definite: leading {k}x{k} minor is not positive")]
    NotPositiveDefinite { k: usize },
    #[error("Gram matrix data exceeds the 64-bit range")]
    EntryOverflow,
}

/// An even positive definite quadratic space of rank `m >= 0`.
///
/// Stores the Gram matrix together with its exact rational inverse and the
/// integer adjugate/determinant pair, which lets the hot cone tests run in
/// plain integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSpace {
    gram: Vec<Vec<i64>>,
    inverse: Vec<Vec<Rational>>,
    adjugate: Vec<Vec<i64>>,
    det: i64,
}

impl QuadSpace {
    /// Validates symmetry, evenness of the diagonal and positive definiteness
    /// (all leading principal minors strictly positive), then caches the exact
    /// inverse. The rank-zero space (empty matrix) is legal.
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let m = gram.len();
        for (row, r) in gram.iter().enumerate() {
            if r.len() != m {
                return Err(LatticeError::NotSquare {
                    row,
                    got: r.len(),
                    expected: m,
                });
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric { i, j });
                }
            }
        }
        for i in 0..m {
            if gram[i][i] % 2 != 0 {
                return Err(LatticeError::NotEven {
                    i,
                    value: gram[i][i],
                });
            }
        }

        // Gauss-Jordan over exact rationals, no pivoting. Without row swaps
        // the k-th pivot equals minor_k / minor_{k-1}, so demanding positive
        // pivots is exactly the leading-principal-minor test.
        let mut aug: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                (0..2 * m)
                    .map(|j| {
                        if j < m {
                            Rational::from_integer(BigInt::from(gram[i][j]))
                        } else if j == m + i {
                            Rational::from_integer(BigInt::from(1))
                        } else {
                            Rational::from_integer(BigInt::from(0))
                        }
                    })
                    .collect()
            })
            .collect();
        let zero = Rational::from_integer(BigInt::from(0));
        let mut det = Rational::from_integer(BigInt::from(1));
        for k in 0..m {
            let pivot = aug[k][k].clone();
            if pivot <= zero {
                return Err(LatticeError::NotPositiveDefinite { k: k + 1 });
            }
            det *= &pivot;
            for j in 0..2 * m {
                aug[k][j] /= &pivot;
            }
            for i in 0..m {
                if i != k && aug[i][k] != zero {
                    let factor = aug[i][k].clone();
                    for j in 0..2 * m {
                        let sub = &factor * &aug[k][j];
                        aug[i][j] -= sub;
                    }
                }
            }
        }
        let inverse: Vec<Vec<Rational>> = aug.iter().map(|r| r[m..].to_vec()).collect();
        debug_assert!(det.is_integer());
        let det_i64 = int_to_i64(det.numer()).ok_or(LatticeError::EntryOverflow)?;
        let mut adjugate = Vec::with_capacity(m);
        for row in &inverse {
            let mut adj_row = Vec::with_capacity(m);
            for q in row {
                let adj = q * Rational::from_integer(BigInt::from(det_i64));
                debug_assert!(adj.is_integer(), "adjugate entry not integral");
                adj_row.push(int_to_i64(adj.numer()).ok_or(LatticeError::EntryOverflow)?);
            }
            adjugate.push(adj_row);
        }

        Ok(QuadSpace {
            gram,
            inverse,
            adjugate,
            det: det_i64,
        })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    /// The exact rational inverse of the Gram matrix.
    pub fn inverse(&self) -> &[Vec<Rational>] {
        &self.inverse
    }

    /// `2ab - v^T S^{-1} v` as an exact rational.
    pub fn norm2(&self, x: &Index) -> Rational {
        self.check_dim(&x.v);
        let numer = 2 * x.a as i128 * x.b as i128 * self.det as i128 - self.adj_form(&x.v);
        Rational::new(BigInt::from(numer), BigInt::from(self.det))
    }

    /// Cone membership: `a, b >= 0` and `norm2 >= 0`.
    pub fn in_cone(&self, x: &Index) -> bool {
        self.check_dim(&x.v);
        x.a >= 0 && x.b >= 0 && 2 * x.a as i128 * x.b as i128 * self.det as i128 >= self.adj_form(&x.v)
    }

    /// Pairing of the dual vectors encoded by `u` and `v`: `u^T S^{-1} v`.
    pub fn dual_pairing(&self, u: &[i64], v: &[i64]) -> Rational {
        self.check_dim(u);
        self.check_dim(v);
        let mut numer: i128 = 0;
        for i in 0..u.len() {
            for j in 0..v.len() {
                numer += u[i] as i128 * self.adjugate[i][j] as i128 * v[j] as i128;
            }
        }
        Rational::new(BigInt::from(numer), BigInt::from(self.det))
    }

    /// `v^T adj(S) v`, so that `S^{-1}[v] = adj_form(v) / det`.
    fn adj_form(&self, v: &[i64]) -> i128 {
        let mut acc: i128 = 0;
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += v[i] as i128 * self.adjugate[i][j] as i128 * v[j] as i128;
            }
        }
        acc
    }

    /// All integer vectors `v` with `S^{-1}[v] <= t`, in ascending
    /// lexicographic order. For `t < 0` the list is empty; for rank 0 it is
    /// the single empty vector.
    pub fn dual_vectors_within(&self, t: i64) -> Vec<Vec<i64>> {
        if t < 0 {
            return Vec::new();
        }
        let m = self.rank();
        if m == 0 {
            return vec![Vec::new()];
        }
        // v_i^2 <= t * S_ii bounds each coordinate inside the ellipsoid.
        let bounds: Vec<i64> = (0..m).map(|i| isqrt(t.saturating_mul(self.gram[i][i]))).collect();
        let mut out = Vec::new();
        let mut current = vec![0i64; m];
        self.collect_dual(&bounds, t as i128 * self.det as i128, 0, &mut current, &mut out);
        out
    }

    fn collect_dual(
        &self,
        bounds: &[i64],
        limit: i128,
        pos: usize,
        current: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if pos == bounds.len() {
            if self.adj_form(current) <= limit {
                out.push(current.clone());
            }
            return;
        }
        for c in -bounds[pos]..=bounds[pos] {
            current[pos] = c;
            self.collect_dual(bounds, limit, pos + 1, current, out);
        }
        current[pos] = 0;
    }

    /// All cone indices in the box `0 <= a <= a_max`, `0 <= b <= b_max`, in
    /// ascending lexicographic order on `(b, a, v)`. The `v` range for each
    /// `(a, b)` is finite because the dual form is positive definite.
    pub fn enumerate_cone(&self, a_max: i64, b_max: i64) -> Vec<Index> {
        assert!(a_max >= 0 && b_max >= 0, "box bounds must be non-negative");
        let mut out = Vec::new();
        let mut cache: Vec<Option<Vec<Vec<i64>>>> = Vec::new();
        for b in 0..=b_max {
            for a in 0..=a_max {
                let t = 2 * a * b;
                let ti = t as usize;
                if cache.len() <= ti {
                    cache.resize(ti + 1, None);
                }
                if cache[ti].is_none() {
                    cache[ti] = Some(self.dual_vectors_within(t));
                }
                for v in cache[ti].as_ref().unwrap() {
                    out.push(Index::new(a, v.clone(), b));
                }
            }
        }
        out
    }

    fn check_dim(&self, v: &[i64]) {
        assert!(
            v.len() == self.rank(),
            "dimension mismatch: vector of length {} against rank {}",
            v.len(),
            self.rank()
        );
    }
}

/// A point `(a, v, b)` of the index lattice `Z x Z^m x Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Index {
    pub a: i64,
    pub v: Vec<i64>,
    pub b: i64,
}

impl Index {
    pub fn new(a: i64, v: Vec<i64>, b: i64) -> Self {
        Index { a, v, b }
    }

    pub fn zero(m: usize) -> Self {
        Index::new(0, vec![0; m], 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.v.iter().all(|&c| c == 0)
    }

    /// The largest `n` dividing every component; `0` for the zero index.
    pub fn content(&self) -> u64 {
        let mut g = num::integer::gcd(self.a.unsigned_abs(), self.b.unsigned_abs());
        for &c in &self.v {
            g = num::integer::gcd(g, c.unsigned_abs());
        }
        g
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn scale(&self, n: u64) -> Index {
        let n = n as i64;
        Index::new(self.a * n, self.v.iter().map(|&c| c * n).collect(), self.b * n)
    }

    /// Componentwise quotient when `n` divides the content, `None` otherwise.
    /// The zero index divides exactly by everything.
    pub fn divide_exact(&self, n: u64) -> Option<Index> {
        assert!(n >= 1, "divisor must be positive");
        if self.is_zero() {
            return Some(self.clone());
        }
        if self.content() % n != 0 {
            return None;
        }
        let n = n as i64;
        Some(Index::new(
            self.a / n,
            self.v.iter().map(|&c| c / n).collect(),
            self.b / n,
        ))
    }

    /// Writes a nonzero index as `l * x0` with `x0` primitive, `l` the content.
    ///
    /// Panics on the zero index, whose content is 0.
    pub fn decompose_primitive(&self) -> (u64, Index) {
        assert!(!self.is_zero(), "zero index has no primitive part");
        let l = self.content();
        (l, self.divide_exact(l).unwrap())
    }
}

// Sort order is lexicographic on (b, a, v); this is the enumeration and
// serialization order used everywhere downstream.
impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        self.b
            .cmp(&other.b)
            .then(self.a.cmp(&other.a))
            .then_with(|| self.v.cmp(&other.v))
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},[", self.a)?;
        for (i, c) in self.v.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, "],{})", self.b)
    }
}

/// Sorted list of the positive divisors of `n >= 1`.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors requires n >= 1");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Integer square root of a non-negative `i64`.
pub(crate) fn isqrt(n: i64) -> i64 {
    debug_assert!(n >= 0);
    (n as u64).isqrt() as i64
}

fn int_to_i64(n: &BigInt) -> Option<i64> {
    use num::ToPrimitive;
    n.to_i64()
}
