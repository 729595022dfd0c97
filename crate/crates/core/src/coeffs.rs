//! Finitely supported coefficient functions on the index lattice and the
//! pointwise operators acting on them.
//!
//! A `CoeffFn` stores only its support table; everywhere else it evaluates to
//! zero, including at non-integral arguments. That convention carries the
//! whole content of the operators below: dividing an argument by a prime that
//! does not divide it simply reads zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::traits::Pow;
use num::{BigInt, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{Index, QuadSpace, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("weight must be a positive integer, got {0}")]
    InvalidWeight(u32),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("key {key} has {got} dual coordinates, expected {expected}")]
    KeyDimension {
        key: String,
        got: usize,
        expected: usize,
    },
    #[error("key {key} lies outside the declared region ({a_max}, {b_max})")]
    KeyOutsideRegion {
        key: String,
        a_max: i64,
        b_max: i64,
    },
    #[error("coefficient functions live on different quadratic spaces")]
    SpaceMismatch,
}

/// The weight `k >= 1` of a formal expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(u32);

impl Weight {
    pub fn new(k: u32) -> Result<Self, CoeffError> {
        if k >= 1 {
            Ok(Weight(k))
        } else {
            Err(CoeffError::InvalidWeight(k))
        }
    }

    pub fn get(&self) -> u32 {
        self.0
    }

    /// `n^{k-1}` as an exact integer.
    pub fn pow_k_minus_1(&self, n: u64) -> BigInt {
        BigInt::from(n).pow(self.0 - 1)
    }
}

/// A prime number, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, CoeffError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(CoeffError::NotPrime(p))
        }
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Truncation box `0 <= a <= a_max`, `0 <= b <= b_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub a_max: i64,
    pub b_max: i64,
}

impl Region {
    pub fn new(a_max: i64, b_max: i64) -> Self {
        assert!(a_max >= 0 && b_max >= 0, "region bounds must be non-negative");
        Region { a_max, b_max }
    }

    pub fn contains(&self, x: &Index) -> bool {
        0 <= x.a && x.a <= self.a_max && 0 <= x.b && x.b <= self.b_max
    }
}

/// A finitely supported exact-rational function on the index lattice, with a
/// declared truncation region. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CoeffFn {
    qs: Arc<QuadSpace>,
    region: Region,
    table: BTreeMap<Index, Rational>,
    weight_hint: Option<Weight>,
}

impl CoeffFn {
    /// Builds a coefficient function from a support table. Keys must match the
    /// rank of the quadratic space and lie inside the region; zero values are
    /// dropped so the support is canonical.
    pub fn new(
        qs: Arc<QuadSpace>,
        region: Region,
        table: BTreeMap<Index, Rational>,
        weight_hint: Option<Weight>,
    ) -> Result<Self, CoeffError> {
        let m = qs.rank();
        let mut clean = BTreeMap::new();
        for (key, value) in table {
            if key.v.len() != m {
                return Err(CoeffError::KeyDimension {
                    key: key.to_string(),
                    got: key.v.len(),
                    expected: m,
                });
            }
            if !region.contains(&key) {
                return Err(CoeffError::KeyOutsideRegion {
                    key: key.to_string(),
                    a_max: region.a_max,
                    b_max: region.b_max,
                });
            }
            if !value.is_zero() {
                clean.insert(key, value);
            }
        }
        Ok(CoeffFn {
            qs,
            region,
            table: clean,
            weight_hint,
        })
    }

    pub fn zero(qs: Arc<QuadSpace>, region: Region) -> Self {
        CoeffFn {
            qs,
            region,
            table: BTreeMap::new(),
            weight_hint: None,
        }
    }

    /// A single spike of the given value at `x`.
    pub fn delta(
        qs: Arc<QuadSpace>,
        region: Region,
        x: Index,
        value: Rational,
    ) -> Result<Self, CoeffError> {
        let mut table = BTreeMap::new();
        table.insert(x, value);
        CoeffFn::new(qs, region, table, None)
    }

    pub fn qs(&self) -> &Arc<QuadSpace> {
        &self.qs
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn weight_hint(&self) -> Option<Weight> {
        self.weight_hint
    }

    pub fn with_weight_hint(mut self, k: Weight) -> Self {
        self.weight_hint = Some(k);
        self
    }

    pub fn support(&self) -> impl Iterator<Item = (&Index, &Rational)> {
        self.table.iter()
    }

    pub fn support_len(&self) -> usize {
        self.table.len()
    }

    pub fn is_zero_fn(&self) -> bool {
        self.table.is_empty()
    }

    pub fn into_table(self) -> BTreeMap<Index, Rational> {
        self.table
    }

    /// Table lookup at an exact lattice point; absent keys read zero.
    pub fn eval_index(&self, x: &Index) -> Rational {
        assert!(
            x.v.len() == self.qs.rank(),
            "dimension mismatch: index {} against rank {}",
            x,
            self.qs.rank()
        );
        self.table.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    /// Evaluation at a rational triple. Returns the table value when every
    /// coordinate is integral and the key is present, and exactly zero
    /// otherwise; no query is an error apart from a wrong vector length.
    pub fn eval_rational(&self, a: &Rational, v: &[Rational], b: &Rational) -> Rational {
        assert!(
            v.len() == self.qs.rank(),
            "dimension mismatch: vector of length {} against rank {}",
            v.len(),
            self.qs.rank()
        );
        let to_int = |q: &Rational| -> Option<i64> {
            if q.is_integer() {
                q.numer().to_i64()
            } else {
                None
            }
        };
        let (Some(a), Some(b)) = (to_int(a), to_int(b)) else {
            return Rational::zero();
        };
        let mut vi = Vec::with_capacity(v.len());
        for c in v {
            match to_int(c) {
                Some(c) => vi.push(c),
                None => return Rational::zero(),
            }
        }
        self.eval_index(&Index::new(a, vi, b))
    }

    /// Exact linear combination; all terms must live on the same quadratic
    /// space. The region is the componentwise maximum of the term regions.
    pub fn linear_combination(terms: &[(Rational, &CoeffFn)]) -> Result<CoeffFn, CoeffError> {
        let Some((_, first)) = terms.first() else {
            panic!("linear_combination requires at least one term");
        };
        let qs = first.qs.clone();
        let mut region = first.region;
        let mut table: BTreeMap<Index, Rational> = BTreeMap::new();
        for (scale, f) in terms {
            if f.qs.gram() != qs.gram() {
                return Err(CoeffError::SpaceMismatch);
            }
            region.a_max = region.a_max.max(f.region.a_max);
            region.b_max = region.b_max.max(f.region.b_max);
            for (key, value) in &f.table {
                let term = scale * value;
                *table.entry(key.clone()).or_insert_with(Rational::zero) += term;
            }
        }
        table.retain(|_, v| !v.is_zero());
        Ok(CoeffFn {
            qs,
            region,
            table,
            weight_hint: None,
        })
    }
}

/// Evaluates `f` at the `r`-dilated index: `f(ra, rv, rb)`.
pub fn eval_dilated(f: &CoeffFn, r: u64, x: &Index) -> Rational {
    f.eval_index(&x.scale(r))
}

/// Evaluates `f` on the base slice `b = 1` at `(r^2 ab, rv, 1)`. The value
/// depends on `x` only through the product `ab` and the dual vector.
pub fn eval_base_slice(f: &CoeffFn, r: u64, x: &Index) -> Rational {
    let r = r as i128;
    let target = r * r * x.a as i128 * x.b as i128;
    let Ok(a) = i64::try_from(target) else {
        return Rational::zero();
    };
    let v: Vec<i64> = x.v.iter().map(|&c| c * r as i64).collect();
    f.eval_index(&Index::new(a, v, 1))
}

/// The four-term symmetry defect
/// `p^{k-1} f(a, v/p, b/p) - p^{k-1} f(a/p, v/p, b) + f(a, v, pb) - f(pa, v, b)`,
/// with the divided arguments reading zero unless exactly divisible.
pub fn symmetry_defect(f: &CoeffFn, k: Weight, p: Prime, x: &Index) -> Rational {
    let p = p.get() as i64;
    let pk = Rational::from_integer(k.pow_k_minus_1(p as u64));
    let mut acc = Rational::zero();

    let v_divisible = x.v.iter().all(|&c| c % p == 0);
    if v_divisible {
        let vp: Vec<i64> = x.v.iter().map(|&c| c / p).collect();
        if x.b % p == 0 {
            let val = f.eval_index(&Index::new(x.a, vp.clone(), x.b / p));
            acc += &pk * val;
        }
        if x.a % p == 0 {
            let val = f.eval_index(&Index::new(x.a / p, vp, x.b));
            acc -= &pk * val;
        }
    }
    acc += f.eval_index(&Index::new(x.a, x.v.clone(), p * x.b));
    acc -= f.eval_index(&Index::new(p * x.a, x.v.clone(), x.b));
    acc
}

/// Scaling identities of the base-slice operator: writing `M(r)g(x)` for
/// `eval_base_slice(g, r, x)`, checks
/// `M(mr)f(a,v,b) = M(r)f(m^2 a, mv, b) = M(r)f(a, mv, m^2 b)` and, when
/// `m | b`, `M(r)f(a,v,b) = M(r)f(ma, v, b/m)`. These hold for every `f` by
/// construction; the checker exists so that property tests can say so.
pub fn base_slice_identities_hold(f: &CoeffFn, r: u64, m: u64, x: &Index) -> bool {
    let mi = m as i64;
    let lhs = eval_base_slice(f, m * r, x);
    let via_a = eval_base_slice(
        f,
        r,
        &Index::new(mi * mi * x.a, x.v.iter().map(|&c| mi * c).collect(), x.b),
    );
    let via_b = eval_base_slice(
        f,
        r,
        &Index::new(x.a, x.v.iter().map(|&c| mi * c).collect(), mi * mi * x.b),
    );
    if lhs != via_a || lhs != via_b {
        return false;
    }
    if x.b % mi == 0 {
        let base = eval_base_slice(f, r, x);
        let shifted = eval_base_slice(f, r, &Index::new(mi * x.a, x.v.clone(), x.b / mi));
        if base != shifted {
            return false;
        }
    }
    true
}
