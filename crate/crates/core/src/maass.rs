//! The Maass lift and the divisor-sum relation that defines the Maass space.
//!
//! A seed is a finitely supported function on the `b = 1` slice of the cone.
//! Its lift extends it to the whole cone by
//!
//! ```text
//! f(a, v, b) = sum over d | content(a, v, b) of d^{k-1} * c(ab / d^2, v / d)
//! ```
//!
//! and a coefficient function belongs to the Maass space exactly when it
//! satisfies that relation at every index. `is_maass` verifies the relation
//! over the truncated support, reporting every violated `(l, X)` pair with
//! `X` primitive.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::coeffs::{eval_base_slice, eval_dilated, CoeffError, CoeffFn, Region, Weight};
use crate::lattice::{divisors, Index, QuadSpace, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaassError {
    #[error("seed key (n={n}, v={v:?}) has {got} dual coordinates, expected {expected}")]
    KeyDimension {
        n: i64,
        v: Vec<i64>,
        got: usize,
        expected: usize,
    },
    #[error("seed key (n={n}, v={v:?}) lies outside the cone: 2n < S^{{-1}}[v]")]
    KeyOutsideCone { n: i64, v: Vec<i64> },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// A key `(n, v)` of the `b = 1` slice, ordered by `(n, v)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeedKey {
    pub n: i64,
    pub v: Vec<i64>,
}

impl SeedKey {
    pub fn new(n: i64, v: Vec<i64>) -> Self {
        SeedKey { n, v }
    }

    fn as_index(&self) -> Index {
        Index::new(self.n, self.v.clone(), 1)
    }
}

/// The free data of a Maass lift: an exact-rational function on the cone
/// points of the `b = 1` slice. Lookup off the table is zero.
#[derive(Debug, Clone)]
pub struct SeedFn {
    qs: Arc<QuadSpace>,
    table: BTreeMap<SeedKey, Rational>,
}

impl SeedFn {
    /// Every key must satisfy `2n >= S^{-1}[v]`, i.e. `(n, v, 1)` lies in the
    /// cone. Zero values are dropped.
    pub fn new(
        qs: Arc<QuadSpace>,
        table: BTreeMap<SeedKey, Rational>,
    ) -> Result<Self, MaassError> {
        let m = qs.rank();
        let mut clean = BTreeMap::new();
        for (key, value) in table {
            if key.v.len() != m {
                return Err(MaassError::KeyDimension {
                    n: key.n,
                    v: key.v.clone(),
                    got: key.v.len(),
                    expected: m,
                });
            }
            if !qs.in_cone(&key.as_index()) {
                return Err(MaassError::KeyOutsideCone { n: key.n, v: key.v });
            }
            if !value.is_zero() {
                clean.insert(key, value);
            }
        }
        Ok(SeedFn { qs, table: clean })
    }

    pub fn zero(qs: Arc<QuadSpace>) -> Self {
        SeedFn {
            qs,
            table: BTreeMap::new(),
        }
    }

    pub fn qs(&self) -> &Arc<QuadSpace> {
        &self.qs
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SeedKey, &Rational)> {
        self.table.iter()
    }

    pub fn support_len(&self) -> usize {
        self.table.len()
    }

    pub fn value(&self, n: i64, v: &[i64]) -> Rational {
        self.table
            .get(&SeedKey::new(n, v.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// Extends a seed to the cone box by the divisor sum. Seed keys the sum asks
/// for but the table lacks read as zero, so sparse seeds are fine. The value
/// at the zero index is `c(0, 0)`.
pub fn maass_lift(seed: &SeedFn, k: Weight, a_max: i64, b_max: i64) -> CoeffFn {
    let qs = seed.qs().clone();
    let m = qs.rank();
    let mut table = BTreeMap::new();
    for x in qs.enumerate_cone(a_max, b_max) {
        let value = if x.is_zero() {
            seed.value(0, &vec![0; m])
        } else {
            let (l, _) = x.decompose_primitive();
            let ab = x.a as i128 * x.b as i128;
            let mut acc = Rational::zero();
            for d in divisors(l) {
                let di = d as i128;
                let n = (ab / (di * di))
                    .to_i64()
                    .expect("lift key exceeds i64 range");
                let v: Vec<i64> = x.v.iter().map(|&c| c / d as i64).collect();
                acc += Rational::from_integer(k.pow_k_minus_1(d)) * seed.value(n, &v);
            }
            acc
        };
        if !value.is_zero() {
            table.insert(x, value);
        }
    }
    CoeffFn::new(qs, Region::new(a_max, b_max), table, Some(k))
        .expect("lift produces in-region keys")
}

/// The lift of a single delta seed, built directly from its support shape
/// rather than by scanning the whole box. Agrees with
/// `maass_lift(delta seed, ..)` exactly.
pub(crate) fn delta_lift(
    qs: &Arc<QuadSpace>,
    k: Weight,
    a_max: i64,
    b_max: i64,
    key: &SeedKey,
) -> CoeffFn {
    let mut table = BTreeMap::new();
    if key.n == 0 {
        // 2n >= S^{-1}[v] forces v = 0: the lift lives on the two rays.
        debug_assert!(key.v.iter().all(|&c| c == 0));
        table.insert(Index::zero(qs.rank()), Rational::one());
        for a in 1..=a_max {
            table.insert(Index::new(a, vec![0; qs.rank()], 0), sigma(k, a as u64));
        }
        for b in 1..=b_max {
            table.insert(Index::new(0, vec![0; qs.rank()], b), sigma(k, b as u64));
        }
    } else {
        // support points are (e*alpha, e*v, e*beta) with alpha*beta = n; the
        // divisor sum collapses to the single term d = e there.
        let pairs: Vec<(i64, i64)> = divisors(key.n as u64)
            .into_iter()
            .map(|alpha| (alpha as i64, key.n / alpha as i64))
            .collect();
        let mut e = 1i64;
        loop {
            let mut placed = false;
            for &(alpha, beta) in &pairs {
                if e * alpha <= a_max && e * beta <= b_max {
                    placed = true;
                    let x = Index::new(
                        e * alpha,
                        key.v.iter().map(|&c| c * e).collect(),
                        e * beta,
                    );
                    table.insert(x, Rational::from_integer(k.pow_k_minus_1(e as u64)));
                }
            }
            if !placed {
                break;
            }
            e += 1;
        }
    }
    CoeffFn::new(qs.clone(), Region::new(a_max, b_max), table, Some(k))
        .expect("delta lift produces in-region keys")
}

fn sigma(k: Weight, n: u64) -> Rational {
    let mut acc = num::BigInt::from(0);
    for d in divisors(n) {
        acc += k.pow_k_minus_1(d);
    }
    Rational::from_integer(acc)
}

/// Reads the `b = 1` slice back out of a coefficient function. On that slice
/// the content is always 1, so this inverts the lift. Keys outside the cone
/// are skipped: a seed lives on the cone slice by definition.
pub fn extract_seed(f: &CoeffFn) -> SeedFn {
    let qs = f.qs().clone();
    let mut table = BTreeMap::new();
    for (x, value) in f.support() {
        if x.b == 1 && qs.in_cone(x) {
            table.insert(SeedKey::new(x.a, x.v.clone()), value.clone());
        }
    }
    SeedFn { qs, table }
}

/// A violated instance of the divisor-sum relation: at `l * primitive` the
/// stored value `lhs` differed from the divisor sum `rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaassViolation {
    pub l: u64,
    pub primitive: Index,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct MaassReport {
    pub violations: Vec<MaassViolation>,
}

impl MaassReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the divisor-sum relation for every primitive cone index `X` and
/// every `l >= 1` with `l * X` in the region. The right-hand side reads only
/// `b = 1` keys, whose first coordinate is at most `(la)(lb)`; pairs whose
/// reads would leave the region are not checkable on this truncation and are
/// skipped, never assumed.
pub fn is_maass(f: &CoeffFn, k: Weight) -> MaassReport {
    let region = f.region();
    MaassReport {
        violations: maass_violations(f, k, region.a_max, region.b_max, true),
    }
}

/// Relation check over the window `a <= win_a`, `b <= win_b` (which must lie
/// inside the region; reads still consult the full table).
///
/// With `include_a_ray = false` the relations anchored at the primitive index
/// `(1, 0, 0)` are skipped. Those relations tie the `b = 0` ray to the value
/// at `(0, 0, 1)`, and no four-term symmetry constraint couples the two rays,
/// so they are not a consequence of the symmetry system; the converse check
/// in `symmetry::compare_with_maass` excludes them.
pub(crate) fn maass_violations(
    f: &CoeffFn,
    k: Weight,
    win_a: i64,
    win_b: i64,
    include_a_ray: bool,
) -> Vec<MaassViolation> {
    let qs = f.qs();
    let region = f.region();
    let win_a = win_a.min(region.a_max);
    let win_b = win_b.min(region.b_max);
    let mut violations = Vec::new();
    if region.b_max < 1 {
        return violations;
    }
    for y in qs.enumerate_cone(win_a, win_b) {
        if y.is_zero() {
            continue;
        }
        if !include_a_ray && y.b == 0 {
            continue;
        }
        // all right-hand reads have first coordinate <= (la)(lb)
        if y.a as i128 * y.b as i128 > region.a_max as i128 {
            continue;
        }
        let (l, x0) = y.decompose_primitive();
        let lhs = f.eval_index(&y);
        let rhs = maass_rhs(f, k, l, &x0);
        if lhs != rhs {
            violations.push(MaassViolation {
                l,
                primitive: x0,
                lhs,
                rhs,
            });
        }
    }
    violations
}

fn maass_rhs(f: &CoeffFn, k: Weight, l: u64, x0: &Index) -> Rational {
    let mut rhs = Rational::zero();
    for r in divisors(l) {
        rhs += Rational::from_integer(k.pow_k_minus_1(r)) * eval_base_slice(f, l / r, x0);
    }
    rhs
}

/// The prime-power splitting identity linking the dilation and base-slice
/// operators: for primitive `x` and `l = p^s n` with `p` not dividing `n`,
///
/// ```text
/// f(pl * x) - p^{k-1} f(l * x) = sum over r | n of r^{k-1} M(pl/r) f(x).
/// ```
///
/// Evaluates both sides exactly and reports whether they agree. Panics if `x`
/// is not primitive.
pub fn dilation_slice_identity_holds(
    f: &CoeffFn,
    k: Weight,
    p: crate::coeffs::Prime,
    l: u64,
    x: &Index,
) -> bool {
    assert!(x.is_primitive(), "index {x} is not primitive");
    let p = p.get();
    let mut n = l;
    while n % p == 0 {
        n /= p;
    }
    let lhs = eval_dilated(f, p * l, x)
        - Rational::from_integer(k.pow_k_minus_1(p)) * eval_dilated(f, l, x);
    let mut rhs = Rational::zero();
    for r in divisors(n) {
        rhs += Rational::from_integer(k.pow_k_minus_1(r)) * eval_base_slice(f, p * l / r, x);
    }
    lhs == rhs
}
