//! The symmetry-defined space: the four-term defect checker, the exact linear
//! constraint system it induces on a truncated box, a rational null-space
//! solver, and the comparison of that solution space with the Maass-lift
//! image.
//!
//! Rows of the constraint system are indexed by a prime `p` and a base point
//! `X = (a, v, b)`. The row encodes the vanishing of the four-term defect at
//! `X` as a linear form in the unknown cone coefficients, with at most four
//! entries drawn from
//! `{+-1, +-p^{k-1}}` (colliding references are summed). Base points run over
//! the admissible sub-box `p*a <= a_max`, `p*b <= b_max` and over every dual
//! vector with `S^{-1}[v] <= 2pab`: that range covers all rows whose entries
//! touch the cone box, including rows based at points outside the cone whose
//! references land inside it. For functions supported on the cone, rows based
//! anywhere else are identically zero and are not emitted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num::{One, Zero};

use crate::coeffs::{symmetry_defect, CoeffFn, Prime, Region, Weight};
use crate::lattice::{divisors, Index, QuadSpace, Rational};
use crate::maass::{delta_lift, maass_violations, MaassViolation, SeedKey};

/// A nonzero defect of the four-term symmetry check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryDefect {
    pub p: u64,
    pub at: Index,
    pub value: Rational,
}

#[derive(Debug, Clone, Default)]
pub struct SymmetryReport {
    pub defects: Vec<SymmetryDefect>,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Evaluates the four-term defect at every cone index of the admissible
/// sub-box `{X : p*a <= a_max, p*b <= b_max}` for every prime given, so each
/// referenced key stays inside the region. Reports all nonzero defects.
pub fn check_symmetry(f: &CoeffFn, k: Weight, primes: &[Prime]) -> SymmetryReport {
    let qs = f.qs();
    let region = f.region();
    let mut defects = Vec::new();
    for &p in primes {
        let pa = region.a_max / p.get() as i64;
        let pb = region.b_max / p.get() as i64;
        for x in qs.enumerate_cone(pa, pb) {
            let value = symmetry_defect(f, k, p, &x);
            if !value.is_zero() {
                defects.push(SymmetryDefect {
                    p: p.get(),
                    at: x,
                    value,
                });
            }
        }
    }
    SymmetryReport { defects }
}

/// One linear constraint (the four-term defect at a base point vanishes), as
/// sparse column entries.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub p: u64,
    pub at: Index,
    /// (column position, coefficient), sorted by column, all nonzero.
    pub entries: Vec<(usize, Rational)>,
}

/// The exact linear system cutting out the symmetry space on a box.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    qs: Arc<QuadSpace>,
    region: Region,
    weight: Weight,
    columns: Vec<Index>,
    col_index: HashMap<Index, usize>,
    rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    pub fn columns(&self) -> &[Index] {
        &self.columns
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn qs(&self) -> &Arc<QuadSpace> {
        &self.qs
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn column_of(&self, x: &Index) -> Option<usize> {
        self.col_index.get(x).copied()
    }

    /// `row . f` over the row's column entries.
    pub fn row_dot(&self, row: &ConstraintRow, f: &CoeffFn) -> Rational {
        let mut acc = Rational::zero();
        for (col, coef) in &row.entries {
            acc += coef * f.eval_index(&self.columns[*col]);
        }
        acc
    }
}

/// Builds the constraint system on the box `a <= a_max`, `b <= b_max` with
/// unknowns at every cone index of the box. Rows whose four references all
/// miss the cone box are identically zero and skipped.
pub fn build_constraints(
    qs: &Arc<QuadSpace>,
    k: Weight,
    primes: &[Prime],
    a_max: i64,
    b_max: i64,
) -> ConstraintSystem {
    assert!(a_max >= 1 && b_max >= 1, "box bounds must be at least 1");
    let columns = qs.enumerate_cone(a_max, b_max);
    let col_index: HashMap<Index, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), i))
        .collect();
    let mut rows = Vec::new();
    for &p in primes {
        let pi = p.get() as i64;
        let pk = Rational::from_integer(k.pow_k_minus_1(p.get()));
        for b in 0..=(b_max / pi) {
            for a in 0..=(a_max / pi) {
                // S^{-1}[v] <= 2pab reaches every base point whose row can
                // touch the cone box
                for v in qs.dual_vectors_within(2 * pi * a * b) {
                    let at = Index::new(a, v, b);
                    let mut entries: BTreeMap<usize, Rational> = BTreeMap::new();
                    let mut add = |target: Index, coef: Rational| {
                        if let Some(&col) = col_index.get(&target) {
                            *entries.entry(col).or_insert_with(Rational::zero) += coef;
                        }
                    };
                    if at.v.iter().all(|&c| c % pi == 0) {
                        let vp: Vec<i64> = at.v.iter().map(|&c| c / pi).collect();
                        if at.b % pi == 0 {
                            add(Index::new(at.a, vp.clone(), at.b / pi), pk.clone());
                        }
                        if at.a % pi == 0 {
                            add(Index::new(at.a / pi, vp, at.b), -pk.clone());
                        }
                    }
                    add(Index::new(at.a, at.v.clone(), pi * at.b), Rational::one());
                    add(Index::new(pi * at.a, at.v.clone(), at.b), -Rational::one());
                    let entries: Vec<(usize, Rational)> = entries
                        .into_iter()
                        .filter(|(_, c)| !c.is_zero())
                        .collect();
                    if !entries.is_empty() {
                        rows.push(ConstraintRow {
                            p: p.get(),
                            at,
                            entries,
                        });
                    }
                }
            }
        }
    }
    ConstraintSystem {
        qs: qs.clone(),
        region: Region::new(a_max, b_max),
        weight: k,
        columns,
        col_index,
        rows,
    }
}

/// A reduced-echelon basis of the null space. Each basis vector has value 1
/// at its own free column and 0 at every other free column.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    pub basis: Vec<CoeffFn>,
    pub free_columns: Vec<Index>,
    pub rank: usize,
}

impl SolutionBasis {
    pub fn nullity(&self) -> usize {
        self.basis.len()
    }
}

/// Exact null space of the row system over the rationals, by sparse
/// reduced-echelon elimination. Pivots are chosen as the first nonzero
/// column of each row; with exact arithmetic there is nothing to gain from
/// magnitude pivoting, and the fixed column order makes the basis
/// deterministic.
pub fn solve_null_space(sys: &ConstraintSystem) -> SolutionBasis {
    let ncols = sys.columns.len();
    let vectors: Vec<SparseVec> = sys.rows.iter().map(|r| r.entries.clone()).collect();
    let elim = Eliminator::reduce_all(vectors);
    let rank = elim.pivots.len();
    let mut free_columns = Vec::with_capacity(ncols - rank);
    // contributions of pivot rows to each free column's basis vector
    let mut contrib: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for (&c, row) in &elim.pivots {
        for (col, coef) in row {
            if *col != c {
                contrib.entry(*col).or_default().push((c, -coef.clone()));
            }
        }
    }
    let mut basis = Vec::with_capacity(ncols - rank);
    for j in 0..ncols {
        if elim.pivots.contains_key(&j) {
            continue;
        }
        free_columns.push(sys.columns[j].clone());
        let mut entries = contrib.remove(&j).unwrap_or_default();
        entries.push((j, Rational::one()));
        entries.sort_by_key(|(col, _)| *col);
        let table: BTreeMap<Index, Rational> = entries
            .into_iter()
            .map(|(col, coef)| (sys.columns[col].clone(), coef))
            .collect();
        basis.push(
            CoeffFn::new(sys.qs.clone(), sys.region, table, Some(sys.weight))
                .expect("basis keys are box columns"),
        );
    }
    SolutionBasis {
        basis,
        free_columns,
        rank,
    }
}

type SparseVec = Vec<(usize, Rational)>;

/// `dst - c * src`, both sorted sparse vectors.
fn sub_scaled(dst: &SparseVec, c: &Rational, src: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        let take_dst = j >= src.len() || (i < dst.len() && dst[i].0 < src[j].0);
        let take_src = i >= dst.len() || (j < src.len() && src[j].0 < dst[i].0);
        if take_dst {
            out.push(dst[i].clone());
            i += 1;
        } else if take_src {
            let val = -(c * &src[j].1);
            if !val.is_zero() {
                out.push((src[j].0, val));
            }
            j += 1;
        } else {
            let val = &dst[i].1 - c * &src[j].1;
            if !val.is_zero() {
                out.push((dst[i].0, val));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Eliminator {
    /// pivot column -> normalized row (leading coefficient 1, fully reduced
    /// against every other pivot)
    pivots: BTreeMap<usize, SparseVec>,
}

impl Eliminator {
    fn new() -> Self {
        Eliminator {
            pivots: BTreeMap::new(),
        }
    }

    fn reduce_all(vectors: Vec<SparseVec>) -> Self {
        let mut elim = Eliminator::new();
        for v in vectors {
            elim.insert(v);
        }
        elim.back_eliminate();
        elim
    }

    /// Reduces the leading entry against existing pivots until the vector is
    /// exhausted or lands on a fresh pivot column.
    fn insert(&mut self, mut r: SparseVec) -> bool {
        loop {
            let Some((c0, coef)) = r.first().cloned() else {
                return false;
            };
            match self.pivots.get(&c0) {
                Some(p) => r = sub_scaled(&r, &coef, p),
                None => {
                    let inv = Rational::one() / coef;
                    for (_, val) in r.iter_mut() {
                        *val *= &inv;
                    }
                    self.pivots.insert(c0, r);
                    return true;
                }
            }
        }
    }

    /// Clears pivot columns from all other pivot rows, right to left. After
    /// this every pivot row touches exactly one pivot column (its own).
    fn back_eliminate(&mut self) {
        let cols: Vec<usize> = self.pivots.keys().copied().collect();
        for &c in cols.iter().rev() {
            let mut row = self.pivots.remove(&c).unwrap();
            loop {
                let hit = row
                    .iter()
                    .find(|(col, _)| *col != c && self.pivots.contains_key(col))
                    .map(|(col, coef)| (*col, coef.clone()));
                match hit {
                    Some((col, coef)) => {
                        row = sub_scaled(&row, &coef, &self.pivots[&col]);
                    }
                    None => break,
                }
            }
            self.pivots.insert(c, row);
        }
    }

    /// Rank of a set of sparse vectors (no back elimination needed).
    fn rank_of(vectors: Vec<SparseVec>) -> usize {
        let mut elim = Eliminator::new();
        for v in vectors {
            elim.insert(v);
        }
        elim.pivots.len()
    }
}

/// A containment defect: the lift of the given delta seed failed a row.
#[derive(Debug, Clone)]
pub struct ContainmentDefect {
    pub seed: SeedKey,
    pub p: u64,
    pub at: Index,
    pub value: Rational,
}

/// Outcome of the two-sided comparison on a box.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub columns: usize,
    pub rows: usize,
    pub rank: usize,
    pub nullity: usize,
    /// Rank of the lift image of all delta seeds the box can see.
    pub lift_dim: usize,
    pub lift_dim_equals_nullity: bool,
    pub containment_defects: Vec<ContainmentDefect>,
    /// Window of the converse check.
    pub interior_a: i64,
    pub interior_b: i64,
    /// (basis vector position, violation) pairs from the converse check.
    pub interior_violations: Vec<(usize, MaassViolation)>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.containment_defects.is_empty()
            && self.interior_violations.is_empty()
            && self.lift_dim <= self.nullity
    }
}

/// Compares the Maass-lift image with the null space of the symmetry
/// constraints on a truncated box.
///
/// Forward direction: the lift of every delta seed the box reads satisfies
/// every constraint row exactly. Converse, desk scale: every null-space basis
/// vector satisfies the divisor-sum relation on the interior sub-box
/// `a <= a_max / P`, `b <= b_max / P` with `P` the largest prime used, where
/// each induction step of the coefficient argument references in-box values
/// only. The interior bound is further capped below the smallest prime
/// missing from the set, since the descent factors `b * l` over the primes
/// available. Relations anchored at the primitive index `(1, 0, 0)` are
/// excluded: no four-term row couples the `b = 0` ray to `(0, 0, 1)`, so the
/// constraint system provably does not imply them (see `maass_violations`).
pub fn compare_with_maass(
    qs: &Arc<QuadSpace>,
    k: Weight,
    primes: &[Prime],
    a_max: i64,
    b_max: i64,
) -> ComparisonReport {
    let sys = build_constraints(qs, k, primes, a_max, b_max);
    let solution = solve_null_space(&sys);
    compare_report(&sys, &solution, primes)
}

/// The comparison for an already-built system and its solved null space.
pub fn compare_report(
    sys: &ConstraintSystem,
    solution: &SolutionBasis,
    primes: &[Prime],
) -> ComparisonReport {
    let qs = sys.qs();
    let k = sys.weight();
    let Region { a_max, b_max } = sys.region();

    // every seed key the box lift reads
    let mut seeds: BTreeSet<SeedKey> = BTreeSet::new();
    for x in sys.columns() {
        if x.is_zero() {
            seeds.insert(SeedKey::new(0, vec![0; qs.rank()]));
            continue;
        }
        let (l, _) = x.decompose_primitive();
        let ab = x.a as i128 * x.b as i128;
        for d in divisors(l) {
            let di = d as i128;
            let n = i64::try_from(ab / (di * di)).expect("seed key in range");
            seeds.insert(SeedKey::new(n, x.v.iter().map(|&c| c / d as i64).collect()));
        }
    }

    // rows indexed by the columns they touch, so each lift only meets the
    // rows near its support
    let mut rows_by_col: HashMap<usize, Vec<usize>> = HashMap::new();
    for (ri, row) in sys.rows().iter().enumerate() {
        for (col, _) in &row.entries {
            rows_by_col.entry(*col).or_default().push(ri);
        }
    }

    let mut containment_defects = Vec::new();
    let mut lift_vectors: Vec<SparseVec> = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        let g = delta_lift(qs, k, a_max, b_max, seed);
        let mut candidates: BTreeSet<usize> = BTreeSet::new();
        let mut vector: SparseVec = Vec::with_capacity(g.support_len());
        for (x, value) in g.support() {
            let col = sys.column_of(x).expect("lift support stays in the cone box");
            vector.push((col, value.clone()));
            if let Some(rs) = rows_by_col.get(&col) {
                candidates.extend(rs.iter().copied());
            }
        }
        vector.sort_by_key(|(col, _)| *col);
        for ri in candidates {
            let row = &sys.rows()[ri];
            let value = sys.row_dot(row, &g);
            if !value.is_zero() {
                containment_defects.push(ContainmentDefect {
                    seed: seed.clone(),
                    p: row.p,
                    at: row.at.clone(),
                    value,
                });
            }
        }
        lift_vectors.push(vector);
    }
    let lift_dim = Eliminator::rank_of(lift_vectors);

    let max_p = primes.iter().map(|p| p.get()).max().unwrap_or(2);
    let missing = first_missing_prime(primes);
    let interior_a = (a_max / max_p as i64).min(missing as i64 - 1);
    let interior_b = (b_max / max_p as i64).min(missing as i64 - 1);
    let mut interior_violations = Vec::new();
    for (i, f) in solution.basis.iter().enumerate() {
        for violation in maass_violations(f, k, interior_a, interior_b, false) {
            interior_violations.push((i, violation));
        }
    }

    ComparisonReport {
        columns: sys.columns().len(),
        rows: sys.rows().len(),
        rank: solution.rank,
        nullity: solution.nullity(),
        lift_dim,
        lift_dim_equals_nullity: lift_dim == solution.nullity(),
        containment_defects,
        interior_a,
        interior_b,
        interior_violations,
    }
}

fn first_missing_prime(primes: &[Prime]) -> u64 {
    let have: BTreeSet<u64> = primes.iter().map(|p| p.get()).collect();
    let mut q = 2;
    loop {
        if crate::coeffs::Prime::new(q).is_ok() && !have.contains(&q) {
            return q;
        }
        q += 1;
    }
}
