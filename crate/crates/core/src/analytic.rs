//! Floating-point evaluation of truncated expansions on the tube domain, the
//! two slash actions, and the prime-level up/down operators.
//!
//! This is the numeric cross-check layer: the coefficient-level symmetry
//! identities, which the rest of the crate verifies exactly, reappear here as
//! `|T_up - T_down|` being small. Comparison tolerances come from
//! `tail_bound` plus a fixed 1e-12 arithmetic allowance, never from thin air.

use num::complex::Complex64;
use num::ToPrimitive;
use thiserror::Error;

use crate::coeffs::{CoeffFn, Prime, Region, Weight};
use crate::lattice::QuadSpace;

const DET_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("point lies outside the domain: {reason}")]
    OutsideDomain { reason: String },
    #[error("matrix determinant {det} is not 1 within 1e-12")]
    NotUnimodular { det: f64 },
    #[error("automorphy factor too close to zero: |j| = {modulus:e}")]
    SingularFactor { modulus: f64 },
    #[error("dimension mismatch: point has {got} fiber coordinates, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("tail bound is only defined on the w = 0 slice")]
    NonzeroFiber,
}

/// A point `(tau, w, z)` of the tube domain: `Im tau > 0`, `Im z > 0` and
/// `Im(tau) Im(z) - S[Im w]/2 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    pub tau: Complex64,
    pub w: Vec<Complex64>,
    pub z: Complex64,
}

impl DomainPoint {
    pub fn new(
        qs: &QuadSpace,
        tau: Complex64,
        w: Vec<Complex64>,
        z: Complex64,
    ) -> Result<Self, AnalyticError> {
        if w.len() != qs.rank() {
            return Err(AnalyticError::DimensionMismatch {
                got: w.len(),
                expected: qs.rank(),
            });
        }
        if tau.im <= 0.0 {
            return Err(AnalyticError::OutsideDomain {
                reason: format!("Im(tau) = {} is not positive", tau.im),
            });
        }
        if z.im <= 0.0 {
            return Err(AnalyticError::OutsideDomain {
                reason: format!("Im(z) = {} is not positive", z.im),
            });
        }
        let im_w: Vec<f64> = w.iter().map(|c| c.im).collect();
        let margin = tau.im * z.im - 0.5 * gram_form_real(qs, &im_w);
        if margin <= 0.0 {
            return Err(AnalyticError::OutsideDomain {
                reason: format!("Im(tau) Im(z) - S[Im w]/2 = {margin} is not positive"),
            });
        }
        Ok(DomainPoint { tau, w, z })
    }
}

/// A real 2x2 matrix of determinant 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Moebius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, AnalyticError> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > DET_TOL {
            return Err(AnalyticError::NotUnimodular { det });
        }
        Ok(Moebius { a, b, c, d })
    }

    pub fn identity() -> Self {
        Moebius {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn compose(&self, other: &Moebius) -> Moebius {
        Moebius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    fn factor(&self, at: Complex64) -> Complex64 {
        self.c * at + self.d
    }

    fn apply(&self, at: Complex64) -> Complex64 {
        (self.a * at + self.b) / self.factor(at)
    }
}

fn gram_form_real(qs: &QuadSpace, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            acc += x[i] * qs.gram()[i][j] as f64 * x[j];
        }
    }
    acc
}

fn gram_form_complex(qs: &QuadSpace, x: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            acc += x[i] * qs.gram()[i][j] as f64 * x[j];
        }
    }
    acc
}

fn to_f64(q: &crate::lattice::Rational) -> f64 {
    q.to_f64()
        .unwrap_or_else(|| q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN))
}

/// Truncated expansion value: the sum over the support of
/// `A(a, v, b) * exp(2 pi i (a z - v . w + b tau))`. The pairing of the dual
/// vector with `w` collapses to the plain dot product `v . w`.
pub fn eval_series(f: &CoeffFn, point: &DomainPoint) -> Complex64 {
    assert!(
        point.w.len() == f.qs().rank(),
        "dimension mismatch: point has {} fiber coordinates, expected {}",
        point.w.len(),
        f.qs().rank()
    );
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, value) in f.support() {
        let mut pairing = Complex64::new(0.0, 0.0);
        for (vi, wi) in x.v.iter().zip(point.w.iter()) {
            pairing += *vi as f64 * wi;
        }
        let phase = x.a as f64 * point.z - pairing + x.b as f64 * point.tau;
        acc += to_f64(value) * (two_pi_i * phase).exp();
    }
    acc
}

/// Action through the first embedding: `tau` moves by the fractional-linear
/// map, `w` scales by the automorphy factor, and `z` picks up the quadratic
/// correction `-c S[w] / (2 j(h, tau))`. Returns the moved point and the
/// factor `j(h, tau)`.
pub fn act_up(
    qs: &QuadSpace,
    h: &Moebius,
    point: &DomainPoint,
) -> Result<(DomainPoint, Complex64), AnalyticError> {
    let j = h.factor(point.tau);
    if j.norm() < SINGULAR_TOL {
        return Err(AnalyticError::SingularFactor { modulus: j.norm() });
    }
    let tau = h.apply(point.tau);
    let w: Vec<Complex64> = point.w.iter().map(|c| c / j).collect();
    let z = point.z - h.c * gram_form_complex(qs, &point.w) / (2.0 * j);
    Ok((DomainPoint::new(qs, tau, w, z)?, j))
}

/// Mirror action through the second embedding, with `tau` and `z` exchanging
/// roles: `z` moves, `w` scales by `j(h, z)` and `tau` picks up the quadratic
/// correction.
pub fn act_down(
    qs: &QuadSpace,
    h: &Moebius,
    point: &DomainPoint,
) -> Result<(DomainPoint, Complex64), AnalyticError> {
    let j = h.factor(point.z);
    if j.norm() < SINGULAR_TOL {
        return Err(AnalyticError::SingularFactor { modulus: j.norm() });
    }
    let z = h.apply(point.z);
    let w: Vec<Complex64> = point.w.iter().map(|c| c / j).collect();
    let tau = point.tau - h.c * gram_form_complex(qs, &point.w) / (2.0 * j);
    Ok((DomainPoint::new(qs, tau, w, z)?, j))
}

/// Weight-`k` slash through the first embedding: `j^{-k}` times the series at
/// the moved point.
pub fn slash_up(
    f: &CoeffFn,
    k: Weight,
    h: &Moebius,
    point: &DomainPoint,
) -> Result<Complex64, AnalyticError> {
    let (moved, j) = act_up(f.qs(), h, point)?;
    Ok(j.powi(-(k.get() as i32)) * eval_series(f, &moved))
}

pub fn slash_down(
    f: &CoeffFn,
    k: Weight,
    h: &Moebius,
    point: &DomainPoint,
) -> Result<Complex64, AnalyticError> {
    let (moved, j) = act_down(f.qs(), h, point)?;
    Ok(j.powi(-(k.get() as i32)) * eval_series(f, &moved))
}

/// Prime-level operator acting through `tau`:
/// `p^{k-1} F(p tau, sqrt(p) w, z) + p^{-1} sum_{c=0}^{p-1} F((tau + c)/p, w/sqrt(p), z)`.
/// All `p + 1` evaluation points must lie in the domain.
pub fn t_up(
    f: &CoeffFn,
    k: Weight,
    p: Prime,
    point: &DomainPoint,
) -> Result<Complex64, AnalyticError> {
    let qs = f.qs();
    let pf = p.get() as f64;
    let sqrt_p = pf.sqrt();
    let w_up: Vec<Complex64> = point.w.iter().map(|c| c * sqrt_p).collect();
    let w_down: Vec<Complex64> = point.w.iter().map(|c| c / sqrt_p).collect();
    let scaled = DomainPoint::new(qs, pf * point.tau, w_up, point.z)?;
    let mut acc = pf.powi(k.get() as i32 - 1) * eval_series(f, &scaled);
    for c in 0..p.get() {
        let shifted = DomainPoint::new(
            qs,
            (point.tau + c as f64) / pf,
            w_down.clone(),
            point.z,
        )?;
        acc += eval_series(f, &shifted) / pf;
    }
    Ok(acc)
}

/// Prime-level operator acting through `z`, the mirror of `t_up`.
pub fn t_down(
    f: &CoeffFn,
    k: Weight,
    p: Prime,
    point: &DomainPoint,
) -> Result<Complex64, AnalyticError> {
    let qs = f.qs();
    let pf = p.get() as f64;
    let sqrt_p = pf.sqrt();
    let w_up: Vec<Complex64> = point.w.iter().map(|c| c * sqrt_p).collect();
    let w_down: Vec<Complex64> = point.w.iter().map(|c| c / sqrt_p).collect();
    let scaled = DomainPoint::new(qs, point.tau, w_up, pf * point.z)?;
    let mut acc = pf.powi(k.get() as i32 - 1) * eval_series(f, &scaled);
    for c in 0..p.get() {
        let shifted = DomainPoint::new(
            qs,
            point.tau,
            w_down.clone(),
            (point.z + c as f64) / pf,
        )?;
        acc += eval_series(f, &shifted) / pf;
    }
    Ok(acc)
}

/// Upper bound for the omitted tail of `t_up`/`t_down` on the `w = 0` slice,
/// as if every coefficient outside the box `(a_max, b_max)` were 1: the sum
/// over those `(a, b)` of `(p^{k-1} + 1) exp(-2 pi (a Im z + b Im tau / p))`,
/// evaluated as geometric series.
pub fn tail_bound(
    region: Region,
    qs: &QuadSpace,
    k: Weight,
    p: Prime,
    point: &DomainPoint,
) -> Result<f64, AnalyticError> {
    if point.w.len() != qs.rank() {
        return Err(AnalyticError::DimensionMismatch {
            got: point.w.len(),
            expected: qs.rank(),
        });
    }
    if point.w.iter().any(|c| c.norm() != 0.0) {
        return Err(AnalyticError::NonzeroFiber);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let x = (-two_pi * point.z.im).exp();
    let u = (-two_pi * point.tau.im / p.get() as f64).exp();
    let a1 = region.a_max as i32 + 1;
    let b1 = region.b_max as i32 + 1;
    // a > a_max, any b >= 0; then a <= a_max, b > b_max
    let beyond_a = x.powi(a1) / (1.0 - x) / (1.0 - u);
    let beyond_b = (1.0 - x.powi(a1)) / (1.0 - x) * u.powi(b1) / (1.0 - u);
    let scale = (p.get() as f64).powi(k.get() as i32 - 1) + 1.0;
    Ok(scale * (beyond_a + beyond_b))
}
