//! Bounded polynomials that are close to 1 on `[0, τ]` and close to 0 on
//! `[τ+θ, 1]`.
//!
//! The construction expands the smoothed step `g(x) = ½·erfc(k(x − c))`,
//! `c = τ + θ/2`, in Chebyshev polynomials. Truncating at degree `d` leaves a
//! uniform error of at most `e = Σ_{n>d}|c_n|`. With `β = g(τ+θ) = ½·erfc(kθ/2)`
//! the rescaled truncation `P = (p_d + e)/(1 + 2e)` lies in `[0, 1]` on
//! `[−1, 1]`, is at least `(1−β)/(1+2e)` on `[0, τ]` and at most
//! `(β+2e)/(1+2e)` on `[τ+θ, 1]`. For each steepness `k` on a geometric grid
//! the smallest `d` meeting both band conditions is found from these bounds,
//! and the overall smallest degree is then re-checked on a dense grid.
//!
//! Monomial coefficients are obtained by exact integer arithmetic and stored
//! as unevaluated double-double sums so that [`eval_poly`] stays accurate
//! despite the large cancelling coefficients of steep filters.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::float::FloatCore;
use num_traits::{ToPrimitive, Zero};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree attempted before giving up.
pub const DEFAULT_DEGREE_CAP: usize = 200;

/// Slack allowed in band and boundedness checks.
pub const GRID_TOL: f64 = 1e-9;

/// Points per verification grid used at construction time.
pub const VERIFY_POINTS: usize = 10_000;

/// Chebyshev interpolation size for the smoothed step.
const CHEB_NODES: usize = 4096;

/// Geometric steepness grid.
const K_MIN: f64 = 0.05;
const K_MAX: f64 = 120.0;
const K_RATIO: f64 = 1.02;

/// Outcome of a grid check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// Points per grid (one grid on `[−1,1]` and one on each band).
    pub grid_points: usize,
    /// Largest violation of any invariant, 0 when all hold exactly.
    pub max_violation: f64,
    pub passed: bool,
}

/// A certified rectangle polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RectanglePolynomial {
    pub tau: f64,
    pub theta: f64,
    pub xi: f64,
    pub degree: usize,
    /// Steepness `k` of the smoothed step (0 for the constant filter).
    pub steepness: f64,
    /// Bound on the Chebyshev truncation error before rescaling.
    pub truncation_bound: f64,
    /// Chebyshev coefficients of `P`.
    pub chebyshev: Vec<f64>,
    /// Monomial coefficients of `P` as `(hi, lo)` pairs, `a_i = hi + lo`.
    pub monomial: Vec<(f64, f64)>,
    pub verification: Verification,
}

impl RectanglePolynomial {
    /// Monomial coefficients `a_0..a_d` rounded to `f64`.
    pub fn coeffs(&self) -> Vec<f64> {
        self.monomial.iter().map(|&(hi, lo)| hi + lo).collect()
    }

    /// Evaluate through the Chebyshev form.
    pub fn eval_chebyshev(&self, x: f64) -> f64 {
        clenshaw(&self.chebyshev, x)
    }

    /// Re-run the grid check with `points` per grid.
    pub fn verify(&self, points: usize) -> Verification {
        verify_bands(&self.chebyshev, self.tau, self.theta, self.xi, points)
    }
}

/// Horner evaluation of `Σ a_i x^i` in double-double arithmetic.
pub fn eval_poly(p: &RectanglePolynomial, x: f64) -> f64 {
    horner_dd(&p.monomial, x)
}

/// `Σ|a_i|` of the monomial coefficients.
pub fn coefficient_l1(p: &RectanglePolynomial) -> f64 {
    p.monomial.iter().map(|&(hi, lo)| (hi + lo).abs()).sum()
}

/// Build the minimal-degree certified polynomial for the band
/// `[0, τ] / [τ+θ, 1]` with leakage `ξ`.
///
/// Requires `ξ ∈ (0, 1]`, `τ ∈ [0, 1)` and `θ ∈ (0, 1 − τ]`.
pub fn build_rectangle_polynomial(tau: f64, theta: f64, xi: f64) -> Result<RectanglePolynomial> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::param("tau", tau, "must lie in [0, 1)"));
    }
    if !(theta > 0.0 && theta <= 1.0 - tau + 1e-12) {
        return Err(Error::param("theta", theta, "must lie in (0, 1 - tau]"));
    }
    band_filter(tau, theta, xi)
}

/// Like [`build_rectangle_polynomial`] but accepts `τ + θ > 1`, in which case
/// the upper band is empty and the constant 1 is returned.
pub fn band_filter(tau: f64, theta: f64, xi: f64) -> Result<RectanglePolynomial> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::param("xi", xi, "must lie in (0, 1]"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", tau, "must be finite and nonnegative"));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param("theta", theta, "must be positive"));
    }
    static CACHE: OnceLock<Mutex<HashMap<[u64; 3], Arc<RectanglePolynomial>>>> = OnceLock::new();
    let key = [tau.to_bits(), theta.to_bits(), xi.to_bits()];
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok((**p).clone());
    }
    let p = if tau + theta > 1.0 + 1e-12 {
        finish(tau, theta, xi, 0.0, 0.0, vec![1.0])
    } else {
        construct(tau, theta, xi, DEFAULT_DEGREE_CAP)?
    };
    cache
        .lock()
        .expect("cache poisoned")
        .insert(key, Arc::new(p.clone()));
    Ok(p)
}

struct Candidate {
    degree: usize,
    k: f64,
    tail: f64,
    coeffs: Vec<f64>,
}

fn construct(tau: f64, theta: f64, xi: f64, cap: usize) -> Result<RectanglePolynomial> {
    let center = tau + theta / 2.0;
    let mut planner = FftPlanner::new();
    let mut best: Vec<Option<Candidate>> = (0..=cap).map(|_| None).collect();

    let mut k = K_MIN;
    while k <= K_MAX {
        let coeffs = step_chebyshev(k, center, &mut planner);
        let beta = 0.5 * libm::erfc(k * theta / 2.0);
        // tails[d] = Σ_{n>d} |c_n|
        let mut tails = vec![0.0; coeffs.len()];
        for d in (0..coeffs.len() - 1).rev() {
            tails[d] = tails[d + 1] + coeffs[d + 1].abs();
        }
        if let Some(d) = (0..=cap).find(|&d| band_ok(beta, tails[d], xi)) {
            let better = best[d].as_ref().map_or(true, |c| tails[d] < c.tail);
            if better {
                best[d] = Some(Candidate {
                    degree: d,
                    k,
                    tail: tails[d],
                    coeffs: coeffs[..=d].to_vec(),
                });
            }
        }
        k *= K_RATIO;
    }

    for cand in best.into_iter().flatten() {
        let mut cheb = cand.coeffs;
        cheb[0] += cand.tail;
        let scale = 1.0 + 2.0 * cand.tail;
        cheb.iter_mut().for_each(|c| *c /= scale);
        let p = finish(tau, theta, xi, cand.k, cand.tail, cheb);
        debug_assert_eq!(p.degree, cand.degree);
        if p.verification.passed {
            return Ok(p);
        }
    }
    Err(Error::DegreeOverflow {
        cap,
        tau,
        theta,
        xi,
    })
}

fn band_ok(beta: f64, tail: f64, xi: f64) -> bool {
    let scale = 1.0 + 2.0 * tail;
    1.0 - beta >= (1.0 - xi) * scale && (beta + 2.0 * tail) / scale <= xi
}

fn finish(
    tau: f64,
    theta: f64,
    xi: f64,
    k: f64,
    tail: f64,
    chebyshev: Vec<f64>,
) -> RectanglePolynomial {
    let verification = verify_bands(&chebyshev, tau, theta, xi, VERIFY_POINTS);
    let monomial = chebyshev_to_monomial(&chebyshev);
    RectanglePolynomial {
        tau,
        theta,
        xi,
        degree: chebyshev.len() - 1,
        steepness: k,
        truncation_bound: tail,
        chebyshev,
        monomial,
        verification,
    }
}

/// Chebyshev coefficients of `½·erfc(k(x − c))` from its values at the
/// `CHEB_NODES + 1` Chebyshev extreme points.
fn step_chebyshev(k: f64, center: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = CHEB_NODES;
    let values: Vec<f64> = (0..=n)
        .map(|j| {
            let x = (std::f64::consts::PI * j as f64 / n as f64).cos();
            0.5 * libm::erfc(k * (x - center))
        })
        .collect();
    // even extension, then a length-2n FFT gives the cosine transform
    let mut buf: Vec<Complex64> = values
        .iter()
        .chain(values[1..n].iter().rev())
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    planner.plan_fft_forward(2 * n).process(&mut buf);
    let mut coeffs: Vec<f64> = buf[..=n].iter().map(|z| z.re / n as f64).collect();
    coeffs[0] /= 2.0;
    coeffs[n] /= 2.0;
    coeffs
}

/// Clenshaw evaluation of `Σ c_n T_n(x)`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coeffs.first().copied().unwrap_or(0.0)
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = if points > 1 {
        (hi - lo) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points).map(move |i| {
        if i + 1 == points {
            hi
        } else {
            lo + step * i as f64
        }
    })
}

fn verify_bands(cheb: &[f64], tau: f64, theta: f64, xi: f64, points: usize) -> Verification {
    let mut worst: f64 = 0.0;
    for x in grid(-1.0, 1.0, points) {
        let v = clenshaw(cheb, x);
        worst = worst.max(v.abs() - 1.0);
    }
    for x in grid(0.0, tau, points) {
        let v = clenshaw(cheb, x);
        worst = worst.max((1.0 - xi) - v).max(v - 1.0);
    }
    if tau + theta <= 1.0 {
        for x in grid(tau + theta, 1.0, points) {
            let v = clenshaw(cheb, x);
            worst = worst.max(-v).max(v - xi);
        }
    }
    Verification {
        grid_points: points,
        max_violation: worst.max(0.0),
        passed: worst <= GRID_TOL,
    }
}

/// Exact conversion to the monomial basis. Every `f64` is a dyadic rational
/// and `T_n` has integer coefficients, so all sums are exact integers after
/// a common power-of-two scaling.
fn chebyshev_to_monomial(cheb: &[f64]) -> Vec<(f64, f64)> {
    let decoded: Vec<(BigInt, i32)> = cheb
        .iter()
        .map(|&c| {
            if c == 0.0 {
                return (BigInt::zero(), 0);
            }
            let (mant, exp, sign) = c.integer_decode();
            (BigInt::from(mant) * i64::from(sign), i32::from(exp))
        })
        .collect();
    let base = decoded
        .iter()
        .filter(|(m, _)| !m.is_zero())
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let d = cheb.len() - 1;
    let mut acc = vec![BigInt::zero(); d + 1];
    let mut prev: Vec<BigInt> = vec![BigInt::from(1)];
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::from(1)];
    for (n, (mant, exp)) in decoded.iter().enumerate() {
        if n >= 2 {
            // T_n = 2x·T_{n-1} − T_{n-2}
            let mut next = vec![BigInt::zero(); n + 1];
            for (i, t) in cur.iter().enumerate() {
                next[i + 1] += t * 2;
            }
            for (i, t) in prev.iter().enumerate() {
                next[i] -= t;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        if mant.is_zero() {
            continue;
        }
        let scaled = mant << (exp - base) as usize;
        let t_n = if n == 0 { &prev } else { &cur };
        for (i, t) in t_n.iter().enumerate() {
            acc[i] += &scaled * t;
        }
    }
    acc.iter()
        .map(|a| {
            let hi = a.to_f64().unwrap_or(f64::NAN);
            let rest = a - BigInt::from_f64_exact(hi);
            let lo = rest.to_f64().unwrap_or(0.0);
            (scale2(hi, base), scale2(lo, base))
        })
        .collect()
}

trait FromF64Exact {
    fn from_f64_exact(v: f64) -> BigInt;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(v: f64) -> BigInt {
        if v == 0.0 || !v.is_finite() {
            return BigInt::zero();
        }
        let (mant, exp, sign) = v.integer_decode();
        let m = BigInt::from(mant) * i64::from(sign);
        if exp >= 0 {
            m << exp as usize
        } else {
            // integers up to 2^53 decode with a negative exponent
            m >> (-exp) as usize
        }
    }
}

fn scale2(v: f64, exp: i32) -> f64 {
    libm::ldexp(v, exp)
}

/// Double-double Horner evaluation.
fn horner_dd(coeffs: &[(f64, f64)], x: f64) -> f64 {
    let mut s = (0.0, 0.0);
    for &a in coeffs.iter().rev() {
        s = dd::add(dd::mul_f64(s, x), a);
    }
    s.0 + s.1
}

/// Minimal double-double arithmetic on `(hi, lo)` pairs.
mod dd {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    pub fn add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        let (s, e) = two_sum(a.0, b.0);
        let (t, f) = two_sum(a.1, b.1);
        let (s, e) = quick_two_sum(s, e + t);
        quick_two_sum(s, e + f)
    }

    pub fn mul_f64(a: (f64, f64), b: f64) -> (f64, f64) {
        let p = a.0 * b;
        let e = a.0.mul_add(b, -p);
        quick_two_sum(p, e + a.1 * b)
    }
}
