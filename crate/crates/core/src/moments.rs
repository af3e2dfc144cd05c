//! Haar moments on the unit 3-sphere and the t-design test.
//!
//! A finite ensemble is a t-design when its uniform average of every degree-2t
//! polynomial in `(x1, y1, x2, y2)` equals the Haar average. On the sphere any
//! polynomial of degree at most 2t is a combination of homogeneous degree-2t
//! monomials, so the test compares all of those.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::poly::{monomial_name, total_degree, Exponents, PolynomialR4};
use crate::su2::{params_from_unitary, to_special_unitary, Ensemble, Su2Params};
use crate::{Error, Result};

pub type Rational = Ratio<i64>;

/// Tolerance for recognising a coordinate as a multiple of one half.
const HALF_GRID_TOL: f64 = 1e-12;

fn double_factorial_odd(e: u32) -> i64 {
    // (e-1)!! for even e
    (1..e as i64).step_by(2).product()
}

/// Exact Haar moment `E[x1^a y1^b x2^c y2^d]` over SU(2), i.e. over the
/// uniform measure on the unit 3-sphere.
pub fn haar_moment_exact(e: &Exponents) -> Rational {
    if e.iter().any(|k| k % 2 != 0) {
        return Rational::zero();
    }
    let half = total_degree(e) / 2;
    let num: i64 = e.iter().map(|&k| double_factorial_odd(k)).product();
    let den: i64 = (0..half as i64).map(|j| 4 + 2 * j).product();
    Rational::new(num, den)
}

pub fn haar_moment(e: &Exponents) -> f64 {
    haar_moment_exact(e).to_f64().expect("small rational")
}

pub fn haar_average(f: &PolynomialR4) -> f64 {
    f.terms().map(|(e, c)| c * haar_moment(e)).sum()
}

/// Coordinates of every element after fixing its global phase to land in SU(2).
pub fn ensemble_params(ensemble: &Ensemble) -> Vec<Su2Params> {
    ensemble
        .elements()
        .iter()
        .map(|u| params_from_unitary(&to_special_unitary(u)).expect("phase-fixed element is special unitary"))
        .collect()
}

pub fn ensemble_average(f: &PolynomialR4, ensemble: &Ensemble) -> f64 {
    let params = ensemble_params(ensemble);
    params.iter().map(|p| f.evaluate(p)).sum::<f64>() / params.len() as f64
}

/// Exact coordinates when every one lies on the half-integer grid.
fn rational_params(params: &[Su2Params]) -> Option<Vec<[Rational; 4]>> {
    params
        .iter()
        .map(|p| {
            let v = p.as_array();
            let mut out = [Rational::zero(); 4];
            for (o, x) in out.iter_mut().zip(v) {
                let r = (2.0 * x).round();
                if (2.0 * x - r).abs() > HALF_GRID_TOL {
                    return None;
                }
                *o = Rational::new(r as i64, 2);
            }
            Some(out)
        })
        .collect()
}

fn monomial_exact(v: &[Rational; 4], e: &Exponents) -> Rational {
    let mut acc = Rational::one();
    for (x, &k) in v.iter().zip(e) {
        for _ in 0..k {
            acc *= *x;
        }
    }
    acc
}

fn monomial_f64(v: [f64; 4], e: &Exponents) -> f64 {
    v.iter().zip(e).map(|(x, &k)| x.powi(k as i32)).product()
}

/// All monomials of total degree `d`, in descending lexicographic order of
/// their exponent tuples (`x1^d` first).
pub fn homogeneous_monomials(d: u32) -> Vec<Exponents> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            for c in (0..=d - a - b).rev() {
                out.push([a, b, c, d - a - b - c]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialComparison {
    pub exponents: Exponents,
    pub monomial: String,
    pub ensemble_average: f64,
    pub haar_average: f64,
    pub deviation: f64,
    /// Exact values as `p/q` strings when the test ran in rational arithmetic.
    pub exact: Option<ExactComparison>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactComparison {
    pub ensemble_average: String,
    pub haar_average: String,
    pub deviation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignTestReport {
    pub ensemble: String,
    pub elements: usize,
    pub t: u32,
    pub tolerance: f64,
    /// Whether averages were computed in exact rational arithmetic.
    pub exact: bool,
    pub rows: Vec<MonomialComparison>,
    pub max_deviation: f64,
    /// First monomial (in row order) attaining the maximum deviation, if it
    /// exceeds the tolerance.
    pub witness: Option<MonomialComparison>,
    pub pass: bool,
}

/// Compares ensemble and Haar averages of every homogeneous degree-`2t`
/// monomial. `t` must be 1, 2 or 3.
pub fn design_test(ensemble: &Ensemble, t: u32, tol: f64) -> Result<DesignTestReport> {
    if !(1..=3).contains(&t) {
        return Err(Error::UnsupportedOrder(t));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    let monomials = homogeneous_monomials(2 * t);
    let params = ensemble_params(ensemble);
    let k = params.len() as i64;

    let rows: Vec<MonomialComparison> = match rational_params(&params) {
        Some(exact) => monomials
            .par_iter()
            .map(|e| {
                let avg = exact.iter().map(|v| monomial_exact(v, e)).fold(Rational::zero(), |a, b| a + b)
                    / Rational::from_integer(k);
                let haar = haar_moment_exact(e);
                let dev = (avg - haar).abs();
                MonomialComparison {
                    exponents: *e,
                    monomial: monomial_name(e),
                    ensemble_average: avg.to_f64().expect("small rational"),
                    haar_average: haar.to_f64().expect("small rational"),
                    deviation: dev.to_f64().expect("small rational"),
                    exact: Some(ExactComparison {
                        ensemble_average: avg.to_string(),
                        haar_average: haar.to_string(),
                        deviation: dev.to_string(),
                    }),
                }
            })
            .collect(),
        None => monomials
            .par_iter()
            .map(|e| {
                let avg = params.iter().map(|p| monomial_f64(p.as_array(), e)).sum::<f64>() / k as f64;
                let haar = haar_moment(e);
                MonomialComparison {
                    exponents: *e,
                    monomial: monomial_name(e),
                    ensemble_average: avg,
                    haar_average: haar,
                    deviation: (avg - haar).abs(),
                    exact: None,
                }
            })
            .collect(),
    };

    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let pass = max_deviation <= tol;
    let witness = if pass { None } else { rows.iter().find(|r| r.deviation == max_deviation).cloned() };
    Ok(DesignTestReport {
        ensemble: ensemble.label().to_string(),
        elements: ensemble.len(),
        t,
        tolerance: tol,
        exact: rows.first().is_some_and(|r| r.exact.is_some()),
        rows,
        max_deviation,
        witness,
        pass,
    })
}
