//! Sparse real polynomials in `(x1, y1, x2, y2)` and the expansion of photon
//! probabilities as such polynomials.
//!
//! Exponent tuples are always ordered `[x1, y1, x2, y2]`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::multiphoton::{multiplicity_norm, permanent, scattering_submatrix, FockInput, MismatchModel, Outcome};
use crate::su2::{Su2Params, WavePlateAngles};
use crate::{Error, Result};

pub type Exponents = [u32; 4];

pub const VARIABLES: [&str; 4] = ["x1", "y1", "x2", "y2"];

/// Imaginary parts below this are rounding noise and are dropped when a
/// probability polynomial is made real.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Real coefficients below this are dropped after numeric expansion.
pub const COEFF_TOL: f64 = 1e-12;

pub fn total_degree(e: &Exponents) -> u32 {
    e.iter().sum()
}

/// A real polynomial stored as exponent → coefficient; zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolynomialR4 {
    terms: BTreeMap<Exponents, f64>,
}

impl PolynomialR4 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn monomial(exponents: Exponents, coeff: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(exponents, coeff);
        p
    }

    /// The coordinate `index` (0 = x1, 1 = y1, 2 = x2, 3 = y2).
    pub fn variable(index: usize) -> Self {
        let mut e = [0; 4];
        e[index] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponents, f64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exponents: Exponents, coeff: f64) {
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&exponents);
        }
    }

    pub fn coeff(&self, exponents: &Exponents) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(total_degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(total_degree);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * k)))
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|(_, c)| c.abs() > tol).map(|(e, c)| (*e, *c)).collect() }
    }

    /// Terms whose monomial satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Exponents) -> bool) -> Self {
        Self { terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (*e, *c)).collect() }
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|e| (self.coeff(e) - other.coeff(e)).abs())
            .fold(0.0, f64::max)
    }

    pub fn evaluate_at(&self, v: [f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(v).map(|(k, x)| x.powi(*k as i32)).product::<f64>())
            .sum()
    }

    pub fn evaluate(&self, p: &Su2Params) -> f64 {
        self.evaluate_at(p.as_array())
    }
}

impl Add for &PolynomialR4 {
    type Output = PolynomialR4;
    fn add(self, rhs: &PolynomialR4) -> PolynomialR4 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &PolynomialR4 {
    type Output = PolynomialR4;
    fn sub(self, rhs: &PolynomialR4) -> PolynomialR4 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Neg for &PolynomialR4 {
    type Output = PolynomialR4;
    fn neg(self) -> PolynomialR4 {
        self.scale(-1.0)
    }
}

fn add_exponents(a: &Exponents, b: &Exponents) -> Exponents {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

impl Mul for &PolynomialR4 {
    type Output = PolynomialR4;
    fn mul(self, rhs: &PolynomialR4) -> PolynomialR4 {
        let mut out = PolynomialR4::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(add_exponents(ea, eb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for PolynomialR4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first, then lexicographically descending.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| total_degree(b).cmp(&total_degree(a)).then(b.cmp(a)));
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let mono = monomial_name(e);
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            if mono.is_empty() {
                write!(f, "{}", crate::format::sig(mag))?;
            } else if (mag - 1.0).abs() < 1e-15 {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", crate::format::sig(mag))?;
            }
        }
        Ok(())
    }
}

/// `x1^2*y1` style name; empty for the constant monomial.
pub fn monomial_name(e: &Exponents) -> String {
    e.iter()
        .zip(VARIABLES)
        .filter(|(k, _)| **k > 0)
        .map(|(k, v)| if *k == 1 { v.to_string() } else { format!("{v}^{k}") })
        .collect::<Vec<_>>()
        .join("*")
}

#[derive(Serialize, Deserialize)]
struct Term {
    exponents: Exponents,
    coeff: f64,
}

impl Serialize for PolynomialR4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<Term> = self.terms.iter().map(|(e, c)| Term { exponents: *e, coeff: *c }).collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialR4 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(d)?;
        Ok(Self::from_terms(terms.into_iter().map(|t| (t.exponents, t.coeff))))
    }
}

/// Polynomial with complex coefficients in the same real variables; used to
/// carry the entries of a symbolic `T`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexPoly {
    terms: BTreeMap<Exponents, Complex64>,
}

impl ComplexPoly {
    pub fn monomial(exponents: Exponents, coeff: Complex64) -> Self {
        let mut p = Self::default();
        p.add_term(exponents, coeff);
        p
    }

    fn add_term(&mut self, e: Exponents, c: Complex64) {
        let entry = self.terms.entry(e).or_insert_with(Complex64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = Self::default();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }

    /// Complex conjugate (the variables are real).
    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect() }
    }

    /// Real part, failing if any imaginary part exceeds [`IMAGINARY_TOL`].
    pub fn into_real(self) -> Result<PolynomialR4> {
        let residue = self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max);
        if residue > IMAGINARY_TOL {
            return Err(Error::ImaginaryResidue(residue));
        }
        Ok(PolynomialR4::from_terms(self.terms.into_iter().map(|(e, c)| (e, c.re))).pruned(COEFF_TOL))
    }
}

impl Zero for ComplexPoly {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add for ComplexPoly {
    type Output = ComplexPoly;
    fn add(mut self, rhs: ComplexPoly) -> ComplexPoly {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for ComplexPoly {
    type Output = ComplexPoly;
    fn sub(mut self, rhs: ComplexPoly) -> ComplexPoly {
        for (e, c) in rhs.terms {
            self.add_term(e, -c);
        }
        self
    }
}

impl Mul for ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: ComplexPoly) -> ComplexPoly {
        let mut out = ComplexPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(add_exponents(ea, eb), ca * cb);
            }
        }
        out
    }
}

/// Entries of the symbolic `U` in the sphere coordinates.
pub fn symbolic_unitary() -> [[ComplexPoly; 2]; 2] {
    let v = |i: usize, c: Complex64| {
        let mut e = [0; 4];
        e[i] = 1;
        ComplexPoly::monomial(e, c)
    };
    let (one, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    [
        [v(0, one) + v(1, i), v(2, one) + v(3, i)],
        [v(2, -one) + v(3, i), v(0, one) + v(1, -i)],
    ]
}

/// `Q_out · U · Q_in` with `U` symbolic and the probe plates numeric.
pub fn symbolic_interferometer(probe: &WavePlateAngles) -> [[ComplexPoly; 2]; 2] {
    let u = symbolic_unitary();
    let (qo, qi) = (probe.q_out().entries(), probe.q_in().entries());
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let mut acc = ComplexPoly::zero();
            for (k, u_row) in u.iter().enumerate() {
                for (l, u_kl) in u_row.iter().enumerate() {
                    acc = acc + u_kl.scale(qo[r][k] * qi[l][c]);
                }
            }
            acc
        })
    })
}

/// `P(input → output)` through `Q_out U Q_in` as a polynomial in `U`'s
/// coordinates. Homogeneous of degree `2n`.
pub fn transition_polynomial(probe: &WavePlateAngles, input: FockInput, output: Outcome) -> Result<PolynomialR4> {
    let t = symbolic_interferometer(probe);
    let sub = scattering_submatrix(&t, input, output)?;
    let amp = permanent(&sub)?;
    let prob = (amp.conj() * amp).scale(Complex64::new(1.0 / multiplicity_norm(input, output), 0.0));
    prob.into_real()
}

/// Per-outcome probability polynomials (ordered `(n,0) … (0,n)`) including the
/// mode-mismatch mixture.
pub fn distribution_polynomials(
    probe: &WavePlateAngles,
    input: FockInput,
    mismatch: &MismatchModel,
) -> Result<Vec<PolynomialR4>> {
    let n = input.total();
    let full = (0..=n)
        .map(|i| transition_polynomial(probe, input, Outcome::new(n - i, i)))
        .collect::<Result<Vec<_>>>()?;
    if input.n_h() == 0 || input.n_v() == 0 || mismatch.theta() == 0.0 {
        return Ok(full);
    }
    let group = |g: FockInput| -> Result<Vec<PolynomialR4>> {
        let m = g.total();
        (0..=m).map(|i| transition_polynomial(probe, g, Outcome::new(m - i, i))).collect()
    };
    let a = group(FockInput::new(input.n_h(), 0)?)?;
    let b = group(FockInput::new(0, input.n_v())?)?;
    let mut partial = vec![PolynomialR4::zero(); n as usize + 1];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            partial[i + j] = &partial[i + j] + &(pa * pb);
        }
    }
    let w = mismatch.overlap();
    Ok(full
        .iter()
        .zip(&partial)
        .map(|(f, p)| (&f.scale(w) + &p.scale(1.0 - w)).pruned(COEFF_TOL))
        .collect())
}

/// Which probe polynomial to expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeKind {
    /// `|T11|²`, one photon, degree 2.
    OnePhoton,
    /// `|T11 T22 + T12 T21|²`, two photons, degree 4.
    TwoPhoton,
}

impl ProbeKind {
    pub fn degree(self) -> u32 {
        match self {
            ProbeKind::OnePhoton => 2,
            ProbeKind::TwoPhoton => 4,
        }
    }

    pub fn input(self) -> FockInput {
        match self {
            ProbeKind::OnePhoton => FockInput::new(1, 0).expect("valid"),
            ProbeKind::TwoPhoton => FockInput::new(1, 1).expect("valid"),
        }
    }

    pub fn outcome(self) -> Outcome {
        match self {
            ProbeKind::OnePhoton => Outcome::new(1, 0),
            ProbeKind::TwoPhoton => Outcome::new(1, 1),
        }
    }
}

/// The probe polynomial selected by a plate setting.
pub fn expand_probe_polynomial(probe: &WavePlateAngles, kind: ProbeKind) -> Result<PolynomialR4> {
    transition_polynomial(probe, kind.input(), kind.outcome())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiphoton::{hom_coincidence, transition_probability};
    use crate::su2::{compose_interferometer, su2_from_params};

    fn e(a: u32, b: u32, c: u32, d: u32) -> Exponents {
        [a, b, c, d]
    }

    #[test]
    fn arithmetic() {
        let x1 = PolynomialR4::variable(0);
        let y2 = PolynomialR4::variable(3);
        let s = &x1 + &y2;
        let sq = &s * &s;
        assert_eq!(sq.coeff(&e(2, 0, 0, 0)), 1.0);
        assert_eq!(sq.coeff(&e(1, 0, 0, 1)), 2.0);
        assert_eq!(sq.degree(), Some(2));
        assert!(sq.is_homogeneous());
        assert!((&sq - &sq).is_zero());
        assert_eq!((-&x1).coeff(&e(1, 0, 0, 0)), -1.0);
        assert!(!(&sq + &PolynomialR4::constant(1.0)).is_homogeneous());
        assert_eq!(PolynomialR4::zero().degree(), None);
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut p = PolynomialR4::monomial(e(1, 0, 0, 0), 2.0);
        p.add_term(e(1, 0, 0, 0), -2.0);
        assert!(p.is_zero());
        assert_eq!(PolynomialR4::monomial(e(1, 1, 0, 0), 0.0).len(), 0);
    }

    #[test]
    fn json_shape() {
        let p = PolynomialR4::from_terms([(e(2, 0, 0, 0), 1.0), (e(0, 2, 0, 0), 1.0)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"[{"exponents":[0,2,0,0],"coeff":1.0},{"exponents":[2,0,0,0],"coeff":1.0}]"#);
        let back: PolynomialR4 = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn display() {
        let p = PolynomialR4::from_terms([(e(2, 0, 0, 0), 1.0), (e(0, 0, 0, 0), -0.5), (e(1, 1, 0, 1), -2.0)]);
        assert_eq!(p.to_string(), "-2*x1*y1*y2 + x1^2 - 0.5");
    }

    #[test]
    fn p1_and_trivial_probes() {
        let p1 = expand_probe_polynomial(&WavePlateAngles::trivial(), ProbeKind::OnePhoton).unwrap();
        let expected = PolynomialR4::from_terms([(e(2, 0, 0, 0), 1.0), (e(0, 2, 0, 0), 1.0)]);
        assert!(p1.max_coeff_diff(&expected) < 1e-12, "{p1}");
        assert!((p1.evaluate(&Su2Params::identity()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q1_full_expansion() {
        // |U11 U22 + U12 U21|² = (x1² + y1² - x2² - y2²)²
        let q1 = expand_probe_polynomial(&WavePlateAngles::trivial(), ProbeKind::TwoPhoton).unwrap();
        let s = PolynomialR4::from_terms([
            (e(2, 0, 0, 0), 1.0),
            (e(0, 2, 0, 0), 1.0),
            (e(0, 0, 2, 0), -1.0),
            (e(0, 0, 0, 2), -1.0),
        ]);
        assert!(q1.max_coeff_diff(&(&s * &s)) < 1e-12, "{q1}");
        assert!((q1.evaluate(&Su2Params::identity()) - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(q1.evaluate(&Su2Params::new(h, 0.0, h, 0.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn expansion_agrees_with_numeric_probability() {
        let probe = WavePlateAngles::new([10.0, 33.0, -71.0, 120.0]).unwrap();
        let p = Su2Params::normalized([0.3, -0.2, 0.8, 0.4]).unwrap();
        let t = compose_interferometer(&probe, &su2_from_params(&p));
        let q = expand_probe_polynomial(&probe, ProbeKind::TwoPhoton).unwrap();
        assert!((q.evaluate(&p) - hom_coincidence(&t)).abs() < 1e-12);
        let input = FockInput::new(2, 1).unwrap();
        let r = transition_polynomial(&probe, input, Outcome::new(1, 2)).unwrap();
        assert_eq!(r.degree(), Some(6));
        assert!(r.is_homogeneous());
        let direct = transition_probability(&t, input, Outcome::new(1, 2)).unwrap();
        assert!((r.evaluate(&p) - direct).abs() < 1e-12);
    }

    #[test]
    fn imaginary_residue_is_an_error() {
        let p = ComplexPoly::monomial(e(1, 0, 0, 0), Complex64::new(1.0, 1e-3));
        assert!(matches!(p.into_real(), Err(Error::ImaginaryResidue(_))));
        let p = ComplexPoly::monomial(e(1, 0, 0, 0), Complex64::new(1.0, 1e-13));
        assert_eq!(p.into_real().unwrap().coeff(&e(1, 0, 0, 0)), 1.0);
    }
}
