//! Monomial bases modulo the unit-sphere constraint, and rank checks for sets
//! of probe polynomials.
//!
//! The constraint `x1² + y1² + x2² + y2² = 1` is eliminated by substituting
//! `y2² = 1 - x1² - y1² - x2²` until no power of `y2` above one remains. A
//! degree-`d` polynomial then splits into its top-degree part, expressed over
//! the degree-`d` basis, and a lower-degree remainder.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::poly::{expand_probe_polynomial, total_degree, Exponents, PolynomialR4, ProbeKind};
use crate::su2::WavePlateAngles;
use crate::{Error, Result};

/// Relative threshold on singular values when counting rank.
pub const RANK_RTOL: f64 = 1e-8;

const DEGREE2: [Exponents; 9] = [
    [2, 0, 0, 0], // x1²
    [1, 0, 1, 0], // x1 x2
    [0, 0, 2, 0], // x2²
    [1, 1, 0, 0], // x1 y1
    [1, 0, 0, 1], // x1 y2
    [0, 1, 1, 0], // x2 y1
    [0, 0, 1, 1], // x2 y2
    [0, 2, 0, 0], // y1²
    [0, 1, 0, 1], // y1 y2
];

const DEGREE4: [Exponents; 25] = [
    [4, 0, 0, 0],
    [3, 0, 1, 0],
    [2, 0, 2, 0],
    [1, 0, 3, 0],
    [0, 0, 4, 0],
    [3, 1, 0, 0],
    [2, 1, 1, 0],
    [1, 1, 2, 0],
    [0, 1, 3, 0],
    [3, 0, 0, 1],
    [2, 0, 1, 1],
    [1, 0, 2, 1],
    [0, 0, 3, 1],
    [2, 2, 0, 0],
    [1, 2, 1, 0],
    [0, 2, 2, 0],
    [2, 1, 0, 1],
    [1, 1, 1, 1],
    [0, 1, 2, 1],
    [1, 3, 0, 0],
    [1, 2, 0, 1],
    [0, 3, 1, 0],
    [0, 2, 1, 1],
    [0, 4, 0, 0],
    [0, 3, 0, 1],
];

/// Independent monomials of one degree on the sphere: every monomial of that
/// degree with `y2` to at most the first power, in the conventional order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    degree: u32,
    monomials: Vec<Exponents>,
}

impl MonomialBasis {
    pub fn new(degree: u32) -> Result<Self> {
        let monomials = match degree {
            0 => vec![[0; 4]],
            2 => DEGREE2.to_vec(),
            4 => DEGREE4.to_vec(),
            d => return Err(Error::UnsupportedDegree(d)),
        };
        Ok(Self { degree, monomials })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Exponents] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, e: &Exponents) -> Option<usize> {
        self.monomials.iter().position(|m| m == e)
    }
}

/// Rewrites `f` on the sphere so that no `y2` power exceeds one. Values on
/// the sphere are unchanged.
pub fn eliminate_y2_squared(f: &PolynomialR4) -> PolynomialR4 {
    let mut out = PolynomialR4::zero();
    let mut pending: Vec<(Exponents, f64)> = f.terms().map(|(e, c)| (*e, *c)).collect();
    while let Some((e, c)) = pending.pop() {
        if e[3] < 2 {
            out.add_term(e, c);
            continue;
        }
        let base = [e[0], e[1], e[2], e[3] - 2];
        pending.push((base, c));
        for i in 0..3 {
            let mut m = base;
            m[i] += 2;
            pending.push((m, -c));
        }
    }
    out
}

/// `f` modulo the constraint, split by degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedPolynomial {
    pub degree: u32,
    /// Coefficients of the degree-`d` basis monomials.
    pub basis_coeffs: Vec<f64>,
    /// Coefficients of the degree-`d-2` basis (empty for `d = 2`).
    pub lower_coeffs: Vec<f64>,
    pub constant: f64,
}

impl ReducedPolynomial {
    /// `[basis | lower | constant]`: 10 entries for degree 2, 35 for degree 4.
    pub fn full_vector(&self) -> Vec<f64> {
        let mut v = self.basis_coeffs.clone();
        v.extend_from_slice(&self.lower_coeffs);
        v.push(self.constant);
        v
    }

    pub fn to_polynomial(&self) -> PolynomialR4 {
        let mut p = PolynomialR4::constant(self.constant);
        let top = MonomialBasis::new(self.degree).expect("reduced degree is supported");
        for (e, c) in top.monomials().iter().zip(&self.basis_coeffs) {
            p.add_term(*e, *c);
        }
        if self.degree == 4 {
            let lower = MonomialBasis::new(2).expect("degree 2 basis");
            for (e, c) in lower.monomials().iter().zip(&self.lower_coeffs) {
                p.add_term(*e, *c);
            }
        }
        p
    }
}

/// Reduces an even polynomial of degree at most `degree` (2 or 4).
pub fn reduce_mod_constraint(f: &PolynomialR4, degree: u32) -> Result<ReducedPolynomial> {
    if degree != 2 && degree != 4 {
        return Err(Error::UnsupportedDegree(degree));
    }
    if let Some(d) = f.degree() {
        if d > degree {
            return Err(Error::UnsupportedDegree(d));
        }
    }
    if let Some((e, _)) = f.terms().find(|(e, _)| total_degree(e) % 2 != 0) {
        return Err(Error::InvalidParameter(format!(
            "odd-degree term {} cannot be reduced onto an even basis",
            crate::poly::monomial_name(e)
        )));
    }
    let reduced = eliminate_y2_squared(f);
    let top = MonomialBasis::new(degree)?;
    let mut basis_coeffs = vec![0.0; top.len()];
    let mut lower_coeffs = if degree == 4 { vec![0.0; 9] } else { Vec::new() };
    let lower = MonomialBasis::new(2)?;
    let mut constant = 0.0;
    for (e, c) in reduced.terms() {
        match total_degree(e) {
            0 => constant += c,
            d if d == degree => basis_coeffs[top.index_of(e).expect("y2 power at most one")] += c,
            2 => lower_coeffs[lower.index_of(e).expect("y2 power at most one")] += c,
            d => unreachable!("degree {d} term after reducing a degree-{degree} polynomial"),
        }
    }
    Ok(ReducedPolynomial { degree, basis_coeffs, lower_coeffs, constant })
}

/// How each probe polynomial becomes a matrix row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum RowLayout {
    /// The full reduced vector `[basis | lower | constant]`; row rank equals
    /// the number of linearly independent functions on the sphere.
    #[default]
    Reduced,
    /// Raw expansion coefficients of the basis monomials only, with every
    /// `y2²`-divisible term ignored; gives a square matrix.
    Truncated,
}

impl RowLayout {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reduced" => Some(Self::Reduced),
            "truncated" => Some(Self::Truncated),
            _ => None,
        }
    }
}

/// Coefficient row of one probe polynomial.
pub fn coefficient_row(f: &PolynomialR4, degree: u32, layout: RowLayout) -> Result<Vec<f64>> {
    match layout {
        RowLayout::Reduced => Ok(reduce_mod_constraint(f, degree)?.full_vector()),
        RowLayout::Truncated => {
            let basis = MonomialBasis::new(degree)?;
            Ok(basis.monomials().iter().map(|e| f.coeff(e)).collect())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisMatrix {
    pub degree: u32,
    pub layout: RowLayout,
    pub rows: usize,
    pub cols: usize,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Numerical rank by SVD with threshold `RANK_RTOL · σ_max`.
pub fn matrix_rank(m: &DMatrix<f64>) -> (usize, Vec<f64>) {
    if m.is_empty() {
        return (0, Vec::new());
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let max = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|s| **s > RANK_RTOL * max).count();
    (rank, sv)
}

/// One row per setting; returns the matrix and its rank.
pub fn basis_matrix(settings: &[WavePlateAngles], kind: ProbeKind, layout: RowLayout) -> Result<BasisMatrix> {
    let degree = kind.degree();
    let rows = settings
        .iter()
        .map(|w| coefficient_row(&expand_probe_polynomial(w, kind)?, degree, layout))
        .collect::<Result<Vec<_>>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    let matrix = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]);
    let (rank, singular_values) = matrix_rank(&matrix);
    Ok(BasisMatrix { degree, layout, rows: rows.len(), cols, matrix, singular_values, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn all_monomials(deg: u32) -> Vec<Exponents> {
        let mut v = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=deg - a - b {
                    v.push([a, b, c, deg - a - b - c]);
                }
            }
        }
        v
    }

    #[test]
    fn bases_are_the_y2_linear_monomials() {
        for (deg, size) in [(2, 9), (4, 25)] {
            let b = MonomialBasis::new(deg).unwrap();
            assert_eq!(b.len(), size);
            let listed: BTreeSet<_> = b.monomials().iter().copied().collect();
            let expected: BTreeSet<_> = all_monomials(deg).into_iter().filter(|e| e[3] <= 1).collect();
            assert_eq!(listed, expected);
        }
        assert!(matches!(MonomialBasis::new(6), Err(Error::UnsupportedDegree(6))));
    }

    #[test]
    fn reduce_examples() {
        let sphere = PolynomialR4::from_terms([
            ([2, 0, 0, 0], 1.0),
            ([0, 2, 0, 0], 1.0),
            ([0, 0, 2, 0], 1.0),
            ([0, 0, 0, 2], 1.0),
        ]);
        let r = reduce_mod_constraint(&sphere, 2).unwrap();
        assert!(r.basis_coeffs.iter().all(|c| *c == 0.0));
        assert_eq!(r.constant, 1.0);

        let y2sq = PolynomialR4::monomial([0, 0, 0, 2], 1.0);
        let r = reduce_mod_constraint(&y2sq, 2).unwrap();
        let expected = PolynomialR4::from_terms([
            ([0, 0, 0, 0], 1.0),
            ([2, 0, 0, 0], -1.0),
            ([0, 2, 0, 0], -1.0),
            ([0, 0, 2, 0], -1.0),
        ]);
        assert_eq!(r.to_polynomial(), expected);
    }

    #[test]
    fn reduce_errors() {
        let f = PolynomialR4::monomial([3, 0, 0, 0], 1.0);
        assert!(matches!(reduce_mod_constraint(&f, 2), Err(Error::UnsupportedDegree(3))));
        assert!(matches!(reduce_mod_constraint(&f, 6), Err(Error::UnsupportedDegree(6))));
        let odd = PolynomialR4::monomial([1, 0, 0, 0], 1.0);
        assert!(reduce_mod_constraint(&odd, 2).is_err());
    }

    #[test]
    fn rank_drops_with_duplicate_row() {
        let p: Vec<WavePlateAngles> = crate::tables::Tables::bundled().p.iter().map(|s| s.angles).collect();
        let full = basis_matrix(&p, ProbeKind::OnePhoton, RowLayout::Reduced).unwrap();
        assert_eq!(full.rank, 9);
        let mut dup = p.clone();
        dup[8] = dup[0];
        let m = basis_matrix(&dup, ProbeKind::OnePhoton, RowLayout::Reduced).unwrap();
        assert_eq!(m.rank, 8);
    }

    #[test]
    fn rank_of_empty_matrix() {
        let (rank, sv) = matrix_rank(&DMatrix::<f64>::zeros(0, 0));
        assert_eq!(rank, 0);
        assert!(sv.is_empty());
    }
}
