//! Two-mode unitaries: the SU(2) parameterisation, wave-plate Jones matrices,
//! interferometer composition, design ensembles and Haar sampling.
//!
//! A two-mode polarisation process is written in terms of four real numbers
//! `(x1, y1, x2, y2)` on the unit 3-sphere:
//!
//! ```text
//!     U = [[ x1 + i y1,  x2 + i y2],
//!          [-x2 + i y2,  x1 - i y1]]
//! ```
//!
//! All angles at the public surface are in degrees.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `x1² + y1² + x2² + y2² = 1` at construction.
pub const NORM_TOL: f64 = 1e-12;
/// Elementwise tolerance on `U U† = I`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default tolerance for [`equal_up_to_phase`].
pub const PHASE_TOL: f64 = 1e-9;
/// Tolerance on `det U = 1` when recovering parameters.
pub const DET_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A point `(x1, y1, x2, y2)` on the unit 3-sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2Params {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl Su2Params {
    /// Accepts the coordinates only if they already lie on the unit sphere.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let v = [x1, y1, x2, y2];
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinates {v:?}")));
        }
        let norm2: f64 = v.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "x1²+y1²+x2²+y2² = {norm2} is not 1"
            )));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Projects a nonzero 4-vector onto the unit sphere.
    pub fn normalized(v: [f64; 4]) -> Result<Self> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(format!("cannot normalise {v:?}")));
        }
        Ok(Self {
            x1: v[0] / norm,
            y1: v[1] / norm,
            x2: v[2] / norm,
            y2: v[3] / norm,
        })
    }

    pub fn identity() -> Self {
        Self { x1: 1.0, y1: 0.0, x2: 0.0, y2: 0.0 }
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }

    /// Coordinates in the canonical order `[x1, y1, x2, y2]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }
}

/// A 2×2 unitary matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryMat2 {
    m: [[Complex64; 2]; 2],
}

impl UnitaryMat2 {
    /// Checks `U U† = I` within [`UNITARY_TOL`].
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let u = Self { m };
        let err = u.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(u)
    }

    // Products of unitaries built here stay unitary to rounding.
    pub(crate) fn from_raw(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self::from_raw([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Entry `(row, col)`, zero-based.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::from_raw([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Multiplies every entry by `phase` (expected to have unit modulus).
    pub fn with_phase(&self, phase: Complex64) -> Self {
        let m = &self.m;
        Self::from_raw([
            [m[0][0] * phase, m[0][1] * phase],
            [m[1][0] * phase, m[1][1] * phase],
        ])
    }

    /// Largest elementwise deviation of `U U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = *self * self.adjoint();
        let mut err: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                err = err.max((p.m[r][c] - target).norm());
            }
        }
        err
    }

    /// Largest elementwise distance `max |A - B|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for UnitaryMat2 {
    type Output = UnitaryMat2;

    fn mul(self, rhs: UnitaryMat2) -> UnitaryMat2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        UnitaryMat2::from_raw(m)
    }
}

impl fmt::Display for UnitaryMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = |z: Complex64| format!("{:+.6}{:+.6}i", z.re, z.im);
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            z(self.m[0][0]),
            z(self.m[0][1]),
            z(self.m[1][0]),
            z(self.m[1][1])
        )
    }
}

/// `U` from its sphere coordinates.
pub fn su2_from_params(p: &Su2Params) -> UnitaryMat2 {
    UnitaryMat2::from_raw([
        [Complex64::new(p.x1, p.y1), Complex64::new(p.x2, p.y2)],
        [Complex64::new(-p.x2, p.y2), Complex64::new(p.x1, -p.y1)],
    ])
}

/// Inverse of [`su2_from_params`]. Fails when `det U` differs from 1, i.e.
/// when the matrix carries a global phase.
pub fn params_from_unitary(u: &UnitaryMat2) -> Result<Su2Params> {
    let det = u.det();
    if (det - ONE).norm() > DET_TOL {
        return Err(Error::NotSpecialUnitary { re: det.re, im: det.im });
    }
    // Average the two redundant copies of each coordinate.
    let a = 0.5 * (u.m[0][0] + u.m[1][1].conj());
    let b = 0.5 * (u.m[0][1] - u.m[1][0].conj());
    Su2Params::normalized([a.re, a.im, b.re, b.im])
}

/// Rescales a unitary by a phase so that its determinant is 1. The sign of
/// the square root is chosen so that the first nonzero coordinate is positive.
pub fn to_special_unitary(u: &UnitaryMat2) -> UnitaryMat2 {
    let phase = u.det().sqrt().inv();
    let v = u.with_phase(phase / phase.norm());
    let p = params_from_unitary(&v).map(|p| p.as_array()).unwrap_or([1.0, 0.0, 0.0, 0.0]);
    match p.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => v.with_phase(-ONE),
        _ => v,
    }
}

fn check_angle(deg: f64) -> Result<()> {
    if deg.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("non-finite plate angle {deg}")))
    }
}

fn hwp_unchecked(deg: f64) -> UnitaryMat2 {
    let (s, c) = (2.0 * deg.to_radians()).sin_cos();
    UnitaryMat2::from_raw([[-I * c, -I * s], [-I * s, I * c]])
}

fn qwp_unchecked(deg: f64) -> UnitaryMat2 {
    let (s, c) = (2.0 * deg.to_radians()).sin_cos();
    let k = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryMat2::from_raw([
        [(ONE - I * c) * k, -I * s * k],
        [-I * s * k, (ONE + I * c) * k],
    ])
}

/// Half-wave plate with its fast axis at `deg` degrees from the vertical.
pub fn hwp(deg: f64) -> Result<UnitaryMat2> {
    check_angle(deg)?;
    Ok(hwp_unchecked(deg))
}

/// Quarter-wave plate with its fast axis at `deg` degrees from the vertical.
pub fn qwp(deg: f64) -> Result<UnitaryMat2> {
    check_angle(deg)?;
    Ok(qwp_unchecked(deg))
}

/// Probe plate angles `ω1..ω4` in degrees.
///
/// `Q_in = QWP(ω2)·HWP(ω1)` and `Q_out = HWP(ω4)·QWP(ω3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePlateAngles {
    omega: [f64; 4],
}

impl WavePlateAngles {
    pub fn new(omega: [f64; 4]) -> Result<Self> {
        for w in omega {
            check_angle(w)?;
        }
        Ok(Self { omega })
    }

    /// All four plates at zero.
    pub fn trivial() -> Self {
        Self { omega: [0.0; 4] }
    }

    pub fn omega(&self) -> [f64; 4] {
        self.omega
    }

    pub fn q_in(&self) -> UnitaryMat2 {
        qwp_unchecked(self.omega[1]) * hwp_unchecked(self.omega[0])
    }

    pub fn q_out(&self) -> UnitaryMat2 {
        hwp_unchecked(self.omega[3]) * qwp_unchecked(self.omega[2])
    }
}

/// Process plate angles `θ1..θ3` in degrees for `U = QWP(θ3)·HWP(θ2)·QWP(θ1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessAngles {
    theta: [f64; 3],
}

impl ProcessAngles {
    pub fn new(theta: [f64; 3]) -> Result<Self> {
        for t in theta {
            check_angle(t)?;
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> [f64; 3] {
        self.theta
    }
}

/// The unitary realised by the QWP–HWP–QWP process block.
pub fn process_from_plates(angles: &ProcessAngles) -> UnitaryMat2 {
    let [t1, t2, t3] = angles.theta;
    qwp_unchecked(t3) * hwp_unchecked(t2) * qwp_unchecked(t1)
}

/// `T = Q_out · U · Q_in`.
pub fn compose_interferometer(probe: &WavePlateAngles, u: &UnitaryMat2) -> UnitaryMat2 {
    probe.q_out() * *u * probe.q_in()
}

/// Smallest `max |A - φB|` over unit phases `φ`.
pub fn phase_distance(a: &UnitaryMat2, b: &UnitaryMat2) -> f64 {
    let dist = |phi: f64| a.max_abs_diff(&b.with_phase(Complex64::from_polar(1.0, phi)));

    // Least-squares phase as the first guess, then a coarse scan and a
    // golden-section refinement around the best point.
    let overlap: Complex64 = a
        .m
        .iter()
        .flatten()
        .zip(b.m.iter().flatten())
        .map(|(x, y)| y.conj() * x)
        .sum();
    let mut best_phi = overlap.arg();
    let mut best = dist(best_phi);
    const STEPS: usize = 360;
    let step = std::f64::consts::TAU / STEPS as f64;
    for k in 0..STEPS {
        let phi = k as f64 * step;
        let d = dist(phi);
        if d < best {
            best = d;
            best_phi = phi;
        }
    }
    let (mut lo, mut hi) = (best_phi - step, best_phi + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(dist(0.5 * (lo + hi)))
}

/// True when `A` and `B` agree up to a global phase within `tol`.
pub fn equal_up_to_phase(a: &UnitaryMat2, b: &UnitaryMat2, tol: f64) -> bool {
    phase_distance(a, b) <= tol
}

/// Haar-uniform point on SU(2): four standard normals projected onto the
/// unit 3-sphere.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Su2Params {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let norm2: f64 = v.iter().map(|c| c * c).sum();
        if norm2 > 1e-300 {
            if let Ok(p) = Su2Params::normalized(v) {
                return p;
            }
        }
    }
}

/// A finite ensemble of unitaries, each drawn with weight `1/K`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    label: String,
    elements: Vec<UnitaryMat2>,
    element_labels: Vec<String>,
}

impl Ensemble {
    pub fn new(
        label: impl Into<String>,
        elements: Vec<(String, UnitaryMat2)>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one element".into()));
        }
        for (name, u) in &elements {
            let err = u.unitarity_error();
            if err > UNITARY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "element {name} is not unitary ({err:e})"
                )));
            }
        }
        let (element_labels, elements) = elements.into_iter().unzip();
        Ok(Self { label: label.into(), elements, element_labels })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.elements.len() as f64
    }

    pub fn elements(&self) -> &[UnitaryMat2] {
        &self.elements
    }

    pub fn element_labels(&self) -> &[String] {
        &self.element_labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &UnitaryMat2)> {
        self.element_labels.iter().map(String::as_str).zip(self.elements.iter())
    }
}

/// `c0·I + cx·iX + cy·iY + cz·iZ` with the standard Pauli matrices. In sphere
/// coordinates this is `(c0, cz, cy, cx)`.
pub fn pauli_combination(c0: f64, cx: f64, cy: f64, cz: f64) -> UnitaryMat2 {
    let m = [
        [Complex64::new(c0, cz), Complex64::new(cy, cx)],
        [Complex64::new(-cy, cx), Complex64::new(c0, -cz)],
    ];
    UnitaryMat2::from_raw(m)
}

fn sign_char(s: f64) -> char {
    if s < 0.0 {
        '-'
    } else {
        '+'
    }
}

fn pauli_elements() -> Vec<(String, UnitaryMat2)> {
    vec![
        ("I".to_string(), pauli_combination(1.0, 0.0, 0.0, 0.0)),
        ("iX".to_string(), pauli_combination(0.0, 1.0, 0.0, 0.0)),
        ("-iY".to_string(), pauli_combination(0.0, 0.0, -1.0, 0.0)),
        ("iZ".to_string(), pauli_combination(0.0, 0.0, 0.0, 1.0)),
    ]
}

/// Sign patterns `(sx, sy, sz)` of the eight non-Pauli elements, in the same
/// order as the bundled design table.
pub(crate) const D2_SIGNS: [(f64, f64, f64); 8] = [
    (1.0, 1.0, 1.0),
    (1.0, -1.0, 1.0),
    (-1.0, 1.0, 1.0),
    (-1.0, -1.0, 1.0),
    (1.0, 1.0, -1.0),
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, -1.0),
];

/// The Pauli 1-design `{I, iX, -iY, iZ}` (unit quaternions `1, i, j, k`).
pub fn ensemble_d1() -> Ensemble {
    Ensemble::new("d1", pauli_elements()).expect("Pauli elements are unitary")
}

/// The twelve-element 2-design: the Pauli ensemble plus `(I ± iX ± iY ± iZ)/2`.
pub fn ensemble_d2() -> Ensemble {
    let mut elements = pauli_elements();
    for (sx, sy, sz) in D2_SIGNS {
        let label = format!(
            "(I{}iX{}iY{}iZ)/2",
            sign_char(sx),
            sign_char(sy),
            sign_char(sz)
        );
        elements.push((label, pauli_combination(0.5, 0.5 * sx, 0.5 * sy, 0.5 * sz)));
    }
    Ensemble::new("d2", elements).expect("design elements are unitary")
}

/// `k` Haar-random elements drawn from `rng`.
pub fn haar_ensemble<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Ensemble> {
    let elements = (0..k)
        .map(|i| (format!("haar{}", i + 1), su2_from_params(&haar_sample(rng))))
        .collect();
    Ensemble::new(format!("haar:{k}"), elements)
}
