//! Photon-number statistics of a two-mode unitary.
//!
//! For an input with `n1` photons in mode 1 and `n2` in mode 2, the amplitude
//! of finding `k1, k2` at the output is the permanent of the submatrix of `T`
//! that repeats column `j` `n_j` times and row `i` `k_i` times, divided by
//! `sqrt(n1! n2! k1! k2!)`. Rows of `T` index outputs and columns index inputs.
//!
//! Partial distinguishability between the two input modes is modelled by a
//! single mismatch angle `θ`: with weight `cos²θ` all photons interfere, with
//! weight `sin²θ` the mode-1 photons and the mode-2 photons scatter as two
//! mutually distinguishable groups.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::su2::UnitaryMat2;
use crate::{Error, Result};

/// Largest total photon number accepted by the core routines.
pub const MAX_PHOTONS: u32 = 8;
/// Normalisation tolerance for [`OutcomeDistribution`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Photon numbers `(nH, nV)` in the two input modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockInput {
    n_h: u32,
    n_v: u32,
}

impl FockInput {
    pub fn new(n_h: u32, n_v: u32) -> Result<Self> {
        let n = n_h + n_v;
        if n == 0 || n > MAX_PHOTONS {
            return Err(Error::InvalidParameter(format!(
                "total photon number {n} outside 1..={MAX_PHOTONS}"
            )));
        }
        Ok(Self { n_h, n_v })
    }

    /// The input used for `n`-photon experiments: `|1,0⟩`, `|1,1⟩`, `|2,1⟩`.
    pub fn standard(n: u32) -> Result<Self> {
        match n {
            1 => Self::new(1, 0),
            2 => Self::new(1, 1),
            3 => Self::new(2, 1),
            _ => Err(Error::InvalidParameter(format!("no standard input for {n} photons"))),
        }
    }

    pub fn n_h(&self) -> u32 {
        self.n_h
    }
    pub fn n_v(&self) -> u32 {
        self.n_v
    }
    pub fn total(&self) -> u32 {
        self.n_h + self.n_v
    }
}

/// Output photon numbers `(k, n - k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub first: u32,
    pub second: u32,
}

impl Outcome {
    pub fn new(first: u32, second: u32) -> Self {
        Self { first, second }
    }

    pub fn total(&self) -> u32 {
        self.first + self.second
    }

    /// Parses the two-digit form used in data files, e.g. `"21"`.
    pub fn parse(s: &str) -> Result<Self> {
        let digits: Vec<u32> = s.chars().filter_map(|c| c.to_digit(10)).collect();
        if digits.len() != 2 || s.chars().count() != 2 {
            return Err(Error::InvalidOutcome(format!("cannot parse outcome `{s}`")));
        }
        Ok(Self::new(digits[0], digits[1]))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first, self.second)
    }
}

/// Normalised probabilities over the `n + 1` outcomes `(n,0), (n-1,1), …, (0,n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    n: u32,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    /// `probs[i]` is the probability of outcome `(n - i, i)`.
    pub fn new(n: u32, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n as usize + 1 {
            return Err(Error::Dimension(format!(
                "{} probabilities for {n} photons",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -NORMALIZATION_TOL || *p > 1.0 + NORMALIZATION_TOL) {
            return Err(Error::InvalidParameter(format!("probabilities out of range: {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!("probabilities sum to {sum}")));
        }
        let probs = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        Ok(Self { n, probs })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(n: u32, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidParameter(format!("cannot normalise weights {weights:?}")));
        }
        Self::new(n, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn photons(&self) -> u32 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        (0..=self.n).map(move |i| Outcome::new(self.n - i, i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        self.outcomes().zip(self.probs.iter().copied())
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        if outcome.total() != self.n {
            return 0.0;
        }
        self.probs[outcome.second as usize]
    }

    pub fn index_of(&self, outcome: Outcome) -> Option<usize> {
        (outcome.total() == self.n).then_some(outcome.second as usize)
    }

    /// `a·self + (1 - a)·other`.
    pub fn mix(&self, other: &Self, a: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension("mixing distributions of different photon number".into()));
        }
        let probs = self.probs.iter().zip(&other.probs).map(|(p, q)| a * p + (1.0 - a) * q).collect();
        Self::new(self.n, probs)
    }

    /// Distribution of the summed outcome of two independent scatterings.
    pub fn convolve(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut probs = vec![0.0; n as usize + 1];
        for (i, p) in self.probs.iter().enumerate() {
            for (j, q) in other.probs.iter().enumerate() {
                probs[i + j] += p * q;
            }
        }
        Self { n, probs }
    }

    /// Uniform average of several distributions with equal photon number.
    pub fn average<'a>(dists: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut iter = dists.into_iter();
        let first = iter.next().ok_or_else(|| Error::InvalidParameter("nothing to average".into()))?;
        let mut acc = first.probs.clone();
        let mut count = 1usize;
        for d in iter {
            if d.n != first.n {
                return Err(Error::Dimension("averaging distributions of different photon number".into()));
            }
            acc.iter_mut().zip(&d.probs).for_each(|(a, p)| *a += p);
            count += 1;
        }
        Self::new(first.n, acc.into_iter().map(|a| a / count as f64).collect())
    }
}

fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let n = m.len();
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension(format!("{n}x{} matrix is not square", row.len())));
    }
    Ok(n)
}

/// Permanent by summing over all permutations.
pub fn permanent_expansion<T>(m: &[Vec<T>]) -> Result<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = T::zero();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let term = |perm: &[usize]| {
        perm.iter().enumerate().skip(1).fold(m[0][perm[0]].clone(), |acc, (r, &col)| acc * m[r][col].clone())
    };
    total = total + term(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total = total + term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Permanent by Ryser's inclusion–exclusion formula with Gray-code order.
pub fn permanent_ryser<T>(m: &[Vec<T>]) -> Result<T>
where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if n > 24 {
        return Err(Error::Dimension(format!("{n}x{n} is too large for an exact permanent")));
    }
    let mut row_sums: Vec<T> = vec![T::zero(); n];
    let (mut plus, mut minus) = (T::zero(), T::zero());
    let mut subset: u32 = 0;
    for k in 1u32..(1 << n) {
        let gray = k ^ (k >> 1);
        let changed = (gray ^ subset).trailing_zeros() as usize;
        let added = gray & (1 << changed) != 0;
        subset = gray;
        for (r, sum) in row_sums.iter_mut().enumerate() {
            let v = m[r][changed].clone();
            *sum = if added { sum.clone() + v } else { sum.clone() - v };
        }
        let prod = row_sums.iter().skip(1).fold(row_sums[0].clone(), |acc, s| acc * s.clone());
        // (-1)^(n - |S|)
        if (n as u32 - subset.count_ones()) % 2 == 0 {
            plus = plus + prod;
        } else {
            minus = minus + prod;
        }
    }
    Ok(plus - minus)
}

/// Exact permanent: direct expansion up to 3×3, Ryser above.
pub fn permanent<T>(m: &[Vec<T>]) -> Result<T>
where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    if check_square(m)? <= 3 {
        permanent_expansion(m)
    } else {
        permanent_ryser(m)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `n1! n2! k1! k2!` for the multiplicity normalisation.
pub fn multiplicity_norm(input: FockInput, output: Outcome) -> f64 {
    factorial(input.n_h) * factorial(input.n_v) * factorial(output.first) * factorial(output.second)
}

/// Submatrix of `t` with rows repeated by output multiplicity and columns by
/// input multiplicity.
pub fn scattering_submatrix<T: Clone>(
    t: &[[T; 2]; 2],
    input: FockInput,
    output: Outcome,
) -> Result<Vec<Vec<T>>> {
    if output.total() != input.total() {
        return Err(Error::InvalidOutcome(format!(
            "output {output} carries {} photons, input carries {}",
            output.total(),
            input.total()
        )));
    }
    let cols: Vec<usize> = std::iter::repeat_n(0, input.n_h as usize)
        .chain(std::iter::repeat_n(1, input.n_v as usize))
        .collect();
    let rows = std::iter::repeat_n(0, output.first as usize).chain(std::iter::repeat_n(1, output.second as usize));
    Ok(rows.map(|r| cols.iter().map(|&c| t[r][c].clone()).collect()).collect())
}

/// Probability of `input → output` through `t`.
pub fn transition_probability(t: &UnitaryMat2, input: FockInput, output: Outcome) -> Result<f64> {
    let sub = scattering_submatrix(&t.entries(), input, output)?;
    let amp: Complex64 = permanent(&sub)?;
    Ok(amp.norm_sqr() / multiplicity_norm(input, output))
}

/// All output probabilities for a fixed input.
pub fn outcome_distribution(t: &UnitaryMat2, input: FockInput) -> OutcomeDistribution {
    let n = input.total();
    let probs = (0..=n)
        .map(|i| transition_probability(t, input, Outcome::new(n - i, i)).expect("photon number conserved"))
        .collect();
    OutcomeDistribution::new(n, probs).expect("unitary scattering is normalised")
}

/// `|T11 T22 + T12 T21|²`, the coincidence probability for one photon per input.
pub fn hom_coincidence(t: &UnitaryMat2) -> f64 {
    let m = t.entries();
    (m[0][0] * m[1][1] + m[0][1] * m[1][0]).norm_sqr()
}

/// Single-parameter mode mismatch between the two input modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MismatchModel {
    theta: f64,
}

impl MismatchModel {
    /// `theta` in radians, within `[0, π/2]`.
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidParameter(format!("mismatch θ = {theta} outside [0, π/2]")));
        }
        Ok(Self { theta })
    }

    pub fn perfect() -> Self {
        Self { theta: 0.0 }
    }

    pub fn from_visibility(v: f64) -> Result<Self> {
        Self::new(visibility_to_mismatch(v)?)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Weight of the fully interfering term, `cos²θ`.
    pub fn overlap(&self) -> f64 {
        self.theta.cos().powi(2)
    }
}

/// Output statistics when the mode-1 photons and the mode-2 photons are
/// mutually distinguishable (each group still internally identical).
pub fn distinguishable_distribution(t: &UnitaryMat2, input: FockInput) -> OutcomeDistribution {
    let groups = [(input.n_h, 0), (0, input.n_v)];
    groups
        .iter()
        .filter(|(a, b)| a + b > 0)
        .map(|&(a, b)| outcome_distribution(t, FockInput { n_h: a, n_v: b }))
        .reduce(|acc, d| acc.convolve(&d))
        .expect("input has at least one photon")
}

/// `cos²θ · P_full + sin²θ · P_partial` for any input; inputs with all photons
/// in one mode are unaffected by the mismatch.
pub fn distribution_with_mismatch(
    t: &UnitaryMat2,
    input: FockInput,
    m: &MismatchModel,
) -> OutcomeDistribution {
    let full = outcome_distribution(t, input);
    if input.n_h == 0 || input.n_v == 0 || m.theta == 0.0 {
        return full;
    }
    let partial = distinguishable_distribution(t, input);
    full.mix(&partial, m.overlap()).expect("same photon number")
}

/// Two-photon `|1,1⟩` statistics with mode mismatch.
pub fn distribution_with_mismatch_2(t: &UnitaryMat2, m: &MismatchModel) -> OutcomeDistribution {
    distribution_with_mismatch(t, FockInput { n_h: 1, n_v: 1 }, m)
}

/// Three-photon `|2,1⟩` statistics with the V photon partially
/// distinguishable from the H pair.
pub fn distribution_with_mismatch_3(t: &UnitaryMat2, m: &MismatchModel) -> OutcomeDistribution {
    distribution_with_mismatch(t, FockInput { n_h: 2, n_v: 1 }, m)
}

/// Visibility of the HOM feature for mismatch `θ`: `-cos²θ`.
pub fn mismatch_to_visibility(theta: f64) -> f64 {
    -theta.cos().powi(2)
}

/// `θ = arccos(√|V|)`. The sign of `V` is ignored.
pub fn visibility_to_mismatch(v: f64) -> Result<f64> {
    let a = v.abs();
    if !a.is_finite() || a <= 0.0 || a > 1.0 {
        return Err(Error::InvalidVisibility(v));
    }
    Ok(a.sqrt().acos())
}

/// Probability of both photons leaving in output 1 as a function of delay.
#[derive(Clone, Debug, PartialEq)]
pub struct HomScan {
    pub delays: Vec<f64>,
    pub sigma: f64,
    pub bunching: Vec<f64>,
    /// Value at zero delay.
    pub overlapped: f64,
    /// Value for fully separated wavepackets.
    pub separated: f64,
}

impl HomScan {
    /// `(separated - overlapped) / separated`; `-1` for perfect interference.
    pub fn visibility(&self) -> f64 {
        (self.separated - self.overlapped) / self.separated
    }
}

/// Bunching probability `P(2,0)` versus delay with a Gaussian overlap
/// envelope `exp(-Δτ²/2σ²)`.
pub fn hom_dip_scan(t: &UnitaryMat2, m: &MismatchModel, sigma: f64, delays: &[f64]) -> Result<HomScan> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("coherence width σ = {sigma}")));
    }
    let bunch = Outcome::new(2, 0);
    let separated = distinguishable_distribution(t, FockInput { n_h: 1, n_v: 1 }).get(bunch);
    let overlapped = distribution_with_mismatch_2(t, m).get(bunch);
    let bunching = delays
        .iter()
        .map(|d| separated + (overlapped - separated) * (-d * d / (2.0 * sigma * sigma)).exp())
        .collect();
    Ok(HomScan { delays: delays.to_vec(), sigma, bunching, overlapped, separated })
}

/// Gaussian fit `y = baseline + amplitude · exp(-(x - center)² / 2σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFit {
    pub baseline: f64,
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub sse: f64,
}

impl GaussianFit {
    /// `-amplitude / baseline`.
    pub fn visibility(&self) -> f64 {
        -self.amplitude / self.baseline
    }
}

fn linear_gaussian_fit(x: &[f64], y: &[f64], center: f64, sigma: f64) -> GaussianFit {
    let g: Vec<f64> = x.iter().map(|xi| (-(xi - center).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let n = x.len() as f64;
    let (sg, sgg) = (g.iter().sum::<f64>(), g.iter().map(|v| v * v).sum::<f64>());
    let (sy, sgy) = (y.iter().sum::<f64>(), g.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
    let det = n * sgg - sg * sg;
    let (baseline, amplitude) = if det.abs() < 1e-300 {
        (sy / n, 0.0)
    } else {
        ((sgg * sy - sg * sgy) / det, (n * sgy - sg * sy) / det)
    };
    let sse = g.iter().zip(y).map(|(gi, yi)| (baseline + amplitude * gi - yi).powi(2)).sum();
    GaussianFit { baseline, amplitude, center, sigma, sse }
}

/// Least-squares Gaussian fit; baseline and amplitude are solved exactly for
/// each trial centre and width, which are located by a grid scan followed by
/// alternating golden-section refinement.
pub fn fit_gaussian(x: &[f64], y: &[f64]) -> Result<GaussianFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::Dimension("a Gaussian fit needs at least four (x, y) pairs".into()));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::Dimension("fit abscissae are all equal".into()));
    }
    let (s_lo, s_hi) = (span * 1e-3, span);
    let mut best = linear_gaussian_fit(x, y, 0.5 * (lo + hi), 0.25 * span);
    const GRID: usize = 60;
    for i in 0..=GRID {
        let c = lo + span * i as f64 / GRID as f64;
        for j in 0..=GRID {
            let s = s_lo * (s_hi / s_lo).powf(j as f64 / GRID as f64);
            let f = linear_gaussian_fit(x, y, c, s);
            if f.sse < best.sse {
                best = f;
            }
        }
    }
    let golden = |mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64| {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let m1 = b - g * (b - a);
            let m2 = a + g * (b - a);
            if f(m1) < f(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        0.5 * (a + b)
    };
    for _ in 0..20 {
        let (c0, s0) = (best.center, best.sigma);
        let dc = span / GRID as f64;
        let c = golden(c0 - dc, c0 + dc, &|c| linear_gaussian_fit(x, y, c, s0).sse);
        let s = golden((s0 * 0.8).max(s_lo * 0.5), s0 * 1.25, &|s| linear_gaussian_fit(x, y, c, s).sse);
        let f = linear_gaussian_fit(x, y, c, s);
        if f.sse <= best.sse {
            best = f;
        }
    }
    Ok(best)
}
