//! Independent reference implementations used by the integration tests.
//!
//! None of these call the library's permanent, mismatch or Haar code.

#![allow(dead_code)]

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One input photon: its polarisation mode (0 = H, 1 = V) and its internal
/// state over two orthogonal internal modes.
#[derive(Clone, Copy, Debug)]
pub struct Photon {
    pub mode: usize,
    pub internal: [Complex64; 2],
}

impl Photon {
    pub fn pure(mode: usize) -> Self {
        Self { mode, internal: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)] }
    }

    pub fn tilted(mode: usize, theta: f64) -> Self {
        Self { mode, internal: [Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0)] }
    }
}

/// Expands `Π_i (Σ_{o,k} t[o][mode_i] c_i[k] b†_{o,k}) |0⟩` term by term over
/// every assignment of photons to the four output modes `(o, k)`, then reads
/// off photon-number probabilities with the `Π occ!` bosonic factor and
/// marginalises over internal modes. Returns `P(k photons in output 0)` for
/// `k = n, n-1, …, 0`.
pub fn brute_force_distribution(t: [[Complex64; 2]; 2], photons: &[Photon]) -> Vec<f64> {
    let n = photons.len();
    let mut amplitudes: HashMap<[usize; 4], Complex64> = HashMap::new();
    let total = 4usize.pow(n as u32);
    for assignment in 0..total {
        let mut occ = [0usize; 4];
        let mut amp = Complex64::new(1.0, 0.0);
        let mut a = assignment;
        for p in photons {
            let target = a % 4;
            a /= 4;
            let (o, k) = (target / 2, target % 2);
            amp *= t[o][p.mode] * p.internal[k];
            occ[target] += 1;
        }
        *amplitudes.entry(occ).or_default() += amp;
    }
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let mut probs = vec![0.0; n + 1];
    let mut norm = 0.0;
    for (occ, amp) in amplitudes {
        let w = amp.norm_sqr() * occ.iter().map(|k| fact(*k)).product::<f64>();
        let in_first = occ[0] + occ[1];
        probs[n - in_first] += w;
        norm += w;
    }
    probs.iter().map(|p| p / norm).collect()
}

/// Indistinguishable photons with `n_h` in H and `n_v` in V.
pub fn brute_force_fock(t: [[Complex64; 2]; 2], n_h: usize, n_v: usize) -> Vec<f64> {
    let photons: Vec<Photon> = std::iter::repeat_n(Photon::pure(0), n_h).chain(std::iter::repeat_n(Photon::pure(1), n_v)).collect();
    brute_force_distribution(t, &photons)
}

/// H photons share one internal state; V photons are tilted by `theta` away
/// from it.
pub fn brute_force_mismatch(t: [[Complex64; 2]; 2], n_h: usize, n_v: usize, theta: f64) -> Vec<f64> {
    let photons: Vec<Photon> =
        std::iter::repeat_n(Photon::pure(0), n_h).chain(std::iter::repeat_n(Photon::tilted(1, theta), n_v)).collect();
    brute_force_distribution(t, &photons)
}

/// Uniform point on S³ by Marsaglia's two-disc method.
pub fn marsaglia_s3<R: Rng>(rng: &mut R) -> [f64; 4] {
    let disc = |rng: &mut R| loop {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        let s = a * a + b * b;
        if s < 1.0 && s > 0.0 {
            return (a, b, s);
        }
    };
    let (x1, y1, s1) = disc(rng);
    let (x2, y2, s2) = disc(rng);
    let f = ((1.0 - s1) / s2).sqrt();
    [x1, y1, x2 * f, y2 * f]
}

/// Monte Carlo mean and standard error of each monomial over `samples`
/// Marsaglia points, split into seeded parallel chunks.
pub fn monte_carlo_moments(exponents: &[[u32; 4]], samples: usize, seed: u64) -> Vec<(f64, f64)> {
    const CHUNKS: usize = 64;
    let per_chunk = samples / CHUNKS;
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut sum = vec![0.0; exponents.len()];
            let mut sum_sq = vec![0.0; exponents.len()];
            for _ in 0..per_chunk {
                let v = marsaglia_s3(&mut rng);
                let mut powers = [[1.0f64; 9]; 4];
                for (i, x) in v.iter().enumerate() {
                    for k in 1..9 {
                        powers[i][k] = powers[i][k - 1] * x;
                    }
                }
                for (j, e) in exponents.iter().enumerate() {
                    let m = powers[0][e[0] as usize] * powers[1][e[1] as usize] * powers[2][e[2] as usize] * powers[3][e[3] as usize];
                    sum[j] += m;
                    sum_sq[j] += m * m;
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let n = (per_chunk * CHUNKS) as f64;
    (0..exponents.len())
        .map(|j| {
            let s: f64 = partial.iter().map(|p| p.0[j]).sum();
            let ss: f64 = partial.iter().map(|p| p.1[j]).sum();
            let mean = s / n;
            let var = (ss / n - mean * mean).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}

/// Every exponent tuple of total degree `d`.
pub fn all_patterns(d: u32) -> Vec<[u32; 4]> {
    let mut v = Vec::new();
    for a in 0..=d {
        for b in 0..=d - a {
            for c in 0..=d - a - b {
                v.push([a, b, c, d - a - b - c]);
            }
        }
    }
    v
}

/// Random 2×2 unitary (not necessarily special) from a seeded generator,
/// built from Euler angles and a global phase.
pub fn random_unitary<R: Rng>(rng: &mut R) -> [[Complex64; 2]; 2] {
    let tau = std::f64::consts::TAU;
    let (a, b, c, g): (f64, f64, f64, f64) =
        (rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau));
    let th: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (co, si) = (th.cos(), th.sin());
    [[e(g + a) * co, e(g + b) * si], [-e(g + c - b + a) * si, e(g + c) * co]]
}
