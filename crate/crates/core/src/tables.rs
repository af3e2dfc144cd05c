//! Bundled wave-plate settings.
//!
//! Four CSV tables ship with the crate (and can be overridden from a
//! directory with the same file names):
//!
//! | file                  | columns                    | rows |
//! |-----------------------|----------------------------|------|
//! | `design_settings.csv` | `label,θ1,θ2,θ3`           | 12   |
//! | `p_settings.csv`      | `label,ω1,ω2,ω3,ω4`        | 9    |
//! | `q_settings.csv`      | `label,ω1,ω2,ω3,ω4`        | 25   |
//! | `r_settings.csv`      | `label,ω1,ω2,ω3,ω4`        | 5    |
//!
//! Angles are in degrees.
//!
//! Design labels follow the table's own Pauli convention, in which the `Y`
//! term carries the opposite sign to the standard `Y = [[0,-i],[i,0]]`: the
//! plates printed for `(I+iX-iY+iZ)/2` realise `(I+iX+iY+iZ)/2` in the
//! standard convention (up to a global phase). [`design_label_unitary`]
//! applies that convention.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::su2::{pauli_combination, ProcessAngles, UnitaryMat2, WavePlateAngles};
use crate::{Error, Result};

pub const DESIGN_FILE: &str = "design_settings.csv";
pub const P_FILE: &str = "p_settings.csv";
pub const Q_FILE: &str = "q_settings.csv";
pub const R_FILE: &str = "r_settings.csv";

const DESIGN_CSV: &str = include_str!("../data/design_settings.csv");
const P_CSV: &str = include_str!("../data/p_settings.csv");
const Q_CSV: &str = include_str!("../data/q_settings.csv");
const R_CSV: &str = include_str!("../data/r_settings.csv");

/// Which probe table a setting belongs to; fixes the photon number probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProbeFamily {
    /// Degree-2, one photon.
    P,
    /// Degree-4, two photons.
    Q,
    /// Degree-6, three photons.
    R,
}

impl ProbeFamily {
    pub fn photons(self) -> u32 {
        match self {
            ProbeFamily::P => 1,
            ProbeFamily::Q => 2,
            ProbeFamily::R => 3,
        }
    }

    pub fn from_photons(n: u32) -> Option<Self> {
        match n {
            1 => Some(ProbeFamily::P),
            2 => Some(ProbeFamily::Q),
            3 => Some(ProbeFamily::R),
            _ => None,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            ProbeFamily::P => "p",
            ProbeFamily::Q => "q",
            ProbeFamily::R => "r",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "p" | "P" => Some(ProbeFamily::P),
            "q" | "Q" => Some(ProbeFamily::Q),
            "r" | "R" => Some(ProbeFamily::R),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSetting {
    pub label: String,
    pub family: ProbeFamily,
    pub angles: WavePlateAngles,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSetting {
    pub label: String,
    pub angles: ProcessAngles,
}

#[derive(Clone, Debug)]
pub struct Tables {
    pub design: Vec<DesignSetting>,
    pub p: Vec<ProbeSetting>,
    pub q: Vec<ProbeSetting>,
    pub r: Vec<ProbeSetting>,
}

fn read_rows(text: &str, file: &str, ncols: usize) -> Result<Vec<(String, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header_len = reader.headers()?.len();
    if header_len != ncols + 1 {
        return Err(Error::Table(format!(
            "{file}: expected {} columns, found {header_len}",
            ncols + 1
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let label = record[0].to_string();
        let values = (1..=ncols)
            .map(|i| {
                record[i].parse::<f64>().map_err(|e| {
                    Error::Table(format!("{file}: row {label}: bad angle `{}`: {e}", &record[i]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((label, values));
    }
    Ok(rows)
}

fn parse_probe(text: &str, file: &str, family: ProbeFamily) -> Result<Vec<ProbeSetting>> {
    read_rows(text, file, 4)?
        .into_iter()
        .map(|(label, v)| {
            Ok(ProbeSetting {
                label,
                family,
                angles: WavePlateAngles::new([v[0], v[1], v[2], v[3]])?,
            })
        })
        .collect()
}

fn parse_design(text: &str) -> Result<Vec<DesignSetting>> {
    read_rows(text, DESIGN_FILE, 3)?
        .into_iter()
        .map(|(label, v)| Ok(DesignSetting { label, angles: ProcessAngles::new([v[0], v[1], v[2]])? }))
        .collect()
}

impl Tables {
    fn from_texts(design: &str, p: &str, q: &str, r: &str) -> Result<Self> {
        Ok(Self {
            design: parse_design(design)?,
            p: parse_probe(p, P_FILE, ProbeFamily::P)?,
            q: parse_probe(q, Q_FILE, ProbeFamily::Q)?,
            r: parse_probe(r, R_FILE, ProbeFamily::R)?,
        })
    }

    /// The tables compiled into the crate.
    pub fn bundled() -> Self {
        Self::from_texts(DESIGN_CSV, P_CSV, Q_CSV, R_CSV).expect("bundled tables parse")
    }

    /// Loads tables from `dir`; missing files fall back to the bundled copy.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let load = |name: &str, fallback: &'static str| -> Result<String> {
            let path = dir.join(name);
            if path.exists() {
                Ok(fs::read_to_string(path)?)
            } else {
                Ok(fallback.to_string())
            }
        };
        Self::from_texts(
            &load(DESIGN_FILE, DESIGN_CSV)?,
            &load(P_FILE, P_CSV)?,
            &load(Q_FILE, Q_CSV)?,
            &load(R_FILE, R_CSV)?,
        )
    }

    pub fn family(&self, family: ProbeFamily) -> &[ProbeSetting] {
        match family {
            ProbeFamily::P => &self.p,
            ProbeFamily::Q => &self.q,
            ProbeFamily::R => &self.r,
        }
    }

    /// Looks a probe setting up by label across all three probe tables.
    pub fn probe(&self, label: &str) -> Result<&ProbeSetting> {
        self.p
            .iter()
            .chain(&self.q)
            .chain(&self.r)
            .find(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(format!("`{label}`")))
    }

    /// The p and q settings, i.e. every setting with a degree-2 or degree-4
    /// probe polynomial.
    pub fn pq_settings(&self) -> impl Iterator<Item = &ProbeSetting> {
        self.p.iter().chain(&self.q)
    }
}

/// Parses a design-table label such as `iX`, `-iY` or `(I-iX+iY-iZ)/2` into
/// its unitary, reading the `Y` sign in the table's convention.
pub fn design_label_unitary(label: &str) -> Result<UnitaryMat2> {
    let unknown = || Error::UnknownLabel(format!("`{label}`"));
    let s: String = label.chars().filter(|c| !c.is_whitespace()).collect();
    let (body, half) = match s.strip_prefix('(').and_then(|b| b.strip_suffix(")/2")) {
        Some(b) => (b.to_string(), true),
        None => (s.clone(), false),
    };

    let mut coeff = [0.0f64; 4]; // I, iX, iY(table), iZ
    let mut rest = body.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let (sign, after) = match rest.as_bytes()[0] {
            b'+' => (1.0, &rest[1..]),
            b'-' => (-1.0, &rest[1..]),
            _ if first => (1.0, rest),
            _ => return Err(unknown()),
        };
        first = false;
        let (idx, len) = if after.starts_with("iX") {
            (1, 2)
        } else if after.starts_with("iY") {
            (2, 2)
        } else if after.starts_with("iZ") {
            (3, 2)
        } else if after.starts_with('I') {
            (0, 1)
        } else {
            return Err(unknown());
        };
        if coeff[idx] != 0.0 {
            return Err(unknown());
        }
        coeff[idx] = sign;
        rest = &after[len..];
    }
    let norm2: f64 = coeff.iter().map(|c| c * c).sum();
    let scale = if half { 0.5 } else { 1.0 };
    if (norm2 * scale * scale - 1.0).abs() > 1e-12 {
        return Err(unknown());
    }
    let [c0, cx, cy, cz] = coeff.map(|c| c * scale);
    Ok(pauli_combination(c0, cx, -cy, cz))
}
