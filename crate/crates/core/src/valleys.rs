//! Ellipsoidal conduction valleys, their confinement masses along a growth
//! axis, and the particle-in-a-box valley-splitting pattern.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planck constant, J·s.
const PLANCK: f64 = 6.626_070_15e-34;
/// Electron rest mass, kg.
const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge, C.
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// h²/(8 m₀ · 1 nm²) in eV; E = this / (m_z W²) with W in nm.
pub fn box_energy_scale_ev() -> f64 {
    PLANCK * PLANCK / (8.0 * ELECTRON_MASS * 1e-18) / ELEMENTARY_CHARGE
}

pub const MASS_GROUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValleyError {
    #[error("axis has zero or non-finite length")]
    ZeroAxis,
    #[error("effective masses must be positive and finite (ml = {ml}, mt = {mt})")]
    InvalidMass { ml: f64, mt: f64 },
    #[error("well width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("unknown valley family `{0}` (expected X0 or L)")]
    UnknownFamily(String),
    #[error("cannot parse growth axis `{0}` (expected e.g. 001, 111 or 1,-1,0)")]
    BadAxis(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValleyFamily {
    X0,
    L,
}

impl std::str::FromStr for ValleyFamily {
    type Err = ValleyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "X0" | "X" | "X₀" | "DELTA" => Ok(ValleyFamily::X0),
            "L" => Ok(ValleyFamily::L),
            _ => Err(ValleyError::UnknownFamily(s.to_string())),
        }
    }
}

impl ValleyFamily {
    pub fn size(self) -> usize {
        match self {
            ValleyFamily::X0 => 6,
            ValleyFamily::L => 4,
        }
    }
}

/// Default Si Δ-valley masses (m₀).
pub const X0_ML: f64 = 0.916;
pub const X0_MT: f64 = 0.190;
/// Default L-valley masses (m₀), Ge-like anisotropy.
pub const L_ML: f64 = 1.64;
pub const L_MT: f64 = 0.082;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Valley {
    /// Unit vector along the longitudinal axis.
    pub axis: [f64; 3],
    pub ml: f64,
    pub mt: f64,
    pub family: ValleyFamily,
}

fn normalise(v: [f64; 3]) -> Result<[f64; 3], ValleyError> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(ValleyError::ZeroAxis);
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// Parse `001`, `111`, `-111` style Miller indices or `x,y,z` components.
pub fn parse_axis(s: &str) -> Result<[f64; 3], ValleyError> {
    let bad = || ValleyError::BadAxis(s.to_string());
    let parts: Vec<f64> = if s.contains(',') {
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    } else {
        let mut out = Vec::new();
        let mut neg = false;
        for ch in s.trim().chars() {
            match ch {
                '-' => neg = true,
                d if d.is_ascii_digit() => {
                    let v = f64::from(d.to_digit(10).unwrap());
                    out.push(if neg { -v } else { v });
                    neg = false;
                }
                _ => return Err(bad()),
            }
        }
        out
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    normalise([parts[0], parts[1], parts[2]]).map_err(|_| bad())
}

/// 1/m_z = cos²θ/ml + sin²θ/mt with θ the angle between axis and growth.
pub fn confinement_mass(valley: &Valley, growth_axis: [f64; 3]) -> Result<f64, ValleyError> {
    let a = normalise(valley.axis)?;
    let g = normalise(growth_axis)?;
    let c = (a[0] * g[0] + a[1] * g[1] + a[2] * g[2]).clamp(-1.0, 1.0);
    let c2 = c * c;
    Ok(1.0 / (c2 / valley.ml + (1.0 - c2) / valley.mt))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValleySet {
    pub valleys: Vec<Valley>,
    pub growth_axis: [f64; 3],
}

impl ValleySet {
    fn check_masses(ml: f64, mt: f64) -> Result<(), ValleyError> {
        if !(ml.is_finite() && mt.is_finite() && ml > 0.0 && mt > 0.0) {
            return Err(ValleyError::InvalidMass { ml, mt });
        }
        Ok(())
    }

    /// Six Δ valleys along ±x, ±y, ±z.
    pub fn x0(ml: f64, mt: f64, growth_axis: [f64; 3]) -> Result<Self, ValleyError> {
        Self::check_masses(ml, mt)?;
        let mut valleys = Vec::with_capacity(6);
        for i in 0..3 {
            for s in [1.0, -1.0] {
                let mut axis = [0.0; 3];
                axis[i] = s;
                valleys.push(Valley { axis, ml, mt, family: ValleyFamily::X0 });
            }
        }
        Ok(Self { valleys, growth_axis: normalise(growth_axis)? })
    }

    /// Four L valleys along (±1, ±1, ±1)/√3; the eight zone-edge
    /// half-ellipsoids pair up across the zone boundary.
    pub fn l(ml: f64, mt: f64, growth_axis: [f64; 3]) -> Result<Self, ValleyError> {
        Self::check_masses(ml, mt)?;
        let s = 1.0 / 3f64.sqrt();
        let axes = [[s, s, s], [-s, s, s], [s, -s, s], [s, s, -s]];
        let valleys = axes
            .iter()
            .map(|&axis| Valley { axis, ml, mt, family: ValleyFamily::L })
            .collect();
        Ok(Self { valleys, growth_axis: normalise(growth_axis)? })
    }

    pub fn family(family: ValleyFamily, ml: f64, mt: f64, growth_axis: [f64; 3]) -> Result<Self, ValleyError> {
        match family {
            ValleyFamily::X0 => Self::x0(ml, mt, growth_axis),
            ValleyFamily::L => Self::l(ml, mt, growth_axis),
        }
    }

    /// Apply the same rotation matrix to the growth axis and every valley.
    pub fn rotated(&self, r: [[f64; 3]; 3]) -> Self {
        let rot = |v: [f64; 3]| {
            let mut o = [0.0; 3];
            for i in 0..3 {
                o[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
            }
            o
        };
        Self {
            valleys: self.valleys.iter().map(|v| Valley { axis: rot(v.axis), ..*v }).collect(),
            growth_axis: rot(self.growth_axis),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValleyGroup {
    /// Confinement mass (m₀), the group mean.
    pub m_z: f64,
    pub degeneracy: usize,
    /// h²/(8 m_z m₀ W²), eV.
    pub energy_ev: f64,
    /// Energy above the ground group, eV.
    pub relative_energy_ev: f64,
    /// Indices into the valley set.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingReport {
    pub well_width_nm: f64,
    pub groups: Vec<ValleyGroup>,
    pub ground_degeneracy: usize,
    /// First excited minus ground group energy, eV (0 with one group).
    pub splitting_ev: f64,
}

impl SplittingReport {
    pub fn degeneracies(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.degeneracy).collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:>6} {:>12} {:>11} {:>14} {:>14}\n", "group", "m_z (m0)", "degeneracy", "E (eV)", "E - E0 (eV)");
        for (i, g) in self.groups.iter().enumerate() {
            out.push_str(&format!(
                "{:>6} {:>12.6} {:>11} {:>14.8} {:>14.8}\n",
                i, g.m_z, g.degeneracy, g.energy_ev, g.relative_energy_ev
            ));
        }
        out
    }
}

/// Group valleys by confinement mass, heaviest (lowest energy) first.
pub fn split_valleys(set: &ValleySet, well_width_nm: f64) -> Result<SplittingReport, ValleyError> {
    if !(well_width_nm.is_finite() && well_width_nm > 0.0) {
        return Err(ValleyError::InvalidWidth(well_width_nm));
    }
    let mut masses: Vec<(usize, f64)> = set
        .valleys
        .iter()
        .enumerate()
        .map(|(i, v)| confinement_mass(v, set.growth_axis).map(|m| (i, m)))
        .collect::<Result<_, _>>()?;
    masses.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let scale = box_energy_scale_ev() / (well_width_nm * well_width_nm);
    let mut groups: Vec<ValleyGroup> = Vec::new();
    let mut anchor = f64::NAN;
    for (i, m) in masses {
        match groups.last_mut() {
            Some(g) if (anchor - m).abs() <= MASS_GROUP_TOL => {
                g.members.push(i);
                g.degeneracy += 1;
                g.m_z += (m - g.m_z) / g.degeneracy as f64;
            }
            _ => {
                anchor = m;
                groups.push(ValleyGroup { m_z: m, degeneracy: 1, energy_ev: 0.0, relative_energy_ev: 0.0, members: vec![i] });
            }
        }
    }
    for g in &mut groups {
        g.energy_ev = scale / g.m_z;
        g.members.sort_unstable();
    }
    let e0 = groups[0].energy_ev;
    for g in &mut groups {
        g.relative_energy_ev = g.energy_ev - e0;
    }
    let splitting_ev = groups.get(1).map_or(0.0, |g| g.energy_ev - e0);
    Ok(SplittingReport {
        well_width_nm,
        ground_degeneracy: groups[0].degeneracy,
        groups,
        splitting_ev,
    })
}
