//! Node-centred z–y cross-sections of planarized and protruding fin-MOS
//! structures. Row 0 is the bottom of the substrate; each node owns an h×h
//! cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ElectrostaticsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    SiFin,
    Oxide,
    Gate,
    Substrate,
    Vacuum,
}

impl Region {
    pub fn code(self) -> u8 {
        match self {
            Region::SiFin => 0,
            Region::Oxide => 1,
            Region::Gate => 2,
            Region::Substrate => 3,
            Region::Vacuum => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Oxide fills beside the fin to a flat top; the gate sits on top.
    Planarized,
    /// Gate and oxide wrap the exposed top and sidewalls of the fin.
    Protruding,
}

impl FromStr for Variant {
    type Err = ElectrostaticsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planarized" | "planarised" => Ok(Variant::Planarized),
            "protruding" => Ok(Variant::Protruding),
            other => Err(ElectrostaticsError::UnknownVariant(other.to_string())),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Planarized => "planarized",
            Variant::Protruding => "protruding",
        })
    }
}

/// Layer thicknesses in nm. Each must be a whole number of cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extents {
    pub substrate_nm: f64,
    pub fin_height_nm: f64,
    /// Fin height above the shallow-trench oxide (protruding variant).
    pub exposed_nm: f64,
    pub oxide_nm: f64,
    pub gate_nm: f64,
    /// Lateral space on each side of the fin.
    pub margin_nm: f64,
    pub vacuum_nm: f64,
}

impl Default for Extents {
    fn default() -> Self {
        Self {
            substrate_nm: 2.0,
            fin_height_nm: 10.0,
            exposed_nm: 6.0,
            oxide_nm: 1.0,
            gate_nm: 2.0,
            margin_nm: 6.0,
            vacuum_nm: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Geometry {
    pub variant: Variant,
    pub h_nm: f64,
    pub fin_width_nm: f64,
    pub extents: Extents,
    pub nz: usize,
    pub ny: usize,
    /// Row-major `[iz * ny + iy]`.
    pub regions: Vec<Region>,
    /// Fin columns `[start, end)`.
    pub fin_cols: (usize, usize),
    /// First row above the fin.
    pub fin_top: usize,
}

fn cells(name: &'static str, value: f64, h: f64) -> Result<usize, ElectrostaticsError> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(ElectrostaticsError::BadExtent { name, value });
    }
    let n = value / h;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(ElectrostaticsError::NotMultiple { name, value, h });
    }
    Ok(r as usize)
}

impl Geometry {
    pub fn region(&self, iz: usize, iy: usize) -> Region {
        self.regions[iz * self.ny + iy]
    }

    pub fn count(&self, r: Region) -> usize {
        self.regions.iter().filter(|&&x| x == r).count()
    }

    /// Gate node columns on row `iz`.
    pub fn gate_columns(&self, iz: usize) -> Vec<usize> {
        (0..self.ny).filter(|&iy| self.region(iz, iy) == Region::Gate).collect()
    }

    /// Width in nm of the gate directly above the fin (topmost row of the
    /// gate restricted to the fin columns).
    pub fn gate_width_over_fin_nm(&self) -> f64 {
        let (a, b) = self.fin_cols;
        let cols = (self.fin_top..self.nz)
            .find(|&iz| (a..b).any(|iy| self.region(iz, iy) == Region::Gate))
            .map_or(0, |iz| (a..b).filter(|&iy| self.region(iz, iy) == Region::Gate).count());
        cols as f64 * self.h_nm
    }

    /// Region codes as rows of digits, top row first.
    pub fn render(&self) -> String {
        let mut s = String::with_capacity((self.ny + 1) * self.nz);
        for iz in (0..self.nz).rev() {
            for iy in 0..self.ny {
                s.push(match self.region(iz, iy) {
                    Region::SiFin => 'S',
                    Region::Oxide => 'o',
                    Region::Gate => 'G',
                    Region::Substrate => '#',
                    Region::Vacuum => '.',
                });
            }
            s.push('\n');
        }
        s
    }
}

/// Build the cross-section for a fin of width `w_nm` on a grid of spacing
/// `h_nm`.
pub fn build_geometry(variant: Variant, w_nm: f64, h_nm: f64, extents: &Extents) -> Result<Geometry, ElectrostaticsError> {
    if !(h_nm.is_finite() && h_nm > 0.0) {
        return Err(ElectrostaticsError::BadExtent { name: "h_nm", value: h_nm });
    }
    let w = cells("w_nm", w_nm, h_nm)?;
    if w == 0 {
        return Err(ElectrostaticsError::BadExtent { name: "w_nm", value: w_nm });
    }
    let sub = cells("substrate_nm", extents.substrate_nm, h_nm)?;
    let fin_h = cells("fin_height_nm", extents.fin_height_nm, h_nm)?;
    let exposed = cells("exposed_nm", extents.exposed_nm, h_nm)?;
    let tox = cells("oxide_nm", extents.oxide_nm, h_nm)?;
    let tg = cells("gate_nm", extents.gate_nm, h_nm)?;
    let margin = cells("margin_nm", extents.margin_nm, h_nm)?;
    let vac = cells("vacuum_nm", extents.vacuum_nm, h_nm)?;
    if sub == 0 || fin_h == 0 || tox == 0 || tg == 0 {
        return Err(ElectrostaticsError::BadExtent { name: "layers", value: 0.0 });
    }
    if exposed > fin_h {
        return Err(ElectrostaticsError::BadExtent { name: "exposed_nm", value: extents.exposed_nm });
    }
    // the wrapped gate must fit beside the fin
    if variant == Variant::Protruding && margin < tox + tg {
        return Err(ElectrostaticsError::FinTooWide { w_nm, domain_nm: (w + 2 * margin) as f64 * h_nm });
    }
    if margin == 0 {
        return Err(ElectrostaticsError::FinTooWide { w_nm, domain_nm: w as f64 * h_nm });
    }

    let ny = w + 2 * margin;
    let top = sub + fin_h;
    let nz = top + tox + tg + vac;
    let (yl, yr) = (margin, margin + w);
    let mut r = vec![Region::Vacuum; nz * ny];
    let mut set = |iz: usize, iy: usize, reg: Region| r[iz * ny + iy] = reg;
    for iz in 0..nz {
        for iy in 0..ny {
            let in_fin_cols = (yl..yr).contains(&iy);
            let reg = if iz < sub {
                Region::Substrate
            } else if iz < top && in_fin_cols {
                Region::SiFin
            } else {
                match variant {
                    Variant::Planarized => {
                        if iz < top + tox {
                            Region::Oxide
                        } else if iz < top + tox + tg && in_fin_cols {
                            Region::Gate
                        } else {
                            Region::Vacuum
                        }
                    }
                    Variant::Protruding => {
                        let sti = top - exposed;
                        if iz < sti {
                            Region::Oxide
                        } else {
                            let dy = if iy < yl { yl - iy } else if iy >= yr { iy - (yr - 1) } else { 0 };
                            let dz = iz.saturating_sub(top - 1);
                            let d = dy.max(dz);
                            if d <= tox {
                                Region::Oxide
                            } else if d <= tox + tg {
                                Region::Gate
                            } else {
                                Region::Vacuum
                            }
                        }
                    }
                }
            };
            set(iz, iy, reg);
        }
    }
    Ok(Geometry {
        variant,
        h_nm,
        fin_width_nm: w_nm,
        extents: *extents,
        nz,
        ny,
        regions: r,
        fin_cols: (yl, yr),
        fin_top: top,
    })
}
