//! Post-processing of solved fields.

use serde::Serialize;

use super::geometry::{Geometry, Region};
use super::solver::FieldGrid;
use super::ElectrostaticsError;

/// Field quantised into `n_levels` equal-width potential bands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourMap {
    pub nz: usize,
    pub ny: usize,
    pub n_levels: usize,
    pub min: f64,
    pub max: f64,
    /// Row-major band index in `0..n_levels`.
    pub labels: Vec<usize>,
    /// A constant field maps to the single band 0.
    pub constant: bool,
}

impl ContourMap {
    pub fn label(&self, iz: usize, iy: usize) -> usize {
        self.labels[iz * self.ny + iy]
    }

    /// Lower potential edge of band `k`.
    pub fn band_floor(&self, k: usize) -> f64 {
        self.min + (self.max - self.min) * k as f64 / self.n_levels as f64
    }

    /// Plain (P2) graymap, top row first, band k at gray 255·k/(n−1).
    pub fn write_pgm<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "P2\n{} {}\n255", self.ny, self.nz)?;
        let scale = if self.n_levels > 1 { 255.0 / (self.n_levels - 1) as f64 } else { 0.0 };
        for iz in (0..self.nz).rev() {
            let row: Vec<String> =
                (0..self.ny).map(|iy| ((self.label(iz, iy) as f64 * scale).round() as u32).to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// `z,y,level` on the same coordinates as the potential CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, h_nm: f64) -> std::io::Result<()> {
        writeln!(w, "z,y,level")?;
        let yc = 0.5 * (self.ny as f64 - 1.0);
        for iz in 0..self.nz {
            for iy in 0..self.ny {
                writeln!(w, "{:.6},{:.6},{}", iz as f64 * h_nm, (iy as f64 - yc) * h_nm, self.label(iz, iy))?;
            }
        }
        Ok(())
    }
}

pub fn contour_quantize(field: &FieldGrid, n_levels: usize) -> Result<ContourMap, ElectrostaticsError> {
    if n_levels == 0 {
        return Err(ElectrostaticsError::NoLevels);
    }
    let (min, max) = (field.min(), field.max());
    let span = max - min;
    let constant = !(span > 0.0);
    let labels = field
        .phi
        .iter()
        .map(|&v| {
            if constant {
                0
            } else {
                (((v - min) / span * n_levels as f64).floor() as usize).min(n_levels - 1)
            }
        })
        .collect();
    Ok(ContourMap { nz: field.nz, ny: field.ny, n_levels, min, max, labels, constant })
}

/// |∂φ/∂z| statistics over fin nodes in the gate footprint, V/nm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinMetric {
    pub max: f64,
    pub mean: f64,
    pub nodes: usize,
}

/// Central-difference z-gradient over Si fin nodes in the fin columns.
/// With `window_nm`, only rows within that depth below the fin top count.
pub fn fin_gradient_metric(
    field: &FieldGrid,
    geom: &Geometry,
    window_nm: Option<f64>,
) -> Result<FinMetric, ElectrostaticsError> {
    if field.nz != geom.nz || field.ny != geom.ny {
        return Err(ElectrostaticsError::GeometryMismatch(field.nz, field.ny, geom.nz, geom.ny));
    }
    let first_row = match window_nm {
        Some(w) if w.is_finite() && w >= 0.0 => geom.fin_top.saturating_sub((w / geom.h_nm).round() as usize),
        Some(w) => return Err(ElectrostaticsError::BadExtent { name: "window_nm", value: w }),
        None => 0,
    };
    let (a, b) = geom.fin_cols;
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut nodes = 0;
    for iz in first_row.max(1)..geom.fin_top.min(geom.nz - 1) {
        for iy in a..b {
            if geom.region(iz, iy) != Region::SiFin {
                continue;
            }
            let g = ((field.at(iz + 1, iy) - field.at(iz - 1, iy)) / (2.0 * geom.h_nm)).abs();
            max = max.max(g);
            sum += g;
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(ElectrostaticsError::EmptyFin);
    }
    Ok(FinMetric { max, mean: sum / nodes as f64, nodes })
}
