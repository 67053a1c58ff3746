//! Finite-difference electrostatics of fin-MOS cross-sections.

pub mod analysis;
pub mod geometry;
pub mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{contour_quantize, fin_gradient_metric, ContourMap, FinMetric};
pub use geometry::{build_geometry, Extents, Geometry, Region, Variant};
pub use solver::{sine_benchmark_error, FieldGrid, PoissonProblem, SolverOptions, SweepOrder};

pub const EPS_SI: f64 = 11.7;
pub const EPS_OX: f64 = 3.9;
pub const EPS_VACUUM: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectrostaticsError {
    #[error("{name} = {value} is not a valid extent")]
    BadExtent { name: &'static str, value: f64 },
    #[error("{name} = {value} nm is not a whole number of {h} nm cells")]
    NotMultiple { name: &'static str, value: f64, h: f64 },
    #[error("fin width {w_nm} nm does not fit a {domain_nm} nm domain")]
    FinTooWide { w_nm: f64, domain_nm: f64 },
    #[error("unknown fin variant '{0}' (expected planarized or protruding)")]
    UnknownVariant(String),
    #[error("unknown interface mode '{0}' (expected dielectric_continuity or fixed_potential)")]
    UnknownInterfaceMode(String),
    #[error("grid {0}x{1} is too small")]
    GridTooSmall(usize, usize),
    #[error("grid arrays have inconsistent lengths")]
    ShapeMismatch,
    #[error("permittivity {0} must be positive")]
    BadPermittivity(f64),
    #[error("tolerance {0} must be positive")]
    BadTolerance(f64),
    #[error("non-finite value in problem data or iterate")]
    NonFinite,
    #[error("no Dirichlet node: the problem is singular")]
    NoDirichlet,
    #[error("not converged after {iterations} sweeps (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("window selects no fin nodes under the gate")]
    EmptyFin,
    #[error("field is {0}x{1} but geometry is {2}x{3}")]
    GeometryMismatch(usize, usize, usize, usize),
    #[error("n_levels must be at least 1")]
    NoLevels,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceMode {
    /// Flux continuity across Si/oxide through the harmonic-mean face ε.
    #[default]
    DielectricContinuity,
    /// Si nodes touching oxide are pinned to `interface_potential`.
    FixedPotential,
}

impl FromStr for InterfaceMode {
    type Err = ElectrostaticsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dielectric_continuity" | "dielectric-continuity" => Ok(Self::DielectricContinuity),
            "fixed_potential" | "fixed-potential" => Ok(Self::FixedPotential),
            other => Err(ElectrostaticsError::UnknownInterfaceMode(other.to_string())),
        }
    }
}

impl fmt::Display for InterfaceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DielectricContinuity => "dielectric_continuity",
            Self::FixedPotential => "fixed_potential",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub gate_voltage: f64,
    pub substrate_voltage: f64,
    pub interface_mode: InterfaceMode,
    pub interface_potential: f64,
    pub eps_si: f64,
    pub eps_ox: f64,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self {
            gate_voltage: 1.0,
            substrate_voltage: 0.0,
            interface_mode: InterfaceMode::DielectricContinuity,
            interface_potential: 0.0,
            eps_si: EPS_SI,
            eps_ox: EPS_OX,
        }
    }
}

impl BoundarySpec {
    pub fn validate(&self) -> Result<(), ElectrostaticsError> {
        for e in [self.eps_si, self.eps_ox] {
            if !(e.is_finite() && e > 0.0) {
                return Err(ElectrostaticsError::BadPermittivity(e));
            }
        }
        if ![self.gate_voltage, self.substrate_voltage, self.interface_potential].iter().all(|v| v.is_finite()) {
            return Err(ElectrostaticsError::NonFinite);
        }
        Ok(())
    }
}

/// Discretise a fin cross-section: gate and substrate nodes are Dirichlet,
/// plus Si nodes bordering oxide in fixed-potential mode.
pub fn assemble(geom: &Geometry, bc: &BoundarySpec, charge: Option<&[f64]>) -> Result<PoissonProblem, ElectrostaticsError> {
    bc.validate()?;
    let mut p = PoissonProblem::new(geom.nz, geom.ny, geom.h_nm);
    if let Some(rho) = charge {
        if rho.len() != geom.nz * geom.ny {
            return Err(ElectrostaticsError::ShapeMismatch);
        }
        p.rho.copy_from_slice(rho);
    }
    for iz in 0..geom.nz {
        for iy in 0..geom.ny {
            let i = p.idx(iz, iy);
            let reg = geom.region(iz, iy);
            p.eps[i] = match reg {
                Region::SiFin | Region::Substrate => bc.eps_si,
                Region::Oxide => bc.eps_ox,
                Region::Gate | Region::Vacuum => EPS_VACUUM,
            };
            match reg {
                Region::Gate => p.dirichlet[i] = Some(bc.gate_voltage),
                Region::Substrate => p.dirichlet[i] = Some(bc.substrate_voltage),
                Region::SiFin if bc.interface_mode == InterfaceMode::FixedPotential => {
                    let touches_oxide = [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dz, dy)| {
                        let (jz, jy) = (iz as isize + dz, iy as isize + dy);
                        jz >= 0
                            && jy >= 0
                            && (jz as usize) < geom.nz
                            && (jy as usize) < geom.ny
                            && geom.region(jz as usize, jy as usize) == Region::Oxide
                    });
                    if touches_oxide {
                        p.dirichlet[i] = Some(bc.interface_potential);
                    }
                }
                _ => {}
            }
        }
    }
    Ok(p)
}

/// Solve the cross-section with red-black SOR to relative residual `tol`.
pub fn solve_poisson(
    geom: &Geometry,
    bc: &BoundarySpec,
    charge: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<FieldGrid, ElectrostaticsError> {
    let p = assemble(geom, bc, charge)?;
    p.solve(&SolverOptions { tol, max_iter, ..Default::default() })
}
