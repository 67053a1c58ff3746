//! Diamond-lattice geometry, reciprocal vectors, high-symmetry k-paths and
//! level counting for cubic quantum dots.
//!
//! Units are fixed crate-wide: lengths in nm, wave vectors in units of 2π/a,
//! energies in eV.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Si lattice constant, nm.
pub const SI_LATTICE_CONSTANT_NM: f64 = 0.543;

/// Absolute tolerance used when comparing k-vectors.
pub const K_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice constant must be positive and finite, got {0}")]
    InvalidLatticeConstant(f64),
    #[error("dot side length must be positive and finite, got {0}")]
    InvalidSide(f64),
    #[error("unknown k-path `{0}` (expected one of Γ-Δ-X, Γ-Λ-L, K-L)")]
    UnknownPath(String),
    #[error("a path segment needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("unknown rounding mode `{0}` (expected `floor` or `nearest`)")]
    UnknownRounding(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Cubic lattice constant, nm.
    pub a_nm: f64,
    /// Diamond basis offsets in units of `a`.
    pub basis: [[f64; 3]; 2],
}

impl LatticeSpec {
    pub fn new(a_nm: f64) -> Result<Self, LatticeError> {
        if !(a_nm.is_finite() && a_nm > 0.0) {
            return Err(LatticeError::InvalidLatticeConstant(a_nm));
        }
        Ok(Self {
            a_nm,
            basis: [[0.0; 3], [0.25; 3]],
        })
    }

    pub fn silicon() -> Self {
        Self::new(SI_LATTICE_CONSTANT_NM).expect("Si lattice constant is valid")
    }

    /// FCC primitive vectors a₁ = a/2(0,1,1), a₂ = a/2(1,0,1), a₃ = a/2(1,1,0) in nm.
    pub fn primitive_vectors(&self) -> [[f64; 3]; 3] {
        let h = 0.5 * self.a_nm;
        [[0.0, h, h], [h, 0.0, h], [h, h, 0.0]]
    }
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self::silicon()
    }
}

/// Wave vector in units of 2π/a.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KVector {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
}

impl KVector {
    pub const ZERO: KVector = KVector::new(0.0, 0.0, 0.0);

    pub const fn new(kx: f64, ky: f64, kz: f64) -> Self {
        Self { kx, ky, kz }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.kx, self.ky, self.kz]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.kx * other.kx + self.ky * other.ky + self.kz * other.kz
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.kx.is_finite() && self.ky.is_finite() && self.kz.is_finite()
    }

    pub fn approx_eq(self, other: Self) -> bool {
        (self.kx - other.kx).abs() < K_TOLERANCE
            && (self.ky - other.ky).abs() < K_TOLERANCE
            && (self.kz - other.kz).abs() < K_TOLERANCE
    }

    /// True when kx = ky = kz (the Γ-Λ-L line and its extension).
    pub fn is_on_lambda_axis(self) -> bool {
        self.kx == self.ky && self.ky == self.kz
    }

    /// Absolute wave vector in nm⁻¹ for lattice constant `a_nm`.
    pub fn to_inv_nm(self, a_nm: f64) -> [f64; 3] {
        let s = 2.0 * PI / a_nm;
        [s * self.kx, s * self.ky, s * self.kz]
    }

    pub fn from_inv_nm(v: [f64; 3], a_nm: f64) -> Self {
        let s = a_nm / (2.0 * PI);
        Self::new(s * v[0], s * v[1], s * v[2])
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl Add for KVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.kx + o.kx, self.ky + o.ky, self.kz + o.kz)
    }
}

impl Sub for KVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.kx - o.kx, self.ky - o.ky, self.kz - o.kz)
    }
}

impl Neg for KVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky, -self.kz)
    }
}

impl Mul<f64> for KVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.kx * s, self.ky * s, self.kz * s)
    }
}

/// Reciprocal primitive vectors b₁, b₂, b₃ in nm⁻¹, built from the
/// cross-product formula so that aᵢ·bⱼ = 2π δᵢⱼ.
pub fn reciprocal_basis(spec: &LatticeSpec) -> [[f64; 3]; 3] {
    let [a1, a2, a3] = spec.primitive_vectors();
    let volume = dot3(a1, cross3(a2, a3));
    let f = 2.0 * PI / volume;
    [
        scale3(cross3(a2, a3), f),
        scale3(cross3(a3, a1), f),
        scale3(cross3(a1, a2), f),
    ]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// High-symmetry points and lines of the FCC Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryLabel {
    Gamma,
    Delta,
    X,
    Lambda,
    L,
    K,
}

impl SymmetryLabel {
    /// Coordinates of a high-symmetry *point* (units 2π/a). Lines return `None`.
    pub fn point(self) -> Option<KVector> {
        match self {
            SymmetryLabel::Gamma => Some(KVector::ZERO),
            SymmetryLabel::X => Some(KVector::new(0.0, 0.0, 1.0)),
            SymmetryLabel::L => Some(KVector::new(0.5, 0.5, 0.5)),
            SymmetryLabel::K => Some(KVector::new(0.75, 0.75, 0.0)),
            SymmetryLabel::Delta | SymmetryLabel::Lambda => None,
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            SymmetryLabel::Gamma => "G",
            SymmetryLabel::Delta => "D",
            SymmetryLabel::X => "X",
            SymmetryLabel::Lambda => "La",
            SymmetryLabel::L => "L",
            SymmetryLabel::K => "K",
        }
    }
}

impl fmt::Display for SymmetryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryLabel::Gamma => "Γ",
            SymmetryLabel::Delta => "Δ",
            SymmetryLabel::X => "X",
            SymmetryLabel::Lambda => "Λ",
            SymmetryLabel::L => "L",
            SymmetryLabel::K => "K",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathName {
    GammaDeltaX,
    GammaLambdaL,
    KL,
}

impl PathName {
    pub const ALL: [PathName; 3] = [PathName::GammaDeltaX, PathName::GammaLambdaL, PathName::KL];
}

impl FromStr for PathName {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_lowercase();
        match norm.as_str() {
            "γδx" | "gdx" | "gammadeltax" => Ok(PathName::GammaDeltaX),
            "γλl" | "gll" | "gammalambdal" | "glal" => Ok(PathName::GammaLambdaL),
            "kl" => Ok(PathName::KL),
            _ => Err(LatticeError::UnknownPath(s.to_string())),
        }
    }
}

impl fmt::Display for PathName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathName::GammaDeltaX => "Γ-Δ-X",
            PathName::GammaLambdaL => "Γ-Λ-L",
            PathName::KL => "K-L",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KPathSegment {
    pub start_label: SymmetryLabel,
    pub end_label: SymmetryLabel,
    /// Label of the line between the end points (Δ, Λ), if it has one.
    pub line_label: Option<SymmetryLabel>,
    pub start: KVector,
    pub end: KVector,
    pub samples: usize,
}

impl KPathSegment {
    pub fn new(
        start_label: SymmetryLabel,
        end_label: SymmetryLabel,
        line_label: Option<SymmetryLabel>,
        samples: usize,
    ) -> Result<Self, LatticeError> {
        if samples < 2 {
            return Err(LatticeError::TooFewSamples(samples));
        }
        Ok(Self {
            start_label,
            end_label,
            line_label,
            start: start_label.point().expect("segment end points are points"),
            end: end_label.point().expect("segment end points are points"),
            samples,
        })
    }
}

/// One sampled point of a [`KPath`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KPoint {
    pub k: KVector,
    /// Cumulative arclength along the path, units of 2π/a.
    pub s: f64,
    /// Point label at segment ends, line label in between.
    pub label: Option<SymmetryLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KPath {
    pub segments: Vec<KPathSegment>,
}

impl KPath {
    /// Uniformly sampled points; a segment that starts where the previous
    /// one ended does not repeat the shared point.
    pub fn points(&self) -> Vec<KPoint> {
        let mut out: Vec<KPoint> = Vec::new();
        let mut s0 = 0.0;
        for seg in &self.segments {
            let len = (seg.end - seg.start).norm();
            let n = seg.samples;
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                let k = if i == n - 1 { seg.end } else { seg.start.lerp(seg.end, t) };
                if i == 0 {
                    if let Some(last) = out.last() {
                        if last.k.approx_eq(k) {
                            continue;
                        }
                    }
                }
                let label = if i == 0 {
                    Some(seg.start_label)
                } else if i == n - 1 {
                    Some(seg.end_label)
                } else {
                    seg.line_label
                };
                out.push(KPoint { k, s: s0 + t * len, label });
            }
            s0 += len;
        }
        out
    }

    /// Write the sampled path as CSV with columns `s,kx,ky,kz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,kx,ky,kz")?;
        for p in self.points() {
            writeln!(w, "{:.12},{:.12},{:.12},{:.12}", p.s, p.k.kx, p.k.ky, p.k.kz)?;
        }
        Ok(())
    }
}

pub fn standard_path(name: PathName, samples: usize) -> Result<KPath, LatticeError> {
    use SymmetryLabel::*;
    let seg = match name {
        PathName::GammaDeltaX => KPathSegment::new(Gamma, X, Some(Delta), samples)?,
        PathName::GammaLambdaL => KPathSegment::new(Gamma, L, Some(Lambda), samples)?,
        PathName::KL => KPathSegment::new(K, L, None, samples)?,
    };
    Ok(KPath { segments: vec![seg] })
}

/// Band-plot path L-Γ-X (Λ then Δ), `samples` points per segment.
pub fn l_gamma_x_path(samples: usize) -> Result<KPath, LatticeError> {
    use SymmetryLabel::*;
    Ok(KPath {
        segments: vec![
            KPathSegment::new(L, Gamma, Some(Lambda), samples)?,
            KPathSegment::new(Gamma, X, Some(Delta), samples)?,
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DotGeometry {
    /// Cube edge, nm.
    pub side_nm: f64,
}

impl DotGeometry {
    pub fn cube(side_nm: f64) -> Result<Self, LatticeError> {
        if !(side_nm.is_finite() && side_nm > 0.0) {
            return Err(LatticeError::InvalidSide(side_nm));
        }
        Ok(Self { side_nm })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Floor,
    #[default]
    Nearest,
}

impl FromStr for Rounding {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "floor" => Ok(Rounding::Floor),
            "nearest" => Ok(Rounding::Nearest),
            other => Err(LatticeError::UnknownRounding(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DotLevels {
    pub unit_cells: u64,
    pub levels: u64,
    pub electrons: u64,
    /// Unrounded (side/a)³.
    pub cell_ratio: f64,
}

/// Count conventional unit cells in a cubic dot; one band holds one level per
/// cell and two electrons per level.
pub fn count_dot_levels(geom: DotGeometry, spec: &LatticeSpec, rounding: Rounding) -> DotLevels {
    let ratio = (geom.side_nm / spec.a_nm).powi(3);
    let unit_cells = match rounding {
        Rounding::Floor => ratio.floor(),
        Rounding::Nearest => ratio.round(),
    } as u64;
    DotLevels {
        unit_cells,
        levels: unit_cells,
        electrons: 2 * unit_cells,
        cell_ratio: ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_relation() {
        let spec = LatticeSpec::silicon();
        let a = spec.primitive_vectors();
        let b = reciprocal_basis(&spec);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 * PI } else { 0.0 };
                assert!((dot3(a[i], b[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reciprocal_scales_inversely() {
        let b1 = reciprocal_basis(&LatticeSpec::new(0.543).unwrap());
        let b2 = reciprocal_basis(&LatticeSpec::new(1.086).unwrap());
        for i in 0..3 {
            for c in 0..3 {
                assert!((b2[i][c] - 0.5 * b1[i][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_lambda_l_midpoint() {
        let p = standard_path(PathName::GammaLambdaL, 3).unwrap().points();
        assert_eq!(p.len(), 3);
        assert!(p[0].k.approx_eq(KVector::ZERO));
        assert!(p[1].k.approx_eq(KVector::new(0.25, 0.25, 0.25)));
        assert!(p[2].k.approx_eq(KVector::new(0.5, 0.5, 0.5)));
        assert_eq!(p[1].label, Some(SymmetryLabel::Lambda));
    }

    #[test]
    fn two_samples_are_end_points() {
        let p = standard_path(PathName::GammaDeltaX, 2).unwrap().points();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].k, KVector::ZERO);
        assert_eq!(p[1].k, KVector::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn path_errors() {
        assert!(matches!(
            standard_path(PathName::KL, 1),
            Err(LatticeError::TooFewSamples(1))
        ));
        assert!(matches!("W-L".parse::<PathName>(), Err(LatticeError::UnknownPath(_))));
        assert_eq!("Γ-Λ-L".parse::<PathName>().unwrap(), PathName::GammaLambdaL);
        assert_eq!("G-D-X".parse::<PathName>().unwrap(), PathName::GammaDeltaX);
    }

    #[test]
    fn concatenated_path_shares_gamma_once() {
        let p = l_gamma_x_path(5).unwrap().points();
        assert_eq!(p.len(), 9);
        assert_eq!(p[4].label, Some(SymmetryLabel::Gamma));
        let l = (KVector::new(0.5, 0.5, 0.5)).norm();
        assert!((p.last().unwrap().s - (l + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn table_two_rows() {
        let spec = LatticeSpec::silicon();
        let row = |side| count_dot_levels(DotGeometry::cube(side).unwrap(), &spec, Rounding::Nearest);
        let r5 = row(5.0);
        assert_eq!((r5.unit_cells, r5.levels, r5.electrons), (781, 781, 1562));
        let r2 = row(2.0);
        assert_eq!((r2.unit_cells, r2.levels, r2.electrons), (50, 50, 100));
        let r1 = row(1.0);
        assert_eq!((r1.unit_cells, r1.levels, r1.electrons), (6, 6, 12));
        // (10/0.543)³ = 6245.98; the tabulated 6250 is not reproduced
        let r10 = row(10.0);
        assert_eq!(r10.unit_cells, 6246);
        assert!((r10.cell_ratio - 6245.98).abs() < 0.01);
    }

    #[test]
    fn floor_rounding() {
        let spec = LatticeSpec::silicon();
        let r = count_dot_levels(DotGeometry::cube(5.0).unwrap(), &spec, Rounding::Floor);
        assert_eq!(r.unit_cells, 780);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        standard_path(PathName::KL, 2).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,kx,ky,kz\n0.000000000000,0.750000000000"));
    }

    #[test]
    fn invalid_inputs() {
        assert!(LatticeSpec::new(0.0).is_err());
        assert!(LatticeSpec::new(f64::NAN).is_err());
        assert!(DotGeometry::cube(-1.0).is_err());
    }
}
