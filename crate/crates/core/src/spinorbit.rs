//! Multipole spin-orbit Hamiltonians on the two-component spinor, the
//! orbital expectation along Λ, and band-splitting-with-vanishing-spin-
//! polarization checks on the tight-binding bands.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouptheory::{lambda_label_from_c3, LambdaLabel};
use crate::lattice::{KVector, K_TOLERANCE};
use crate::linalg::{eigh, CMatrix, EigenError};
use crate::tightbinding::{
    build_hamiltonian, c3_operator, degenerate_groups, pauli, spin_operator, TbError, TbParams, BASIS_DIM,
};

/// Unit vector along [111], the growth axis of the device.
pub const LAMBDA_AXIS: [f64; 3] = [
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
];

#[derive(Debug, Error)]
pub enum SpinOrbitError {
    #[error("k = ({0}, {1}, {2}) is not on the Λ axis (kx = ky = kz required)")]
    OffLambdaAxis(f64, f64, f64),
    #[error("multipole component `{0}` is not implemented (only Q0, Q, M, T, G0 and Qxyz are)")]
    NotImplemented(String),
    #[error("unknown multipole component `{0}`")]
    UnknownComponent(String),
    #[error("multipole component `{name}` must be finite, got {value}")]
    NonFinite { name: String, value: f64 },
    #[error(transparent)]
    TightBinding(#[from] TbError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// External symmetry-breaking multipole fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultipoleField {
    /// Free-electron coefficient, eV·(2π/a)⁻².
    pub q0: f64,
    /// Electric dipole (Rashba).
    pub q_dip: [f64; 3],
    /// Magnetic dipole (Zeeman-like).
    pub m_dip: [f64; 3],
    /// Magnetic toroidal dipole.
    pub t_dip: [f64; 3],
    /// Electric toroidal monopole.
    pub g0: f64,
    /// Electric octupole (Dresselhaus).
    pub q_xyz: f64,
}

/// Multipole families beyond the implemented truncation.
const HIGHER_MULTIPOLES: &[&str] = &[
    "q_quad", "m_quad", "t_quad", "g_quad", "g_dip", "m_oct", "t_oct", "g_oct", "q_hex", "m0", "t0",
];

impl MultipoleField {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Set one component by name: `q0`, `g0`, `q_xyz`, or `q_dip.x` style
    /// vector components.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), SpinOrbitError> {
        let family = name.split('.').next().unwrap_or(name);
        if HIGHER_MULTIPOLES.contains(&family) {
            return Err(SpinOrbitError::NotImplemented(name.to_string()));
        }
        if !value.is_finite() {
            return Err(SpinOrbitError::NonFinite { name: name.to_string(), value });
        }
        let axis = |s: &str| match s {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            _ => None,
        };
        let unknown = || SpinOrbitError::UnknownComponent(name.to_string());
        match name.split_once('.') {
            None => match name {
                "q0" => self.q0 = value,
                "g0" => self.g0 = value,
                "q_xyz" => self.q_xyz = value,
                _ => return Err(unknown()),
            },
            Some((vec, c)) => {
                let i = axis(c).ok_or_else(unknown)?;
                match vec {
                    "q_dip" => self.q_dip[i] = value,
                    "m_dip" => self.m_dip[i] = value,
                    "t_dip" => self.t_dip[i] = value,
                    _ => return Err(unknown()),
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        [self.q0, self.g0, self.q_xyz]
            .iter()
            .chain(&self.q_dip)
            .chain(&self.m_dip)
            .chain(&self.t_dip)
            .all(|x| x.is_finite())
    }
}

/// 2×2 Hermitian operator c₀σ₀ + c·σ, with the (k, field) it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinorHamiltonian {
    pub c0: f64,
    pub c: [f64; 3],
    pub k: KVector,
    pub field: MultipoleField,
}

impl SpinorHamiltonian {
    fn new(c0: f64, c: [f64; 3], k: KVector, field: MultipoleField) -> Self {
        Self { c0, c, k, field }
    }

    /// Dense matrix in the {↑, ↓} basis.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let s = pauli();
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                if a == b {
                    m[a][b] += self.c0;
                }
                for i in 0..3 {
                    m[a][b] += s[i][a][b] * self.c[i];
                }
            }
        }
        m
    }

    /// Ascending eigenvalues c₀ ∓ |c|.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = norm3(self.c);
        [self.c0 - r, self.c0 + r]
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.c0
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c == [0.0; 3]
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = self.matrix();
        let mut e: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                e = e.max((m[a][b] - m[b][a].conj()).norm());
            }
        }
        e
    }

    /// ⟨χ|H|χ⟩ for the spin state polarised along ±`axis`: c₀ ± c·n.
    pub fn spin_expectation(&self, axis: [f64; 3], sign: f64) -> f64 {
        let n = norm3(axis);
        self.c0 + sign * (self.c[0] * axis[0] + self.c[1] * axis[1] + self.c[2] * axis[2]) / n
    }

    fn plus(mut self, o: &SpinorHamiltonian) -> Self {
        self.c0 += o.c0;
        for i in 0..3 {
            self.c[i] += o.c[i];
        }
        self
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Rashba term Q·(k × σ), i.e. coefficient vector Q × k.
pub fn h_rashba(field: &MultipoleField, k: KVector) -> SpinorHamiltonian {
    let q = field.q_dip;
    let c = [
        q[1] * k.kz - q[2] * k.ky,
        q[2] * k.kx - q[0] * k.kz,
        q[0] * k.ky - q[1] * k.kx,
    ];
    SpinorHamiltonian::new(0.0, c, k, *field)
}

/// Cubic Dresselhaus term √15·Qxyz·[kx(ky²−kz²), ky(kz²−kx²), kz(kx²−ky²)]·σ.
pub fn h_dresselhaus(field: &MultipoleField, k: KVector) -> SpinorHamiltonian {
    let (x, y, z) = (k.kx, k.ky, k.kz);
    let s = 15f64.sqrt() * field.q_xyz;
    let c = [
        s * (x * (y * y - z * z)),
        s * (y * (z * z - x * x)),
        s * (z * (x * x - y * y)),
    ];
    SpinorHamiltonian::new(0.0, c, k, *field)
}

/// Full truncated multipole Hamiltonian
/// q0·k² + Rashba + M·σ + (T·k) + G0·(k·σ) + Dresselhaus.
pub fn h_total(field: &MultipoleField, k: KVector) -> SpinorHamiltonian {
    let kv = k.to_array();
    let t_dot_k = field.t_dip.iter().zip(&kv).map(|(a, b)| a * b).sum::<f64>();
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = field.m_dip[i] + field.g0 * kv[i];
    }
    SpinorHamiltonian::new(field.q0 * k.norm_sqr() + t_dot_k, c, k, *field)
        .plus(&h_rashba(field, k))
        .plus(&h_dresselhaus(field, k))
}

/// Λ-line Hamiltonian: spin-independent part (q0·k² + T·k) plus Rashba and
/// Dresselhaus.
pub fn h_lambda(field: &MultipoleField, k: KVector) -> SpinorHamiltonian {
    let t_dot_k = field.t_dip[0] * k.kx + field.t_dip[1] * k.ky + field.t_dip[2] * k.kz;
    SpinorHamiltonian::new(field.q0 * k.norm_sqr() + t_dot_k, [0.0; 3], k, *field)
        .plus(&h_rashba(field, k))
        .plus(&h_dresselhaus(field, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum POrbital {
    Px,
    Py,
    Pz,
}

impl POrbital {
    pub const ALL: [POrbital; 3] = [POrbital::Px, POrbital::Py, POrbital::Pz];
}

fn check_lambda(k: KVector) -> Result<(), SpinOrbitError> {
    if (k.kx - k.ky).abs() > K_TOLERANCE || (k.ky - k.kz).abs() > K_TOLERANCE || !k.is_finite() {
        return Err(SpinOrbitError::OffLambdaAxis(k.kx, k.ky, k.kz));
    }
    Ok(())
}

/// ⟨p_α, ±S_z| H_Λ |p_α, ±S_z⟩ with S_z quantised along the [111] growth
/// axis. H_Λ is diagonal in the orbital index, so every p_α gives the same
/// spin-sector value.
pub fn orbital_soc_expectation(
    _orbital: POrbital,
    spin_sign: i8,
    field: &MultipoleField,
    k: KVector,
) -> Result<f64, SpinOrbitError> {
    check_lambda(k)?;
    let sign = if spin_sign >= 0 { 1.0 } else { -1.0 };
    Ok(h_lambda(field, k).spin_expectation(LAMBDA_AXIS, sign))
}

/// Σ_α ⟨p_α, +S_z⟩ − Σ_α ⟨p_α, −S_z⟩.
pub fn spin_summed_imbalance(field: &MultipoleField, k: KVector) -> Result<f64, SpinOrbitError> {
    let mut up = 0.0;
    let mut down = 0.0;
    for o in POrbital::ALL {
        up += orbital_soc_expectation(o, 1, field, k)?;
        down += orbital_soc_expectation(o, -1, field, k)?;
    }
    Ok(up - down)
}

/// One band of a BSVSP analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizedBand {
    pub energy: f64,
    pub spin_expectation: [f64; 3],
    /// Indices of the other bands degenerate with this one.
    pub partners: Vec<usize>,
}

/// A degenerate group of bands and its trace-summed spin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizedGroup {
    pub energy: f64,
    pub members: Vec<usize>,
    pub spin_sum: [f64; 3],
    /// Tr over the group of the C3 operator about [111].
    pub c3_character: [f64; 2],
    pub label: LambdaLabel,
}

impl PolarizedGroup {
    pub fn spin_sum_norm(&self) -> f64 {
        norm3(self.spin_sum)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BsvspReport {
    pub k: KVector,
    pub bands: Vec<PolarizedBand>,
    pub groups: Vec<PolarizedGroup>,
}

impl BsvspReport {
    pub fn max_group_spin(&self) -> f64 {
        self.groups.iter().map(PolarizedGroup::spin_sum_norm).fold(0.0, f64::max)
    }
}

fn expectation(op: &CMatrix, v: &[Complex64]) -> Complex64 {
    expectation_pair(op, v, v)
}

/// Tight-binding bands plus the multipole Hamiltonian (identity on the
/// orbitals) at a Λ-axis k, grouped by degeneracy with per-group spin sums.
/// Members of a group are resolved along the [111] spin axis.
pub fn bsvsp_check(
    params: &TbParams,
    field: &MultipoleField,
    k: KVector,
    degeneracy_tol: f64,
) -> Result<BsvspReport, SpinOrbitError> {
    check_lambda(k)?;
    params.validate()?;
    let mut h = build_hamiltonian(params, k);
    let hs = h_total(field, k).matrix();
    for orb_site in 0..BASIS_DIM / 2 {
        for a in 0..2 {
            for b in 0..2 {
                h[(2 * orb_site + a, 2 * orb_site + b)] += hs[a][b];
            }
        }
    }
    let eig = eigh(&h)?;
    let sigma = [spin_operator(0), spin_operator(1), spin_operator(2)];
    let n_sigma = {
        let mut m = CMatrix::zeros(BASIS_DIM);
        for (s, n) in sigma.iter().zip(LAMBDA_AXIS) {
            m.add_assign_scaled(s, Complex64::new(n, 0.0));
        }
        m
    };
    let c3 = c3_operator();

    let mut bands = Vec::with_capacity(BASIS_DIM);
    let mut groups = Vec::new();
    for range in degenerate_groups(&eig.values, degeneracy_tol) {
        let cols: Vec<Vec<Complex64>> = range.clone().map(|j| eig.vector(j)).collect();
        let d = cols.len();
        // resolve the group along n·σ
        let proj = CMatrix::from_fn(d, |a, b| expectation_pair(&n_sigma, &cols[a], &cols[b]));
        let sub = eigh(&proj)?;
        let resolved: Vec<Vec<Complex64>> = (0..d)
            .map(|m| {
                let mut v = vec![Complex64::new(0.0, 0.0); BASIS_DIM];
                for (a, col) in cols.iter().enumerate() {
                    let w = sub.vectors[(a, m)];
                    for r in 0..BASIS_DIM {
                        v[r] += col[r] * w;
                    }
                }
                v
            })
            .collect();
        let members: Vec<usize> = range.clone().collect();
        let mut spin_sum = [0.0; 3];
        let mut chi = Complex64::new(0.0, 0.0);
        for (idx, v) in members.iter().zip(&resolved) {
            let s = [
                expectation(&sigma[0], v).re,
                expectation(&sigma[1], v).re,
                expectation(&sigma[2], v).re,
            ];
            for i in 0..3 {
                spin_sum[i] += s[i];
            }
            chi += expectation(&c3, v);
            bands.push(PolarizedBand {
                energy: eig.values[*idx],
                spin_expectation: s,
                partners: members.iter().copied().filter(|m| m != idx).collect(),
            });
        }
        let energy = members.iter().map(|&m| eig.values[m]).sum::<f64>() / d as f64;
        groups.push(PolarizedGroup {
            energy,
            label: lambda_label_from_c3(d, chi.re),
            members,
            spin_sum,
            c3_character: [chi.re, chi.im],
        });
    }
    Ok(BsvspReport { k, bands, groups })
}

fn expectation_pair(op: &CMatrix, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    crate::linalg::inner(a, &op.mul_vec(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S15: f64 = 3.872_983_346_207_417;

    #[test]
    fn planar_rashba() {
        let f = MultipoleField { q_dip: [0.0, 0.0, 1.0], ..Default::default() };
        let h = h_rashba(&f, KVector::new(0.3, -0.7, 0.0));
        // kx σy − ky σx
        assert_eq!(h.c, [0.7, 0.3, 0.0]);
    }

    #[test]
    fn rashba_x_dipole_y_momentum() {
        let f = MultipoleField { q_dip: [1.0, 0.0, 0.0], ..Default::default() };
        let h = h_rashba(&f, KVector::new(0.0, 1.0, 0.0));
        assert_eq!((h.c0, h.c), (0.0, [0.0, 0.0, 1.0]));
    }

    #[test]
    fn dresselhaus_substitution() {
        let f = MultipoleField { q_xyz: 1.0, ..Default::default() };
        let h = h_dresselhaus(&f, KVector::new(1.0, 2.0, 0.0));
        assert!((h.c[0] - 4.0 * S15).abs() < 1e-14);
        assert!((h.c[1] + 2.0 * S15).abs() < 1e-14);
        assert_eq!(h.c[2], 0.0);
    }

    #[test]
    fn zeeman_split() {
        let f = MultipoleField { m_dip: [0.0, 0.0, 0.25], ..Default::default() };
        for k in [KVector::ZERO, KVector::new(0.3, 0.1, -0.2)] {
            assert_eq!(h_total(&f, k).eigenvalues(), [-0.25, 0.25]);
        }
    }

    #[test]
    fn q0_only_expectation() {
        let f = MultipoleField { q0: 2.0, ..Default::default() };
        let k = KVector::new(0.2, 0.2, 0.2);
        for o in POrbital::ALL {
            for s in [1, -1] {
                let e = orbital_soc_expectation(o, s, &f, k).unwrap();
                assert!((e - 2.0 * 0.12).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn off_axis_rejected() {
        let err = orbital_soc_expectation(POrbital::Px, 1, &MultipoleField::zero(), KVector::new(0.1, 0.2, 0.1));
        assert!(matches!(err, Err(SpinOrbitError::OffLambdaAxis(..))));
    }

    #[test]
    fn field_setters() {
        let mut f = MultipoleField::zero();
        f.set("q_dip.y", 1.5).unwrap();
        f.set("q_xyz", 0.5).unwrap();
        assert_eq!(f.q_dip, [0.0, 1.5, 0.0]);
        assert!(matches!(f.set("q_quad.xy", 1.0), Err(SpinOrbitError::NotImplemented(_))));
        assert!(matches!(f.set("q_dip.w", 1.0), Err(SpinOrbitError::UnknownComponent(_))));
        assert!(matches!(f.set("banana", 1.0), Err(SpinOrbitError::UnknownComponent(_))));
        assert!(f.set("q0", f64::NAN).is_err());
    }
}
