//! Nearest-neighbour sp3s* tight-binding model of diamond-lattice Si with
//! intra-atomic spin-orbit coupling on the p shell.
//!
//! Basis ordering is `(atom, orbital, spin)` with spin fastest:
//! index = (atom·5 + orbital)·2 + spin, orbitals s, px, py, pz, s*.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{KPath, KPoint, KVector, SymmetryLabel};
use crate::linalg::{eigh, CMatrix, EigenError};

pub const ORBITALS_PER_ATOM: usize = 5;
pub const BASIS_DIM: usize = ORBITALS_PER_ATOM * 2 * 2;
/// Two Si atoms contribute eight valence electrons per primitive cell.
pub const VALENCE_STATES: usize = 8;
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum TbError {
    #[error("tight-binding parameter `{name}` is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("eigensolver failed at k-point {k_index}: {source}")]
    Eigen {
        k_index: usize,
        #[source]
        source: EigenError,
    },
    #[error("band index {index} out of range (bands: {len})")]
    BandOutOfRange { index: usize, len: usize },
    #[error("k index {index} out of range (k-points: {len})")]
    KOutOfRange { index: usize, len: usize },
    #[error("path has no k-points")]
    EmptyPath,
    #[error("unknown parameter preset `{0}` (expected `si-refit` or `vogl1983`)")]
    UnknownPreset(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orbital {
    S,
    Px,
    Py,
    Pz,
    SStar,
}

impl Orbital {
    pub const ALL: [Orbital; 5] = [Orbital::S, Orbital::Px, Orbital::Py, Orbital::Pz, Orbital::SStar];

    pub fn offset(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Orbital::S => "s",
            Orbital::Px => "px",
            Orbital::Py => "py",
            Orbital::Pz => "pz",
            Orbital::SStar => "s*",
        }
    }
}

/// Index of a basis state; `spin` 0 is ↑, 1 is ↓.
pub fn basis_index(atom: usize, orbital: Orbital, spin: usize) -> usize {
    (atom * ORBITALS_PER_ATOM + orbital.offset()) * 2 + spin
}

/// Labels like `A:px↑` in basis order.
pub fn basis_labels() -> Vec<String> {
    let mut out = Vec::with_capacity(BASIS_DIM);
    for atom in ["A", "B"] {
        for orb in Orbital::ALL {
            for spin in ["↑", "↓"] {
                out.push(format!("{atom}:{}{spin}", orb.name()));
            }
        }
    }
    out
}

/// Two-centre sp3s* parameters in eV (Vogl notation, the Vᵢⱼ include the
/// factor 4 of the structure-factor sums).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TbParams {
    pub es: f64,
    pub ep: f64,
    pub esstar: f64,
    pub vss: f64,
    pub vsp: f64,
    pub vxx: f64,
    pub vxy: f64,
    pub vsstarp: f64,
    /// λ in λ·L·σ on the p shell; the Γ valence split-off is 3λ.
    pub soc_lambda: f64,
}

impl TbParams {
    /// Default Si set: a bounded refit of the sp3s* model to the Si
    /// conduction-band landmarks (Δ minimum near 0.85, indirect gap, L level).
    pub fn silicon() -> Self {
        Self {
            es: -3.4791,
            ep: 1.7707,
            esstar: 22.5058,
            vss: -8.5529,
            vsp: 3.2923,
            vxx: 1.7707,
            vxy: 5.0765,
            vsstarp: 7.59,
            soc_lambda: 0.01467,
        }
    }

    /// Vogl, Hjalmarson and Dow (1983) Si set with λ = Δso/3.
    pub fn vogl_1983() -> Self {
        Self {
            es: -4.2,
            ep: 1.715,
            esstar: 6.685,
            vss: -8.3,
            vsp: 5.7292,
            vxx: 1.715,
            vxy: 4.575,
            vsstarp: 5.3749,
            soc_lambda: 0.01467,
        }
    }

    pub fn preset(name: &str) -> Result<Self, TbError> {
        match name {
            "si-refit" => Ok(Self::silicon()),
            "vogl1983" => Ok(Self::vogl_1983()),
            other => Err(TbError::UnknownPreset(other.to_string())),
        }
    }

    pub fn without_soc(self) -> Self {
        Self { soc_lambda: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<(), TbError> {
        let fields = [
            ("tb.es", self.es),
            ("tb.ep", self.ep),
            ("tb.esstar", self.esstar),
            ("tb.vss", self.vss),
            ("tb.vsp", self.vsp),
            ("tb.vxx", self.vxx),
            ("tb.vxy", self.vxy),
            ("tb.vsstarp", self.vsstarp),
            ("tb.soc_lambda", self.soc_lambda),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(TbError::InvalidParameter { name, value });
            }
        }
        if self.soc_lambda < 0.0 {
            return Err(TbError::InvalidParameter {
                name: "tb.soc_lambda",
                value: self.soc_lambda,
            });
        }
        Ok(())
    }
}

impl Default for TbParams {
    fn default() -> Self {
        Self::silicon()
    }
}

/// Bond directions from atom A to its four B neighbours, units of a/4.
pub const NEIGHBOURS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

struct StructureFactors {
    g0: Complex64,
    /// Σ dᵢ e^{ik·d} / 4
    g: [Complex64; 3],
    /// gp[m] = Σ dᵢ dⱼ e^{ik·d} / 4 with {i, j, m} = {0, 1, 2}
    gp: [Complex64; 3],
}

fn structure_factors(k: KVector) -> StructureFactors {
    let kv = k.to_array();
    let mut g0 = Complex64::new(0.0, 0.0);
    let mut g = [Complex64::new(0.0, 0.0); 3];
    let mut gp = [Complex64::new(0.0, 0.0); 3];
    for d in NEIGHBOURS {
        let phase = 0.5 * PI * (d[0] * kv[0] + d[1] * kv[1] + d[2] * kv[2]);
        let e = Complex64::from_polar(0.25, phase);
        g0 += e;
        for i in 0..3 {
            g[i] += e * d[i];
        }
        gp[0] += e * (d[1] * d[2]);
        gp[1] += e * (d[0] * d[2]);
        gp[2] += e * (d[0] * d[1]);
    }
    StructureFactors { g0, g, gp }
}

/// Levi-Civita symbol for indices in 0..3.
pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Pauli matrices σx, σy, σz.
pub fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

/// Spin-orbit block λ Σₖ Lₖ⊗σₖ on the six p-spin states (px↑, px↓, …),
/// with (Lₖ)ᵢⱼ = −i εₖᵢⱼ.
fn soc_block(lambda: f64) -> [[Complex64; 6]; 6] {
    let s = pauli();
    let mut out = [[Complex64::new(0.0, 0.0); 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            for (kk, sk) in s.iter().enumerate() {
                let l = Complex64::new(0.0, -levi_civita(kk, i, j));
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for a in 0..2 {
                    for b in 0..2 {
                        out[2 * i + a][2 * j + b] += l * sk[a][b] * lambda;
                    }
                }
            }
        }
    }
    out
}

/// The 20×20 Bloch Hamiltonian at `k`.
pub fn build_hamiltonian(params: &TbParams, k: KVector) -> CMatrix {
    let sf = structure_factors(k);
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut hab = [[Complex64::new(0.0, 0.0); 5]; 5];
    hab[0][0] = sf.g0 * params.vss;
    for i in 0..3 {
        hab[0][1 + i] = sf.g[i] * params.vsp;
        hab[1 + i][0] = -sf.g[i] * params.vsp;
        hab[4][1 + i] = sf.g[i] * params.vsstarp;
        hab[1 + i][4] = -sf.g[i] * params.vsstarp;
        hab[1 + i][1 + i] = sf.g0 * params.vxx;
        for j in 0..3 {
            if i != j {
                hab[1 + i][1 + j] = sf.gp[3 - i - j] * params.vxy;
            }
        }
    }
    let onsite = [params.es, params.ep, params.ep, params.ep, params.esstar];

    let mut h = CMatrix::zeros(BASIS_DIM);
    for spin in 0..2 {
        for a in 0..5 {
            let ia = a * 2 + spin;
            let ib = (5 + a) * 2 + spin;
            h[(ia, ia)] = c(onsite[a]);
            h[(ib, ib)] = c(onsite[a]);
            for b in 0..5 {
                let jb = (5 + b) * 2 + spin;
                h[(ia, jb)] = hab[a][b];
                h[(jb, ia)] = hab[a][b].conj();
            }
        }
    }
    if params.soc_lambda != 0.0 {
        let so = soc_block(params.soc_lambda);
        for atom in 0..2 {
            let base = basis_index(atom, Orbital::Px, 0);
            for i in 0..6 {
                for j in 0..6 {
                    h[(base + i, base + j)] += so[i][j];
                }
            }
        }
    }
    h
}

/// Fractions of a state or degenerate subspace on the orbital subspaces.
/// `p` excludes the component along the chosen axis, which is `pz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitalFractions {
    pub s: f64,
    pub p: f64,
    pub pz: f64,
    pub sstar: f64,
}

impl OrbitalFractions {
    pub fn total(&self) -> f64 {
        self.s + self.p + self.pz + self.sstar
    }
}

/// Average orbital weights over the given orthonormal vectors. `axis` picks
/// the p direction reported as `pz`.
pub fn subspace_fractions(vectors: &[Vec<Complex64>], axis: [f64; 3]) -> OrbitalFractions {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let u = [axis[0] / n, axis[1] / n, axis[2] / n];
    let mut acc = OrbitalFractions { s: 0.0, p: 0.0, pz: 0.0, sstar: 0.0 };
    let mut norm = 0.0;
    for v in vectors {
        for atom in 0..2 {
            for spin in 0..2 {
                let amp = |o: Orbital| v[basis_index(atom, o, spin)];
                acc.s += amp(Orbital::S).norm_sqr();
                acc.sstar += amp(Orbital::SStar).norm_sqr();
                let px = amp(Orbital::Px);
                let py = amp(Orbital::Py);
                let pz = amp(Orbital::Pz);
                let p_all = px.norm_sqr() + py.norm_sqr() + pz.norm_sqr();
                let along = (px * u[0] + py * u[1] + pz * u[2]).norm_sqr();
                acc.pz += along;
                acc.p += p_all - along;
            }
        }
        norm += v.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    acc.s /= norm;
    acc.p /= norm;
    acc.pz /= norm;
    acc.sstar /= norm;
    acc
}

/// Degenerate clusters of an ascending spectrum as index ranges.
pub fn degenerate_groups(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Bands sampled along a path.
#[derive(Clone, Debug)]
pub struct BandSet {
    pub path: KPath,
    pub points: Vec<KPoint>,
    /// `energies[k][n]`, ascending in `n`.
    pub energies: Vec<Vec<f64>>,
    /// Eigenvectors as columns, same order as `energies[k]`.
    pub states: Vec<CMatrix>,
    /// `tracks[k][t]` is the sorted index at k-point `k` of connected band `t`.
    pub tracks: Vec<Vec<usize>>,
    /// `overlaps[k][t]` is the matched overlap of band `t` between k-points
    /// `k` and `k + 1`.
    pub overlaps: Vec<Vec<f64>>,
}

impl BandSet {
    pub fn n_k(&self) -> usize {
        self.energies.len()
    }

    pub fn n_bands(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    fn check(&self, band_index: usize, k_index: usize) -> Result<(), TbError> {
        if k_index >= self.n_k() {
            return Err(TbError::KOutOfRange { index: k_index, len: self.n_k() });
        }
        if band_index >= self.n_bands() {
            return Err(TbError::BandOutOfRange { index: band_index, len: self.n_bands() });
        }
        Ok(())
    }

    /// Energy of sorted band `band_index` at every k-point.
    pub fn band(&self, band_index: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[band_index]).collect()
    }

    /// Energy of connected band `track` at every k-point.
    pub fn tracked_band(&self, track: usize) -> Vec<f64> {
        self.energies
            .iter()
            .zip(&self.tracks)
            .map(|(e, t)| e[t[track]])
            .collect()
    }

    /// Smallest matched overlap between neighbouring k-points.
    pub fn min_overlap(&self) -> f64 {
        self.overlaps
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Write `s,k_label,band_index,energy_ev` in sorted-band order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,k_label,band_index,energy_ev")?;
        for (p, e) in self.points.iter().zip(&self.energies) {
            let label = p.label.map_or("", SymmetryLabel::ascii);
            for (n, en) in e.iter().enumerate() {
                writeln!(w, "{:.12},{},{},{:.12}", p.s, label, n, en)?;
            }
        }
        Ok(())
    }
}

fn cluster_weight(a: &CMatrix, ra: &std::ops::Range<usize>, b: &CMatrix, rb: &std::ops::Range<usize>) -> f64 {
    let n = a.dim();
    let mut w = 0.0;
    for i in ra.clone() {
        for j in rb.clone() {
            let mut s = Complex64::new(0.0, 0.0);
            for r in 0..n {
                s += a[(r, i)].conj() * b[(r, j)];
            }
            w += s.norm_sqr();
        }
    }
    w
}

/// Greedy subspace matching between consecutive k-points. Returns
/// `map[i] = j` (sorted index at the next point) and the per-index overlap.
fn match_states(
    ea: &[f64],
    va: &CMatrix,
    eb: &[f64],
    vb: &CMatrix,
) -> (Vec<usize>, Vec<f64>) {
    let ga = degenerate_groups(ea, DEGENERACY_TOL);
    let gb = degenerate_groups(eb, DEGENERACY_TOL);
    let mut pairs = Vec::new();
    for (ia, ra) in ga.iter().enumerate() {
        for (ib, rb) in gb.iter().enumerate() {
            let w = cluster_weight(va, ra, vb, rb);
            if w > 1e-14 {
                pairs.push((w, ia, ib));
            }
        }
    }
    // ties broken by energy order
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap()
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut cap_a: Vec<usize> = ga.iter().map(|r| r.len()).collect();
    let mut cap_b: Vec<usize> = gb.iter().map(|r| r.len()).collect();
    let mut next_a: Vec<usize> = ga.iter().map(|r| r.start).collect();
    let mut next_b: Vec<usize> = gb.iter().map(|r| r.start).collect();
    let n = ea.len();
    let mut map = vec![usize::MAX; n];
    let mut ovl = vec![0.0; n];
    let mut assign = |ia: usize, ib: usize, count: usize, w: f64, map: &mut Vec<usize>, ovl: &mut Vec<f64>| {
        let o = (w / ga[ia].len().min(gb[ib].len()) as f64).sqrt().min(1.0);
        for _ in 0..count {
            map[next_a[ia]] = next_b[ib];
            ovl[next_a[ia]] = o;
            next_a[ia] += 1;
            next_b[ib] += 1;
        }
    };
    for &(w, ia, ib) in &pairs {
        let m = cap_a[ia].min(cap_b[ib]);
        if m > 0 {
            assign(ia, ib, m, w, &mut map, &mut ovl);
            cap_a[ia] -= m;
            cap_b[ib] -= m;
        }
    }
    // leftovers (numerically orthogonal clusters) pair up in energy order
    for ia in 0..ga.len() {
        while cap_a[ia] > 0 {
            let ib = (0..gb.len()).find(|&b| cap_b[b] > 0).expect("capacities balance");
            let m = cap_a[ia].min(cap_b[ib]);
            assign(ia, ib, m, 0.0, &mut map, &mut ovl);
            cap_a[ia] -= m;
            cap_b[ib] -= m;
        }
    }
    (map, ovl)
}

/// Diagonalise along `path` (k-points in parallel) and connect bands by
/// eigenvector overlap.
pub fn solve_bands(params: &TbParams, path: &KPath) -> Result<BandSet, TbError> {
    params.validate()?;
    let points = path.points();
    if points.is_empty() {
        return Err(TbError::EmptyPath);
    }
    let solved: Vec<_> = points
        .par_iter()
        .enumerate()
        .map(|(k_index, p)| {
            eigh(&build_hamiltonian(params, p.k)).map_err(|source| TbError::Eigen { k_index, source })
        })
        .collect::<Result<_, _>>()?;

    let n = BASIS_DIM;
    let mut tracks = vec![(0..n).collect::<Vec<_>>()];
    let mut overlaps = Vec::with_capacity(points.len().saturating_sub(1));
    let steps: Vec<_> = (0..points.len().saturating_sub(1))
        .into_par_iter()
        .map(|i| {
            match_states(
                &solved[i].values,
                &solved[i].vectors,
                &solved[i + 1].values,
                &solved[i + 1].vectors,
            )
        })
        .collect();
    for (map, ovl) in steps {
        let prev = tracks.last().unwrap();
        let next: Vec<usize> = prev.iter().map(|&idx| map[idx]).collect();
        overlaps.push(prev.iter().map(|&idx| ovl[idx]).collect());
        tracks.push(next);
    }

    let (energies, states) = solved.into_iter().map(|e| (e.values, e.vectors)).unzip();
    Ok(BandSet {
        path: path.clone(),
        points,
        energies,
        states,
        tracks,
        overlaps,
    })
}

/// Orbital fractions of sorted band `band_index` at `k_index`, averaged over
/// its degenerate subspace, with `pz` along ẑ.
pub fn orbital_fractions(bands: &BandSet, band_index: usize, k_index: usize) -> Result<OrbitalFractions, TbError> {
    orbital_fractions_along(bands, band_index, k_index, [0.0, 0.0, 1.0])
}

pub fn orbital_fractions_along(
    bands: &BandSet,
    band_index: usize,
    k_index: usize,
    axis: [f64; 3],
) -> Result<OrbitalFractions, TbError> {
    bands.check(band_index, k_index)?;
    let e = &bands.energies[k_index];
    let group = degenerate_groups(e, DEGENERACY_TOL)
        .into_iter()
        .find(|r| r.contains(&band_index))
        .expect("groups cover every index");
    let vectors: Vec<_> = group.map(|j| bands.states[k_index].column(j)).collect();
    Ok(subspace_fractions(&vectors, axis))
}

/// Fractions of the degenerate subspace containing sorted band `band` at `k`.
pub fn fractions_at(params: &TbParams, k: KVector, band: usize, axis: [f64; 3]) -> Result<OrbitalFractions, TbError> {
    let eig = eigh(&build_hamiltonian(params, k)).map_err(|source| TbError::Eigen { k_index: 0, source })?;
    if band >= eig.values.len() {
        return Err(TbError::BandOutOfRange { index: band, len: eig.values.len() });
    }
    let group = degenerate_groups(&eig.values, DEGENERACY_TOL)
        .into_iter()
        .find(|r| r.contains(&band))
        .expect("groups cover every index");
    let vectors: Vec<_> = group.map(|j| eig.vector(j)).collect();
    Ok(subspace_fractions(&vectors, axis))
}

/// Conduction-band landmarks used to judge a parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandFeatures {
    pub vbm_ev: f64,
    /// Position of the lowest conduction state along Γ-X, units of 2π/a.
    pub x0_k: f64,
    pub x0_ev: f64,
    pub gap_ev: f64,
    pub l_ev: f64,
    pub l_minus_vbm_ev: f64,
    pub l_minus_x0_ev: f64,
    /// s weight of the lowest conduction band at the Λ midpoint.
    pub lambda1_s: f64,
    /// Weights of the lowest conduction band at 0.85·X.
    pub delta1: OrbitalFractions,
}

/// Locate the Δ conduction minimum (on a `samples`-point Γ-X grid), the gap,
/// the L conduction level and the Λ₁/Δ₁ compositions.
pub fn band_features(params: &TbParams, samples: usize) -> Result<BandFeatures, TbError> {
    use crate::lattice::{standard_path, PathName};
    let gx = standard_path(PathName::GammaDeltaX, samples.max(2)).expect("samples ≥ 2");
    let bands = solve_bands(params, &gx)?;
    let cb = VALENCE_STATES;
    let vbm_ev = bands.energies[0][cb - 1];
    let (imin, x0_ev) = bands
        .band(cb)
        .into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
    let x0_k = bands.points[imin].k.kz;
    let l = eigh(&build_hamiltonian(params, KVector::new(0.5, 0.5, 0.5)))
        .map_err(|source| TbError::Eigen { k_index: 0, source })?;
    let l_ev = l.values[cb];
    let lambda1_s = fractions_at(params, KVector::new(0.25, 0.25, 0.25), cb, [0.0, 0.0, 1.0])?.s;
    let delta1 = fractions_at(params, KVector::new(0.0, 0.0, 0.85), cb, [0.0, 0.0, 1.0])?;
    Ok(BandFeatures {
        vbm_ev,
        x0_k,
        x0_ev,
        gap_ev: x0_ev - vbm_ev,
        l_ev,
        l_minus_vbm_ev: l_ev - vbm_ev,
        l_minus_x0_ev: l_ev - x0_ev,
        lambda1_s,
        delta1,
    })
}

fn spin_rotation(axis: [f64; 3], angle: f64) -> [[Complex64; 2]; 2] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let u = [axis[0] / n, axis[1] / n, axis[2] / n];
    let s = pauli();
    let (c, sn) = ((0.5 * angle).cos(), (0.5 * angle).sin());
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut ns = Complex64::new(0.0, 0.0);
            for (k, sk) in s.iter().enumerate() {
                ns += sk[a][b] * u[k];
            }
            out[a][b] = ns * Complex64::new(0.0, -sn);
            if a == b {
                out[a][b] += c;
            }
        }
    }
    out
}

/// Threefold rotation by +2π/3 about [111] through atom A, acting as
/// px→py→pz→px on orbitals and as exp(−iπ/3 n·σ) on spin. Satisfies
/// U H(k) U† = H(Rk) with R(x, y, z) = (z, x, y).
pub fn c3_operator() -> CMatrix {
    let spin = spin_rotation([1.0, 1.0, 1.0], 2.0 * PI / 3.0);
    let mut orb = [[0.0; 5]; 5];
    orb[0][0] = 1.0;
    orb[4][4] = 1.0;
    orb[2][1] = 1.0;
    orb[3][2] = 1.0;
    orb[1][3] = 1.0;
    CMatrix::from_fn(BASIS_DIM, |i, j| {
        let (ai, oi, si) = (i / 10, (i / 2) % 5, i % 2);
        let (aj, oj, sj) = (j / 10, (j / 2) % 5, j % 2);
        if ai != aj {
            return Complex64::new(0.0, 0.0);
        }
        spin[si][sj] * orb[oi][oj]
    })
}

/// Rotate a k-vector by the C3 operation of [`c3_operator`].
pub fn c3_rotate(k: KVector) -> KVector {
    KVector::new(k.kz, k.kx, k.ky)
}

/// Unitary part `U` of the antiunitary inversion×time-reversal operator
/// `PT ψ = U ψ*`: atoms swapped, p orbitals odd, spin flipped by iσy.
/// It satisfies U H(k)* U† = H(k).
pub fn pt_unitary() -> CMatrix {
    // iσy = [[0, 1], [−1, 0]]
    let isy = [[0.0, 1.0], [-1.0, 0.0]];
    CMatrix::from_fn(BASIS_DIM, |i, j| {
        let (ai, oi, si) = (i / 10, (i / 2) % 5, i % 2);
        let (aj, oj, sj) = (j / 10, (j / 2) % 5, j % 2);
        if ai == aj || oi != oj {
            return Complex64::new(0.0, 0.0);
        }
        let parity = if (1..=3).contains(&oi) { -1.0 } else { 1.0 };
        Complex64::new(parity * isy[si][sj], 0.0)
    })
}

/// Apply the antiunitary PT to a state.
pub fn apply_pt(v: &[Complex64]) -> Vec<Complex64> {
    let conj: Vec<Complex64> = v.iter().map(|c| c.conj()).collect();
    pt_unitary().mul_vec(&conj)
}

/// Spin operator σₐ (a = 0, 1, 2) acting on the full basis.
pub fn spin_operator(a: usize) -> CMatrix {
    let s = pauli()[a];
    CMatrix::from_fn(BASIS_DIM, |i, j| if i / 2 == j / 2 { s[i % 2][j % 2] } else { Complex64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermitian_product(u: &CMatrix, h: &CMatrix) -> CMatrix {
        u.matmul(h).matmul(&u.adjoint())
    }

    #[test]
    fn hermitian_and_dimension() {
        let h = build_hamiltonian(&TbParams::silicon(), KVector::new(0.13, -0.4, 0.77));
        assert_eq!(h.dim(), 20);
        assert!(h.hermiticity_error() < 1e-14);
    }

    #[test]
    fn gamma_valence_top_threefold_without_soc() {
        let p = TbParams::silicon().without_soc();
        let e = eigh(&build_hamiltonian(&p, KVector::ZERO)).unwrap().values;
        // six spin-orbitals (3 × spin) share the valence top
        for i in 2..8 {
            assert!((e[i] - e[7]).abs() < 1e-10, "{e:?}");
        }
        assert!(e[8] - e[7] > 1.0);
    }

    #[test]
    fn gamma_split_off_equals_three_lambda() {
        let p = TbParams::silicon();
        let e = eigh(&build_hamiltonian(&p, KVector::ZERO)).unwrap().values;
        // Γ25' → Γ8 (4) + Γ7 (2)
        assert!((e[4] - e[7]).abs() < 1e-10);
        assert!((e[3] - e[2]).abs() < 1e-10);
        assert!(((e[7] - e[3]) - 3.0 * p.soc_lambda).abs() < 1e-3);
    }

    #[test]
    fn soc_block_is_hermitian_with_split_off_spectrum() {
        let so = soc_block(1.0);
        let m = CMatrix::from_fn(6, |i, j| so[i][j]);
        assert!(m.hermiticity_error() < 1e-15);
        let e = eigh(&m).unwrap().values;
        for (i, want) in [-2.0, -2.0, 1.0, 1.0, 1.0, 1.0].iter().enumerate() {
            assert!((e[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn c3_symmetry() {
        let p = TbParams::silicon();
        let u = c3_operator();
        for k in [KVector::new(0.1, 0.3, -0.2), KVector::new(0.5, 0.0, 0.9)] {
            let lhs = hermitian_product(&u, &build_hamiltonian(&p, k));
            let rhs = build_hamiltonian(&p, c3_rotate(k));
            let mut err: f64 = 0.0;
            for i in 0..20 {
                for j in 0..20 {
                    err = err.max((lhs[(i, j)] - rhs[(i, j)]).norm());
                }
            }
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn pt_symmetry() {
        let p = TbParams::silicon();
        let u = pt_unitary();
        let k = KVector::new(0.21, -0.37, 0.58);
        let h = build_hamiltonian(&p, k);
        let hc = CMatrix::from_fn(20, |i, j| h[(i, j)].conj());
        let lhs = hermitian_product(&u, &hc);
        let mut err: f64 = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                err = err.max((lhs[(i, j)] - h[(i, j)]).norm());
            }
        }
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn fractions_sum_to_one() {
        let f = fractions_at(&TbParams::silicon(), KVector::new(0.1, 0.2, 0.3), 9, [1.0, 1.0, 1.0]).unwrap();
        assert!((f.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn labels() {
        let l = basis_labels();
        assert_eq!(l.len(), 20);
        assert_eq!(l[basis_index(1, Orbital::Pz, 1)], "B:pz↓");
    }

    #[test]
    fn presets() {
        assert_eq!(TbParams::preset("vogl1983").unwrap(), TbParams::vogl_1983());
        assert!(TbParams::preset("jancu").is_err());
        let bad = TbParams { soc_lambda: -1.0, ..TbParams::silicon() };
        assert!(bad.validate().is_err());
    }
}
