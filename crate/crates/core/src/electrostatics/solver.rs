//! Successive over-relaxation for the 5-point discretisation of
//! ∇·(ε∇φ) = −ρ on a node-centred grid.
//!
//! Face coefficients between two free nodes use the harmonic mean of their
//! permittivities; a face to a Dirichlet node uses the free node's own
//! permittivity. Nodes on the domain edge see a mirror image across it
//! (zero normal flux) unless they are Dirichlet.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ElectrostaticsError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    RedBlack,
    Lexicographic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop when ‖r‖₂/‖b‖₂ < tol.
    pub tol: f64,
    pub max_iter: usize,
    pub order: SweepOrder,
    /// Relaxation factor; `None` uses 2/(1 + sin(π/(n−1))) with n the
    /// longer grid side.
    pub omega: Option<f64>,
    /// Sweeps between residual evaluations.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200_000,
            order: SweepOrder::RedBlack,
            omega: None,
            check_every: 10,
        }
    }
}

/// Discrete problem definition; ρ is in units of ε₀·V/nm².
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonProblem {
    pub nz: usize,
    pub ny: usize,
    pub h_nm: f64,
    pub eps: Vec<f64>,
    pub dirichlet: Vec<Option<f64>>,
    pub rho: Vec<f64>,
}

/// Solved potential on the grid, row-major `[iz * ny + iy]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldGrid {
    pub nz: usize,
    pub ny: usize,
    pub h_nm: f64,
    pub phi: Vec<f64>,
    /// Final relative residual.
    pub residual: f64,
    pub iterations: usize,
}

impl FieldGrid {
    pub fn at(&self, iz: usize, iy: usize) -> f64 {
        self.phi[iz * self.ny + iy]
    }

    pub fn min(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest |φ(z, y) − φ(z, −y)| about the grid's centre column.
    pub fn mirror_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for iz in 0..self.nz {
            for iy in 0..self.ny / 2 {
                m = m.max((self.at(iz, iy) - self.at(iz, self.ny - 1 - iy)).abs());
            }
        }
        m
    }

    /// `z,y,phi` with z from the bottom edge and y from the centre column, nm.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z,y,phi")?;
        let yc = 0.5 * (self.ny as f64 - 1.0);
        for iz in 0..self.nz {
            for iy in 0..self.ny {
                let z = iz as f64 * self.h_nm;
                let y = (iy as f64 - yc) * self.h_nm;
                writeln!(w, "{z:.6},{y:.6},{:.12}", self.at(iz, iy))?;
            }
        }
        Ok(())
    }
}

struct Stencil {
    /// Free node indices of each colour (or a single list for lexicographic).
    colours: Vec<Vec<usize>>,
    nb: Vec<[usize; 4]>,
    coef: Vec<[f64; 4]>,
    /// Σ coefficients of every face.
    diag: Vec<f64>,
    /// Dirichlet coupling plus source term.
    b: Vec<f64>,
    free: Vec<bool>,
}

impl PoissonProblem {
    /// Uniform ε = 1, no Dirichlet nodes, ρ = 0.
    pub fn new(nz: usize, ny: usize, h_nm: f64) -> Self {
        let n = nz * ny;
        Self {
            nz,
            ny,
            h_nm,
            eps: vec![1.0; n],
            dirichlet: vec![None; n],
            rho: vec![0.0; n],
        }
    }

    pub fn idx(&self, iz: usize, iy: usize) -> usize {
        iz * self.ny + iy
    }

    pub fn set_dirichlet(&mut self, iz: usize, iy: usize, v: f64) {
        let i = self.idx(iz, iy);
        self.dirichlet[i] = Some(v);
    }

    /// Min and max of the Dirichlet data.
    pub fn dirichlet_bounds(&self) -> Option<(f64, f64)> {
        let vals: Vec<f64> = self.dirichlet.iter().flatten().copied().collect();
        if vals.is_empty() {
            return None;
        }
        Some((
            vals.iter().copied().fold(f64::INFINITY, f64::min),
            vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    fn validate(&self) -> Result<(), ElectrostaticsError> {
        let n = self.nz * self.ny;
        if self.nz < 2 || self.ny < 2 {
            return Err(ElectrostaticsError::GridTooSmall(self.nz, self.ny));
        }
        if self.eps.len() != n || self.dirichlet.len() != n || self.rho.len() != n {
            return Err(ElectrostaticsError::ShapeMismatch);
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(ElectrostaticsError::BadPermittivity(*e));
        }
        if self.rho.iter().chain(self.dirichlet.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(ElectrostaticsError::NonFinite);
        }
        if !self.dirichlet.iter().any(Option::is_some) && self.rho.iter().any(|&r| r != 0.0) {
            return Err(ElectrostaticsError::NoDirichlet);
        }
        Ok(())
    }

    fn stencil(&self, order: SweepOrder) -> Stencil {
        let n = self.nz * self.ny;
        let free: Vec<bool> = self.dirichlet.iter().map(Option::is_none).collect();
        let mut nb = vec![[0usize; 4]; n];
        let mut coef = vec![[0.0f64; 4]; n];
        let mut diag = vec![0.0; n];
        let mut b = vec![0.0; n];
        let h2 = self.h_nm * self.h_nm;
        let mirror = |i: usize, d: isize, len: usize| -> usize {
            let j = i as isize + d;
            if j < 0 || j >= len as isize {
                (i as isize - d) as usize
            } else {
                j as usize
            }
        };
        for iz in 0..self.nz {
            for iy in 0..self.ny {
                let i = self.idx(iz, iy);
                if !free[i] {
                    continue;
                }
                let dirs = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)];
                for (f, (dz, dy)) in dirs.into_iter().enumerate() {
                    let jz = if dz != 0 { mirror(iz, dz, self.nz) } else { iz };
                    let jy = if dy != 0 { mirror(iy, dy, self.ny) } else { iy };
                    let j = self.idx(jz, jy);
                    let a = match self.dirichlet[j] {
                        Some(v) => {
                            let a = self.eps[i];
                            b[i] += a * v;
                            coef[i][f] = 0.0;
                            a
                        }
                        None => {
                            let (e1, e2) = (self.eps[i], self.eps[j]);
                            let a = 2.0 * e1 * e2 / (e1 + e2);
                            coef[i][f] = a;
                            a
                        }
                    };
                    nb[i][f] = j;
                    diag[i] += a;
                }
                b[i] += self.rho[i] * h2;
            }
        }
        let colours = match order {
            SweepOrder::RedBlack => {
                let mut c = vec![Vec::new(), Vec::new()];
                for iz in 0..self.nz {
                    for iy in 0..self.ny {
                        let i = self.idx(iz, iy);
                        if free[i] {
                            c[(iz + iy) % 2].push(i);
                        }
                    }
                }
                c
            }
            SweepOrder::Lexicographic => vec![(0..n).filter(|&i| free[i]).collect()],
        };
        Stencil { colours, nb, coef, diag, b, free }
    }

    /// Solve by SOR until the relative residual drops below `opts.tol`.
    pub fn solve(&self, opts: &SolverOptions) -> Result<FieldGrid, ElectrostaticsError> {
        self.validate()?;
        if !(opts.tol.is_finite() && opts.tol > 0.0) {
            return Err(ElectrostaticsError::BadTolerance(opts.tol));
        }
        let st = self.stencil(opts.order);
        let mut phi: Vec<f64> = self.dirichlet.iter().map(|d| d.unwrap_or(0.0)).collect();
        let b_norm = st.b.iter().zip(&st.free).filter(|(_, &f)| f).map(|(x, _)| x * x).sum::<f64>().sqrt();
        let field = |phi: Vec<f64>, residual, iterations| FieldGrid {
            nz: self.nz,
            ny: self.ny,
            h_nm: self.h_nm,
            phi,
            residual,
            iterations,
        };
        if b_norm == 0.0 {
            return Ok(field(phi, 0.0, 0));
        }
        let n_side = self.nz.max(self.ny) as f64;
        let omega = opts.omega.unwrap_or(2.0 / (1.0 + (PI / (n_side - 1.0)).sin()));
        let check_every = opts.check_every.max(1);

        let mut buf: Vec<f64> = Vec::new();
        let mut residual = relative_residual(&st, &phi, b_norm);
        let mut it = 0;
        while it < opts.max_iter {
            for colour in &st.colours {
                if opts.order == SweepOrder::RedBlack && colour.len() >= PARALLEL_THRESHOLD {
                    // same-colour nodes are independent, so a gathered update
                    // equals the in-place one
                    colour
                        .par_iter()
                        .map(|&i| relaxed(&st, &phi, i, omega))
                        .collect_into_vec(&mut buf);
                    for (&i, &v) in colour.iter().zip(&buf) {
                        phi[i] = v;
                    }
                } else {
                    for &i in colour {
                        phi[i] = relaxed(&st, &phi, i, omega);
                    }
                }
            }
            it += 1;
            if it % check_every == 0 || it == opts.max_iter {
                residual = relative_residual(&st, &phi, b_norm);
                if !residual.is_finite() {
                    return Err(ElectrostaticsError::NonFinite);
                }
                if residual < opts.tol {
                    return Ok(field(phi, residual, it));
                }
            }
        }
        Err(ElectrostaticsError::NotConverged { iterations: it, residual })
    }
}

const PARALLEL_THRESHOLD: usize = 16_384;

#[inline]
fn relaxed(st: &Stencil, phi: &[f64], i: usize, omega: f64) -> f64 {
    let nb = &st.nb[i];
    let c = &st.coef[i];
    let s = c[0] * phi[nb[0]] + c[1] * phi[nb[1]] + c[2] * phi[nb[2]] + c[3] * phi[nb[3]] + st.b[i];
    (1.0 - omega) * phi[i] + omega * s / st.diag[i]
}

fn relative_residual(st: &Stencil, phi: &[f64], b_norm: f64) -> f64 {
    let mut r2 = 0.0;
    for i in 0..phi.len() {
        if !st.free[i] {
            continue;
        }
        let nb = &st.nb[i];
        let c = &st.coef[i];
        let r = c[0] * phi[nb[0]] + c[1] * phi[nb[1]] + c[2] * phi[nb[2]] + c[3] * phi[nb[3]] + st.b[i]
            - st.diag[i] * phi[i];
        r2 += r * r;
    }
    r2.sqrt() / b_norm
}

/// Unit square with n nodes per side, φ = sin(πy) on the top edge and 0 on
/// the other three. Returns the L∞ error against
/// sin(πy)·sinh(πz)/sinh(π).
pub fn sine_benchmark_error(n: usize, tol: f64) -> Result<f64, ElectrostaticsError> {
    let h = 1.0 / (n - 1) as f64;
    let mut p = PoissonProblem::new(n, n, h);
    for k in 0..n {
        let y = k as f64 * h;
        p.set_dirichlet(0, k, 0.0);
        p.set_dirichlet(k, 0, 0.0);
        p.set_dirichlet(k, n - 1, 0.0);
        p.set_dirichlet(n - 1, k, (PI * y).sin());
    }
    // corners belong to the zero edges
    p.set_dirichlet(n - 1, 0, 0.0);
    p.set_dirichlet(n - 1, n - 1, 0.0);
    let f = p.solve(&SolverOptions { tol, max_iter: 1_000_000, ..Default::default() })?;
    let mut err: f64 = 0.0;
    for iz in 0..n {
        for iy in 0..n {
            let (z, y) = (iz as f64 * h, iy as f64 * h);
            let exact = (PI * y).sin() * (PI * z).sinh() / PI.sinh();
            err = err.max((f.at(iz, iy) - exact).abs());
        }
    }
    Ok(err)
}
