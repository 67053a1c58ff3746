//! End-to-end checks of every module against its reference behaviour,
//! keyed by criterion number.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::electrostatics::{
    assemble, build_geometry, fin_gradient_metric, solve_poisson, sine_benchmark_error, BoundarySpec, PoissonProblem,
    SolverOptions, Variant,
};
use crate::grouptheory::{builtin_table, product, spinor_rep, LambdaLabel};
use crate::injection::{
    fill_from_source, flush_drain, monte_carlo, run_protocol, shuttle_via, DeviceState, EventKind, EventLog, Landing,
    ShuttleOutcome, StochasticParams, QUBIT1, QUBIT2,
};
use crate::lattice::{count_dot_levels, l_gamma_x_path, DotGeometry, KVector};
use crate::spinorbit::{bsvsp_check, h_dresselhaus, spin_summed_imbalance, MultipoleField};
use crate::tightbinding::{band_features, solve_bands};
use crate::valleys::{split_valleys, ValleySet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// One `[PASS]`/`[FAIL]` line per criterion.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.criteria {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("[{tag}] {:>2} {}: {}\n", c.id, c.name, c.measured));
        }
        s
    }
}

type Check = Result<(bool, String), String>;

fn criterion(id: u32, name: &'static str, f: impl FnOnce() -> Check) -> CriterionResult {
    let (passed, measured) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, name, passed, measured }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rng_for(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.u64("inject.seed") ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_field(rng: &mut ChaCha8Rng) -> MultipoleField {
    let mut v3 = || [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
    let (q, m, t) = (v3(), v3(), v3());
    MultipoleField {
        q0: rng.random_range(-2.0..2.0),
        q_dip: q,
        m_dip: m,
        t_dip: t,
        g0: rng.random_range(-2.0..2.0),
        q_xyz: rng.random_range(-5.0..5.0),
    }
}

fn c1_dresselhaus(cfg: &RunConfig) -> Check {
    let mut rng = rng_for(cfg, 1);
    let n = cfg.usize("spinorbit.samples");
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let t = rng.random_range(-1.0..1.0);
        let f = MultipoleField { q_xyz: rng.random_range(-5.0..5.0), ..Default::default() };
        let h = h_dresselhaus(&f, KVector::new(t, t, t));
        worst = worst.max(h.c.iter().map(|x| x.abs()).fold(h.c0.abs(), f64::max));
    }
    Ok((worst == 0.0, format!("max |H_DSO(t,t,t)| = {worst:e} over {n} samples")))
}

fn c2_spin_sum(cfg: &RunConfig) -> Check {
    let mut rng = rng_for(cfg, 2);
    let n = cfg.usize("spinorbit.samples");
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let f = random_field(&mut rng);
        let t = rng.random_range(-1.0..1.0);
        worst = worst.max(spin_summed_imbalance(&f, KVector::new(t, t, t)).map_err(err)?.abs());
    }
    Ok((worst < 1e-12, format!("max spin-summed imbalance = {worst:.3e} over {n} samples")))
}

fn c3_bsvsp(cfg: &RunConfig) -> Check {
    let field = cfg.field();
    if field.q_dip.iter().all(|&q| q == 0.0) {
        return Ok((false, "spinorbit.q_dip is zero: no Rashba field to test".into()));
    }
    let t = cfg.f64("spinorbit.k_t");
    let r = bsvsp_check(&cfg.tb_params().map_err(err)?, &field, KVector::new(t, t, t), cfg.f64("spinorbit.degeneracy_tol"))
        .map_err(err)?;
    let max = r.max_group_spin();
    let mut pair_err = f64::INFINITY;
    let mut pair_norm = 0.0;
    for g in r.groups.iter().filter(|g| g.label == LambdaLabel::Lambda45 && g.members.len() == 2) {
        let a = r.bands[g.members[0]].spin_expectation;
        let b = r.bands[g.members[1]].spin_expectation;
        let e = (0..3).map(|i| (a[i] + b[i]).abs()).fold(0.0, f64::max);
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na > pair_norm {
            pair_norm = na;
            pair_err = e;
        }
    }
    let ok = max < 1e-10 && pair_norm > 1e-3 && pair_err < 1e-10;
    Ok((ok, format!("max group |ΣS| = {max:.3e}; Λ4+Λ5 partners |S| = {pair_norm:.4}, |S_a + S_b| = {pair_err:.3e}")))
}

fn c4_table() -> Check {
    let t = builtin_table();
    let (row, col, dim2) = (t.row_orthogonality_error(), t.column_orthogonality_error(), t.sum_dim_squared());
    let l1 = t.decompose(&product(&t.irrep("Λ1").map_err(err)?.characters, &spinor_rep()).map_err(err)?).map_err(err)?;
    let l3 = t.decompose(&product(&t.irrep("Λ3").map_err(err)?.characters, &spinor_rep()).map_err(err)?).map_err(err)?;
    let ok = row < 1e-12 && col < 1e-12 && dim2 == 12 && l1.to_string() == "Λ₆" && l3.to_string() == "Λ₄ ⊕ Λ₅ ⊕ Λ₆";
    Ok((ok, format!("row err {row:e}, col err {col:e}, Σdim² = {dim2}; Λ₁⊗D½ = {l1}; Λ₃⊗D½ = {l3}")))
}

fn c5_bands(cfg: &RunConfig) -> Check {
    let f = band_features(&cfg.tb_params().map_err(err)?, cfg.usize("bands.samples")).map_err(err)?;
    let ok = (f.x0_k - 0.85).abs() <= 0.05
        && (f.gap_ev - 1.1).abs() <= 0.2
        && (f.l_minus_x0_ev - 1.0).abs() <= 0.3
        && f.lambda1_s > f.delta1.s;
    Ok((
        ok,
        format!(
            "k_min = {:.3}, gap = {:.3} eV, E(L)-E(X0) = {:.3} eV, s(Λ1) = {:.3} > s(Δ1) = {:.3}",
            f.x0_k, f.gap_ev, f.l_minus_x0_ev, f.lambda1_s, f.delta1.s
        ),
    ))
}

fn c6_dots(cfg: &RunConfig) -> Check {
    let spec = cfg.lattice().map_err(err)?;
    let r = cfg.rounding();
    let mut ok = true;
    let mut parts = Vec::new();
    for (side, cells) in [(5.0, 781), (2.0, 50), (1.0, 6)] {
        let d = count_dot_levels(DotGeometry::cube(side).map_err(err)?, &spec, r);
        ok &= d.unit_cells == cells && d.electrons == 2 * cells;
        parts.push(format!("{side} nm: {}/{}", d.unit_cells, d.electrons));
    }
    let ten = count_dot_levels(DotGeometry::cube(10.0).map_err(err)?, &spec, r);
    parts.push(format!("10 nm: {} cells (ratio {:.2}; published table lists 6250)", ten.unit_cells, ten.cell_ratio));
    Ok((ok, parts.join(", ")))
}

fn c7_valleys(cfg: &RunConfig) -> Check {
    let mut rng = rng_for(cfg, 7);
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let mt = rng.random_range(0.01..2.0);
        let ml = mt * rng.random_range(1.01..40.0);
        for i in 0..20 {
            let w = 0.5 + 1.5 * i as f64;
            let x = split_valleys(&ValleySet::x0(ml, mt, [0.0, 0.0, 1.0]).map_err(err)?, w).map_err(err)?;
            let l = split_valleys(&ValleySet::l(ml, mt, [1.0, 1.0, 1.0]).map_err(err)?, w).map_err(err)?;
            if x.degeneracies() != [2, 4] || l.degeneracies() != [1, 3] {
                return Ok((false, format!("pattern broke at ml={ml}, mt={mt}, W={w}: {:?} {:?}", x.degeneracies(), l.degeneracies())));
            }
            let h = split_valleys(&ValleySet::l(ml, mt, [1.0, 1.0, 1.0]).map_err(err)?, w / 2.0).map_err(err)?;
            worst_ratio = worst_ratio.max((h.splitting_ev / l.splitting_ev / 4.0 - 1.0).abs());
        }
    }
    Ok((worst_ratio < 1e-9, format!("X0(001) = [2, 4], L(111) = [1, 3] over 100x20; max |ratio/4 - 1| = {worst_ratio:.2e}")))
}

fn c8_injection(cfg: &RunConfig) -> Check {
    let spec = cfg.protocol_spec().map_err(err)?;
    let dot = &spec.dot;
    // (a)
    let mut s = DeviceState::new(dot, spec.mu_s, spec.mu_d, spec.delta_e_l_gamma);
    let mut log = EventLog::new();
    let n = fill_from_source(&mut s, dot, &mut log);
    let a = n == 7 && s.l_electrons(QUBIT1, dot) == 1;
    // (b)
    let first = shuttle_via(&mut s, dot, Landing::L, &mut log);
    fill_from_source(&mut s, dot, &mut log);
    let second = shuttle_via(&mut s, dot, Landing::L, &mut log);
    let b = first == ShuttleOutcome::Moved(Landing::L) && second == ShuttleOutcome::Blockade && s.l_electrons(QUBIT2, dot) == 1;
    // (c)
    let r0 = run_protocol(&spec, &StochasticParams { p_l: 0.0, rng_seed: 0 }, 0).map_err(err)?;
    let mut st = r0.final_state.clone();
    let drained = flush_drain(&mut st, dot, &mut EventLog::new());
    let c = r0.current_counts == [6] && r0.log.count(EventKind::DetectX0) == 1 && drained == 6 && st.x0_electrons(QUBIT2, dot) == 0;
    // (d)
    let mc = monte_carlo(&spec, 0.5, cfg.u64("inject.seed"), 10_000, cfg.usize("inject.max_retries")).map_err(err)?;
    let d = mc.within_sigma(3.0);
    // (e)
    let p = StochasticParams { p_l: cfg.p_l().map_err(err)?, rng_seed: cfg.u64("inject.seed") };
    let e1 = run_protocol(&spec, &p, cfg.usize("inject.max_retries")).map_err(err)?.log.to_csv_string();
    let e2 = run_protocol(&spec, &p, cfg.usize("inject.max_retries")).map_err(err)?.log.to_csv_string();
    let e = e1 == e2;
    Ok((
        a && b && c && d && e,
        format!(
            "(a) {n} filled, L last: {a}; (b) blockade: {b}; (c) X0 signature {:?}, flushed {drained}: {c}; (d) mean retries {:.4} vs {:.4} ± {:.4}, success {:.4} vs {:.4}: {d}; (e) identical logs: {e}",
            r0.current_counts, mc.mean_retries, mc.expected_mean_retries, mc.mean_retries_sigma, mc.success_rate, mc.expected_success_rate
        ),
    ))
}

fn c9_poisson(cfg: &RunConfig) -> Check {
    let opts = SolverOptions { tol: 1e-13, ..Default::default() };
    // constant Dirichlet
    let mut p = PoissonProblem::new(17, 17, 1.0);
    for k in 0..17 {
        for (a, b) in [(0, k), (16, k), (k, 0), (k, 16)] {
            p.set_dirichlet(a, b, 0.7);
        }
    }
    let f = p.solve(&opts).map_err(err)?;
    let const_err = f.phi.iter().map(|v| (v - 0.7).abs()).fold(0.0, f64::max);
    // parallel plate
    let mut p = PoissonProblem::new(33, 9, 0.5);
    for iy in 0..9 {
        p.set_dirichlet(0, iy, 0.0);
        p.set_dirichlet(32, iy, 1.0);
    }
    let f = p.solve(&opts).map_err(err)?;
    let plate_err = (0..33 * 9).map(|i| (f.phi[i] - (i / 9) as f64 / 32.0).abs()).fold(0.0, f64::max);
    // analytic benchmark
    let errs: Vec<f64> = [33, 65, 129, 257].iter().map(|&n| sine_benchmark_error(n, 1e-13)).collect::<Result<_, _>>().map_err(err)?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    // fins
    let tol = cfg.f64("poisson.tol");
    let mut fin_ok = true;
    let mut worst_mirror: f64 = 0.0;
    for v in [Variant::Planarized, Variant::Protruding] {
        let g = build_geometry(v, cfg.f64("poisson.w_nm"), cfg.f64("poisson.h_nm"), &cfg.extents()).map_err(err)?;
        let bc = cfg.boundary().map_err(err)?;
        let prob = assemble(&g, &bc, None).map_err(err)?;
        let (lo, hi) = prob.dirichlet_bounds().ok_or("no Dirichlet nodes")?;
        let f = prob.solve(&SolverOptions { tol, max_iter: cfg.usize("poisson.max_iter"), ..Default::default() }).map_err(err)?;
        fin_ok &= f.phi.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12);
        let m = f.mirror_asymmetry();
        worst_mirror = worst_mirror.max(m);
        fin_ok &= m < 10.0 * tol * hi.abs().max(lo.abs()).max(1.0);
    }
    let ok = const_err < 1e-10 && plate_err < 1e-10 && ratios.iter().all(|r| (r - 4.0).abs() <= 0.3) && fin_ok;
    let rs: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok((
        ok,
        format!(
            "constant err {const_err:.1e}, plate err {plate_err:.1e}, h-halving ratios [{}], fin bounds/mirror ok: {fin_ok} (mirror {worst_mirror:.1e})",
            rs.join(", ")
        ),
    ))
}

fn c10_fins(cfg: &RunConfig) -> Check {
    let h = cfg.f64("poisson.h_nm");
    let bc0 = cfg.boundary().map_err(err)?;
    let window = Some(cfg.f64("poisson.window_nm"));
    let mut ok = true;
    let mut parts = Vec::new();
    for cells in [3, 5, 8] {
        for v in [bc0.gate_voltage, 0.5 * bc0.gate_voltage] {
            let bc = BoundarySpec { gate_voltage: v, ..bc0 };
            let mut m = Vec::new();
            for variant in [Variant::Planarized, Variant::Protruding] {
                let g = build_geometry(variant, cells as f64 * h, h, &cfg.extents()).map_err(err)?;
                let f = solve_poisson(&g, &bc, None, cfg.f64("poisson.tol"), cfg.usize("poisson.max_iter")).map_err(err)?;
                m.push(fin_gradient_metric(&f, &g, window).map_err(err)?);
            }
            let pass = m[1].max < m[0].max && m[1].mean < m[0].mean;
            ok &= pass;
            parts.push(format!("W={cells} V={v}: max {:.4}/{:.4} mean {:.4}/{:.4}", m[0].max, m[1].max, m[0].mean, m[1].mean));
        }
    }
    Ok((ok, format!("planarized/protruding V/nm: {}", parts.join("; "))))
}

/// Output files of a verification run, name to bytes.
pub fn artifacts(cfg: &RunConfig) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let spec = cfg.protocol_spec().map_err(err)?;
    let p = StochasticParams { p_l: cfg.p_l().map_err(err)?, rng_seed: cfg.u64("inject.seed") };
    let r = run_protocol(&spec, &p, cfg.usize("inject.max_retries")).map_err(err)?;
    out.insert("inject_events.csv".into(), r.log.to_csv_string().into_bytes());
    let mc = monte_carlo(&spec, p.p_l, p.rng_seed, cfg.usize("inject.trials"), cfg.usize("inject.max_retries")).map_err(err)?;
    let mut buf = Vec::new();
    mc.write_csv(&mut buf).map_err(err)?;
    out.insert("inject_retries.csv".into(), buf);
    let path = l_gamma_x_path(cfg.usize("bands.samples")).map_err(err)?;
    let bands = solve_bands(&cfg.tb_params().map_err(err)?, &path).map_err(err)?;
    let mut buf = Vec::new();
    bands.write_csv(&mut buf).map_err(err)?;
    out.insert("bands.csv".into(), buf);
    for v in cfg.variants() {
        let g = build_geometry(v, cfg.f64("poisson.w_nm"), cfg.f64("poisson.h_nm"), &cfg.extents()).map_err(err)?;
        let f = solve_poisson(&g, &cfg.boundary().map_err(err)?, None, cfg.f64("poisson.tol"), cfg.usize("poisson.max_iter"))
            .map_err(err)?;
        let mut buf = Vec::new();
        f.write_csv(&mut buf).map_err(err)?;
        out.insert(format!("potential_{v}.csv"), buf);
    }
    Ok(out)
}

fn c11_determinism(cfg: &RunConfig) -> Check {
    let a = artifacts(cfg)?;
    let b = artifacts(cfg)?;
    let same = a == b;
    Ok((same, format!("{} output files regenerated, byte-identical: {same}", a.len())))
}

/// Number of criteria run by [`verify_all`].
pub const CRITERIA: u32 = 11;

/// Run one criterion by number.
pub fn run_criterion(cfg: &RunConfig, id: u32) -> Option<CriterionResult> {
    let r = match id {
        1 => criterion(1, "Dresselhaus term vanishes on Λ", || c1_dresselhaus(cfg)),
        2 => criterion(2, "spin-summed p-orbital expectations agree", || c2_spin_sum(cfg)),
        3 => criterion(3, "band spin polarisation cancels on Λ", || c3_bsvsp(cfg)),
        4 => criterion(4, "double-group character table", c4_table),
        5 => criterion(5, "conduction-band landmarks", || c5_bands(cfg)),
        6 => criterion(6, "dot unit-cell and electron counts", || c6_dots(cfg)),
        7 => criterion(7, "valley degeneracy patterns", || c7_valleys(cfg)),
        8 => criterion(8, "L-point injection protocol", || c8_injection(cfg)),
        9 => criterion(9, "Poisson solver accuracy", || c9_poisson(cfg)),
        10 => criterion(10, "protruding fin has the flatter gradient", || c10_fins(cfg)),
        11 => criterion(11, "deterministic outputs", || c11_determinism(cfg)),
        _ => return None,
    };
    Some(r)
}

/// Run all criteria. Module errors become failed criteria.
pub fn verify_all(cfg: &RunConfig) -> Result<VerifyReport, ConfigError> {
    // surface configuration errors before running anything
    cfg.tb_params()?;
    cfg.lattice()?;
    cfg.protocol_spec()?;
    cfg.boundary()?;
    cfg.p_l()?;
    let criteria = (1..=CRITERIA).filter_map(|id| run_criterion(cfg, id)).collect();
    Ok(VerifyReport { criteria })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_every_criterion() {
        let r = verify_all(&RunConfig::default()).unwrap();
        assert_eq!(r.criteria.len(), 11);
        assert!(r.all_passed(), "{}", r.render());
    }
}
