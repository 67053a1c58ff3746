//! Event-stepped simulation of the L-point injection protocol on the chain
//! source → Qubit(1) → Qubit(2) → drain.
//!
//! Each dot holds `orbital_levels` spin-degenerate levels. The level at
//! `l_level_index` is the L level; every other level is X₀-derived.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SOURCE: usize = 0;
pub const QUBIT1: usize = 1;
pub const QUBIT2: usize = 2;
pub const DRAIN: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InjectionError {
    #[error("dot needs at least one orbital level")]
    NoLevels,
    #[error("L level index {index} outside 1..={levels}")]
    BadLIndex { index: usize, levels: usize },
    #[error("{given} level energies given for {levels} levels")]
    EnergyCount { given: usize, levels: usize },
    #[error("level energies must be finite and strictly increasing")]
    NonIncreasing,
    #[error("charging energy must be finite and non-negative, got {0}")]
    BadCharging(f64),
    #[error("p_L must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("empty event window: no transfer to classify")]
    NoSignal,
    #[error("event window has a single transfer without a closing blockade")]
    Incomplete,
    #[error("Qubit(1) never reached its L level (μ_S = {mu_s} eV, L level needs {needed} eV)")]
    LUnreachable { mu_s: f64, needed: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DotSpec {
    pub orbital_levels: usize,
    /// 1-based index of the L level.
    pub l_level_index: usize,
    /// eV, strictly increasing.
    pub level_energies: Vec<f64>,
    /// Charging energy per electron already present, eV.
    pub charging_u: f64,
    /// A second (opposite-spin) electron on the L level is blockaded.
    pub block_second_l: bool,
}

impl DotSpec {
    /// X₀-derived levels at 0, s, 2s, …, the L level one spacing above the
    /// last of them, and levels above L starting at E_L + ΔE_{L−Γ}.
    pub fn ladder(
        orbital_levels: usize,
        l_level_index: usize,
        spacing: f64,
        delta_e_l_gamma: f64,
        charging_u: f64,
    ) -> Result<Self, InjectionError> {
        if orbital_levels == 0 {
            return Err(InjectionError::NoLevels);
        }
        if l_level_index == 0 || l_level_index > orbital_levels {
            return Err(InjectionError::BadLIndex { index: l_level_index, levels: orbital_levels });
        }
        let l = l_level_index - 1;
        let e_l = spacing * l as f64;
        let energies = (0..orbital_levels)
            .map(|j| if j <= l { spacing * j as f64 } else { e_l + delta_e_l_gamma + spacing * (j - l - 1) as f64 })
            .collect();
        let spec = Self {
            orbital_levels,
            l_level_index,
            level_energies: energies,
            charging_u,
            block_second_l: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), InjectionError> {
        if self.orbital_levels == 0 {
            return Err(InjectionError::NoLevels);
        }
        if self.l_level_index == 0 || self.l_level_index > self.orbital_levels {
            return Err(InjectionError::BadLIndex { index: self.l_level_index, levels: self.orbital_levels });
        }
        if self.level_energies.len() != self.orbital_levels {
            return Err(InjectionError::EnergyCount { given: self.level_energies.len(), levels: self.orbital_levels });
        }
        if self.level_energies.iter().any(|e| !e.is_finite()) || self.level_energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(InjectionError::NonIncreasing);
        }
        if !(self.charging_u.is_finite() && self.charging_u >= 0.0) {
            return Err(InjectionError::BadCharging(self.charging_u));
        }
        Ok(())
    }

    /// 0-based L level.
    pub fn l_slot(&self) -> usize {
        self.l_level_index - 1
    }

    pub fn l_energy(&self) -> f64 {
        self.level_energies[self.l_slot()]
    }

    /// Electrochemical potential needed to add an electron to level `j`
    /// with `n` electrons already in the dot.
    pub fn add_energy(&self, j: usize, n: usize) -> f64 {
        self.level_energies[j] + self.charging_u * n as f64
    }

    /// [lo, hi) range of μ_S for which filling stops right after the first
    /// L electron.
    pub fn stop_window(&self) -> (f64, f64) {
        let below = 2 * self.l_slot();
        let lo = self.add_energy(self.l_slot(), below);
        let hi = if self.block_second_l {
            self.level_energies
                .get(self.l_slot() + 1)
                .map_or(f64::INFINITY, |&e| e + self.charging_u * (below + 1) as f64)
        } else {
            self.add_energy(self.l_slot(), below + 1)
        };
        (lo, hi)
    }
}

impl Default for DotSpec {
    fn default() -> Self {
        Self::ladder(6, 4, 0.05, 0.1, 0.0).expect("default ladder is valid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Barrier {
    Open,
    Closed,
}

/// One quantum dot's spin-orbital occupancy, `[level][spin]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DotOccupancy {
    pub levels: Vec<[bool; 2]>,
}

impl DotOccupancy {
    fn empty(n: usize) -> Self {
        Self { levels: vec![[false; 2]; n] }
    }

    pub fn electrons(&self) -> usize {
        self.levels.iter().flatten().filter(|&&o| o).count()
    }

    pub fn level_count(&self, j: usize) -> usize {
        self.levels[j].iter().filter(|&&o| o).count()
    }

    fn first_empty_spin(&self, j: usize) -> Option<usize> {
        self.levels[j].iter().position(|&o| !o)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviceState {
    pub mu_s: f64,
    pub mu_d: f64,
    /// B1 (source–Qubit(1)), B2 (Qubit(1)–Qubit(2)), B3 (Qubit(2)–drain).
    pub barriers: [Barrier; 3],
    pub delta_e_l_gamma: f64,
    /// Qubit(1) and Qubit(2).
    pub dots: [DotOccupancy; 2],
}

impl DeviceState {
    pub fn new(spec: &DotSpec, mu_s: f64, mu_d: f64, delta_e_l_gamma: f64) -> Self {
        Self {
            mu_s,
            mu_d,
            barriers: [Barrier::Open; 3],
            delta_e_l_gamma,
            dots: [DotOccupancy::empty(spec.orbital_levels), DotOccupancy::empty(spec.orbital_levels)],
        }
    }

    /// Dot by chain index (QUBIT1 or QUBIT2).
    pub fn dot(&self, which: usize) -> &DotOccupancy {
        &self.dots[which - 1]
    }

    fn dot_mut(&mut self, which: usize) -> &mut DotOccupancy {
        &mut self.dots[which - 1]
    }

    pub fn total_electrons(&self) -> usize {
        self.dots.iter().map(DotOccupancy::electrons).sum()
    }

    pub fn l_electrons(&self, which: usize, spec: &DotSpec) -> usize {
        self.dot(which).level_count(spec.l_slot())
    }

    pub fn x0_electrons(&self, which: usize, spec: &DotSpec) -> usize {
        let l = spec.l_slot();
        let d = self.dot(which);
        (0..d.levels.len()).filter(|&j| j != l).map(|j| d.level_count(j)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Inject,
    TunnelLToL,
    TunnelLToX0Relax,
    Blockade,
    DrainFlush,
    DetectL,
    DetectX0,
    /// Precondition not met; state unchanged.
    Warning,
    /// Nothing to do; state unchanged.
    Noop,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Inject => "inject",
            EventKind::TunnelLToL => "tunnel_L_to_L",
            EventKind::TunnelLToX0Relax => "tunnel_L_to_X0_relax",
            EventKind::Blockade => "blockade",
            EventKind::DrainFlush => "drain_flush",
            EventKind::DetectL => "detect_L",
            EventKind::DetectX0 => "detect_X0",
            EventKind::Warning => "warning",
            EventKind::Noop => "noop",
        }
    }

    pub fn is_transfer(self) -> bool {
        matches!(self, EventKind::TunnelLToL | EventKind::TunnelLToX0Relax)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolEvent {
    pub step: usize,
    pub kind: EventKind,
    pub dot_from: usize,
    pub dot_to: usize,
    pub n_moved: usize,
}

/// Append-only, totally ordered event log.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventLog {
    events: Vec<ProtocolEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, kind: EventKind, dot_from: usize, dot_to: usize, n_moved: usize) {
        let step = self.events.len();
        self.events.push(ProtocolEvent { step, kind, dot_from, dot_to, n_moved });
    }

    pub fn events(&self) -> &[ProtocolEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// `step,kind,dot_from,dot_to,n_moved`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "step,kind,dot_from,dot_to,n_moved")?;
        for e in &self.events {
            writeln!(w, "{},{},{},{},{}", e.step, e.kind, e.dot_from, e.dot_to, e.n_moved)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Fill Qubit(1) from the source in ascending level order while the next
/// addition energy (level plus U·n) does not exceed μ_S. Returns the number
/// of electrons injected.
pub fn fill_from_source(state: &mut DeviceState, spec: &DotSpec, log: &mut EventLog) -> usize {
    if state.barriers[0] == Barrier::Closed {
        log.push(EventKind::Warning, SOURCE, QUBIT1, 0);
        return 0;
    }
    let l = spec.l_slot();
    let mut injected = 0;
    loop {
        let dot = state.dot(QUBIT1);
        let n = dot.electrons();
        let Some(j) = (0..spec.orbital_levels).find(|&j| dot.first_empty_spin(j).is_some()) else {
            break;
        };
        if j == l && spec.block_second_l && dot.level_count(l) == 1 {
            break;
        }
        if spec.add_energy(j, n) > state.mu_s {
            break;
        }
        let s = dot.first_empty_spin(j).expect("level has room");
        state.dot_mut(QUBIT1).levels[j][s] = true;
        log.push(EventKind::Inject, SOURCE, QUBIT1, 1);
        injected += 1;
    }
    injected
}

/// Where a shuttled electron ends up in Qubit(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Landing {
    L,
    X0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ShuttleOutcome {
    Moved(Landing),
    Blockade,
    /// No L electron in Qubit(1), or B2 closed.
    Nothing,
}

/// Move the L electron of Qubit(1) along a given landing path.
pub fn shuttle_via(state: &mut DeviceState, spec: &DotSpec, landing: Landing, log: &mut EventLog) -> ShuttleOutcome {
    let l = spec.l_slot();
    if state.barriers[1] == Barrier::Closed {
        log.push(EventKind::Warning, QUBIT1, QUBIT2, 0);
        return ShuttleOutcome::Nothing;
    }
    let Some(src_spin) = (0..2).rev().find(|&s| state.dot(QUBIT1).levels[l][s]) else {
        log.push(EventKind::Noop, QUBIT1, QUBIT2, 0);
        return ShuttleOutcome::Nothing;
    };
    let target = {
        let d = state.dot(QUBIT2);
        match landing {
            Landing::L => {
                if spec.block_second_l && d.level_count(l) >= 1 {
                    None
                } else {
                    d.first_empty_spin(l).map(|s| (l, s))
                }
            }
            Landing::X0 => (0..l).find_map(|j| d.first_empty_spin(j).map(|s| (j, s))),
        }
    };
    let Some((j, s)) = target else {
        log.push(EventKind::Blockade, QUBIT1, QUBIT2, 0);
        return ShuttleOutcome::Blockade;
    };
    state.dot_mut(QUBIT1).levels[l][src_spin] = false;
    state.dot_mut(QUBIT2).levels[j][s] = true;
    let kind = match landing {
        Landing::L => EventKind::TunnelLToL,
        Landing::X0 => EventKind::TunnelLToX0Relax,
    };
    log.push(kind, QUBIT1, QUBIT2, 1);
    ShuttleOutcome::Moved(landing)
}

/// Draw the landing path: L with probability `p_l`, otherwise relaxation
/// into X₀.
pub fn draw_landing<R: Rng + ?Sized>(rng: &mut R, p_l: f64) -> Landing {
    if rng.random::<f64>() < p_l {
        Landing::L
    } else {
        Landing::X0
    }
}

/// Shuttle one electron with a freshly drawn landing path.
pub fn shuttle<R: Rng + ?Sized>(
    state: &mut DeviceState,
    spec: &DotSpec,
    rng: &mut R,
    p_l: f64,
    log: &mut EventLog,
) -> ShuttleOutcome {
    let landing = draw_landing(rng, p_l);
    shuttle_via(state, spec, landing, log)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Detection {
    L,
    X0,
}

/// Classify a shuttle phase from its current signature: one transfer then
/// blockade is L, a succession of transfers is X₀.
pub fn detect(events: &[ProtocolEvent]) -> Result<Detection, InjectionError> {
    let transfers = events.iter().filter(|e| e.kind.is_transfer()).count();
    let ends_blocked = events
        .iter()
        .rev()
        .find(|e| e.kind.is_transfer() || e.kind == EventKind::Blockade)
        .is_some_and(|e| e.kind == EventKind::Blockade);
    match transfers {
        0 => Err(InjectionError::NoSignal),
        1 if ends_blocked => Ok(Detection::L),
        1 => Err(InjectionError::Incomplete),
        _ => Ok(Detection::X0),
    }
}

/// Drain every X₀-derived electron of Qubit(2); the L electron stays.
/// Requires B3 open and μ_D below the lowest Qubit(2) level.
pub fn flush_drain(state: &mut DeviceState, spec: &DotSpec, log: &mut EventLog) -> usize {
    let mu_x0 = spec.level_energies[0];
    if state.barriers[2] == Barrier::Closed || state.mu_d >= mu_x0 {
        log.push(EventKind::Warning, QUBIT2, DRAIN, 0);
        return 0;
    }
    let l = spec.l_slot();
    let mut removed = 0;
    for (j, lvl) in state.dot_mut(QUBIT2).levels.iter_mut().enumerate() {
        if j == l {
            continue;
        }
        for o in lvl.iter_mut() {
            if *o {
                *o = false;
                removed += 1;
            }
        }
    }
    log.push(EventKind::DrainFlush, QUBIT2, DRAIN, removed);
    removed
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticParams {
    pub p_l: f64,
    pub rng_seed: u64,
}

impl StochasticParams {
    pub fn validate(&self) -> Result<(), InjectionError> {
        if !(0.0..=1.0).contains(&self.p_l) {
            return Err(InjectionError::BadProbability(self.p_l));
        }
        Ok(())
    }
}

/// Device operating point for a protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub dot: DotSpec,
    pub mu_s: f64,
    pub mu_d: f64,
    pub delta_e_l_gamma: f64,
}

impl ProtocolSpec {
    /// Default ladder with μ_S in the middle of the stop window.
    pub fn with_dot(dot: DotSpec, delta_e_l_gamma: f64) -> Self {
        let (lo, hi) = dot.stop_window();
        let mu_s = if hi.is_finite() { 0.5 * (lo + hi) } else { lo };
        let mu_d = dot.level_energies[0] - 0.1;
        Self { dot, mu_s, mu_d, delta_e_l_gamma }
    }
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self::with_dot(DotSpec::default(), 0.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub success: bool,
    /// Passes after the first (equal to the number of flushes).
    pub retries: usize,
    pub passes: usize,
    /// Transfers per shuttle phase (the current signature).
    pub current_counts: Vec<usize>,
    pub detections: Vec<Detection>,
    #[serde(skip)]
    pub log: EventLog,
    pub final_state: DeviceState,
}

/// fill → shuttle → detect → (flush and retry on X₀) until an L detection
/// or `max_retries` retries are spent. All electrons of a pass follow the
/// landing path drawn for that pass.
pub fn run_protocol(
    spec: &ProtocolSpec,
    params: &StochasticParams,
    max_retries: usize,
) -> Result<ProtocolReport, InjectionError> {
    spec.dot.validate()?;
    params.validate()?;
    let dot = &spec.dot;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut state = DeviceState::new(dot, spec.mu_s, spec.mu_d, spec.delta_e_l_gamma);
    let mut log = EventLog::new();
    let mut current_counts = Vec::new();
    let mut detections = Vec::new();
    let mut success = false;
    let mut passes = 0;

    for pass in 0..=max_retries {
        if pass > 0 {
            flush_drain(&mut state, dot, &mut log);
        }
        passes += 1;
        fill_from_source(&mut state, dot, &mut log);
        if state.l_electrons(QUBIT1, dot) == 0 {
            return Err(InjectionError::LUnreachable { mu_s: spec.mu_s, needed: dot.stop_window().0 });
        }
        let landing = draw_landing(&mut rng, params.p_l);
        let start = log.len();
        let mut transfers = 0;
        // each dot level can absorb at most two electrons
        for _ in 0..=2 * dot.orbital_levels {
            match shuttle_via(&mut state, dot, landing, &mut log) {
                ShuttleOutcome::Moved(_) => {
                    transfers += 1;
                    fill_from_source(&mut state, dot, &mut log);
                }
                ShuttleOutcome::Blockade | ShuttleOutcome::Nothing => break,
            }
        }
        let d = detect(&log.events()[start..])?;
        current_counts.push(transfers);
        detections.push(d);
        match d {
            Detection::L => {
                log.push(EventKind::DetectL, QUBIT2, QUBIT2, 0);
                success = true;
                break;
            }
            Detection::X0 => log.push(EventKind::DetectX0, QUBIT2, QUBIT2, 0),
        }
    }
    Ok(ProtocolReport {
        success,
        retries: passes - 1,
        passes,
        current_counts,
        detections,
        log,
        final_state: state,
    })
}

/// SplitMix64 finaliser, used to derive independent per-trial seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base ^ trial)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: usize,
    pub p_l: f64,
    pub max_retries: usize,
    pub base_seed: u64,
    pub successes: usize,
    pub success_rate: f64,
    /// 1 − (1 − p_L)^(max_retries + 1).
    pub expected_success_rate: f64,
    /// Binomial standard error of the success rate.
    pub success_sigma: f64,
    /// Mean retries over successful trials.
    pub mean_retries: f64,
    /// Truncated-geometric expectation of the same.
    pub expected_mean_retries: f64,
    /// Standard error of `mean_retries` under the truncated geometric law.
    pub mean_retries_sigma: f64,
    /// `retry_histogram[r]` successful trials that used r retries.
    pub retry_histogram: Vec<usize>,
}

impl MonteCarloStats {
    /// Both the success rate and the mean retries lie within `k` standard
    /// errors of the geometric law.
    pub fn within_sigma(&self, k: f64) -> bool {
        let rate_ok = (self.success_rate - self.expected_success_rate).abs() <= k * self.success_sigma;
        let mean_ok = self.successes == 0
            || (self.mean_retries - self.expected_mean_retries).abs() <= k * self.mean_retries_sigma;
        rate_ok && mean_ok
    }

    /// `retries,count,expected_count`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "retries,count,expected_count")?;
        let q = 1.0 - self.p_l;
        for (r, c) in self.retry_histogram.iter().enumerate() {
            let expected = self.trials as f64 * self.p_l * q.powi(r as i32);
            writeln!(w, "{r},{c},{expected:.6}")?;
        }
        Ok(())
    }
}

/// Moments of the retry count conditioned on success within `max_retries`.
pub fn truncated_geometric(p: f64, max_retries: usize) -> (f64, f64) {
    let q = 1.0 - p;
    let mut z = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for r in 0..=max_retries {
        let w = p * q.powi(r as i32);
        z += w;
        m1 += r as f64 * w;
        m2 += (r * r) as f64 * w;
    }
    if z == 0.0 {
        return (0.0, 0.0);
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Run `trials` independent protocols in parallel with derived seeds.
/// Results are independent of thread count.
pub fn monte_carlo(
    spec: &ProtocolSpec,
    p_l: f64,
    base_seed: u64,
    trials: usize,
    max_retries: usize,
) -> Result<MonteCarloStats, InjectionError> {
    let reports: Vec<(bool, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let params = StochasticParams { p_l, rng_seed: trial_seed(base_seed, t) };
            run_protocol(spec, &params, max_retries).map(|r| (r.success, r.retries))
        })
        .collect::<Result<_, _>>()?;
    let mut hist = vec![0usize; max_retries + 1];
    let mut successes = 0;
    let mut retry_sum = 0usize;
    for &(ok, r) in &reports {
        if ok {
            successes += 1;
            retry_sum += r;
            hist[r] += 1;
        }
    }
    let n = trials as f64;
    let expected = 1.0 - (1.0 - p_l).powi(max_retries as i32 + 1);
    let (mean_exp, var_exp) = truncated_geometric(p_l, max_retries);
    Ok(MonteCarloStats {
        trials,
        p_l,
        max_retries,
        base_seed,
        successes,
        success_rate: successes as f64 / n,
        expected_success_rate: expected,
        success_sigma: (expected * (1.0 - expected) / n).sqrt(),
        mean_retries: if successes > 0 { retry_sum as f64 / successes as f64 } else { 0.0 },
        expected_mean_retries: mean_exp,
        mean_retries_sigma: (var_exp / successes.max(1) as f64).sqrt(),
        retry_histogram: hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_state(spec: &ProtocolSpec) -> DeviceState {
        DeviceState::new(&spec.dot, spec.mu_s, spec.mu_d, spec.delta_e_l_gamma)
    }

    #[test]
    fn default_ladder() {
        let d = DotSpec::default();
        assert_eq!(d.level_energies.len(), 6);
        let want = [0.0, 0.05, 0.1, 0.15, 0.25, 0.3];
        for (a, b) in d.level_energies.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let (lo, hi) = d.stop_window();
        assert!((lo - 0.15).abs() < 1e-12 && (hi - 0.25).abs() < 1e-12);
    }

    #[test]
    fn seventh_electron_on_l() {
        let spec = ProtocolSpec::default();
        let mut s = default_state(&spec);
        let mut log = EventLog::new();
        assert_eq!(fill_from_source(&mut s, &spec.dot, &mut log), 7);
        assert_eq!(s.l_electrons(QUBIT1, &spec.dot), 1);
        assert_eq!(s.x0_electrons(QUBIT1, &spec.dot), 6);
        assert_eq!(log.count(EventKind::Inject), 7);
    }

    #[test]
    fn low_source_injects_nothing() {
        let spec = ProtocolSpec { mu_s: -0.01, ..ProtocolSpec::default() };
        let mut s = default_state(&spec);
        assert_eq!(fill_from_source(&mut s, &spec.dot, &mut EventLog::new()), 0);
    }

    #[test]
    fn closed_source_barrier_warns() {
        let spec = ProtocolSpec::default();
        let mut s = default_state(&spec);
        s.barriers[0] = Barrier::Closed;
        let mut log = EventLog::new();
        assert_eq!(fill_from_source(&mut s, &spec.dot, &mut log), 0);
        assert_eq!(log.events()[0].kind, EventKind::Warning);
    }

    #[test]
    fn charging_shifts_threshold_by_six_u() {
        let u = 0.02;
        let dot = DotSpec::ladder(6, 4, 0.05, 0.1, u).unwrap();
        let (lo, _) = dot.stop_window();
        assert!((lo - (0.15 + 6.0 * u)).abs() < 1e-12);
        let below = ProtocolSpec { mu_s: lo - 1e-9, ..ProtocolSpec::with_dot(dot.clone(), 0.1) };
        let mut s = default_state(&below);
        assert_eq!(fill_from_source(&mut s, &dot, &mut EventLog::new()), 6);
        let at = ProtocolSpec { mu_s: lo, ..ProtocolSpec::with_dot(dot.clone(), 0.1) };
        let mut s = default_state(&at);
        assert_eq!(fill_from_source(&mut s, &dot, &mut EventLog::new()), 7);
    }

    #[test]
    fn shuttle_blockade_on_occupied_l() {
        let spec = ProtocolSpec::default();
        let mut s = default_state(&spec);
        let mut log = EventLog::new();
        fill_from_source(&mut s, &spec.dot, &mut log);
        assert_eq!(shuttle_via(&mut s, &spec.dot, Landing::L, &mut log), ShuttleOutcome::Moved(Landing::L));
        fill_from_source(&mut s, &spec.dot, &mut log);
        let before = s.clone();
        assert_eq!(shuttle_via(&mut s, &spec.dot, Landing::L, &mut log), ShuttleOutcome::Blockade);
        assert_eq!(s, before);
    }

    #[test]
    fn nothing_to_shuttle() {
        let spec = ProtocolSpec::default();
        let mut s = default_state(&spec);
        let mut log = EventLog::new();
        assert_eq!(shuttle_via(&mut s, &spec.dot, Landing::X0, &mut log), ShuttleOutcome::Nothing);
        assert_eq!(log.events()[0].kind, EventKind::Noop);
    }

    #[test]
    fn flush_keeps_l() {
        let spec = ProtocolSpec::default();
        let mut s = default_state(&spec);
        let l = spec.dot.l_slot();
        s.dots[1].levels[l][0] = true;
        s.dots[1].levels[0] = [true, true];
        let mut log = EventLog::new();
        assert_eq!(flush_drain(&mut s, &spec.dot, &mut log), 2);
        assert_eq!(s.dot(QUBIT2).electrons(), 1);
        assert_eq!(s.l_electrons(QUBIT2, &spec.dot), 1);
    }

    #[test]
    fn flush_needs_low_drain() {
        let spec = ProtocolSpec { mu_d: 0.5, ..ProtocolSpec::default() };
        let mut s = default_state(&spec);
        s.dots[1].levels[0] = [true, true];
        let mut log = EventLog::new();
        assert_eq!(flush_drain(&mut s, &spec.dot, &mut log), 0);
        assert_eq!(log.events()[0].kind, EventKind::Warning);
        assert_eq!(s.dot(QUBIT2).electrons(), 2);
    }

    #[test]
    fn detection_rules() {
        let mut log = EventLog::new();
        log.push(EventKind::TunnelLToL, 1, 2, 1);
        log.push(EventKind::Inject, 0, 1, 1);
        log.push(EventKind::Blockade, 1, 2, 0);
        assert_eq!(detect(log.events()), Ok(Detection::L));
        let mut log = EventLog::new();
        for _ in 0..6 {
            log.push(EventKind::TunnelLToX0Relax, 1, 2, 1);
        }
        assert_eq!(detect(log.events()), Ok(Detection::X0));
        assert_eq!(detect(&[]), Err(InjectionError::NoSignal));
    }

    #[test]
    fn certain_outcomes() {
        let spec = ProtocolSpec::default();
        let ok = run_protocol(&spec, &StochasticParams { p_l: 1.0, rng_seed: 3 }, 5).unwrap();
        assert!(ok.success);
        assert_eq!(ok.retries, 0);
        assert_eq!(ok.current_counts, vec![1]);
        let fail = run_protocol(&spec, &StochasticParams { p_l: 0.0, rng_seed: 3 }, 5).unwrap();
        assert!(!fail.success);
        assert_eq!(fail.log.count(EventKind::DrainFlush), 5);
        assert_eq!(fail.current_counts, vec![6; 6]);
    }

    #[test]
    fn splitmix_reference() {
        // first output of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn truncated_geometric_limits() {
        let (m, v) = truncated_geometric(0.5, 200);
        assert!((m - 1.0).abs() < 1e-12 && (v - 2.0).abs() < 1e-12);
        assert_eq!(truncated_geometric(0.3, 0), (0.0, 0.0));
    }
}
