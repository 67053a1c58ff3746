//! Run configuration: a flat schema of dotted keys that validates TOML
//! files and `key=value` overrides and renders the per-section help text.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;
use toml::Value;

use crate::electrostatics::{BoundarySpec, Extents, InterfaceMode, Variant};
use crate::injection::{DotSpec, ProtocolSpec};
use crate::lattice::{LatticeSpec, Rounding};
use crate::spinorbit::MultipoleField;
use crate::tightbinding::TbParams;
use crate::valleys::{parse_axis, ValleyFamily};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` expects {expected}, got `{found}`")]
    WrongType { key: String, expected: String, found: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("cannot parse {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("config key `{key}`: {msg}")]
    Invalid { key: &'static str, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Non-negative integer.
    Int,
    /// Three floats.
    Vec3,
    /// Non-empty list of floats.
    FloatList,
    /// Float or the string "auto".
    FloatOrAuto,
    Text,
    Choice(&'static [&'static str]),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Float => f.write_str("float"),
            Kind::Int => f.write_str("non-negative integer"),
            Kind::Vec3 => f.write_str("[x, y, z]"),
            Kind::FloatList => f.write_str("list of floats"),
            Kind::FloatOrAuto => f.write_str("float or \"auto\""),
            Kind::Text => f.write_str("string"),
            Kind::Choice(c) => write!(f, "one of {}", c.join("|")),
        }
    }
}

pub struct KeyDef {
    pub key: &'static str,
    pub kind: Kind,
    /// TOML literal.
    pub default: &'static str,
    pub help: &'static str,
}

const fn k(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> KeyDef {
    KeyDef { key, kind, default, help }
}

use Kind::*;

pub const SCHEMA: &[KeyDef] = &[
    k("lattice.a_nm", Float, "0.543", "cubic lattice constant (nm)"),
    k("tb.es", Float, "-3.4791", "s on-site energy (eV)"),
    k("tb.ep", Float, "1.7707", "p on-site energy (eV)"),
    k("tb.esstar", Float, "22.5058", "s* on-site energy (eV)"),
    k("tb.vss", Float, "-8.5529", "V(s,s) (eV)"),
    k("tb.vsp", Float, "3.2923", "V(s,p) (eV)"),
    k("tb.vxx", Float, "1.7707", "V(x,x) (eV)"),
    k("tb.vxy", Float, "5.0765", "V(x,y) (eV)"),
    k("tb.vsstarp", Float, "7.59", "V(s*,p) (eV)"),
    k("tb.soc_lambda", Float, "0.01467", "spin-orbit λ on the p shell (eV); split-off = 3λ"),
    k("bands.samples", Int, "200", "k-points per path segment"),
    k("bands.path", Choice(&["l-gamma-x", "gamma-delta-x", "gamma-lambda-l", "k-l"]), "\"l-gamma-x\"", "k-path to sample"),
    k("spinorbit.q0", Float, "0.0", "free-electron coefficient q0"),
    k("spinorbit.q_dip", Vec3, "[0.1, 0.1, 0.1]", "electric dipole Q (Rashba)"),
    k("spinorbit.m_dip", Vec3, "[0.0, 0.0, 0.0]", "magnetic dipole M"),
    k("spinorbit.t_dip", Vec3, "[0.0, 0.0, 0.0]", "magnetic toroidal dipole T"),
    k("spinorbit.g0", Float, "0.0", "electric toroidal monopole G0"),
    k("spinorbit.q_xyz", Float, "0.1", "electric octupole Q_xyz (Dresselhaus)"),
    k("spinorbit.k_t", Float, "0.25", "Λ-axis point k = (t, t, t), units of 2π/a"),
    k("spinorbit.degeneracy_tol", Float, "1e-8", "energy tolerance for degenerate groups (eV)"),
    k("spinorbit.samples", Int, "1000", "random fields drawn by the identity checks"),
    k("valleys.family", Choice(&["X0", "L"]), "\"L\"", "valley family"),
    k("valleys.growth", Text, "\"111\"", "growth axis, e.g. 001, 111 or 1,-1,0"),
    k("valleys.well_width_nm", Float, "5.0", "confinement width W (nm)"),
    k("valleys.x0_ml", Float, "0.916", "X0 longitudinal mass (m0)"),
    k("valleys.x0_mt", Float, "0.190", "X0 transverse mass (m0)"),
    k("valleys.l_ml", Float, "1.64", "L longitudinal mass (m0)"),
    k("valleys.l_mt", Float, "0.082", "L transverse mass (m0)"),
    k("dots.rounding", Choice(&["nearest", "floor"]), "\"nearest\"", "unit-cell count rounding"),
    k("dots.sides_nm", FloatList, "[10.0, 5.0, 2.0, 1.0]", "cube edges to tabulate (nm)"),
    k("inject.p_l", Float, "0.5", "probability a shuttled electron lands on L"),
    k("inject.seed", Int, "2024", "RNG seed"),
    k("inject.max_retries", Int, "20", "flush-and-retry budget"),
    k("inject.trials", Int, "10000", "Monte Carlo trials"),
    k("inject.levels", Int, "6", "orbital levels per dot"),
    k("inject.l_index", Int, "4", "1-based index of the L level"),
    k("inject.level_spacing_ev", Float, "0.05", "spacing of the X0-derived levels (eV)"),
    k("inject.delta_e_l_gamma_ev", Float, "0.1", "gap above the L level (eV)"),
    k("inject.u_ev", Float, "0.0", "charging energy per electron (eV)"),
    k("inject.mu_s_ev", FloatOrAuto, "\"auto\"", "source potential; auto = middle of the stop window"),
    k("inject.mu_d_ev", FloatOrAuto, "\"auto\"", "drain potential; auto = lowest level - 0.1 eV"),
    k("poisson.variant", Choice(&["planarized", "protruding", "both"]), "\"both\"", "fin cross-section"),
    k("poisson.w_nm", Float, "2.5", "fin and gate width W (nm)"),
    k("poisson.h_nm", Float, "0.5", "grid spacing (nm)"),
    k("poisson.vgate", Float, "1.0", "gate voltage (V)"),
    k("poisson.vsub", Float, "0.0", "substrate voltage (V)"),
    k("poisson.interface_mode", Choice(&["dielectric_continuity", "fixed_potential"]), "\"dielectric_continuity\"", "Si/oxide interface treatment"),
    k("poisson.interface_potential", Float, "0.0", "interface potential in fixed_potential mode (V)"),
    k("poisson.eps_si", Float, "11.7", "relative permittivity of Si"),
    k("poisson.eps_ox", Float, "3.9", "relative permittivity of the oxide"),
    k("poisson.tol", Float, "1e-10", "relative residual tolerance"),
    k("poisson.max_iter", Int, "500000", "SOR sweep limit"),
    k("poisson.window_nm", Float, "3.0", "depth below the fin top used by the gradient metric (nm)"),
    k("poisson.levels", Int, "10", "contour levels"),
    k("poisson.substrate_nm", Float, "2.0", "substrate thickness (nm)"),
    k("poisson.fin_height_nm", Float, "10.0", "fin height (nm)"),
    k("poisson.exposed_nm", Float, "6.0", "fin height above the trench oxide, protruding variant (nm)"),
    k("poisson.oxide_nm", Float, "1.0", "gate oxide thickness (nm)"),
    k("poisson.gate_nm", Float, "2.0", "gate thickness (nm)"),
    k("poisson.margin_nm", Float, "6.0", "lateral space beside the fin (nm)"),
    k("poisson.vacuum_nm", Float, "2.0", "vacuum above the gate (nm)"),
];

pub fn key_def(key: &str) -> Option<&'static KeyDef> {
    SCHEMA.iter().find(|d| d.key == key)
}

/// Help lines for every key under `section.`.
pub fn section_help(section: &str) -> String {
    let prefix = format!("{section}.");
    let mut out = String::new();
    for d in SCHEMA.iter().filter(|d| d.key.starts_with(&prefix)) {
        out.push_str(&format!("  {:<30} {:<24} {} [{}]\n", d.key, d.default, d.help, d.kind));
    }
    out
}

fn parse_literal(s: &str) -> Option<Value> {
    let t: toml::Table = toml::from_str(&format!("v = {s}")).ok()?;
    t.get("v").cloned()
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn canonical(def: &KeyDef, v: &Value) -> Result<Value, ConfigError> {
    let bad = || ConfigError::WrongType { key: def.key.to_string(), expected: def.kind.to_string(), found: v.to_string() };
    let floats = |arr: &Vec<Value>| -> Option<Vec<Value>> {
        arr.iter().map(|x| as_f64(x).filter(|f| f.is_finite()).map(Value::Float)).collect()
    };
    match def.kind {
        Float => as_f64(v).filter(|x| x.is_finite()).map(Value::Float).ok_or_else(bad),
        Int => match v {
            Value::Integer(i) if *i >= 0 => Ok(v.clone()),
            _ => Err(bad()),
        },
        Vec3 => match v {
            Value::Array(a) if a.len() == 3 => floats(a).map(Value::Array).ok_or_else(bad),
            _ => Err(bad()),
        },
        FloatList => match v {
            Value::Array(a) if !a.is_empty() => floats(a).map(Value::Array).ok_or_else(bad),
            _ => Err(bad()),
        },
        FloatOrAuto => match v {
            Value::String(s) if s == "auto" => Ok(v.clone()),
            _ => as_f64(v).filter(|x| x.is_finite()).map(Value::Float).ok_or_else(bad),
        },
        Text => match v {
            Value::String(_) => Ok(v.clone()),
            // bare Miller indices such as 111 arrive as integers
            Value::Integer(i) => Ok(Value::String(i.to_string())),
            _ => Err(bad()),
        },
        Choice(c) => match v {
            Value::String(s) if c.contains(&s.as_str()) => Ok(v.clone()),
            _ => Err(bad()),
        },
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) if key_def(&key).is_none() => flatten(&key, t, out),
            _ => out.push((key, v.clone())),
        }
    }
}

/// Fully resolved configuration: every schema key has a validated value.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|d| {
                let v = parse_literal(d.default).expect("schema defaults are TOML literals");
                (d.key, canonical(d, &v).expect("schema defaults are well typed"))
            })
            .collect();
        Self { values }
    }
}

impl RunConfig {
    /// Set one key from a TOML value.
    pub fn set(&mut self, key: &str, value: &Value) -> Result<(), ConfigError> {
        let def = key_def(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        self.values.insert(def.key, canonical(def, value)?);
        Ok(())
    }

    /// Merge a TOML document; nested tables map to dotted keys.
    pub fn merge_toml(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_string(), msg: e.to_string() })?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat);
        for (k, v) in flat {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        self.merge_toml(&text, &path.display().to_string())
    }

    /// Apply `key=value`; the value is read as a TOML literal, falling back
    /// to a bare string.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        let (key, raw) = (key.trim(), raw.trim());
        if key.is_empty() {
            return Err(ConfigError::BadOverride(spec.to_string()));
        }
        let value = parse_literal(raw).unwrap_or_else(|| Value::String(raw.to_string()));
        self.set(key, &value)
    }

    /// Defaults, then `file`, then overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(p) = file {
            cfg.merge_file(p)?;
        }
        for o in overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg)
    }

    pub fn value(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("`{key}` is not a schema key"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        as_f64(self.value(key)).expect("validated float")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.value(key).as_integer().expect("validated integer") as usize
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.value(key).as_integer().expect("validated integer") as u64
    }

    pub fn str(&self, key: &str) -> &str {
        self.value(key).as_str().expect("validated string")
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        self.value(key).as_array().expect("validated list").iter().map(|v| as_f64(v).expect("float")).collect()
    }

    pub fn vec3(&self, key: &str) -> [f64; 3] {
        let v = self.floats(key);
        [v[0], v[1], v[2]]
    }

    /// `None` for "auto".
    pub fn f64_or_auto(&self, key: &str) -> Option<f64> {
        as_f64(self.value(key))
    }

    /// Resolved configuration as a nested TOML document, keys sorted.
    pub fn to_toml_string(&self) -> String {
        let mut root = toml::Table::new();
        for (key, v) in &self.values {
            let (section, leaf) = key.split_once('.').expect("schema keys are dotted");
            root.entry(section)
                .or_insert_with(|| Value::Table(toml::Table::new()))
                .as_table_mut()
                .expect("sections are tables")
                .insert(leaf.to_string(), v.clone());
        }
        toml::to_string(&root).expect("TOML values serialise")
    }

    pub fn lattice(&self) -> Result<LatticeSpec, ConfigError> {
        LatticeSpec::new(self.f64("lattice.a_nm")).map_err(|e| ConfigError::Invalid { key: "lattice.a_nm", msg: e.to_string() })
    }

    pub fn tb_params(&self) -> Result<TbParams, ConfigError> {
        let p = TbParams {
            es: self.f64("tb.es"),
            ep: self.f64("tb.ep"),
            esstar: self.f64("tb.esstar"),
            vss: self.f64("tb.vss"),
            vsp: self.f64("tb.vsp"),
            vxx: self.f64("tb.vxx"),
            vxy: self.f64("tb.vxy"),
            vsstarp: self.f64("tb.vsstarp"),
            soc_lambda: self.f64("tb.soc_lambda"),
        };
        p.validate().map_err(|e| ConfigError::Invalid { key: "tb", msg: e.to_string() })?;
        Ok(p)
    }

    pub fn field(&self) -> MultipoleField {
        MultipoleField {
            q0: self.f64("spinorbit.q0"),
            q_dip: self.vec3("spinorbit.q_dip"),
            m_dip: self.vec3("spinorbit.m_dip"),
            t_dip: self.vec3("spinorbit.t_dip"),
            g0: self.f64("spinorbit.g0"),
            q_xyz: self.f64("spinorbit.q_xyz"),
        }
    }

    pub fn rounding(&self) -> Rounding {
        self.str("dots.rounding").parse().expect("validated choice")
    }

    pub fn valley_family(&self) -> ValleyFamily {
        self.str("valleys.family").parse().expect("validated choice")
    }

    pub fn growth_axis(&self) -> Result<[f64; 3], ConfigError> {
        parse_axis(self.str("valleys.growth")).map_err(|e| ConfigError::Invalid { key: "valleys.growth", msg: e.to_string() })
    }

    /// (ml, mt) for a family.
    pub fn masses(&self, family: ValleyFamily) -> (f64, f64) {
        match family {
            ValleyFamily::X0 => (self.f64("valleys.x0_ml"), self.f64("valleys.x0_mt")),
            ValleyFamily::L => (self.f64("valleys.l_ml"), self.f64("valleys.l_mt")),
        }
    }

    pub fn dot_spec(&self) -> Result<DotSpec, ConfigError> {
        DotSpec::ladder(
            self.usize("inject.levels"),
            self.usize("inject.l_index"),
            self.f64("inject.level_spacing_ev"),
            self.f64("inject.delta_e_l_gamma_ev"),
            self.f64("inject.u_ev"),
        )
        .map_err(|e| ConfigError::Invalid { key: "inject", msg: e.to_string() })
    }

    pub fn protocol_spec(&self) -> Result<ProtocolSpec, ConfigError> {
        let base = ProtocolSpec::with_dot(self.dot_spec()?, self.f64("inject.delta_e_l_gamma_ev"));
        Ok(ProtocolSpec {
            mu_s: self.f64_or_auto("inject.mu_s_ev").unwrap_or(base.mu_s),
            mu_d: self.f64_or_auto("inject.mu_d_ev").unwrap_or(base.mu_d),
            ..base
        })
    }

    pub fn p_l(&self) -> Result<f64, ConfigError> {
        let p = self.f64("inject.p_l");
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::Invalid { key: "inject.p_l", msg: format!("{p} is outside [0, 1]") });
        }
        Ok(p)
    }

    pub fn variants(&self) -> Vec<Variant> {
        match self.str("poisson.variant") {
            "both" => vec![Variant::Planarized, Variant::Protruding],
            v => vec![v.parse().expect("validated choice")],
        }
    }

    pub fn boundary(&self) -> Result<BoundarySpec, ConfigError> {
        let bc = BoundarySpec {
            gate_voltage: self.f64("poisson.vgate"),
            substrate_voltage: self.f64("poisson.vsub"),
            interface_mode: self.str("poisson.interface_mode").parse::<InterfaceMode>().expect("validated choice"),
            interface_potential: self.f64("poisson.interface_potential"),
            eps_si: self.f64("poisson.eps_si"),
            eps_ox: self.f64("poisson.eps_ox"),
        };
        bc.validate().map_err(|e| ConfigError::Invalid { key: "poisson", msg: e.to_string() })?;
        Ok(bc)
    }

    pub fn extents(&self) -> Extents {
        Extents {
            substrate_nm: self.f64("poisson.substrate_nm"),
            fin_height_nm: self.f64("poisson.fin_height_nm"),
            exposed_nm: self.f64("poisson.exposed_nm"),
            oxide_nm: self.f64("poisson.oxide_nm"),
            gate_nm: self.f64("poisson.gate_nm"),
            margin_nm: self.f64("poisson.margin_nm"),
            vacuum_nm: self.f64("poisson.vacuum_nm"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.tb_params().unwrap(), TbParams::silicon());
        assert_eq!(c.lattice().unwrap(), LatticeSpec::silicon());
        assert_eq!(c.extents(), Extents::default());
        assert_eq!(c.boundary().unwrap(), BoundarySpec::default());
        assert_eq!(c.protocol_spec().unwrap(), ProtocolSpec::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let mut c = RunConfig::default();
        let e = c.merge_toml("[tb]\nes = 1.0\nbogus = 2\n", "inline").unwrap_err();
        assert_eq!(e.to_string(), "unknown config key `tb.bogus`");
        assert!(matches!(c.apply_override("nope.x=1"), Err(ConfigError::UnknownKey(k)) if k == "nope.x"));
    }

    #[test]
    fn overrides_coerce_and_check_types() {
        let mut c = RunConfig::default();
        c.apply_override("poisson.w_nm=4").unwrap();
        assert_eq!(c.f64("poisson.w_nm"), 4.0);
        c.apply_override("poisson.variant=protruding").unwrap();
        assert_eq!(c.variants(), vec![Variant::Protruding]);
        assert!(c.apply_override("poisson.variant=round").is_err());
        assert!(c.apply_override("inject.trials=-3").is_err());
        assert!(c.apply_override("spinorbit.q_dip=[1,2]").is_err());
        assert!(c.apply_override("noequals").is_err());
        c.apply_override("valleys.growth=111").unwrap();
        assert_eq!(c.str("valleys.growth"), "111");
    }

    #[test]
    fn resolved_echo_round_trips() {
        let mut c = RunConfig::default();
        c.apply_override("inject.mu_s_ev=0.2").unwrap();
        let text = c.to_toml_string();
        let mut d = RunConfig::default();
        d.merge_toml(&text, "echo").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn help_lists_section_keys() {
        let h = section_help("valleys");
        assert!(h.contains("valleys.well_width_nm") && !h.contains("poisson."));
    }
}
