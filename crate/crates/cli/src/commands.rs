use anyhow::{anyhow, Context};
use lpoint_core::config::{ConfigError, RunConfig};
use lpoint_core::electrostatics::{build_geometry, contour_quantize, fin_gradient_metric, solve_poisson, FieldGrid};
use lpoint_core::grouptheory::{builtin_table, product, spinor_rep, GaussInt, RepVector};
use lpoint_core::injection::{monte_carlo, run_protocol, StochasticParams};
use lpoint_core::lattice::{count_dot_levels, l_gamma_x_path, standard_path, DotGeometry, KPath, KVector, PathName};
use lpoint_core::spinorbit::{bsvsp_check, h_lambda, h_total};
use lpoint_core::tightbinding::{band_features, solve_bands, TbParams};
use lpoint_core::valleys::{split_valleys, ValleySet};
use lpoint_core::verify::{artifacts, run_criterion, verify_all};
use serde::Serialize;
use serde_json::json;

use crate::output::Outputs;
use crate::{Command, Failure};

pub fn name(c: &Command) -> &'static str {
    match c {
        Command::Bands(_) => "bands",
        Command::Spinorbit(_) => "spinorbit",
        Command::Group(_) => "group",
        Command::Valleys(_) => "valleys",
        Command::Dots(_) => "dots",
        Command::Inject(_) => "inject",
        Command::Poisson(_) => "poisson",
        Command::VerifyAll => "verify-all",
    }
}

fn quoted(key: &str, v: &str) -> String {
    format!("{key}=\"{v}\"")
}

/// Subcommand flags as config overrides; these win over `--set`.
pub fn flag_overrides(c: &Command) -> Result<Vec<String>, ConfigError> {
    let mut o = Vec::new();
    match c {
        Command::Bands(a) => {
            if let Some(p) = &a.preset {
                let t = TbParams::preset(p).map_err(|e| ConfigError::Invalid { key: "--preset", msg: e.to_string() })?;
                for (k, v) in [
                    ("es", t.es),
                    ("ep", t.ep),
                    ("esstar", t.esstar),
                    ("vss", t.vss),
                    ("vsp", t.vsp),
                    ("vxx", t.vxx),
                    ("vxy", t.vxy),
                    ("vsstarp", t.vsstarp),
                    ("soc_lambda", t.soc_lambda),
                ] {
                    o.push(format!("tb.{k}={v:?}"));
                }
            }
            if let Some(n) = a.samples {
                o.push(format!("bands.samples={n}"));
            }
            if let Some(p) = &a.path {
                o.push(quoted("bands.path", p));
            }
        }
        Command::Spinorbit(a) => {
            if let Some(t) = a.t {
                o.push(format!("spinorbit.k_t={t:?}"));
            }
        }
        Command::Group(_) | Command::VerifyAll => {}
        Command::Valleys(a) => {
            if let Some(f) = &a.family {
                o.push(quoted("valleys.family", &f.to_ascii_uppercase()));
            }
            if let Some(g) = &a.growth {
                o.push(quoted("valleys.growth", g));
            }
            if let Some(w) = a.width_nm {
                o.push(format!("valleys.well_width_nm={w:?}"));
            }
        }
        Command::Dots(a) => {
            if !a.side_nm.is_empty() {
                let list: Vec<String> = a.side_nm.iter().map(|s| format!("{s:?}")).collect();
                o.push(format!("dots.sides_nm=[{}]", list.join(", ")));
            }
            if let Some(r) = &a.rounding {
                o.push(quoted("dots.rounding", r));
            }
        }
        Command::Inject(a) => {
            if let Some(p) = a.p_l {
                o.push(format!("inject.p_l={p:?}"));
            }
            if let Some(n) = a.trials {
                o.push(format!("inject.trials={n}"));
            }
            if let Some(n) = a.max_retries {
                o.push(format!("inject.max_retries={n}"));
            }
        }
        Command::Poisson(a) => {
            if let Some(v) = &a.variant {
                o.push(quoted("poisson.variant", v));
            }
            if let Some(w) = a.w_nm {
                o.push(format!("poisson.w_nm={w:?}"));
            }
            if let Some(v) = a.vgate {
                o.push(format!("poisson.vgate={v:?}"));
            }
            if let Some(m) = &a.interface_mode {
                o.push(quoted("poisson.interface_mode", m));
            }
        }
    }
    Ok(o)
}

pub fn run(c: &Command, cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    out.write("config.resolved.toml", cfg.to_toml_string().as_bytes())?;
    match c {
        Command::Bands(_) => bands(cfg, out),
        Command::Spinorbit(a) => spinorbit(cfg, out, &a.check),
        Command::Group(a) => group(out, a.rep.as_deref()),
        Command::Valleys(_) => valleys(cfg, out),
        Command::Dots(_) => dots(cfg, out),
        Command::Inject(_) => inject(cfg, out),
        Command::Poisson(_) => poisson(cfg, out),
        Command::VerifyAll => verify(cfg, out),
    }
}

fn kpath(cfg: &RunConfig) -> anyhow::Result<KPath> {
    let n = cfg.usize("bands.samples");
    Ok(match cfg.str("bands.path") {
        "l-gamma-x" => l_gamma_x_path(n)?,
        other => standard_path(other.parse::<PathName>()?, n)?,
    })
}

fn bands(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let params = cfg.tb_params()?;
    let path = kpath(cfg)?;
    let set = solve_bands(&params, &path).context("solving bands")?;
    out.write_with("bands.csv", |w| set.write_csv(w))?;
    out.write_with("kpath.csv", |w| path.write_csv(w))?;
    let f = band_features(&params, cfg.usize("bands.samples")).context("locating band landmarks")?;
    out.write_json("band_features.json", &f)?;
    println!("{} k-points, {} bands, min connectivity overlap {:.3}", set.n_k(), set.n_bands(), set.min_overlap());
    println!("conduction minimum along Γ-X at k = {:.3} (2π/a)", f.x0_k);
    println!("indirect gap {:.4} eV; E(L) - E(X0) = {:.4} eV; E(L) - VBM = {:.4} eV", f.gap_ev, f.l_minus_x0_ev, f.l_minus_vbm_ev);
    println!("s weight: Λ1 midpoint {:.3}, Δ1 at 0.85 X {:.3}", f.lambda1_s, f.delta1.s);
    Ok(())
}

fn spinorbit(cfg: &RunConfig, out: &mut Outputs, check: &str) -> Result<(), Failure> {
    let ids: &[u32] = match check {
        "dso-lambda" => &[1],
        "spin-sum" => &[2],
        "bsvsp" => &[3],
        _ => &[1, 2, 3],
    };
    let results: Vec<_> = ids.iter().filter_map(|&id| run_criterion(cfg, id)).collect();
    for r in &results {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.measured);
    }
    let field = cfg.field();
    let t = cfg.f64("spinorbit.k_t");
    let k = KVector::new(t, t, t);
    let report = bsvsp_check(&cfg.tb_params()?, &field, k, cfg.f64("spinorbit.degeneracy_tol")).context("BSVSP analysis")?;
    out.write_json(
        "spinorbit.json",
        &json!({
            "checks": results,
            "k": k,
            "field": field,
            "h_total": h_total(&field, k),
            "h_lambda": h_lambda(&field, k),
            "bsvsp": report,
        }),
    )?;
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Check("spin-orbit check failed".into()))
    }
}

fn parse_rep(s: &str) -> anyhow::Result<RepVector> {
    let chars = s
        .split(',')
        .map(|p| {
            let p = p.trim();
            match p {
                "i" => Ok(GaussInt::I),
                "-i" => Ok(-GaussInt::I),
                _ => p.parse::<i64>().map(GaussInt::real).map_err(|_| anyhow!("bad character `{p}`")),
            }
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(RepVector::new(chars))
}

fn group(out: &mut Outputs, rep: Option<&str>) -> Result<(), Failure> {
    let t = builtin_table();
    print!("{}", t.render());
    let mut products = Vec::new();
    for name in ["Λ₁", "Λ₂", "Λ₃"] {
        let p = product(&t.irrep(name).map_err(anyhow::Error::from)?.characters, &spinor_rep()).map_err(anyhow::Error::from)?;
        let d = t.decompose(&p).map_err(anyhow::Error::from)?;
        println!("{name} ⊗ D½ = {d}");
        products.push(json!({ "irrep": name, "characters": p, "decomposition": d.to_string() }));
    }
    let custom = match rep {
        Some(s) => {
            let r = parse_rep(s).map_err(Failure::Config)?;
            let d = t.decompose(&r).map_err(|e| Failure::Check(e.to_string()))?;
            println!("{r} = {d}");
            Some(json!({ "characters": r, "decomposition": d.to_string() }))
        }
        None => None,
    };
    out.write_json(
        "group.json",
        &json!({
            "table": t,
            "row_orthogonality_error": t.row_orthogonality_error(),
            "column_orthogonality_error": t.column_orthogonality_error(),
            "sum_dim_squared": t.sum_dim_squared(),
            "spinor_products": products,
            "decomposition": custom,
        }),
    )?;
    Ok(())
}

fn valleys(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let family = cfg.valley_family();
    let (ml, mt) = cfg.masses(family);
    let growth = cfg.growth_axis()?;
    let set = ValleySet::family(family, ml, mt, growth).map_err(anyhow::Error::from)?;
    let r = split_valleys(&set, cfg.f64("valleys.well_width_nm")).map_err(anyhow::Error::from)?;
    #[derive(Serialize)]
    struct Doc<'a> {
        family: &'a str,
        growth: &'a str,
        ml: f64,
        mt: f64,
        report: &'a lpoint_core::valleys::SplittingReport,
    }
    let doc = Doc { family: cfg.str("valleys.family"), growth: cfg.str("valleys.growth"), ml, mt, report: &r };
    print!("{}", r.render());
    println!("{}", serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?);
    out.write_json("valleys.json", &doc)?;
    Ok(())
}

fn dots(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let spec = cfg.lattice()?;
    let rounding = cfg.rounding();
    let mut rows = Vec::new();
    let mut csv = String::from("side_nm,unit_cells,levels,electrons,cell_ratio\n");
    println!("side (nm)  unit cells/levels/electrons");
    for side in cfg.floats("dots.sides_nm") {
        let d = count_dot_levels(DotGeometry::cube(side).map_err(|e| Failure::Config(e.into()))?, &spec, rounding);
        println!("{side:>9}  {}/{}/{}", d.unit_cells, d.levels, d.electrons);
        csv.push_str(&format!("{side},{},{},{},{:.6}\n", d.unit_cells, d.levels, d.electrons, d.cell_ratio));
        rows.push(json!({ "side_nm": side, "levels": d }));
    }
    out.write("dots.csv", csv.as_bytes())?;
    out.write_json("dots.json", &json!({ "a_nm": spec.a_nm, "rounding": cfg.str("dots.rounding"), "dots": rows }))?;
    Ok(())
}

fn inject(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let spec = cfg.protocol_spec()?;
    let p = StochasticParams { p_l: cfg.p_l()?, rng_seed: cfg.u64("inject.seed") };
    let max_retries = cfg.usize("inject.max_retries");
    let r = run_protocol(&spec, &p, max_retries).map_err(anyhow::Error::from)?;
    out.write_with("inject_events.csv", |w| r.log.write_csv(w))?;
    let mc = monte_carlo(&spec, p.p_l, p.rng_seed, cfg.usize("inject.trials"), max_retries).map_err(anyhow::Error::from)?;
    out.write_with("inject_retries.csv", |w| mc.write_csv(w))?;
    out.write_json("inject.json", &json!({ "spec": spec, "params": p, "run": r, "monte_carlo": mc }))?;
    println!(
        "seeded run: success {} after {} retries, transfers per pass {:?}",
        r.success, r.retries, r.current_counts
    );
    println!(
        "{} trials at p_L = {}: success rate {:.4} (expected {:.4}), mean retries {:.4} (expected {:.4})",
        mc.trials, mc.p_l, mc.success_rate, mc.expected_success_rate, mc.mean_retries, mc.expected_mean_retries
    );
    Ok(())
}

fn poisson(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let bc = cfg.boundary()?;
    let window = cfg.f64("poisson.window_nm");
    let mut metrics = Vec::new();
    for v in cfg.variants() {
        let g = build_geometry(v, cfg.f64("poisson.w_nm"), cfg.f64("poisson.h_nm"), &cfg.extents())
            .map_err(|e| Failure::Config(e.into()))?;
        let f: FieldGrid = solve_poisson(&g, &bc, None, cfg.f64("poisson.tol"), cfg.usize("poisson.max_iter"))
            .with_context(|| format!("solving the {v} fin"))?;
        let c = contour_quantize(&f, cfg.usize("poisson.levels")).map_err(|e| Failure::Config(e.into()))?;
        out.write_with(&format!("potential_{v}.csv"), |w| f.write_csv(w))?;
        out.write_with(&format!("contour_{v}.pgm"), |w| c.write_pgm(w))?;
        out.write_with(&format!("contour_{v}.csv"), |w| c.write_csv(w, f.h_nm))?;
        out.write(&format!("geometry_{v}.txt"), g.render().as_bytes())?;
        let top = fin_gradient_metric(&f, &g, Some(window)).map_err(anyhow::Error::from)?;
        let whole = fin_gradient_metric(&f, &g, None).map_err(anyhow::Error::from)?;
        println!(
            "{v}: {}x{} grid, {} sweeps, residual {:.2e}; |dφ/dz| top {window} nm max {:.5} mean {:.5} V/nm",
            g.nz, g.ny, f.iterations, f.residual, top.max, top.mean
        );
        metrics.push(json!({
            "variant": v,
            "nz": g.nz,
            "ny": g.ny,
            "iterations": f.iterations,
            "residual": f.residual,
            "phi_min": f.min(),
            "phi_max": f.max(),
            "gate_width_nm": g.gate_width_over_fin_nm(),
            "gradient_top_window": top,
            "gradient_whole_fin": whole,
        }));
    }
    out.write_json("poisson_metrics.json", &json!({ "window_nm": window, "boundary": bc, "fins": metrics }))?;
    Ok(())
}

fn verify(cfg: &RunConfig, out: &mut Outputs) -> Result<(), Failure> {
    let report = verify_all(cfg)?;
    let text = report.render();
    print!("{text}");
    out.write("verify_report.txt", text.as_bytes())?;
    out.write_json("verify_report.json", &report)?;
    for (name, bytes) in artifacts(cfg).map_err(|e| anyhow!(e))? {
        out.write(&name, &bytes)?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
        Err(Failure::Check(format!("criteria failed: {}", failed.join(", "))))
    }
}
