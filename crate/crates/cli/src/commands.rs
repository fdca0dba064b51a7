//! Command implementations.

use adas_core::assimilation::{
    self, calibrate_c_ctilde, estimate_decay_rate, run_twin, sweep_with_series,
};
use adas_core::config::RunConfig;
use adas_core::diagnostics::{self, BoundThresholds, DiagnosticsRecord};
use adas_core::observation::estimate_gamma0;
use adas_core::report;
use adas_core::snapshot;
use adas_core::stepper::Integrator;
use adas_core::{Grid, State, VectorField};
use anyhow::{bail, Context, Result};
use std::path::{Path, PathBuf};

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(path)
        .with_context(|| format!("loading config {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seeds.reference_init = s;
        cfg.seeds.assimilated_init = s.wrapping_add(1);
        cfg.seeds.gamma0 = s.wrapping_add(2);
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn header(cfg: &RunConfig, kind: &str) -> Vec<String> {
    report::reproducibility_header(kind, &cfg.canonical_toml(), &cfg.content_hash())
}

/// Single reference simulation; spin-up is discarded, then diagnostics are
/// recorded every `sample_every` steps.
pub fn cmd_run(config: &Path, out: Option<&Path>, seed: Option<u64>, quiet: bool) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let dir = out_dir(&cfg, out)?;
    let grid = cfg.to_grid()?;
    let model = cfg.to_model()?;
    let forcing_field = cfg.to_forcing()?.realize(grid)?;
    let g_num = diagnostics::grashof(&forcing_field, model.nu)?;
    let thresholds = BoundThresholds::new(model.nu, grid.lambda1(), g_num, model.alpha, 1.0, 1.0);

    let v0 = cfg.to_ref_init()?;
    let init = match &v0 {
        adas_core::assimilation::InitialData::Zero => VectorField::zeros(grid),
        adas_core::assimilation::InitialData::Random {
            energy,
            max_shell,
            seed,
        } => VectorField::random_divergence_free(grid, *energy, *max_shell, *seed)?,
        adas_core::assimilation::InitialData::Snapshot(path) => {
            snapshot::read_snapshot(path)?.into_vector_field(grid)?
        }
    };
    let dt = cfg.time.dt_time;
    let mut integ = Integrator::new(model, forcing_field, State::new(init, 0.0), dt)?;
    let spin_steps = (cfg.time.spin_up_time / dt).round() as usize;
    for _ in 0..spin_steps {
        integ.step()?;
    }

    let steps = (cfg.time.t_end_time / dt).round() as usize;
    let mut records = Vec::new();
    let record = |integ: &Integrator, records: &mut Vec<DiagnosticsRecord>| {
        let v = &integ.state().v;
        let energy = v.l2_norm_sq();
        let enstrophy = v.h1_seminorm_sq();
        let (h1_hom, h2_hom) = diagnostics::homogeneous_norms(v, integ.model().alpha);
        records.push(DiagnosticsRecord {
            t: integ.state().t,
            energy,
            enstrophy,
            h1_hom,
            h2_hom,
            grashof: g_num,
            prop2_flag: thresholds.prop2_violated(energy),
            prop3_flag: thresholds.prop3_violated(enstrophy),
        });
    };
    record(&integ, &mut records);
    for step in 0..steps {
        integ.step()?;
        if (step + 1) % cfg.time.sample_every == 0 || step + 1 == steps {
            record(&integ, &mut records);
        }
    }

    let csv = dir.join("diagnostics.csv");
    report::write_diag_csv(&csv, &header(&cfg, "run"), &records)?;
    let snap = dir.join("final_state.adas");
    snapshot::write_vector_snapshot(&snap, &integ.state().v)?;
    snapshot::write_sidecar(&dir.join("final_state.meta"), &sidecar_entries(&cfg, integ.state().t))?;
    if !quiet {
        println!("run: {} samples, G = {g_num}", records.len());
        println!("diagnostics: {}", csv.display());
        let viol = records.iter().filter(|r| r.prop2_flag).count();
        println!("energy-ball violations (prop2_flag): {viol}");
    }
    Ok(())
}

fn sidecar_entries(cfg: &RunConfig, t: f64) -> Vec<(String, String)> {
    vec![
        ("model".into(), cfg.model.preset.clone()),
        ("nu_viscosity".into(), cfg.model.nu_viscosity.to_string()),
        ("alpha_length".into(), cfg.model.alpha_length.to_string()),
        ("t".into(), t.to_string()),
        ("dt_time".into(), cfg.time.dt_time.to_string()),
        (
            "seed_reference_init".into(),
            cfg.seeds.reference_init.to_string(),
        ),
        (
            "seed_assimilated_init".into(),
            cfg.seeds.assimilated_init.to_string(),
        ),
        ("config_sha256".into(), cfg.content_hash()),
    ]
}

pub fn cmd_twin(config: &Path, out: Option<&Path>, seed: Option<u64>, quiet: bool) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let dir = out_dir(&cfg, out)?;
    let twin = cfg.to_twin_config()?;
    let run = run_twin(&twin)?;

    let sync_csv = dir.join("sync.csv");
    report::write_sync_csv(&sync_csv, &header(&cfg, "twin"), &run.series)?;
    report::write_diag_csv(
        &dir.join("diagnostics.csv"),
        &header(&cfg, "twin-diagnostics"),
        &run.diagnostics,
    )?;
    snapshot::write_vector_snapshot(&dir.join("final_reference.adas"), &run.final_ref.v)?;
    snapshot::write_sidecar(
        &dir.join("final_reference.meta"),
        &sidecar_entries(&cfg, run.final_ref.t),
    )?;
    snapshot::write_vector_snapshot(&dir.join("final_assimilated.adas"), &run.final_da.v)?;
    snapshot::write_sidecar(
        &dir.join("final_assimilated.meta"),
        &sidecar_entries(&cfg, run.final_da.t),
    )?;

    if !quiet {
        let s = &run.series;
        let last = s.len() - 1;
        println!("twin: G = {:.4}, measured c0 = {:.4}", run.grashof, run.measured_c0);
        if let Some(c) = run.conditions {
            println!(
                "conditions: mu >= {:.4e} -> {}; mu*c0^2*h^2 <= nu -> {}",
                c.mu_threshold,
                if c.cond1 { "pass" } else { "FAIL" },
                if c.cond2 { "pass" } else { "FAIL" },
            );
        }
        println!(
            "err_L2: {:.4e} -> {:.4e} ({:.2} orders)",
            s.err_l2[0],
            s.err_l2[last],
            (s.err_l2[0] / s.err_l2[last]).log10()
        );
        let t0 = s.times[0];
        let t1 = s.times[last];
        match estimate_decay_rate(s, (t0 + 0.5 * (t1 - t0), t1)) {
            Ok(rate) => println!("decay rate (err^2, last half): {rate:.4}"),
            Err(e) => println!("decay rate: {e}"),
        }
        println!("series: {}", sync_csv.display());
    }
    Ok(())
}

pub fn cmd_sweep(config: &Path, out: Option<&Path>, seed: Option<u64>, quiet: bool) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let dir = out_dir(&cfg, out)?;
    let sweep_cfg = cfg
        .sweep
        .clone()
        .context("sweep needs a [sweep] section in the config")?;
    let twin = cfg.to_twin_config()?;
    let results = sweep_with_series(
        &twin,
        &sweep_cfg.mu_values,
        &sweep_cfg.h_values,
        cfg.output.emit_cell_series,
    )?;

    let cells: Vec<_> = results.iter().map(|(c, _)| c.clone()).collect();
    let csv = dir.join("sweep.csv");
    report::write_sweep_csv(&csv, &header(&cfg, "sweep"), &cells)?;
    for (i, (cell, series)) in results.iter().enumerate() {
        if let Some(series) = series {
            let name = format!("cell_{:03}_mu_{}_h_{}.csv", i, cell.mu, cell.h);
            report::write_sync_csv(&dir.join(name), &header(&cfg, "sweep-cell"), series)?;
        }
    }
    if !quiet {
        println!("sweep: {} cells -> {}", cells.len(), csv.display());
        for cell in &cells {
            println!(
                "  mu = {:>10}, h = {:>8}: {}",
                cell.mu,
                cell.h,
                cell.verdict.name()
            );
        }
    }
    Ok(())
}

pub fn cmd_calibrate(
    config: &Path,
    sweep_csv: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    quiet: bool,
) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let dir = out_dir(&cfg, out)?;
    let grid = cfg.to_grid()?;
    let model = cfg.to_model()?;
    let forcing = cfg.to_forcing()?.realize(grid)?;
    let g_num = diagnostics::grashof(&forcing, model.nu)?;
    let c0 = resolve_c0(&cfg, &grid)?;

    let cells = report::read_sweep_csv(sweep_csv)?;
    let (fitted, mu_threshold) =
        calibrate_c_ctilde(&cells, model.nu, model.alpha, grid.lambda1(), g_num, c0)?;

    let report_text = format!(
        "fitted_c_ctilde = {fitted}\nimplied_mu_threshold = {mu_threshold}\nG = {g_num}\nc0 = {c0}\ncells = {}\n",
        cells.len()
    );
    let path = dir.join("calibration.txt");
    std::fs::write(&path, &report_text)?;
    if !quiet {
        print!("{report_text}");
        println!("report: {}", path.display());
    }
    Ok(())
}

fn resolve_c0(cfg: &RunConfig, grid: &Grid) -> Result<f64> {
    let assim = cfg
        .assimilation
        .as_ref()
        .context("this command needs an [assimilation] section")?;
    if assim.c0_gamma > 0.0 {
        return Ok(assim.c0_gamma);
    }
    let obs = cfg.to_observer()?;
    Ok(estimate_gamma0(
        &obs,
        grid,
        assim.gamma0_ensemble,
        cfg.seeds.gamma0,
    )?)
}

pub fn cmd_check(config: &Path, seed: Option<u64>, _quiet: bool) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let assim = cfg
        .assimilation
        .as_ref()
        .context("check needs an [assimilation] section")?;
    let grid = cfg.to_grid()?;
    let model = cfg.to_model()?;
    let forcing = cfg.to_forcing()?.realize(grid)?;
    let g_num = diagnostics::grashof(&forcing, model.nu)?;
    let c0 = resolve_c0(&cfg, &grid)?;

    if model.alpha <= 0.0 {
        bail!("condition (1) needs alpha > 0");
    }
    let rep = assimilation::check_conditions(
        model.nu,
        model.alpha,
        grid.lambda1(),
        g_num,
        assim.mu_relaxation,
        assim.h_length,
        c0,
        assim.c_ctilde,
        1.0,
    )?;
    println!("G                 = {g_num}");
    println!("measured/static c0 = {c0}");
    println!("mu threshold      = {} (condition 1: mu >= threshold)", rep.mu_threshold);
    println!("max admissible h  = {} (condition 2: mu*c0^2*h^2 <= nu)", rep.h_sq_max.sqrt());
    println!("condition 1       = {}", if rep.cond1 { "pass" } else { "FAIL" });
    println!("condition 2       = {}", if rep.cond2 { "pass" } else { "FAIL" });
    Ok(())
}

pub fn cmd_inspect_snapshot(path: &Path) -> Result<()> {
    let data = snapshot::read_snapshot(path)?;
    println!("file      = {}", path.display());
    println!("magic     = ADAS v{}", snapshot::VERSION);
    println!("n         = {}", data.n);
    println!("L         = {}", data.length);
    println!("components = {}", data.components.len());
    println!("layout    = physical f64 samples, x-fastest");
    let cell = (data.length / data.n as f64).powi(3);
    for (i, comp) in data.components.iter().enumerate() {
        let norm_sq: f64 = comp.iter().map(|v| v * v).sum::<f64>() * cell;
        let min = comp.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = comp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "component {i}: l2_norm = {:.6e}, min = {:.4e}, max = {:.4e}",
            norm_sq.sqrt(),
            min,
            max
        );
    }
    if data.components.len() == 3 {
        let grid = Grid::new(data.n, data.length)?;
        let field = data.into_vector_field(grid)?;
        println!("divergence residual = {:.3e}", field.divergence_residual());
    }
    Ok(())
}
