//! The nudged (data-assimilated) twin system, the synchronization-condition
//! checker, twin-experiment runner, decay-rate fit and (μ, h) sweeps.
//!
//! The assimilated copy evolves
//!
//! ```text
//! ∂t v* + Av* + (Mv*·∇)(Nv*) + χ∇(Mv*)ᵀ·(Nv*) + ∇p* =
//!         f + μ Σ_{observed i} [I_h(v_i) − I_h(v*_i)] e_i
//! ```
//!
//! from arbitrary initial data, receiving only the coarse observations
//! I_h(v_i) of the masked components of the reference solution. The
//! sufficient conditions checked are
//!
//! ```text
//! (1)  μ ≥ 2·c·c̃·ν·G⁴ / (α⁴·λ₁)        (lower bound on the feedback gain)
//! (2)  μ·c₀²·h² ≤ ν                    (no overdamping at resolution h)
//! ```
//!
//! with c·c̃ an abstract constant product (calibratable from sweep data) and
//! c₀ the measured interpolant constant.

use crate::diagnostics::{self, BoundThresholds, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::model::{self, Forcing, ModelSpec, State};
use crate::observation::{self, Observer};
use crate::ops;
use crate::snapshot;
use crate::stepper::Integrator;
use rayon::prelude::*;
use std::path::PathBuf;

/// Relative floor for the synchronization error: below
/// `FLOOR_FACTOR`·‖v_ref‖ roundoff dominates and decay is declared complete.
pub const FLOOR_FACTOR: f64 = 1e-9;

/// Orders of magnitude of error decay that classify a sweep cell as
/// converged when the floor is not reached.
pub const CONVERGED_DECADES: f64 = 3.0;

/// Growth factor over the initial error that classifies divergence.
pub const DIVERGED_FACTOR: f64 = 10.0;

/// Initial data selector for the reference and assimilated states.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    Random {
        energy: f64,
        max_shell: usize,
        seed: u64,
    },
    Snapshot(PathBuf),
}

impl InitialData {
    fn realize(&self, grid: Grid) -> Result<VectorField> {
        match self {
            InitialData::Zero => Ok(VectorField::zeros(grid)),
            InitialData::Random {
                energy,
                max_shell,
                seed,
            } => VectorField::random_divergence_free(grid, *energy, *max_shell, *seed),
            InitialData::Snapshot(path) => {
                let data = snapshot::read_snapshot(path)?;
                let raw = data.into_vector_field(grid)?;
                let mut f = ops::dealias_vec(&ops::leray_project(&raw));
                f.zero_mean();
                Ok(f)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            InitialData::Zero => "zero",
            InitialData::Random { .. } => "random",
            InitialData::Snapshot(_) => "snapshot",
        }
    }
}

/// Everything a twin experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinConfig {
    pub grid: Grid,
    pub model: ModelSpec,
    pub observer: Observer,
    /// Relaxation (nudging) parameter μ ≥ 0; μ = 0 is the control run.
    pub mu: f64,
    pub dt: f64,
    /// Assimilation horizon, after spin-up.
    pub t_end: f64,
    /// Reference spin-up time before assimilation starts.
    pub spin_up: f64,
    pub forcing: Forcing,
    pub ref_init: InitialData,
    pub v_star_init: InitialData,
    /// Record the sync series every this many steps.
    pub sample_every: usize,
    /// Interpolant constant c₀; measured via `estimate_gamma0` when absent.
    pub c0: Option<f64>,
    /// Calibrated abstract constant product c·c̃ for condition (1).
    pub c_ctilde: f64,
    /// Enstrophy-ball constant for the bound monitors.
    pub ctilde_monitor: f64,
    /// Window τ for the enstrophy-integral monitor.
    pub monitor_window: f64,
    pub gamma0_ensemble: usize,
    pub gamma0_seed: u64,
}

impl TwinConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.observer.validate(&self.grid)?;
        if self.mu < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "relaxation parameter mu must be nonnegative, got {}",
                self.mu
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.t_end < self.dt {
            return Err(Error::InvalidParameter(
                "t_end must cover at least one step".into(),
            ));
        }
        if self.spin_up < 0.0 {
            return Err(Error::InvalidParameter("spin_up must be nonnegative".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Verdicts and thresholds of the two sufficient conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// Threshold 2cc̃νG⁴/(α⁴λ₁): condition (1) requires μ ≥ this.
    pub mu_threshold: f64,
    /// Max admissible h²: condition (2) requires h² ≤ ν/(μc₀²).
    pub h_sq_max: f64,
    pub cond1: bool,
    pub cond2: bool,
}

/// Evaluate the two conditions. All inputs must be positive.
#[allow(clippy::too_many_arguments)]
pub fn check_conditions(
    nu: f64,
    alpha: f64,
    lambda1: f64,
    g: f64,
    mu: f64,
    h: f64,
    c0: f64,
    c: f64,
    ctilde: f64,
) -> Result<ConditionReport> {
    for (name, v) in [
        ("nu", nu),
        ("alpha", alpha),
        ("lambda1", lambda1),
        ("G", g),
        ("mu", mu),
        ("h", h),
        ("c0", c0),
        ("c", c),
        ("ctilde", ctilde),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "check_conditions: {name} must be positive and finite, got {v}"
            )));
        }
    }
    let mu_threshold = 2.0 * c * ctilde * nu * g.powi(4) / (alpha.powi(4) * lambda1);
    let h_sq_max = nu / (mu * c0 * c0);
    Ok(ConditionReport {
        mu_threshold,
        h_sq_max,
        cond1: mu >= mu_threshold,
        cond2: mu * c0 * c0 * h * h <= nu,
    })
}

/// Nudged right-hand side: rhs(model, v*) + μ Σ_{masked i}[I_h(v_i) − I_h(v*_i)]e_i,
/// projected divergence-free. `observed_ref` must be the masked observation
/// of the reference produced by the same observer.
pub fn nudged_rhs(
    model: &ModelSpec,
    state_da: &State,
    observed_ref: &VectorField,
    mu: f64,
    observer: &Observer,
    forcing: &VectorField,
) -> Result<VectorField> {
    let feedback = nudging_feedback(&state_da.v, observed_ref, mu, observer)?;
    let base = model::rhs(model, state_da, forcing)?;
    match feedback {
        Some(fb) => {
            let mut out = base.add(&ops::leray_project(&fb))?;
            out.zero_mean();
            Ok(out)
        }
        None => Ok(base),
    }
}

/// μ·[I_h(v) − I_h(v*)] on the masked components; None when μ = 0.
fn nudging_feedback(
    v_da: &VectorField,
    observed_ref: &VectorField,
    mu: f64,
    observer: &Observer,
) -> Result<Option<VectorField>> {
    if mu == 0.0 {
        return Ok(None);
    }
    v_da.grid().ensure_same(observed_ref.grid())?;
    let observed_da = observer.observe_vector_masked(v_da)?;
    Ok(Some(observed_ref.sub(&observed_da)?.scale(mu)))
}

/// The recorded synchronization history of a twin run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyncSeries {
    pub times: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub err_h1: Vec<f64>,
    pub err_comp: [Vec<f64>; 3],
    pub energy_ref: Vec<f64>,
    pub energy_da: Vec<f64>,
    pub cond1: bool,
    pub cond2: bool,
}

impl SyncSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Full output of a twin experiment.
#[derive(Debug, Clone)]
pub struct TwinRun {
    pub series: SyncSeries,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub conditions: Option<ConditionReport>,
    pub measured_c0: f64,
    pub grashof: f64,
    pub final_ref: State,
    pub final_da: State,
    /// err_L2 below this is at the numerical floor.
    pub floor: f64,
}

/// Run a twin experiment: evolve the reference and the nudged copy in
/// lockstep with shared dt, observations taken from the reference every
/// step. Deterministic given the config seeds.
pub fn run_twin(config: &TwinConfig) -> Result<TwinRun> {
    config.validate()?;
    let grid = config.grid;
    let forcing = config.forcing.realize(grid)?;
    let g_num = diagnostics::grashof(&forcing, config.model.nu)?;

    let c0 = match config.c0 {
        Some(v) => v,
        None => observation::estimate_gamma0(
            &config.observer,
            &grid,
            config.gamma0_ensemble,
            config.gamma0_seed,
        )?,
    };
    let conditions = if config.mu > 0.0 && g_num > 0.0 && config.model.alpha > 0.0 && c0 > 0.0 {
        Some(check_conditions(
            config.model.nu,
            config.model.alpha,
            grid.lambda1(),
            g_num,
            config.mu,
            config.observer.h,
            c0,
            config.c_ctilde,
            1.0,
        )?)
    } else {
        None
    };

    if config.mu * config.dt > 1.0 {
        log::warn!(
            "mu*dt = {} > 1: the explicit nudging term may destabilize the step",
            config.mu * config.dt
        );
    }

    let thresholds = BoundThresholds::new(
        config.model.nu,
        grid.lambda1(),
        g_num,
        config.model.alpha,
        config.ctilde_monitor,
        config.monitor_window,
    );

    // Reference spin-up.
    let v_ref0 = config.ref_init.realize(grid)?;
    let mut reference = Integrator::new(config.model, forcing.clone(), State::new(v_ref0, 0.0), config.dt)?;
    let spin_steps = (config.spin_up / config.dt).round() as usize;
    for _ in 0..spin_steps {
        reference.step()?;
    }

    // Assimilated copy starts from arbitrary data at the end of spin-up.
    let v_da0 = config.v_star_init.realize(grid)?;
    let t0 = reference.state().t;
    let mut assimilated = Integrator::new(config.model, forcing.clone(), State::new(v_da0, t0), config.dt)?;

    let steps = (config.t_end / config.dt).round() as usize;
    let mut series = SyncSeries {
        cond1: conditions.map_or(false, |c| c.cond1),
        cond2: conditions.map_or(false, |c| c.cond2),
        ..SyncSeries::default()
    };
    let mut diags = Vec::new();
    let mut floor = f64::INFINITY;

    let record =
        |series: &mut SyncSeries, diags: &mut Vec<DiagnosticsRecord>, reference: &Integrator, assimilated: &Integrator| {
            let vr = &reference.state().v;
            let vd = &assimilated.state().v;
            let diff = vr.sub(vd).expect("twin grids match");
            series.times.push(reference.state().t);
            series.err_l2.push(diff.l2_norm());
            series.err_h1.push(diff.h1_seminorm_sq().sqrt());
            for c in 0..3 {
                series.err_comp[c].push(diff.component(c).l2_norm());
            }
            let energy = vr.l2_norm_sq();
            let enstrophy = vr.h1_seminorm_sq();
            series.energy_ref.push(energy);
            series.energy_da.push(vd.l2_norm_sq());
            let (h1_hom, h2_hom) = diagnostics::homogeneous_norms(vr, config.model.alpha);
            diags.push(DiagnosticsRecord {
                t: reference.state().t,
                energy,
                enstrophy,
                h1_hom,
                h2_hom,
                grashof: g_num,
                prop2_flag: thresholds.prop2_violated(energy),
                prop3_flag: thresholds.prop3_violated(enstrophy),
            });
        };

    record(&mut series, &mut diags, &reference, &assimilated);
    for step in 0..steps {
        let feedback = nudging_feedback(
            &assimilated.state().v,
            &config
                .observer
                .observe_vector_masked(&reference.state().v)?,
            config.mu,
            &config.observer,
        )?;
        // the two systems are independent within a step: run them in parallel
        let (r_ref, r_da) = rayon::join(
            || reference.step(),
            || assimilated.step_with_extra(feedback.as_ref()),
        );
        r_ref?;
        r_da?;
        if (step + 1) % config.sample_every == 0 || step + 1 == steps {
            record(&mut series, &mut diags, &reference, &assimilated);
        }
        floor = floor.min(FLOOR_FACTOR * reference.state().v.l2_norm());
    }

    Ok(TwinRun {
        series,
        diagnostics: diags,
        conditions,
        measured_c0: c0,
        grashof: g_num,
        final_ref: reference.state().clone(),
        final_da: assimilated.state().clone(),
        floor,
    })
}

/// Least-squares fit of the decay rate r in err² ≈ C·e^{−rt} over the given
/// time window. Needs at least 10 samples with strictly positive error.
pub fn estimate_decay_rate(series: &SyncSeries, window: (f64, f64)) -> Result<f64> {
    let mut pts = Vec::new();
    for (i, &t) in series.times.iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let e = series.err_l2[i];
        if e <= 0.0 {
            return Err(Error::FloorReached);
        }
        pts.push((t, 2.0 * e.ln()));
    }
    if pts.len() < 10 {
        return Err(Error::TooFewSamples {
            need: 10,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let sum_t: f64 = pts.iter().map(|p| p.0).sum();
    let sum_y: f64 = pts.iter().map(|p| p.1).sum();
    let sum_tt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sum_ty: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sum_tt - sum_t * sum_t;
    if denom == 0.0 {
        return Err(Error::TooFewSamples { need: 10, found: 1 });
    }
    let slope = (n * sum_ty - sum_t * sum_y) / denom;
    Ok(-slope)
}

/// Verdict of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellVerdict {
    /// Error reached the numerical floor.
    Floor,
    /// Error fell by at least `CONVERGED_DECADES` orders.
    Converged,
    /// Neither converged nor diverged within the horizon.
    NotConverged,
    /// Error grew by more than `DIVERGED_FACTOR` or the run failed.
    Diverged,
}

impl CellVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            CellVerdict::Floor => "floor",
            CellVerdict::Converged => "converged",
            CellVerdict::NotConverged => "not_converged",
            CellVerdict::Diverged => "diverged",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, CellVerdict::Floor | CellVerdict::Converged)
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub mu: f64,
    pub h: f64,
    pub verdict: CellVerdict,
    /// Fitted decay rate over the last half of the horizon, when available.
    pub rate: Option<f64>,
    pub err_initial: f64,
    pub err_final: f64,
    pub cond1: bool,
    pub cond2: bool,
    /// Failure description for cells that errored (verdict Diverged).
    pub failure: Option<String>,
}

/// Classify a finished series.
pub fn classify(series: &SyncSeries, floor: f64) -> CellVerdict {
    let first = series.err_l2.first().copied().unwrap_or(0.0);
    let last = series.err_l2.last().copied().unwrap_or(0.0);
    let min = series.err_l2.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= floor {
        CellVerdict::Floor
    } else if first > 0.0 && last <= first * 10f64.powf(-CONVERGED_DECADES) {
        CellVerdict::Converged
    } else if first > 0.0 && last >= first * DIVERGED_FACTOR {
        CellVerdict::Diverged
    } else {
        CellVerdict::NotConverged
    }
}

/// Run a (μ, h) sweep: one twin run per cell, cells independent and
/// parallel. Per-cell failures are recorded, not propagated.
pub fn sweep(base: &TwinConfig, mus: &[f64], hs: &[f64]) -> Result<Vec<SweepCell>> {
    Ok(sweep_with_series(base, mus, hs, false)?
        .into_iter()
        .map(|(cell, _)| cell)
        .collect())
}

/// As [`sweep`], optionally keeping each cell's synchronization series.
pub fn sweep_with_series(
    base: &TwinConfig,
    mus: &[f64],
    hs: &[f64],
    keep_series: bool,
) -> Result<Vec<(SweepCell, Option<SyncSeries>)>> {
    if mus.is_empty() || hs.is_empty() {
        return Err(Error::InvalidParameter("sweep grid must be nonempty".into()));
    }
    let cells: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|&mu| hs.iter().map(move |&h| (mu, h)))
        .collect();
    let results: Vec<(SweepCell, Option<SyncSeries>)> = cells
        .par_iter()
        .map(|&(mu, h)| {
            let mut cfg = base.clone();
            cfg.mu = mu;
            cfg.observer.h = h;
            match run_twin(&cfg) {
                Ok(run) => {
                    let verdict = classify(&run.series, run.floor);
                    let horizon = run.series.times.last().copied().unwrap_or(0.0);
                    let t0 = run.series.times.first().copied().unwrap_or(0.0);
                    let window = (t0 + 0.5 * (horizon - t0), horizon);
                    let rate = estimate_decay_rate(&run.series, window).ok();
                    let cell = SweepCell {
                        mu,
                        h,
                        verdict,
                        rate,
                        err_initial: run.series.err_l2.first().copied().unwrap_or(0.0),
                        err_final: run.series.err_l2.last().copied().unwrap_or(0.0),
                        cond1: run.series.cond1,
                        cond2: run.series.cond2,
                        failure: None,
                    };
                    (cell, keep_series.then_some(run.series))
                }
                Err(e) => (
                    SweepCell {
                        mu,
                        h,
                        verdict: CellVerdict::Diverged,
                        rate: None,
                        err_initial: f64::NAN,
                        err_final: f64::NAN,
                        cond1: false,
                        cond2: false,
                        failure: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();
    Ok(results)
}

/// Fit the smallest constant product c·c̃ whose certified region
/// {μ ≥ 2cc̃νG⁴/(α⁴λ₁)} ∩ {μc₀²h² ≤ ν} contains only cells that actually
/// converged. Returns the fitted product and the implied μ threshold.
pub fn calibrate_c_ctilde(
    cells: &[SweepCell],
    nu: f64,
    alpha: f64,
    lambda1: f64,
    g: f64,
    c0: f64,
) -> Result<(f64, f64)> {
    if cells.is_empty() {
        return Err(Error::InvalidParameter("no sweep cells to calibrate from".into()));
    }
    let scale = alpha.powi(4) * lambda1 / (2.0 * nu * g.powi(4));
    let mut blocking: f64 = 0.0;
    let mut smallest_converged = f64::INFINITY;
    for cell in cells {
        let h_ok = cell.mu * c0 * c0 * cell.h * cell.h <= nu;
        if !h_ok || cell.mu <= 0.0 {
            continue;
        }
        let p = cell.mu * scale;
        if cell.verdict.is_converged() {
            smallest_converged = smallest_converged.min(p);
        } else {
            blocking = blocking.max(p);
        }
    }
    if smallest_converged.is_infinite() {
        return Err(Error::InvalidParameter(
            "no converged cell satisfies the h-condition; cannot calibrate".into(),
        ));
    }
    // Just above the largest non-converged cell, or down at the smallest
    // converged cell when nothing blocks.
    let fitted = if blocking > 0.0 {
        blocking * (1.0 + 1e-9)
    } else {
        smallest_converged
    };
    let mu_threshold = fitted / scale;
    Ok((fitted, mu_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_grid() -> Grid {
        Grid::new(16, 2.0 * PI).unwrap()
    }

    fn base_config() -> TwinConfig {
        let grid = small_grid();
        TwinConfig {
            grid,
            model: ModelSpec::leray_alpha(0.5, 0.25),
            observer: Observer::fourier_lowmode(0.25, [true, true, false]),
            mu: 4.0,
            dt: 0.01,
            t_end: 1.0,
            spin_up: 0.2,
            forcing: Forcing::SteadyLowmode {
                amplitude: 0.8,
                shell: 1,
            },
            ref_init: InitialData::Random {
                energy: 0.5,
                max_shell: 3,
                seed: 11,
            },
            v_star_init: InitialData::Zero,
            sample_every: 5,
            c0: None,
            c_ctilde: 1e-6,
            ctilde_monitor: 1.0,
            monitor_window: 0.5,
            gamma0_ensemble: 10,
            gamma0_seed: 1,
        }
    }

    #[test]
    fn condition_boundaries_are_exact() {
        let (nu, alpha, lambda1, g, h, c0, c, ctilde): (f64, f64, f64, f64, f64, f64, f64, f64) =
            (0.1, 0.25, 1.0, 10.0, 0.1, 0.9, 1.0, 1.0);
        let mu_threshold = 2.0 * c * ctilde * nu * g.powi(4) / (alpha.powi(4) * lambda1);
        let rep = check_conditions(nu, alpha, lambda1, g, mu_threshold, h, c0, c, ctilde).unwrap();
        assert!(rep.cond1, "condition 1 must pass at equality");

        let h_boundary = (nu / (mu_threshold * c0 * c0)).sqrt();
        let rep2 =
            check_conditions(nu, alpha, lambda1, g, mu_threshold, h_boundary, c0, c, ctilde)
                .unwrap();
        // h² computed from the boundary reproduces μc₀²h² = ν up to roundoff
        assert!(rep2.cond2 || mu_threshold * c0 * c0 * h_boundary * h_boundary <= nu * (1.0 + 1e-12));
    }

    #[test]
    fn mu_threshold_scales_as_g_fourth() {
        let rep1 = check_conditions(0.1, 0.25, 1.0, 5.0, 1.0, 0.1, 0.9, 1.0, 1.0).unwrap();
        let rep2 = check_conditions(0.1, 0.25, 1.0, 10.0, 1.0, 0.1, 0.9, 1.0, 1.0).unwrap();
        let ratio = rep2.mu_threshold / rep1.mu_threshold;
        assert!(
            (ratio - 16.0).abs() < 1e-12,
            "G⁴ scaling broken: ratio {ratio}"
        );
    }

    #[test]
    fn nonpositive_inputs_are_rejected() {
        assert!(check_conditions(0.0, 0.25, 1.0, 1.0, 1.0, 0.1, 0.9, 1.0, 1.0).is_err());
        assert!(check_conditions(0.1, 0.25, 1.0, 1.0, -1.0, 0.1, 0.9, 1.0, 1.0).is_err());
    }

    #[test]
    fn nudged_rhs_vanishing_feedback() {
        let grid = small_grid();
        let model = ModelSpec::leray_alpha(0.1, 0.25);
        let forcing = Forcing::SteadyLowmode {
            amplitude: 0.5,
            shell: 1,
        }
        .realize(grid)
        .unwrap();
        let v = VectorField::random_divergence_free(grid, 1.0, 4, 3).unwrap();
        let obs = Observer::fourier_lowmode(0.3, [true, true, false]);
        let observed = obs.observe_vector_masked(&v).unwrap();
        let state = State::new(v.clone(), 0.0);

        // synchronized: feedback exactly zero
        let nr = nudged_rhs(&model, &state, &observed, 7.0, &obs, &forcing).unwrap();
        let plain = model::rhs(&model, &state, &forcing).unwrap();
        let defect = nr.sub(&plain).unwrap().max_abs_coeff();
        assert!(defect < 1e-13 * plain.max_abs_coeff().max(1.0));

        // mu = 0: bitwise equal to the unnudged rhs
        let other = VectorField::random_divergence_free(grid, 0.7, 4, 9).unwrap();
        let observed_other = obs.observe_vector_masked(&other).unwrap();
        let nr0 = nudged_rhs(&model, &state, &observed_other, 0.0, &obs, &forcing).unwrap();
        assert_eq!(nr0, plain);
    }

    #[test]
    fn mask_isolation() {
        // mask (1,1,0): perturbing only component 3 of the reference leaves
        // the nudging feedback bit-identical.
        let grid = small_grid();
        let obs = Observer::fourier_lowmode(0.3, [true, true, false]);
        let v_ref = VectorField::random_divergence_free(grid, 1.0, 4, 5).unwrap();
        let v_da = VectorField::random_divergence_free(grid, 0.5, 4, 6).unwrap();

        let fb1 = nudging_feedback(
            &v_da,
            &obs.observe_vector_masked(&v_ref).unwrap(),
            3.0,
            &obs,
        )
        .unwrap()
        .unwrap();
        let mut v_ref2 = v_ref.clone();
        v_ref2.add_mode_pair(2, [2, 1, 0], num_complex::Complex64::new(0.4, 0.1));
        let fb2 = nudging_feedback(
            &v_da,
            &obs.observe_vector_masked(&v_ref2).unwrap(),
            3.0,
            &obs,
        )
        .unwrap()
        .unwrap();
        assert_eq!(fb1, fb2);
    }

    #[test]
    fn synchronized_twin_stays_synchronized() {
        let mut cfg = base_config();
        cfg.spin_up = 0.1;
        cfg.t_end = 0.5;
        // identical initial data for both systems
        cfg.v_star_init = InitialData::Random {
            energy: 0.5,
            max_shell: 3,
            seed: 11,
        };
        cfg.ref_init = InitialData::Random {
            energy: 0.5,
            max_shell: 3,
            seed: 11,
        };
        cfg.spin_up = 0.0;
        let run = run_twin(&cfg).unwrap();
        let max_err = run.series.err_l2.iter().copied().fold(0.0, f64::max);
        let scale = run.series.energy_ref[0].sqrt();
        assert!(
            max_err <= 1e-10 * scale.max(1.0),
            "synchronized error grew to {max_err}"
        );
    }

    #[test]
    fn decay_rate_fit_recovers_synthetic_rate() {
        let mut series = SyncSeries::default();
        for i in 0..50 {
            let t = i as f64 * 0.1;
            series.times.push(t);
            // err² = e^{−3t} → err = e^{−1.5t}
            series.err_l2.push((-1.5 * t).exp());
            series.err_h1.push(0.0);
            for c in 0..3 {
                series.err_comp[c].push(0.0);
            }
            series.energy_ref.push(1.0);
            series.energy_da.push(1.0);
        }
        let rate = estimate_decay_rate(&series, (0.0, 5.0)).unwrap();
        assert!((rate - 3.0).abs() < 1e-6, "fitted rate {rate}");

        // constant series → rate 0
        let mut flat = series.clone();
        for e in flat.err_l2.iter_mut() {
            *e = 0.5;
        }
        let rate0 = estimate_decay_rate(&flat, (0.0, 5.0)).unwrap();
        assert!(rate0.abs() < 1e-12);
    }

    #[test]
    fn decay_rate_fit_error_paths() {
        let mut series = SyncSeries::default();
        for i in 0..5 {
            series.times.push(i as f64);
            series.err_l2.push(1.0);
        }
        assert!(matches!(
            estimate_decay_rate(&series, (0.0, 10.0)),
            Err(Error::TooFewSamples { .. })
        ));
        let mut zeroed = SyncSeries::default();
        for i in 0..20 {
            zeroed.times.push(i as f64 * 0.1);
            zeroed.err_l2.push(0.0);
        }
        assert!(matches!(
            estimate_decay_rate(&zeroed, (0.0, 10.0)),
            Err(Error::FloorReached)
        ));
    }

    #[test]
    fn twin_run_is_deterministic() {
        let cfg = base_config();
        let a = run_twin(&cfg).unwrap();
        let b = run_twin(&cfg).unwrap();
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn sweep_cell_matches_standalone_run() {
        let mut cfg = base_config();
        cfg.t_end = 0.6;
        let standalone = run_twin(&cfg).unwrap();
        let standalone_verdict = classify(&standalone.series, standalone.floor);
        let cells = sweep(&cfg, &[cfg.mu], &[cfg.observer.h]).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].verdict, standalone_verdict);
        assert_eq!(
            cells[0].err_final,
            *standalone.series.err_l2.last().unwrap()
        );
    }

    #[test]
    fn sweep_records_cell_failures_without_aborting() {
        // An absurd relaxation parameter blows up the explicit feedback;
        // the cell must be recorded as failed while the others complete.
        let mut cfg = base_config();
        cfg.t_end = 0.5;
        cfg.spin_up = 0.0;
        cfg.v_star_init = InitialData::Zero;
        let cells = sweep(&cfg, &[1.0, 1.0e7], &[0.25]).unwrap();
        assert_eq!(cells.len(), 2);
        let sane = &cells[0];
        assert!(sane.failure.is_none());
        let insane = &cells[1];
        assert_eq!(insane.verdict, CellVerdict::Diverged);
        assert!(
            insane.failure.as_deref().unwrap_or("").contains("NaN"),
            "expected a NaN failure, got {:?}",
            insane.failure
        );
    }

    #[test]
    fn calibration_reproduces_synthetic_boundary() {
        // Build a synthetic sweep from a known constant product.
        let (nu, alpha, lambda1, g, c0): (f64, f64, f64, f64, f64) = (0.2, 0.25, 1.0, 10.0, 0.95);
        let p_true = 3e-6;
        let mu_star = 2.0 * p_true * nu * g.powi(4) / (alpha.powi(4) * lambda1);
        let mus: Vec<f64> = (1..=10).map(|i| mu_star * i as f64 / 5.0).collect();
        let hs = [0.05, 0.1];
        let mut cells = Vec::new();
        for &mu in &mus {
            for &h in &hs {
                let h_ok = mu * c0 * c0 * h * h <= nu;
                let verdict = if mu >= mu_star && h_ok {
                    CellVerdict::Converged
                } else {
                    CellVerdict::NotConverged
                };
                cells.push(SweepCell {
                    mu,
                    h,
                    verdict,
                    rate: None,
                    err_initial: 1.0,
                    err_final: 0.1,
                    cond1: false,
                    cond2: h_ok,
                    failure: None,
                });
            }
        }
        let (fitted, mu_threshold) =
            calibrate_c_ctilde(&cells, nu, alpha, lambda1, g, c0).unwrap();
        // the fitted boundary lands within one μ-grid cell of the truth
        let grid_step = mu_star / 5.0;
        assert!(
            (mu_threshold - mu_star).abs() <= grid_step + 1e-12,
            "fitted μ* = {mu_threshold}, true = {mu_star}"
        );
        assert!(fitted > 0.0);
    }
}
