//! Run configuration: structured plain text (TOML) with explicit units in
//! key names. Parsing is strict — unknown keys are errors — and semantic
//! validation reports every violation at once, naming the offending field.
//!
//! A minimal twin configuration:
//!
//! ```toml
//! [grid]
//! n = 32
//! box_length = 6.283185307179586
//!
//! [model]
//! preset = "leray_alpha"
//! nu_viscosity = 0.2
//! alpha_length = 0.25
//!
//! [forcing]
//! kind = "steady_lowmode"
//! amplitude_force = 0.4
//! shell = 1
//!
//! [time]
//! dt_time = 0.01
//! t_end_time = 40.0
//!
//! [assimilation]
//! mu_relaxation = 10.0
//! observer_variant = "fourier_lowmode"
//! h_length = 0.1
//! mask = [true, true, false]
//! ```
//!
//! Every omitted key takes its default and is echoed back by
//! [`RunConfig::canonical_toml`], which is also what the CSV reproducibility
//! headers embed.

use crate::assimilation::{InitialData, TwinConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{Forcing, ModelSpec, Preset};
use crate::observation::{Observer, ObserverVariant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub box_length: f64,
    /// Rational fraction as "num/den", e.g. "2/3".
    pub dealias_fraction: String,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 32,
            box_length: 2.0 * std::f64::consts::PI,
            dealias_fraction: "2/3".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub preset: String,
    pub nu_viscosity: f64,
    pub alpha_length: f64,
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub advection: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            preset: "leray_alpha".to_string(),
            nu_viscosity: 0.2,
            alpha_length: 0.25,
            theta: 1.0,
            theta1: 1.0,
            theta2: 1.0,
            advection: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSection {
    pub kind: String,
    pub amplitude_force: f64,
    pub shell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_path: Option<PathBuf>,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            kind: "steady_lowmode".to_string(),
            amplitude_force: 0.4,
            shell: 1,
            snapshot_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt_time: f64,
    pub t_end_time: f64,
    pub spin_up_time: f64,
    pub sample_every: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            dt_time: 0.01,
            t_end_time: 10.0,
            spin_up_time: 0.0,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: String,
    pub energy: f64,
    pub max_shell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_path: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: "random".to_string(),
            energy: 1.0,
            max_shell: 4,
            snapshot_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedsSection {
    pub reference_init: u64,
    pub assimilated_init: u64,
    pub gamma0: u64,
}

impl Default for SeedsSection {
    fn default() -> Self {
        Self {
            reference_init: 1,
            assimilated_init: 2,
            gamma0: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub emit_cell_series: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
            emit_cell_series: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssimilationSection {
    pub mu_relaxation: f64,
    pub observer_variant: String,
    pub h_length: f64,
    pub mask: [bool; 3],
    pub v_star_kind: String,
    pub v_star_energy: f64,
    pub v_star_max_shell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_star_snapshot_path: Option<PathBuf>,
    /// Interpolant constant c₀; 0 means "measure it from an ensemble".
    pub c0_gamma: f64,
    /// Calibrated abstract constant product for condition (1).
    pub c_ctilde: f64,
    pub ctilde_monitor: f64,
    pub monitor_window_time: f64,
    pub gamma0_ensemble: usize,
}

impl Default for AssimilationSection {
    fn default() -> Self {
        Self {
            mu_relaxation: 10.0,
            observer_variant: "fourier_lowmode".to_string(),
            h_length: 0.1,
            mask: [true, true, false],
            v_star_kind: "zero".to_string(),
            v_star_energy: 1.0,
            v_star_max_shell: 4,
            v_star_snapshot_path: None,
            c0_gamma: 0.0,
            c_ctilde: 1.0,
            ctilde_monitor: 1.0,
            monitor_window_time: 1.0,
            gamma0_ensemble: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub mu_values: Vec<f64>,
    pub h_values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            mu_values: vec![0.0, 1.0, 4.0, 16.0],
            h_values: vec![0.1, 0.2, 0.4],
        }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub forcing: ForcingSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub seeds: SeedsSection,
    pub output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assimilation: Option<AssimilationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn parse_fraction(s: &str) -> std::result::Result<(u32, u32), String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: u32 = a.trim().parse().map_err(|_| format!("bad numerator '{a}'"))?;
        let den: u32 = b.trim().parse().map_err(|_| format!("bad denominator '{b}'"))?;
        Ok((num, den))
    } else {
        let num: u32 = s.parse().map_err(|_| format!("not a fraction: '{s}'"))?;
        Ok((num, 1))
    }
}

impl RunConfig {
    /// Parse and fully validate a config file; validation failures list
    /// every problem, not just the first.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Collect every semantic violation.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();

        if self.grid.n < 8 || self.grid.n % 2 != 0 {
            errs.push(format!("grid.n: must be even and >= 8, got {}", self.grid.n));
        }
        if !(self.grid.box_length > 0.0) {
            errs.push(format!(
                "grid.box_length: must be positive, got {}",
                self.grid.box_length
            ));
        }
        match parse_fraction(&self.grid.dealias_fraction) {
            Ok((num, den)) => {
                if num == 0 || den == 0 || num > den {
                    errs.push(format!(
                        "grid.dealias_fraction: must be a rational in (0,1], got {}",
                        self.grid.dealias_fraction
                    ));
                }
            }
            Err(e) => errs.push(format!("grid.dealias_fraction: {e}")),
        }

        if Preset::parse(&self.model.preset).is_err() {
            errs.push(format!("model.preset: unknown preset '{}'", self.model.preset));
        }
        if !(self.model.nu_viscosity > 0.0) {
            errs.push(format!(
                "model.nu_viscosity: must be positive, got {}",
                self.model.nu_viscosity
            ));
        }
        if self.model.alpha_length < 0.0 {
            errs.push(format!(
                "model.alpha_length: must be nonnegative, got {}",
                self.model.alpha_length
            ));
        }
        if self.model.preset == "nsv" && self.model.alpha_length == 0.0 {
            errs.push("model.alpha_length: NSV requires alpha > 0".to_string());
        }

        match self.forcing.kind.as_str() {
            "none" => {}
            "steady_lowmode" | "taylor_green" => {
                if self.forcing.amplitude_force < 0.0 {
                    errs.push(format!(
                        "forcing.amplitude_force: must be nonnegative, got {}",
                        self.forcing.amplitude_force
                    ));
                }
                if self.forcing.shell == 0 {
                    errs.push("forcing.shell: must be >= 1".to_string());
                }
            }
            "custom_snapshot" => {
                if self.forcing.snapshot_path.is_none() {
                    errs.push("forcing.snapshot_path: required for kind custom_snapshot".into());
                }
            }
            other => errs.push(format!("forcing.kind: unknown kind '{other}'")),
        }

        if !(self.time.dt_time > 0.0) {
            errs.push(format!("time.dt_time: must be positive, got {}", self.time.dt_time));
        }
        if !(self.time.t_end_time > 0.0) {
            errs.push(format!(
                "time.t_end_time: must be positive, got {}",
                self.time.t_end_time
            ));
        }
        if self.time.spin_up_time < 0.0 {
            errs.push(format!(
                "time.spin_up_time: must be nonnegative, got {}",
                self.time.spin_up_time
            ));
        }
        if self.time.sample_every == 0 {
            errs.push("time.sample_every: must be >= 1".to_string());
        }

        match self.initial.kind.as_str() {
            "zero" => {}
            "random" => {
                if !(self.initial.energy > 0.0) {
                    errs.push(format!(
                        "initial.energy: must be positive, got {}",
                        self.initial.energy
                    ));
                }
                if self.initial.max_shell == 0 {
                    errs.push("initial.max_shell: must be >= 1".to_string());
                }
            }
            "snapshot" => {
                if self.initial.snapshot_path.is_none() {
                    errs.push("initial.snapshot_path: required for kind snapshot".into());
                }
            }
            other => errs.push(format!("initial.kind: unknown kind '{other}'")),
        }

        if let Some(assim) = &self.assimilation {
            if assim.mu_relaxation < 0.0 {
                errs.push(format!(
                    "assimilation.mu_relaxation: must be nonnegative, got {}",
                    assim.mu_relaxation
                ));
            }
            if ObserverVariant::parse(&assim.observer_variant).is_err() {
                errs.push(format!(
                    "assimilation.observer_variant: unknown variant '{}'",
                    assim.observer_variant
                ));
            }
            if !(assim.h_length > 0.0) || assim.h_length >= self.grid.box_length {
                errs.push(format!(
                    "assimilation.h_length: must satisfy 0 < h < box_length, got {}",
                    assim.h_length
                ));
            }
            if !assim.mask.iter().any(|&m| m) {
                errs.push("assimilation.mask: at least one component must be observed".into());
            }
            match assim.v_star_kind.as_str() {
                "zero" | "random" => {}
                "snapshot" => {
                    if assim.v_star_snapshot_path.is_none() {
                        errs.push(
                            "assimilation.v_star_snapshot_path: required for kind snapshot".into(),
                        );
                    }
                }
                other => errs.push(format!(
                    "assimilation.v_star_kind: unknown kind '{other}'"
                )),
            }
            if assim.c0_gamma < 0.0 {
                errs.push(format!(
                    "assimilation.c0_gamma: must be nonnegative (0 = measure), got {}",
                    assim.c0_gamma
                ));
            }
            if !(assim.c_ctilde > 0.0) {
                errs.push(format!(
                    "assimilation.c_ctilde: must be positive, got {}",
                    assim.c_ctilde
                ));
            }
            if assim.gamma0_ensemble == 0 {
                errs.push("assimilation.gamma0_ensemble: must be >= 1".to_string());
            }
        }

        if let Some(sweep) = &self.sweep {
            if sweep.mu_values.is_empty() {
                errs.push("sweep.mu_values: must be nonempty".to_string());
            }
            if sweep.h_values.is_empty() {
                errs.push("sweep.h_values: must be nonempty".to_string());
            }
            if sweep.mu_values.iter().any(|&m| m < 0.0) {
                errs.push("sweep.mu_values: entries must be nonnegative".to_string());
            }
            if sweep.h_values.iter().any(|&h| h <= 0.0) {
                errs.push("sweep.h_values: entries must be positive".to_string());
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigValidation(errs))
        }
    }

    /// Canonical serialized form with every default materialized: parsing
    /// it back reproduces the struct exactly.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form plus any referenced input files;
    /// embedded in output headers for reproducibility.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_toml().as_bytes());
        for path in [
            self.forcing.snapshot_path.as_ref(),
            self.initial.snapshot_path.as_ref(),
            self.assimilation
                .as_ref()
                .and_then(|a| a.v_star_snapshot_path.as_ref()),
        ]
        .into_iter()
        .flatten()
        {
            if let Ok(bytes) = std::fs::read(path) {
                hasher.update(&bytes);
            }
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_grid(&self) -> Result<Grid> {
        let (num, den) = parse_fraction(&self.grid.dealias_fraction)
            .map_err(|e| Error::InvalidParameter(format!("grid.dealias_fraction: {e}")))?;
        Grid::with_dealias(self.grid.n, self.grid.box_length, num, den)
    }

    pub fn to_model(&self) -> Result<ModelSpec> {
        let nu = self.model.nu_viscosity;
        let alpha = self.model.alpha_length;
        let mut m = match Preset::parse(&self.model.preset)? {
            Preset::Nse => ModelSpec::nse(nu),
            Preset::LerayAlpha => ModelSpec::leray_alpha(nu, alpha),
            Preset::MlAlpha => ModelSpec::ml_alpha(nu, alpha),
            Preset::Sbm => ModelSpec::sbm(nu, alpha),
            Preset::Nsv => ModelSpec::nsv(nu, alpha),
            Preset::NsAlpha => ModelSpec::ns_alpha(nu, alpha),
            Preset::NsAlphaLike => {
                ModelSpec::ns_alpha_like(nu, alpha, self.model.theta, self.model.theta2)
            }
            Preset::Custom => {
                return Err(Error::InvalidParameter(
                    "custom models are constructed through the library API".into(),
                ))
            }
        };
        m.theta1 = self.model.theta1;
        if !self.model.advection {
            m = m.without_advection();
        }
        m.validate()?;
        Ok(m)
    }

    pub fn to_forcing(&self) -> Result<Forcing> {
        Ok(match self.forcing.kind.as_str() {
            "none" => Forcing::None,
            "steady_lowmode" => Forcing::SteadyLowmode {
                amplitude: self.forcing.amplitude_force,
                shell: self.forcing.shell,
            },
            "taylor_green" => Forcing::TaylorGreen {
                amplitude: self.forcing.amplitude_force,
                shell: self.forcing.shell,
            },
            "custom_snapshot" => Forcing::CustomSnapshot {
                amplitude: self.forcing.amplitude_force,
                path: self
                    .forcing
                    .snapshot_path
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("forcing.snapshot_path missing".into()))?,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "forcing.kind: unknown kind '{other}'"
                )))
            }
        })
    }

    pub fn to_ref_init(&self) -> Result<InitialData> {
        Ok(match self.initial.kind.as_str() {
            "zero" => InitialData::Zero,
            "random" => InitialData::Random {
                energy: self.initial.energy,
                max_shell: self.initial.max_shell,
                seed: self.seeds.reference_init,
            },
            "snapshot" => InitialData::Snapshot(
                self.initial
                    .snapshot_path
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("initial.snapshot_path missing".into()))?,
            ),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "initial.kind: unknown kind '{other}'"
                )))
            }
        })
    }

    pub fn to_observer(&self) -> Result<Observer> {
        let assim = self.assimilation.as_ref().ok_or_else(|| {
            Error::InvalidParameter("this command needs an [assimilation] section".into())
        })?;
        Ok(Observer {
            variant: ObserverVariant::parse(&assim.observer_variant)?,
            h: assim.h_length,
            mask: assim.mask,
        })
    }

    /// Assemble the twin-experiment configuration.
    pub fn to_twin_config(&self) -> Result<TwinConfig> {
        let assim = self.assimilation.as_ref().ok_or_else(|| {
            Error::InvalidParameter("twin experiments need an [assimilation] section".into())
        })?;
        let grid = self.to_grid()?;
        let v_star_init = match assim.v_star_kind.as_str() {
            "zero" => InitialData::Zero,
            "random" => InitialData::Random {
                energy: assim.v_star_energy,
                max_shell: assim.v_star_max_shell,
                seed: self.seeds.assimilated_init,
            },
            "snapshot" => InitialData::Snapshot(
                assim
                    .v_star_snapshot_path
                    .clone()
                    .ok_or_else(|| {
                        Error::InvalidParameter("assimilation.v_star_snapshot_path missing".into())
                    })?,
            ),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "assimilation.v_star_kind: unknown kind '{other}'"
                )))
            }
        };
        let cfg = TwinConfig {
            grid,
            model: self.to_model()?,
            observer: self.to_observer()?,
            mu: assim.mu_relaxation,
            dt: self.time.dt_time,
            t_end: self.time.t_end_time,
            spin_up: self.time.spin_up_time,
            forcing: self.to_forcing()?,
            ref_init: self.to_ref_init()?,
            v_star_init,
            sample_every: self.time.sample_every,
            c0: if assim.c0_gamma > 0.0 {
                Some(assim.c0_gamma)
            } else {
                None
            },
            c_ctilde: assim.c_ctilde,
            ctilde_monitor: assim.ctilde_monitor,
            monitor_window: assim.monitor_window_time,
            gamma0_ensemble: assim.gamma0_ensemble,
            gamma0_seed: self.seeds.gamma0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
n = 16

[model]
preset = "leray_alpha"
nu_viscosity = 0.5

[assimilation]
mu_relaxation = 4.0
h_length = 0.3
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.grid.n, 16);
        assert_eq!(cfg.grid.dealias_fraction, "2/3");
        assert_eq!(cfg.time.sample_every, 10);
        let assim = cfg.assimilation.as_ref().unwrap();
        assert_eq!(assim.mask, [true, true, false]);
        // canonical echo contains the filled defaults
        let canon = cfg.canonical_toml();
        assert!(canon.contains("dealias_fraction = \"2/3\""));
        assert!(canon.contains("sample_every = 10"));
    }

    #[test]
    fn negative_mu_names_the_field() {
        let text = MINIMAL.replace("mu_relaxation = 4.0", "mu_relaxation = -1.0");
        let err = RunConfig::from_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("assimilation.mu_relaxation"),
            "error should name the field: {msg}"
        );
    }

    #[test]
    fn all_errors_are_collected() {
        let text = r#"
[grid]
n = 7

[model]
preset = "bogus"
nu_viscosity = -1.0

[time]
dt_time = -0.5
"#;
        let err = RunConfig::from_str(text).unwrap_err();
        let msg = err.to_string();
        for needle in ["grid.n", "model.preset", "model.nu_viscosity", "time.dt_time"] {
            assert!(msg.contains(needle), "missing '{needle}' in: {msg}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[grid2]\nfoo = 1\n");
        assert!(matches!(
            RunConfig::from_str(&text),
            Err(Error::ConfigParse(_))
        ));
        let text = MINIMAL.replace("n = 16", "n = 16\nnn = 3");
        assert!(matches!(
            RunConfig::from_str(&text),
            Err(Error::ConfigParse(_))
        ));
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        let cfg = RunConfig::from_str(MINIMAL).unwrap();
        let canon = cfg.canonical_toml();
        let cfg2 = RunConfig::from_str(&canon).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(canon, cfg2.canonical_toml());
    }

    #[test]
    fn twin_config_assembles() {
        let cfg = RunConfig::from_str(MINIMAL).unwrap();
        let twin = cfg.to_twin_config().unwrap();
        assert_eq!(twin.mu, 4.0);
        assert_eq!(twin.observer.h, 0.3);
        assert_eq!(twin.grid.n(), 16);
    }

    #[test]
    fn content_hash_is_stable_and_sensitive() {
        let a = RunConfig::from_str(MINIMAL).unwrap();
        let b = RunConfig::from_str(MINIMAL).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        let c = RunConfig::from_str(&MINIMAL.replace("4.0", "5.0")).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
