//! Scalar functionals of the flow: energy, enstrophy, the dimensionally
//! homogeneous H¹/H² norms, the Grashof number, and the attractor-bound
//! monitors.
//!
//! The homogeneous inner products are
//!
//! ```text
//! ((u,v))_{H¹} = λ₁  [ (u,v) +  α²(A½u, A½v) ]
//! ((u,v))_{H²} = λ₁² [ (u,v) + 2α²(A½u, A½v) + α⁴(Au, Av) ]
//! ```
//!
//! so that ‖u‖_{H²} = λ₁‖v‖ exactly when v = u − α²Δu (per mode the H²
//! symbol is λ₁²(1 + α²|k|²)², the square of the elliptic factor). The
//! bound monitors are advisory: the constants entering them are not sharp,
//! so violations are reported rather than fatal.

use crate::error::{Error, Result};
use crate::field::VectorField;

/// Per-sample diagnostic scalars; flags are true when a bound is violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// ‖v‖²_{L²}
    pub energy: f64,
    /// ‖A^{1/2}v‖²_{L²} = ‖∇v‖²
    pub enstrophy: f64,
    pub h1_hom: f64,
    pub h2_hom: f64,
    pub grashof: f64,
    pub prop2_flag: bool,
    pub prop3_flag: bool,
}

/// Grashof number G = ‖f‖_{L²} / (ν² λ₁^{3/4}).
pub fn grashof_from_norm(f_l2: f64, nu: f64, lambda1: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    Ok(f_l2 / (nu * nu * lambda1.powf(0.75)))
}

/// Grashof number of a realized forcing field.
pub fn grashof(f: &VectorField, nu: f64) -> Result<f64> {
    grashof_from_norm(f.l2_norm(), nu, f.grid().lambda1())
}

/// Dimensionally homogeneous norms (H¹_hom, H²_hom) of a vector field.
pub fn homogeneous_norms(u: &VectorField, alpha: f64) -> (f64, f64) {
    let lambda1 = u.grid().lambda1();
    let a2 = alpha * alpha;
    let l2 = u.l2_norm_sq();
    let h1 = u.h1_seminorm_sq();
    let h2 = laplacian_norm_sq(u);
    let h1_hom = (lambda1 * (l2 + a2 * h1)).sqrt();
    let h2_hom = (lambda1 * lambda1 * (l2 + 2.0 * a2 * h1 + a2 * a2 * h2)).sqrt();
    (h1_hom, h2_hom)
}

/// ‖Au‖² = ‖Δu‖² via Parseval.
pub fn laplacian_norm_sq(u: &VectorField) -> f64 {
    let grid = *u.grid();
    let (nz, ny, nxs) = grid.spec_shape();
    let half = grid.n() / 2;
    let mut total = 0.0;
    for c in 0..3 {
        let hat = u.comp_hat(c);
        for iz in 0..nz {
            for iy in 0..ny {
                for ikx in 0..nxs {
                    let w = if ikx == 0 || ikx == half { 1.0 } else { 2.0 };
                    let k2 = grid.k_sq(iz, iy, ikx);
                    total += w * k2 * k2 * hat[[iz, iy, ikx]].norm_sqr();
                }
            }
        }
    }
    grid.volume() * total
}

/// Attractor-bound thresholds for a run at (ν, λ₁, G, α, c̃).
#[derive(Debug, Clone, Copy)]
pub struct BoundThresholds {
    /// Absorbing-ball energy bound: ‖v‖² ≤ 2ν²λ₁^{−1/2}G².
    pub energy_ball: f64,
    /// Attractor enstrophy bound: ‖A½v‖² ≤ c̃ν²G⁴/(α⁴λ₁^{3/2}).
    pub enstrophy_ball: f64,
    /// Windowed integral: ∫_t^{t+τ}‖∇v‖² ds ≤ 2(1+τνλ₁^{1/2})νG².
    pub window_integral: f64,
    pub window: f64,
    suppressed: bool,
}

impl BoundThresholds {
    pub fn new(nu: f64, lambda1: f64, g: f64, alpha: f64, ctilde: f64, window: f64) -> Self {
        // G = 0 (unforced flow) makes every bound trivial; monitors are
        // suppressed rather than flagging everything.
        let suppressed = g == 0.0;
        let energy_ball = 2.0 * nu * nu * g * g / lambda1.sqrt();
        let enstrophy_ball = if alpha > 0.0 {
            ctilde * nu * nu * g.powi(4) / (alpha.powi(4) * lambda1.powf(1.5))
        } else {
            f64::INFINITY
        };
        let window_integral = 2.0 * (1.0 + window * nu * lambda1.sqrt()) * nu * g * g;
        Self {
            energy_ball,
            enstrophy_ball,
            window_integral,
            window,
            suppressed,
        }
    }

    pub fn prop2_violated(&self, energy: f64) -> bool {
        !self.suppressed && energy > self.energy_ball
    }

    pub fn prop3_violated(&self, enstrophy: f64) -> bool {
        !self.suppressed && enstrophy > self.enstrophy_ball
    }
}

/// Post-hoc scan of a recorded stream: returns the sample times violating
/// each bound. `records` must be time-ordered. The windowed enstrophy
/// integral is evaluated by the trapezoid rule on every window of length τ
/// that fits in the stream.
pub struct MonitorOutcome {
    pub prop2_violations: Vec<f64>,
    pub prop3_violations: Vec<f64>,
    pub window_violations: Vec<f64>,
    /// First time the energy ball was entered, if ever (spin-up proxy).
    pub ball_entry: Option<f64>,
}

pub fn monitor_bounds(records: &[DiagnosticsRecord], thresholds: &BoundThresholds) -> MonitorOutcome {
    let mut out = MonitorOutcome {
        prop2_violations: Vec::new(),
        prop3_violations: Vec::new(),
        window_violations: Vec::new(),
        ball_entry: None,
    };
    for r in records {
        if thresholds.prop2_violated(r.energy) {
            out.prop2_violations.push(r.t);
        } else if out.ball_entry.is_none() {
            out.ball_entry = Some(r.t);
        }
        if thresholds.prop3_violated(r.enstrophy) {
            out.prop3_violations.push(r.t);
        }
    }
    // Sliding windows, advanced one sample at a time.
    let tau = thresholds.window;
    for start in 0..records.len() {
        let t0 = records[start].t;
        let t1 = t0 + tau;
        if records.last().map_or(true, |r| r.t < t1) {
            break;
        }
        let mut integral = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for r in &records[start..] {
            let t = r.t.min(t1);
            if let Some((tp, ep)) = prev {
                integral += 0.5 * (ep + r.enstrophy) * (t - tp);
            }
            prev = Some((t, r.enstrophy));
            if r.t >= t1 {
                break;
            }
        }
        if !thresholds.suppressed && integral > thresholds.window_integral {
            out.window_violations.push(t0);
        }
    }
    out
}
