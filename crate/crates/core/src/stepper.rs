//! Time integration: exact integrating factor for the (Fourier-diagonal)
//! dissipation operator combined with explicit Adams-Bashforth-2 for the
//! nonlinear, forcing and feedback terms.
//!
//! With E = e^{−a(k)·dt} the update reads
//!
//! ```text
//! v̂^{n+1} = E·v̂^n + dt·[ (3/2)·E·N̂^n − (1/2)·E²·N̂^{n−1} ]
//! ```
//!
//! where N collects everything except the dissipation term. The first step,
//! which has no history, is taken as four integrating-factor Euler substeps.
//! The state is re-projected onto divergence-free fields every step.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::model::{self, ModelSpec, State};
use crate::ops;
use ndarray::Array3;

/// Number of Euler substeps used to start the multistep scheme.
const STARTUP_SUBSTEPS: usize = 4;

/// How often the advective CFL estimate is re-checked (in steps).
const CFL_CHECK_INTERVAL: usize = 16;

/// One simulation instance: owns the state and the AB2 history.
/// Single-writer; distinct instances may run on separate threads.
pub struct Integrator {
    model: ModelSpec,
    forcing: VectorField,
    dt: f64,
    state: State,
    prev_explicit: Option<VectorField>,
    ifac: Array3<f64>,
    step_count: usize,
    cfl_warned: bool,
}

impl Integrator {
    pub fn new(model: ModelSpec, forcing: VectorField, initial: State, dt: f64) -> Result<Self> {
        model.validate()?;
        initial.v.grid().ensure_same(forcing.grid())?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let grid = *initial.v.grid();
        let ifac = integrating_factor(&model, &grid, dt);
        let mut state = initial;
        state.v = ops::leray_project(&state.v);
        state.v.zero_mean();
        Ok(Self {
            model,
            forcing,
            dt,
            state,
            prev_explicit: None,
            ifac,
            step_count: 0,
            cfl_warned: false,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn forcing(&self) -> &VectorField {
        &self.forcing
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// Advance one step without feedback terms.
    pub fn step(&mut self) -> Result<()> {
        self.step_with_extra(None)
    }

    /// Advance one step; `extra` is added to the explicit right-hand side
    /// at the current time level (used for the nudging feedback).
    pub fn step_with_extra(&mut self, extra: Option<&VectorField>) -> Result<()> {
        let explicit = model::explicit_rhs(&self.model, &self.state.v, &self.forcing, extra)?;

        match self.prev_explicit.take() {
            None => {
                // Startup: integrating-factor Euler substeps with the
                // feedback frozen over the step. The rhs at the pre-step
                // state becomes the AB2 history for the next step.
                let h = self.dt / STARTUP_SUBSTEPS as f64;
                let grid = *self.state.v.grid();
                let eh = integrating_factor(&self.model, &grid, h);
                let mut v = self.state.v.clone();
                let mut expl = explicit.clone();
                for sub in 0..STARTUP_SUBSTEPS {
                    if sub > 0 {
                        expl = model::explicit_rhs(&self.model, &v, &self.forcing, extra)?;
                    }
                    for c in 0..3 {
                        let vh = v.comp_hat_mut(c);
                        for ((vv, nn), e) in
                            vh.iter_mut().zip(expl.comp_hat(c).iter()).zip(eh.iter())
                        {
                            *vv = (*vv + *nn * h) * *e;
                        }
                    }
                }
                self.state.v = v;
                self.prev_explicit = Some(explicit);
            }
            Some(prev) => {
                let dt = self.dt;
                for c in 0..3 {
                    let vh = self.state.v.comp_hat_mut(c);
                    for (((vv, nn), pp), e) in vh
                        .iter_mut()
                        .zip(explicit.comp_hat(c).iter())
                        .zip(prev.comp_hat(c).iter())
                        .zip(self.ifac.iter())
                    {
                        *vv = *e * (*vv + *nn * (1.5 * dt)) - *e * *e * *pp * (0.5 * dt);
                    }
                }
                self.prev_explicit = Some(explicit);
            }
        }

        self.state.v = ops::leray_project(&self.state.v);
        self.state.v.zero_mean();
        self.state.t += self.dt;
        self.step_count += 1;

        if !self.state.v.is_finite() {
            return Err(Error::NanDetected {
                t: self.state.t,
                step: self.step_count,
            });
        }
        if self.step_count % CFL_CHECK_INTERVAL == 1 && !self.cfl_warned && self.model.advection {
            let limit = model::cfl_limit(&self.model, &self.state)?;
            if self.dt > limit {
                log::warn!(
                    "dt = {} exceeds the advective CFL limit {:.3e} at t = {:.3}",
                    self.dt,
                    limit,
                    self.state.t
                );
                self.cfl_warned = true;
            }
        }
        Ok(())
    }
}

fn integrating_factor(model: &ModelSpec, grid: &Grid, dt: f64) -> Array3<f64> {
    let (nz, ny, nxs) = grid.spec_shape();
    let (kx2, ky2, kz2) = grid.k2_tables();
    let mut out = Array3::zeros((nz, ny, nxs));
    let s = out.as_slice_mut().expect("standard layout");
    let mut idx = 0;
    for iz in 0..nz {
        for iy in 0..ny {
            let kzy = kz2[iz] + ky2[iy];
            for ikx in 0..nxs {
                let a = model.dissipation_symbol(kzy + kx2[ikx]);
                s[idx] = (-a * dt).exp();
                idx += 1;
            }
        }
    }
    out
}
