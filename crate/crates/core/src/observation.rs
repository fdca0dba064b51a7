//! Coarse-mesh interpolant observables I_h and measurement of their
//! approximation constant γ₀ in ‖φ − I_h(φ)‖ ≤ γ₀ h ‖φ‖_{H¹}.
//!
//! Two type-I variants: orthogonal projection onto the Fourier modes with
//! |k| ≤ 1/h (Euclidean norm on k), and local averaging over a partition of
//! the box into cubes of side ≈ h. Both approximate the identity at rate h.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::field::VectorField;
use crate::grid::Grid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserverVariant {
    FourierLowmode,
    VolumeElements,
}

impl ObserverVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ObserverVariant::FourierLowmode => "fourier_lowmode",
            ObserverVariant::VolumeElements => "volume_elements",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fourier_lowmode" => Ok(ObserverVariant::FourierLowmode),
            "volume_elements" => Ok(ObserverVariant::VolumeElements),
            other => Err(Error::InvalidParameter(format!(
                "unknown observer variant '{other}'"
            ))),
        }
    }
}

/// An interpolant observable: variant, coarse resolution h, and the mask of
/// observed velocity components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observer {
    pub variant: ObserverVariant,
    pub h: f64,
    pub mask: [bool; 3],
}

impl Observer {
    pub fn fourier_lowmode(h: f64, mask: [bool; 3]) -> Self {
        Self {
            variant: ObserverVariant::FourierLowmode,
            h,
            mask,
        }
    }

    pub fn volume_elements(h: f64, mask: [bool; 3]) -> Self {
        Self {
            variant: ObserverVariant::VolumeElements,
            h,
            mask,
        }
    }

    /// Consistency with a grid: 0 < h < L, at least one retained mode or at
    /// least one sample per cube, and a nonempty mask.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.h > 0.0) || self.h >= grid.length() {
            return Err(Error::ObserverMismatch(format!(
                "h = {} must satisfy 0 < h < L = {}",
                self.h,
                grid.length()
            )));
        }
        if !self.mask.iter().any(|&m| m) {
            return Err(Error::ObserverMismatch(
                "mask must observe at least one component".into(),
            ));
        }
        match self.variant {
            ObserverVariant::FourierLowmode => {
                if grid.k0() > 1.0 / self.h {
                    return Err(Error::ObserverMismatch(format!(
                        "cutoff 1/h = {:.4} retains no mode (k0 = {:.4})",
                        1.0 / self.h,
                        grid.k0()
                    )));
                }
            }
            ObserverVariant::VolumeElements => {
                let cubes = self.cube_count(grid);
                if cubes > grid.n() {
                    return Err(Error::ObserverMismatch(format!(
                        "{} cubes per axis exceed the {}-point grid",
                        cubes,
                        grid.n()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of cubes per axis, ⌈L/h⌉.
    pub fn cube_count(&self, grid: &Grid) -> usize {
        (grid.length() / self.h).ceil() as usize
    }

    /// Apply I_h to a scalar field.
    pub fn observe(&self, phi: &ScalarField) -> Result<ScalarField> {
        let grid = *phi.grid();
        self.validate(&grid)?;
        match self.variant {
            ObserverVariant::FourierLowmode => Ok(self.project_lowmode(phi)),
            ObserverVariant::VolumeElements => self.average_volumes(phi),
        }
    }

    fn project_lowmode(&self, phi: &ScalarField) -> ScalarField {
        let grid = *phi.grid();
        let (nz, ny, nxs) = grid.spec_shape();
        let cutoff_sq = 1.0 / (self.h * self.h);
        let mut out = phi.clone();
        for iz in 0..nz {
            for iy in 0..ny {
                for ikx in 0..nxs {
                    if grid.k_sq(iz, iy, ikx) > cutoff_sq {
                        out.hat_mut()[[iz, iy, ikx]] = Complex64::default();
                    }
                }
            }
        }
        out
    }

    fn average_volumes(&self, phi: &ScalarField) -> Result<ScalarField> {
        let grid = *phi.grid();
        let n = grid.n();
        let cubes = self.cube_count(&grid);
        let samples = phi.to_physical()?;
        // Cube j covers samples floor(j·n/M)..floor((j+1)·n/M); when M | n
        // these are exact equal blocks.
        let bounds: Vec<usize> = (0..=cubes).map(|j| j * n / cubes).collect();
        let mut out = samples.clone();
        for cz in 0..cubes {
            for cy in 0..cubes {
                for cx in 0..cubes {
                    let (z0, z1) = (bounds[cz], bounds[cz + 1]);
                    let (y0, y1) = (bounds[cy], bounds[cy + 1]);
                    let (x0, x1) = (bounds[cx], bounds[cx + 1]);
                    let count = ((z1 - z0) * (y1 - y0) * (x1 - x0)) as f64;
                    let mut acc = 0.0;
                    for iz in z0..z1 {
                        for iy in y0..y1 {
                            for ix in x0..x1 {
                                acc += samples[[iz, iy, ix]];
                            }
                        }
                    }
                    let mean = acc / count;
                    for iz in z0..z1 {
                        for iy in y0..y1 {
                            for ix in x0..x1 {
                                out[[iz, iy, ix]] = mean;
                            }
                        }
                    }
                }
            }
        }
        // re-transform; the mean mode is zeroed by construction
        ScalarField::from_physical(grid, &out)
    }

    /// Apply I_h to the masked components of a vector field; unobserved
    /// components are never read and come back zero.
    pub fn observe_vector_masked(&self, v: &VectorField) -> Result<VectorField> {
        let grid = *v.grid();
        let mut out = VectorField::zeros(grid);
        for c in 0..3 {
            if self.mask[c] {
                let obs = self.observe(&v.component(c))?;
                *out.comp_hat_mut(c) = obs.hat().clone();
            }
        }
        Ok(out)
    }

    /// ‖φ − I_h(φ)‖ / (h·‖∇φ‖): a lower-bound sample for γ₀. The H¹ norm
    /// here is the plain gradient seminorm, matching the form the
    /// synchronization condition consumes.
    pub fn approximation_ratio(&self, phi: &ScalarField) -> Result<f64> {
        let h1_sq = phi.h1_seminorm_sq();
        if h1_sq <= 0.0 {
            return Err(Error::ZeroField(
                "approximation ratio needs a field with nonzero gradient".into(),
            ));
        }
        let defect = phi.sub(&self.observe(phi)?)?.l2_norm();
        Ok(defect / (self.h * h1_sq.sqrt()))
    }
}

/// Estimate γ₀ (= c₀) by maximizing the approximation ratio over a
/// reproducible ensemble: random smooth fields plus adversarial fields
/// concentrated just above the observer's resolution. Deterministic per
/// seed.
pub fn estimate_gamma0(
    obs: &Observer,
    grid: &Grid,
    ensemble_size: usize,
    seed: u64,
) -> Result<f64> {
    if ensemble_size == 0 {
        return Err(Error::InvalidParameter(
            "ensemble size must be at least 1".into(),
        ));
    }
    obs.validate(grid)?;
    let mut best = 0.0f64;
    let cutoff = grid.dealias_cutoff();

    // Random ensemble across the resolved shells.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ensemble_size {
        let shell = rng.gen_range(2..=cutoff);
        let field_seed = rng.gen::<u64>();
        let phi = ScalarField::random(*grid, 1.0, shell, field_seed)?;
        match obs.approximation_ratio(&phi) {
            Ok(r) => best = best.max(r),
            Err(Error::ZeroField(_)) => {}
            Err(e) => return Err(e),
        }
    }

    // Adversarial single modes at the smallest |m| above the cutoff (for
    // the Fourier variant this drives the ratio toward 1/(h·|k|)).
    let k0 = grid.k0();
    let mut candidates: Vec<[i64; 3]> = Vec::new();
    let c = cutoff as i64;
    for mx in 0..=c {
        for my in -c..=c {
            for mz in -c..=c {
                if mx == 0 && my == 0 && mz == 0 {
                    continue;
                }
                candidates.push([mx, my, mz]);
            }
        }
    }
    // Try modes in increasing |m| order; the first few above 1/h dominate.
    candidates.sort_by_key(|m| m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    let mut tried = 0;
    for m in candidates {
        let ksq = k0 * k0 * ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64);
        if obs.variant == ObserverVariant::FourierLowmode && ksq * obs.h * obs.h <= 1.0 {
            continue; // fully observed, ratio 0
        }
        let mut phi = ScalarField::zeros(*grid);
        phi.add_mode_pair(m, Complex64::new(0.5, 0.0));
        if let Ok(r) = obs.approximation_ratio(&phi) {
            best = best.max(r);
        }
        tried += 1;
        if tried >= 64 {
            break;
        }
    }
    Ok(best)
}
