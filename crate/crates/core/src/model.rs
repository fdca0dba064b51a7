//! The generalized α-family of turbulence models,
//!
//! ```text
//! ∂t v + Av + (Mv·∇)(Nv) + χ ∇(Mv)ᵀ·(Nv) + ∇p = f,   ∇·v = 0,
//! ```
//!
//! where A is the dissipation operator, M and N smooth the advecting and
//! advected velocities, and χ toggles the transposed-gradient term. Each
//! preset fixes the operator slots:
//!
//! | Model      | A        | M        | N  | χ |
//! |------------|----------|----------|----|---|
//! | NSE        | −νΔ      | I        | I  | 0 |
//! | Leray-α    | −νΔ      | S        | I  | 0 |
//! | ML-α       | −νΔ      | I        | S  | 0 |
//! | SBM        | −νΔ      | S        | S  | 0 |
//! | NSV        | −νΔS     | S        | S  | 0 |
//! | NS-α       | −νΔ      | S        | I  | 1 |
//! | NS-α-like  | ν(−Δ)^θ  | S_{θ₂}   | I  | 1 |
//!
//! with S = (I − α²Δ)^{−1} and S_{θ₂} = [I + (−α²Δ)^{θ₂}]^{−1}. At α = 0 the
//! smoothing collapses to the identity and every χ = 0 preset reduces to the
//! Navier-Stokes equations. The pressure never appears explicitly: the
//! Leray projection eliminates it mode by mode.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::ops;
use crate::snapshot;
use ndarray::Array3;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Nse,
    LerayAlpha,
    MlAlpha,
    Sbm,
    Nsv,
    NsAlpha,
    NsAlphaLike,
    Custom,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Nse => "nse",
            Preset::LerayAlpha => "leray_alpha",
            Preset::MlAlpha => "ml_alpha",
            Preset::Sbm => "sbm",
            Preset::Nsv => "nsv",
            Preset::NsAlpha => "ns_alpha",
            Preset::NsAlphaLike => "ns_alpha_like",
            Preset::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nse" => Ok(Preset::Nse),
            "leray_alpha" => Ok(Preset::LerayAlpha),
            "ml_alpha" => Ok(Preset::MlAlpha),
            "sbm" => Ok(Preset::Sbm),
            "nsv" => Ok(Preset::Nsv),
            "ns_alpha" => Ok(Preset::NsAlpha),
            "ns_alpha_like" => Ok(Preset::NsAlphaLike),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidParameter(format!(
                "unknown model preset '{other}'"
            ))),
        }
    }
}

/// Dissipation slot A: all choices are diagonal in Fourier space, so the
/// time integrator can treat them with an exact integrating factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipationOp {
    /// −νΔ, symbol ν|k|².
    Laplacian,
    /// −νΔS, symbol ν|k|²/(1 + α²|k|²) (Voigt).
    FilteredLaplacian,
    /// ν(−Δ)^θ, symbol ν|k|^{2θ}.
    FractionalLaplacian,
}

/// Smoothing slots M and N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingOp {
    Identity,
    /// S = (I − α²Δ)^{−1}.
    Helmholtz,
    /// S_{θ} = [I + (−α²Δ)^{θ}]^{−1}; Helmholtz at θ = 1.
    FractionalHelmholtz,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub preset: Preset,
    pub nu: f64,
    pub alpha: f64,
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub chi: bool,
    pub a_op: DissipationOp,
    pub m_op: SmoothingOp,
    pub n_op: SmoothingOp,
    /// When false the advective and χ terms are dropped (Stokes dynamics);
    /// used for linear validation runs.
    pub advection: bool,
}

impl ModelSpec {
    fn base(preset: Preset, nu: f64, alpha: f64) -> Self {
        Self {
            preset,
            nu,
            alpha,
            theta: 1.0,
            theta1: 1.0,
            theta2: 1.0,
            chi: false,
            a_op: DissipationOp::Laplacian,
            m_op: SmoothingOp::Identity,
            n_op: SmoothingOp::Identity,
            advection: true,
        }
    }

    pub fn nse(nu: f64) -> Self {
        Self::base(Preset::Nse, nu, 0.0)
    }

    pub fn leray_alpha(nu: f64, alpha: f64) -> Self {
        let mut m = Self::base(Preset::LerayAlpha, nu, alpha);
        m.m_op = SmoothingOp::Helmholtz;
        m
    }

    pub fn ml_alpha(nu: f64, alpha: f64) -> Self {
        let mut m = Self::base(Preset::MlAlpha, nu, alpha);
        m.n_op = SmoothingOp::Helmholtz;
        m
    }

    pub fn sbm(nu: f64, alpha: f64) -> Self {
        let mut m = Self::base(Preset::Sbm, nu, alpha);
        m.m_op = SmoothingOp::Helmholtz;
        m.n_op = SmoothingOp::Helmholtz;
        m
    }

    pub fn nsv(nu: f64, alpha: f64) -> Self {
        let mut m = Self::base(Preset::Nsv, nu, alpha);
        m.a_op = DissipationOp::FilteredLaplacian;
        m.m_op = SmoothingOp::Helmholtz;
        m.n_op = SmoothingOp::Helmholtz;
        m
    }

    pub fn ns_alpha(nu: f64, alpha: f64) -> Self {
        let mut m = Self::base(Preset::NsAlpha, nu, alpha);
        m.m_op = SmoothingOp::Helmholtz;
        m.chi = true;
        m
    }

    pub fn ns_alpha_like(nu: f64, alpha: f64, theta: f64, theta2: f64) -> Self {
        let mut m = Self::base(Preset::NsAlphaLike, nu, alpha);
        m.a_op = DissipationOp::FractionalLaplacian;
        m.m_op = SmoothingOp::FractionalHelmholtz;
        m.theta = theta;
        m.theta2 = theta2;
        m.chi = true;
        m
    }

    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        nu: f64,
        alpha: f64,
        a_op: DissipationOp,
        m_op: SmoothingOp,
        n_op: SmoothingOp,
        chi: bool,
        theta: f64,
        theta1: f64,
        theta2: f64,
    ) -> Self {
        Self {
            preset: Preset::Custom,
            nu,
            alpha,
            theta,
            theta1,
            theta2,
            chi,
            a_op,
            m_op,
            n_op,
            advection: true,
        }
    }

    pub fn without_advection(mut self) -> Self {
        self.advection = false;
        self
    }

    /// Parameter sanity. α = 0 is allowed for the smoothing presets with the
    /// convention S = I (they all degrade to NSE), but rejected for NSV
    /// whose dissipation operator is built around the filter.
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {}",
                self.nu
            )));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "filter width alpha must be nonnegative, got {}",
                self.alpha
            )));
        }
        if self.preset == Preset::Nsv && self.alpha == 0.0 {
            return Err(Error::InvalidParameter(
                "NSV requires alpha > 0 (A = -nu*Laplacian*S is degenerate at alpha = 0)".into(),
            ));
        }
        if self.theta < 0.0 || self.theta1 < 0.0 || self.theta2 < 0.0 {
            return Err(Error::InvalidParameter(
                "fractional exponents theta, theta1, theta2 must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Symbol of the dissipation operator A at |k|².
    pub fn dissipation_symbol(&self, k2: f64) -> f64 {
        match self.a_op {
            DissipationOp::Laplacian => self.nu * k2,
            DissipationOp::FilteredLaplacian => {
                self.nu * k2 / (1.0 + self.alpha * self.alpha * k2)
            }
            DissipationOp::FractionalLaplacian => {
                if k2 == 0.0 {
                    0.0
                } else {
                    self.nu * k2.powf(self.theta)
                }
            }
        }
    }

    fn smoothing_gain(&self, op: SmoothingOp, k2: f64) -> f64 {
        let a2 = self.alpha * self.alpha;
        match op {
            SmoothingOp::Identity => 1.0,
            SmoothingOp::Helmholtz => 1.0 / (1.0 + a2 * k2),
            SmoothingOp::FractionalHelmholtz => {
                let base = a2 * k2;
                let p = if base == 0.0 {
                    if self.theta2 == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    base.powf(self.theta2)
                };
                1.0 / (1.0 + p)
            }
        }
    }

    fn apply_smoothing(&self, op: SmoothingOp, v: &VectorField) -> VectorField {
        if op == SmoothingOp::Identity || self.alpha == 0.0 {
            return v.clone();
        }
        let grid = *v.grid();
        let (nz, ny, nxs) = grid.spec_shape();
        let (kx2, ky2, kz2) = grid.k2_tables();
        let mut out = v.clone();
        for c in 0..3 {
            let hat = out.comp_hat_mut(c).as_slice_mut().expect("standard layout");
            let mut idx = 0;
            for iz in 0..nz {
                for iy in 0..ny {
                    let kzy = kz2[iz] + ky2[iy];
                    for ikx in 0..nxs {
                        hat[idx] *= self.smoothing_gain(op, kzy + kx2[ikx]);
                        idx += 1;
                    }
                }
            }
        }
        out
    }

    /// The advecting velocity Mv (for Leray-α this is u = S v).
    pub fn advecting_velocity(&self, v: &VectorField) -> VectorField {
        self.apply_smoothing(self.m_op, v)
    }

    /// The advected velocity Nv.
    pub fn advected_velocity(&self, v: &VectorField) -> VectorField {
        self.apply_smoothing(self.n_op, v)
    }
}

/// Steady, divergence-free, mean-zero body force.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    /// Zero forcing (decaying flow).
    None,
    /// Two orthogonal Kolmogorov shears on wavenumber shell `shell`,
    /// (sin(s·z), sin(s·x), 0), rescaled so ‖f‖_{L²} = amplitude. Exactly
    /// divergence-free; the sheared steady flow it sustains couples the
    /// velocity components, which is what makes partial observation
    /// informative.
    SteadyLowmode { amplitude: f64, shell: usize },
    /// Taylor-Green vortex pattern on shell `shell`, rescaled likewise.
    TaylorGreen { amplitude: f64, shell: usize },
    /// Load from a snapshot file; projected and rescaled to `amplitude`
    /// unless amplitude = 0, which keeps the stored norm.
    CustomSnapshot { amplitude: f64, path: PathBuf },
}

impl Forcing {
    /// Materialize on a grid: divergence-free, mean-zero, dealiased, with
    /// the requested L² norm.
    pub fn realize(&self, grid: Grid) -> Result<VectorField> {
        let raw = match self {
            Forcing::None => return Ok(VectorField::zeros(grid)),
            Forcing::SteadyLowmode { amplitude, shell } => {
                check_shell(grid, *shell)?;
                let s = *shell as f64;
                let f = VectorField::from_fn(grid, |x, _y, z| {
                    [(s * z).sin(), (s * x).sin(), 0.0]
                });
                rescale(f, *amplitude)?
            }
            Forcing::TaylorGreen { amplitude, shell } => {
                check_shell(grid, *shell)?;
                let s = *shell as f64;
                let f = VectorField::from_fn(grid, |x, y, z| {
                    [
                        (s * x).sin() * (s * y).cos() * (s * z).cos(),
                        -(s * x).cos() * (s * y).sin() * (s * z).cos(),
                        0.0,
                    ]
                });
                rescale(f, *amplitude)?
            }
            Forcing::CustomSnapshot { amplitude, path } => {
                let data = snapshot::read_snapshot(path)?;
                let f = data.into_vector_field(grid)?;
                if *amplitude > 0.0 {
                    rescale(f, *amplitude)?
                } else {
                    f
                }
            }
        };
        let mut f = ops::dealias_vec(&ops::leray_project(&raw));
        f.zero_mean();
        // Projection can only shrink the norm; restore the contract
        // ‖f‖ = amplitude exactly after projection.
        match self {
            Forcing::SteadyLowmode { amplitude, .. } | Forcing::TaylorGreen { amplitude, .. } => {
                rescale(f, *amplitude)
            }
            Forcing::CustomSnapshot { amplitude, .. } if *amplitude > 0.0 => {
                rescale(f, *amplitude)
            }
            _ => Ok(f),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Forcing::None => "none",
            Forcing::SteadyLowmode { .. } => "steady_lowmode",
            Forcing::TaylorGreen { .. } => "taylor_green",
            Forcing::CustomSnapshot { .. } => "custom_snapshot",
        }
    }
}

fn check_shell(grid: Grid, shell: usize) -> Result<()> {
    if shell == 0 || shell > grid.dealias_cutoff() {
        return Err(Error::ShellsExceedTruncation {
            requested: shell,
            max: grid.dealias_cutoff(),
        });
    }
    Ok(())
}

fn rescale(f: VectorField, amplitude: f64) -> Result<VectorField> {
    if amplitude < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "forcing amplitude must be nonnegative, got {amplitude}"
        )));
    }
    if amplitude == 0.0 {
        return Ok(VectorField::zeros(*f.grid()));
    }
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroField("forcing pattern has zero norm".into()));
    }
    Ok(f.scale(amplitude / norm))
}

/// Instantaneous solver state: the momentum variable v and model time.
/// The filtered velocity u with v = u − α²Δu is recovered on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub v: VectorField,
    pub t: f64,
}

impl State {
    pub fn new(v: VectorField, t: f64) -> Self {
        Self { v, t }
    }

    /// u = S v = (I − α²Δ)^{−1} v.
    pub fn filtered_velocity(&self, alpha: f64) -> VectorField {
        ops::helmholtz_filter_vec(&self.v, alpha)
    }
}

/// Full right-hand side dv/dt = P[f − (Mv·∇)(Nv) − χ∇(Mv)ᵀ·(Nv)] − Av,
/// dealiased and divergence-free.
pub fn rhs(model: &ModelSpec, state: &State, forcing: &VectorField) -> Result<VectorField> {
    model.validate()?;
    state.v.grid().ensure_same(forcing.grid())?;
    let explicit = explicit_rhs(model, &state.v, forcing, None)?;
    let grid = *state.v.grid();
    let (nz, ny, nxs) = grid.spec_shape();
    let (kx2, ky2, kz2) = grid.k2_tables();
    let mut out = explicit;
    for c in 0..3 {
        let vh = state.v.comp_hat(c).as_slice().expect("standard layout");
        let oh = out.comp_hat_mut(c).as_slice_mut().expect("standard layout");
        let mut idx = 0;
        for iz in 0..nz {
            for iy in 0..ny {
                let kzy = kz2[iz] + ky2[iy];
                for ikx in 0..nxs {
                    let a = model.dissipation_symbol(kzy + kx2[ikx]);
                    oh[idx] -= vh[idx] * a;
                    idx += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Everything except the dissipation term: P[f − nonlinear + extra]. The
/// `extra` slot carries feedback terms (nudging); it is projected together
/// with the rest.
pub(crate) fn explicit_rhs(
    model: &ModelSpec,
    v: &VectorField,
    forcing: &VectorField,
    extra: Option<&VectorField>,
) -> Result<VectorField> {
    let grid = *v.grid();
    let mut acc = forcing.clone();
    if model.advection {
        let nl = nonlinear_term(model, v)?;
        acc = acc.sub(&nl)?;
    }
    if let Some(e) = extra {
        grid.ensure_same(e.grid())?;
        acc = acc.add(e)?;
    }
    let mut out = ops::leray_project(&acc);
    out.zero_mean();
    Ok(out)
}

/// (Mv·∇)(Nv) + χ∇(Mv)ᵀ·(Nv), computed pseudo-spectrally and dealiased.
/// The χ term is assembled componentwise: [∇(Mv)ᵀ·(Nv)]_i = Σ_j (Nv)_j ∂_i (Mv)_j.
pub fn nonlinear_term(model: &ModelSpec, v: &VectorField) -> Result<VectorField> {
    let grid = *v.grid();
    let n = grid.n();
    let mv = model.advecting_velocity(v);
    let nv = model.advected_velocity(v);

    let mv_phys = mv.to_physical()?;
    let mut products = [
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
        Array3::<f64>::zeros((n, n, n)),
    ];

    // Advective part: Σ_j (Mv)_j ∂_j (Nv)_i.
    for i in 0..3 {
        let grads = ops::gradient(&nv.component(i));
        for j in 0..3 {
            let dj = grads.component(j).to_physical()?;
            for (p, (m, d)) in products[i]
                .iter_mut()
                .zip(mv_phys[j].iter().zip(dj.iter()))
            {
                *p += m * d;
            }
        }
    }

    // χ term: Σ_j (Nv)_j ∂_i (Mv)_j.
    if model.chi {
        let nv_phys = nv.to_physical()?;
        for j in 0..3 {
            let grads = ops::gradient(&mv.component(j));
            for i in 0..3 {
                let di = grads.component(i).to_physical()?;
                for (p, (nvj, d)) in products[i]
                    .iter_mut()
                    .zip(nv_phys[j].iter().zip(di.iter()))
                {
                    *p += nvj * d;
                }
            }
        }
    }

    let mut out = VectorField::from_physical(grid, [&products[0], &products[1], &products[2]])?;
    out = ops::dealias_vec(&out);
    out.zero_mean();
    Ok(out)
}

/// Advective CFL safety factor in [`cfl_limit`].
pub const CFL_SAFETY: f64 = 0.4;

/// CFL limit C·Δx/max|Mv|. Zero velocity gives +∞.
pub fn cfl_limit(model: &ModelSpec, state: &State) -> Result<f64> {
    let u = model.advecting_velocity(&state.v);
    let phys = u.to_physical()?;
    let (ux, uy, uz) = (
        phys[0].as_slice().expect("contiguous"),
        phys[1].as_slice().expect("contiguous"),
        phys[2].as_slice().expect("contiguous"),
    );
    let mut max_sq = 0.0f64;
    for i in 0..ux.len() {
        max_sq = max_sq.max(ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i]);
    }
    if max_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(CFL_SAFETY * state.v.grid().dx() / max_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn presets_match_operator_table() {
        let m = ModelSpec::leray_alpha(0.1, 0.2);
        assert_eq!(m.a_op, DissipationOp::Laplacian);
        assert_eq!(m.m_op, SmoothingOp::Helmholtz);
        assert_eq!(m.n_op, SmoothingOp::Identity);
        assert!(!m.chi);

        let m = ModelSpec::nsv(0.1, 0.2);
        assert_eq!(m.a_op, DissipationOp::FilteredLaplacian);
        assert!(!m.chi);

        let m = ModelSpec::ns_alpha(0.1, 0.2);
        assert!(m.chi);
        assert_eq!(m.n_op, SmoothingOp::Identity);
    }

    #[test]
    fn nsv_rejects_zero_alpha() {
        assert!(ModelSpec::nsv(0.1, 0.0).validate().is_err());
        assert!(ModelSpec::leray_alpha(0.1, 0.0).validate().is_ok());
        assert!(ModelSpec::nse(0.0).validate().is_err());
    }

    #[test]
    fn leray_at_zero_alpha_matches_nse() {
        let g = grid();
        let v = VectorField::random_divergence_free(g, 1.0, 4, 3).unwrap();
        let f = Forcing::SteadyLowmode {
            amplitude: 0.5,
            shell: 1,
        }
        .realize(g)
        .unwrap();
        let state = State::new(v, 0.0);
        let a = rhs(&ModelSpec::leray_alpha(0.05, 0.0), &state, &f).unwrap();
        let b = rhs(&ModelSpec::nse(0.05), &state, &f).unwrap();
        let diff = a.sub(&b).unwrap().max_abs_coeff();
        assert!(
            diff < 1e-12 * a.max_abs_coeff().max(1.0),
            "leray(alpha=0) vs nse defect {diff}"
        );
    }

    #[test]
    fn zero_state_zero_forcing_gives_zero_rhs() {
        let g = grid();
        let state = State::new(VectorField::zeros(g), 0.0);
        let f = VectorField::zeros(g);
        let out = rhs(&ModelSpec::leray_alpha(0.1, 0.25), &state, &f).unwrap();
        assert_eq!(out.max_abs_coeff(), 0.0);
    }

    #[test]
    fn advection_matches_fine_grid_convolution() {
        // Pseudo-spectral product with 2/3 dealiasing against the exact
        // convolution computed on a 2x refined grid.
        let g = grid();
        let fine = Grid::new(32, 2.0 * PI).unwrap();
        let model = ModelSpec::leray_alpha(0.1, 0.3);
        let v = VectorField::random_divergence_free(g, 1.0, 4, 21).unwrap();

        let coarse_nl = nonlinear_term(&model, &v).unwrap();

        // Embed v on the fine grid (same modes, zero padding).
        let mut vf = VectorField::zeros(fine);
        let (nz, ny, nxs) = g.spec_shape();
        for iz in 0..nz {
            let mz = g.signed_mode(iz);
            for iy in 0..ny {
                let my = g.signed_mode(iy);
                for ikx in 0..nxs {
                    for c in 0..3 {
                        let val = v.comp_hat(c)[[iz, iy, ikx]];
                        if val != Complex64::default() {
                            let fz = fine.axis_index(mz);
                            let fy = fine.axis_index(my);
                            vf.comp_hat_mut(c)[[fz, fy, ikx]] = val;
                        }
                    }
                }
            }
        }
        let fine_nl = nonlinear_term(&model, &vf).unwrap();

        // Compare on the coarse retained modes: the fine grid computes the
        // quadratic convolution exactly there.
        let mut worst = 0.0f64;
        for iz in 0..nz {
            let mz = g.signed_mode(iz);
            if !g.dealias_keep(mz) {
                continue;
            }
            for iy in 0..ny {
                let my = g.signed_mode(iy);
                if !g.dealias_keep(my) {
                    continue;
                }
                for ikx in 0..nxs {
                    if !g.dealias_keep(ikx as i64) {
                        continue;
                    }
                    for c in 0..3 {
                        let coarse = coarse_nl.comp_hat(c)[[iz, iy, ikx]];
                        let finev =
                            fine_nl.comp_hat(c)[[fine.axis_index(mz), fine.axis_index(my), ikx]];
                        worst = worst.max((coarse - finev).norm());
                    }
                }
            }
        }
        let scale = coarse_nl.max_abs_coeff().max(1e-30);
        assert!(
            worst < 1e-11 * scale.max(1.0),
            "aliasing defect {worst} vs scale {scale}"
        );
    }

    #[test]
    fn cfl_limit_behaviour() {
        let g = grid();
        let model = ModelSpec::nse(0.1);
        let zero = State::new(VectorField::zeros(g), 0.0);
        assert_eq!(cfl_limit(&model, &zero).unwrap(), f64::INFINITY);

        let mut v = VectorField::zeros(g);
        v.add_mode_pair(0, [0, 0, 1], Complex64::new(0.5, 0.0)); // cos(z) e_x
        let s1 = State::new(v.clone(), 0.0);
        let lim1 = cfl_limit(&model, &s1).unwrap();
        let s2 = State::new(v.scale(2.0), 0.0);
        let lim2 = cfl_limit(&model, &s2).unwrap();
        assert!((lim1 / lim2 - 2.0).abs() < 1e-12);

        // doubling n halves dx and hence the limit
        let g2 = Grid::new(32, 2.0 * PI).unwrap();
        let mut v2 = VectorField::zeros(g2);
        v2.add_mode_pair(0, [0, 0, 1], Complex64::new(0.5, 0.0));
        let lim3 = cfl_limit(&model, &State::new(v2, 0.0)).unwrap();
        assert!((lim1 / lim3 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn forcing_is_divfree_with_exact_norm() {
        let g = grid();
        let cases = [
            (
                Forcing::SteadyLowmode {
                    amplitude: 0.7,
                    shell: 1,
                },
                0.7,
            ),
            (
                Forcing::TaylorGreen {
                    amplitude: 1.3,
                    shell: 2,
                },
                1.3,
            ),
        ];
        for (f, amp) in cases {
            let field = f.realize(g).unwrap();
            assert!(field.divergence_residual() < 1e-12);
            assert!((field.l2_norm() - amp).abs() < 1e-12);
        }
    }

    #[test]
    fn filtered_velocity_never_grows() {
        let g = grid();
        let v = VectorField::random_divergence_free(g, 2.0, 4, 8).unwrap();
        let s = State::new(v.clone(), 0.0);
        let u = s.filtered_velocity(0.4);
        assert!(u.l2_norm() <= v.l2_norm());
    }
}
