//! Mean-zero periodic fields stored as truncated Fourier coefficients.
//!
//! A scalar field keeps one half-spectrum array (see [`crate::grid`]), a
//! vector field keeps three. Fields are immutable values: every operator
//! hands back a new field, so they are safe to share across threads.
//!
//! Hermitian symmetry is explicit: the k_x = 0 and k_x = n/2 planes must be
//! conjugate-symmetric under (k_y, k_z) → (−k_y, −k_z) for the field to be
//! real in physical space. All spectral operators preserve that symmetry
//! bit-exactly; [`ScalarField::to_physical`] verifies it before inverting.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;
use ndarray::Array3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance for the Hermitian-symmetry assertion in `to_physical`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Scalar field as half-spectrum Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    hat: Array3<Complex64>,
}

/// Vector field: three scalar components sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Array3<Complex64>; 3],
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            hat: Array3::zeros(grid.spec_shape()),
        }
    }

    /// Forward transform of physical samples (shape (n, n, n), [z][y][x]).
    /// The mean mode is zeroed; Hermitian symmetry holds by construction.
    pub fn from_physical(grid: Grid, samples: &Array3<f64>) -> Result<Self> {
        let n = grid.n();
        if samples.dim() != (n, n, n) {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                got: samples.len(),
            });
        }
        let mut hat = fft::forward(samples.view(), n);
        hat[[0, 0, 0]] = Complex64::default();
        Ok(Self { grid, hat })
    }

    /// Forward transform of a flat x-fastest sample buffer of length n³.
    pub fn from_slice(grid: Grid, samples: &[f64]) -> Result<Self> {
        let n = grid.n();
        let arr = Array3::from_shape_vec((n, n, n), samples.to_vec()).map_err(|_| {
            Error::DimensionMismatch {
                expected: n * n * n,
                got: samples.len(),
            }
        })?;
        Self::from_physical(grid, &arr)
    }

    /// Build directly from sampled values of a function of (x, y, z).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let dx = grid.dx();
        let mut samples = Array3::zeros((n, n, n));
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    samples[[iz, iy, ix]] =
                        f(ix as f64 * dx, iy as f64 * dx, iz as f64 * dx);
                }
            }
        }
        Self::from_physical(grid, &samples).expect("shape is consistent by construction")
    }

    /// Inverse transform. Errors if the symmetry planes are not Hermitian to
    /// within [`HERMITIAN_TOL`] (relative to the largest coefficient).
    pub fn to_physical(&self) -> Result<Array3<f64>> {
        let defect = self.hermitian_defect();
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::HermitianViolation {
                defect: defect / scale,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(fft::inverse(self.hat.view(), self.grid.n()))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hat(&self) -> &Array3<Complex64> {
        &self.hat
    }

    pub(crate) fn hat_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.hat
    }

    pub(crate) fn from_hat(grid: Grid, hat: Array3<Complex64>) -> Self {
        Self { grid, hat }
    }

    /// Largest |coefficient| on the x-symmetry planes' mirror defect.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for &ikx in &[0usize, n / 2] {
            for iz in 0..n {
                for iy in 0..n {
                    let jz = self.grid.axis_index(-self.grid.signed_mode(iz));
                    let jy = self.grid.axis_index(-self.grid.signed_mode(iy));
                    let d = (self.hat[[iz, iy, ikx]] - self.hat[[jz, jy, ikx]].conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.hat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Read coefficient at signed mode m = (m_x, m_y, m_z); m_x < 0 returns
    /// the conjugate of the stored partner.
    pub fn mode(&self, m: [i64; 3]) -> Complex64 {
        let (m, conj) = canonical_mode(m);
        let idx = storage_index(&self.grid, m);
        let v = self.hat[idx];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    /// Add c·e^{ik·x} + c̄·e^{−ik·x} for wavevector k = (2π/L)·m. This is the
    /// canonical way to build single-mode test fields; the mean mode is
    /// rejected.
    pub fn add_mode_pair(&mut self, m: [i64; 3], c: Complex64) {
        add_pair(&self.grid, &mut self.hat, m, c);
    }

    pub fn zero_mean(&mut self) {
        self.hat[[0, 0, 0]] = Complex64::default();
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            hat: self.hat.mapv(|c| c * a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            hat: &self.hat + &other.hat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            hat: &self.hat - &other.hat,
        })
    }

    /// L² norm squared via Parseval: L³ Σ w(k)|û(k)|², where plane modes
    /// (k_x ∈ {0, n/2}) count once and interior modes twice.
    pub fn l2_norm_sq(&self) -> f64 {
        parseval_l2_sq(&self.grid, &self.hat)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// ‖∇φ‖² computed spectrally with the first-derivative wavevectors.
    pub fn h1_seminorm_sq(&self) -> f64 {
        parseval_h1_sq(&self.grid, &self.hat)
    }

    /// L² inner product (φ, ψ).
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(parseval_inner(&self.grid, &self.hat, &other.hat))
    }

    /// Seeded random field supported on 0 < |m| ≤ max_shell; deterministic.
    pub fn random(grid: Grid, amplitude: f64, max_shell: usize, seed: u64) -> Result<Self> {
        if max_shell > grid.dealias_cutoff() {
            return Err(Error::ShellsExceedTruncation {
                requested: max_shell,
                max: grid.dealias_cutoff(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hat = Array3::zeros(grid.spec_shape());
        fill_random_modes(&grid, std::slice::from_mut(&mut hat), max_shell, &mut rng);
        let mut field = Self { grid, hat };
        let norm = field.l2_norm();
        if norm > 0.0 {
            field = field.scale(amplitude / norm);
        }
        Ok(field)
    }

    pub fn is_zero(&self) -> bool {
        self.hat.iter().all(|c| c.norm_sqr() == 0.0)
    }
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let shape = grid.spec_shape();
        Self {
            grid,
            comps: [
                Array3::zeros(shape),
                Array3::zeros(shape),
                Array3::zeros(shape),
            ],
        }
    }

    pub fn from_components(c: [ScalarField; 3]) -> Result<Self> {
        c[0].grid.ensure_same(&c[1].grid)?;
        c[0].grid.ensure_same(&c[2].grid)?;
        let grid = c[0].grid;
        let [a, b, d] = c;
        Ok(Self {
            grid,
            comps: [a.hat, b.hat, d.hat],
        })
    }

    pub fn from_physical(grid: Grid, samples: [&Array3<f64>; 3]) -> Result<Self> {
        Ok(Self::from_components([
            ScalarField::from_physical(grid, samples[0])?,
            ScalarField::from_physical(grid, samples[1])?,
            ScalarField::from_physical(grid, samples[2])?,
        ])?)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let n = grid.n();
        let dx = grid.dx();
        let mut s = [
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
            Array3::zeros((n, n, n)),
        ];
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let v = f(ix as f64 * dx, iy as f64 * dx, iz as f64 * dx);
                    for c in 0..3 {
                        s[c][[iz, iy, ix]] = v[c];
                    }
                }
            }
        }
        Self::from_physical(grid, [&s[0], &s[1], &s[2]]).expect("consistent shapes")
    }

    pub fn to_physical(&self) -> Result<[Array3<f64>; 3]> {
        Ok([
            self.component(0).to_physical()?,
            self.component(1).to_physical()?,
            self.component(2).to_physical()?,
        ])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Borrowed view of one component as a scalar field.
    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            hat: self.comps[i].clone(),
        }
    }

    pub fn comp_hat(&self, i: usize) -> &Array3<Complex64> {
        &self.comps[i]
    }

    pub(crate) fn comp_hat_mut(&mut self, i: usize) -> &mut Array3<Complex64> {
        &mut self.comps[i]
    }

    pub(crate) fn comp_hats_mut(&mut self) -> [&mut Array3<Complex64>; 3] {
        let [a, b, c] = &mut self.comps;
        [a, b, c]
    }

    pub(crate) fn from_hats(grid: Grid, comps: [Array3<Complex64>; 3]) -> Self {
        Self { grid, comps }
    }

    pub fn add_mode_pair(&mut self, comp: usize, m: [i64; 3], c: Complex64) {
        add_pair(&self.grid, &mut self.comps[comp], m, c);
    }

    pub fn mode(&self, comp: usize, m: [i64; 3]) -> Complex64 {
        self.component(comp).mode(m)
    }

    pub fn zero_mean(&mut self) {
        for c in &mut self.comps {
            c[[0, 0, 0]] = Complex64::default();
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            comps: [
                self.comps[0].mapv(|c| c * a),
                self.comps[1].mapv(|c| c * a),
                self.comps[2].mapv(|c| c * a),
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            comps: [
                &self.comps[0] + &other.comps[0],
                &self.comps[1] + &other.comps[1],
                &self.comps[2] + &other.comps[2],
            ],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            comps: [
                &self.comps[0] - &other.comps[0],
                &self.comps[1] - &other.comps[1],
                &self.comps[2] - &other.comps[2],
            ],
        })
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.comps
            .iter()
            .map(|h| parseval_l2_sq(&self.grid, h))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn h1_seminorm_sq(&self) -> f64 {
        self.comps
            .iter()
            .map(|h| parseval_h1_sq(&self.grid, h))
            .sum()
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok((0..3)
            .map(|i| parseval_inner(&self.grid, &self.comps[i], &other.comps[i]))
            .sum())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|h| h.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Max residual of k·û(k) relative to |k||û|, over nonzero modes; zero
    /// for exactly divergence-free fields.
    pub fn divergence_residual(&self) -> f64 {
        let (nz, ny, nxs) = self.grid.spec_shape();
        let mut worst = 0.0f64;
        for iz in 0..nz {
            for iy in 0..ny {
                for ikx in 0..nxs {
                    let k = self.grid.deriv_wavevector(iz, iy, ikx);
                    let knorm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                    if knorm == 0.0 {
                        continue;
                    }
                    let u = [
                        self.comps[0][[iz, iy, ikx]],
                        self.comps[1][[iz, iy, ikx]],
                        self.comps[2][[iz, iy, ikx]],
                    ];
                    let dot = u[0] * k[0] + u[1] * k[1] + u[2] * k[2];
                    let mag = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
                    if mag > 0.0 {
                        worst = worst.max(dot.norm() / (knorm * mag));
                    }
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|h| h.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    /// Seeded divergence-free random field supported on 0 < |m| ≤ max_shell
    /// with exact L² energy ‖u‖² = energy. Deterministic per seed.
    pub fn random_divergence_free(
        grid: Grid,
        energy: f64,
        max_shell: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "energy must be positive, got {energy}"
            )));
        }
        if max_shell == 0 || max_shell > grid.dealias_cutoff() {
            return Err(Error::ShellsExceedTruncation {
                requested: max_shell,
                max: grid.dealias_cutoff(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = grid.spec_shape();
        let mut comps = [
            Array3::zeros(shape),
            Array3::zeros(shape),
            Array3::zeros(shape),
        ];
        fill_random_modes(&grid, &mut comps, max_shell, &mut rng);
        let raw = Self { grid, comps };
        let mut proj = crate::ops::leray_project(&raw);
        proj.zero_mean();
        let norm_sq = proj.l2_norm_sq();
        if norm_sq == 0.0 {
            return Err(Error::ZeroField(
                "random field projected to zero; increase shells".into(),
            ));
        }
        Ok(proj.scale((energy / norm_sq).sqrt()))
    }
}

/// Canonicalize a signed mode so that m_x ≥ 0; returns (mode, needs_conj).
fn canonical_mode(m: [i64; 3]) -> ([i64; 3], bool) {
    if m[0] < 0 {
        ([-m[0], -m[1], -m[2]], true)
    } else {
        (m, false)
    }
}

fn storage_index(grid: &Grid, m: [i64; 3]) -> [usize; 3] {
    let half = (grid.n() / 2) as i64;
    assert!(
        m[0] >= 0 && m[0] <= half && m[1].abs() <= half && m[2].abs() <= half,
        "mode {m:?} outside truncation"
    );
    [grid.axis_index(m[2]), grid.axis_index(m[1]), m[0] as usize]
}

fn add_pair(grid: &Grid, hat: &mut Array3<Complex64>, m: [i64; 3], c: Complex64) {
    let (m, conj) = canonical_mode(m);
    let c = if conj { c.conj() } else { c };
    assert!(
        m != [0, 0, 0],
        "mean mode must stay zero; cannot add a constant"
    );
    let half = (grid.n() / 2) as i64;
    let idx = storage_index(grid, m);
    if m[0] > 0 && m[0] < half {
        hat[idx] += c;
        return;
    }
    // m_x ∈ {0, n/2}: the conjugate partner lives in the same stored plane.
    let mirror = [
        grid.axis_index(-m[2]),
        grid.axis_index(-m[1]),
        idx[2],
    ];
    if mirror == idx {
        // Self-conjugate point: e^{ik·x} and e^{−ik·x} alias together.
        hat[idx] += c + c.conj();
    } else {
        hat[idx] += c;
        hat[mirror] += c.conj();
    }
}

/// Parseval-weighted sum Σ w(k)·sym(k)·|û(k)|² · L³ over the half spectrum,
/// where sym is a function of the per-axis symbol tables (x, y, z).
fn parseval_sum_tables(
    grid: &Grid,
    hat: &Array3<Complex64>,
    tx: &[f64],
    ty: &[f64],
    tz: &[f64],
    sym: impl Fn(f64, f64, f64) -> f64,
) -> f64 {
    let (nz, ny, nxs) = grid.spec_shape();
    let half = grid.n() / 2;
    let vol = grid.volume();
    let s = hat.as_slice().expect("standard layout");
    let mut total = 0.0;
    let mut idx = 0;
    for iz in 0..nz {
        for iy in 0..ny {
            for ikx in 0..nxs {
                let a = s[idx].norm_sqr();
                idx += 1;
                if a != 0.0 {
                    let w = if ikx == 0 || ikx == half { 1.0 } else { 2.0 };
                    total += w * sym(tx[ikx], ty[iy], tz[iz]) * a;
                }
            }
        }
    }
    vol * total
}

/// L³ Σ w|û|².
fn parseval_l2_sq(grid: &Grid, hat: &Array3<Complex64>) -> f64 {
    let (kx2, ky2, kz2) = grid.k2_tables();
    parseval_sum_tables(grid, hat, &kx2, &ky2, &kz2, |_, _, _| 1.0)
}

/// L³ Σ w|k_deriv|²|û|² = ‖∇φ‖².
fn parseval_h1_sq(grid: &Grid, hat: &Array3<Complex64>) -> f64 {
    let (dkx, dky, dkz) = grid.deriv_k_tables();
    parseval_sum_tables(grid, hat, &dkx, &dky, &dkz, |x, y, z| {
        x * x + y * y + z * z
    })
}

fn parseval_inner(grid: &Grid, a: &Array3<Complex64>, b: &Array3<Complex64>) -> f64 {
    let (nz, ny, nxs) = grid.spec_shape();
    let half = grid.n() / 2;
    let vol = grid.volume();
    let sa = a.as_slice().expect("standard layout");
    let sb = b.as_slice().expect("standard layout");
    let mut total = 0.0;
    let mut idx = 0;
    for _iz in 0..nz {
        for _iy in 0..ny {
            for ikx in 0..nxs {
                let w = if ikx == 0 || ikx == half { 1.0 } else { 2.0 };
                total += w * (sa[idx].conj() * sb[idx]).re;
                idx += 1;
            }
        }
    }
    vol * total
}

/// Populate modes 0 < |m| ≤ max_shell with unit-variance complex Gaussians,
/// respecting Hermitian symmetry on the stored planes. Iteration order is
/// fixed so identical seeds give bit-identical fields. Amplitudes fall off
/// as 1/(1 + |m|²) to keep the sample fields smooth.
fn fill_random_modes(
    grid: &Grid,
    comps: &mut [Array3<Complex64>],
    max_shell: usize,
    rng: &mut impl Rng,
) {
    let (nz, ny, nxs) = grid.spec_shape();
    let half = grid.n() / 2;
    let s2 = (max_shell * max_shell) as i64;
    for iz in 0..nz {
        let mz = grid.signed_mode(iz);
        for iy in 0..ny {
            let my = grid.signed_mode(iy);
            for ikx in 0..nxs {
                let mx = ikx as i64;
                let m2 = mx * mx + my * my + mz * mz;
                if m2 == 0 || m2 > s2 {
                    continue;
                }
                let on_plane = ikx == 0 || ikx == half;
                if on_plane {
                    // Canonical half of the plane only; mirror is written
                    // alongside. Self-conjugate points are skipped (they sit
                    // at Nyquist offsets, outside any dealiased shell).
                    let canonical = my > 0 || (my == 0 && mz > 0);
                    if !canonical {
                        continue;
                    }
                }
                let amp = 1.0 / (1.0 + m2 as f64);
                for comp in comps.iter_mut() {
                    let c = Complex64::new(
                        rng.gen_range(-1.0..1.0) * amp,
                        rng.gen_range(-1.0..1.0) * amp,
                    );
                    comp[[iz, iy, ikx]] = c;
                    if on_plane {
                        let jz = grid.axis_index(-mz);
                        let jy = grid.axis_index(-my);
                        comp[[jz, jy, ikx]] = c.conj();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn sine_maps_to_single_conjugate_pair() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x, _, _| x.sin());
        // sin(x) = (e^{ix} − e^{−ix}) / 2i: stored coefficient at m=(1,0,0)
        let c = f.mode([1, 0, 0]);
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        let c = f.mode([-1, 0, 0]);
        assert!((c - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        // everything else vanishes
        let mut total = 0.0;
        for (idx, v) in f.hat().indexed_iter() {
            if idx != (0, 0, 1) {
                total += v.norm();
            }
        }
        assert!(total < 1e-12);
    }

    #[test]
    fn constant_field_is_zeroed() {
        let g = grid();
        let samples = Array3::from_elem((16, 16, 16), 3.7);
        let f = ScalarField::from_physical(g, &samples).unwrap();
        assert!(f.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn round_trip_removes_mean_only() {
        let g = grid();
        let n = g.n();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = Array3::from_shape_fn((n, n, n), |_| rng.gen_range(-1.0..1.0));
        let mean = samples.sum() / (n * n * n) as f64;
        let f = ScalarField::from_physical(g, &samples).unwrap();
        let back = f.to_physical().unwrap();
        let mut worst = 0.0f64;
        for (a, b) in samples.iter().zip(back.iter()) {
            worst = worst.max((a - mean - b).abs());
        }
        assert!(worst < 1e-12, "round-trip defect {worst}");
    }

    #[test]
    fn mode_pair_reconstructs_cosine() {
        let g = grid();
        let mut f = ScalarField::zeros(g);
        f.add_mode_pair([2, 0, 0], Complex64::new(0.5, 0.0));
        let samples = f.to_physical().unwrap();
        let dx = g.dx();
        for ix in 0..g.n() {
            let expect = (2.0 * ix as f64 * dx).cos();
            assert!((samples[[0, 0, ix]] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn plane_mode_pair_is_hermitian() {
        let g = grid();
        let mut f = ScalarField::zeros(g);
        // m_x = 0 plane: conjugate partner stored explicitly.
        f.add_mode_pair([0, 3, -2], Complex64::new(0.3, 0.4));
        assert!(f.hermitian_defect() < 1e-15);
        let samples = f.to_physical().unwrap();
        let dx = g.dx();
        let expect = |y: f64, z: f64| 2.0 * (0.3 * (3.0 * y - 2.0 * z).cos() - 0.4 * (3.0 * y - 2.0 * z).sin());
        for iy in 0..4 {
            for iz in 0..4 {
                let got = samples[[iz, iy, 0]];
                let want = expect(iy as f64 * dx, iz as f64 * dx);
                assert!((got - want).abs() < 1e-13, "got {got}, want {want}");
            }
        }
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid();
        let f = ScalarField::random(g, 2.5, 4, 11).unwrap();
        let spectral = f.l2_norm_sq();
        let samples = f.to_physical().unwrap();
        let quad: f64 = samples.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        assert!(
            (spectral - quad).abs() <= 1e-10 * spectral.max(quad),
            "parseval mismatch {spectral} vs {quad}"
        );
    }

    #[test]
    fn random_divfree_has_exact_energy_and_zero_divergence() {
        let g = grid();
        let e = 0.73;
        let u = VectorField::random_divergence_free(g, e, 4, 42).unwrap();
        assert!((u.l2_norm_sq() - e).abs() < 1e-10 * e);
        assert!(u.divergence_residual() < 1e-12);
    }

    #[test]
    fn random_divfree_is_deterministic() {
        let g = grid();
        let a = VectorField::random_divergence_free(g, 1.0, 4, 5).unwrap();
        let b = VectorField::random_divergence_free(g, 1.0, 4, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shells_beyond_truncation_are_rejected() {
        let g = grid(); // cutoff = 5 at n = 16
        assert!(VectorField::random_divergence_free(g, 1.0, 6, 0).is_err());
        assert!(VectorField::random_divergence_free(g, 1.0, 5, 0).is_ok());
    }

    #[test]
    fn hermitian_violation_is_caught() {
        let g = grid();
        let mut f = ScalarField::zeros(g);
        // Corrupt one plane coefficient without its mirror.
        f.hat_mut()[[1, 2, 0]] = Complex64::new(1.0, 0.5);
        assert!(matches!(
            f.to_physical(),
            Err(Error::HermitianViolation { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn round_trip_is_identity(seed in 0u64..10_000, shell in 2usize..5) {
                let g = Grid::new(16, 2.0 * PI).unwrap();
                let f = ScalarField::random(g, 1.0, shell, seed).unwrap();
                let back = ScalarField::from_physical(g, &f.to_physical().unwrap()).unwrap();
                let defect = back.sub(&f).unwrap().max_abs_coeff();
                prop_assert!(defect <= 1e-13 * f.max_abs_coeff().max(1e-3));
            }

            #[test]
            fn projection_is_idempotent_and_divfree(seed in 0u64..10_000) {
                let g = Grid::new(8, 2.0 * PI).unwrap();
                let a = ScalarField::random(g, 1.0, 2, seed).unwrap();
                let b = ScalarField::random(g, 0.5, 2, seed.wrapping_add(1)).unwrap();
                let c = ScalarField::random(g, 1.5, 2, seed.wrapping_add(2)).unwrap();
                let u = VectorField::from_components([a, b, c]).unwrap();
                let p = crate::ops::leray_project(&u);
                let pp = crate::ops::leray_project(&p);
                prop_assert!(p.sub(&pp).unwrap().max_abs_coeff() <= 1e-13 * u.max_abs_coeff().max(1e-3));
                prop_assert!(p.divergence_residual() <= 1e-13);
            }

            #[test]
            fn parseval_holds(seed in 0u64..10_000, amp in 0.1f64..5.0) {
                let g = Grid::new(8, 2.0 * PI).unwrap();
                let f = ScalarField::random(g, amp, 2, seed).unwrap();
                let spectral = f.l2_norm_sq();
                let quad: f64 = f
                    .to_physical()
                    .unwrap()
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    * g.cell_volume();
                prop_assert!((spectral - quad).abs() <= 1e-10 * spectral.max(quad));
            }
        }
    }
}
