//! The periodic box Ω = [0, L]³ and its wavenumber bookkeeping.
//!
//! Fields are L-periodic and discretized on n³ collocation points. Spectral
//! storage uses the real-transform halved spectrum: the x-axis keeps modes
//! m_x ∈ {0, …, n/2} and the conjugate half is implied by Hermitian
//! symmetry. The y and z axes carry the full signed range in standard FFT
//! order (0, 1, …, n/2, −n/2+1, …, −1).

use crate::error::{Error, Result};

/// Periodic cubic grid: resolution, box size and dealias rule.
///
/// The dealias fraction is kept as an exact rational so the retained-mode
/// cutoff is computed without rounding surprises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    dealias: (u32, u32),
}

impl Grid {
    /// Grid with the standard 2/3-rule dealias fraction.
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_dealias(n, length, 2, 3)
    }

    /// Grid with dealias fraction `num/den` in (0, 1].
    pub fn with_dealias(n: usize, length: f64, num: u32, den: u32) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be even and >= 8, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        if den == 0 || num == 0 || num > den {
            return Err(Error::InvalidParameter(format!(
                "dealias fraction must be a rational in (0, 1], got {num}/{den}"
            )));
        }
        let grid = Self {
            n,
            length,
            dealias: (num, den),
        };
        if grid.dealias_cutoff() < 2 {
            return Err(Error::InvalidParameter(format!(
                "fewer than 2 modes per axis survive dealiasing at n = {n}, fraction {num}/{den}"
            )));
        }
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dealias_fraction(&self) -> (u32, u32) {
        self.dealias
    }

    /// Fundamental wavenumber 2π/L.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Smallest Stokes eigenvalue λ₁ = (2π/L)².
    pub fn lambda1(&self) -> f64 {
        let k0 = self.k0();
        k0 * k0
    }

    /// Grid spacing L/n.
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Cell volume (L/n)³, the quadrature weight for physical-space sums.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    /// Box volume L³.
    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Shape of a physical-space array, indexed [z][y][x] so x is fastest.
    pub fn phys_shape(&self) -> (usize, usize, usize) {
        (self.n, self.n, self.n)
    }

    /// Shape of the half-spectrum array: x-axis truncated to n/2 + 1 modes.
    pub fn spec_shape(&self) -> (usize, usize, usize) {
        (self.n, self.n, self.n / 2 + 1)
    }

    /// Signed mode number for a full-range FFT axis index.
    #[inline]
    pub fn signed_mode(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Storage index on a full-range axis for a signed mode number.
    #[inline]
    pub fn axis_index(&self, m: i64) -> usize {
        let n = self.n as i64;
        (((m % n) + n) % n) as usize
    }

    /// Largest |m| kept by the dealias rule: |m| ≤ (num/den)·(n/2).
    pub fn dealias_cutoff(&self) -> usize {
        (self.dealias.0 as usize * self.n) / (2 * self.dealias.1 as usize)
    }

    /// Whether signed mode m survives dealiasing on one axis (exact rational
    /// comparison, no rounding).
    #[inline]
    pub fn dealias_keep(&self, m: i64) -> bool {
        2 * self.dealias.1 as i64 * m.unsigned_abs() as i64 <= self.dealias.0 as i64 * self.n as i64
    }

    /// True wavevector for spectral storage indices (iz, iy, ikx).
    #[inline]
    pub fn wavevector(&self, iz: usize, iy: usize, ikx: usize) -> [f64; 3] {
        let k0 = self.k0();
        [
            k0 * ikx as f64,
            k0 * self.signed_mode(iy) as f64,
            k0 * self.signed_mode(iz) as f64,
        ]
    }

    /// |k|² at storage indices, Nyquist modes included.
    #[inline]
    pub fn k_sq(&self, iz: usize, iy: usize, ikx: usize) -> f64 {
        let [kx, ky, kz] = self.wavevector(iz, iy, ikx);
        kx * kx + ky * ky + kz * kz
    }

    /// Wavevector used by first-derivative symbols: the Nyquist mode has no
    /// well-defined odd derivative on the collocation grid and is zeroed.
    #[inline]
    pub fn deriv_wavevector(&self, iz: usize, iy: usize, ikx: usize) -> [f64; 3] {
        let k0 = self.k0();
        let half = self.n / 2;
        let dm = |m: i64| {
            if m.unsigned_abs() as usize == half {
                0.0
            } else {
                m as f64
            }
        };
        [
            k0 * dm(ikx as i64),
            k0 * dm(self.signed_mode(iy)),
            k0 * dm(self.signed_mode(iz)),
        ]
    }

    /// Per-axis squared wavenumbers for the storage layout:
    /// (kx²[ikx], ky²[iy], kz²[iz]). |k|² at (iz, iy, ikx) is the sum.
    pub fn k2_tables(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k0 = self.k0();
        let kx2 = (0..self.n / 2 + 1)
            .map(|i| {
                let k = k0 * i as f64;
                k * k
            })
            .collect();
        let full: Vec<f64> = (0..self.n)
            .map(|i| {
                let k = k0 * self.signed_mode(i) as f64;
                k * k
            })
            .collect();
        (kx2, full.clone(), full)
    }

    /// Per-axis first-derivative wavenumbers (Nyquist zeroed):
    /// (kx[ikx], ky[iy], kz[iz]).
    pub fn deriv_k_tables(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k0 = self.k0();
        let half = self.n / 2;
        let kx = (0..half + 1)
            .map(|i| if i == half { 0.0 } else { k0 * i as f64 })
            .collect();
        let full: Vec<f64> = (0..self.n)
            .map(|i| {
                let m = self.signed_mode(i);
                if m.unsigned_abs() as usize == half {
                    0.0
                } else {
                    k0 * m as f64
                }
            })
            .collect();
        (kx, full.clone(), full)
    }

    /// Per-axis dealias keep masks: (x, y, z) axis tables.
    pub fn dealias_tables(&self) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
        let keep_x = (0..self.n / 2 + 1).map(|i| self.dealias_keep(i as i64)).collect();
        let full: Vec<bool> = (0..self.n)
            .map(|i| self.dealias_keep(self.signed_mode(i)))
            .collect();
        (keep_x, full.clone(), full)
    }

    /// Checks that two fields can be combined.
    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "n {} vs {}, L {} vs {}",
                self.n, other.n, self.length, other.length
            )))
        }
    }
}
