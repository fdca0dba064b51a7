//! The linear operators of the periodic setting, all diagonal in Fourier
//! space: gradient, divergence, Laplacian, Helmholtz–Leray projection,
//! Helmholtz filter S = (I − α²Δ)^{−1}, fractional Laplacian powers and the
//! dealias mask.
//!
//! Every operator is a pure function returning a new field. First-derivative
//! symbols use the Nyquist-zeroed wavevectors of
//! [`Grid::deriv_wavevector`](crate::grid::Grid::deriv_wavevector); symbols
//! that depend only on |k|² keep the Nyquist modes.

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use ndarray::Array3;
use num_complex::Complex64;

fn map_symbol(grid: &Grid, hat: &Array3<Complex64>, sym: impl Fn(f64) -> f64) -> Array3<Complex64> {
    let (nz, ny, nxs) = grid.spec_shape();
    let (kx2, ky2, kz2) = grid.k2_tables();
    let mut out = hat.clone();
    let s = out.as_slice_mut().expect("standard layout");
    let mut idx = 0;
    for iz in 0..nz {
        for iy in 0..ny {
            let kzy = kz2[iz] + ky2[iy];
            for ikx in 0..nxs {
                s[idx] *= sym(kzy + kx2[ikx]);
                idx += 1;
            }
        }
    }
    out
}

/// ∇φ: per mode multiplication by ik.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let (nz, ny, nxs) = grid.spec_shape();
    let (dkx, dky, dkz) = grid.deriv_k_tables();
    let mut out = VectorField::zeros(grid);
    let src = f.hat().as_slice().expect("standard layout");
    {
        let [gx, gy, gz] = out.comp_hats_mut();
        let gx = gx.as_slice_mut().expect("standard layout");
        let gy = gy.as_slice_mut().expect("standard layout");
        let gz = gz.as_slice_mut().expect("standard layout");
        let mut idx = 0;
        for iz in 0..nz {
            for iy in 0..ny {
                for ikx in 0..nxs {
                    let v = src[idx];
                    let iv = Complex64::new(-v.im, v.re); // i·v
                    gx[idx] = iv * dkx[ikx];
                    gy[idx] = iv * dky[iy];
                    gz[idx] = iv * dkz[iz];
                    idx += 1;
                }
            }
        }
    }
    out
}

/// ∇·u: per mode ik·û.
pub fn divergence(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let (nz, ny, nxs) = grid.spec_shape();
    let (dkx, dky, dkz) = grid.deriv_k_tables();
    let mut hat = Array3::zeros(grid.spec_shape());
    {
        let out = hat.as_slice_mut().expect("standard layout");
        let ux = u.comp_hat(0).as_slice().expect("standard layout");
        let uy = u.comp_hat(1).as_slice().expect("standard layout");
        let uz = u.comp_hat(2).as_slice().expect("standard layout");
        let mut idx = 0;
        for iz in 0..nz {
            for iy in 0..ny {
                for ikx in 0..nxs {
                    let dot = ux[idx] * dkx[ikx] + uy[idx] * dky[iy] + uz[idx] * dkz[iz];
                    out[idx] = Complex64::new(-dot.im, dot.re); // i·(k·û)
                    idx += 1;
                }
            }
        }
    }
    ScalarField::from_hat(grid, hat)
}

/// Δφ: multiplication by −|k|².
pub fn laplacian(f: &ScalarField) -> ScalarField {
    ScalarField::from_hat(*f.grid(), map_symbol(f.grid(), f.hat(), |k2| -k2))
}

/// Δu componentwise.
pub fn laplacian_vec(u: &VectorField) -> VectorField {
    let grid = *u.grid();
    VectorField::from_hats(
        grid,
        [
            map_symbol(&grid, u.comp_hat(0), |k2| -k2),
            map_symbol(&grid, u.comp_hat(1), |k2| -k2),
            map_symbol(&grid, u.comp_hat(2), |k2| -k2),
        ],
    )
}

/// Helmholtz–Leray projection onto divergence-free, mean-zero fields:
/// û ↦ û − k(k·û)/|k|². Idempotent and self-adjoint; annihilates gradients.
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = *u.grid();
    let (nz, ny, nxs) = grid.spec_shape();
    let (dkx, dky, dkz) = grid.deriv_k_tables();
    let mut out = u.clone();
    {
        let [hx, hy, hz] = out.comp_hats_mut();
        let hx = hx.as_slice_mut().expect("standard layout");
        let hy = hy.as_slice_mut().expect("standard layout");
        let hz = hz.as_slice_mut().expect("standard layout");
        let mut idx = 0;
        for iz in 0..nz {
            let kz = dkz[iz];
            for iy in 0..ny {
                let ky = dky[iy];
                for ikx in 0..nxs {
                    let kx = dkx[ikx];
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 != 0.0 {
                        let dot = hx[idx] * kx + hy[idx] * ky + hz[idx] * kz;
                        let scale = dot / k2;
                        hx[idx] -= scale * kx;
                        hy[idx] -= scale * ky;
                        hz[idx] -= scale * kz;
                    }
                    idx += 1;
                }
            }
        }
    }
    out.zero_mean();
    out
}

/// Helmholtz filter S = (I − α²Δ)^{−1}: per mode gain 1/(1 + α²|k|²).
/// α = 0 is the identity. Exact inverse of u ↦ u − α²Δu on retained modes.
pub fn helmholtz_filter(f: &ScalarField, alpha: f64) -> ScalarField {
    let a2 = alpha * alpha;
    ScalarField::from_hat(
        *f.grid(),
        map_symbol(f.grid(), f.hat(), |k2| 1.0 / (1.0 + a2 * k2)),
    )
}

/// Componentwise Helmholtz filter on vectors.
pub fn helmholtz_filter_vec(u: &VectorField, alpha: f64) -> VectorField {
    let grid = *u.grid();
    let a2 = alpha * alpha;
    VectorField::from_hats(
        grid,
        [
            map_symbol(&grid, u.comp_hat(0), |k2| 1.0 / (1.0 + a2 * k2)),
            map_symbol(&grid, u.comp_hat(1), |k2| 1.0 / (1.0 + a2 * k2)),
            map_symbol(&grid, u.comp_hat(2), |k2| 1.0 / (1.0 + a2 * k2)),
        ],
    )
}

/// (−Δ)^θ: per mode |k|^{2θ}. θ = 0 is the identity on mean-zero fields.
pub fn fractional_laplacian(f: &ScalarField, theta: f64) -> ScalarField {
    ScalarField::from_hat(
        *f.grid(),
        map_symbol(f.grid(), f.hat(), |k2| frac_symbol(k2, theta)),
    )
}

/// The smoothing inverse S_{θ₂} = [I + (−α²Δ)^{θ₂}]^{−1}: per mode gain
/// 1/(1 + (α²|k|²)^{θ₂}).
pub fn fractional_helmholtz_filter(f: &ScalarField, alpha: f64, theta2: f64) -> ScalarField {
    let a2 = alpha * alpha;
    ScalarField::from_hat(
        *f.grid(),
        map_symbol(f.grid(), f.hat(), |k2| {
            1.0 / (1.0 + frac_symbol(a2 * k2, theta2))
        }),
    )
}

#[inline]
fn frac_symbol(k2: f64, theta: f64) -> f64 {
    if k2 == 0.0 {
        if theta == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        k2.powf(theta)
    }
}

/// Zero every mode with any |m_i| beyond the dealias fraction of n/2.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut out = f.clone();
    dealias_hat_in_place(f.grid(), out.hat_mut());
    out
}

/// Vector analogue of [`dealias`].
pub fn dealias_vec(u: &VectorField) -> VectorField {
    let mut out = u.clone();
    for c in 0..3 {
        let grid = *u.grid();
        dealias_hat_in_place(&grid, out.comp_hat_mut(c));
    }
    out
}

pub(crate) fn dealias_hat_in_place(grid: &Grid, hat: &mut Array3<Complex64>) {
    let (nz, ny, nxs) = grid.spec_shape();
    let (keep_x, keep_y, keep_z) = grid.dealias_tables();
    let s = hat.as_slice_mut().expect("standard layout");
    let mut idx = 0;
    for iz in 0..nz {
        for iy in 0..ny {
            let keep_zy = keep_z[iz] && keep_y[iy];
            for ikx in 0..nxs {
                if !(keep_zy && keep_x[ikx]) {
                    s[idx] = Complex64::default();
                }
                idx += 1;
            }
        }
    }
}
