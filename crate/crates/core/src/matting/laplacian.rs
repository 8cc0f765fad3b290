//! Matting Laplacian built from local color statistics.
//!
//! Every `(2r+1)²` window that fits inside the image contributes, for each
//! pixel pair `(i, j)` in the window,
//!
//! ```text
//! δ_ij − (1 + (I_i − μ)ᵀ (Σ + ε/|w| · Id)⁻¹ (I_j − μ)) / |w|
//! ```
//!
//! where `μ` and `Σ` are the window's color mean and covariance. Colors are
//! normalized to [0, 1].

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::RgbImage;

/// Sparse symmetric matrix over the pixels of a `width × height` raster.
///
/// Row `i` only couples to pixels within `reach` columns and rows of pixel
/// `i`, so each row is stored as a dense `(2·reach+1)²` stencil.
#[derive(Clone, Debug)]
pub struct PixelStencilMatrix {
    width: usize,
    height: usize,
    reach: usize,
    values: Vec<f64>,
}

impl PixelStencilMatrix {
    fn zeros(width: usize, height: usize, reach: usize) -> Self {
        let side = 2 * reach + 1;
        Self {
            width,
            height,
            reach,
            values: vec![0.0; width * height * side * side],
        }
    }

    pub fn dim(&self) -> usize {
        self.width * self.height
    }

    fn side(&self) -> usize {
        2 * self.reach + 1
    }

    /// Slot of `(i, j)` in the stencil storage, or `None` if `j` is out of
    /// reach of `i`.
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (xi, yi) = ((i % self.width) as isize, (i / self.width) as isize);
        let (xj, yj) = ((j % self.width) as isize, (j / self.width) as isize);
        let (dx, dy) = (xj - xi, yj - yi);
        let reach = self.reach as isize;
        if dx.abs() > reach || dy.abs() > reach {
            return None;
        }
        let side = self.side();
        let local = (dy + reach) as usize * side + (dx + reach) as usize;
        Some(i * side * side + local)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry within stencil reach");
        self.values[s] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// Stored entries that are nonzero.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// `out = self · x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        let (w, h, reach) = (self.width as isize, self.height as isize, self.reach as isize);
        let side = self.side();
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let (xi, yi) = ((i as isize) % w, (i as isize) / w);
            let row = &self.values[i * side * side..(i + 1) * side * side];
            let mut acc = 0.0;
            for dy in -reach..=reach {
                let y = yi + dy;
                if y < 0 || y >= h {
                    continue;
                }
                let base = (dy + reach) as usize * side;
                for dx in -reach..=reach {
                    let cx = xi + dx;
                    if cx < 0 || cx >= w {
                        continue;
                    }
                    acc += row[base + (dx + reach) as usize] * x[(y * w + cx) as usize];
                }
            }
            *o = acc;
        });
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// Row-major dense copy. Intended for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = self.get(i, j);
            }
        }
        dense
    }
}

/// Builds the matting Laplacian for `image`.
pub fn build_matting_laplacian(image: &RgbImage, window_radius: u32, epsilon: f64) -> Result<PixelStencilMatrix> {
    if window_radius == 0 {
        return Err(Error::param("window_radius", "must be at least 1"));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let side = 2 * window_radius + 1;
    if image.width() < side || image.height() < side {
        return Err(Error::ImageTooSmall {
            width: image.width(),
            height: image.height(),
            window_radius,
        });
    }

    let (w, h) = (image.width() as usize, image.height() as usize);
    let r = window_radius as usize;
    let win = (2 * r + 1) * (2 * r + 1);
    let win_f = win as f64;
    let mut lap = PixelStencilMatrix::zeros(w, h, 2 * r);

    let colors: Vec<Vector3<f64>> = (0..w * h).map(|i| Vector3::from(image.normalized(i))).collect();
    let mut idx = vec![0usize; win];
    let mut dev = vec![Vector3::zeros(); win];
    let mut proj = vec![Vector3::zeros(); win];

    for cy in r..h - r {
        for cx in r..w - r {
            let mut k = 0;
            for y in cy - r..=cy + r {
                for x in cx - r..=cx + r {
                    idx[k] = y * w + x;
                    k += 1;
                }
            }
            let mean = idx.iter().map(|&i| colors[i]).sum::<Vector3<f64>>() / win_f;
            let mut cov = Matrix3::zeros();
            for (d, &i) in dev.iter_mut().zip(&idx) {
                *d = colors[i] - mean;
                cov += *d * d.transpose();
            }
            cov /= win_f;
            // Near-singular windows (flat or two-tone) make an explicit
            // inverse inaccurate; solving against each deviation is stable.
            let chol = (cov + Matrix3::identity() * (epsilon / win_f))
                .cholesky()
                .expect("regularized covariance is positive definite");
            for (p, d) in proj.iter_mut().zip(&dev) {
                *p = chol.solve(d);
            }
            // Off-diagonal pairs are written to both (a, b) and (b, a) from
            // the same value so the matrix is exactly symmetric.
            for a in 0..win {
                for b in a + 1..win {
                    let v = -(1.0 + dev[a].dot(&proj[b])) / win_f;
                    lap.add(idx[a], idx[b], v);
                    lap.add(idx[b], idx[a], v);
                }
            }
        }
    }

    // Each row sums to zero analytically; set the diagonal from the
    // off-diagonals so it does numerically too.
    let n = w * h;
    for i in 0..n {
        let s = lap.slot(i, i).expect("diagonal slot");
        lap.values[s] = 0.0;
        let stride = lap.side() * lap.side();
        let row_sum: f64 = lap.values[i * stride..(i + 1) * stride].iter().sum();
        lap.values[s] = -row_sum;
    }
    Ok(lap)
}
