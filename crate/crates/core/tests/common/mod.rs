//! Independent oracles and fixtures shared by the integration targets.
#![allow(dead_code)]

use instmatte::matting::{impose_constraints, SolverParams};
use instmatte::raster::{AlphaMatte, BinaryMask, GrayMap, RgbImage, Trimap, TrimapLabel};
use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use rand::Rng;

/// Matting Laplacian assembled densely, window by window, from the textbook
/// expression `δ_ij − (1 + (I_i − μ)ᵀ(Σ + ε/|w|·Id)⁻¹(I_j − μ)) / |w|`,
/// with the inverse applied through an eigendecomposition of `Σ`.
pub fn dense_laplacian(image: &RgbImage, r: usize, eps: f64) -> DMatrix<f64> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let n = w * h;
    let color = |i: usize| {
        let p = image.pixel((i % w) as u32, (i / w) as u32);
        Vector3::new(f64::from(p[0]), f64::from(p[1]), f64::from(p[2])) / 255.0
    };
    let size = ((2 * r + 1) * (2 * r + 1)) as f64;
    let mut l = DMatrix::zeros(n, n);
    for cy in r..h - r {
        for cx in r..w - r {
            let pix: Vec<usize> = (cy - r..=cy + r)
                .flat_map(|y| (cx - r..=cx + r).map(move |x| y * w + x))
                .collect();
            let mu: Vector3<f64> = pix.iter().map(|&i| color(i)).sum::<Vector3<f64>>() / size;
            let mut sigma = Matrix3::zeros();
            for &i in &pix {
                let d = color(i) - mu;
                sigma += d * d.transpose() / size;
            }
            // Spectral form of the regularized inverse.
            let eig = SymmetricEigen::new(sigma);
            let form = |a: Vector3<f64>, b: Vector3<f64>| {
                (0..3)
                    .map(|k| {
                        let v = eig.eigenvectors.column(k);
                        v.dot(&a) * v.dot(&b) / (eig.eigenvalues[k].max(0.0) + eps / size)
                    })
                    .sum::<f64>()
            };
            for &i in &pix {
                for &j in &pix {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    l[(i, j)] += delta - (1.0 + form(color(i) - mu, color(j) - mu)) / size;
                }
            }
        }
    }
    l
}

/// Direct LU solve of `(L + c·D) α = c·b`, clamped and snapped like the
/// backend output.
pub fn dense_alpha(image: &RgbImage, trimap: &Trimap, p: &SolverParams) -> AlphaMatte {
    let mut a = dense_laplacian(image, p.window_radius as usize, p.epsilon);
    let n = a.nrows();
    let mut b = DVector::zeros(n);
    for (i, label) in trimap.labels().iter().enumerate() {
        if *label != TrimapLabel::Unknown {
            a[(i, i)] += p.constraint_weight;
        }
        if *label == TrimapLabel::Foreground {
            b[i] = p.constraint_weight;
        }
    }
    let x = a.lu().solve(&b).expect("penalized system is nonsingular");
    impose_constraints(GrayMap::new(trimap.width(), trimap.height(), x.iter().copied().collect()).unwrap(), trimap)
}

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
}

/// Smooth random image: two random colors mixed along a random direction
/// plus mild noise, closer to natural content than white noise.
pub fn random_scene(rng: &mut impl Rng, w: u32, h: u32) -> RgbImage {
    let c0: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let c1: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let span = f64::from(w.max(h));
    RgbImage::from_fn(w, h, |x, y| {
        let t = ((f64::from(x) * dx + f64::from(y) * dy) / span + 0.5).clamp(0.0, 1.0);
        let mut px = [0u8; 3];
        for c in 0..3 {
            let v = (c0[c] * (1.0 - t) + c1[c] * t) * 235.0 + rng.random_range(0.0..20.0);
            px[c] = v.round().clamp(0.0, 255.0) as u8;
        }
        px
    })
    .unwrap()
}

/// Random trimap with at least one Foreground and one Background pixel.
pub fn random_trimap(rng: &mut impl Rng, w: u32, h: u32) -> Trimap {
    loop {
        let labels = (0..w * h)
            .map(|_| match rng.random_range(0..3) {
                0 => TrimapLabel::Background,
                1 => TrimapLabel::Unknown,
                _ => TrimapLabel::Foreground,
            })
            .collect();
        let t = Trimap::new(w, h, labels).unwrap();
        if t.contains(TrimapLabel::Foreground) && t.contains(TrimapLabel::Background) {
            return t;
        }
    }
}

/// Blob-shaped mask: a union of a few random rectangles.
pub fn random_blob_mask(rng: &mut impl Rng, w: u32, h: u32) -> BinaryMask {
    let rects: Vec<(u32, u32, u32, u32)> = (0..rng.random_range(1..4))
        .map(|_| {
            let rw = rng.random_range(3..=w / 2);
            let rh = rng.random_range(3..=h / 2);
            (rng.random_range(0..=w - rw), rng.random_range(0..=h - rh), rw, rh)
        })
        .collect();
    BinaryMask::from_fn(w, h, |x, y| {
        rects
            .iter()
            .any(|&(x0, y0, rw, rh)| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh)
    })
    .unwrap()
}

/// Left half `a`, right half `b`, split at column `split`.
pub fn two_tone(w: u32, h: u32, split: u32, a: [u8; 3], b: [u8; 3]) -> RgbImage {
    RgbImage::from_fn(w, h, |x, _| if x < split { a } else { b }).unwrap()
}

/// Trimap with Foreground left of `band.0`, Unknown in `band.0..band.1`,
/// Background from `band.1` on.
pub fn column_band_trimap(w: u32, h: u32, band: (u32, u32)) -> Trimap {
    let labels = (0..w * h)
        .map(|i| {
            let x = i % w;
            if x < band.0 {
                TrimapLabel::Foreground
            } else if x < band.1 {
                TrimapLabel::Unknown
            } else {
                TrimapLabel::Background
            }
        })
        .collect();
    Trimap::new(w, h, labels).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
