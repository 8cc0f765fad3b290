//! Binary dilation and erosion with a Euclidean disk structuring element.
//!
//! Both operations go through an exact squared Euclidean distance transform
//! (lower envelope of parabolas, one pass per axis), so cost is linear in the
//! pixel count regardless of the radius.
//!
//! For erosion, pixels beyond the image frame count as false: a pixel survives
//! only if the whole disk around it lies inside both the mask and the frame.

use crate::raster::BinaryMask;

/// Stand-in for "no site on this line"; large enough that it never passes a
/// radius test but still finite so the envelope arithmetic stays well defined.
const FAR: f64 = 1e20;

/// Squared distance from every pixel to the nearest pixel where `site` holds.
/// Returns `FAR`-sized values when there are no sites.
pub(crate) fn squared_distance_to(width: usize, height: usize, site: impl Fn(usize) -> bool) -> Vec<f64> {
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    let mut grid = vec![0.0; width * height];
    for (i, g) in grid.iter_mut().enumerate() {
        *g = if site(i) { 0.0 } else { FAR };
    }

    // Columns first, then rows.
    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        envelope_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        envelope_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }
    grid
}

fn envelope_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let sq = |q: usize| (q * q) as f64;
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + sq(q)) - (f[p] + sq(p))) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                // z[0] is -inf, so k never underflows here.
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

/// True at every pixel within Euclidean distance `radius` of a true input
/// pixel. `radius == 0` returns the mask unchanged.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 || mask.is_empty() {
        return mask.clone();
    }
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.data();
    let dist = squared_distance_to(w, h, |i| bits[i]);
    let limit = f64::from(radius) * f64::from(radius);
    BinaryMask::new(mask.width(), mask.height(), dist.iter().map(|&d| d <= limit).collect())
        .expect("same dimensions as input")
}

/// Squared depth of every mask pixel: the squared distance to the nearest
/// pixel outside the mask or the frame (0 off the mask). A pixel survives
/// `erode(mask, r)` exactly when its depth exceeds `r²`.
pub(crate) fn squared_depth(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.data();
    let dist = squared_distance_to(w, h, |i| !bits[i]);
    (0..w * h)
        .map(|i| {
            if !bits[i] {
                return 0.0;
            }
            let (x, y) = (i % w, i / w);
            let to_frame = (x + 1).min(y + 1).min(w - x).min(h - y) as f64;
            dist[i].min(to_frame * to_frame)
        })
        .collect()
}

/// Complement of the dilation of the complement, with the outside of the
/// frame belonging to the complement. `radius == 0` returns the mask
/// unchanged.
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let limit = f64::from(radius) * f64::from(radius);
    let data = squared_depth(mask).iter().map(|&d| d > limit).collect();
    BinaryMask::new(mask.width(), mask.height(), data).expect("same dimensions as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct check of every pixel pair.
    fn brute_dilate(mask: &BinaryMask, r: u32) -> BinaryMask {
        let (w, h) = mask.dims();
        let r2 = i64::from(r) * i64::from(r);
        BinaryMask::from_fn(w, h, |x, y| {
            (0..h).any(|sy| {
                (0..w).any(|sx| {
                    let dx = i64::from(x) - i64::from(sx);
                    let dy = i64::from(y) - i64::from(sy);
                    mask.get(sx, sy) && dx * dx + dy * dy <= r2
                })
            })
        })
        .unwrap()
    }

    /// Pads with `pad` false pixels on every side.
    fn pad(mask: &BinaryMask, pad: u32) -> BinaryMask {
        let (w, h) = mask.dims();
        BinaryMask::from_fn(w + 2 * pad, h + 2 * pad, |x, y| {
            x >= pad && y >= pad && x < w + pad && y < h + pad && mask.get(x - pad, y - pad)
        })
        .unwrap()
    }

    fn unpad(mask: &BinaryMask, pad: u32, w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| mask.get(x + pad, y + pad)).unwrap()
    }

    fn random_mask(w: u32, h: u32) -> impl Strategy<Value = BinaryMask> {
        proptest::collection::vec(any::<bool>(), (w * h) as usize)
            .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
    }

    #[test]
    fn single_pixel_radius_one_is_a_plus() {
        let m = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2).unwrap();
        let d = dilate(&m, 1);
        let expected = BinaryMask::from_fn(5, 5, |x, y| {
            let (dx, dy) = (x as i32 - 2, y as i32 - 2);
            dx * dx + dy * dy <= 1
        })
        .unwrap();
        assert_eq!(d, expected);
        assert_eq!(d.count(), 5);
        assert_eq!(d, brute_dilate(&m, 1));
    }

    #[test]
    fn radius_zero_is_identity() {
        let m = BinaryMask::from_fn(6, 4, |x, y| (x + 2 * y) % 3 == 0).unwrap();
        assert_eq!(dilate(&m, 0), m);
        assert_eq!(erode(&m, 0), m);
    }

    #[test]
    fn full_mask_is_fixed_under_dilation() {
        let m = BinaryMask::from_fn(7, 5, |_, _| true).unwrap();
        assert_eq!(dilate(&m, 3), m);
    }

    #[test]
    fn erosion_of_full_mask_respects_frame() {
        let m = BinaryMask::from_fn(7, 7, |_, _| true).unwrap();
        let e = erode(&m, 1);
        let expected = BinaryMask::from_fn(7, 7, |x, y| (1..6).contains(&x) && (1..6).contains(&y)).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn empty_mask_stays_empty() {
        let m = BinaryMask::empty(8, 3).unwrap();
        assert!(dilate(&m, 4).is_empty());
        assert!(erode(&m, 4).is_empty());
    }

    proptest! {
        #[test]
        fn dilation_matches_brute_force(m in random_mask(13, 9), r in 0u32..6) {
            prop_assert_eq!(dilate(&m, r), brute_dilate(&m, r));
        }

        #[test]
        fn dilation_is_monotone(m in random_mask(16, 16), r1 in 0u32..5, extra in 0u32..4) {
            let d1 = dilate(&m, r1);
            let d2 = dilate(&m, r1 + extra);
            prop_assert!(m.is_subset_of(&d1));
            prop_assert!(d1.is_subset_of(&d2));
        }

        #[test]
        fn erosion_is_anti_extensive(m in random_mask(16, 16), r in 0u32..5) {
            prop_assert!(erode(&m, r).is_subset_of(&m));
        }

        // The complement extends past the frame, so compare on a canvas
        // padded wide enough that the frame never matters.
        #[test]
        fn erosion_is_dual_to_dilation(m in random_mask(16, 16), r in 0u32..6) {
            let padded = pad(&m, r + 1);
            let dual = dilate(&padded.complement(), r).complement();
            prop_assert_eq!(erode(&m, r), unpad(&dual, r + 1, 16, 16));
        }
    }
}
