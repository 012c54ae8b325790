//! Parallel-beam discrete Radon transform.

use std::f64::consts::PI;

use fixpoint_core::Error as CoreError;

use super::sparse::SparseMatrix;
use crate::Result;

/// Largest image side for which the matrix is assembled.
pub const MAX_SIDE: usize = 64;

/// Samples per pixel along each ray.
const SAMPLES_PER_PIXEL: f64 = 2.0;

/// Number of detector bins for an image of the given side.
pub fn detector_count(side: usize) -> usize {
    let d = (std::f64::consts::SQRT_2 * side as f64).ceil() as usize;
    d | 1
}

/// Line-integral matrix for `n_angles` equispaced angles in [0, pi).
///
/// Rows are indexed `angle * detectors + bin`, columns follow row-major pixel order.
/// Each ray is sampled at half-pixel steps and every sample is spread onto the four
/// nearest pixel centres with bilinear weights.
pub fn parallel_beam(side: usize, n_angles: usize) -> Result<SparseMatrix> {
    if !(2..=MAX_SIDE).contains(&side) {
        return Err(CoreError::InvalidParameter {
            name: "image_size",
            value: side as f64,
            reason: "must lie in [2, 64]",
        }
        .into());
    }
    if n_angles == 0 {
        return Err(CoreError::InvalidParameter {
            name: "n_angles",
            value: 0.0,
            reason: "must be >= 1",
        }
        .into());
    }
    let det = detector_count(side);
    let c = (side as f64 - 1.0) / 2.0;
    let dc = (det as f64 - 1.0) / 2.0;
    let half_len = std::f64::consts::SQRT_2 * side as f64 / 2.0 + 1.0;
    let h = 1.0 / SAMPLES_PER_PIXEL;
    let steps = (2.0 * half_len / h).ceil() as usize;

    let mut triplets = Vec::new();
    let mut acc = vec![0.0; side * side];
    let mut touched: Vec<usize> = Vec::new();
    for a in 0..n_angles {
        let theta = PI * a as f64 / n_angles as f64;
        let (s, co) = theta.sin_cos();
        for bin in 0..det {
            let offset = bin as f64 - dc;
            for step in 0..=steps {
                let t = -half_len + step as f64 * h;
                // pixel coordinates: column grows with x, row grows with -y
                let x = offset * co - t * s + c;
                let y = offset * s + t * co;
                let r = c - y;
                spread(x, r, h, side, &mut acc, &mut touched);
            }
            touched.sort_unstable();
            touched.dedup();
            let row = a * det + bin;
            for &p in &touched {
                if acc[p] != 0.0 {
                    triplets.push((row, p, acc[p]));
                }
                acc[p] = 0.0;
            }
            touched.clear();
        }
    }
    Ok(SparseMatrix::from_triplets(n_angles * det, side * side, &triplets))
}

fn spread(x: f64, r: f64, w: f64, side: usize, acc: &mut [f64], touched: &mut Vec<usize>) {
    let (x0, r0) = (x.floor(), r.floor());
    let (fx, fr) = (x - x0, r - r0);
    for (dr, wr) in [(0.0, 1.0 - fr), (1.0, fr)] {
        for (dx, wx) in [(0.0, 1.0 - fx), (1.0, fx)] {
            let (ri, ci) = (r0 + dr, x0 + dx);
            if ri < 0.0 || ci < 0.0 || ri >= side as f64 || ci >= side as f64 {
                continue;
            }
            let weight = w * wr * wx;
            if weight == 0.0 {
                continue;
            }
            let p = ri as usize * side + ci as usize;
            acc[p] += weight;
            touched.push(p);
        }
    }
}
