//! Orthonormal Haar analysis and synthesis in one and two dimensions, plus
//! synthetic approximately-sparse test signals.
//!
//! Layout after `L` levels on a length-`n` vector: the `n / 2^L`
//! approximation coefficients first, then details from coarsest to finest.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::{CassError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    pub data: Vec<f64>,
    pub levels: usize,
}

impl HaarCoefficients {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_levels(len: usize, levels: Option<usize>) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(CassError::LengthNotPowerOfTwo(len));
    }
    let max = len.trailing_zeros() as usize;
    match levels {
        None => Ok(max),
        Some(l) if l <= max => Ok(l),
        Some(l) => Err(CassError::TooManyLevels { requested: l, max }),
    }
}

fn forward_in_place(buf: &mut [f64], levels: usize, scratch: &mut Vec<f64>) {
    let mut len = buf.len();
    for _ in 0..levels {
        let half = len / 2;
        scratch.clear();
        scratch.resize(len, 0.0);
        for i in 0..half {
            let (a, b) = (buf[2 * i], buf[2 * i + 1]);
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        buf[..len].copy_from_slice(scratch);
        len = half;
    }
}

fn inverse_in_place(buf: &mut [f64], levels: usize, scratch: &mut Vec<f64>) {
    let n = buf.len();
    let mut len = n >> levels;
    for _ in 0..levels {
        let full = len * 2;
        scratch.clear();
        scratch.resize(full, 0.0);
        for i in 0..len {
            let (s, d) = (buf[i], buf[len + i]);
            scratch[2 * i] = (s + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (s - d) * FRAC_1_SQRT_2;
        }
        buf[..full].copy_from_slice(scratch);
        len = full;
    }
}

/// Haar decomposition to `levels` levels (`None` for full depth).
pub fn haar_analyze(x: &[f64], levels: Option<usize>) -> Result<HaarCoefficients> {
    let levels = check_levels(x.len(), levels)?;
    let mut data = x.to_vec();
    forward_in_place(&mut data, levels, &mut Vec::new());
    Ok(HaarCoefficients { data, levels })
}

pub fn haar_synthesize(c: &HaarCoefficients) -> Result<Vec<f64>> {
    let levels = check_levels(c.data.len(), Some(c.levels))?;
    let mut data = c.data.clone();
    inverse_in_place(&mut data, levels, &mut Vec::new());
    Ok(data)
}

/// Separable 2-D transform of a row-major `width x width` grid: every row,
/// then every column, each to `levels` levels.
pub fn haar_analyze_2d(grid: &[f64], width: usize, levels: Option<usize>) -> Result<HaarCoefficients> {
    if grid.len() != width * width {
        return Err(CassError::DimensionMismatch {
            expected: width * width,
            actual: grid.len(),
        });
    }
    let levels = check_levels(width, levels)?;
    let mut data = grid.to_vec();
    apply_2d(&mut data, width, |buf, scratch| forward_in_place(buf, levels, scratch));
    Ok(HaarCoefficients { data, levels })
}

pub fn haar_synthesize_2d(c: &HaarCoefficients, width: usize) -> Result<Vec<f64>> {
    if c.data.len() != width * width {
        return Err(CassError::DimensionMismatch {
            expected: width * width,
            actual: c.data.len(),
        });
    }
    let levels = check_levels(width, Some(c.levels))?;
    let mut data = c.data.clone();
    apply_2d(&mut data, width, |buf, scratch| inverse_in_place(buf, levels, scratch));
    Ok(data)
}

fn apply_2d<F: FnMut(&mut [f64], &mut Vec<f64>)>(data: &mut [f64], width: usize, mut f: F) {
    let mut scratch = Vec::new();
    for row in data.chunks_mut(width) {
        f(row, &mut scratch);
    }
    let mut column = vec![0.0; width];
    for j in 0..width {
        for i in 0..width {
            column[i] = data[i * width + j];
        }
        f(&mut column, &mut scratch);
        for i in 0..width {
            data[i * width + j] = column[i];
        }
    }
}

/// Keeps the `k` largest-magnitude coefficients (ties to the lower index).
pub fn best_k_term(c: &HaarCoefficients, k: usize) -> Result<HaarCoefficients> {
    let n = c.data.len();
    if k > n {
        return Err(CassError::TermCountOutOfRange { k, len: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c.data[b].abs().total_cmp(&c.data[a].abs()).then(a.cmp(&b)));
    let mut data = vec![0.0; n];
    for &i in &order[..k] {
        data[i] = c.data[i];
    }
    Ok(HaarCoefficients {
        data,
        levels: c.levels,
    })
}

/// Piecewise-constant signal on `[0, 1)` with `pieces` random breakpoints.
pub fn piecewise_constant<R: Rng + ?Sized>(n: usize, pieces: usize, rng: &mut R) -> Vec<f64> {
    let mut cuts: Vec<usize> = (0..pieces.saturating_sub(1)).map(|_| rng.gen_range(1..n.max(2))).collect();
    cuts.push(n);
    cuts.sort_unstable();
    let mut x = Vec::with_capacity(n);
    let mut level: f64 = rng.gen();
    for cut in cuts {
        while x.len() < cut.min(n) {
            x.push(level);
        }
        level = rng.gen();
    }
    x
}

/// `width x width` grid on `[0, 1)` built from nested dyadic blocks whose
/// contrast decays like `2^(-decay * scale)`.
pub fn block_grid<R: Rng + ?Sized>(width: usize, decay: f64, rng: &mut R) -> Vec<f64> {
    let mut grid = vec![0.0; width * width];
    let depth = width.trailing_zeros();
    let mut total_weight = 0.0;
    for scale in 0..=depth {
        let block = width >> scale;
        let weight = 2f64.powf(-decay * scale as f64);
        total_weight += weight;
        let per_side = width / block;
        for bi in 0..per_side {
            for bj in 0..per_side {
                let v: f64 = rng.gen::<f64>() * weight;
                for i in bi * block..(bi + 1) * block {
                    for j in bj * block..(bj + 1) * block {
                        grid[i * width + j] += v;
                    }
                }
            }
        }
    }
    // strictly below 1 so values stay in [0, 1)
    let scale = 1.0 / (total_weight * (1.0 + f64::EPSILON));
    grid.iter_mut().for_each(|v| *v *= scale);
    grid
}
