//! Dyadic subintervals of `{1, ..., n}`.
//!
//! Locations are 1-based as in the usual definition: interval `(j, l)`
//! covers indices `(l-1) n / 2^j + 1 ..= l n / 2^j`. Everywhere else in the
//! crate signal positions are 0-based, so [`DyadicInterval::range`] returns
//! the 0-based half-open range `(l-1) n / 2^j .. l n / 2^j`.

use std::ops::Range;

use crate::error::{CassError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    scale: u32,
    location: usize,
}

impl DyadicInterval {
    /// Validates `scale <= log2 n` and `1 <= location <= 2^scale`.
    pub fn new(scale: u32, location: usize, n: usize) -> Result<Self> {
        let invalid = CassError::InvalidInterval { scale, location, n };
        if !n.is_power_of_two() || scale > n.trailing_zeros() {
            return Err(invalid);
        }
        if location == 0 || location > 1usize << scale {
            return Err(invalid);
        }
        Ok(DyadicInterval { scale, location })
    }

    pub fn root() -> Self {
        DyadicInterval {
            scale: 0,
            location: 1,
        }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn location(&self) -> usize {
        self.location
    }

    pub fn width(&self, n: usize) -> usize {
        n >> self.scale
    }

    /// 0-based positions covered by the interval.
    pub fn range(&self, n: usize) -> Range<usize> {
        let w = self.width(n);
        (self.location - 1) * w..self.location * w
    }

    /// 1-based indices covered by the interval.
    pub fn indices(&self, n: usize) -> Vec<usize> {
        self.range(n).map(|i| i + 1).collect()
    }

    /// The two halves at the next scale, or `None` at scale `log2 n`.
    pub fn children(&self, n: usize) -> Option<(Self, Self)> {
        if self.scale >= n.trailing_zeros() {
            return None;
        }
        let scale = self.scale + 1;
        Some((
            DyadicInterval {
                scale,
                location: 2 * self.location - 1,
            },
            DyadicInterval {
                scale,
                location: 2 * self.location,
            },
        ))
    }
}

/// Index set of interval `(scale, location)` at dimension `n`, 1-based.
pub fn dyadic_indices(scale: u32, location: usize, n: usize) -> Result<Vec<usize>> {
    Ok(DyadicInterval::new(scale, location, n)?.indices(n))
}
