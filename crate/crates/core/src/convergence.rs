//! Observed convergence orders from error sequences under grid refinement.

use alloc::vec::Vec;
use libm::log;
use serde::{Deserialize, Serialize};

/// `log(e_coarse / e_fine) / log(ratio)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    log(e_coarse / e_fine) / log(ratio)
}

/// Errors measured on a sequence of grids, each `ratio` times finer than the
/// previous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl RefinementStudy {
    pub fn new(h: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = h
            .windows(2)
            .zip(errors.windows(2))
            .map(|(hh, ee)| observed_order(ee[0], ee[1], hh[0] / hh[1]))
            .collect();
        Self { h, errors, orders }
    }

    /// Smallest observed order; `NaN` when fewer than two levels exist.
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::NAN, f64::min)
    }

    pub fn max_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::NAN, f64::max)
    }
}
