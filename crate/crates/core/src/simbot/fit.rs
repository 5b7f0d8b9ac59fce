//! Least-squares polynomial fits for series extrapolation.

use nalgebra::{DMatrix, DVector};

/// A fitted polynomial over ticks, evaluated in the normalized domain
/// `x = 2t/(T-1) - 1` for conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coefficients: Vec<f64>,
    pub num_ticks: u32,
    /// Degree actually used; lower than requested when data is scarce.
    pub degree: usize,
}

fn normalize(t: f64, num_ticks: u32) -> f64 {
    2.0 * t / (num_ticks.max(2) - 1) as f64 - 1.0
}

impl PolyFit {
    pub fn eval(&self, t: f64) -> f64 {
        let x = normalize(t, self.num_ticks);
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Prediction rounded and clamped to the 0..=100 guess range.
    pub fn predict_guess(&self, t: u32) -> u8 {
        self.eval(t as f64).round().clamp(0.0, 100.0) as u8
    }
}

/// Fits `points` (tick, value) with the requested degree, falling back to
/// `distinct ticks - 1` when there are too few points. Returns `None` for an
/// empty point set.
pub fn polyfit(points: &[(u32, f64)], degree: usize, num_ticks: u32) -> Option<PolyFit> {
    let mut ticks: Vec<u32> = points.iter().map(|p| p.0).collect();
    ticks.sort_unstable();
    ticks.dedup();
    if ticks.is_empty() {
        return None;
    }
    let degree = degree.min(ticks.len() - 1);
    let cols = degree + 1;
    let design = DMatrix::from_fn(points.len(), cols, |r, c| {
        normalize(points[r].0 as f64, num_ticks).powi(c as i32)
    });
    let target = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coefficients = design
        .svd(true, true)
        .solve(&target, 1e-12)
        .ok()?
        .iter()
        .copied()
        .collect();
    Some(PolyFit {
        coefficients,
        num_ticks,
        degree,
    })
}
