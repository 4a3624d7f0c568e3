//! Energy gain and empirical rate distributions.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Energy saving of the switching run relative to the all-active run, in percent.
pub fn gain(e_a3: f64, e_csa: f64) -> Result<f64> {
    if !(e_a3 > 0.0) {
        return Err(Error::NonPositiveEnergy(e_a3));
    }
    Ok((e_a3 - e_csa) / e_a3 * 100.0)
}

/// Empirical CDF: sorted samples paired with `i / N` for `i = 1..=N`.
///
/// An empty input yields an empty curve.
pub fn rate_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    cdf_of_sorted(&sorted)
}

/// Same as [`rate_cdf`] for input that is already sorted ascending.
pub fn cdf_of_sorted(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().map(|(i, r)| (*r, (i + 1) as f64 / n)).collect()
}

/// Median of an ascending sample (mean of the middle pair for even sizes).
pub fn median_of_sorted(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
