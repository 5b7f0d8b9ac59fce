//! Expiration ticks, optionally correlated with productivity.

use rand::{Rng, RngCore};

use crate::config::{ExpirationBias, MatchConfig};
use crate::error::ConfigError;

/// Draws one expiration tick per robot inside `config.expiration_window`.
///
/// With a productivity bias, sorted uniform slots are handed out in
/// productivity order (ascending for `LateProductive`, descending for
/// `EarlyProductive`) and then jittered by up to a tenth of the window.
pub fn assign_expirations<R: RngCore>(
    rng: &mut R,
    config: &MatchConfig,
    productivities: &[f64],
) -> Result<Vec<u32>, ConfigError> {
    let [lo, hi] = config.expiration_window;
    if hi <= lo {
        return Err(ConfigError::new(
            "expiration_window",
            "window must span more than one tick",
        ));
    }
    let n = productivities.len();
    if config.expiration_bias == ExpirationBias::None {
        return Ok((0..n).map(|_| rng.random_range(lo..=hi)).collect());
    }

    let mut slots: Vec<u32> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    slots.sort_unstable();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| productivities[a].total_cmp(&productivities[b]).then(a.cmp(&b)));
    if config.expiration_bias == ExpirationBias::EarlyProductive {
        order.reverse();
    }

    let jitter = ((hi - lo) / 10) as i64;
    let mut ticks = vec![0u32; n];
    for (slot, robot) in slots.into_iter().zip(order) {
        let shifted = slot as i64 + rng.random_range(-jitter..=jitter);
        ticks[robot] = shifted.clamp(lo as i64, hi as i64) as u32;
    }
    Ok(ticks)
}
