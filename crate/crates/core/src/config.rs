//! Runtime configuration read from the environment.

use crate::error::{GeoError, Result};

/// Environment variable capping the jet order any evaluation may request.
pub const JET_ORDER_ENV: &str = "QGEO_JET_ORDER_MAX";
pub const DEFAULT_JET_ORDER_MAX: usize = 5;
/// Hard ceiling imposed by the precomputed multiplication tables.
pub const HARD_JET_ORDER_MAX: usize = 8;

/// Configured jet budget.
pub fn jet_order_max() -> Result<usize> {
    match std::env::var(JET_ORDER_ENV) {
        Err(_) => Ok(DEFAULT_JET_ORDER_MAX),
        Ok(s) => {
            let v: usize =
                s.trim().parse().map_err(|_| GeoError::Config(format!("{JET_ORDER_ENV}={s:?} is not an integer")))?;
            if v > HARD_JET_ORDER_MAX {
                return Err(GeoError::Config(format!(
                    "{JET_ORDER_ENV}={v} exceeds the supported maximum {HARD_JET_ORDER_MAX}"
                )));
            }
            Ok(v)
        }
    }
}

/// Fails with a configuration error when `order` exceeds the budget.
pub fn check_order(order: usize) -> Result<()> {
    let max = jet_order_max()?;
    if order > max {
        return Err(GeoError::Config(format!("jet order {order} requested but {JET_ORDER_ENV} allows {max}")));
    }
    Ok(())
}

pub(crate) fn table_capacity() -> usize {
    jet_order_max().unwrap_or(DEFAULT_JET_ORDER_MAX).max(6)
}
