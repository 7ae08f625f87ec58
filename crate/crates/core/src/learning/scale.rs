use crate::copula::EPS;
use crate::data::{ranks, Dataset, Scale};
use crate::error::{Error, Result};
use crate::numeric::{norm_cdf, norm_quantile};

/// `z = Phi^-1(u)`, with `u` clamped away from 0 and 1.
pub fn to_z_scale(data: &Dataset) -> Result<Dataset> {
    match data.scale() {
        Scale::Z => Ok(data.clone()),
        Scale::U => {
            let cols = data
                .columns()
                .iter()
                .map(|c| c.iter().map(|&u| norm_quantile(u.clamp(EPS, 1.0 - EPS))).collect())
                .collect();
            data.with_columns(cols, Scale::Z)
        }
        Scale::X => to_z_scale(&to_u_scale(data)?),
    }
}

/// Ranks scaled by `1 / (n + 1)` for raw data; `Phi(z)` for normal scores.
pub fn to_u_scale(data: &Dataset) -> Result<Dataset> {
    match data.scale() {
        Scale::U => Ok(data.clone()),
        Scale::X => {
            if data.n() == 0 {
                return Err(Error::invalid("empty dataset"));
            }
            let scale = 1.0 / (data.n() + 1) as f64;
            let cols = data
                .columns()
                .iter()
                .map(|c| ranks(c).into_iter().map(|r| r * scale).collect())
                .collect();
            data.with_columns(cols, Scale::U)
        }
        Scale::Z => {
            let cols = data
                .columns()
                .iter()
                .map(|c| c.iter().map(|&z| norm_cdf(z).clamp(EPS, 1.0 - EPS)).collect())
                .collect();
            data.with_columns(cols, Scale::U)
        }
    }
}
