//! Euler-characteristic densities and the expected Euler characteristic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lkc::LkcVector;

/// Marginal family of the field whose excursions are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FieldType {
    Gaussian,
    StudentT { nu: f64 },
}

impl FieldType {
    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu >= 1.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("t-field degrees of freedom must be >= 1, got {nu}")));
        }
        Ok(FieldType::StudentT { nu })
    }

    /// Upper-tail probability of the marginal distribution.
    pub fn survival(&self, u: f64) -> f64 {
        match *self {
            FieldType::Gaussian => Normal::standard().sf(u),
            FieldType::StudentT { nu } => StudentsT::new(0.0, 1.0, nu).expect("nu >= 1").sf(u),
        }
    }
}

/// The EC density `rho_d(u)` for `d <= 3`.
pub fn ec_density(field: FieldType, d: usize, u: f64) -> Result<f64> {
    if d > 3 {
        return Err(Error::UnsupportedOrder(d));
    }
    if d == 0 {
        return Ok(field.survival(u));
    }
    let v = match field {
        FieldType::Gaussian => {
            let hermite = match d {
                1 => 1.0,
                2 => u,
                _ => u * u - 1.0,
            };
            (2.0 * PI).powf(-((d + 1) as f64) / 2.0) * hermite * (-u * u / 2.0).exp()
        }
        FieldType::StudentT { nu } => {
            let tail = (1.0 + u * u / nu).powf(-(nu - 1.0) / 2.0);
            match d {
                1 => tail / (2.0 * PI),
                2 => {
                    let c = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp() / (nu / 2.0).sqrt();
                    (2.0 * PI).powf(-1.5) * c * u * tail
                }
                _ => (2.0 * PI).powi(-2) * ((nu - 1.0) / nu * u * u - 1.0) * tail,
            }
        }
    };
    Ok(v)
}

/// Expected Euler characteristic `sum_d L_d rho_d(u)`.
pub fn eec(lkcs: &LkcVector, field: FieldType, u: f64) -> Result<f64> {
    lkcs.values.iter().enumerate().map(|(d, l)| Ok(l * ec_density(field, d, u)?)).sum()
}
