//! The EEC threshold `u_alpha`.

use crate::error::{Error, Result};
use crate::lkc::LkcVector;

use super::ec::{eec, FieldType};

/// Upper end of the search interval.
pub const U_MAX: f64 = 50.0;
/// Lower end of the downward scan.
pub const U_MIN: f64 = -10.0;
const SCAN_STEP: f64 = 0.01;
const TOLERANCE: f64 = 1e-10;

/// The largest `u` with `EEC(u) = alpha`.
///
/// Scans down from [`U_MAX`] until the EEC reaches `alpha`, checking on the
/// way that the EEC never decreases as `u` decreases, then bisects the last
/// scan interval.
pub fn threshold(lkcs: &LkcVector, field: FieldType, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let f = |u: f64| eec(lkcs, field, u);
    let mut hi = U_MAX;
    let mut f_hi = f(hi)?;
    if f_hi >= alpha {
        return Err(Error::Threshold(format!("EEC({U_MAX}) = {f_hi:e} already exceeds alpha = {alpha}")));
    }
    let steps = ((U_MAX - U_MIN) / SCAN_STEP).round() as usize;
    for i in 1..=steps {
        let lo = U_MAX - i as f64 * SCAN_STEP;
        let f_lo = f(lo)?;
        if f_lo < f_hi - 1e-12 * f_hi.abs() {
            return Err(Error::Threshold(format!("EEC is not monotone on [{lo:.2}, {U_MAX}]")));
        }
        if f_lo >= alpha {
            return bisect(&f, lo, hi, alpha);
        }
        hi = lo;
        f_hi = f_lo;
    }
    Err(Error::Threshold(format!(
        "no root of EEC(u) = {alpha} in [{U_MIN}, {U_MAX}]: alpha is too large for these LKCs"
    )))
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, alpha: f64) -> Result<f64> {
    while hi - lo > TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lkc::LkcSource;

    fn lkc(v: &[f64]) -> LkcVector {
        LkcVector::from_values(v.to_vec(), LkcSource::WhiteNoiseTheory).unwrap()
    }

    #[test]
    fn reduces_to_normal_quantile() {
        let u = threshold(&lkc(&[1.0, 0.0, 0.0, 0.0]), FieldType::Gaussian, 0.025).unwrap();
        assert!((u - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn matches_independent_scan() {
        let l = lkc(&[1.0, 55.50]);
        let u = threshold(&l, FieldType::Gaussian, 0.05).unwrap();
        // Oracle: a plain 1e-6 grid scan of the closed-form EEC.
        let g = |u: f64| {
            statrs::distribution::ContinuousCDF::sf(&statrs::distribution::Normal::standard(), u)
                + 55.50 * (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI)
        };
        let mut x: f64 = 5.0;
        while g(x) < 0.05 {
            x -= 1e-6;
        }
        assert!((u - x).abs() < 2e-6, "{u} vs {x}");
    }

    #[test]
    fn round_trip_and_monotone_in_alpha() {
        let cases = [
            (lkc(&[1.0, 33.3, 369.68, 1367.9]), FieldType::Gaussian),
            (lkc(&[1.0, 58.61, 858.72]), FieldType::student_t(49.0).unwrap()),
            (lkc(&[2.0, 87.91, 2576.13, 25163.37]), FieldType::student_t(19.0).unwrap()),
        ];
        for (l, ft) in cases {
            let mut last = f64::NEG_INFINITY;
            for alpha in [0.2, 0.1, 0.05, 0.01, 0.001] {
                let u = threshold(&l, ft, alpha).unwrap();
                assert!((eec(&l, ft, u).unwrap() - alpha).abs() < 1e-7);
                assert!(u > last);
                last = u;
            }
        }
    }

    #[test]
    fn no_root_is_reported() {
        let err = threshold(&lkc(&[0.5]), FieldType::Gaussian, 0.9).unwrap_err();
        assert!(matches!(err, Error::Threshold(_)));
        assert!(threshold(&lkc(&[1.0]), FieldType::Gaussian, 1.5).is_err());
    }
}
