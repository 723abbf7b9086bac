//! The Gaussian smoothing kernel parametrized by its full width at half maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;

/// Which derivative of the kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Kernel value together with its first and second derivatives in `x`.
///
/// Only the leading `D` entries of `grad` and the leading `D x D` block of
/// `hess` are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelJet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

/// `K(x, v) = prod_d exp(-4 log 2 (x_d - v_d)^2 / f_d^2)`, optionally cut to
/// exact zero beyond a Euclidean radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    fwhm: Vec<f64>,
    #[serde(default)]
    truncation: Option<f64>,
}

impl GaussianKernel {
    /// Anisotropic kernel with one FWHM per axis.
    pub fn new(fwhm: Vec<f64>) -> Result<Self> {
        if fwhm.is_empty() || fwhm.len() > MAX_DIM {
            return Err(Error::Dimension(fwhm.len()));
        }
        if fwhm.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Kernel(format!("FWHM must be positive, got {fwhm:?}")));
        }
        Ok(GaussianKernel { fwhm, truncation: None })
    }

    pub fn isotropic(dim: usize, fwhm: f64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        Self::new(vec![fwhm; dim])
    }

    /// Sets the radius beyond which the kernel is exactly zero.
    ///
    /// The relative error this introduces is bounded by
    /// `exp(-4 log 2 radius^2 / f_max^2)`.
    pub fn with_truncation(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Kernel(format!("truncation radius must be positive, got {radius}")));
        }
        self.truncation = Some(radius);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.fwhm.len()
    }

    pub fn fwhm(&self) -> &[f64] {
        &self.fwhm
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    /// Upper bound on the relative error caused by truncation.
    pub fn truncation_error_bound(&self) -> f64 {
        match self.truncation {
            None => 0.0,
            Some(rho) => {
                let fmax = self.fwhm.iter().copied().fold(0.0, f64::max);
                (-4.0 * std::f64::consts::LN_2 * rho * rho / (fmax * fmax)).exp()
            }
        }
    }

    /// Exponent rate `c_d = 4 log 2 / f_d^2` along axis `d`.
    pub fn rate(&self, d: usize) -> f64 {
        4.0 * std::f64::consts::LN_2 / (self.fwhm[d] * self.fwhm[d])
    }

    /// Gaussian scale `sigma_d^2 = f_d^2 / (8 log 2)`.
    pub fn sigma2(&self, d: usize) -> f64 {
        self.fwhm[d] * self.fwhm[d] / (8.0 * std::f64::consts::LN_2)
    }

    /// The one-dimensional factor along axis `d` or its derivatives, at offset `t`.
    #[inline]
    pub fn axis_factor(&self, d: usize, order: u8, t: f64) -> f64 {
        let c = self.rate(d);
        let k = (-c * t * t).exp();
        match order {
            0 => k,
            1 => -2.0 * c * t * k,
            2 => (4.0 * c * c * t * t - 2.0 * c) * k,
            _ => panic!("kernel derivative order {order} is not supported"),
        }
    }

    /// Whether `v` lies within the truncation radius of `x`.
    #[inline]
    pub fn in_support(&self, x: &[f64], v: &[f64]) -> bool {
        match self.truncation {
            None => true,
            Some(rho) => {
                let d2: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= rho * rho
            }
        }
    }

    pub fn value(&self, x: &[f64], v: &[f64]) -> f64 {
        self.jet(x, v, Order::Value).value
    }

    pub fn gradient(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.jet(x, v, Order::Gradient).grad[..self.dim()].to_vec()
    }

    /// Hessian in `x` as a row-major `D x D` matrix.
    pub fn hessian(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let jet = self.jet(x, v, Order::Hessian);
        (0..dim).flat_map(|a| (0..dim).map(move |b| jet.hess[a][b])).collect()
    }

    /// Evaluates the kernel and its derivatives up to `order`.
    pub fn jet(&self, x: &[f64], v: &[f64], order: Order) -> KernelJet {
        let dim = self.dim();
        debug_assert!(x.len() >= dim && v.len() >= dim);
        let mut jet = KernelJet::default();
        if !self.in_support(&x[..dim], &v[..dim]) {
            return jet;
        }
        let mut t = [0.0; MAX_DIM];
        let mut c = [0.0; MAX_DIM];
        let mut exponent = 0.0;
        for d in 0..dim {
            t[d] = x[d] - v[d];
            c[d] = self.rate(d);
            exponent -= c[d] * t[d] * t[d];
        }
        let k = exponent.exp();
        jet.value = k;
        if order >= Order::Gradient {
            for d in 0..dim {
                jet.grad[d] = -2.0 * c[d] * t[d] * k;
            }
        }
        if order >= Order::Hessian {
            for a in 0..dim {
                for b in 0..dim {
                    jet.hess[a][b] = if a == b {
                        (4.0 * c[a] * c[a] * t[a] * t[a] - 2.0 * c[a]) * k
                    } else {
                        4.0 * c[a] * c[b] * t[a] * t[b] * k
                    };
                }
            }
        }
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn peak_and_half_maximum() {
        let k = GaussianKernel::isotropic(3, 2.5).unwrap();
        let x = [0.3, -1.0, 2.0];
        assert_eq!(k.value(&x, &x), 1.0);
        assert_eq!(k.gradient(&x, &x), vec![0.0; 3]);
        for d in 0..3 {
            let mut y = x;
            y[d] += 1.25;
            assert!((k.value(&x, &y) - 0.5).abs() < 1e-15);
        }
        let iso = GaussianKernel::isotropic(2, 3.0).unwrap();
        let s = 1.5 / 2f64.sqrt();
        assert!((iso.value(&[0.0, 0.0], &[s, s]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_derivative_at_peak() {
        let k = GaussianKernel::isotropic(1, 2.0).unwrap();
        let h = k.hessian(&[0.7], &[0.7])[0];
        assert!((h + 1.386294).abs() < 1e-6);
        let step = 1e-5;
        let fd = (k.value(&[0.7 + step], &[0.7]) - 2.0 + k.value(&[0.7 - step], &[0.7])) / (step * step);
        assert!((fd - h).abs() < 1e-4);
    }

    #[test]
    fn sigma_matches_fwhm() {
        let k = GaussianKernel::new(vec![2.0, 4.0]).unwrap();
        assert!((k.sigma2(0) - 4.0 / (8.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        assert!((k.rate(1) * 2.0 * k.sigma2(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_fwhm() {
        assert!(GaussianKernel::new(vec![0.0]).is_err());
        assert!(GaussianKernel::new(vec![-1.0, 1.0]).is_err());
        assert!(GaussianKernel::new(vec![]).is_err());
        assert!(GaussianKernel::isotropic(1, 1.0).unwrap().with_truncation(0.0).is_err());
    }

    #[test]
    fn truncation_gives_exact_zeros() {
        let k = GaussianKernel::isotropic(2, 3.0).unwrap().with_truncation(2.0).unwrap();
        let jet = k.jet(&[0.0, 0.0], &[2.0, 0.5], Order::Hessian);
        assert_eq!(jet, KernelJet::default());
        assert!(k.value(&[0.0, 0.0], &[2.0, 0.0]) > 0.0);
        assert!(k.truncation_error_bound() > 0.0 && k.truncation_error_bound() < 0.3);
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-3)
    }

    #[test]
    fn derivatives_match_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let step = 1e-5;
        for _ in 0..1000 {
            let dim = rng.random_range(1..=3usize);
            let fwhm: Vec<f64> = (0..dim).map(|_| rng.random_range(1.0..4.0)).collect();
            let k = GaussianKernel::new(fwhm).unwrap();
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = k.gradient(&x, &v);
            let h = k.hessian(&x, &v);
            for d in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[d] += step;
                xm[d] -= step;
                let fd = (k.value(&xp, &v) - k.value(&xm, &v)) / (2.0 * step);
                assert!(rel_err(g[d], fd) <= 1e-6, "grad {} vs {}", g[d], fd);
                let gp = k.gradient(&xp, &v);
                let gm = k.gradient(&xm, &v);
                for e in 0..dim {
                    let fd = (gp[e] - gm[e]) / (2.0 * step);
                    assert!(rel_err(h[d * dim + e], fd) <= 1e-6, "hess {} vs {}", h[d * dim + e], fd);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn depends_only_on_difference(
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            v in proptest::collection::vec(-5.0f64..5.0, 3),
            s in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let k = GaussianKernel::new(vec![1.5, 2.0, 3.0]).unwrap();
            let xs: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
            let vs: Vec<f64> = v.iter().zip(&s).map(|(a, b)| a + b).collect();
            let a = k.jet(&x, &v, Order::Hessian);
            let b = k.jet(&xs, &vs, Order::Hessian);
            prop_assert!((a.value - b.value).abs() <= 1e-12);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((a.hess[i][j] - a.hess[j][i]).abs() <= 1e-15);
                    prop_assert!((a.hess[i][j] - b.hess[i][j]).abs() <= 1e-10);
                }
            }
        }
    }
}
