//! Closed-form Gaussian profiles `x ↦ a·exp(-(x-μ)²/(4τ))`.
//!
//! The width `τ` is the heat-kernel time (variance `2τ`), so the semigroup
//! law is plain width addition. Negative widths are representable because
//! the convolution identity holds for them, but every norm rejects them.
//! Amplitudes are kept as logarithms so extreme powers stay finite.

use std::f64::consts::PI;

use crate::constants::{extremal_beta, ExtremalBeta};
use crate::error::{domain, HeatError, Result};
use crate::exponents::Exponent;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    log_amplitude: f64,
    center: f64,
    width: f64,
}

impl Gaussian {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return domain(format!(
                "Gaussian amplitude must be positive and finite, got {amplitude}"
            ));
        }
        Self::from_log_amplitude(amplitude.ln(), center, width)
    }

    pub fn from_log_amplitude(log_amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !log_amplitude.is_finite() || !center.is_finite() || !width.is_finite() || width == 0.0 {
            return domain(format!(
                "invalid Gaussian (ln a = {log_amplitude}, mu = {center}, tau = {width})"
            ));
        }
        Ok(Gaussian {
            log_amplitude,
            center,
            width,
        })
    }

    /// The heat kernel `Θ_t(x) = exp(-x²/(4t)) / (2√(πt))`.
    pub fn heat_kernel(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("heat kernel needs t > 0, got {t}"));
        }
        Self::from_log_amplitude(-(2.0 * (PI * t).sqrt()).ln(), 0.0, t)
    }

    pub fn amplitude(&self) -> f64 {
        self.log_amplitude.exp()
    }

    pub fn log_amplitude(&self) -> f64 {
        self.log_amplitude
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_normable(&self) -> bool {
        self.width > 0.0
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let d = x - self.center;
        (self.log_amplitude - d * d / (4.0 * self.width)).exp()
    }

    /// Multiply by a positive constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return domain(format!("scale factor must be positive, got {factor}"));
        }
        Self::from_log_amplitude(self.log_amplitude + factor.ln(), self.center, self.width)
    }

    /// Exact convolution; requires `1/τ1 + 1/τ2 > 0`.
    pub fn convolve(&self, other: &Gaussian) -> Result<Self> {
        let curvature = 1.0 / self.width + 1.0 / other.width;
        if !(curvature > 0.0) {
            return Err(HeatError::DivergentConvolution(curvature));
        }
        // a1 a2 · 2√(π τ1τ2/(τ1+τ2)),  τ1τ2/(τ1+τ2) = 1/curvature
        let log_a = self.log_amplitude + other.log_amplitude + std::f64::consts::LN_2 + 0.5 * (PI / curvature).ln();
        Self::from_log_amplitude(log_a, self.center + other.center, self.width + other.width)
    }

    /// Pointwise power `g^β`: amplitude `a^β`, width `τ/β`.
    pub fn power(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return domain(format!("power needs beta > 0, got {beta}"));
        }
        Self::from_log_amplitude(beta * self.log_amplitude, self.center, self.width / beta)
    }

    /// `ln ||g||_p`.
    pub fn log_lp_norm(&self, p: Exponent) -> Result<f64> {
        if !self.is_normable() {
            return Err(HeatError::NonNormable(self.width));
        }
        let b = p.reciprocal();
        if b == 0.0 {
            return Ok(self.log_amplitude);
        }
        // a · (4πτ/p)^{1/(2p)}
        Ok(self.log_amplitude + 0.5 * b * ((4.0 * PI * self.width).ln() + b.ln()))
    }

    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        Ok(self.log_lp_norm(p)?.exp())
    }

    /// `∫ g = a·2√(πτ)`.
    pub fn mass(&self) -> Result<f64> {
        self.lp_norm(Exponent::ONE)
    }
}

pub fn heat_kernel(t: f64) -> Result<Gaussian> {
    Gaussian::heat_kernel(t)
}

/// The extremal input `Θ_t^β`, `β = (1-1/q)/(1-1/p)`, for `1 < p, q < inf`.
pub fn extremal_input(p: Exponent, q: Exponent, t: f64) -> Result<Gaussian> {
    match extremal_beta(p, q)? {
        ExtremalBeta::Finite(beta) => heat_kernel(t)?.power(beta),
        other => Err(HeatError::LimitOnlyExtremizer {
            p: p.to_string(),
            q: q.to_string(),
            beta: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{alpha, decay_exponent};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn heat_kernel_fields() {
        let k = heat_kernel(1.0).unwrap();
        assert!(rel(k.amplitude(), 1.0 / (2.0 * PI.sqrt())) < 1e-15);
        assert_eq!(k.width(), 1.0);
        assert_eq!(k.center(), 0.0);
        assert!(rel(k.evaluate(0.0), 1.0 / (2.0 * PI.sqrt())) < 1e-15);
        assert!(rel(k.evaluate(2.0), 0.103_776_874_355_148_68) < 1e-15);
        for t in [0.1, 1.0, 10.0] {
            assert!((heat_kernel(t).unwrap().mass().unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(heat_kernel(0.0).is_err());
        assert!(heat_kernel(-1.0).is_err());
    }

    #[test]
    fn evaluate_peak_and_symmetry() {
        let g = Gaussian::new(2.5, 1.5, 0.7).unwrap();
        assert!(rel(g.evaluate(1.5), 2.5) < 1e-15);
        for d in [0.1, 1.0, 3.3] {
            assert_eq!(g.evaluate(1.5 + d), g.evaluate(1.5 - d));
        }
    }

    #[test]
    fn semigroup() {
        let two = heat_kernel(1.0).unwrap().convolve(&heat_kernel(1.0).unwrap()).unwrap();
        let expect = heat_kernel(2.0).unwrap();
        assert_eq!(two.width(), 2.0);
        assert_eq!(two.center(), 0.0);
        assert!(rel(two.amplitude(), expect.amplitude()) < 1e-15);
    }

    #[test]
    fn negative_width_convolution() {
        // 1/1 + 1/(-2) > 0: convergent, width -1, amplitude Θ_1(0)·2√(2π) = √2.
        let k = heat_kernel(1.0).unwrap();
        let grow = Gaussian::new(1.0, 0.0, -2.0).unwrap();
        let c = k.convolve(&grow).unwrap();
        assert_eq!(c.width(), -1.0);
        assert!(rel(c.amplitude(), 2f64.sqrt()) < 1e-15);
        assert!(matches!(c.lp_norm(Exponent::TWO), Err(HeatError::NonNormable(_))));

        // heat_kernel(2) with width -1: 1/2 - 1 < 0 diverges.
        let bad = heat_kernel(2.0)
            .unwrap()
            .convolve(&Gaussian::new(1.0, 0.0, -1.0).unwrap());
        assert!(matches!(bad, Err(HeatError::DivergentConvolution(_))));
        let both = Gaussian::new(1.0, 0.0, -1.0).unwrap();
        assert!(matches!(both.convolve(&both), Err(HeatError::DivergentConvolution(_))));
    }

    #[test]
    fn negative_width_matches_quadrature() {
        // ∫ Θ_1(x-y) e^{y²/8} dy at x = 0.7 by a wide trapezoid sum.
        let k = heat_kernel(1.0).unwrap();
        let grow = Gaussian::new(1.0, 0.0, -2.0).unwrap();
        let x = 0.7;
        let h = 1e-3;
        let sum: f64 = (-60_000..=60_000)
            .map(|i| {
                let y = i as f64 * h;
                k.evaluate(x - y) * grow.evaluate(y) * h
            })
            .sum();
        assert!(rel(sum, k.convolve(&grow).unwrap().evaluate(x)) < 1e-12);
    }

    #[test]
    fn powers() {
        let g = Gaussian::new(0.8, -1.0, 3.0).unwrap();
        assert_eq!(g.power(1.0).unwrap(), g);
        let back = g.power(2.0).unwrap().power(0.5).unwrap();
        assert!(rel(back.amplitude(), g.amplitude()) < 1e-15);
        assert_eq!(back.width(), g.width());
        let t = 2.0;
        assert!(rel(heat_kernel(t).unwrap().power(4.0).unwrap().width(), t / 4.0) < 1e-16);
        assert!(g.power(0.0).is_err());
        // huge powers survive in log space
        let big = heat_kernel(1.0).unwrap().power(1e6).unwrap();
        assert!(big.log_amplitude().is_finite());
    }

    #[test]
    fn kernel_norms_match_alpha() {
        for q in ["1", "4/3", "2", "3", "inf"] {
            let q: Exponent = q.parse().unwrap();
            for t in [0.5, 1.0, 4.0] {
                let n = heat_kernel(t).unwrap().lp_norm(q).unwrap();
                let expect = alpha(q) * t.powf(-decay_exponent(q));
                assert!(rel(n, expect) < 1e-13, "q={q} t={t}");
            }
        }
        assert_eq!(
            Gaussian::new(2.0, 5.0, 1.0)
                .unwrap()
                .lp_norm(Exponent::INFINITY)
                .unwrap(),
            2.0
        );
    }

    #[test]
    fn extremal_inputs() {
        let two = Exponent::TWO;
        let f = extremal_input(two, two, 1.5).unwrap();
        let k = heat_kernel(1.5).unwrap();
        assert!(rel(f.amplitude(), k.amplitude()) < 1e-15);
        assert_eq!(f.width(), k.width());
        assert!(matches!(
            extremal_input(Exponent::ONE, two, 1.0),
            Err(HeatError::LimitOnlyExtremizer { .. })
        ));
        assert!(matches!(
            extremal_input(two, Exponent::ONE, 1.0),
            Err(HeatError::LimitOnlyExtremizer { .. })
        ));
    }
}
