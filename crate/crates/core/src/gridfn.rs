//! Sampled functions on uniform grids and the numerical heat flow.
//!
//! This is the independent numerical route: heat evolution by trapezoid
//! quadrature against a truncated kernel (with an FFT path computing the same
//! discrete sum), grid `L^p` norms with an analytic tail for the slowly
//! decaying counterexample profile, and finite-difference PDE residuals.

use std::f64::consts::{E, LN_10};
use std::fmt;

use libm::erf;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, HeatError, Result};
use crate::exponents::{Exponent, EXPONENT_TOL};
use crate::format::fmt_g17;
use crate::gaussian::{heat_kernel, Gaussian};
use crate::quad::{integrate, integrate_to_infinity};

/// Kernel value cut-off relative to its peak.
pub const KERNEL_CUTOFF: f64 = 1e-16;

/// Largest grid this module will allocate.
pub const MAX_GRID_POINTS: usize = 4_000_000;

/// Smallest `m` with `exp(-m²/4) < 1e-16`; the kernel `Θ_t` is cut at `|x| = m√t`.
pub fn kernel_radius_factor() -> f64 {
    // m² = -4 ln(1e-16) = 64 ln 10
    (64.0 * LN_10).sqrt() * (1.0 + 1e-12)
}

pub fn kernel_radius(t: f64) -> f64 {
    kernel_radius_factor() * t.sqrt()
}

/// One weighted term of a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub spec: FunctionSpec,
}

/// Analytic description of an input profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `a·exp(-(x-μ)²/(4τ))`.
    Gaussian {
        a: f64,
        mu: f64,
        tau: f64,
    },
    /// `Θ_t^β`.
    GaussianPower {
        t: f64,
        beta: f64,
    },
    /// Indicator of `[lo, hi]`.
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `x^{-1/p} / ln²x` on `[e, inf)`, zero elsewhere.
    PowerLogTail {
        p: Exponent,
    },
    Mixture {
        components: Vec<Component>,
    },
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HeatError::InvalidSpec(m));
        match self {
            FunctionSpec::Gaussian { a, mu, tau } => {
                if !(*a > 0.0 && a.is_finite() && mu.is_finite() && tau.is_finite() && *tau != 0.0) {
                    return bad(format!(
                        "gaussian needs a > 0, finite mu, tau != 0 (a={a}, mu={mu}, tau={tau})"
                    ));
                }
            }
            FunctionSpec::GaussianPower { t, beta } => {
                if !(*t > 0.0 && *beta > 0.0 && t.is_finite() && beta.is_finite()) {
                    return bad(format!("gaussian_power needs t > 0 and beta > 0 (t={t}, beta={beta})"));
                }
            }
            FunctionSpec::Indicator { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("indicator needs lo < hi (lo={lo}, hi={hi})"));
                }
            }
            FunctionSpec::PowerLogTail { .. } => {}
            FunctionSpec::Mixture { components } => {
                if components.is_empty() {
                    return bad("mixture needs at least one component".into());
                }
                for c in components {
                    if !c.weight.is_finite() {
                        return bad(format!("mixture weight {} is not finite", c.weight));
                    }
                    c.spec.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Gaussian { .. } | FunctionSpec::GaussianPower { .. } => self
                .as_gaussian()
                .and_then(|g| g.ok())
                .map_or(f64::NAN, |g| g.evaluate(x)),
            FunctionSpec::Indicator { lo, hi } => {
                if *lo <= x && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::PowerLogTail { p } => power_log_tail(*p, x),
            FunctionSpec::Mixture { components } => components.iter().map(|c| c.weight * c.spec.evaluate(x)).sum(),
        }
    }

    /// The closed-form Gaussian behind this spec, if it is one.
    pub fn as_gaussian(&self) -> Option<Result<Gaussian>> {
        match self {
            FunctionSpec::Gaussian { a, mu, tau } => Some(Gaussian::new(*a, *mu, *tau)),
            FunctionSpec::GaussianPower { t, beta } => Some(heat_kernel(*t).and_then(|k| k.power(*beta))),
            _ => None,
        }
    }

    /// Interval outside which the profile is below double precision (or exactly zero).
    pub fn support(&self) -> (f64, f64) {
        let m = kernel_radius_factor();
        match self {
            FunctionSpec::Gaussian { mu, tau, .. } => {
                if *tau > 0.0 {
                    (mu - m * tau.sqrt(), mu + m * tau.sqrt())
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            FunctionSpec::GaussianPower { t, beta } => {
                let r = m * (t / beta).sqrt();
                (-r, r)
            }
            FunctionSpec::Indicator { lo, hi } => (*lo, *hi),
            FunctionSpec::PowerLogTail { .. } => (E, f64::INFINITY),
            FunctionSpec::Mixture { components } => components
                .iter()
                .filter(|c| c.weight != 0.0)
                .map(|c| c.spec.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
                    (a.min(c), b.max(d))
                }),
        }
    }

    /// Shortest length scale on which the profile varies.
    pub fn feature_scale(&self) -> f64 {
        match self {
            FunctionSpec::Gaussian { tau, .. } => tau.abs().sqrt(),
            FunctionSpec::GaussianPower { t, beta } => (t / beta).sqrt(),
            FunctionSpec::Indicator { lo, hi } => hi - lo,
            FunctionSpec::PowerLogTail { .. } => 1.0,
            FunctionSpec::Mixture { components } => components
                .iter()
                .map(|c| c.spec.feature_scale())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            FunctionSpec::Gaussian { .. } | FunctionSpec::GaussianPower { .. } => true,
            FunctionSpec::Indicator { .. } | FunctionSpec::PowerLogTail { .. } => false,
            FunctionSpec::Mixture { components } => {
                components.iter().all(|c| c.weight == 0.0 || c.spec.is_continuous())
            }
        }
    }

    /// A point `c` such that the profile is nonnegative and nonincreasing on `[c, inf)`.
    pub fn monotone_from(&self) -> Option<f64> {
        match self {
            FunctionSpec::Gaussian { mu, tau, .. } if *tau > 0.0 => Some(*mu),
            FunctionSpec::GaussianPower { .. } => Some(0.0),
            FunctionSpec::Indicator { lo, .. } => Some(*lo),
            FunctionSpec::PowerLogTail { .. } => Some(E),
            _ => None,
        }
    }
}

fn power_log_tail(p: Exponent, x: f64) -> f64 {
    if x < E {
        return 0.0;
    }
    let l = x.ln();
    (-p.reciprocal() * l).exp() / (l * l)
}

/// Analytic continuation of a `PowerLogTail` sample beyond the right grid end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailModel {
    pub p: Exponent,
    pub start: f64,
}

impl TailModel {
    pub fn evaluate(&self, x: f64) -> f64 {
        power_log_tail(self.p, x)
    }

    /// `∫_{x0}^{x1} f^s dx` via `u = ln x`: integrand `e^{(1-s/p)u} u^{-2s}`.
    pub fn partial_pow_integral(&self, s: f64, x0: f64, x1: f64) -> Result<f64> {
        pow_integral_between(self.p, s, x0, x1)
    }

    /// `∫_{start}^{inf} f^s dx`; infinite when `s < p`.
    pub fn pow_integral(&self, s: f64) -> Result<f64> {
        pow_integral_to_infinity(self.p, s, self.start)
    }
}

/// Log-substituted integrand `e^{(1-s/p)u} u^{-2s}`.
fn log_integrand(p: Exponent, s: f64, u: f64) -> f64 {
    ((1.0 - s * p.reciprocal()) * u - 2.0 * s * u.ln()).exp()
}

pub(crate) fn pow_integral_between(p: Exponent, s: f64, x0: f64, x1: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return domain(format!("power integral needs finite s >= 1, got {s}"));
    }
    let x0 = x0.max(E);
    if !(x1 > x0) {
        return Ok(0.0);
    }
    let r = integrate(|u| log_integrand(p, s, u), x0.ln(), x1.ln(), 0.0, 1e-14)?;
    Ok(r.value)
}

pub(crate) fn pow_integral_to_infinity(p: Exponent, s: f64, x0: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return domain(format!("power integral needs finite s >= 1, got {s}"));
    }
    let u0 = x0.max(E).ln();
    let growth = 1.0 - s * p.reciprocal();
    if growth.abs() <= EXPONENT_TOL {
        // ∫_{u0}^∞ u^{-2s} du
        return Ok(u0.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0));
    }
    if growth > 0.0 {
        return Ok(f64::INFINITY);
    }
    let r = integrate_to_infinity(|u| log_integrand(p, s, u), u0, 0.0, 1e-14)?;
    Ok(r.value)
}

/// Conditions worth reporting about a computed grid function.
#[derive(Clone, Debug, PartialEq)]
pub enum GridWarning {
    /// Kernel radius exceeds the trusted half-width; no interior point is trustworthy.
    KernelTruncated { radius: f64, half_width: f64 },
    /// Grid spacing too coarse to resolve `Θ_t`.
    Underresolved { h: f64, sqrt_t: f64 },
}

impl fmt::Display for GridWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridWarning::KernelTruncated { radius, half_width } => write!(
                f,
                "truncation: kernel radius {radius} exceeds trusted half-width {half_width}"
            ),
            GridWarning::Underresolved { h, sqrt_t } => {
                write!(f, "under-resolved: spacing {h} is coarse against sqrt(t) = {sqrt_t}")
            }
        }
    }
}

/// Samples on `x_lo + i·h`, `i = 0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    x_lo: f64,
    x_hi: f64,
    samples: Vec<f64>,
    tail: Option<TailModel>,
    trusted: (f64, f64),
    warnings: Vec<GridWarning>,
}

impl GridFunction {
    pub fn from_samples(x_lo: f64, x_hi: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 || !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return domain("grid needs n >= 2 samples and x_lo < x_hi");
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return domain(format!("grid sample {bad} is not finite"));
        }
        Ok(GridFunction {
            x_lo,
            x_hi,
            samples,
            tail: None,
            trusted: (x_lo, x_hi),
            warnings: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn h(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.n() - 1) as f64
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n() {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.h()
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// Interval where values are free of boundary truncation effects.
    pub fn trusted(&self) -> (f64, f64) {
        self.trusted
    }

    pub fn warnings(&self) -> &[GridWarning] {
        &self.warnings
    }

    /// Inclusive index range of nodes inside the trusted interval.
    pub fn trusted_indices(&self) -> Option<(usize, usize)> {
        let h = self.h();
        let slack = 1e-9 * h;
        let lo = ((self.trusted.0 - self.x_lo - slack) / h).ceil().max(0.0) as usize;
        let hi_f = ((self.trusted.1 - self.x_lo + slack) / h).floor();
        if hi_f < 0.0 {
            return None;
        }
        let hi = (hi_f as usize).min(self.n() - 1);
        (lo <= hi).then_some((lo, hi))
    }

    pub fn is_trusted(&self, x: f64) -> bool {
        let slack = 1e-9 * self.h();
        x >= self.trusted.0 - slack && x <= self.trusted.1 + slack
    }

    /// Pointwise difference on an identical grid; trusted windows intersect.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.n() != other.n() || self.x_lo != other.x_lo || self.x_hi != other.x_hi {
            return domain("grid functions live on different grids");
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        let mut warnings = self.warnings.clone();
        warnings.extend(other.warnings.iter().cloned());
        Ok(GridFunction {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            samples,
            tail: None,
            trusted: (self.trusted.0.max(other.trusted.0), self.trusted.1.min(other.trusted.1)),
            warnings,
        })
    }

    /// CSV with header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n() * 48);
        out.push_str("x,value\n");
        for (i, v) in self.samples.iter().enumerate() {
            out.push_str(&fmt_g17(self.x(i)));
            out.push(',');
            out.push_str(&fmt_g17(*v));
            out.push('\n');
        }
        out
    }

    fn trapezoid_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n() {
            0.5 * self.h()
        } else {
            self.h()
        }
    }
}

/// Evaluate `spec` pointwise on `n` uniformly spaced nodes of `[x_lo, x_hi]`.
pub fn sample(spec: &FunctionSpec, x_lo: f64, x_hi: f64, n: usize) -> Result<GridFunction> {
    spec.validate()?;
    if !(x_lo < x_hi) || n < 2 {
        return domain("sampling needs x_lo < x_hi and n >= 2");
    }
    if n > MAX_GRID_POINTS {
        return domain(format!("grid of {n} points exceeds the limit of {MAX_GRID_POINTS}"));
    }
    let h = (x_hi - x_lo) / (n - 1) as f64;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let x = if i + 1 == n { x_hi } else { x_lo + i as f64 * h };
            spec.evaluate(x)
        })
        .collect();
    let mut g = GridFunction::from_samples(x_lo, x_hi, samples)?;
    if let FunctionSpec::PowerLogTail { p } = spec {
        if x_hi >= E {
            g.tail = Some(TailModel { p: *p, start: x_hi });
        }
    }
    Ok(g)
}

/// Grid geometry chosen for evolving a spec up to `t_max` and resolving `t_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPlan {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
}

impl GridPlan {
    /// Pads the spec support by two kernel radii and uses spacing
    /// `min(feature scale, √t_min) / resolution`.
    pub fn for_spec(spec: &FunctionSpec, t_min: f64, t_max: f64, resolution: f64) -> Result<Self> {
        spec.validate()?;
        if !(t_min > 0.0 && t_max >= t_min) || !(resolution > 0.0) {
            return domain("grid plan needs 0 < t_min <= t_max and resolution > 0");
        }
        let (lo, hi) = spec.support();
        if !(lo.is_finite() && hi.is_finite()) {
            return domain("grid plan needs a spec with bounded support");
        }
        let pad = 2.0 * kernel_radius(t_max);
        let mut h = spec.feature_scale().min(t_min.sqrt()) / resolution;
        let mut offset = 0.0;
        if let FunctionSpec::Indicator { lo, hi } = spec {
            // both jumps halfway between nodes, where the trapezoid rule is exact
            let cells = ((hi - lo) / h).ceil();
            h = (hi - lo) / cells;
            offset = 0.5;
        }
        let left_cells = (pad / h).ceil() + offset;
        let x_lo = lo - left_cells * h;
        let n = ((hi + pad - x_lo) / h).ceil() as usize + 1;
        if n > MAX_GRID_POINTS {
            return domain(format!("grid of {n} points exceeds the limit of {MAX_GRID_POINTS}"));
        }
        Ok(GridPlan {
            x_lo,
            x_hi: x_lo + (n - 1) as f64 * h,
            n,
        })
    }

    pub fn sample(&self, spec: &FunctionSpec) -> Result<GridFunction> {
        sample(spec, self.x_lo, self.x_hi, self.n)
    }
}

struct KernelTable {
    radius: f64,
    values: Vec<f64>,
}

impl KernelTable {
    fn new(t: f64, h: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("heat evolution needs t > 0, got {t}"));
        }
        let k = heat_kernel(t)?;
        let radius = kernel_radius(t);
        let m = (radius / h).floor() as usize;
        let values = (0..=m).map(|j| k.evaluate(j as f64 * h)).collect();
        Ok(KernelTable { radius, values })
    }

    fn half_len(&self) -> usize {
        self.values.len() - 1
    }
}

fn evolved_metadata(f: &GridFunction, t: f64, radius: f64) -> ((f64, f64), Vec<GridWarning>) {
    let mut warnings = f.warnings.clone();
    let h = f.h();
    if h > 0.5 * t.sqrt() {
        warnings.push(GridWarning::Underresolved { h, sqrt_t: t.sqrt() });
    }
    let lo = f.trusted.0 + radius;
    let hi = f.trusted.1 - radius;
    if lo > hi {
        warnings.push(GridWarning::KernelTruncated {
            radius,
            half_width: 0.5 * (f.trusted.1 - f.trusted.0),
        });
        ((f.x_lo, f.x_hi), warnings)
    } else {
        ((lo, hi), warnings)
    }
}

/// `f * Θ_t` on the same grid by trapezoid quadrature against the truncated kernel.
///
/// Each output value is summed in ascending node order, so the result does
/// not depend on how output points are split across worker threads.
pub fn heat_evolve(f: &GridFunction, t: f64) -> Result<GridFunction> {
    let h = f.h();
    let kernel = KernelTable::new(t, h)?;
    let m = kernel.half_len();
    let n = f.n();
    let weighted: Vec<f64> = (0..n).map(|j| f.trapezoid_weight(j) * f.samples[j]).collect();
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = i.saturating_sub(m);
            let hi = (i + m).min(n - 1);
            let mut acc = 0.0;
            for (j, w) in weighted.iter().enumerate().take(hi + 1).skip(lo) {
                acc += w * kernel.values[i.abs_diff(j)];
            }
            acc
        })
        .collect();
    let (trusted, warnings) = evolved_metadata(f, t, kernel.radius);
    Ok(GridFunction {
        x_lo: f.x_lo,
        x_hi: f.x_hi,
        samples,
        tail: None,
        trusted,
        warnings,
    })
}

/// Same discrete convolution as [`heat_evolve`], computed with FFTs.
pub fn heat_evolve_fft(f: &GridFunction, t: f64) -> Result<GridFunction> {
    let h = f.h();
    let kernel = KernelTable::new(t, h)?;
    let m = kernel.half_len();
    let n = f.n();
    let size = (n + 2 * m).next_power_of_two();
    let mut a = vec![Complex::new(0.0, 0.0); size];
    for (j, slot) in a.iter_mut().take(n).enumerate() {
        slot.re = f.trapezoid_weight(j) * f.samples[j];
    }
    let mut b = vec![Complex::new(0.0, 0.0); size];
    for (k, slot) in b.iter_mut().take(2 * m + 1).enumerate() {
        slot.re = kernel.values[k.abs_diff(m)];
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    let samples = (0..n).map(|i| a[i + m].re * scale).collect();
    let (trusted, warnings) = evolved_metadata(f, t, kernel.radius);
    Ok(GridFunction {
        x_lo: f.x_lo,
        x_hi: f.x_hi,
        samples,
        tail: None,
        trusted,
        warnings,
    })
}

/// `(f * Θ_t)(x)` at an arbitrary point with the same trapezoid rule.
/// The flag reports whether `x` lies in the trusted window of the result.
pub fn convolve_at(f: &GridFunction, t: f64, x: f64) -> Result<(f64, bool)> {
    if !(t > 0.0) {
        return domain(format!("heat evolution needs t > 0, got {t}"));
    }
    let k = heat_kernel(t)?;
    let radius = kernel_radius(t);
    let h = f.h();
    let n = f.n();
    let lo = (((x - radius - f.x_lo) / h).ceil().max(0.0)) as usize;
    let hi_f = ((x + radius - f.x_lo) / h).floor();
    let mut acc = 0.0;
    if hi_f >= 0.0 {
        let hi = (hi_f as usize).min(n - 1);
        for j in lo..=hi {
            acc += f.trapezoid_weight(j) * f.samples[j] * k.evaluate(x - f.x(j));
        }
    }
    let trusted = x >= f.trusted.0 + radius && x <= f.trusted.1 - radius;
    Ok((acc, trusted))
}

/// Grid `L^p` norm over the trusted window, plus the analytic tail when present.
pub fn lp_norm_grid(f: &GridFunction, p: Exponent) -> f64 {
    let Some((i0, i1)) = f.trusted_indices() else {
        return 0.0;
    };
    let window = &f.samples[i0..=i1];
    let tail = f.tail.filter(|_| i1 + 1 == f.n());
    if p.is_infinite() {
        let sup = grid_sup(window);
        return match tail {
            Some(t) => sup.max(t.evaluate(t.start)),
            None => sup,
        };
    }
    let s = p.value();
    let h = f.h();
    let mut sum = 0.0;
    let last = window.len() - 1;
    for (k, v) in window.iter().enumerate() {
        let w = if k == 0 || k == last { 0.5 * h } else { h };
        sum += w * v.abs().powf(s);
    }
    if let Some(t) = tail {
        match t.pow_integral(s) {
            Ok(extra) => sum += extra,
            Err(_) => return f64::NAN,
        }
    }
    sum.powf(1.0 / s)
}

/// Largest `|v|`, refined between nodes by a parabola through the logs of the
/// top three samples (exact for a Gaussian peak). Flat or kinked tops keep the
/// node maximum.
fn grid_sup(v: &[f64]) -> f64 {
    let (k, top) = v.iter().enumerate().fold(
        (0, 0.0f64),
        |(k, m), (i, x)| if x.abs() > m { (i, x.abs()) } else { (k, m) },
    );
    if k == 0 || k + 1 == v.len() {
        return top;
    }
    let (a, b) = (v[k - 1].abs(), v[k + 1].abs());
    if !(a > 0.0 && b > 0.0) {
        return top;
    }
    let (la, lc, lb) = (a.ln(), top.ln(), b.ln());
    let curvature = la - 2.0 * lc + lb;
    if !(curvature < 0.0) {
        return top;
    }
    let offset = 0.5 * (la - lb) / curvature;
    if offset.abs() > 1.0 {
        return top;
    }
    let refined = (lc - 0.25 * (la - lb) * offset).exp();
    refined.max(top)
}

/// Max of `|u_xx - u_t|` over `window`, with `u` the numerically evolved spec.
pub fn pde_residual(spec: &FunctionSpec, t: f64, window: (f64, f64), h: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || delta >= t {
        return domain(format!("pde residual needs 0 < delta < t (delta={delta}, t={t})"));
    }
    if !(h > 0.0) || !(window.0 < window.1) {
        return domain("pde residual needs h > 0 and a nonempty window");
    }
    spec.validate()?;
    let (slo, shi) = spec.support();
    let lo = if slo.is_finite() { slo.min(window.0) } else { window.0 };
    let hi = if shi.is_finite() { shi.max(window.1) } else { window.1 };
    let pad = 2.0 * kernel_radius(t + delta) + h;
    let x_lo = lo - pad;
    let n = ((hi + pad - x_lo) / h).ceil() as usize + 1;
    let f = sample(spec, x_lo, x_lo + (n - 1) as f64 * h, n)?;
    let before = heat_evolve(&f, t - delta)?;
    let now = heat_evolve(&f, t)?;
    let after = heat_evolve(&f, t + delta)?;
    let mut worst: Option<f64> = None;
    for i in 1..n - 1 {
        let x = f.x(i);
        if x < window.0 || x > window.1 {
            continue;
        }
        if !(before.is_trusted(x) && now.is_trusted(x) && after.is_trusted(x)) {
            continue;
        }
        let u = &now.samples;
        let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        let ut = (after.samples[i] - before.samples[i]) / (2.0 * delta);
        let r = (uxx - ut).abs();
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or_else(|| HeatError::Domain("no trusted grid points inside the residual window".into()))
}

/// `(1/√π) ∫_0^{(x-c)/(2√t)} e^{-y²} dy = erf((x-c)/(2√t)) / 2`.
pub fn monotone_tail_bound_factor(x: f64, c: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("bound factor needs t > 0, got {t}"));
    }
    if x < c {
        return domain(format!("bound factor needs x > c (x={x}, c={c})"));
    }
    Ok(0.5 * erf((x - c) / (2.0 * t.sqrt())))
}

/// Samples of the heat kernel `Θ_t`.
pub fn sampled_heat_kernel(t: f64, x_lo: f64, x_hi: f64, n: usize) -> Result<GridFunction> {
    let k = heat_kernel(t)?;
    let spec = FunctionSpec::Gaussian {
        a: k.amplitude(),
        mu: 0.0,
        tau: t,
    };
    sample(&spec, x_lo, x_hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::alpha;
    use std::f64::consts::PI;

    fn gauss(a: f64, mu: f64, tau: f64) -> FunctionSpec {
        FunctionSpec::Gaussian { a, mu, tau }
    }

    /// Indicator of [lo, hi] convolved with Θ_t, via erf.
    fn indicator_heat(lo: f64, hi: f64, t: f64, x: f64) -> f64 {
        let s = 2.0 * t.sqrt();
        0.5 * (erf((x - lo) / s) - erf((x - hi) / s))
    }

    #[test]
    fn kernel_radius_is_minimal() {
        let m = kernel_radius_factor();
        assert!((-m * m / 4.0).exp() < 1e-16);
        assert!((-(m - 1e-6).powi(2) / 4.0).exp() > 1e-16);
        assert!((m - 12.1388).abs() < 1e-3);
    }

    #[test]
    fn spec_json_schema() {
        let s: FunctionSpec = serde_json::from_str(r#"{"kind":"gaussian","a":1.0,"mu":0.5,"tau":2}"#).unwrap();
        assert_eq!(s, gauss(1.0, 0.5, 2.0));
        let s: FunctionSpec = serde_json::from_str(
            r#"{"kind":"mixture","components":[{"weight":-0.5,"spec":{"kind":"indicator","lo":0,"hi":1}},
                {"weight":2,"spec":{"kind":"power_log_tail","p":"inf"}},
                {"weight":1,"spec":{"kind":"gaussian_power","t":1,"beta":2}}]}"#,
        )
        .unwrap();
        s.validate().unwrap();
        let back: FunctionSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"kind":"triangle"}"#).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(FunctionSpec::Indicator { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(gauss(-1.0, 0.0, 1.0).validate().is_err());
        assert!(FunctionSpec::Mixture { components: vec![] }.validate().is_err());
        let m = FunctionSpec::Mixture {
            components: vec![Component {
                weight: f64::NAN,
                spec: gauss(1.0, 0.0, 1.0),
            }],
        };
        assert!(m.validate().is_err());
        assert!(sample(&FunctionSpec::Indicator { lo: 2.0, hi: 1.0 }, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn sampling_examples() {
        let a = 1.0 / (2.0 * PI.sqrt());
        let g = sample(&gauss(a, 0.0, 1.0), -10.0, 10.0, 2001).unwrap();
        let peak = g.samples().iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - a).abs() < 1e-16);
        assert_eq!(g.samples()[1000], peak);

        let ind = sample(&FunctionSpec::Indicator { lo: 0.0, hi: 1.0 }, -1.0, 2.0, 301).unwrap();
        assert!(ind.samples().iter().all(|v| *v == 0.0 || *v == 1.0));

        let tail = FunctionSpec::PowerLogTail { p: Exponent::TWO };
        assert!((tail.evaluate(E) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(tail.evaluate(2.0), 0.0);
        let inf_tail = FunctionSpec::PowerLogTail { p: Exponent::INFINITY };
        assert!((inf_tail.evaluate(E) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_descriptor_matches_samples() {
        let spec = FunctionSpec::PowerLogTail { p: Exponent::TWO };
        let g = sample(&spec, 0.0, 100.0, 10_001).unwrap();
        let t = g.tail().unwrap();
        assert_eq!(t.start, 100.0);
        let last = *g.samples().last().unwrap();
        assert!(((t.evaluate(100.0) - last) / last).abs() < 1e-10);
    }

    #[test]
    fn tail_integrals() {
        // ∫_e^∞ x^{-1} ln^{-4} x dx = 1/3
        let t = TailModel {
            p: Exponent::TWO,
            start: E,
        };
        assert!((t.pow_integral(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(t.pow_integral(1.5).unwrap(), f64::INFINITY);
        // s > p: compare against the plain u-space quadrature
        let v = t.pow_integral(3.0).unwrap();
        let mut acc = 0.0;
        let du = 1e-4;
        let mut u: f64 = 1.0 + du / 2.0;
        while u < 400.0 {
            acc += (-0.5 * u).exp() * u.powi(-6) * du;
            u += du;
        }
        assert!(((v - acc) / acc).abs() < 1e-7, "{v} {acc}");
    }

    #[test]
    fn evolve_semigroup_sampled_kernel() {
        let n = 8001;
        let f = sampled_heat_kernel(1.0, -40.0, 40.0, n).unwrap();
        assert!((f.h() - 0.01).abs() < 1e-15);
        let u = heat_evolve(&f, 1.0).unwrap();
        let k2 = heat_kernel(2.0).unwrap();
        let err = (0..n)
            .map(|i| (u.samples()[i] - k2.evaluate(u.x(i))).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "sup error {err}");
        assert!(u.warnings().is_empty());
    }

    #[test]
    fn evolve_twice_equals_once() {
        let spec = gauss(1.0, 0.3, 0.5);
        let f = sample(&spec, -30.0, 30.0, 6001).unwrap();
        let two = heat_evolve(&heat_evolve(&f, 0.4).unwrap(), 0.6).unwrap();
        let once = heat_evolve(&f, 1.0).unwrap();
        let (i0, i1) = two.trusted_indices().unwrap();
        let err = (i0..=i1)
            .map(|i| (two.samples()[i] - once.samples()[i]).abs())
            .fold(0.0, f64::max);
        assert!(err <= 2e-8, "{err}");
    }

    #[test]
    fn indicator_mollifies_to_one() {
        let spec = FunctionSpec::Indicator { lo: -1.0, hi: 1.0 };
        // jumps halfway between nodes
        let f = sample(&spec, -4.00005, 4.00005, 80_002).unwrap();
        let mut prev_gap = f64::INFINITY;
        for t in [1e-1, 1e-2, 1e-3] {
            let (v, trusted) = convolve_at(&f, t, 0.0).unwrap();
            assert!(trusted);
            let exact = indicator_heat(-1.0, 1.0, t, 0.0);
            assert!((v - exact).abs() < 1e-6, "t={t}: {v} vs {exact}");
            let gap = (1.0 - v).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn fft_path_agrees() {
        for spec in [FunctionSpec::Indicator { lo: -1.0, hi: 2.0 }, gauss(2.0, 1.0, 0.3)] {
            let f = sample(&spec, -15.0, 15.0, 3001).unwrap();
            for t in [0.05, 1.0, 3.0] {
                let a = heat_evolve(&f, t).unwrap();
                let b = heat_evolve_fft(&f, t).unwrap();
                let err = a
                    .samples()
                    .iter()
                    .zip(b.samples())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-8, "t={t}: {err}");
                assert_eq!(a.trusted(), b.trusted());
            }
        }
    }

    #[test]
    fn convolve_at_matches_nodes() {
        let f = sample(&gauss(1.0, 0.0, 0.2), -10.0, 10.0, 2001).unwrap();
        let u = heat_evolve(&f, 0.5).unwrap();
        for i in [900, 1000, 1100] {
            let (v, _) = convolve_at(&f, 0.5, f.x(i)).unwrap();
            assert!((v - u.samples()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn sup_between_nodes() {
        let spec = gauss(2.0, 0.0137, 0.3);
        let f = sample(&spec, -10.0, 10.0, 201).unwrap();
        assert!((lp_norm_grid(&f, Exponent::INFINITY) - 2.0).abs() < 1e-13);
        let flat = sample(&FunctionSpec::Indicator { lo: -1.0, hi: 1.0 }, -3.0, 3.0, 61).unwrap();
        assert_eq!(lp_norm_grid(&flat, Exponent::INFINITY), 1.0);
    }

    #[test]
    fn grid_norms() {
        let f = sampled_heat_kernel(1.0, -40.0, 40.0, 8001).unwrap();
        assert!((lp_norm_grid(&f, Exponent::ONE) - 1.0).abs() < 1e-8);
        assert!((lp_norm_grid(&f, Exponent::TWO) - alpha(Exponent::TWO)).abs() < 1e-8);
        let ind = sample(&FunctionSpec::Indicator { lo: 0.0, hi: 1.0 }, -1.0, 2.0, 301).unwrap();
        assert_eq!(lp_norm_grid(&ind, Exponent::INFINITY), 1.0);
        assert!((lp_norm_grid(&ind, Exponent::ONE) - 1.01).abs() < 1e-12);
        let spec = FunctionSpec::Indicator { lo: 0.0, hi: 1.0 };
        let planned = GridPlan::for_spec(&spec, 0.01, 0.01, 4.0)
            .unwrap()
            .sample(&spec)
            .unwrap();
        assert!((lp_norm_grid(&planned, Exponent::ONE) - 1.0).abs() < 1e-12);
        assert!((lp_norm_grid(&planned, Exponent::TWO) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tailed_norms() {
        let spec = FunctionSpec::PowerLogTail { p: Exponent::TWO };
        let f = sample(&spec, E, 200.0, 400_001).unwrap();
        let n2 = lp_norm_grid(&f, Exponent::TWO);
        assert!((n2 * n2 - 1.0 / 3.0).abs() < 1e-6, "{}", n2 * n2);
        assert_eq!(lp_norm_grid(&f, "3/2".parse().unwrap()), f64::INFINITY);
        assert!((lp_norm_grid(&f, Exponent::INFINITY) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncation_and_resolution_warnings() {
        let f = sample(&gauss(1.0, 0.0, 1.0), -5.0, 5.0, 101).unwrap();
        let u = heat_evolve(&f, 1.0).unwrap();
        assert!(u
            .warnings()
            .iter()
            .any(|w| matches!(w, GridWarning::KernelTruncated { .. })));
        let u = heat_evolve(&f, 1e-4).unwrap();
        assert!(u
            .warnings()
            .iter()
            .any(|w| matches!(w, GridWarning::Underresolved { .. })));
        assert!(heat_evolve(&f, 0.0).is_err());
    }

    #[test]
    fn residual_small_and_stable() {
        let r1 = pde_residual(&gauss(1.0, 0.0, 1.0), 1.0, (-5.0, 5.0), 0.01, 1e-3).unwrap();
        assert!(r1 <= 1e-4, "{r1}");
        let r2 = pde_residual(&gauss(1.0, 0.0, 1.0), 1.0, (-5.0, 5.0), 0.01, 5e-4).unwrap();
        assert!(r2 <= 2.0 * r1);
        let a = 1.0 / (2.0 * PI.sqrt());
        let rk = pde_residual(&gauss(a, 0.0, 1.0), 1.0, (-5.0, 5.0), 0.01, 1e-3).unwrap();
        assert!(rk <= 1e-4);
        assert!(pde_residual(&gauss(1.0, 0.0, 1.0), 1.0, (-5.0, 5.0), 0.01, 1.0).is_err());
    }

    /// Maclaurin series of erf; converges for all x, used for |x| <= 3.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn bound_factor() {
        let t: f64 = 0.25;
        let f = monotone_tail_bound_factor(1.0 + 2.0 * t.sqrt(), 1.0, t).unwrap();
        assert!(
            (f - erf_series(1.0) / 2.0).abs() < 1e-14,
            "{f} {}",
            erf_series(1.0) / 2.0
        );
        assert!((f - 0.421_350_396_474_857_43).abs() < 1e-15);
        for z in [0.1, 0.5, 1.7, 2.9] {
            let v = monotone_tail_bound_factor(z * 2.0, 0.0, 1.0).unwrap();
            assert!((v - erf_series(z) / 2.0).abs() < 1e-12);
        }
        assert_eq!(monotone_tail_bound_factor(3.0, 3.0, 1.0).unwrap(), 0.0);
        assert!((monotone_tail_bound_factor(1e6, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-16);
        assert!(monotone_tail_bound_factor(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn plan_covers_support() {
        let spec = FunctionSpec::Indicator { lo: 0.0, hi: 1.0 };
        let plan = GridPlan::for_spec(&spec, 0.1, 1.0, 8.0).unwrap();
        let g = plan.sample(&spec).unwrap();
        let h = g.h();
        // both jumps sit halfway between nodes
        for jump in [0.0, 1.0] {
            let cells = (jump - g.x_lo()) / h;
            assert!((cells - cells.floor() - 0.5).abs() < 1e-6);
        }
        assert!(g.x_hi() >= 1.0 + 2.0 * kernel_radius(1.0));
        assert!(g.x_lo() <= -2.0 * kernel_radius(1.0));
        assert!(GridPlan::for_spec(&FunctionSpec::PowerLogTail { p: Exponent::TWO }, 1.0, 1.0, 4.0).is_err());
    }
}
