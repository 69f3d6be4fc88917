//! Sharp constants of the heat-flow estimate
//! `||f * Θ_t||_r <= K_{p,q} ||f||_p t^{-(1-1/q)/2}`.
//!
//! All powers are evaluated in log space with the convention `0·ln 0 = 0`,
//! so the endpoint exponents `1` and `inf` need no special casing.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Result};
use crate::exponents::{young_r, Exponent, YoungTriple};

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
pub(crate) fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln(2√π)`.
fn ln_two_sqrt_pi() -> f64 {
    (2.0 * PI.sqrt()).ln()
}

/// `ln c_p` where `c_p = p^{1/p} / p'^{1/p'}`.
pub fn log_c_constant(p: Exponent) -> f64 {
    let a = p.reciprocal();
    -xlnx(a) + xlnx(1.0 - a)
}

/// `c_p = p^{1/p} / p'^{1/p'}`; `c_1 = c_inf = 1`.
pub fn c_constant(p: Exponent) -> f64 {
    log_c_constant(p).exp()
}

/// `ln α_q`.
pub fn log_alpha(q: Exponent) -> f64 {
    let b = q.reciprocal();
    -(1.0 - b) * ln_two_sqrt_pi() + 0.5 * xlnx(b)
}

/// `α_q = ||Θ_1||_q = 1 / ((2√π)^{1-1/q} q^{1/(2q)})`.
pub fn alpha(q: Exponent) -> f64 {
    log_alpha(q).exp()
}

/// Beckner's sharp Young constant `C_{p,q} = (c_p c_q / c_r)^{1/2}`.
pub fn sharp_young_constant(p: Exponent, q: Exponent) -> Result<f64> {
    let t = young_r(p, q)?;
    Ok(young_constant_of(&t))
}

fn young_constant_of(t: &YoungTriple) -> f64 {
    (0.5 * (log_c_constant(t.p) + log_c_constant(t.q) - log_c_constant(t.r))).exp()
}

/// `K_{p,q} = C_{p,q} α_q`.
pub fn heat_estimate_constant(p: Exponent, q: Exponent) -> Result<f64> {
    let t = young_r(p, q)?;
    Ok((0.5 * (log_c_constant(t.p) + log_c_constant(t.q) - log_c_constant(t.r)) + log_alpha(q)).exp())
}

/// Decay exponent `(1 - 1/q)/2` of `||Θ_t||_q`.
pub fn decay_exponent(q: Exponent) -> f64 {
    0.5 * q.co_reciprocal()
}

/// Exponent `β` for which `Θ_t^β` attains equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtremalBeta {
    /// `β = (1-1/q)/(1-1/p)` for `1 < p, q < inf`.
    Finite(f64),
    /// `q = 1`: equality only in the limit `β -> 0+`.
    ZeroLimit,
    /// `p = 1`: equality only in the limit `β -> inf`.
    InfiniteLimit,
    /// `p = q = 1`: every `β > 0` gives equality.
    Indeterminate,
}

impl ExtremalBeta {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtremalBeta::Finite(b) => Some(b),
            _ => None,
        }
    }

    /// Numeric value, with `0` / `inf` for the limit cases and NaN when indeterminate.
    pub fn value(self) -> f64 {
        match self {
            ExtremalBeta::Finite(b) => b,
            ExtremalBeta::ZeroLimit => 0.0,
            ExtremalBeta::InfiniteLimit => f64::INFINITY,
            ExtremalBeta::Indeterminate => f64::NAN,
        }
    }

    pub fn is_limit_only(self) -> bool {
        !matches!(self, ExtremalBeta::Finite(_))
    }
}

impl fmt::Display for ExtremalBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtremalBeta::Finite(b) => f.write_str(&crate::format::fmt_g17(*b)),
            ExtremalBeta::ZeroLimit => f.write_str("0+"),
            ExtremalBeta::InfiniteLimit => f.write_str("inf"),
            ExtremalBeta::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

pub fn extremal_beta(p: Exponent, q: Exponent) -> Result<ExtremalBeta> {
    young_r(p, q)?;
    Ok(match (p.is_one(), q.is_one()) {
        (true, true) => ExtremalBeta::Indeterminate,
        (true, false) => ExtremalBeta::InfiniteLimit,
        (false, true) => ExtremalBeta::ZeroLimit,
        (false, false) => ExtremalBeta::Finite(q.co_reciprocal() / p.co_reciprocal()),
    })
}

/// Product form `(1-1/p)^{1-1/p} (1-1/q)^{1-1/q} (1-1/r)^{-(1-1/r)}` of the equality equation.
pub fn equality_rhs(t: &YoungTriple) -> f64 {
    (xlnx(t.p.co_reciprocal()) + xlnx(t.q.co_reciprocal()) - xlnx(t.r.co_reciprocal())).exp()
}

/// `β^{1-1/q} (β+1)^{-(1-1/r)} - RHS`. Vanishes exactly at the extremal `β`.
pub fn equality_residual(beta: f64, t: &YoungTriple) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return domain(format!("equality residual needs beta > 0, got {beta}"));
    }
    let a = t.q.co_reciprocal();
    let b = t.r.co_reciprocal();
    let lhs = (a * beta.ln() - b * beta.ln_1p()).exp();
    Ok(lhs - equality_rhs(t))
}

/// `|(c_p c_q / c_r)(α_p α_q / α_r)^2 - product form|`.
pub fn rhs_identity_check(t: &YoungTriple) -> f64 {
    let log_constant_form = log_c_constant(t.p) + log_c_constant(t.q) - log_c_constant(t.r)
        + 2.0 * (log_alpha(t.p) + log_alpha(t.q) - log_alpha(t.r));
    (log_constant_form.exp() - equality_rhs(t)).abs()
}

/// `g(x) = x^A (x+1)^{-B}`.
pub fn g_profile(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("g profile needs x > 0, got {x}"));
    }
    Ok((a * x.ln() - b * x.ln_1p()).exp())
}

/// Location `A/(B-A)` of the unique maximum of `g` for `B > A > 0`.
pub fn g_argmax(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return domain(format!("g has no interior maximum unless B > A > 0 (A = {a}, B = {b})"));
    }
    Ok(a / (b - a))
}

/// Result of scanning the equality residual on a log-spaced `β` grid.
#[derive(Clone, Debug)]
pub struct UniquenessScan {
    pub beta_star: f64,
    pub betas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sign changes of the residual itself. The root is a tangency, so this is 0.
    pub residual_sign_changes: usize,
    /// Sign changes of the discrete slope of the residual (increase then decrease).
    pub slope_sign_changes: usize,
    /// Largest residual among scan points farther than one grid step from `β*`.
    pub max_off_root_residual: f64,
}

impl UniquenessScan {
    /// Exactly one turning point, residual strictly negative away from `β*`.
    pub fn root_is_unique(&self) -> bool {
        self.slope_sign_changes == 1 && self.max_off_root_residual < 0.0
    }
}

fn count_sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Scan `[β*/span, span·β*]` on `n` log-spaced points.
pub fn residual_scan(p: Exponent, q: Exponent, span: f64, n: usize) -> Result<UniquenessScan> {
    let t = young_r(p, q)?;
    let beta_star = match extremal_beta(p, q)? {
        ExtremalBeta::Finite(b) => b,
        other => return domain(format!("no finite extremal beta to scan ({other})")),
    };
    if !(span > 1.0) || n < 3 {
        return domain("scan needs span > 1 and at least 3 points");
    }
    let lo = (beta_star / span).ln();
    let hi = (beta_star * span).ln();
    let step = (hi - lo) / (n - 1) as f64;
    let betas: Vec<f64> = (0..n).map(|i| (lo + step * i as f64).exp()).collect();
    let residuals = betas
        .iter()
        .map(|&b| equality_residual(b, &t))
        .collect::<Result<Vec<_>>>()?;
    let slopes = residuals.windows(2).map(|w| w[1] - w[0]);
    let max_off_root_residual = betas
        .iter()
        .zip(&residuals)
        .filter(|(b, _)| (b.ln() - beta_star.ln()).abs() > step)
        .map(|(_, r)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(UniquenessScan {
        beta_star,
        residual_sign_changes: count_sign_changes(residuals.iter().copied()),
        slope_sign_changes: count_sign_changes(slopes),
        max_off_root_residual,
        betas,
        residuals,
    })
}

/// Every constant attached to an admissible pair `(p, q)`.
#[derive(Clone, Debug)]
pub struct SharpConstants {
    pub triple: YoungTriple,
    pub c_p: f64,
    pub c_q: f64,
    pub c_r: f64,
    pub alpha_q: f64,
    pub young: f64,
    pub heat: f64,
    pub beta: ExtremalBeta,
    pub decay: f64,
}

impl SharpConstants {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        let triple = young_r(p, q)?;
        Ok(SharpConstants {
            c_p: c_constant(p),
            c_q: c_constant(q),
            c_r: c_constant(triple.r),
            alpha_q: alpha(q),
            young: young_constant_of(&triple),
            heat: heat_estimate_constant(p, q)?,
            beta: extremal_beta(p, q)?,
            decay: decay_exponent(q),
            triple,
        })
    }

    /// JSON object `{p,q,r,c_p,c_q,c_r,alpha_q,C,K,beta,decay}` with 17-digit numbers.
    pub fn to_json(&self) -> String {
        use crate::format::fmt_g17 as g;
        let beta = match self.beta {
            ExtremalBeta::Finite(b) => g(b),
            other => format!("\"{other}\""),
        };
        format!(
            "{{\"p\":\"{}\",\"q\":\"{}\",\"r\":\"{}\",\"c_p\":{},\"c_q\":{},\"c_r\":{},\"alpha_q\":{},\"C\":{},\"K\":{},\"beta\":{},\"beta_limit_only\":{},\"decay\":{}}}",
            self.triple.p,
            self.triple.q,
            self.triple.r,
            g(self.c_p),
            g(self.c_q),
            g(self.c_r),
            g(self.alpha_q),
            g(self.young),
            g(self.heat),
            beta,
            self.beta.is_limit_only(),
            g(self.decay),
        )
    }
}
