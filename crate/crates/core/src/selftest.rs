//! The acceptance matrix: twelve numbered checks with pinned tolerances.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{
    alpha, decay_exponent, equality_residual, extremal_beta, heat_estimate_constant, residual_scan, rhs_identity_check,
};
use crate::error::Result;
use crate::experiments::{
    blowup_ratio, counterexample_lower_bound_check, counterexample_norms, counterexample_p_partials, decay_slope,
    initial_convergence, sharpness_ratio_closed, DecayModulus, GridSharpness, Probe,
};
use crate::exponents::{admissible_pairs, sample_grid, young_r, Exponent};
use crate::fit::{loglog_fit, logspace};
use crate::gaussian::{heat_kernel, Gaussian};
use crate::gridfn::{heat_evolve, kernel_radius, pde_residual, sampled_heat_kernel, Component, FunctionSpec};
use crate::quad::integrate;
use crate::record::Verdict;

/// Seed of the fuzzing stream in criterion 6.
pub const FUZZ_SEED: u64 = 0x5EED_4EA7;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, title: &'static str, result: Result<(bool, String)>) -> Self {
        let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        CriterionOutcome {
            id,
            title,
            passed,
            detail,
        }
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>2} {} {:<24} {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail
        )
    }
}

fn interior(e: Exponent) -> bool {
    !e.is_one() && !e.is_infinite()
}

fn exps(list: &[&str]) -> Vec<Exponent> {
    list.iter().map(|s| s.parse().expect("literal exponent")).collect()
}

const TIMES: [f64; 3] = [0.1, 1.0, 10.0];

/// Closed-form convolution of two unit kernels, and the grid evolution of a sampled one.
pub fn semigroup() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let k1 = heat_kernel(1.0)?;
        let k2 = heat_kernel(2.0)?;
        let c = k1.convolve(&k1)?;
        let amp_gap = (c.log_amplitude() - k2.log_amplitude()).abs();
        let exact = c.width() == k2.width() && c.center() == k2.center() && amp_gap <= 1e-14;

        let n = 8001;
        let f = sampled_heat_kernel(1.0, -40.0, 40.0, n)?;
        let u = heat_evolve(&f, 1.0)?;
        let sup = (0..n)
            .map(|i| (u.samples()[i] - k2.evaluate(u.x(i))).abs())
            .fold(0.0, f64::max);
        Ok((
            exact && sup <= 1e-8,
            format!(
                "log-amplitude gap {amp_gap:.1e}, grid sup error {sup:.2e} (h = {})",
                f.h()
            ),
        ))
    };
    CriterionOutcome::new(1, "semigroup", run())
}

/// `||Θ_t||_q` against `α_q t^{-(1-1/q)/2}`, closed form and by quadrature.
pub fn kernel_norms() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let (mut closed, mut quad) = (0.0f64, 0.0f64);
        for q in exps(&["1", "4/3", "2", "3", "inf"]) {
            for t in TIMES {
                let k = heat_kernel(t)?;
                let expected = alpha(q) * t.powf(-decay_exponent(q));
                closed = closed.max(((k.lp_norm(q)? - expected) / expected).abs());
                let numeric = if q.is_infinite() {
                    k.evaluate(0.0)
                } else {
                    let qv = q.value();
                    let r = kernel_radius(t);
                    integrate(|x| k.evaluate(x).powf(qv), -r, r, 1e-15, 1e-13)?
                        .value
                        .powf(1.0 / qv)
                };
                quad = quad.max(((numeric - expected) / expected).abs());
            }
        }
        Ok((
            closed <= 1e-13 && quad <= 1e-8,
            format!("closed form rel err {closed:.1e}, quadrature rel err {quad:.1e}"),
        ))
    };
    CriterionOutcome::new(2, "kernel norms", run())
}

pub fn constant_identity() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let pairs = admissible_pairs();
        let mut worst = 0.0f64;
        for &(p, q) in &pairs {
            worst = worst.max(rhs_identity_check(&young_r(p, q)?));
        }
        Ok((
            worst <= 1e-12,
            format!("max gap {worst:.1e} over {} pairs", pairs.len()),
        ))
    };
    CriterionOutcome::new(3, "constant identity", run())
}

pub fn contraction_endpoint() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        for p in sample_grid() {
            worst = worst.max((heat_estimate_constant(p, Exponent::ONE)? - 1.0).abs());
        }
        Ok((worst <= 1e-14, format!("max |K(p,1) - 1| = {worst:.1e}")))
    };
    CriterionOutcome::new(4, "contraction endpoint", run())
}

/// `ρ = 1` for `Θ_t^β` at matched time, closed form and on the grid.
pub fn equality_case() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let pairs: Vec<_> = admissible_pairs()
            .into_iter()
            .filter(|(p, q)| interior(*p) && interior(*q))
            .collect();
        let mut closed = 0.0f64;
        let mut grid = 0.0f64;
        for &(p, q) in &pairs {
            let beta = extremal_beta(p, q)?.value();
            for t in TIMES {
                let f = heat_kernel(t)?.power(beta)?;
                closed = closed.max((sharpness_ratio_closed(p, q, &f, t)? - 1.0).abs());
            }
        }
        let grid_rows: Vec<Result<f64>> = pairs
            .par_iter()
            .flat_map_iter(|&(p, q)| {
                TIMES.iter().map(move |&t| {
                    let spec = FunctionSpec::GaussianPower {
                        t,
                        beta: extremal_beta(p, q)?.value(),
                    };
                    GridSharpness::new(&spec, t)?.ratio(p, q)
                })
            })
            .collect();
        for r in grid_rows {
            grid = grid.max((r? - 1.0).abs());
        }
        Ok((
            closed <= 1e-10 && grid <= 1e-4,
            format!(
                "{} pairs: closed form |ρ-1| {closed:.1e}, grid |ρ-1| {grid:.1e}",
                pairs.len()
            ),
        ))
    };
    CriterionOutcome::new(5, "equality case", run())
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let a = rng.random_range(0.1..=10.0);
    let tau = 10f64.powf(rng.random_range(-2.0..=2.0));
    let mu = rng.random_range(-5.0..=5.0);
    (a, mu, tau)
}

/// 200 Gaussians by closed form and 50 mixtures or indicators on the grid.
pub fn fuzz_specs(seed: u64) -> (Vec<Gaussian>, Vec<FunctionSpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussians = (0..200)
        .map(|_| {
            let (a, mu, tau) = random_gaussian(&mut rng);
            Gaussian::new(a, mu, tau).expect("sampled parameters are valid")
        })
        .collect();
    let mut others = Vec::with_capacity(50);
    for i in 0..50 {
        let spec = if i % 3 == 0 {
            let lo = rng.random_range(-3.0..=2.0);
            FunctionSpec::Indicator {
                lo,
                hi: lo + rng.random_range(0.2..=3.0),
            }
        } else {
            let k = rng.random_range(2..=3);
            let components = (0..k)
                .map(|j| {
                    let weight = rng.random_range(0.2..=2.0);
                    let spec = if i % 3 == 2 && j == 0 {
                        let lo = rng.random_range(-2.0..=1.0);
                        FunctionSpec::Indicator {
                            lo,
                            hi: lo + rng.random_range(0.5..=2.0),
                        }
                    } else {
                        FunctionSpec::Gaussian {
                            a: 1.0,
                            mu: rng.random_range(-3.0..=3.0),
                            tau: rng.random_range(0.05..=2.0),
                        }
                    };
                    Component { weight, spec }
                })
                .collect();
            FunctionSpec::Mixture { components }
        };
        others.push(spec);
    }
    (gaussians, others)
}

pub fn inequality_fuzz() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let pairs = admissible_pairs();
        let (gaussians, others) = fuzz_specs(FUZZ_SEED);
        let mut closed = f64::NEG_INFINITY;
        for g in &gaussians {
            for &(p, q) in &pairs {
                for t in TIMES {
                    closed = closed.max(sharpness_ratio_closed(p, q, g, t)?);
                }
            }
        }
        let grid: Vec<Result<f64>> = others
            .par_iter()
            .map(|spec| {
                let g = GridSharpness::new(spec, 1.0)?;
                let mut worst = f64::NEG_INFINITY;
                for &(p, q) in &pairs {
                    worst = worst.max(g.ratio(p, q)?);
                }
                Ok(worst)
            })
            .collect();
        let mut numeric = f64::NEG_INFINITY;
        for r in grid {
            numeric = numeric.max(r?);
        }
        Ok((
            closed <= 1.0 + 1e-6 && numeric <= 1.0 + 1e-6,
            format!(
                "max ρ {closed:.10} over {} Gaussians, {numeric:.6} over {} mixtures/indicators",
                gaussians.len(),
                others.len()
            ),
        ))
    };
    CriterionOutcome::new(6, "inequality fuzzing", run())
}

pub fn equality_root() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        let mut unique = true;
        let mut pairs = 0;
        for (p, q) in admissible_pairs()
            .into_iter()
            .filter(|(p, q)| interior(*p) && interior(*q))
        {
            let triple = young_r(p, q)?;
            let beta = extremal_beta(p, q)?.value();
            worst = worst.max(equality_residual(beta, &triple)?.abs());
            unique &= residual_scan(p, q, 100.0, 2001)?.root_is_unique();
            pairs += 1;
        }
        Ok((
            worst <= 1e-12 && unique,
            format!("{pairs} pairs: max |residual(β*)| {worst:.1e}, single turning point: {unique}"),
        ))
    };
    CriterionOutcome::new(7, "equality-equation root", run())
}

pub fn decay_rate() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let probe = Probe::Extremal { beta: None };
        let mut ok = true;
        let mut parts = Vec::new();
        for (p, q, expected) in [("4/3", "4/3", -0.125), ("1", "inf", -0.5), ("2", "1", 0.0)] {
            let rec = decay_slope(p.parse()?, q.parse()?, &probe, 1.0, 100.0, 9)?;
            let slope = rec.number("slope").unwrap_or(f64::NAN);
            ok &= (slope - expected).abs() <= 1e-3 && rec.verdict == Verdict::Pass;
            parts.push(format!("({p},{q}) {slope:.6}"));
        }
        Ok((ok, parts.join(", ")))
    };
    CriterionOutcome::new(8, "decay rate", run())
}

pub fn blowup() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let ts = logspace(1e-6, 1.0, 13)?;
        let mut ok = true;
        let mut worst_slope = 0.0f64;
        let mut worst_growth = f64::INFINITY;
        let mut pairs = 0;
        for (p, q) in admissible_pairs() {
            let d = decay_exponent(q);
            if d < 0.1 {
                continue;
            }
            let rec = blowup_ratio(p, q, DecayModulus::new(d - 0.1)?, &ts)?;
            let v = rec.values();
            let slope = loglog_fit(&rec.abscissae(), &v)?.slope;
            let growth = v[0] / v[v.len() - 1];
            worst_slope = worst_slope.max((slope + 0.1).abs());
            worst_growth = worst_growth.min(growth);
            ok &= rec.verdict.is_ok();
            pairs += 1;
        }
        let threshold = 0.99 * 10f64.powf(0.6);
        ok &= worst_slope <= 1e-9 && worst_growth >= threshold;
        Ok((
            ok,
            format!("{pairs} pairs: max |slope + 0.1| {worst_slope:.1e}, min ρ_S(1e-6)/ρ_S(1) {worst_growth:.6}"),
        ))
    };
    CriterionOutcome::new(9, "blow-up", run())
}

/// The three parts of criterion 10, reported separately.
#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleParts {
    pub p_partial_gap: f64,
    pub p_partial_converged: bool,
    pub s_exponent: f64,
    pub s_diverges: bool,
    pub min_ratio: f64,
    pub lower_bound_ok: bool,
}

pub fn counterexample_parts() -> Result<CounterexampleParts> {
    let p = Exponent::TWO;
    let ls: Vec<f64> = (1..=12).map(|k| 10f64.powi(k)).collect();
    let partials = counterexample_p_partials(p, &ls)?;
    let gap = partials.number("gap_at_last").unwrap_or(f64::NAN);

    let norms = counterexample_norms(p, "3/2".parse()?, &ls, Some((1e6, 1e12)))?;
    let exponent = norms.number("fitted_exponent").unwrap_or(f64::NAN);

    let xs = [5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    let lower = counterexample_lower_bound_check(p, 1.0, &xs)?;
    let min_ratio = lower
        .rows
        .iter()
        .filter(|r| r.x >= 50.0)
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);

    Ok(CounterexampleParts {
        p_partial_gap: gap,
        p_partial_converged: gap.abs() <= 1e-6,
        s_exponent: exponent,
        s_diverges: norms.verdict == Verdict::Pass,
        min_ratio,
        lower_bound_ok: lower.verdict == Verdict::Pass && min_ratio >= 0.45,
    })
}

pub fn counterexample() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let c = counterexample_parts()?;
        Ok((
            c.p_partial_converged && c.s_diverges && c.lower_bound_ok,
            format!(
                "|I_2(1e12) - 1/3| = {:.2e} (needs 1e-6), s=3/2 exponent {:.4}, min ratio x>=50 {:.4}",
                c.p_partial_gap, c.s_exponent, c.min_ratio
            ),
        ))
    };
    CriterionOutcome::new(10, "counterexample", run())
}

pub fn initial_condition() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let spec = FunctionSpec::Gaussian {
            a: 1.0,
            mu: 0.0,
            tau: 1.0,
        };
        let rec = initial_convergence(&spec, Exponent::TWO, &[1e-1, 1e-2, 1e-3, 1e-4])?;
        let v = rec.values();
        Ok((
            rec.verdict == Verdict::Pass,
            format!(
                "||u_t - f||_2 at t = 1e-4: {:.2e}, at t = 1e-1: {:.2e}",
                v[0],
                v[v.len() - 1]
            ),
        ))
    };
    CriterionOutcome::new(11, "initial condition", run())
}

pub fn pde() -> CriterionOutcome {
    let run = || -> Result<(bool, String)> {
        let spec = FunctionSpec::Gaussian {
            a: 1.0,
            mu: 0.0,
            tau: 1.0,
        };
        let r = pde_residual(&spec, 1.0, (-5.0, 5.0), 0.01, 1e-3)?;
        Ok((r <= 1e-4, format!("max |u_xx - u_t| = {r:.2e}")))
    };
    CriterionOutcome::new(12, "PDE residual", run())
}

/// Every criterion, in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        semigroup(),
        kernel_norms(),
        constant_identity(),
        contraction_endpoint(),
        equality_case(),
        inequality_fuzz(),
        equality_root(),
        decay_rate(),
        blowup(),
        counterexample(),
        initial_condition(),
        pde(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuzz_stream_is_reproducible() {
        assert_eq!(fuzz_specs(7), fuzz_specs(7));
        assert_ne!(fuzz_specs(7).1, fuzz_specs(8).1);
        let (g, o) = fuzz_specs(FUZZ_SEED);
        assert_eq!((g.len(), o.len()), (200, 50));
        assert!(o.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn outcome_line() {
        let o = CriterionOutcome::new(3, "constant identity", Ok((true, "ok".into())));
        assert!(o.to_string().contains("PASS"));
        let e = CriterionOutcome::new(3, "x", Err(crate::error::HeatError::Domain("bad".into())));
        assert!(!e.passed && e.detail.contains("bad"));
    }
}
