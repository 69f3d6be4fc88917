//! One test per acceptance criterion; each prints its PASS/FAIL line.

use heatsharp_core::selftest::{self, counterexample_parts, CriterionOutcome};

fn check(outcome: CriterionOutcome) {
    println!("{outcome}");
    assert!(outcome.passed, "criterion {} failed: {}", outcome.id, outcome.detail);
}

fn line(id: &str, title: &str, passed: bool, detail: String) -> bool {
    println!("{id:>3} {} {title:<24} {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

#[test]
fn criterion_01_semigroup() {
    check(selftest::semigroup());
}

#[test]
fn criterion_02_kernel_norms() {
    check(selftest::kernel_norms());
}

#[test]
fn criterion_03_constant_identity() {
    check(selftest::constant_identity());
}

#[test]
fn criterion_04_contraction_endpoint() {
    check(selftest::contraction_endpoint());
}

#[test]
fn criterion_05_equality_case() {
    check(selftest::equality_case());
}

#[test]
fn criterion_06_inequality_fuzzing() {
    check(selftest::inequality_fuzz());
}

#[test]
fn criterion_07_equality_root() {
    check(selftest::equality_root());
}

#[test]
fn criterion_08_decay_rate() {
    check(selftest::decay_rate());
}

#[test]
fn criterion_09_blowup() {
    check(selftest::blowup());
}

// The p-partial integral misses 1/3 by the tail (ln L)^{-3}/3, about 1.6e-5 at
// L = 1e12, so the 1e-6 threshold cannot be met at that L.
#[test]
fn criterion_10a_p_partial_converges() {
    let c = counterexample_parts().unwrap();
    let ok = line(
        "10a",
        "p-partial convergence",
        c.p_partial_converged,
        format!("|I_2(1e12) - 1/3| = {:.3e}, threshold 1e-6", c.p_partial_gap),
    );
    assert!(ok);
}

#[test]
fn criterion_10b_s_partial_diverges() {
    let c = counterexample_parts().unwrap();
    let ok = line(
        "10b",
        "s-partial divergence",
        c.s_diverges,
        format!("fitted exponent {:.5}, expected 0.25 +- 0.05", c.s_exponent),
    );
    assert!(ok);
}

#[test]
fn criterion_10c_lower_bound() {
    let c = counterexample_parts().unwrap();
    let ok = line(
        "10c",
        "heat-flow lower bound",
        c.lower_bound_ok,
        format!("min ratio over x >= 50: {:.5}", c.min_ratio),
    );
    assert!(ok);
}

#[test]
fn criterion_11_initial_condition() {
    check(selftest::initial_condition());
}

#[test]
fn criterion_12_pde_residual() {
    check(selftest::pde());
}
