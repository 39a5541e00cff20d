//! One test per acceptance criterion. Each prints its PASS/FAIL line.

use std::sync::OnceLock;

use epsoliton::acceptance::AcceptanceContext;
use epsoliton::SolverConfig;

fn context() -> &'static AcceptanceContext {
    static CONTEXT: OnceLock<AcceptanceContext> = OnceLock::new();
    CONTEXT.get_or_init(|| AcceptanceContext::build(&SolverConfig::default()))
}

fn check(id: u8) {
    let outcome = context().criterion(id);
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_1_peak_asymptotics() {
    check(1);
}

#[test]
fn criterion_2_remainder_order() {
    check(2);
}

#[test]
fn criterion_3_profile_approaches_soliton() {
    check(3);
}

#[test]
fn criterion_4_first_integral_conservation() {
    check(4);
}

#[test]
fn criterion_5_tail_rate() {
    check(5);
}

#[test]
fn criterion_6_critical_constants() {
    check(6);
}

#[test]
fn criterion_7_structural_invariants() {
    check(7);
}

#[test]
fn criterion_8_kdv_identity() {
    check(8);
}

#[test]
fn criterion_9_sound_speed_necessity() {
    check(9);
}
