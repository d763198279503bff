//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p poledec-core --test acceptance -- --nocapture`.

use poledec::runner::verify::{run_criterion, VerifyOptions};

fn check(id: u8) {
    let outcome = run_criterion(id, &VerifyOptions::default()).unwrap();
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_1_pole_ladder_exactness() {
    check(1);
}

#[test]
fn criterion_2_self_energy_width_and_shift() {
    check(2);
}

#[test]
fn criterion_3_offdiagonal_decay_closed_form() {
    check(3);
}

#[test]
fn criterion_4_decoherence_time_scaling() {
    check(4);
}

#[test]
fn criterion_5_relaxation_coincidence() {
    check(5);
}

#[test]
fn criterion_6_mode_extraction_oracle() {
    check(6);
}

#[test]
fn criterion_7_moving_basis_diagonality() {
    check(7);
}

#[test]
fn criterion_8_large_separation_basis_coincidence() {
    check(8);
}

#[test]
fn criterion_9_property_suites() {
    check(9);
}
