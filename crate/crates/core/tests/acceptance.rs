//! The thirteen acceptance criteria at full size and stated tolerances.
//! Each test writes its PASS/FAIL line straight to stderr so the line shows
//! up even when the harness captures output.

use std::io::Write;

use subfrac::validate::{run_criterion, ValidateOptions};

fn check(id: u8) {
    let r = run_criterion(id, &ValidateOptions::default()).expect("criterion exists");
    let mut err = std::io::stderr().lock();
    writeln!(err, "{}", r.line()).unwrap();
    for d in &r.details {
        writeln!(err, "       {d}").unwrap();
    }
    assert!(r.passed, "criterion {id} failed: {:?}", r.details);
}

#[test]
fn c01_laplace_round_trip() {
    check(1);
}

#[test]
fn c02_half_stable_closed_form() {
    check(2);
}

#[test]
fn c03_potential_convolution() {
    check(3);
}

#[test]
fn c04_inverse_density() {
    check(4);
}

#[test]
fn c05_fourier_oracle() {
    check(5);
}

#[test]
fn c06_integrated_identities() {
    check(6);
}

#[test]
fn c07_conjugate_derivative() {
    check(7);
}

#[test]
fn c08_subordinator_envelope() {
    check(8);
}

#[test]
fn c09_mode_scaling() {
    check(9);
}

#[test]
fn c10_cauchy_envelope() {
    check(10);
}

#[test]
fn c11_gaussian_envelope() {
    check(11);
}

#[test]
fn c12_equation_residual() {
    check(12);
}

#[test]
fn c13_monte_carlo() {
    check(13);
}
