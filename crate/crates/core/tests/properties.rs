//! Randomized invariants, 10⁴ cases each (the cusp quotient check 2·10³).

mod common;

use common::MANY;

#[test]
fn reflection_preserves_form_and_is_involution() {
    common::reflection_preserves_form_and_is_involution(MANY).unwrap();
}

#[test]
fn snf_certificate() {
    common::snf_certificate(MANY).unwrap();
}

#[test]
fn disc_group_order_is_abs_det() {
    common::disc_group_order_is_abs_det(MANY).unwrap();
}

#[test]
fn verdict_trichotomy() {
    common::verdict_trichotomy(MANY).unwrap();
}

#[test]
fn tau_gaussian() {
    common::tau_gaussian(MANY).unwrap();
}

#[test]
fn tau_eisenstein() {
    common::tau_eisenstein(MANY).unwrap();
}

#[test]
fn tau_d2() {
    common::tau_d2(MANY).unwrap();
}

#[test]
fn pullback_gaussian() {
    common::pullback_gaussian(MANY).unwrap();
}

#[test]
fn pullback_d2() {
    common::pullback_d2(MANY).unwrap();
}

#[test]
fn pullback_eisenstein() {
    common::pullback_eisenstein(MANY).unwrap();
}

#[test]
fn double_dual_is_identity() {
    common::double_dual_is_identity(MANY).unwrap();
}

#[test]
fn slope_invariant_under_powers() {
    common::slope_invariant_under_powers(MANY).unwrap();
}

#[test]
fn restriction_factor() {
    common::restriction_factor(MANY).unwrap();
}

#[test]
fn quotient_norms_on_random_lifts() {
    common::quotient_norms_on_random_lifts(2_000).unwrap();
}
