//! Closed-form counting for star networks: one center attached to each
//! leaf by a single edge.
//!
//! A configuration of a star is determined by the residual `a_v` directed
//! from the center toward each leaf `v`; the center's score is the sum of
//! those residuals and leaf `v` scores `cap_v - a_v`. Distinct
//! configurations of a tree always have distinct score vectors, so class
//! counting reduces to counting lattice points of the box
//! `[0, cap_0] x ... x [0, cap_{n-1}]` by coordinate sum.
//!
//! A payment between two leaves routes through the center and leaves the
//! center's score unchanged, so the classes reachable from any start are
//! exactly the slice of the box with the start's center score. The
//! liquidity of a leaf pair conditioned on a center score is therefore a
//! ratio of two slice counts.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::big_ratio;
use crate::error::{Error, Result};

/// Multiplies a counting polynomial by `1 + x + ... + x^cap`.
fn convolve_ones(poly: &[BigUint], cap: u64) -> Vec<BigUint> {
    let cap = cap as usize;
    let mut out = vec![BigUint::zero(); poly.len() + cap];
    for (i, c) in poly.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for t in 0..=cap {
            out[i + t] += c;
        }
    }
    out
}

/// Number of classes of the star with the given leaf capacities, indexed
/// by center score. Entry `k` counts the score vectors whose center score
/// is exactly `k`; the vector has length `sum(caps) + 1`.
pub fn star_class_counts(caps: &[u64]) -> Vec<BigUint> {
    let mut counts = vec![BigUint::one()];
    for &cap in caps {
        counts = convolve_ones(&counts, cap);
    }
    counts
}

/// Exact liquidity of the ordered leaf pair `(payer, payee)` over the
/// classes whose center score is `center_score`.
///
/// The payment routes payer -> center -> payee; it succeeds when the payer
/// still has a unit to send (`a_payer < cap_payer`) and the center still
/// has a unit toward the payee (`a_payee >= 1`).
pub fn star_liquidity(
    caps: &[u64],
    center_score: u64,
    payer: usize,
    payee: usize,
) -> Result<BigRational> {
    if payer >= caps.len() || payee >= caps.len() {
        return Err(Error::InvalidParams(format!(
            "leaf index out of range for {} leaves",
            caps.len()
        )));
    }
    if payer == payee {
        return Err(Error::InvalidParams(
            "payer and payee must be distinct leaves".into(),
        ));
    }
    let total: u64 = caps.iter().sum();
    if center_score > total {
        return Err(Error::InfeasibleScore {
            score: center_score,
            max: total,
        });
    }
    let rest_caps: Vec<u64> = caps
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != payer && v != payee)
        .map(|(_, &c)| c)
        .collect();
    let rest = star_class_counts(&rest_caps);
    let mut good = BigUint::zero();
    for a_payer in 0..caps[payer] {
        for a_payee in 1..=caps[payee] {
            let used = a_payer + a_payee;
            if used > center_score {
                continue;
            }
            let remaining = (center_score - used) as usize;
            if let Some(c) = rest.get(remaining) {
                good += c;
            }
        }
    }
    let all = star_class_counts(caps)[center_score as usize].clone();
    Ok(big_ratio(good, all))
}

/// Failure probability of a leaf pair over the whole class space of a star
/// (no conditioning on the center score). Leaf residuals are independent
/// and uniform there, so only the two endpoint capacities matter.
pub fn unconstrained_star_failure(cap_payer: u64, cap_payee: u64) -> BigRational {
    let pi = ratio_u(1, cap_payer + 1);
    let pj = ratio_u(1, cap_payee + 1);
    &pi + &pj - pi * pj
}

/// Bounds on the failure probability of a leaf pair conditioned on the
/// balanced center score (half the total capacity): the failure lies in
/// `[lower, upper]` inclusive, with
/// `lower = 2 / (cap_payer + cap_payee + 2)` and
/// `upper = min(1, 4 / (cap_payer + cap_payee))`.
pub fn star_failure_bounds(cap_payer: u64, cap_payee: u64) -> (BigRational, BigRational) {
    let lower = ratio_u(2, cap_payer + cap_payee + 2);
    let upper = if cap_payer + cap_payee <= 4 {
        BigRational::one()
    } else {
        ratio_u(4, cap_payer + cap_payee)
    };
    (lower, upper)
}

fn ratio_u(num: u64, den: u64) -> BigRational {
    big_ratio(BigUint::from(num), BigUint::from(den))
}
