//! Admissibility and acceptability predicates for space-time exponent pairs,
//! with the per-dimension validity windows of the estimate families they
//! index.

use crate::rational::{Exponent, Rational};
use serde::Serialize;

/// A space-time Lebesgue exponent pair `(q, r)`: time exponent `q`, space
/// exponent `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentPair {
    pub q: Exponent,
    pub r: Exponent,
}

impl ExponentPair {
    pub fn new(q: Exponent, r: Exponent) -> Self {
        ExponentPair { q, r }
    }
}

fn half(d: u32) -> Rational {
    Rational::new(i64::from(d), 2)
}

/// Exact test of `2/q + d/r == d/2 - s`. `s` may be negative (dual-side
/// regularity) or zero (mass level). Pairs with a zero component never match.
pub fn scaling_matches(pair: &ExponentPair, d: u32, s: &Rational) -> bool {
    let (rq, rr) = match (pair.q.reciprocal(), pair.r.reciprocal()) {
        (Some(rq), Some(rr)) => (rq, rr),
        _ => return false,
    };
    let two = Rational::from_int(2);
    let dim = Rational::from_int(i64::from(d));
    &two * &rq + &dim * &rr == &half(d) - s
}

fn within_basic_range(pair: &ExponentPair, d: u32) -> bool {
    let two = Exponent::from_int(2);
    if pair.q < two || pair.r < two {
        return false;
    }
    // The endpoint (q, r) = (2, ∞) fails in two space dimensions.
    !(d == 2 && pair.q == two && pair.r == Exponent::Infinity)
}

/// Mass-level (L²) admissibility: the scaling identity at regularity zero
/// together with `2 ≤ q, r ≤ ∞`, excluding the two-dimensional endpoint
/// `(2, ∞)`.
pub fn is_l2_admissible(pair: &ExponentPair, d: u32) -> bool {
    scaling_matches(pair, d, &Rational::zero()) && within_basic_range(pair, d)
}

/// Result of a validity-window test, with human-readable reasons for any
/// failure and a flag for pairs sitting exactly on an attained infinite
/// endpoint (which only the one-dimensional windows have).
#[derive(Clone, Debug, Serialize)]
pub struct WindowCheck {
    pub ok: bool,
    pub infinite_endpoint_attained: bool,
    pub violations: Vec<String>,
}

impl WindowCheck {
    fn pass(infinite_endpoint_attained: bool) -> Self {
        WindowCheck {
            ok: true,
            infinite_endpoint_attained,
            violations: Vec::new(),
        }
    }

    fn fail(violations: Vec<String>) -> Self {
        WindowCheck {
            ok: false,
            infinite_endpoint_attained: false,
            violations,
        }
    }
}

struct Bound {
    value: Exponent,
    attained: bool,
}

impl Bound {
    fn attained(value: Exponent) -> Self {
        Bound {
            value,
            attained: true,
        }
    }

    fn strict(value: Exponent) -> Self {
        Bound {
            value,
            attained: false,
        }
    }
}

fn check_range(name: &str, x: &Exponent, low: &Bound, high: &Bound, violations: &mut Vec<String>) {
    let low_ok = if low.attained {
        x >= &low.value
    } else {
        x > &low.value
    };
    if !low_ok {
        let rel = if low.attained { "<" } else { "<=" };
        violations.push(format!("{name} = {x} {rel} lower endpoint {}", low.value));
    }
    let high_ok = if high.attained {
        x <= &high.value
    } else {
        x < &high.value
    };
    if !high_ok {
        let rel = if high.attained { ">" } else { ">=" };
        violations.push(format!("{name} = {x} {rel} upper endpoint {}", high.value));
    }
}

fn finite_bound(num: Rational, den: Rational) -> Exponent {
    Exponent::Finite(&num / &den)
}

/// Window of time/space exponents indexing the critical-regularity estimate
/// family at regularity `s ∈ (0, 1)`. Endpoints marked `+`/`-` in the usual
/// statements are strict; plain endpoints (including ∞ when the dimension is
/// one) are attained.
pub fn hs_window(pair: &ExponentPair, d: u32, s: &Rational) -> WindowCheck {
    let one = Rational::one();
    let two = Rational::from_int(2);
    let dim = Rational::from_int(i64::from(d));
    let one_minus_s = &one - s;
    if d == 1 {
        if &two * s >= one {
            return WindowCheck::fail(vec!["window empty: regularity >= 1/2".to_string()]);
        }
    } else if !one_minus_s.is_positive() {
        return WindowCheck::fail(vec!["window empty: regularity >= 1".to_string()]);
    }
    let mut violations = Vec::new();

    match d {
        1 => {
            // Needs s < 1/2, which d/2 - 2/(p-1) guarantees in one dimension.
            let one_minus_2s = &one - &(&two * s);
            let q_low = Bound::attained(finite_bound(Rational::from_int(4), one_minus_2s.clone()));
            let r_low = Bound::attained(finite_bound(two.clone(), one_minus_2s));
            let top = Bound::attained(Exponent::Infinity);
            check_range("q", &pair.q, &q_low, &top, &mut violations);
            check_range("r", &pair.r, &r_low, &top, &mut violations);
            if violations.is_empty() {
                let at_inf = pair.q.is_infinite() || pair.r.is_infinite();
                return WindowCheck::pass(at_inf);
            }
        }
        2 => {
            let q_low = Bound::strict(finite_bound(two.clone(), one_minus_s.clone()));
            let q_high = Bound::attained(Exponent::Infinity);
            // The upper space endpoint is the conjugate of an arbitrarily
            // slight enlargement of the lower one: any finite value works.
            let r_low = Bound::attained(finite_bound(two.clone(), one_minus_s));
            let r_high = Bound::strict(Exponent::Infinity);
            check_range("q", &pair.q, &q_low, &q_high, &mut violations);
            check_range("r", &pair.r, &r_low, &r_high, &mut violations);
            if violations.is_empty() {
                return WindowCheck::pass(false);
            }
        }
        _ => {
            let q_low = Bound::strict(finite_bound(two.clone(), one_minus_s));
            let q_high = Bound::attained(Exponent::Infinity);
            let r_low = Bound::attained(finite_bound(
                &two * &dim,
                &dim - &(&two * s),
            ));
            let r_high = Bound::strict(finite_bound(&two * &dim, &dim - &two));
            check_range("q", &pair.q, &q_low, &q_high, &mut violations);
            check_range("r", &pair.r, &r_low, &r_high, &mut violations);
            if violations.is_empty() {
                return WindowCheck::pass(false);
            }
        }
    }
    WindowCheck::fail(violations)
}

/// Critical-regularity admissibility: the scaling identity at regularity `s`
/// plus the basic range and the per-dimension window above.
pub fn is_hs_admissible(pair: &ExponentPair, d: u32, s: &Rational) -> bool {
    scaling_matches(pair, d, s) && within_basic_range(pair, d) && hs_window(pair, d, s).ok
}

fn conjugate_pair(named: &ExponentPair) -> Option<ExponentPair> {
    Some(ExponentPair::new(
        named.q.conjugate()?,
        named.r.conjugate()?,
    ))
}

/// Window test for a pair named in dual (conjugated) form against the
/// mass-level constraint set: its Hölder conjugates must form a valid
/// mass-level pair.
pub fn dual_l2_window(named: &ExponentPair, d: u32) -> WindowCheck {
    let primal = match conjugate_pair(named) {
        Some(p) => p,
        None => {
            return WindowCheck::fail(vec![
                "a named exponent has no Hölder conjugate".to_string()
            ])
        }
    };
    let mut violations = Vec::new();
    let two = Exponent::from_int(2);
    if primal.q < two || primal.r < two {
        violations.push(format!(
            "conjugate pair ({}, {}) leaves the mass-level range [2, inf]",
            primal.q, primal.r
        ));
    }
    if d == 2 && primal.q == two && primal.r == Exponent::Infinity {
        violations.push(
            "conjugate pair sits at the excluded (2, inf) endpoint in two dimensions".to_string(),
        );
    }
    if violations.is_empty() {
        WindowCheck::pass(false)
    } else {
        WindowCheck::fail(violations)
    }
}

/// Window test for a pair named in dual form against the dual
/// critical-regularity family: its conjugates must land in the dual-side
/// window at regularity `s`.
pub fn dual_hs_window(named: &ExponentPair, d: u32, s: &Rational) -> WindowCheck {
    let primal = match conjugate_pair(named) {
        Some(p) => p,
        None => {
            return WindowCheck::fail(vec![
                "a named exponent has no Hölder conjugate".to_string()
            ])
        }
    };
    if !s.is_positive() {
        return WindowCheck::fail(vec![
            "dual window needs strictly positive regularity".to_string()
        ]);
    }
    let one = Rational::one();
    let two = Rational::from_int(2);
    let dim = Rational::from_int(i64::from(d));
    let mut violations = Vec::new();

    match d {
        1 => {
            let one_plus_2s = &one + &(&two * s);
            let q_low = Bound::attained(finite_bound(two.clone(), one_plus_2s));
            let q_high = Bound::strict(finite_bound(one.clone(), s.clone()));
            let r_low = Bound::strict(finite_bound(two.clone(), &one - s));
            let r_high = Bound::attained(Exponent::Infinity);
            check_range("conjugate q", &primal.q, &q_low, &q_high, &mut violations);
            check_range("conjugate r", &primal.r, &r_low, &r_high, &mut violations);
            if violations.is_empty() {
                return WindowCheck::pass(primal.r.is_infinite());
            }
        }
        2 => {
            let q_low = Bound::strict(finite_bound(two.clone(), &one + s));
            let q_high = Bound::strict(finite_bound(one.clone(), s.clone()));
            let r_low = Bound::strict(finite_bound(two.clone(), &one - s));
            let r_high = Bound::strict(Exponent::Infinity);
            check_range("conjugate q", &primal.q, &q_low, &q_high, &mut violations);
            check_range("conjugate r", &primal.r, &r_low, &r_high, &mut violations);
            if violations.is_empty() {
                return WindowCheck::pass(false);
            }
        }
        _ => {
            let q_low = Bound::strict(finite_bound(two.clone(), &one + s));
            let q_high = Bound::strict(finite_bound(one.clone(), s.clone()));
            let r_low = Bound::strict(finite_bound(&two * &dim, &dim - &(&two * s)));
            let r_high = Bound::strict(finite_bound(&two * &dim, &dim - &two));
            check_range("conjugate q", &primal.q, &q_low, &q_high, &mut violations);
            check_range("conjugate r", &primal.r, &r_low, &r_high, &mut violations);
            if violations.is_empty() {
                return WindowCheck::pass(false);
            }
        }
    }
    WindowCheck::fail(violations)
}

/// Acceptability: `1 ≤ q, r ≤ ∞` with `1/q < d(1/2 - 1/r)`, or the pair
/// `(∞, 2)`. A strictly larger lattice than mass-level admissibility.
pub fn is_acceptable(pair: &ExponentPair, d: u32) -> bool {
    if pair.q == Exponent::Infinity && pair.r == Exponent::from_int(2) {
        return true;
    }
    let one = Exponent::from_int(1);
    if pair.q < one || pair.r < one {
        return false;
    }
    let (rq, rr) = match (pair.q.reciprocal(), pair.r.reciprocal()) {
        (Some(rq), Some(rr)) => (rq, rr),
        _ => return false,
    };
    let dim = Rational::from_int(i64::from(d));
    rq < &dim * &(&Rational::new(1, 2) - &rr)
}
