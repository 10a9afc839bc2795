//! Certification of the full pair catalog across the supported parameter
//! matrix, with every expected exponent frozen from independent hand
//! computation in exact arithmetic.

use nlslab_exponents::{catalog_pairs, CatalogReport, Exponent, Rational};

fn fin(n: i64, m: i64) -> Exponent {
    Exponent::finite(n, m)
}

fn report(d: u32, p: &str) -> CatalogReport {
    catalog_pairs(d, &Rational::parse(p).unwrap()).unwrap()
}

fn check_values(report: &CatalogReport, expect: &[(&str, Exponent, Exponent)]) {
    assert_eq!(report.rows.len(), expect.len());
    for (row, (label, q, r)) in report.rows.iter().zip(expect.iter()) {
        assert_eq!(row.label, *label);
        assert_eq!(&row.q, q, "{label} q at d = {}", report.d);
        assert_eq!(&row.r, r, "{label} r at d = {}", report.d);
        assert!(
            row.identity_ok,
            "{label} scaling identity fails at d = {}, p = {}",
            report.d, report.p
        );
    }
    assert!(report.all_identities_hold);
    assert!(report.all_splits_hold);
}

#[test]
fn cubic_three_dimensional_catalog() {
    let r = report(3, "3");
    assert_eq!(r.s, Rational::new(1, 2));
    check_values(
        &r,
        &[
            ("mass-main", fin(9, 1), fin(54, 23)),
            ("critical-main", fin(9, 1), fin(27, 7)),
            ("mass-dual", fin(3, 1), fin(18, 17)),
            ("kato-six", fin(12, 1), fin(18, 5)),
            ("kato-four", fin(8, 1), fin(4, 1)),
            ("mass-aux", fin(6, 1), fin(18, 7)),
            ("critical-dual", fin(24, 7), fin(36, 29)),
        ],
    );
    // Everything is a genuine Lebesgue pair here, and every window holds
    // except the mass-dual conjugates (whose q' = 3/2 undershoots 2).
    for row in &r.rows {
        assert!(row.lebesgue_ok, "{}", row.label);
        assert_eq!(row.window.ok, row.label != "mass-dual", "{}", row.label);
    }
}

#[test]
fn quintic_two_dimensional_catalog() {
    let r = report(2, "5");
    assert_eq!(r.s, Rational::new(1, 2));
    check_values(
        &r,
        &[
            ("mass-main", fin(10, 1), fin(5, 2)),
            ("critical-main", fin(10, 1), fin(20, 3)),
            ("mass-dual", fin(2, 1), fin(1, 1)),
            ("kato-six", fin(12, 1), fin(6, 1)),
            ("kato-four", fin(8, 1), fin(8, 1)),
            ("mass-aux", fin(4, 1), fin(4, 1)),
            ("critical-dual", fin(24, 11), fin(24, 19)),
        ],
    );
    // The mass-dual conjugates land exactly on the excluded (2, inf)
    // endpoint of two space dimensions.
    let mass_dual = r.rows.iter().find(|row| row.label == "mass-dual").unwrap();
    assert!(mass_dual.lebesgue_ok);
    assert!(!mass_dual.window.ok);
    assert!(mass_dual
        .window
        .violations
        .iter()
        .any(|v| v.contains("(2, inf)")));
    let crit_dual = r.rows.iter().find(|row| row.label == "critical-dual").unwrap();
    assert!(crit_dual.window.ok, "critical-dual window holds at d = 2");
}

#[test]
fn septic_one_dimensional_catalog() {
    let r = report(1, "7");
    assert_eq!(r.s, Rational::new(1, 6));
    check_values(
        &r,
        &[
            ("mass-main", fin(21, 1), fin(42, 17)),
            ("critical-main", fin(21, 1), fin(21, 5)),
            ("mass-dual", fin(3, 1), fin(6, 11)),
            ("kato-six", fin(36, 5), fin(18, 1)),
            ("kato-four", fin(24, 5), fin(-12, 1)),
            ("mass-aux", fin(6, 1), fin(6, 1)),
            ("critical-dual", fin(24, 25), fin(4, 1)),
        ],
    );
    // One dimension is where the catalog strains: the kato-four space
    // exponent is negative and the critical-dual time exponent drops below
    // 1. Their scaling identities still hold exactly (checked above); the
    // range flags must make the situation visible.
    for label in ["mass-main", "critical-main", "kato-six", "mass-aux"] {
        let row = r.rows.iter().find(|row| row.label == label).unwrap();
        assert!(row.lebesgue_ok, "{label}");
    }
    let kato_four = r.rows.iter().find(|row| row.label == "kato-four").unwrap();
    assert!(!kato_four.lebesgue_ok);
    assert!(!kato_four.window.ok);
    assert!(kato_four.notes.iter().any(|n| n.contains("Lebesgue")));
    let crit_dual = r.rows.iter().find(|row| row.label == "critical-dual").unwrap();
    assert!(!crit_dual.lebesgue_ok);
    assert!(!crit_dual.window.ok);
    let mass_dual = r.rows.iter().find(|row| row.label == "mass-dual").unwrap();
    assert!(!mass_dual.lebesgue_ok, "r = 6/11 < 1");
    // The kato-six pair sits inside the one-dimensional window, whose upper
    // endpoints are attained at infinity (finite here, so no flag).
    let kato_six = r.rows.iter().find(|row| row.label == "kato-six").unwrap();
    assert!(kato_six.window.ok);
    assert!(!kato_six.window.infinite_endpoint_attained);
}

#[test]
fn four_dimensional_seven_thirds_catalog() {
    let r = report(4, "7/3");
    assert_eq!(r.s, Rational::new(1, 2));
    check_values(
        &r,
        &[
            ("mass-main", fin(28, 3), fin(56, 25)),
            ("critical-main", fin(28, 3), fin(28, 9)),
            ("mass-dual", fin(4, 1), fin(8, 7)),
            ("kato-six", fin(12, 1), fin(3, 1)),
            ("kato-four", fin(8, 1), fin(16, 5)),
            ("mass-aux", fin(8, 1), fin(16, 7)),
            ("critical-dual", fin(72, 17), fin(144, 109)),
        ],
    );
    for label in ["mass-main", "critical-main", "kato-six", "kato-four", "mass-aux"] {
        let row = r.rows.iter().find(|row| row.label == label).unwrap();
        assert!(row.window.ok, "{label} window at d = 4");
    }
    // The critical-dual conjugate time exponent 72/55 falls just below the
    // strict lower endpoint 2/(1+s) = 4/3 here.
    let crit_dual = r.rows.iter().find(|row| row.label == "critical-dual").unwrap();
    assert!(crit_dual.lebesgue_ok);
    assert!(!crit_dual.window.ok);
}

#[test]
fn catalog_is_invariant_under_power_representation() {
    // 7/3 in lowest terms versus scaled representations of the same number.
    let canonical = report(4, "7/3");
    for rep in ["14/6", "70/30", "7000/3000"] {
        let other = report(4, rep);
        assert_eq!(other.s, canonical.s);
        for (a, b) in canonical.rows.iter().zip(other.rows.iter()) {
            assert_eq!(a.q, b.q, "{}", a.label);
            assert_eq!(a.r, b.r, "{}", a.label);
            assert_eq!(a.identity_ok, b.identity_ok);
            assert_eq!(a.window.ok, b.window.ok);
        }
    }
}

#[test]
fn mass_admissible_rows_are_acceptable() {
    // The acceptability lattice contains the mass-admissible family; the
    // catalog's mass-level rows must land inside it in every combination.
    for (d, p) in [(3u32, "3"), (2, "5"), (1, "7"), (4, "7/3")] {
        let r = report(d, p);
        for row in &r.rows {
            if matches!(
                row.claim,
                nlslab_exponents::ClaimedClass::L2Admissible
            ) {
                assert_eq!(row.acceptable, Some(true), "{} at d = {d}", row.label);
            }
        }
    }
}
