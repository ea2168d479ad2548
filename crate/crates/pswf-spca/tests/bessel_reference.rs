//! Validate the Bessel ladder against a 40-digit reference table.
//!
//! Gates: absolute error ≤ 10⁻¹⁴ everywhere (values below the kernel
//! retention floors contribute nothing downstream); envelope-relative
//! error ≤ 5·10⁻¹⁴·max(1, x/250), where the envelope max(|J|, √(2/πx))
//! keeps points adjacent to Bessel zeros from inflating the ratio.
//! The x-proportional slack reflects the recurrence itself: roundoff in
//! a downward ladder accumulates linearly in the ladder length (≈ x
//! steps through the oscillatory region), so ~10⁻¹³ relative at x ≈ 10³
//! is the method's intrinsic accuracy, while absolute errors stay at
//! the 10⁻¹⁵ scale that matters for kernel assembly.

use pswf_spca::bessel::{j_ladder, jn};

#[test]
fn ladder_matches_reference_table() {
    let table = include_str!("fixtures/bessel_jn.csv");
    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    for line in table.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut it = line.splitn(3, ',');
        let n: usize = it.next().unwrap().parse().unwrap();
        let x: f64 = it.next().unwrap().parse().unwrap();
        let exact: f64 = it.next().unwrap().parse().unwrap();
        let got = jn(n, x);
        let abs = (got - exact).abs();
        assert!(
            abs <= 1e-14,
            "J_{n}({x}): got {got:e}, want {exact:e}, abs err {abs:e}"
        );
        if exact.abs() > 1e-10 {
            let envelope = exact.abs().max((2.0 / (std::f64::consts::PI * x.max(1.0))).sqrt());
            let rel = abs / envelope;
            worst_rel = worst_rel.max(rel);
            let gate = 5e-14 * (x / 250.0).max(1.0);
            assert!(
                rel <= gate,
                "J_{n}({x}): got {got:e}, want {exact:e}, envelope-rel err {rel:e}"
            );
        }
        checked += 1;
    }
    assert!(checked > 300, "fixture load failure: only {checked} rows");
    eprintln!("bessel fixture: {checked} values, worst rel err {worst_rel:.2e}");
}

#[test]
fn ladder_consistent_with_single_order() {
    // Ladders of different lengths start the recurrence at different
    // indices, so values agree to roundoff, not bitwise.
    let l = j_ladder(64, 37.5);
    for (n, &v) in l.iter().enumerate() {
        assert!((v - jn(n, 37.5)).abs() <= 1e-15, "n={n}");
    }
}
