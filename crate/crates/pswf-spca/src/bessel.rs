//! Bessel functions of the first kind of integer order.
//!
//! Everything routes through one primitive: a normalized downward (Miller)
//! recurrence that produces the whole ladder `J_0(x) ..= J_nmax(x)` in a
//! single O(nmax + x) sweep. The kernels in this crate always need a range
//! of orders at a fixed argument, which makes the ladder form the natural
//! primitive; single-order helpers wrap it.

/// Extra recurrence start-up margin above the turning point.
///
/// Downward recurrence separates the decaying solution from the growing one
/// only for indices past `max(n, x)`, where the solution ratio grows like
/// `exp((2√2/3)·m^{3/2}/√x)` (Airy scaling, m = margin). Demanding 10¹⁸
/// separation gives m ≳ 12·x^{1/3}; the constants below add headroom.
/// Validated against the high-precision fixture in
/// `tests/bessel_reference.rs` up to x ≈ 1330.
fn start_margin(m: f64) -> usize {
    60 + (13.0 * m.cbrt()).ceil() as usize
}

/// `J_n(x)` for `n = 0 ..= nmax` at a single argument `x ≥ 0`.
pub fn j_ladder(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "argument must be finite and nonnegative");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = nmax.max(x.ceil() as usize) + start_margin(x.max(nmax as f64));
    // Ladder descends from trial values (0, ε) placed just above `start`;
    // the renormalization constant comes from 1 = J_0 + 2·Σ_{k≥1} J_{2k}.
    let mut jp = 0.0f64; // trial J_{start+2}
    let mut j = 1e-300f64; // trial J_{start+1}
    // Kahan-compensated normalization sum: the even-order terms alternate
    // in sign and their absolute sum grows like √x, which costs two digits
    // at x ~ 10³ under naive accumulation.
    let mut norm = 0.0f64;
    let mut comp = 0.0f64;
    for k in (0..=start).rev() {
        let jm = (2.0 * (k as f64 + 1.0) / x) * j - jp;
        jp = j;
        j = jm;
        // After the update `j` holds the trial J_k.
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            let term = if k == 0 { j } else { 2.0 * j } - comp;
            let t = norm + term;
            comp = (t - norm) - term;
            norm = t;
        }
        if j.abs() > 1e290 {
            j *= 1e-290;
            jp *= 1e-290;
            norm *= 1e-290;
            comp *= 1e-290;
            for v in out[k.min(nmax + 1)..].iter_mut() {
                *v *= 1e-290;
            }
        }
    }
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// `J_0(x)`.
pub fn j0(x: f64) -> f64 {
    j_ladder(0, x)[0]
}

/// `J_1(x)`.
pub fn j1(x: f64) -> f64 {
    j_ladder(1, x)[1]
}

/// `J_n(x)` for a single order.
pub fn jn(n: usize, x: f64) -> f64 {
    j_ladder(n, x)[n]
}

/// Two-sided Bessel tail `2·Σ_{j > k} |J_j(z)|`.
///
/// This is the quantity the angular node count must suppress below the
/// quadrature accuracy target; the sum is truncated once the terms fall
/// below 10⁻²⁵, far past the turning point `j ≈ z`.
pub fn abs_tail(z: f64, k: usize) -> f64 {
    let hi = (z + 12.0 * z.cbrt() + 80.0).ceil() as usize;
    let top = k.max(hi) + 20;
    let ladder = j_ladder(top, z);
    let mut s = 0.0;
    for j in (k + 1)..=top {
        let t = ladder[j].abs();
        s += t;
        if t < 1e-25 && j as f64 > z {
            break;
        }
    }
    2.0 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument() {
        let l = j_ladder(4, 0.0);
        assert_eq!(l, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn small_orders_reference_values() {
        // J_0(1) and J_1(1), 16 significant digits.
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn normalization_identity_holds() {
        // 1 = J_0 + 2·Σ J_{2k} evaluated from an independent ladder slice.
        for &x in &[0.3, 4.7, 55.0, 422.2] {
            let l = j_ladder((x as usize) + 120, x);
            let mut s = l[0];
            for k in (2..l.len()).step_by(2) {
                s += 2.0 * l[k];
            }
            assert!((s - 1.0).abs() < 1e-13, "x={x}: {s}");
        }
    }

    #[test]
    fn tail_decreases_in_k() {
        let z = 37.0;
        let t1 = abs_tail(z, 40);
        let t2 = abs_tail(z, 55);
        assert!(t2 < t1 && t2 > 0.0);
    }
}
