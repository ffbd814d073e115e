//! Wigner 3jm and 6j symbols over half-integer arguments.
//!
//! Racah's single-sum formulas are evaluated with exact big-integer
//! factorials, keeping the value as (rational sum) × √(rational) and
//! converting to floating point only at the end. Selection-rule zeros and
//! exact cancellations in the sum come out as exact 0.0, not small floats.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;

static FACTORIALS: RwLock<Vec<BigInt>> = RwLock::new(Vec::new());

/// `n!` from a lazily grown table, safe for concurrent readers.
fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0, "factorial of negative argument");
    let n = n as usize;
    {
        let table = FACTORIALS.read().unwrap();
        if n < table.len() {
            return table[n].clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    if table.is_empty() {
        table.push(BigInt::one());
    }
    while table.len() <= n {
        let next = table.last().unwrap() * BigInt::from(table.len());
        table.push(next);
    }
    table[n].clone()
}

/// Converts an exact rational to f64 with ~2 ulp accuracy even when
/// numerator and denominator exceed the f64 range on their own.
fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().abs();
    let shift = (64 + 8 + d.bits() as i64 - n.bits() as i64).max(0);
    let q = (n << shift as u64) / d;
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(shift as i32));
    if negative {
        -v
    } else {
        v
    }
}

/// (-1)^e for an exponent given as a doubled value; the exponent must be an
/// integer (doubled value even).
fn phase_from_twice(twice: i32) -> f64 {
    debug_assert!(twice % 2 == 0, "phase exponent is not an integer");
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Triangle rule: |a−b| ≤ c ≤ a+b, with an integer perimeter a+b+c.
pub fn triangle_ok(a: HalfInteger, b: HalfInteger, c: HalfInteger) -> bool {
    if (a.twice() + b.twice() + c.twice()) % 2 != 0 {
        return false;
    }
    c.twice() >= (a - b).twice().abs() && c.twice() <= (a + b).twice()
}

/// Δ(abc) = (a+b−c)!(a−b+c)!(−a+b+c)!/(a+b+c+1)! as an exact rational.
/// Callers must have checked the triangle rule.
fn triangle_coefficient(a: HalfInteger, b: HalfInteger, c: HalfInteger) -> BigRational {
    let half = |h: HalfInteger| -> i64 {
        debug_assert!(h.is_integer() && h.twice() >= 0);
        (h.twice() / 2) as i64
    };
    let numer =
        factorial(half(a + b - c)) * factorial(half(a - b + c)) * factorial(half(-a + b + c));
    let denom = factorial(half(a + b + c) + 1);
    BigRational::new(numer, denom)
}

/// Wigner 3jm symbol (j1 j2 j3; m1 m2 m3).
///
/// Returns exact 0.0 when m1+m2+m3 ≠ 0, when the triangle rule fails, or
/// when some |m| exceeds its j (the standard convention). Arguments where
/// j − m is not an integer indicate a caller bug and are rejected.
pub fn three_jm(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    m1: HalfInteger,
    m2: HalfInteger,
    m3: HalfInteger,
) -> Result<f64> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if j.is_negative() {
            return Err(Error::NegativeJ(j.to_string()));
        }
        if !j.same_parity(m) {
            return Err(Error::HalfIntegerMismatch {
                j: j.to_string(),
                m: m.to_string(),
            });
        }
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return Ok(0.0);
    }
    if (m1 + m2 + m3).twice() != 0 || !triangle_ok(j1, j2, j3) {
        return Ok(0.0);
    }

    let half = |h: HalfInteger| -> i64 { (h.twice() / 2) as i64 };

    // summation bounds over the integer k
    let k_min = 0i64.max(half(j2 - j3 - m1)).max(half(j1 - j3 + m2));
    let k_max = half(j1 + j2 - j3).min(half(j1 - m1)).min(half(j2 + m2));
    if k_min > k_max {
        return Ok(0.0);
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(half(j1 + j2 - j3) - k)
            * factorial(half(j1 - m1) - k)
            * factorial(half(j2 + m2) - k)
            * factorial(half(j3 - j2 + m1) + k)
            * factorial(half(j3 - j1 - m2) + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let radicand = triangle_coefficient(j1, j2, j3)
        * BigRational::from_integer(
            factorial(half(j1 + m1))
                * factorial(half(j1 - m1))
                * factorial(half(j2 + m2))
                * factorial(half(j2 - m2))
                * factorial(half(j3 + m3))
                * factorial(half(j3 - m3)),
        );
    let sign = phase_from_twice((j1 - j2 - m3).twice());
    Ok(sign * ratio_to_f64(&sum) * ratio_to_f64(&radicand).sqrt())
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
///
/// Returns exact 0.0 when any of the four triads (j1 j2 j3), (j1 j5 j6),
/// (j4 j2 j6), (j4 j5 j3) violates the triangle rule.
pub fn six_j(
    j1: HalfInteger,
    j2: HalfInteger,
    j3: HalfInteger,
    j4: HalfInteger,
    j5: HalfInteger,
    j6: HalfInteger,
) -> f64 {
    if !triangle_ok(j1, j2, j3)
        || !triangle_ok(j1, j5, j6)
        || !triangle_ok(j4, j2, j6)
        || !triangle_ok(j4, j5, j3)
    {
        return 0.0;
    }

    let half = |h: HalfInteger| -> i64 { (h.twice() / 2) as i64 };
    let a = [
        half(j1 + j2 + j3),
        half(j1 + j5 + j6),
        half(j4 + j2 + j6),
        half(j4 + j5 + j3),
    ];
    let b = [
        half(j1 + j2 + j4 + j5),
        half(j2 + j3 + j5 + j6),
        half(j3 + j1 + j6 + j4),
    ];
    let k_min = *a.iter().max().unwrap();
    let k_max = *b.iter().min().unwrap();
    if k_min > k_max {
        return 0.0;
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let mut denom = BigInt::one();
        for ai in a {
            denom *= factorial(k - ai);
        }
        for bi in b {
            denom *= factorial(bi - k);
        }
        let term = BigRational::new(factorial(k + 1), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }

    let radicand = triangle_coefficient(j1, j2, j3)
        * triangle_coefficient(j1, j5, j6)
        * triangle_coefficient(j4, j2, j6)
        * triangle_coefficient(j4, j5, j3);
    ratio_to_f64(&sum) * ratio_to_f64(&radicand).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn h(twice: i32) -> HalfInteger {
        HalfInteger::from_twice(twice)
    }

    #[test]
    fn triangle_rule() {
        assert!(triangle_ok(h(1), h(1), h(2))); // (1/2, 1/2, 1)
        assert!(!triangle_ok(h(2), h(2), h(6))); // (1, 1, 3): 3 > 2
        assert!(!triangle_ok(h(1), h(2), h(2))); // (1/2, 1, 1): sum 5/2
    }

    #[test]
    fn three_jm_known_values() {
        // closed form (-1)^{j-m}/sqrt(2j+1) for (j j 0; m -m 0)
        let v = three_jm(h(1), h(1), h(0), h(1), h(-1), h(0)).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        assert_eq!(three_jm(h(2), h(2), h(6), h(0), h(0), h(0)).unwrap(), 0.0);
        assert_eq!(three_jm(h(2), h(2), h(2), h(2), h(2), h(-2)).unwrap(), 0.0);

        // checked against sympy's exact wigner_3j
        let v = three_jm(h(2), h(2), h(2), h(2), h(0), h(-2)).unwrap();
        assert_abs_diff_eq!(v, -(6f64.sqrt()) / 6.0, epsilon = 1e-15);
        let v = three_jm(h(2), h(2), h(2), h(2), h(-2), h(0)).unwrap();
        assert_abs_diff_eq!(v, 6f64.sqrt() / 6.0, epsilon = 1e-15);
        let v = three_jm(h(4), h(12), h(8), h(0), h(0), h(0)).unwrap();
        assert_abs_diff_eq!(v, 715f64.sqrt() / 143.0, epsilon = 1e-14);
    }

    #[test]
    fn three_jm_m_out_of_range_is_zero() {
        assert_eq!(three_jm(h(2), h(2), h(2), h(4), h(-2), h(-2)).unwrap(), 0.0);
    }

    #[test]
    fn three_jm_rejects_parity_mismatch() {
        assert!(three_jm(h(2), h(2), h(2), h(1), h(1), h(-2)).is_err());
        assert!(three_jm(h(-2), h(2), h(2), h(0), h(0), h(0)).is_err());
    }

    #[test]
    fn six_j_known_values() {
        assert_eq!(six_j(h(2), h(2), h(6), h(2), h(2), h(2)), 0.0);
        assert_abs_diff_eq!(
            six_j(h(2), h(2), h(2), h(2), h(2), h(2)),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            six_j(h(2), h(2), h(0), h(2), h(2), h(2)),
            -1.0 / 3.0,
            epsilon = 1e-15
        );
        // checked against sympy
        assert_abs_diff_eq!(
            six_j(h(2), h(2), h(2), h(1), h(1), h(1)),
            -1.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            six_j(h(2), h(4), h(6), h(6), h(4), h(2)),
            14f64.sqrt() / 35.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            six_j(h(6), h(6), h(6), h(6), h(6), h(6)),
            -1.0 / 14.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn selection_zeros_are_exact() {
        // bit-exact zeros, not small floats
        assert_eq!(
            three_jm(h(2), h(2), h(6), h(0), h(0), h(0))
                .unwrap()
                .to_bits(),
            0f64.to_bits()
        );
        assert_eq!(
            six_j(h(2), h(2), h(6), h(2), h(2), h(2)).to_bits(),
            0f64.to_bits()
        );
        // (1 1 1; 0 0 0) vanishes through cancellation in the Racah sum
        assert_eq!(
            three_jm(h(2), h(2), h(2), h(0), h(0), h(0))
                .unwrap()
                .to_bits(),
            0f64.to_bits()
        );
    }

    /// Strategy over valid (j1 j2 j3; m1 m2 m3) with j ≤ jmax.
    fn valid_3jm_args(jmax: i32) -> impl Strategy<Value = [HalfInteger; 6]> {
        (0..=2 * jmax, 0..=2 * jmax).prop_flat_map(move |(tj1, tj2)| {
            let lo = (tj1 - tj2).abs();
            let hi = tj1 + tj2;
            (
                Just(tj1),
                Just(tj2),
                (0..=(hi - lo) / 2).prop_map(move |s| lo + 2 * s),
            )
                .prop_flat_map(|(tj1, tj2, tj3)| {
                    let m = move |tj: i32| (0..=tj).prop_map(move |i| -tj + 2 * i);
                    (Just(tj1), Just(tj2), Just(tj3), m(tj1), m(tj2))
                })
                .prop_map(|(tj1, tj2, tj3, tm1, tm2)| {
                    [h(tj1), h(tj2), h(tj3), h(tm1), h(tm2), h(-tm1 - tm2)]
                })
        })
    }

    proptest! {
        #[test]
        fn cyclic_symmetry(a in valid_3jm_args(6)) {
            let [j1, j2, j3, m1, m2, m3] = a;
            prop_assume!(m3.abs() <= j3);
            let v = three_jm(j1, j2, j3, m1, m2, m3).unwrap();
            let c1 = three_jm(j2, j3, j1, m2, m3, m1).unwrap();
            let c2 = three_jm(j3, j1, j2, m3, m1, m2).unwrap();
            prop_assert!((v - c1).abs() <= 1e-13);
            prop_assert!((v - c2).abs() <= 1e-13);
        }

        #[test]
        fn swap_and_reflection_symmetry(a in valid_3jm_args(6)) {
            let [j1, j2, j3, m1, m2, m3] = a;
            prop_assume!(m3.abs() <= j3);
            let v = three_jm(j1, j2, j3, m1, m2, m3).unwrap();
            let sign = phase_from_twice((j1 + j2 + j3).twice());
            let swapped = three_jm(j2, j1, j3, m2, m1, m3).unwrap();
            prop_assert!((swapped - sign * v).abs() <= 1e-13);
            let reflected = three_jm(j1, j2, j3, -m1, -m2, -m3).unwrap();
            prop_assert!((reflected - sign * v).abs() <= 1e-13);
        }

        #[test]
        fn six_j_column_and_row_symmetry(
            tj in proptest::array::uniform6(0i32..=8)
        ) {
            let [a, b, c, d, e, f] = tj.map(h);
            let v = six_j(a, b, c, d, e, f);
            // column permutations
            prop_assert!((six_j(b, a, c, e, d, f) - v).abs() <= 1e-13);
            prop_assert!((six_j(c, b, a, f, e, d) - v).abs() <= 1e-13);
            prop_assert!((six_j(a, c, b, d, f, e) - v).abs() <= 1e-13);
            // exchange upper/lower in two columns
            prop_assert!((six_j(a, e, f, d, b, c) - v).abs() <= 1e-13);
            prop_assert!((six_j(d, b, f, a, e, c) - v).abs() <= 1e-13);
            prop_assert!((six_j(d, e, c, a, b, f) - v).abs() <= 1e-13);
        }
    }

    #[test]
    fn concurrent_evaluation_is_consistent() {
        // hammer the factorial cache from several threads at once
        let expected = three_jm(h(8), h(8), h(8), h(4), h(-2), h(-2)).unwrap();
        let handles: Vec<_> = (0..8)
            .map(|_| {
                std::thread::spawn(move || {
                    let mut acc = 0.0;
                    for _ in 0..200 {
                        acc = three_jm(h(8), h(8), h(8), h(4), h(-2), h(-2)).unwrap();
                        acc += six_j(h(6), h(6), h(6), h(6), h(6), h(6));
                    }
                    acc
                })
            })
            .collect();
        let sixj = six_j(h(6), h(6), h(6), h(6), h(6), h(6));
        for handle in handles {
            let got = handle.join().unwrap();
            assert_eq!(got.to_bits(), (expected + sixj).to_bits());
        }
    }

    #[test]
    fn orthogonality() {
        // sum over m1,m2 of (2j3+1) w(j3,m3) w(j3',m3') = delta
        for tj1 in 0..=4 {
            for tj2 in 0..=4 {
                for tj3 in (tj1 - tj2).abs()..=(tj1 + tj2) {
                    if (tj1 + tj2 + tj3) % 2 != 0 {
                        continue;
                    }
                    for tj3p in ((tj1 - tj2).abs()..=(tj1 + tj2)).step_by(2) {
                        let (j1, j2, j3, j3p) = (h(tj1), h(tj2), h(tj3), h(tj3p));
                        for m3 in j3.projections() {
                            for m3p in j3p.projections() {
                                let mut acc = 0.0;
                                for m1 in j1.projections() {
                                    for m2 in j2.projections() {
                                        let w1 = three_jm(j1, j2, j3, m1, m2, m3).unwrap();
                                        let w2 = three_jm(j1, j2, j3p, m1, m2, m3p).unwrap();
                                        acc += (tj3 as f64 + 1.0) * w1 * w2;
                                    }
                                }
                                let want = if tj3 == tj3p && m3 == m3p { 1.0 } else { 0.0 };
                                assert_abs_diff_eq!(acc, want, epsilon = 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }
}
