//! Exact dyadic-rational arithmetic.
//!
//! Every amount the scaling solvers touch is of the form `m / 2^s`: capacities
//! are integers, the scaling parameter is a power of two, and each push amount
//! is built from residuals, halvings, and powers of two. `Quantity` stores
//! that form exactly, so flow conservation and the scaling invariants can be
//! checked with `==` instead of a tolerance.
//!
//! Canonical form: the mantissa is odd, or the shift is zero. Overflowing
//! i128 or exceeding the shift cap is a solver bug, not an input error, and
//! panics with a message saying so.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// Upper bound on the binary shift. Values finer than 2^-256 mean the solver
/// has lost control of its scaling parameter.
pub const SHIFT_CAP: u32 = 256;

/// An exact value `mantissa / 2^shift`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quantity {
    mantissa: i128,
    shift: u32,
}

#[cold]
fn overflow(op: &str) -> ! {
    panic!("quantity overflow in {op}: value outside exact range (solver bug)");
}

fn shl_checked(m: i128, by: u32, op: &str) -> i128 {
    if by == 0 {
        return m;
    }
    if by >= 127 {
        if m == 0 {
            return 0;
        }
        overflow(op);
    }
    match m.checked_shl(by) {
        Some(v) if (v >> by) == m => v,
        _ => overflow(op),
    }
}

impl Quantity {
    pub const ZERO: Quantity = Quantity { mantissa: 0, shift: 0 };
    pub const ONE: Quantity = Quantity { mantissa: 1, shift: 0 };

    pub fn from_int(v: i128) -> Quantity {
        Quantity { mantissa: v, shift: 0 }
    }

    /// 2^exp, for any exponent, including negative ones.
    pub fn pow2(exp: i32) -> Quantity {
        if exp >= 0 {
            if exp >= 127 {
                overflow("pow2");
            }
            Quantity { mantissa: 1i128 << exp, shift: 0 }
        } else {
            let s = (-exp) as u32;
            if s > SHIFT_CAP {
                overflow("pow2");
            }
            Quantity { mantissa: 1, shift: s }
        }
    }

    fn normalized(mut mantissa: i128, mut shift: u32) -> Quantity {
        if mantissa == 0 {
            return Quantity::ZERO;
        }
        let tz = mantissa.trailing_zeros().min(shift);
        mantissa >>= tz;
        shift -= tz;
        if shift > SHIFT_CAP {
            overflow("normalize");
        }
        Quantity { mantissa, shift }
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0
    }

    pub fn is_positive(self) -> bool {
        self.mantissa > 0
    }

    pub fn is_negative(self) -> bool {
        self.mantissa < 0
    }

    pub fn signum(self) -> i32 {
        self.mantissa.signum() as i32
    }

    /// Exact integer value, if the quantity is an integer.
    pub fn as_int(self) -> Option<i128> {
        if self.shift == 0 {
            Some(self.mantissa)
        } else {
            None
        }
    }

    pub fn abs(self) -> Quantity {
        if self.mantissa < 0 {
            -self
        } else {
            self
        }
    }

    /// Multiply by 2^exp. Exact for every exponent.
    pub fn mul_pow2(self, exp: i32) -> Quantity {
        if self.mantissa == 0 {
            return Quantity::ZERO;
        }
        if exp >= 0 {
            let e = exp as u32;
            let drop = e.min(self.shift);
            let rest = e - drop;
            Quantity {
                mantissa: shl_checked(self.mantissa, rest, "mul_pow2"),
                shift: self.shift - drop,
            }
        } else {
            Quantity::normalized(self.mantissa, self.shift + (-exp) as u32)
        }
    }

    /// Multiply by a small integer factor.
    pub fn mul_int(self, factor: i128) -> Quantity {
        match self.mantissa.checked_mul(factor) {
            Some(m) => Quantity::normalized(m, self.shift),
            None => overflow("mul_int"),
        }
    }

    /// Non-negative remainder modulo 2^exp: `self - 2^exp * floor(self / 2^exp)`.
    pub fn mod_pow2(self, exp: i32) -> Quantity {
        if self.mantissa == 0 {
            return Quantity::ZERO;
        }
        // self = m / 2^shift, step = 2^exp = 2^(exp+shift) / 2^shift.
        let step_sh = exp + self.shift as i32;
        if step_sh <= 0 {
            // The step divides the quantum of self exactly.
            return Quantity::ZERO;
        }
        if step_sh >= 127 {
            // Step far exceeds |self|; remainder is self (or self + step if negative).
            return if self.mantissa > 0 {
                self
            } else {
                Quantity::pow2(exp) + self
            };
        }
        let step = 1i128 << step_sh;
        Quantity::normalized(self.mantissa.rem_euclid(step), self.shift)
    }

    /// Largest multiple of 2^exp that is `<= self`.
    pub fn floor_to_pow2_multiple(self, exp: i32) -> Quantity {
        self - self.mod_pow2(exp)
    }

    pub fn is_multiple_of_pow2(self, exp: i32) -> bool {
        self.mod_pow2(exp).is_zero()
    }

    /// Floor of log2 of a positive quantity.
    pub fn floor_log2(self) -> i32 {
        assert!(self.mantissa > 0, "floor_log2 of non-positive quantity");
        let bits = 127 - self.mantissa.unsigned_abs().leading_zeros() as i32;
        bits - self.shift as i32
    }

    /// Least e with 2^e >= self, for positive self.
    pub fn ceil_pow2_exp(self) -> i32 {
        let f = self.floor_log2();
        if self == Quantity::pow2(f) {
            f
        } else {
            f + 1
        }
    }

    /// Exact halving.
    pub fn half(self) -> Quantity {
        self.mul_pow2(-1)
    }

    /// self / 2^exp as f64, for reporting only.
    pub fn ratio_to_pow2(self, exp: i32) -> f64 {
        let scaled = self.mul_pow2(-exp);
        scaled.mantissa as f64 / (scaled.shift as f64).exp2()
    }

    fn cmp_impl(self, other: Quantity) -> Ordering {
        let sa = self.mantissa.signum();
        let sb = other.mantissa.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same non-zero sign. Compare magnitudes by floor log2 first so that
        // widely separated scales never need a mantissa alignment.
        let la = 127 - self.mantissa.unsigned_abs().leading_zeros() as i32 - self.shift as i32;
        let lb = 127 - other.mantissa.unsigned_abs().leading_zeros() as i32 - other.shift as i32;
        if la != lb {
            let mag = la.cmp(&lb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        // Equal floor log2: shifts differ by less than 127 bits, so aligning
        // the coarser mantissa stays inside i128.
        let (ma, mb) = if self.shift >= other.shift {
            (self.mantissa, shl_checked(other.mantissa, self.shift - other.shift, "cmp"))
        } else {
            (shl_checked(self.mantissa, other.shift - self.shift, "cmp"), other.mantissa)
        };
        ma.cmp(&mb)
    }
}

impl Add for Quantity {
    type Output = Quantity;
    fn add(self, rhs: Quantity) -> Quantity {
        if self.mantissa == 0 {
            return rhs;
        }
        if rhs.mantissa == 0 {
            return self;
        }
        let shift = self.shift.max(rhs.shift);
        let ma = shl_checked(self.mantissa, shift - self.shift, "add");
        let mb = shl_checked(rhs.mantissa, shift - rhs.shift, "add");
        match ma.checked_add(mb) {
            Some(m) => Quantity::normalized(m, shift),
            None => overflow("add"),
        }
    }
}

impl Sub for Quantity {
    type Output = Quantity;
    fn sub(self, rhs: Quantity) -> Quantity {
        self + (-rhs)
    }
}

impl Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity { mantissa: self.mantissa.checked_neg().unwrap_or_else(|| overflow("neg")), shift: self.shift }
    }
}

impl AddAssign for Quantity {
    fn add_assign(&mut self, rhs: Quantity) {
        *self = *self + rhs;
    }
}

impl SubAssign for Quantity {
    fn sub_assign(&mut self, rhs: Quantity) {
        *self = *self - rhs;
    }
}

impl PartialOrd for Quantity {
    fn partial_cmp(&self, other: &Quantity) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quantity {
    fn cmp(&self, other: &Quantity) -> Ordering {
        self.cmp_impl(*other)
    }
}

impl fmt::Debug for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.shift)
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod test {
    use super::*;
    use proptest::prelude::*;

    fn q(m: i128, s: u32) -> Quantity {
        Quantity::normalized(m, s)
    }

    #[test]
    fn integer_round_trip() {
        assert_eq!(Quantity::from_int(42).as_int(), Some(42));
        assert_eq!(Quantity::from_int(-7).as_int(), Some(-7));
        assert_eq!(q(6, 1).as_int(), Some(3));
        assert_eq!(q(3, 1).as_int(), None);
    }

    #[test]
    fn pow2_values() {
        assert_eq!(Quantity::pow2(4), Quantity::from_int(16));
        assert_eq!(Quantity::pow2(0), Quantity::ONE);
        assert_eq!(Quantity::pow2(-2) + Quantity::pow2(-2), Quantity::pow2(-1));
    }

    #[test]
    fn arithmetic_mixes_scales() {
        let a = Quantity::from_int(5);
        let b = Quantity::pow2(-3); // 1/8
        let c = a + b;
        assert_eq!(c - b, a);
        assert_eq!(c - a, b);
        assert!(c > a && c < Quantity::from_int(6));
    }

    #[test]
    fn compare_across_distant_scales() {
        let big = Quantity::pow2(100);
        let tiny = Quantity::pow2(-200);
        assert!(big > tiny);
        assert!(-big < tiny);
        assert!(tiny > Quantity::ZERO);
    }

    #[test]
    fn mod_pow2_basics() {
        // 6 mod 4 = 2
        assert_eq!(Quantity::from_int(6).mod_pow2(2), Quantity::from_int(2));
        // 6 mod 1/2 = 0
        assert_eq!(Quantity::from_int(6).mod_pow2(-1), Quantity::ZERO);
        // 5/4 mod 1/2 = 1/4
        assert_eq!(q(5, 2).mod_pow2(-1), Quantity::pow2(-2));
        // negative values get a non-negative remainder: -3 mod 4 = 1
        assert_eq!(Quantity::from_int(-3).mod_pow2(2), Quantity::from_int(1));
        // step far above the value
        assert_eq!(Quantity::from_int(3).mod_pow2(90), Quantity::from_int(3));
    }

    #[test]
    fn floor_multiple() {
        assert_eq!(Quantity::from_int(11).floor_to_pow2_multiple(2), Quantity::from_int(8));
        assert_eq!(Quantity::from_int(-1).floor_to_pow2_multiple(2), Quantity::from_int(-4));
        assert!(Quantity::from_int(8).is_multiple_of_pow2(2));
        assert!(!Quantity::from_int(9).is_multiple_of_pow2(1));
    }

    #[test]
    fn ceil_pow2() {
        assert_eq!(Quantity::from_int(9).ceil_pow2_exp(), 4);
        assert_eq!(Quantity::from_int(8).ceil_pow2_exp(), 3);
        assert_eq!(Quantity::from_int(1).ceil_pow2_exp(), 0);
        assert_eq!(q(3, 2).ceil_pow2_exp(), 0); // 3/4 -> 1
        assert_eq!(q(1, 3).ceil_pow2_exp(), -3);
    }

    #[test]
    #[should_panic(expected = "quantity overflow")]
    fn overflow_panics() {
        let huge = Quantity::from_int(i128::MAX);
        let _ = huge + huge;
    }

    proptest! {
        #[test]
        fn add_sub_round_trips(a in -1_000_000_000i128..1_000_000_000,
                               sa in 0u32..40,
                               b in -1_000_000_000i128..1_000_000_000,
                               sb in 0u32..40) {
            let x = q(a, sa);
            let y = q(b, sb);
            prop_assert_eq!(x + y - y, x);
            prop_assert_eq!(x + y, y + x);
            prop_assert_eq!(x - x, Quantity::ZERO);
        }

        #[test]
        fn ordering_matches_rational(a in -100_000i128..100_000, sa in 0u32..20,
                                     b in -100_000i128..100_000, sb in 0u32..20) {
            // compare a/2^sa with b/2^sb by cross multiplication
            let lhs = a << (20 - sa);
            let rhs = b << (20 - sb);
            prop_assert_eq!(q(a, sa).cmp(&q(b, sb)), lhs.cmp(&rhs));
        }

        #[test]
        fn mod_is_remainder(a in -1_000_000i128..1_000_000, sa in 0u32..10, e in -8i32..20) {
            let x = q(a, sa);
            let m = x.mod_pow2(e);
            let fl = x.floor_to_pow2_multiple(e);
            prop_assert!(m >= Quantity::ZERO);
            prop_assert!(m < Quantity::pow2(e));
            prop_assert_eq!(fl + m, x);
            prop_assert!(fl.is_multiple_of_pow2(e));
        }

        #[test]
        fn mul_pow2_inverts(a in -1_000_000i128..1_000_000, sa in 0u32..10, e in -30i32..30) {
            let x = q(a, sa);
            prop_assert_eq!(x.mul_pow2(e).mul_pow2(-e), x);
        }
    }
}
