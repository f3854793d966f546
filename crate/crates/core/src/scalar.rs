//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast};

/// floating point: f32 or f64
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance used when checking that shares sum to one and that a
    /// similarity matrix is symmetric.
    const SUM_TOLERANCE: Self;

    /// Raw bit pattern, widened to 64 bits. Used for lock-free parameter
    /// storage in concurrent training.
    fn to_bits64(self) -> u64;
    fn from_bits64(bits: u64) -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    const SUM_TOLERANCE: Self = 1e-5;

    #[inline]
    fn to_bits64(self) -> u64 {
        <u64 as From<u32>>::from(self.to_bits())
    }

    #[inline]
    fn from_bits64(bits: u64) -> Self {
        f32::from_bits(bits as u32)
    }
}

impl Scalar for f64 {
    const SUM_TOLERANCE: Self = 1e-12;

    #[inline]
    fn to_bits64(self) -> u64 {
        self.to_bits()
    }

    #[inline]
    fn from_bits64(bits: u64) -> Self {
        f64::from_bits(bits)
    }
}
