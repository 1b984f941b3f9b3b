//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through [`Real`], with `f64` as the working precision of the shipped
//! experiments and `f32` available for memory-bound workloads.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable everywhere in this crate: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync + Default + 'static
{
}

impl<T> Real for T where
    T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Send + Sync + Default + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn from_f64<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert")
}

/// Converts a count into the working scalar type.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize must convert to scalar")
}

/// Widens the working scalar to `f64` (used for reporting and serialization).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar must widen to f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_real<T: Real>() {}

    #[test]
    fn standard_floats_are_real() {
        assert_real::<f32>();
        assert_real::<f64>();
    }

    #[test]
    fn conversions_round_trip() {
        let x: f64 = from_f64::<f64>(1.5);
        assert_eq!(x, 1.5);
        let y: f32 = from_f64::<f32>(0.25);
        assert_eq!(to_f64(y), 0.25);
        assert_eq!(from_usize::<f64>(42), 42.0);
    }
}
