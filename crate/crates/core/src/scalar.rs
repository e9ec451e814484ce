//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use smallvec::SmallVec;

/// Real scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Requested tolerance, floored at a small multiple of machine epsilon so
    /// that `f32` instantiations stay meaningful.
    #[inline]
    fn tol(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        let t = Self::lit(requested);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Short coordinate tuple. Inline storage up to four components.
pub type Vector<T> = SmallVec<[T; 4]>;

pub fn zeros<T: Real>(n: usize) -> Vector<T> {
    smallvec::smallvec![T::zero(); n]
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &[T]) -> Vector<T> {
    x.iter().zip(y).map(|(&a, &b)| alpha * a + b).collect()
}

pub fn scale<T: Real>(alpha: T, x: &[T]) -> Vector<T> {
    x.iter().map(|&a| alpha * a).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vector<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vector<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
