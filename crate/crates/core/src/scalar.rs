//! Field abstraction shared by the real and complex solver paths.

use nalgebra::ComplexField;
use num_complex::Complex64;

pub trait Scalar: ComplexField<RealField = f64> + Copy + Default + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    /// Narrowing conversion. The real instance drops the imaginary part, which
    /// callers guarantee to be zero.
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;

    fn from_re(x: f64) -> Self {
        Self::from_real(x)
    }

    fn re(self) -> f64 {
        self.real()
    }

    fn abs2(self) -> f64 {
        self.modulus_squared()
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_c64(z: Complex64) -> Self {
        debug_assert!(z.im.abs() <= 1e-14 * (1.0 + z.re.abs()), "complex value {z} in real path");
        z.re
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn to_c64(self) -> Complex64 {
        self
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.conjugate() * *y)
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}

pub fn scale<T: Scalar>(a: &mut [T], s: T) {
    for x in a {
        *x *= s;
    }
}

/// `y += s·x`
pub fn axpy<T: Scalar>(s: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * *xi;
    }
}

pub fn normalize<T: Scalar>(a: &mut [T]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        scale(a, T::from_re(1.0 / n));
    }
    n
}
