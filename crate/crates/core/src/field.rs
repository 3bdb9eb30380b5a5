//! Real fields on space-time that solvers and quadratures can sample.

use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::poly::{FloatPolynomial, Polynomial};

/// A real-valued function of `(x, t)`.
pub trait Field {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64>;
}

impl<F> Field for F
where
    F: Fn(&SpaceTimePoint) -> f64,
{
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        Ok(self(z))
    }
}

impl Field for Polynomial {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.dim() });
        }
        Polynomial::eval(self, &z.coords())
    }
}

impl Field for FloatPolynomial {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.dim() });
        }
        Ok(self.eval_split(&z.x, z.t))
    }
}

/// Negation of another field.
pub struct Negated<'a, F: ?Sized>(pub &'a F);

impl<F: Field + ?Sized> Field for Negated<'_, F> {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        self.0.eval(z).map(|v| -v)
    }
}

/// `z -> f(z + shift)`.
pub struct Shifted<'a, F: ?Sized> {
    pub field: &'a F,
    pub shift: SpaceTimePoint,
}

impl<F: Field + ?Sized> Field for Shifted<'_, F> {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        self.field.eval(&z.add(&self.shift))
    }
}
