//! Concave, nondecreasing utilities of the rate vector.

use crate::error::{Error, Result};
use crate::scalar::{norm, to_f64, Scalar};

/// A concave utility, nondecreasing in every rate, with bounded subgradients.
pub trait Utility<T: Scalar> {
    /// Number of users the utility is defined over.
    fn dim(&self) -> usize;

    fn value(&self, rates: &[T]) -> Result<T>;

    /// An element of the superdifferential at `rates`; the gradient when
    /// the utility is differentiable there.
    fn subgradient(&self, rates: &[T]) -> Result<Vec<T>>;

    /// Upper bound on the Euclidean norm of every subgradient over the
    /// nonnegative orthant.
    fn bound(&self) -> T;
}

fn check_domain<T: Scalar>(dim: usize, rates: &[T]) -> Result<()> {
    if rates.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rates.len(),
        });
    }
    match rates
        .iter()
        .enumerate()
        .find(|(_, r)| !(r.is_finite() && **r >= T::zero()))
    {
        Some((index, &r)) => Err(Error::InvalidRate {
            index,
            value: to_f64(r),
        }),
        None => Ok(()),
    }
}

fn check_weights<T: Scalar>(weights: &[T]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::NoUsers);
    }
    match weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= T::zero()))
    {
        Some((i, w)) => Err(Error::Domain(format!(
            "weight {i} must be nonnegative and finite, got {w}"
        ))),
        None => Ok(()),
    }
}

/// `sum_i w_i R_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearUtility<T> {
    weights: Vec<T>,
}

impl<T: Scalar> LinearUtility<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(LinearUtility { weights })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Scalar> Utility<T> for LinearUtility<T> {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, rates: &[T]) -> Result<T> {
        check_domain(self.dim(), rates)?;
        Ok(self.weights.iter().zip(rates).map(|(&w, &r)| w * r).sum())
    }

    fn subgradient(&self, rates: &[T]) -> Result<Vec<T>> {
        check_domain(self.dim(), rates)?;
        Ok(self.weights.clone())
    }

    fn bound(&self) -> T {
        norm(&self.weights)
    }
}

/// Proportional-fairness style utility `sum_i w_i ln(eps + R_i)`.
///
/// The offset keeps subgradients bounded by `||w|| / eps` on the closed
/// orthant.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLogUtility<T> {
    weights: Vec<T>,
    offset: T,
}

impl<T: Scalar> WeightedLogUtility<T> {
    pub const DEFAULT_OFFSET: f64 = 1e-2;

    pub fn new(weights: Vec<T>, offset: T) -> Result<Self> {
        check_weights(&weights)?;
        if !(offset.is_finite() && offset > T::zero()) {
            return Err(Error::Domain(format!(
                "log offset must be positive and finite, got {offset}"
            )));
        }
        Ok(WeightedLogUtility { weights, offset })
    }

    pub fn with_default_offset(weights: Vec<T>) -> Result<Self> {
        Self::new(weights, T::lit(Self::DEFAULT_OFFSET))
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn offset(&self) -> T {
        self.offset
    }
}

impl<T: Scalar> Utility<T> for WeightedLogUtility<T> {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, rates: &[T]) -> Result<T> {
        check_domain(self.dim(), rates)?;
        Ok(self
            .weights
            .iter()
            .zip(rates)
            .map(|(&w, &r)| w * (self.offset + r).ln())
            .sum())
    }

    fn subgradient(&self, rates: &[T]) -> Result<Vec<T>> {
        check_domain(self.dim(), rates)?;
        Ok(self
            .weights
            .iter()
            .zip(rates)
            .map(|(&w, &r)| w / (self.offset + r))
            .collect())
    }

    fn bound(&self) -> T {
        norm(&self.weights) / self.offset
    }
}

impl<T: Scalar, U: Utility<T> + ?Sized> Utility<T> for &U {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, rates: &[T]) -> Result<T> {
        (**self).value(rates)
    }
    fn subgradient(&self, rates: &[T]) -> Result<Vec<T>> {
        (**self).subgradient(rates)
    }
    fn bound(&self) -> T {
        (**self).bound()
    }
}

impl<T: Scalar, U: Utility<T> + ?Sized> Utility<T> for Box<U> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, rates: &[T]) -> Result<T> {
        (**self).value(rates)
    }
    fn subgradient(&self, rates: &[T]) -> Result<Vec<T>> {
        (**self).subgradient(rates)
    }
    fn bound(&self) -> T {
        (**self).bound()
    }
}
