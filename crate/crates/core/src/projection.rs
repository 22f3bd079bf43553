//! Approximate projection onto the capacity region.
//!
//! Instead of the (intractable) nearest-point map, a point is pushed into the
//! region by projecting it onto one violated constraint at a time, in
//! whatever order the [`Finder`] reports them. Every step only lowers
//! coordinates, so a constraint that holds stays satisfied and the loop ends
//! after at most `2^M - 1` projections. Each step is the exact projection
//! onto a closed convex superset of the region, hence the composite map
//! never increases the distance to any feasible point.

use crate::channel::{ChannelConfig, RateVector};
use crate::error::{Error, Result};
use crate::oracle::Finder;
use crate::scalar::Scalar;
use crate::subset::UserSubset;

/// Euclidean projection of `y` onto the hyperplane `sum_{i in S} x_i = level`.
///
/// Coordinates in `S` are shifted by the same amount, the others are left
/// alone.
pub fn project_onto_hyperplane<T: Scalar>(
    y: &[T],
    subset: &UserSubset,
    level: T,
) -> Result<Vec<T>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    subset.check_within(y.len())?;
    let used: T = subset.iter().map(|i| y[i]).sum();
    let shift = (used - level) / T::from_usize(subset.len()).unwrap();
    let mut x = y.to_vec();
    for i in subset.iter() {
        x[i] = x[i] - shift;
    }
    Ok(x)
}

/// Projects a nonnegative `x` that violates `sum_{i in S} x_i <= level`
/// onto `{x >= 0, sum_{i in S} x_i <= level}`, in place.
///
/// The result sits on the face `sum_S x = level`: every coordinate of `S`
/// drops by a common amount `tau` and is floored at zero. Without flooring
/// this is [`project_onto_hyperplane`]. Returns whether any coordinate was
/// floored.
fn project_onto_capped_face<T: Scalar>(x: &mut [T], subset: &UserSubset, level: T) -> bool {
    let mut values: Vec<T> = subset.iter().map(|i| x[i]).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = T::zero();
    let mut tau = T::zero();
    for (k, &v) in values.iter().enumerate() {
        prefix = prefix + v;
        let candidate = (prefix - level) / T::from_usize(k + 1).unwrap();
        if v > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut floored = false;
    for i in subset.iter() {
        let shifted = x[i] - tau;
        if shifted < T::zero() {
            floored = true;
            x[i] = T::zero();
        } else {
            x[i] = shifted;
        }
    }
    floored
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult<T> {
    /// Feasible to the finder's tolerance.
    pub point: RateVector<T>,
    /// Constraints projected onto, in application order.
    pub hyperplanes_used: Vec<UserSubset>,
    /// Whether any coordinate was raised to or floored at zero.
    pub clamped: bool,
}

/// Maps an arbitrary point into the capacity region.
///
/// Negative coordinates are first raised to zero. Then, while `finder`
/// reports a violated constraint `S`, the point is projected onto
/// `{x >= 0, sum_S x <= capacity(S)}`.
pub fn approximate_projection<T: Scalar>(
    config: &ChannelConfig<T>,
    y: &[T],
    finder: &Finder<T>,
) -> Result<ProjectionResult<T>> {
    config.check_len(y.len())?;
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "cannot project non-finite point entry {v}"
        )));
    }
    let mut clamped = false;
    let mut x: Vec<T> = y
        .iter()
        .map(|&v| {
            if v < T::zero() {
                clamped = true;
                T::zero()
            } else {
                v
            }
        })
        .collect();

    let mut hyperplanes_used = Vec::new();
    while let Some((subset, _)) = finder.find(config, &x)? {
        debug_assert!(!hyperplanes_used.contains(&subset));
        let level = config.capacity(&subset);
        clamped |= project_onto_capped_face(&mut x, &subset, level);
        hyperplanes_used.push(subset);
    }
    Ok(ProjectionResult {
        point: RateVector::from_vec_unchecked(x),
        hyperplanes_used,
        clamped,
    })
}
