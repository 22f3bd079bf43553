//! The Gaussian multiple-access channel and its capacity region.
//!
//! Every rate in this crate is in nats per channel use. Powers and noise are
//! linear-scale received SNR units; there is no dB handling here.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};
use crate::subset::UserSubset;

/// Largest user count accepted by the `2^M` enumeration routines.
pub const BRUTE_FORCE_MAX_USERS: usize = 20;

/// Capacity of an AWGN channel, `ln(1 + power / noise) / 2` nats.
pub fn awgn_capacity<T: Scalar>(power: T, noise: T) -> Result<T> {
    if !(noise > T::zero()) {
        return Err(Error::Domain(format!(
            "noise must be positive, got {noise}"
        )));
    }
    if !(power >= T::zero()) {
        return Err(Error::Domain(format!(
            "power must be nonnegative, got {power}"
        )));
    }
    Ok(capacity_unchecked(power, noise))
}

#[inline]
pub(crate) fn capacity_unchecked<T: Scalar>(power: T, noise: T) -> T {
    T::lit(0.5) * (power / noise).ln_1p()
}

/// Received powers and noise level of an `M`-user channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig<T> {
    powers: Vec<T>,
    noise: T,
}

impl<T: Scalar> ChannelConfig<T> {
    pub fn new(powers: Vec<T>, noise: T) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::NoUsers);
        }
        if let Some((user, &p)) = powers
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > T::zero()))
        {
            return Err(Error::InvalidPower {
                user,
                value: to_f64(p),
            });
        }
        if !(noise.is_finite() && noise > T::zero()) {
            return Err(Error::InvalidNoise(to_f64(noise)));
        }
        Ok(ChannelConfig { powers, noise })
    }

    pub fn num_users(&self) -> usize {
        self.powers.len()
    }

    pub fn powers(&self) -> &[T] {
        &self.powers
    }

    pub fn noise(&self) -> T {
        self.noise
    }

    pub fn total_power(&self) -> T {
        self.powers.iter().copied().sum()
    }

    /// Rank function of the capacity polymatroid: the AWGN capacity of the
    /// summed power of `subset`. Zero for the empty set.
    ///
    /// Panics if `subset` names a user outside the channel.
    pub fn capacity(&self, subset: &UserSubset) -> T {
        let power: T = subset.iter().map(|i| self.powers[i]).sum();
        capacity_unchecked(power, self.noise)
    }

    /// Sum-rate capacity, the rank of the full user set.
    pub fn sum_capacity(&self) -> T {
        capacity_unchecked(self.total_power(), self.noise)
    }

    /// `capacity(S) - sum_{i in S} R_i`; negative iff the constraint is violated.
    pub fn slack(&self, rates: &[T], subset: &UserSubset) -> Result<T> {
        self.check_len(rates.len())?;
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        subset.check_within(self.num_users())?;
        let used: T = subset.iter().map(|i| rates[i]).sum();
        Ok(self.capacity(subset) - used)
    }

    /// Checks every one of the `2^M - 1` capacity constraints and the
    /// nonnegativity of `rates`, all to absolute tolerance `tol`.
    pub fn is_feasible_bruteforce(&self, rates: &[T], tol: T) -> Result<bool> {
        self.check_len(rates.len())?;
        if rates.iter().any(|&r| !(r >= -tol)) {
            return Ok(false);
        }
        let caps = self.capacity_table()?;
        let sums = subset_sums(rates);
        Ok(caps.iter().zip(&sums).skip(1).all(|(&c, &s)| c - s >= -tol))
    }

    /// `capacity(S)` for every subset, indexed by bitmask.
    pub fn capacity_table(&self) -> Result<Vec<T>> {
        self.check_brute_force("subset enumeration")?;
        Ok(subset_sums(&self.powers)
            .into_iter()
            .map(|p| capacity_unchecked(p, self.noise))
            .collect())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_users() {
            return Err(Error::DimensionMismatch {
                expected: self.num_users(),
                got: len,
            });
        }
        Ok(())
    }

    pub(crate) fn check_brute_force(&self, what: &'static str) -> Result<()> {
        if self.num_users() > BRUTE_FORCE_MAX_USERS {
            return Err(Error::TooManyUsers {
                what,
                users: self.num_users(),
                cap: BRUTE_FORCE_MAX_USERS,
            });
        }
        Ok(())
    }
}

/// `sum_{i in S} values[i]` for every bitmask `S`.
pub(crate) fn subset_sums<T: Scalar>(values: &[T]) -> Vec<T> {
    let n = 1usize << values.len();
    let mut sums = vec![T::zero(); n];
    for mask in 1..n {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + values[low];
    }
    sums
}

/// A rate tuple with nonnegative finite entries, in nats per channel use.
///
/// Points that may leave the orthant (gradient steps before projection) are
/// plain slices.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector<T>(Vec<T>);

impl<T: Scalar> RateVector<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some((index, &r)) = rates
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r >= T::zero()))
        {
            return Err(Error::InvalidRate {
                index,
                value: to_f64(r),
            });
        }
        Ok(RateVector(rates))
    }

    /// Like [`RateVector::new`], also checking the length against `config`.
    pub fn for_config(config: &ChannelConfig<T>, rates: Vec<T>) -> Result<Self> {
        config.check_len(rates.len())?;
        Self::new(rates)
    }

    pub fn zeros(users: usize) -> Self {
        RateVector(vec![T::zero(); users])
    }

    pub(crate) fn from_vec_unchecked(rates: Vec<T>) -> Self {
        debug_assert!(rates.iter().all(|&r| r >= T::zero()));
        RateVector(rates)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }
}

impl<T> Deref for RateVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}
