//! Gradient projection with approximate projections.
//!
//! Each iteration moves along a subgradient of the utility and maps the
//! result back into the capacity region with
//! [`approximate_projection`](crate::projection::approximate_projection):
//!
//! ```text
//! R^{k+1} = P~(R^k + alpha^k g^k),   g^k in du(R^k),   R^0 = 0
//! ```
//!
//! Subgradient iterations are not monotone in the objective, so the solver
//! keeps the best iterate seen.

use crate::channel::{capacity_unchecked, subset_sums, ChannelConfig, RateVector};
use crate::error::{Error, Result};
use crate::oracle::Finder;
use crate::projection::approximate_projection;
use crate::scalar::{norm, Scalar};
use crate::utility::Utility;

/// Pre-projection violation counts are only enumerated up to this many users.
pub const TRACKED_VIOLATIONS_MAX_USERS: usize = 16;

/// Expansion margin `delta` of the capacity region: relaxing every
/// capacity constraint by `delta` still leaves at most `M` of them violated
/// at any point.
///
/// With powers sorted ascending,
/// `delta = ln(1 + P_1 P_2 / ((N_0 + sum_{i>=3} P_i)(N_0 + sum_i P_i))) / 4`.
/// Single-user channels have no crossing constraints and get `+inf`.
pub fn expansion_delta<T: Scalar>(config: &ChannelConfig<T>) -> T {
    if config.num_users() < 2 {
        return T::infinity();
    }
    let mut powers = config.powers().to_vec();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let noise = config.noise();
    let rest: T = powers[2..].iter().copied().sum();
    let total = config.total_power();
    let ratio = powers[0] * powers[1] / ((noise + rest) * (noise + total));
    T::lit(0.25) * ratio.ln_1p()
}

/// Largest stepsize for which a gradient step from a feasible point, with
/// subgradient norm at most `bound`, violates at most `M` constraints:
/// `expansion_delta / (bound * sqrt(M))`.
pub fn alpha_max<T: Scalar>(config: &ChannelConfig<T>, bound: T) -> Result<T> {
    if !(bound > T::zero()) {
        return Err(Error::Domain(format!(
            "subgradient bound must be positive, got {bound}"
        )));
    }
    let m = config.num_users();
    if m < 2 {
        return Ok(T::infinity());
    }
    Ok(expansion_delta(config) / (bound * T::from_usize(m).unwrap().sqrt()))
}

/// Vertex of the capacity polymatroid obtained by decoding users in reverse
/// `order`: `R_{order[k]} = capacity(order[..=k]) - capacity(order[..k])`.
/// `order` is a zero-based permutation of the users.
pub fn greedy_vertex<T: Scalar>(
    config: &ChannelConfig<T>,
    order: &[usize],
) -> Result<RateVector<T>> {
    let m = config.num_users();
    let mut seen = vec![false; m];
    if order.len() != m
        || order
            .iter()
            .any(|&i| i >= m || std::mem::replace(&mut seen[i], true))
    {
        return Err(Error::InvalidPermutation(m));
    }
    let noise = config.noise();
    let mut rates = vec![T::zero(); m];
    let mut below = T::zero();
    for &i in order {
        let p = config.powers()[i];
        rates[i] = capacity_unchecked(p, noise + below);
        below = below + p;
    }
    Ok(RateVector::from_vec_unchecked(rates))
}

/// Number of capacity constraints with negative slack at `point`.
pub fn count_violations<T: Scalar>(config: &ChannelConfig<T>, point: &[T]) -> Result<usize> {
    config.check_len(point.len())?;
    config.check_brute_force("violation counting")?;
    let powers = subset_sums(config.powers());
    let used = subset_sums(point);
    let noise = config.noise();
    Ok((1..powers.len())
        .filter(|&mask| capacity_unchecked(powers[mask], noise) - used[mask] < T::zero())
        .count())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepsizeRule<T> {
    /// `alpha^k = alpha`.
    Constant { alpha: T },
    /// `alpha^k = alpha0 / sqrt(k + 1)`.
    Diminishing { alpha0: T },
    /// Diminishing, but never above [`alpha_max`] for the utility's bound.
    TheoremCapped { alpha0: T },
}

impl<T: Scalar> StepsizeRule<T> {
    pub const DEFAULT_ALPHA0: f64 = 0.1;

    pub fn diminishing() -> Self {
        StepsizeRule::Diminishing {
            alpha0: T::lit(Self::DEFAULT_ALPHA0),
        }
    }

    fn base(&self) -> T {
        match *self {
            StepsizeRule::Constant { alpha } => alpha,
            StepsizeRule::Diminishing { alpha0 } | StepsizeRule::TheoremCapped { alpha0 } => alpha0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.base();
        if !(a.is_finite() && a > T::zero()) {
            return Err(Error::Domain(format!("stepsize must be positive, got {a}")));
        }
        Ok(())
    }

    /// Stepsize at iteration `k`; `cap` only affects the capped rule.
    pub fn step(&self, k: usize, cap: T) -> T {
        let decay = || T::from_usize(k + 1).unwrap().sqrt();
        match *self {
            StepsizeRule::Constant { alpha } => alpha,
            StepsizeRule::Diminishing { alpha0 } => alpha0 / decay(),
            StepsizeRule::TheoremCapped { alpha0 } => (alpha0 / decay()).min(cap),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSettings<T> {
    pub max_iters: usize,
    /// Stop once, over the last `window` iterations, the best utility grew
    /// by less than this and the mean utility moved by less than this.
    pub tol: T,
    pub window: usize,
    pub finder: Finder<T>,
    /// Count violated constraints before each projection (enumerates all
    /// subsets, skipped above [`TRACKED_VIOLATIONS_MAX_USERS`]).
    pub track_violations: bool,
}

impl<T: Scalar> Default for SolveSettings<T> {
    fn default() -> Self {
        SolveSettings {
            max_iters: 100_000,
            tol: T::lit(1e-9),
            window: 50,
            finder: Finder::rate_split(),
            track_violations: true,
        }
    }
}

impl<T: Scalar> SolveSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Domain(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.window == 0 {
            return Err(Error::Domain("window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub iter: usize,
    /// `R^k`, the feasible iterate the step starts from.
    pub rates: RateVector<T>,
    pub utility: T,
    pub stepsize: T,
    pub grad_norm: T,
    /// Violated constraints at `R^k + alpha^k g^k`, when tracked.
    pub violations_pre_projection: Option<usize>,
    /// Hyperplane projections performed to get `R^{k+1}`.
    pub projections: usize,
    /// Best utility over `R^0..=R^k`.
    pub best_utility: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace<T> {
    pub records: Vec<IterationRecord<T>>,
    pub best_rates: RateVector<T>,
    pub best_utility: T,
    /// Index of the best iterate; may equal `records.len()` when the final
    /// projected point wins.
    pub best_iter: usize,
}

/// Stopping test over the last two windows of `window` iterations: the
/// running best improved by less than `tol` across the latest window, and
/// the mean utility of the latest window differs from the mean of the one
/// before by less than `tol`.
fn stalled<T: Scalar>(records: &[IterationRecord<T>], window: usize, tol: T) -> bool {
    let n = records.len();
    if n < 2 * window {
        return false;
    }
    let improvement = records[n - 1].best_utility - records[n - 1 - window].best_utility;
    let mean = |r: &[IterationRecord<T>]| {
        r.iter().map(|rec| rec.utility).sum::<T>() / T::from_usize(r.len()).unwrap()
    };
    let drift = mean(&records[n - window..]) - mean(&records[n - 2 * window..n - window]);
    improvement < tol && drift.abs() < tol
}

/// Maximizes `utility` over the capacity region of `config`, starting from
/// the origin. Returns the best iterate and the full trace.
pub fn solve<T: Scalar, U: Utility<T> + ?Sized>(
    config: &ChannelConfig<T>,
    utility: &U,
    rule: &StepsizeRule<T>,
    settings: &SolveSettings<T>,
) -> Result<(RateVector<T>, IterationTrace<T>)> {
    config.check_len(utility.dim())?;
    rule.validate()?;
    settings.validate()?;

    let m = config.num_users();
    let cap = match rule {
        StepsizeRule::TheoremCapped { .. } => alpha_max(config, utility.bound())?,
        _ => T::infinity(),
    };
    let track = settings.track_violations && m <= TRACKED_VIOLATIONS_MAX_USERS;

    let mut rates = RateVector::zeros(m);
    let mut best_rates = rates.clone();
    let mut best_utility = T::neg_infinity();
    let mut best_iter = 0;
    let mut records: Vec<IterationRecord<T>> = Vec::new();

    for k in 0..settings.max_iters {
        let value = utility.value(&rates)?;
        if value > best_utility {
            best_utility = value;
            best_rates = rates.clone();
            best_iter = k;
        }
        let g = utility.subgradient(&rates)?;
        let alpha = rule.step(k, cap);
        let stepped: Vec<T> = rates
            .iter()
            .zip(&g)
            .map(|(&r, &gi)| r + alpha * gi)
            .collect();
        let violations = if track {
            Some(count_violations(config, &stepped)?)
        } else {
            None
        };
        let projected = approximate_projection(config, &stepped, &settings.finder)?;
        records.push(IterationRecord {
            iter: k,
            rates: std::mem::replace(&mut rates, projected.point),
            utility: value,
            stepsize: alpha,
            grad_norm: norm(&g),
            violations_pre_projection: violations,
            projections: projected.hyperplanes_used.len(),
            best_utility,
        });
        if stalled(&records, settings.window, settings.tol) {
            break;
        }
    }

    let value = utility.value(&rates)?;
    if value > best_utility {
        best_utility = value;
        best_rates = rates;
        best_iter = records.len();
    }
    Ok((
        best_rates.clone(),
        IterationTrace {
            records,
            best_rates,
            best_utility,
            best_iter,
        },
    ))
}
