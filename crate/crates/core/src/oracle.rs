//! Finding violated capacity constraints.
//!
//! Two strategies are provided. [`find_violated_most`] enumerates all
//! `2^M - 1` constraints and returns the most violated one, which is the
//! submodular minimization of `capacity(S) - sum_{i in S} R_i`. It is only
//! usable for small `M`.
//!
//! [`rate_split_analyze`] runs in `O(M^2 log M)` for any `M`. Each user is
//! pictured as a block of height `P_i` stacked above the noise floor at its
//! *elevation*, the extra Gaussian interference it can tolerate while still
//! supporting its rate. Blocks that overlap are merged into hyper-users with
//! summed power and rate. If some (hyper-)user ends up with negative
//! elevation its member set is a violated constraint; if no blocks overlap
//! the configuration is decodable by successive cancellation and is
//! returned as a certificate.

use crate::channel::{capacity_unchecked, ChannelConfig};
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};
use crate::subset::UserSubset;

/// Elevation of a message with the given power and rate: the `delta`
/// solving `rate = C(power, noise + delta)`.
///
/// Zero-rate messages tolerate unbounded interference and get `+inf`.
/// A negative result means the message is undecodable even alone.
pub fn elevation<T: Scalar>(power: T, rate: T, noise: T) -> Result<T> {
    if !(power.is_finite() && power > T::zero()) {
        return Err(Error::Domain(format!(
            "elevation needs positive power, got {power}"
        )));
    }
    if !(rate >= T::zero()) {
        return Err(Error::Domain(format!(
            "elevation needs nonnegative rate, got {rate}"
        )));
    }
    if !(noise > T::zero()) {
        return Err(Error::Domain(format!(
            "elevation needs positive noise, got {noise}"
        )));
    }
    Ok(elevation_unchecked(power, rate, noise))
}

#[inline]
fn elevation_unchecked<T: Scalar>(power: T, rate: T, noise: T) -> T {
    if rate == T::zero() {
        T::infinity()
    } else {
        power / (rate + rate).exp_m1() - noise
    }
}

/// A user or merged hyper-user of a spin-off configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOffUser<T> {
    pub power: T,
    pub rate: T,
    pub elevation: T,
    /// Original users folded into this one.
    pub members: UserSubset,
}

impl<T: Scalar> SpinOffUser<T> {
    fn new(power: T, rate: T, noise: T, members: UserSubset) -> Self {
        SpinOffUser {
            power,
            rate,
            elevation: elevation_unchecked(power, rate, noise),
            members,
        }
    }

    fn merge(&self, other: &Self, noise: T) -> Self {
        Self::new(
            self.power + other.power,
            self.rate + other.rate,
            noise,
            self.members.union(&other.members),
        )
    }
}

/// Users with power, rate and elevation over a shared noise floor. The
/// member sets of the users are disjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    pub noise: T,
    pub users: Vec<SpinOffUser<T>>,
}

impl<T: Scalar> Configuration<T> {
    /// One user per channel user, each its own member.
    pub fn initial(config: &ChannelConfig<T>, rates: &[T]) -> Result<Self> {
        config.check_len(rates.len())?;
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
        let noise = config.noise();
        let users = config
            .powers()
            .iter()
            .zip(rates)
            .enumerate()
            .map(|(i, (&p, &r))| SpinOffUser::new(p, r, noise, UserSubset::singleton(i)))
            .collect();
        Ok(Configuration { noise, users })
    }

    pub fn total_power(&self) -> T {
        self.users.iter().map(|u| u.power).sum()
    }

    pub fn total_rate(&self) -> T {
        self.users.iter().map(|u| u.rate).sum()
    }

    /// Whether the users, taken in `order`, have nonnegative elevations and
    /// non-overlapping blocks: `delta_0 >= 0` and
    /// `delta_{k+1} >= delta_k + p_k` for consecutive entries, up to `tol`.
    pub fn is_single_user_codable(&self, order: &[usize], tol: T) -> bool {
        let mut floor = T::zero();
        for &j in order {
            let u = &self.users[j];
            if u.elevation < floor - tol {
                return false;
            }
            floor = u.elevation + u.power;
        }
        true
    }
}

/// Outcome of the rate-splitting analysis.
#[derive(Clone, Debug, PartialEq)]
pub enum ViolationReport<T> {
    /// The rate tuple is achievable. `decoding_order` lists the users of
    /// `spinoff` by ascending elevation; the list is single-user codable.
    Feasible {
        decoding_order: Vec<usize>,
        spinoff: Configuration<T>,
        merges: usize,
    },
    /// `subset` is a violated constraint with the given (negative) slack.
    Violated {
        subset: UserSubset,
        slack: T,
        merges: usize,
    },
}

impl<T> ViolationReport<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ViolationReport::Feasible { .. })
    }

    pub fn merges(&self) -> usize {
        match self {
            ViolationReport::Feasible { merges, .. } | ViolationReport::Violated { merges, .. } => {
                *merges
            }
        }
    }
}

/// [`rate_split_analyze_with_tol`] at the scalar's default tolerance.
pub fn rate_split_analyze<T: Scalar>(
    config: &ChannelConfig<T>,
    rates: &[T],
) -> Result<ViolationReport<T>> {
    rate_split_analyze_with_tol(config, rates, T::default_tol())
}

/// Merges overlapping users until either some hyper-user has elevation
/// below `-tol` or no two neighbours (in elevation order) overlap by more
/// than `tol`. At most `M - 1` merges happen; each round sorts, so the
/// whole run is `O(M^2 log M)`.
pub fn rate_split_analyze_with_tol<T: Scalar>(
    config: &ChannelConfig<T>,
    rates: &[T],
    tol: T,
) -> Result<ViolationReport<T>> {
    let mut spinoff = Configuration::initial(config, rates)?;
    let noise = spinoff.noise;
    let mut order: Vec<usize> = Vec::with_capacity(spinoff.users.len());
    let mut merges = 0;
    loop {
        let users = &spinoff.users;
        let lowest = (0..users.len())
            .min_by(|&a, &b| users[a].elevation.partial_cmp(&users[b].elevation).unwrap())
            .expect("configuration has at least one user");
        if users[lowest].elevation < -tol {
            let subset = users[lowest].members.clone();
            let slack = config.slack(rates, &subset)?;
            return Ok(ViolationReport::Violated {
                subset,
                slack,
                merges,
            });
        }

        order.clear();
        order.extend(0..users.len());
        order.sort_by(|&a, &b| {
            users[a]
                .elevation
                .partial_cmp(&users[b].elevation)
                .unwrap()
                .then_with(|| users[a].members.first().cmp(&users[b].members.first()))
        });

        let overlap = order.windows(2).find(|w| {
            let (lo, hi) = (&users[w[0]], &users[w[1]]);
            hi.elevation < lo.elevation + lo.power - tol
        });
        let Some(&[a, b]) = overlap else {
            return Ok(ViolationReport::Feasible {
                decoding_order: order,
                spinoff,
                merges,
            });
        };

        let merged = spinoff.users[a].merge(&spinoff.users[b], noise);
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        spinoff.users[keep] = merged;
        spinoff.users.remove(drop);
        merges += 1;
    }
}

/// [`find_violated_most_with_tol`] at the scalar's default tolerance.
pub fn find_violated_most<T: Scalar>(
    config: &ChannelConfig<T>,
    rates: &[T],
) -> Result<Option<(UserSubset, T)>> {
    find_violated_most_with_tol(config, rates, T::default_tol())
}

/// Exhaustive minimization of the constraint slack over nonempty subsets.
///
/// Returns the minimizer when its slack is below `-tol`. Ties go to the
/// smaller subset, then to the smaller bitmask. Limited to
/// [`crate::BRUTE_FORCE_MAX_USERS`] users.
pub fn find_violated_most_with_tol<T: Scalar>(
    config: &ChannelConfig<T>,
    rates: &[T],
    tol: T,
) -> Result<Option<(UserSubset, T)>> {
    config.check_len(rates.len())?;
    config.check_brute_force("most-violated search")?;
    let powers = crate::channel::subset_sums(config.powers());
    let used = crate::channel::subset_sums(rates);
    let noise = config.noise();
    let mut best: Option<(u64, T)> = None;
    for mask in 1..powers.len() {
        let slack = capacity_unchecked(powers[mask], noise) - used[mask];
        let better = match best {
            None => true,
            Some((m, s)) => {
                slack < s
                    || (slack == s
                        && ((mask as u64).count_ones(), mask as u64) < (m.count_ones(), m))
            }
        };
        if better {
            best = Some((mask as u64, slack));
        }
    }
    Ok(best
        .filter(|&(_, s)| s < -tol)
        .map(|(m, s)| (UserSubset::from_mask(m), s)))
}

/// Strategy used by the approximate projection to locate violated
/// constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Finder<T> {
    RateSplit { tol: T },
    MostViolated { tol: T },
}

impl<T: Scalar> Finder<T> {
    pub fn rate_split() -> Self {
        Finder::RateSplit {
            tol: T::default_tol(),
        }
    }

    pub fn most_violated() -> Self {
        Finder::MostViolated {
            tol: T::default_tol(),
        }
    }

    pub fn tol(&self) -> T {
        match *self {
            Finder::RateSplit { tol } | Finder::MostViolated { tol } => tol,
        }
    }

    /// A violated constraint at `rates` with its slack, or `None` when the
    /// point is feasible to tolerance.
    pub fn find(&self, config: &ChannelConfig<T>, rates: &[T]) -> Result<Option<(UserSubset, T)>> {
        match *self {
            Finder::RateSplit { tol } => {
                Ok(match rate_split_analyze_with_tol(config, rates, tol)? {
                    ViolationReport::Violated { subset, slack, .. } => Some((subset, slack)),
                    ViolationReport::Feasible { .. } => None,
                })
            }
            Finder::MostViolated { tol } => find_violated_most_with_tol(config, rates, tol),
        }
    }
}

impl<T: Scalar> Default for Finder<T> {
    fn default() -> Self {
        Self::rate_split()
    }
}
