#![allow(dead_code)]

use macalloc::ChannelConfig;
use rand::Rng;

/// Independent rank function: `ln(1 + P_S / N) / 2` summed straight from
/// the powers.
pub fn rank(powers: &[f64], noise: f64, mask: usize) -> f64 {
    let p: f64 = (0..powers.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| powers[i])
        .sum();
    0.5 * (1.0 + p / noise).ln()
}

/// Slack of every nonempty subset, indexed by mask.
pub fn slacks(powers: &[f64], noise: f64, rates: &[f64]) -> Vec<(usize, f64)> {
    (1..1usize << powers.len())
        .map(|mask| {
            let used: f64 = (0..rates.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| rates[i])
                .sum();
            (mask, rank(powers, noise, mask) - used)
        })
        .collect()
}

pub fn min_slack(powers: &[f64], noise: f64, rates: &[f64]) -> f64 {
    slacks(powers, noise, rates)
        .into_iter()
        .map(|(_, s)| s)
        .fold(f64::INFINITY, f64::min)
}

pub fn feasible(powers: &[f64], noise: f64, rates: &[f64], tol: f64) -> bool {
    rates.iter().all(|&r| r >= -tol) && min_slack(powers, noise, rates) >= -tol
}

pub fn random_config<R: Rng>(rng: &mut R, m: usize) -> ChannelConfig<f64> {
    let powers = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
    ChannelConfig::new(powers, 1.0).unwrap()
}

/// Uniform random direction in the nonnegative orthant scaled so the point
/// lands at `scale` times the sum capacity in total rate.
pub fn random_rates<R: Rng>(rng: &mut R, config: &ChannelConfig<f64>, scale: f64) -> Vec<f64> {
    let m = config.num_users();
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum::<f64>().max(1e-12);
    let sum_cap = rank(config.powers(), config.noise(), (1 << m) - 1);
    w.iter().map(|x| x / total * sum_cap * scale).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..left.len() {
            let x = left.remove(k);
            prefix.push(x);
            go(prefix, left, out);
            prefix.pop();
            left.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..m).collect(), &mut out);
    out
}
