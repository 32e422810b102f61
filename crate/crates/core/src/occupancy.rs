//! Occupation-number statistics in the canonical ensemble.
//!
//! Everything is assembled from partition tables of the full system and of
//! systems with one or two levels removed. With `Z_{N,j}` the table without
//! level `j`, the occupation of level `j` has the marginal
//!
//! ```text
//! p_m(x_j) = x_j^m Z_{N-m,j} / Z_N,   m = 0..N
//! ```
//!
//! and conditioning on `N_j = m` leaves an `(N-m)`-particle ensemble of the
//! remaining levels. Pair moments and the sampler are built on that
//! decomposition.

use alloc::vec::Vec;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{Backend, Rational};
use crate::partition::{
    add_level_in_place, configuration_weight, table_values, z_removed_table, WeakCompositions,
    BRUTEFORCE_MAX_CONFIGS,
};
use crate::spectrum::{weights_from_spectrum, InverseTemperature, LevelSet, WeightVector};

/// Distribution of the occupation of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMarginal<S> {
    pub level: usize,
    pub n: usize,
    /// `probs[m]` is the probability that the level holds `m` particles.
    pub probs: Vec<S>,
}

impl<S: Backend> LevelMarginal<S> {
    pub fn total(&self) -> S {
        S::sum(self.probs.iter().cloned())
    }

    pub fn mean(&self) -> S {
        moment(&self.probs, 1)
    }

    pub fn second_moment(&self) -> S {
        moment(&self.probs, 2)
    }
}

fn moment<S: Backend>(probs: &[S], power: u32) -> S {
    S::sum(
        probs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, p)| S::from_count((m as u64).pow(power)).times(p)),
    )
}

/// `x^m * reduced[n - m] / full[n]` for `m = 0..=n`.
fn marginal_from_tables<S: Backend>(x: &S, full: &[S], reduced: &[S], n: usize) -> Vec<S> {
    let z = &full[n];
    let mut power = S::one();
    let mut probs = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m > 0 {
            power = power.times(x);
        }
        probs.push(power.times(&reduced[n - m]).over(z));
    }
    probs
}

pub fn level_marginal<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
    level: usize,
) -> Result<LevelMarginal<S>> {
    w.check_index(level)?;
    let full = table_values(w.as_slice(), n);
    let reduced = z_removed_table(w, &[level], n)?.into_values();
    Ok(LevelMarginal {
        level,
        n,
        probs: marginal_from_tables(&w[level], &full, &reduced, n),
    })
}

/// `<N_i>_N` as the first moment of the level marginal.
pub fn mean_occupation<S: Backend>(w: &WeightVector<S>, n: usize, level: usize) -> Result<S> {
    Ok(level_marginal(w, n, level)?.mean())
}

/// `<N_i>_N` from the full table alone: `sum_{k=1}^{N} x_i^k Z_{N-k} / Z_N`.
///
/// Independent of the removed-level tables; used to cross-check
/// [`mean_occupation`].
pub fn mean_occupation_series<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
    level: usize,
) -> Result<S> {
    w.check_index(level)?;
    let full = table_values(w.as_slice(), n);
    let x = &w[level];
    let mut power = S::one();
    let mut terms = Vec::with_capacity(n);
    for k in 1..=n {
        power = power.times(x);
        terms.push(power.times(&full[n - k]));
    }
    Ok(S::sum(terms).over(&full[n]))
}

/// `<N_i>_n` for every `n` in `0..=nmax`.
pub fn mean_occupation_upto<S: Backend>(
    w: &WeightVector<S>,
    nmax: usize,
    level: usize,
) -> Result<Vec<S>> {
    w.check_index(level)?;
    let full = table_values(w.as_slice(), nmax);
    let reduced = z_removed_table(w, &[level], nmax)?.into_values();
    Ok((0..=nmax)
        .map(|n| moment(&marginal_from_tables(&w[level], &full, &reduced, n), 1))
        .collect())
}

/// Restricted means `<N_i>_{n,j}` for `n = 0..=nmax`, given the tables
/// without `j` and without `{i, j}`:
/// `<N_i>_{n,j} = (1 / Z_{n,j}) sum_k k x_i^k Z_{n-k,i,j}`.
fn restricted_means_from_tables<S: Backend>(
    x: &S,
    without_j: &[S],
    without_ij: &[S],
    nmax: usize,
) -> Vec<S> {
    let mut powers = Vec::with_capacity(nmax + 1);
    powers.push(S::one());
    for k in 1..=nmax {
        powers.push(powers[k - 1].times(x));
    }
    (0..=nmax)
        .map(|n| {
            let acc = S::sum((1..=n).map(|k| {
                S::from_count(k as u64)
                    .times(&powers[k])
                    .times(&without_ij[n - k])
            }));
            acc.over(&without_j[n])
        })
        .collect()
}

fn check_pair<S: Backend>(w: &WeightVector<S>, i: usize, j: usize) -> Result<()> {
    w.check_index(i)?;
    w.check_index(j)?;
    if i == j {
        return Err(Error::SameLevel(i));
    }
    Ok(())
}

/// `<N_i>_{n,j}`: mean occupation of `i` in the `n`-particle ensemble of the
/// system with level `j` removed.
pub fn restricted_mean<S: Backend>(w: &WeightVector<S>, n: usize, i: usize, j: usize) -> Result<S> {
    check_pair(w, i, j)?;
    let without_j = z_removed_table(w, &[j], n)?.into_values();
    let without_ij = z_removed_table(w, &[i, j], n)?.into_values();
    Ok(restricted_means_from_tables(&w[i], &without_j, &without_ij, n).swap_remove(n))
}

/// `<N_i N_j>_N = sum_m m p_m(x_j) <N_i>_{N-m,j}` for `i != j`.
pub fn pair_moment<S: Backend>(w: &WeightVector<S>, n: usize, i: usize, j: usize) -> Result<S> {
    check_pair(w, i, j)?;
    let full = table_values(w.as_slice(), n);
    let without_j = z_removed_table(w, &[j], n)?.into_values();
    let without_ij = z_removed_table(w, &[i, j], n)?.into_values();
    let marginal = marginal_from_tables(&w[j], &full, &without_j, n);
    let restricted = restricted_means_from_tables(&w[i], &without_j, &without_ij, n);
    Ok(pair_from_parts(&marginal, &restricted, n))
}

/// `sum_m p_m(x_j) <N_i>_{N-m,j}`, the mean of `N_i` assembled from its
/// conditional means given `N_j = m`. Equals `<N_i>_N`.
pub fn conditional_mean_decomposition<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
    i: usize,
    j: usize,
) -> Result<S> {
    check_pair(w, i, j)?;
    let full = table_values(w.as_slice(), n);
    let without_j = z_removed_table(w, &[j], n)?.into_values();
    let without_ij = z_removed_table(w, &[i, j], n)?.into_values();
    let marginal = marginal_from_tables(&w[j], &full, &without_j, n);
    let restricted = restricted_means_from_tables(&w[i], &without_j, &without_ij, n);
    Ok(S::sum(
        (0..=n).map(|m| marginal[m].times(&restricted[n - m])),
    ))
}

/// [`conditional_mean_decomposition`] for every ordered pair at once. The
/// diagonal entry `i` is `sum_m m p_m(x_i)`.
pub fn conditional_mean_matrix<S: Backend>(w: &WeightVector<S>, n: usize) -> Result<Vec<Vec<S>>> {
    let levels = w.len();
    if levels == 0 {
        return Err(Error::EmptyWeights);
    }
    let full = table_values(w.as_slice(), n);
    let without: Vec<Vec<S>> = (0..levels)
        .map(|j| z_removed_table(w, &[j], n).map(|t| t.into_values()))
        .collect::<Result<_>>()?;
    let marginals: Vec<Vec<S>> = (0..levels)
        .map(|j| marginal_from_tables(&w[j], &full, &without[j], n))
        .collect();
    let mut out = alloc::vec![alloc::vec![S::zero(); levels]; levels];
    for i in 0..levels {
        out[i][i] = moment(&marginals[i], 1);
        for j in (i + 1)..levels {
            let without_ij = z_removed_table(w, &[i, j], n)?.into_values();
            let r_i = restricted_means_from_tables(&w[i], &without[j], &without_ij, n);
            let r_j = restricted_means_from_tables(&w[j], &without[i], &without_ij, n);
            out[i][j] = S::sum((0..=n).map(|m| marginals[j][m].times(&r_i[n - m])));
            out[j][i] = S::sum((0..=n).map(|m| marginals[i][m].times(&r_j[n - m])));
        }
    }
    Ok(out)
}

fn pair_from_parts<S: Backend>(marginal_j: &[S], restricted_i: &[S], n: usize) -> S {
    S::sum((1..=n).map(|m| {
        S::from_count(m as u64)
            .times(&marginal_j[m])
            .times(&restricted_i[n - m])
    }))
}

/// `<N_i^2>_N = sum_m m^2 p_m(x_i)`.
pub fn second_moment<S: Backend>(w: &WeightVector<S>, n: usize, level: usize) -> Result<S> {
    Ok(level_marginal(w, n, level)?.second_moment())
}

/// Means, second moments, and covariances for one `(weights, N)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyStats<S: Backend> {
    pub n: usize,
    pub means: Vec<S>,
    /// `moments[i][j] = <N_i N_j>_N`, with `<N_i^2>_N` on the diagonal.
    pub moments: Vec<Vec<S>>,
    /// `covariance[i][j] = <N_i N_j>_N - <N_i>_N <N_j>_N`.
    pub covariance: Vec<Vec<S::Real>>,
}

impl<S: Backend> OccupancyStats<S> {
    pub fn levels(&self) -> usize {
        self.means.len()
    }

    pub fn mean_total(&self) -> S {
        S::sum(self.means.iter().cloned())
    }

    pub fn row_sum(&self, i: usize) -> S::Real {
        self.covariance[i]
            .iter()
            .fold(S::Real::zero(), |acc, c| acc + c.clone())
    }
}

/// Full covariance matrix of the occupation numbers.
pub fn covariance_matrix<S: Backend>(w: &WeightVector<S>, n: usize) -> Result<OccupancyStats<S>> {
    let levels = w.len();
    if levels == 0 {
        return Err(Error::EmptyWeights);
    }
    let full = table_values(w.as_slice(), n);
    let without: Vec<Vec<S>> = (0..levels)
        .map(|j| z_removed_table(w, &[j], n).map(|t| t.into_values()))
        .collect::<Result<_>>()?;
    let marginals: Vec<Vec<S>> = (0..levels)
        .map(|j| marginal_from_tables(&w[j], &full, &without[j], n))
        .collect();
    let means: Vec<S> = marginals.iter().map(|p| moment(p, 1)).collect();

    let mut moments = alloc::vec![alloc::vec![S::zero(); levels]; levels];
    for i in 0..levels {
        moments[i][i] = moment(&marginals[i], 2);
        for j in (i + 1)..levels {
            let without_ij = z_removed_table(w, &[i, j], n)?.into_values();
            let r_i = restricted_means_from_tables(&w[i], &without[j], &without_ij, n);
            let value = pair_from_parts(&marginals[j], &r_i, n);
            moments[j][i] = value.clone();
            moments[i][j] = value;
        }
    }
    let covariance = (0..levels)
        .map(|i| {
            (0..levels)
                .map(|j| moments[i][j].to_real() - means[i].to_real() * means[j].to_real())
                .collect()
        })
        .collect();
    Ok(OccupancyStats {
        n,
        means,
        moments,
        covariance,
    })
}

/// `d<N_0>_N / d beta = -sum_{j >= 1} (e_j - e_0) cov(N_0, N_j)`, in the units
/// of the physical inverse temperature.
///
/// Only levels with a nonzero gap contribute. The ground level is the first
/// expanded level.
pub fn beta_derivative_ground<S: Backend>(levels: &LevelSet, n: usize) -> Result<S::Real> {
    let w: WeightVector<S> = weights_from_spectrum(levels)?;
    let energies = levels.expanded_energies();
    let full = table_values(w.as_slice(), n);
    let without_ground = z_removed_table(&w, &[0], n)?.into_values();
    let ground = marginal_from_tables(&w[0], &full, &without_ground, n);
    let mean_ground = moment(&ground, 1).to_real();

    let mut derivative = S::Real::zero();
    for j in 1..w.len() {
        let gap: Rational = &energies[j] - &energies[0];
        if gap.is_zero() {
            continue;
        }
        // <N_0 N_j> = sum_m m p_m(x_0) <N_j>_{N-m,0}
        let without_pair = z_removed_table(&w, &[0, j], n)?.into_values();
        let r_j = restricted_means_from_tables(&w[j], &without_ground, &without_pair, n);
        let pair = pair_from_parts(&ground, &r_j, n).to_real();
        let mean_j = mean_occupation(&w, n, j)?.to_real();
        let cov = pair - mean_ground.clone() * mean_j;
        derivative = derivative - S::real_from_rational(&gap) * cov;
    }
    Ok(derivative)
}

/// Mean occupation of an original level after one level of weight `x` is
/// added, decomposed over the occupation `m` of the new level.
#[derive(Debug, Clone, PartialEq)]
pub struct PlusDecomposition<S> {
    pub level: usize,
    pub n: usize,
    /// `<N_i>_N^+`.
    pub mean: S,
    /// `Z_N^+` of the enlarged system.
    pub z_plus: S,
    /// `mixture[m] = x^m Z_{N-m} / Z_N^+`.
    pub mixture: Vec<S>,
}

pub fn mean_occupation_plus<S: Backend>(
    w: &WeightVector<S>,
    x: S,
    n: usize,
    level: usize,
) -> Result<PlusDecomposition<S>> {
    w.check_index(level)?;
    if x.is_zero() {
        return Err(Error::NonPositiveWeight(alloc::format!("{:?}", x)));
    }
    let full = table_values(w.as_slice(), n);
    let mut plus = full.clone();
    add_level_in_place(&mut plus, &x);
    // The mixture weights are the marginal of the new level.
    let mixture = marginal_from_tables(&x, &plus, &full, n);
    let means = mean_occupation_upto(w, n, level)?;
    let mean = S::sum((0..=n).map(|m| mixture[m].times(&means[n - m])));
    Ok(PlusDecomposition {
        level,
        n,
        mean,
        z_plus: plus[n].clone(),
        mixture,
    })
}

/// Exhaustive moments, the reference for the recursive routes.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceMoments<S> {
    pub z: S,
    pub means: Vec<S>,
    /// `<N_i N_j>_N`, second moments on the diagonal.
    pub moments: Vec<Vec<S>>,
}

pub fn bruteforce_moments<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
) -> Result<BruteForceMoments<S>> {
    let levels = w.len();
    let configs = WeakCompositions::count(n, levels);
    if configs > num_bigint::BigUint::from(BRUTEFORCE_MAX_CONFIGS) {
        return Err(Error::InstanceTooLarge {
            configs: alloc::format!("{configs}"),
            cap: BRUTEFORCE_MAX_CONFIGS,
        });
    }
    let mut z_terms = Vec::new();
    let mut mean_terms: Vec<Vec<S>> = alloc::vec![Vec::new(); levels];
    let mut pair_terms: Vec<Vec<Vec<S>>> = alloc::vec![alloc::vec![Vec::new(); levels]; levels];
    for c in WeakCompositions::new(n, levels) {
        let weight = configuration_weight(w.as_slice(), &c);
        for i in 0..levels {
            if c[i] == 0 {
                continue;
            }
            mean_terms[i].push(S::from_count(c[i] as u64).times(&weight));
            for j in 0..levels {
                if c[j] > 0 {
                    pair_terms[i][j].push(S::from_count((c[i] * c[j]) as u64).times(&weight));
                }
            }
        }
        z_terms.push(weight);
    }
    let z = S::sum(z_terms);
    let means = mean_terms.into_iter().map(|t| S::sum(t).over(&z)).collect();
    let moments = pair_terms
        .into_iter()
        .map(|row| row.into_iter().map(|t| S::sum(t).over(&z)).collect())
        .collect();
    Ok(BruteForceMoments { z, means, moments })
}

/// Identifier of the sampling algorithm, recorded next to sampled output.
pub const SAMPLER_ALGORITHM: &str = "chacha8-seed_from_u64/sequential-inverse-cdf";

/// Exact sequential sampler of occupation vectors.
///
/// Level `j` is drawn from its marginal in the system made of levels
/// `j..L` holding the particles not yet placed. The tables behind those
/// marginals are converted to log-doubles once, up front.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: usize,
    ln_weights: Vec<f64>,
    /// `ln_suffix[j][r] = ln Z_r` of the system made of levels `j..L`.
    ln_suffix: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new<S: Backend>(w: &WeightVector<S>, n: usize) -> Self {
        let levels = w.len();
        let mut table = alloc::vec![S::zero(); n + 1];
        table[0] = S::one();
        let mut ln_suffix = alloc::vec![Vec::new(); levels + 1];
        ln_suffix[levels] = table.iter().map(|z| z.ln()).collect();
        for j in (0..levels).rev() {
            add_level_in_place(&mut table, &w[j]);
            ln_suffix[j] = table.iter().map(|z| z.ln()).collect();
        }
        Sampler {
            n,
            ln_weights: w.iter().map(|x| x.ln()).collect(),
            ln_suffix,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let levels = self.ln_weights.len();
        let mut out = alloc::vec![0; levels];
        let mut remaining = self.n;
        for j in 0..levels {
            if remaining == 0 {
                break;
            }
            if j + 1 == levels {
                out[j] = remaining;
                break;
            }
            let u: f64 = rng.random();
            let ln_total = self.ln_suffix[j][remaining];
            let mut cdf = 0.0;
            let mut chosen = remaining;
            for m in 0..=remaining {
                let ln_p =
                    m as f64 * self.ln_weights[j] + self.ln_suffix[j + 1][remaining - m] - ln_total;
                cdf = (cdf + libm::exp(ln_p)).min(1.0);
                if u < cdf {
                    chosen = m;
                    break;
                }
            }
            out[j] = chosen;
            remaining -= chosen;
        }
        out
    }

    /// `count` configurations from a generator seeded with `seed`.
    pub fn sample_many(&self, seed: u64, count: usize) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

/// One configuration drawn from the canonical distribution.
pub fn sample_configuration<S: Backend>(w: &WeightVector<S>, n: usize, seed: u64) -> Vec<usize> {
    Sampler::new(w, n).sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// One point of a condensate curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<S> {
    pub beta: InverseTemperature,
    /// `<N_0>_N / N`.
    pub fraction: S,
}

/// Ground-level fraction `<N_0>_N / N` along a grid of inverse temperatures.
pub fn condensate_curve<S: Backend>(
    levels: &LevelSet,
    n: usize,
    grid: &[InverseTemperature],
) -> Result<Vec<CurvePoint<S>>> {
    check_beta_grid(grid)?;
    if n == 0 {
        return Err(Error::NoParticles);
    }
    grid.iter()
        .map(|beta| condensate_point(levels, n, beta))
        .collect()
}

pub fn check_beta_grid(grid: &[InverseTemperature]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|b| !(b.physical() > 0.0)) {
        return Err(Error::InvalidBetaGrid);
    }
    if grid
        .windows(2)
        .any(|p| !(p[0].physical() < p[1].physical()))
    {
        return Err(Error::InvalidBetaGrid);
    }
    Ok(())
}

pub fn condensate_point<S: Backend>(
    levels: &LevelSet,
    n: usize,
    beta: &InverseTemperature,
) -> Result<CurvePoint<S>> {
    let w: WeightVector<S> = weights_from_spectrum(&levels.with_beta(beta.clone())?)?;
    let mean = mean_occupation(&w, n, 0)?;
    Ok(CurvePoint {
        beta: beta.clone(),
        fraction: mean.over(&S::from_count(n as u64)),
    })
}
