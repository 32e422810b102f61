//! Canonical partition functions `Z_0..Z_Nmax`.
//!
//! Three independent engines:
//!
//! * [`z_bruteforce`] sums `prod x_j^{n_j}` over every occupation vector. It is
//!   the reference oracle and is only usable on small instances.
//! * [`z_powersum`] is the production engine, the Newton-identity recursion
//!   `Z_N = (1/N) sum_{k=1}^{N} B_k Z_{N-k}` with power sums `B_k = sum_i x_i^k`.
//! * [`z_convolution`] adds one level at a time, `Z'_N = Z_N + x Z'_{N-1}`.
//!
//! All three only ever add positive terms, so they are safe in the log domain.
//! Tables for systems with levels removed are recomputed on the reduced weight
//! vector rather than derived by subtraction.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::Backend;
use crate::spectrum::WeightVector;

/// Default cap on the number of configurations [`z_bruteforce`] will visit.
pub const BRUTEFORCE_MAX_CONFIGS: u64 = 10_000_000;

/// `Z_0..Z_Nmax` for a weight vector with some levels (possibly none) removed.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable<S> {
    weights: WeightVector<S>,
    removed: Vec<usize>,
    values: Vec<S>,
}

impl<S: Backend> PartitionTable<S> {
    /// The generating weights, before removal.
    pub fn weights(&self) -> &WeightVector<S> {
        &self.weights
    }

    /// Sorted indices of the removed levels.
    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn nmax(&self) -> usize {
        self.values.len() - 1
    }

    /// `Z_n`. Panics past `nmax`.
    pub fn get(&self, n: usize) -> &S {
        &self.values[n]
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }
}

/// Weak compositions of `n` into `parts` nonnegative entries, in
/// colexicographic order, generated by an odometer.
///
/// The first vector is `(n, 0, .., 0)` and the last `(0, .., 0, n)`.
#[derive(Debug, Clone)]
pub struct WeakCompositions {
    current: Vec<usize>,
    done: bool,
}

impl WeakCompositions {
    pub fn new(n: usize, parts: usize) -> Self {
        let mut current = alloc::vec![0; parts];
        let done = if parts == 0 {
            n != 0
        } else {
            current[0] = n;
            false
        };
        WeakCompositions { current, done }
    }

    /// `C(n + parts - 1, parts - 1)`.
    pub fn count(n: usize, parts: usize) -> BigUint {
        if parts == 0 {
            return BigUint::from(u8::from(n == 0));
        }
        num_integer::binomial(BigUint::from(n + parts - 1), BigUint::from(parts - 1))
    }

    fn advance(&mut self) {
        let parts = self.current.len();
        match self.current.iter().position(|&v| v > 0) {
            Some(i) if i + 1 < parts => {
                let v = self.current[i];
                self.current[i] = 0;
                self.current[0] = v - 1;
                self.current[i + 1] += 1;
            }
            _ => self.done = true,
        }
    }
}

impl Iterator for WeakCompositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        if out.is_empty() {
            self.done = true;
        } else {
            self.advance();
        }
        Some(out)
    }
}

/// `prod_j x_j^{n_j}` for one occupation vector.
pub fn configuration_weight<S: Backend>(weights: &[S], occupation: &[usize]) -> S {
    weights
        .iter()
        .zip(occupation)
        .filter(|(_, &n)| n > 0)
        .fold(S::one(), |acc, (x, &n)| acc.times(&x.powi(n as u32)))
}

/// Exhaustive enumeration, capped at [`BRUTEFORCE_MAX_CONFIGS`] configurations
/// for the largest `N`.
pub fn z_bruteforce<S: Backend>(w: &WeightVector<S>, nmax: usize) -> Result<PartitionTable<S>> {
    z_bruteforce_capped(w, nmax, BRUTEFORCE_MAX_CONFIGS)
}

pub fn z_bruteforce_capped<S: Backend>(
    w: &WeightVector<S>,
    nmax: usize,
    cap: u64,
) -> Result<PartitionTable<S>> {
    let configs = WeakCompositions::count(nmax, w.len());
    if configs > BigUint::from(cap) {
        return Err(Error::InstanceTooLarge {
            configs: alloc::format!("{configs}"),
            cap,
        });
    }
    let values = (0..=nmax)
        .map(|n| {
            S::sum(
                WeakCompositions::new(n, w.len()).map(|c| configuration_weight(w.as_slice(), &c)),
            )
        })
        .collect();
    Ok(PartitionTable {
        weights: w.clone(),
        removed: Vec::new(),
        values,
    })
}

/// Newton-identity recursion over power sums.
pub fn z_powersum<S: Backend>(w: &WeightVector<S>, nmax: usize) -> PartitionTable<S> {
    PartitionTable {
        weights: w.clone(),
        removed: Vec::new(),
        values: powersum_values(w.as_slice(), nmax),
    }
}

pub(crate) fn powersum_values<S: Backend>(weights: &[S], nmax: usize) -> Vec<S> {
    let mut values = Vec::with_capacity(nmax + 1);
    values.push(S::one());
    if weights.is_empty() {
        values.resize(nmax + 1, S::zero());
        return values;
    }
    // power_sums[k] = B_k; index 0 unused.
    let mut power_sums = Vec::with_capacity(nmax + 1);
    power_sums.push(S::zero());
    let mut powers = weights.to_vec();
    for k in 1..=nmax {
        if k > 1 {
            for (p, x) in powers.iter_mut().zip(weights) {
                *p = p.times(x);
            }
        }
        power_sums.push(S::sum(powers.iter().cloned()));
    }
    for n in 1..=nmax {
        let acc = S::sum((1..=n).map(|k| power_sums[k].times(&values[n - k])));
        values.push(acc.over(&S::from_count(n as u64)));
    }
    values
}

/// Level-by-level convolution with the geometric series of each level.
pub fn z_convolution<S: Backend>(w: &WeightVector<S>, nmax: usize) -> PartitionTable<S> {
    PartitionTable {
        weights: w.clone(),
        removed: Vec::new(),
        values: convolution_values(w.as_slice(), nmax),
    }
}

/// Whichever exact route is cheaper: convolution costs `L * N` steps, the
/// power-sum recursion about `N^2 / 2`.
pub(crate) fn table_values<S: Backend>(weights: &[S], nmax: usize) -> Vec<S> {
    if weights.len() <= nmax {
        convolution_values(weights, nmax)
    } else {
        powersum_values(weights, nmax)
    }
}

pub(crate) fn convolution_values<S: Backend>(weights: &[S], nmax: usize) -> Vec<S> {
    let mut values = alloc::vec![S::zero(); nmax + 1];
    values[0] = S::one();
    for x in weights {
        add_level_in_place(&mut values, x);
    }
    values
}

/// Turns a table for some system into the table of that system plus one
/// level of weight `x`.
pub(crate) fn add_level_in_place<S: Backend>(values: &mut [S], x: &S) {
    for n in 1..values.len() {
        let carried = x.times(&values[n - 1]);
        values[n] = values[n].plus(&carried);
    }
}

/// Table for `w` with the listed levels deleted, recomputed from the reduced
/// weights.
pub fn z_removed_table<S: Backend>(
    w: &WeightVector<S>,
    removed: &[usize],
    nmax: usize,
) -> Result<PartitionTable<S>> {
    let reduced = w.remove_levels(removed)?;
    let mut removed = removed.to_vec();
    removed.sort_unstable();
    Ok(PartitionTable {
        weights: w.clone(),
        removed,
        values: table_values(reduced.as_slice(), nmax),
    })
}

/// Both sides of the level-decomposition identity
/// `Z_N = sum_{k=0}^{N} x_i^k Z_{N-k,i}` and of its rearrangement
/// `Z_{N,i} = Z_N - x_i Z_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCheck<S: Backend> {
    pub level: usize,
    pub n: usize,
    /// `Z_N` of the full system.
    pub full: S,
    /// `sum_k x_i^k Z_{N-k,i}`.
    pub expansion: S,
    /// `Z_{N,i}` from the reduced system.
    pub removed: S,
    /// `Z_N - x_i Z_{N-1}`.
    pub peeled: S::Real,
}

impl<S: Backend> DecompositionCheck<S> {
    pub fn expansion_holds(&self) -> bool {
        agrees::<S>(&self.full.to_real(), &self.expansion.to_real())
    }

    pub fn peeled_holds(&self) -> bool {
        agrees::<S>(&self.removed.to_real(), &self.peeled)
    }

    pub fn holds(&self) -> bool {
        self.expansion_holds() && self.peeled_holds()
    }
}

/// Equality in exact mode, agreement within tolerance in log mode.
pub(crate) fn agrees<S: Backend>(a: &S::Real, b: &S::Real) -> bool {
    matches!(S::classify(a, b), None | Some(core::cmp::Ordering::Equal))
}

pub fn decomposition_check<S: Backend>(
    w: &WeightVector<S>,
    level: usize,
    n: usize,
) -> Result<DecompositionCheck<S>> {
    Ok(decomposition_checks(w, level, n)?.swap_remove(n))
}

/// [`decomposition_check`] for every `n` in `0..=nmax`, sharing the tables.
pub fn decomposition_checks<S: Backend>(
    w: &WeightVector<S>,
    level: usize,
    nmax: usize,
) -> Result<Vec<DecompositionCheck<S>>> {
    w.check_index(level)?;
    let full = powersum_values(w.as_slice(), nmax);
    let reduced = z_removed_table(w, &[level], nmax)?.into_values();
    let x = &w[level];
    let mut powers = Vec::with_capacity(nmax + 1);
    powers.push(S::one());
    for k in 1..=nmax {
        powers.push(powers[k - 1].times(x));
    }
    Ok((0..=nmax)
        .map(|n| {
            let expansion = S::sum((0..=n).map(|k| powers[k].times(&reduced[n - k])));
            let previous = if n == 0 {
                S::Real::zero()
            } else {
                x.times(&full[n - 1]).to_real()
            };
            let peeled = full[n].to_real() - previous;
            DecompositionCheck {
                level,
                n,
                full: full[n].clone(),
                expansion,
                removed: reduced[n].clone(),
                peeled,
            }
        })
        .collect())
}

/// `F_N = -ln Z_N` as doubles.
pub fn free_energy_sequence<S: Backend>(t: &PartitionTable<S>) -> Result<Vec<f64>> {
    t.values()
        .iter()
        .enumerate()
        .map(|(n, z)| {
            if z.is_zero() {
                Err(Error::ZeroPartition(n))
            } else {
                Ok(-z.ln())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{LogFloat, Rational};
    use alloc::vec;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_level() -> WeightVector<Rational> {
        WeightVector::new(vec![q(1, 2), q(1, 4)]).unwrap()
    }

    #[test]
    fn odometer_order() {
        let all: Vec<_> = WeakCompositions::new(2, 3).collect();
        assert_eq!(
            all,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(
            WeakCompositions::new(0, 3).collect::<Vec<_>>(),
            vec![vec![0, 0, 0]]
        );
        assert_eq!(
            WeakCompositions::new(4, 1).collect::<Vec<_>>(),
            vec![vec![4]]
        );
        assert_eq!(WeakCompositions::new(0, 0).count(), 1);
        assert_eq!(WeakCompositions::new(1, 0).count(), 0);
    }

    #[test]
    fn odometer_count_matches_binomial() {
        for n in 0..7 {
            for parts in 1..5 {
                let c = WeakCompositions::new(n, parts).count();
                assert_eq!(BigUint::from(c), WeakCompositions::count(n, parts));
            }
        }
    }

    #[test]
    fn bruteforce_two_level() {
        let t = z_bruteforce(&two_level(), 3).unwrap();
        assert_eq!(t.values(), &[q(1, 1), q(3, 4), q(7, 16), q(15, 64)]);
    }

    #[test]
    fn bruteforce_single_and_double_level() {
        let x = q(2, 3);
        let t = z_bruteforce(&WeightVector::new(vec![x.clone()]).unwrap(), 5).unwrap();
        for (n, z) in t.values().iter().enumerate() {
            assert_eq!(z, &x.powi(n as u32));
        }
        let t = z_bruteforce(&WeightVector::new(vec![x.clone(), x.clone()]).unwrap(), 2).unwrap();
        assert_eq!(t.get(2), &(q(3, 1) * &x * &x));
    }

    #[test]
    fn bruteforce_cap() {
        let w = WeightVector::new(vec![q(1, 2); 10]).unwrap();
        let r = z_bruteforce_capped(&w, 30, 1000);
        assert!(matches!(r, Err(Error::InstanceTooLarge { .. })));
    }

    #[test]
    fn powersum_two_level() {
        let t = z_powersum(&two_level(), 3);
        assert_eq!(t.values(), &[q(1, 1), q(3, 4), q(7, 16), q(15, 64)]);
        let x = q(3, 7);
        let single = z_powersum(&WeightVector::new(vec![x.clone()]).unwrap(), 6);
        for (n, z) in single.values().iter().enumerate() {
            assert_eq!(z, &x.powi(n as u32));
        }
    }

    #[test]
    fn convolution_two_level() {
        assert_eq!(
            z_convolution(&two_level(), 3).values(),
            z_powersum(&two_level(), 3).values()
        );
    }

    #[test]
    fn removed_tables() {
        let w = two_level();
        assert_eq!(
            z_removed_table(&w, &[1], 2).unwrap().values(),
            &[q(1, 1), q(1, 2), q(1, 4)]
        );
        assert_eq!(
            z_removed_table(&w, &[0, 1], 2).unwrap().values(),
            &[q(1, 1), q(0, 1), q(0, 1)]
        );
        let w3 = WeightVector::new(vec![q(1, 2), q(1, 4), q(1, 8)]).unwrap();
        let t = z_removed_table(&w3, &[2], 5).unwrap();
        assert_eq!(t.values(), z_powersum(&w, 5).values());
        assert_eq!(t.removed(), &[2]);
        assert!(z_removed_table(&w, &[2], 2).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let c = decomposition_check(&two_level(), 1, 2).unwrap();
        assert_eq!(c.full, q(7, 16));
        assert_eq!(c.expansion, q(7, 16));
        assert_eq!(c.removed, q(1, 4));
        assert_eq!(c.peeled, q(1, 4));
        assert!(c.holds());
        let c0 = decomposition_check(&two_level(), 0, 0).unwrap();
        assert_eq!(c0.full, q(1, 1));
        assert_eq!(c0.expansion, q(1, 1));
        assert!(c0.holds());
    }

    #[test]
    fn free_energy_values() {
        let f = free_energy_sequence(&z_powersum(&two_level(), 2)).unwrap();
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 0.287_682_072_451_780_9).abs() < 1e-15);
        assert!((f[2] - 0.826_678_573_184_468_2).abs() < 1e-15);
        let empty = z_removed_table(&two_level(), &[0, 1], 2).unwrap();
        assert_eq!(free_energy_sequence(&empty), Err(Error::ZeroPartition(1)));
    }

    #[test]
    fn logfloat_table_tracks_exact() {
        let w = two_level();
        let wl = WeightVector::new(vec![
            LogFloat::from_linear(0.5).unwrap(),
            LogFloat::from_linear(0.25).unwrap(),
        ])
        .unwrap();
        let exact = z_powersum(&w, 12);
        let logs = z_powersum(&wl, 12);
        for (a, b) in exact.values().iter().zip(logs.values()) {
            assert!((a.ln() - b.ln()).abs() <= 1e-12 * a.ln().abs().max(1.0));
        }
    }
}
