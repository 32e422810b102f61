//! Finite one-body spectra and their Boltzmann weights.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Index;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{ln_rational, Backend, Rational};

/// Inverse temperature.
///
/// In exact mode the Boltzmann factor of a level with energy `e` is
/// `log_base^(beta * e)`, which is rational whenever `beta * e` is an integer.
/// The physical inverse temperature is then `beta * ln(1 / log_base)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InverseTemperature {
    Float(f64),
    Rational { beta: Rational, log_base: Rational },
}

impl InverseTemperature {
    pub fn rational(beta: Rational, log_base: Rational) -> Result<Self> {
        if !beta.is_positive() {
            return Err(Error::NonPositiveBeta(format!("{beta}")));
        }
        if !log_base.is_positive() || log_base >= Rational::one() {
            return Err(Error::InvalidLogBase(format!("{log_base}")));
        }
        Ok(InverseTemperature::Rational { beta, log_base })
    }

    pub fn float(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::NonPositiveBeta(format!("{beta}")));
        }
        Ok(InverseTemperature::Float(beta))
    }

    /// The inverse temperature in the energy units of the level set.
    pub fn physical(&self) -> f64 {
        match self {
            InverseTemperature::Float(b) => *b,
            InverseTemperature::Rational { beta, log_base } => {
                beta.to_f64().unwrap_or(f64::NAN) * -ln_rational(log_base)
            }
        }
    }

    /// Same log base (if any) with a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        match self {
            InverseTemperature::Float(_) => Self::float(beta),
            InverseTemperature::Rational { log_base, .. } => {
                let b =
                    Rational::from_float(beta).ok_or(Error::NonPositiveBeta(format!("{beta}")))?;
                Self::rational(b, log_base.clone())
            }
        }
    }
}

/// A finite spectrum: distinct ascending energies with degeneracies.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    energies: Vec<Rational>,
    degeneracies: Vec<u32>,
    beta: InverseTemperature,
}

impl LevelSet {
    pub fn new(
        energies: Vec<Rational>,
        degeneracies: Vec<u32>,
        beta: InverseTemperature,
    ) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidLevelSet("at least one energy is required"));
        }
        if energies.len() != degeneracies.len() {
            return Err(Error::InvalidLevelSet("one degeneracy per energy"));
        }
        if energies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLevelSet(
                "energies must be strictly ascending",
            ));
        }
        if degeneracies.contains(&0) {
            return Err(Error::InvalidLevelSet("degeneracies must be >= 1"));
        }
        match &beta {
            InverseTemperature::Float(b) if !(*b > 0.0 && b.is_finite()) => {
                return Err(Error::NonPositiveBeta(format!("{b}")))
            }
            InverseTemperature::Rational { beta, log_base } => {
                InverseTemperature::rational(beta.clone(), log_base.clone())?;
            }
            _ => {}
        }
        Ok(LevelSet {
            energies,
            degeneracies,
            beta,
        })
    }

    /// Nondegenerate levels with the given energies.
    pub fn simple(energies: Vec<Rational>, beta: InverseTemperature) -> Result<Self> {
        let n = energies.len();
        Self::new(energies, alloc::vec![1; n], beta)
    }

    pub fn energies(&self) -> &[Rational] {
        &self.energies
    }

    pub fn degeneracies(&self) -> &[u32] {
        &self.degeneracies
    }

    pub fn beta(&self) -> &InverseTemperature {
        &self.beta
    }

    pub fn with_beta(&self, beta: InverseTemperature) -> Result<Self> {
        Self::new(self.energies.clone(), self.degeneracies.clone(), beta)
    }

    /// Total number of one-body states, degeneracies expanded.
    pub fn level_count(&self) -> usize {
        self.degeneracies.iter().map(|&d| d as usize).sum()
    }

    /// Energy of every expanded level, ascending.
    pub fn expanded_energies(&self) -> Vec<Rational> {
        self.energies
            .iter()
            .zip(&self.degeneracies)
            .flat_map(|(e, &d)| core::iter::repeat_n(e.clone(), d as usize))
            .collect()
    }

    /// Whether the ground level is separated from an excited level, i.e. there
    /// are at least two distinct energies.
    pub fn has_gap(&self) -> bool {
        self.level_count() >= 2 && self.energies.len() >= 2
    }
}

/// Boltzmann factors, one per one-body state. Every entry is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<S> {
    weights: Vec<S>,
}

impl<S: Backend> WeightVector<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if let Some(w) = weights.iter().find(|w| w.is_zero()) {
            return Err(Error::NonPositiveWeight(format!("{:?}", w)));
        }
        Ok(WeightVector { weights })
    }

    pub fn from_rationals(weights: &[Rational]) -> Result<Self> {
        let converted = weights
            .iter()
            .map(|q| {
                if q.is_zero() {
                    Err(Error::NonPositiveWeight(format!("{q}")))
                } else {
                    S::from_rational(q)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(converted)
    }

    /// The zero-level system reached by removing every level.
    pub fn empty() -> Self {
        WeightVector {
            weights: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.weights
    }

    pub fn iter(&self) -> core::slice::Iter<'_, S> {
        self.weights.iter()
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    /// Appends one level with weight `x`.
    pub fn add_level(&self, x: S) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::NonPositiveWeight(format!("{:?}", x)));
        }
        let mut weights = self.weights.clone();
        weights.push(x);
        Ok(WeightVector { weights })
    }

    /// Deletes level `index`. Refuses to empty the system.
    pub fn remove_level(&self, index: usize) -> Result<Self> {
        self.check_index(index)?;
        if self.len() == 1 {
            return Err(Error::LastLevel);
        }
        self.remove_level_allow_empty(index)
    }

    /// Like [`remove_level`](Self::remove_level) but may produce the empty
    /// system; only the `N = 0` partition value is then nonzero.
    pub fn remove_level_allow_empty(&self, index: usize) -> Result<Self> {
        self.check_index(index)?;
        let mut weights = self.weights.clone();
        weights.remove(index);
        Ok(WeightVector { weights })
    }

    /// Deletes a set of levels at once (possibly all of them).
    pub fn remove_levels(&self, removed: &[usize]) -> Result<Self> {
        let mut mask = alloc::vec![false; self.len()];
        for &i in removed {
            self.check_index(i)?;
            if mask[i] {
                return Err(Error::DuplicateIndex(i));
            }
            mask[i] = true;
        }
        let weights = self
            .weights
            .iter()
            .zip(&mask)
            .filter(|(_, &gone)| !gone)
            .map(|(w, _)| w.clone())
            .collect();
        Ok(WeightVector { weights })
    }
}

impl<S> Index<usize> for WeightVector<S> {
    type Output = S;

    fn index(&self, index: usize) -> &S {
        &self.weights[index]
    }
}

/// Expanded Boltzmann factors of a level set, ascending in energy.
pub fn weights_from_spectrum<S: Backend>(levels: &LevelSet) -> Result<WeightVector<S>> {
    let mut weights = Vec::with_capacity(levels.level_count());
    for (e, &d) in levels.energies.iter().zip(&levels.degeneracies) {
        let x = S::boltzmann(e, &levels.beta)?;
        if x.is_zero() {
            return Err(Error::NonPositiveWeight(format!(
                "exp(-beta * {e}) underflows"
            )));
        }
        weights.extend(core::iter::repeat_n(x, d as usize));
    }
    WeightVector::new(weights)
}

/// Injective map from the levels of `small` into the levels of `large` that
/// matches equal weights, repeated values counted with multiplicity.
///
/// Entry `k` of the result is the position in `large` of level `k` of `small`.
/// Equal weights are paired in order of appearance.
pub fn superset_embedding<S: Backend>(
    small: &WeightVector<S>,
    large: &WeightVector<S>,
) -> Result<Vec<usize>> {
    let mut used = alloc::vec![false; large.len()];
    let mut map = Vec::with_capacity(small.len());
    for w in small.iter() {
        let slot = (0..large.len())
            .find(|&k| !used[k] && large[k].matches(w))
            .ok_or_else(|| Error::NotASuperset(format!("{:?}", w)))?;
        used[slot] = true;
        map.push(slot);
    }
    Ok(map)
}
