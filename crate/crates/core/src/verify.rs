//! Exact checks of the convexity lemma, the monotonicity theorem and the
//! supporting identities, plus a seeded random campaign over all of them.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compositions::{
    coefficient_row_polynomial, count_bounded_row, enumerate_partitions, product_decomposition_row,
    CapVector,
};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::numerics::{Backend, Rational, Scalar};
use crate::occupancy::{
    beta_derivative_ground, bruteforce_moments, conditional_mean_matrix, covariance_matrix,
    mean_occupation_plus, mean_occupation_upto,
};
use crate::partition::{decomposition_checks, z_bruteforce_capped, z_powersum};
use crate::spectrum::{
    superset_embedding, weights_from_spectrum, InverseTemperature, LevelSet, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Claim {
    Lemma,
    Subadditivity,
    ThmI,
    ThmII,
    ThmIII,
    ThmIV,
    ThmIVPrime,
    CoeffMonotone,
    CoeffSymmetry,
    CoeffTotal,
    CoeffPolynomial,
    Eq5,
    Eq7,
    Eq11,
    Eq13Product,
    ZeroRowSum,
    MeanTotal,
}

impl Claim {
    pub const ALL: [Claim; 17] = [
        Claim::Lemma,
        Claim::Subadditivity,
        Claim::ThmI,
        Claim::ThmII,
        Claim::ThmIII,
        Claim::ThmIV,
        Claim::ThmIVPrime,
        Claim::CoeffMonotone,
        Claim::CoeffSymmetry,
        Claim::CoeffTotal,
        Claim::CoeffPolynomial,
        Claim::Eq5,
        Claim::Eq7,
        Claim::Eq11,
        Claim::Eq13Product,
        Claim::ZeroRowSum,
        Claim::MeanTotal,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Claim::Lemma => "lemma",
            Claim::Subadditivity => "subadditivity",
            Claim::ThmI => "thm_i",
            Claim::ThmII => "thm_ii",
            Claim::ThmIII => "thm_iii",
            Claim::ThmIV => "thm_iv",
            Claim::ThmIVPrime => "thm_iv_prime",
            Claim::CoeffMonotone => "coeff_monotone",
            Claim::CoeffSymmetry => "coeff_symmetry",
            Claim::CoeffTotal => "coeff_total",
            Claim::CoeffPolynomial => "coeff_polynomial",
            Claim::Eq5 => "eq5",
            Claim::Eq7 => "eq7",
            Claim::Eq11 => "eq11",
            Claim::Eq13Product => "eq13_product",
            Claim::ZeroRowSum => "zero_row_sum",
            Claim::MeanTotal => "mean_total",
        }
    }

    pub fn from_id(id: &str) -> Option<Claim> {
        Claim::ALL.iter().copied().find(|c| c.id() == id)
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    PassStrict,
    PassWeak,
    Vacuous,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::PassStrict,
        Verdict::PassWeak,
        Verdict::Vacuous,
        Verdict::Fail,
        Verdict::Indeterminate,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Verdict::PassStrict => "pass_strict",
            Verdict::PassWeak => "pass_weak",
            Verdict::Vacuous => "vacuous",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::PassStrict | Verdict::PassWeak)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One side of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Rational(Rational),
    Float(f64),
    Integer(BigUint),
    None,
}

impl Witness {
    pub fn from_real<S: Backend>(r: &S::Real) -> Witness {
        match S::real_to_rational(r) {
            Some(q) => Witness::Rational(q),
            None => Witness::Float(S::real_to_f64(r)),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Rational(q) => write!(f, "{q}"),
            Witness::Float(x) => write!(f, "{x:e}"),
            Witness::Integer(n) => write!(f, "{n}"),
            Witness::None => Ok(()),
        }
    }
}

/// The system a report refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemDescriptor {
    Weights(Vec<Scalar>),
    Levels(LevelSet),
    Caps(CapVector),
}

/// Everything needed to rebuild a checked instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: u64,
    /// Seed the instance was generated from, if it was generated.
    pub seed: Option<u64>,
    pub system: SystemDescriptor,
    pub extra_weights: Vec<Scalar>,
    pub superset: Option<Vec<Scalar>>,
}

impl Instance {
    pub fn new(id: u64, system: SystemDescriptor) -> Self {
        Instance {
            id,
            seed: None,
            system,
            extra_weights: Vec::new(),
            superset: None,
        }
    }

    pub fn weights<S: Backend>(id: u64, w: &WeightVector<S>) -> Self {
        Instance::new(
            id,
            SystemDescriptor::Weights(w.iter().map(Backend::to_scalar).collect()),
        )
    }
}

/// Where inside an instance a comparison was made.
///
/// `indices` depends on the claim: `[m, n]` for the lemma and
/// subadditivity, the level for (i), (iii)-(iv′) and the single-level
/// identities, `[i, j]` for pairs, `[k, i]` for the `k`-th extra weight in
/// (iv), `[m]` for coefficient and product checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub n: Option<usize>,
    pub indices: Vec<usize>,
    pub note: &'static str,
}

impl Location {
    pub fn at(n: usize, indices: Vec<usize>) -> Self {
        Location {
            n: Some(n),
            indices,
            note: "",
        }
    }

    fn noted(mut self, note: &'static str) -> Self {
        self.note = note;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub claim: Claim,
    pub instance: Arc<Instance>,
    pub location: Location,
    pub verdict: Verdict,
    pub lhs: Witness,
    pub rhs: Witness,
}

/// Sign classifier used for every weight comparison. Replaceable so the
/// harness can be checked against a deliberately broken comparator.
pub type Comparator<S> = fn(&<S as Backend>::Real, &<S as Backend>::Real) -> Option<Ordering>;

/// Options for [`Verifier::theorem`].
#[derive(Debug, Clone)]
pub struct TheoremOptions<S> {
    pub extra_weights: Vec<S>,
    pub superset: Option<WeightVector<S>>,
    /// Ask for (iii); needs a system with energies.
    pub beta_derivative: bool,
}

impl<S> Default for TheoremOptions<S> {
    fn default() -> Self {
        TheoremOptions {
            extra_weights: Vec::new(),
            superset: None,
            beta_derivative: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TheoremSystem<S> {
    Weights(WeightVector<S>),
    Levels(LevelSet),
}

#[derive(Clone, Copy)]
pub struct Verifier<S: Backend> {
    compare: Comparator<S>,
    limits: Limits,
}

impl<S: Backend> Default for Verifier<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Backend> fmt::Debug for Verifier<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Verifier")
            .field("mode", &S::MODE)
            .field("limits", &self.limits)
            .finish()
    }
}

impl<S: Backend> Verifier<S> {
    pub fn new() -> Self {
        Verifier {
            compare: S::classify,
            limits: Limits::default(),
        }
    }

    pub fn with_comparator(compare: Comparator<S>) -> Self {
        Verifier {
            compare,
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    fn report(
        &self,
        claim: Claim,
        instance: &Arc<Instance>,
        location: Location,
        verdict: Verdict,
        lhs: &S::Real,
        rhs: &S::Real,
    ) -> VerificationReport {
        VerificationReport {
            claim,
            instance: Arc::clone(instance),
            location,
            verdict,
            lhs: Witness::from_real::<S>(lhs),
            rhs: Witness::from_real::<S>(rhs),
        }
    }

    /// `lhs <= rhs`, strict or not.
    fn at_most(
        &self,
        claim: Claim,
        instance: &Arc<Instance>,
        location: Location,
        lhs: S::Real,
        rhs: S::Real,
    ) -> VerificationReport {
        let verdict = match (self.compare)(&lhs, &rhs) {
            Some(Ordering::Less) => Verdict::PassStrict,
            Some(Ordering::Equal) => Verdict::PassWeak,
            Some(Ordering::Greater) => Verdict::Fail,
            None => Verdict::Indeterminate,
        };
        self.report(claim, instance, location, verdict, &lhs, &rhs)
    }

    /// `lhs < rhs`; equality fails.
    fn below(
        &self,
        claim: Claim,
        instance: &Arc<Instance>,
        location: Location,
        lhs: S::Real,
        rhs: S::Real,
    ) -> VerificationReport {
        let verdict = match (self.compare)(&lhs, &rhs) {
            Some(Ordering::Less) => Verdict::PassStrict,
            Some(_) => Verdict::Fail,
            None => Verdict::Indeterminate,
        };
        self.report(claim, instance, location, verdict, &lhs, &rhs)
    }

    /// `lhs == rhs`. In log mode agreement within tolerance passes weakly.
    fn equal(
        &self,
        claim: Claim,
        instance: &Arc<Instance>,
        location: Location,
        lhs: S::Real,
        rhs: S::Real,
    ) -> VerificationReport {
        let verdict = match (self.compare)(&lhs, &rhs) {
            Some(Ordering::Equal) => Verdict::PassStrict,
            Some(_) => Verdict::Fail,
            None => Verdict::PassWeak,
        };
        self.report(claim, instance, location, verdict, &lhs, &rhs)
    }

    fn vacuous(
        &self,
        claim: Claim,
        instance: &Arc<Instance>,
        location: Location,
    ) -> VerificationReport {
        VerificationReport {
            claim,
            instance: Arc::clone(instance),
            location,
            verdict: Verdict::Vacuous,
            lhs: Witness::None,
            rhs: Witness::None,
        }
    }

    /// `Z_m Z_{n+1} <= Z_{m+1} Z_n` for `0 <= m < n < nmax`, and
    /// `Z_{m+n} <= Z_m Z_n` for `1 <= m <= n`, `m + n <= nmax`.
    pub fn lemma(
        &self,
        w: &WeightVector<S>,
        nmax: usize,
        instance: &Arc<Instance>,
    ) -> Result<Vec<VerificationReport>> {
        self.limits.check_table(S::MODE, w.len(), nmax)?;
        let z = z_powersum(w, nmax).into_values();
        let mut out = Vec::new();
        for n in 1..nmax {
            for m in 0..n {
                let lhs = z[m].times(&z[n + 1]).to_real();
                let rhs = z[m + 1].times(&z[n]).to_real();
                out.push(self.at_most(
                    Claim::Lemma,
                    instance,
                    Location::at(n, alloc::vec![m, n]),
                    lhs,
                    rhs,
                ));
            }
        }
        for m in 1..=nmax / 2 {
            for n in m..=nmax - m {
                let lhs = z[m + n].to_real();
                let rhs = z[m].times(&z[n]).to_real();
                out.push(self.at_most(
                    Claim::Subadditivity,
                    instance,
                    Location::at(m + n, alloc::vec![m, n]),
                    lhs,
                    rhs,
                ));
            }
        }
        Ok(out)
    }

    /// Theorem (i), (ii), (iv), (iv′) and, for level sets, (iii).
    pub fn theorem(
        &self,
        system: &TheoremSystem<S>,
        n: usize,
        options: &TheoremOptions<S>,
        instance: &Arc<Instance>,
    ) -> Result<Vec<VerificationReport>> {
        let w = match system {
            TheoremSystem::Weights(w) => {
                if options.beta_derivative {
                    return Err(Error::EnergiesRequired);
                }
                w.clone()
            }
            TheoremSystem::Levels(levels) => weights_from_spectrum(levels)?,
        };
        self.limits.check_table(S::MODE, w.len() + 1, n + 1)?;
        let mut out = Vec::new();

        // (i)
        let means: Vec<Vec<S>> = (0..w.len())
            .map(|i| mean_occupation_upto(&w, n + 1, i))
            .collect::<Result<_>>()?;
        for (i, row) in means.iter().enumerate() {
            out.push(self.below(
                Claim::ThmI,
                instance,
                Location::at(n, alloc::vec![i]),
                row[n].to_real(),
                row[n + 1].to_real(),
            ));
        }

        // (ii)
        if w.len() < 2 {
            out.push(self.vacuous(Claim::ThmII, instance, Location::at(n, Vec::new())));
        } else {
            let stats = covariance_matrix(&w, n)?;
            for i in 0..w.len() {
                for j in (i + 1)..w.len() {
                    let cov = stats.covariance[i][j].clone();
                    out.push(self.below(
                        Claim::ThmII,
                        instance,
                        Location::at(n, alloc::vec![i, j]),
                        cov,
                        S::Real::zero(),
                    ));
                }
            }
        }

        // (iii)
        if let TheoremSystem::Levels(levels) = system {
            out.push(self.beta_derivative(levels, n, instance)?);
        }

        // (iv)
        for (k, x) in options.extra_weights.iter().enumerate() {
            for i in 0..w.len() {
                let plus = mean_occupation_plus(&w, x.clone(), n, i)?;
                out.push(self.below(
                    Claim::ThmIV,
                    instance,
                    Location::at(n, alloc::vec![k, i]),
                    plus.mean.to_real(),
                    means[i][n].to_real(),
                ));
            }
        }

        // (iv′)
        if let Some(large) = &options.superset {
            let map = superset_embedding(&w, large)?;
            if large.len() == w.len() {
                out.push(self.vacuous(Claim::ThmIVPrime, instance, Location::at(n, Vec::new())));
            } else {
                self.limits.check_table(S::MODE, large.len(), n)?;
                for (i, &k) in map.iter().enumerate() {
                    let bigger = mean_occupation_upto(large, n, k)?;
                    out.push(self.below(
                        Claim::ThmIVPrime,
                        instance,
                        Location::at(n, alloc::vec![i, k]),
                        bigger[n].to_real(),
                        means[i][n].to_real(),
                    ));
                }
            }
        }
        Ok(out)
    }

    /// Theorem (iii): the ground occupation grows with the inverse temperature.
    pub fn beta_derivative(
        &self,
        levels: &LevelSet,
        n: usize,
        instance: &Arc<Instance>,
    ) -> Result<VerificationReport> {
        let location = Location::at(n, alloc::vec![0]);
        if !levels.has_gap() {
            return Ok(self.vacuous(Claim::ThmIII, instance, location));
        }
        self.limits.check_table(S::MODE, levels.level_count(), n)?;
        let d = beta_derivative_ground::<S>(levels, n)?;
        Ok(self.below(Claim::ThmIII, instance, location, S::Real::zero(), d))
    }

    /// Level decomposition, peeling, the conditional mean decomposition,
    /// pair moments against enumeration, covariance row sums, total mean and,
    /// when small enough, the product decomposition.
    pub fn identities(
        &self,
        w: &WeightVector<S>,
        n: usize,
        instance: &Arc<Instance>,
    ) -> Result<Vec<VerificationReport>> {
        self.limits.check_table(S::MODE, w.len(), n)?;
        let mut out = Vec::new();
        for i in 0..w.len() {
            for check in decomposition_checks(w, i, n)? {
                let k = check.n;
                out.push(self.equal(
                    Claim::Eq5,
                    instance,
                    Location::at(k, alloc::vec![i]).noted("expansion"),
                    check.full.to_real(),
                    check.expansion.to_real(),
                ));
                out.push(self.equal(
                    Claim::Eq5,
                    instance,
                    Location::at(k, alloc::vec![i]).noted("peeled"),
                    check.removed.to_real(),
                    check.peeled,
                ));
            }
        }

        let means: Vec<S> = (0..w.len())
            .map(|i| mean_occupation_upto(w, n, i).map(|m| m[n].clone()))
            .collect::<Result<_>>()?;
        let assembled = conditional_mean_matrix(w, n)?;
        for i in 0..w.len() {
            for j in 0..w.len() {
                if i != j {
                    out.push(self.equal(
                        Claim::Eq7,
                        instance,
                        Location::at(n, alloc::vec![i, j]),
                        means[i].to_real(),
                        assembled[i][j].to_real(),
                    ));
                }
            }
        }

        let stats = covariance_matrix(w, n)?;
        match z_bruteforce_capped(w, n, self.limits.bruteforce_max_configs) {
            Ok(_) => {
                let brute = bruteforce_moments(w, n)?;
                for i in 0..w.len() {
                    for j in 0..w.len() {
                        out.push(self.equal(
                            Claim::Eq11,
                            instance,
                            Location::at(n, alloc::vec![i, j]),
                            stats.moments[i][j].to_real(),
                            brute.moments[i][j].to_real(),
                        ));
                    }
                }
            }
            Err(Error::InstanceTooLarge { .. }) => {}
            Err(e) => return Err(e),
        }
        // sum_j cov(i, j) = 0, written as sum_j <N_i N_j> = N <N_i>
        for i in 0..w.len() {
            let moments = S::sum(stats.moments[i].iter().cloned());
            let scaled = S::from_count(n as u64).times(&means[i]);
            out.push(self.equal(
                Claim::ZeroRowSum,
                instance,
                Location::at(n, alloc::vec![i]),
                moments.to_real(),
                scaled.to_real(),
            ));
        }
        out.push(self.equal(
            Claim::MeanTotal,
            instance,
            Location::at(n, Vec::new()),
            S::sum(means).to_real(),
            S::real_from_count(n as u64),
        ));

        if self.limits.check_orbit(w.len(), n).is_ok() {
            for d in product_decomposition_row(w, n)? {
                out.push(self.equal(
                    Claim::Eq13Product,
                    instance,
                    Location::at(n, alloc::vec![d.m]),
                    d.lhs.to_real(),
                    d.rhs.to_real(),
                ));
            }
        }
        Ok(out)
    }
}

fn integer_report(
    claim: Claim,
    instance: &Arc<Instance>,
    location: Location,
    verdict: Verdict,
    lhs: &BigUint,
    rhs: &BigUint,
) -> VerificationReport {
    VerificationReport {
        claim,
        instance: Arc::clone(instance),
        location,
        verdict,
        lhs: Witness::Integer(lhs.clone()),
        rhs: Witness::Integer(rhs.clone()),
    }
}

/// Midpoint monotonicity, symmetry, the row total and the polynomial oracle
/// for the bounded composition counts of `p`.
pub fn verify_coefficients(p: &CapVector, instance: &Arc<Instance>) -> Vec<VerificationReport> {
    let row = count_bounded_row(p);
    let total = p.total() as usize;
    let mut out = Vec::new();
    let at = |m: usize| Location {
        n: Some(total),
        indices: alloc::vec![m],
        note: "",
    };

    let mut m = 0;
    while 2 * m < total {
        let verdict = match row[m].cmp(&row[m + 1]) {
            Ordering::Less => Verdict::PassStrict,
            Ordering::Equal => Verdict::PassWeak,
            Ordering::Greater => Verdict::Fail,
        };
        out.push(integer_report(
            Claim::CoeffMonotone,
            instance,
            at(m),
            verdict,
            &row[m],
            &row[m + 1],
        ));
        m += 1;
    }
    for m in 0..=total {
        let verdict = if row[m] == row[total - m] {
            Verdict::PassStrict
        } else {
            Verdict::Fail
        };
        out.push(integer_report(
            Claim::CoeffSymmetry,
            instance,
            at(m),
            verdict,
            &row[m],
            &row[total - m],
        ));
    }
    let sum: BigUint = row.iter().sum();
    let product: BigUint = p.as_slice().iter().map(|&c| BigUint::from(c + 1)).product();
    let verdict = if sum == product {
        Verdict::PassStrict
    } else {
        Verdict::Fail
    };
    out.push(integer_report(
        Claim::CoeffTotal,
        instance,
        Location {
            n: Some(total),
            indices: Vec::new(),
            note: "",
        },
        verdict,
        &sum,
        &product,
    ));
    let oracle = coefficient_row_polynomial(p);
    for m in 0..=total {
        let verdict = if row[m] == oracle[m] {
            Verdict::PassStrict
        } else {
            Verdict::Fail
        };
        out.push(integer_report(
            Claim::CoeffPolynomial,
            instance,
            at(m),
            verdict,
            &row[m],
            &oracle[m],
        ));
    }
    out
}

pub fn verify_lemma<S: Backend>(
    w: &WeightVector<S>,
    nmax: usize,
) -> Result<Vec<VerificationReport>> {
    Verifier::new().lemma(w, nmax, &Arc::new(Instance::weights(0, w)))
}

pub fn verify_theorem<S: Backend>(
    system: &TheoremSystem<S>,
    n: usize,
    options: &TheoremOptions<S>,
) -> Result<Vec<VerificationReport>> {
    let descriptor = match system {
        TheoremSystem::Weights(w) => {
            SystemDescriptor::Weights(w.iter().map(Backend::to_scalar).collect())
        }
        TheoremSystem::Levels(levels) => SystemDescriptor::Levels(levels.clone()),
    };
    let instance = Instance {
        id: 0,
        seed: None,
        system: descriptor,
        extra_weights: options
            .extra_weights
            .iter()
            .map(Backend::to_scalar)
            .collect(),
        superset: options
            .superset
            .as_ref()
            .map(|s| s.iter().map(Backend::to_scalar).collect()),
    };
    Verifier::new().theorem(system, n, options, &Arc::new(instance))
}

pub fn verify_identities<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
) -> Result<Vec<VerificationReport>> {
    Verifier::new().identities(w, n, &Arc::new(Instance::weights(0, w)))
}

/// Seeded random campaign settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub seed: u64,
    pub instances: u64,
    pub min_levels: usize,
    pub max_levels: usize,
    pub min_n: usize,
    pub max_n: usize,
    /// Numerators and denominators are drawn uniformly from `1..=max_entry`.
    pub max_entry: u32,
    pub extra_weights: usize,
    /// Levels added to build the superset spectrum for (iv′).
    pub superset_levels: usize,
    /// Largest energy (in units of the log base exponent) of the ladder
    /// spectrum used for (iii).
    pub max_energy: u32,
    pub lemma_nmax: usize,
    pub identities: bool,
    pub coefficients: bool,
    pub limits: Limits,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 0,
            instances: 100,
            min_levels: 1,
            max_levels: 5,
            min_n: 1,
            max_n: 10,
            max_entry: 1 << 16,
            extra_weights: 3,
            superset_levels: 1,
            max_energy: 4,
            lemma_nmax: 13,
            identities: true,
            coefficients: true,
            limits: Limits::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_levels == 0 {
            return Err(Error::InvalidConfig("min_levels must be at least 1"));
        }
        if self.min_levels > self.max_levels {
            return Err(Error::InvalidConfig("min_levels exceeds max_levels"));
        }
        if self.min_n > self.max_n {
            return Err(Error::InvalidConfig("min_n exceeds max_n"));
        }
        if self.max_entry < 2 {
            return Err(Error::InvalidConfig("max_entry must be at least 2"));
        }
        if self.max_energy == 0 {
            return Err(Error::InvalidConfig("max_energy must be at least 1"));
        }
        Ok(())
    }

    /// Seed of instance `id`, a function of the campaign seed and `id` only.
    pub fn instance_seed(&self, id: u64) -> u64 {
        splitmix64(self.seed ^ splitmix64(id))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A randomly drawn campaign instance, in exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub id: u64,
    pub seed: u64,
    pub weights: Vec<Rational>,
    pub n: usize,
    pub extra_weights: Vec<Rational>,
    pub superset: Vec<Rational>,
    /// Spectrum for (iii): integer energies with `beta = 1`.
    pub levels: LevelSet,
}

fn random_rational(rng: &mut ChaCha8Rng, max_entry: u32) -> Rational {
    let num = rng.random_range(1..=max_entry);
    let den = rng.random_range(1..=max_entry);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Random extra weights for (iv) and added levels for (iv′), drawn from
/// `seed` the same way campaign instances draw them.
pub fn random_extensions(
    seed: u64,
    extra: usize,
    added: usize,
    max_entry: u32,
) -> (Vec<Rational>, Vec<Rational>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extras = (0..extra)
        .map(|_| random_rational(&mut rng, max_entry))
        .collect();
    let additions = (0..added)
        .map(|_| random_rational(&mut rng, max_entry))
        .collect();
    (extras, additions)
}

pub fn generate_instance(config: &CampaignConfig, id: u64) -> Result<GeneratedInstance> {
    config.validate()?;
    let seed = config.instance_seed(id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = rng.random_range(config.min_levels..=config.max_levels);
    let n = rng.random_range(config.min_n..=config.max_n);
    let weights: Vec<Rational> = (0..levels)
        .map(|_| random_rational(&mut rng, config.max_entry))
        .collect();
    let extra_weights = (0..config.extra_weights)
        .map(|_| random_rational(&mut rng, config.max_entry))
        .collect();
    let mut superset = weights.clone();
    for _ in 0..config.superset_levels {
        let at = rng.random_range(0..=superset.len());
        superset.insert(at, random_rational(&mut rng, config.max_entry));
    }

    let mut energies: Vec<u32> = (0..levels)
        .map(|_| rng.random_range(0..=config.max_energy))
        .collect();
    energies.sort_unstable();
    let mut distinct: Vec<Rational> = Vec::new();
    let mut degeneracies: Vec<u32> = Vec::new();
    for e in energies {
        let e = Rational::from_integer(BigInt::from(e));
        if distinct.last() == Some(&e) {
            *degeneracies.last_mut().expect("nonempty") += 1;
        } else {
            distinct.push(e);
            degeneracies.push(1);
        }
    }
    let den = rng.random_range(2..=config.max_entry);
    let num = rng.random_range(1..den);
    let log_base = Rational::new(BigInt::from(num), BigInt::from(den));
    let beta = InverseTemperature::rational(Rational::one(), log_base)?;
    let levels = LevelSet::new(distinct, degeneracies, beta)?;
    Ok(GeneratedInstance {
        id,
        seed,
        weights,
        n,
        extra_weights,
        superset,
        levels,
    })
}

fn scalars<S: Backend>(qs: &[Rational]) -> Result<Vec<Scalar>> {
    qs.iter()
        .map(|q| S::from_rational(q).map(|s| s.to_scalar()))
        .collect()
}

/// Every check on one generated instance, in a fixed order.
pub fn run_instance<S: Backend>(
    config: &CampaignConfig,
    id: u64,
    verifier: &Verifier<S>,
) -> Result<Vec<VerificationReport>> {
    let g = generate_instance(config, id)?;
    let w = WeightVector::<S>::from_rationals(&g.weights)?;
    let large = WeightVector::<S>::from_rationals(&g.superset)?;
    let extras = g
        .extra_weights
        .iter()
        .map(S::from_rational)
        .collect::<Result<Vec<_>>>()?;

    let instance = Arc::new(Instance {
        id,
        seed: Some(g.seed),
        system: SystemDescriptor::Weights(scalars::<S>(&g.weights)?),
        extra_weights: scalars::<S>(&g.extra_weights)?,
        superset: Some(scalars::<S>(&g.superset)?),
    });
    let ladder = Arc::new(Instance {
        id,
        seed: Some(g.seed),
        system: SystemDescriptor::Levels(g.levels.clone()),
        extra_weights: Vec::new(),
        superset: None,
    });

    let mut out = verifier.lemma(&w, config.lemma_nmax, &instance)?;
    let options = TheoremOptions {
        extra_weights: extras,
        superset: Some(large),
        beta_derivative: false,
    };
    out.extend(verifier.theorem(&TheoremSystem::Weights(w.clone()), g.n, &options, &instance)?);
    out.push(verifier.beta_derivative(&g.levels, g.n, &ladder)?);
    if config.identities {
        out.extend(verifier.identities(&w, g.n, &instance)?);
    }
    if config.coefficients {
        for p in enumerate_partitions(g.n)? {
            let caps = Arc::new(Instance {
                id,
                seed: Some(g.seed),
                system: SystemDescriptor::Caps(p.clone()),
                extra_weights: Vec::new(),
                superset: None,
            });
            out.extend(verify_coefficients(&p, &caps));
        }
    }
    Ok(out)
}

/// Verdict counts per claim.
pub type VerdictCounts = BTreeMap<Claim, BTreeMap<Verdict, u64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub seed: u64,
    pub instances: u64,
    pub reports: Vec<VerificationReport>,
}

impl CampaignSummary {
    /// Sorts the reports by instance id, keeping per-instance order.
    pub fn new(seed: u64, instances: u64, mut reports: Vec<VerificationReport>) -> Self {
        reports.sort_by_key(|r| r.instance.id);
        CampaignSummary {
            seed,
            instances,
            reports,
        }
    }

    pub fn counts(&self) -> VerdictCounts {
        count_verdicts(&self.reports)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn fail_count(&self) -> usize {
        self.failures().count()
    }

    pub fn passed(&self) -> bool {
        self.fail_count() == 0
    }
}

pub fn count_verdicts(reports: &[VerificationReport]) -> VerdictCounts {
    let mut counts = VerdictCounts::new();
    for r in reports {
        *counts
            .entry(r.claim)
            .or_default()
            .entry(r.verdict)
            .or_insert(0) += 1;
    }
    counts
}

pub fn run_campaign<S: Backend>(config: &CampaignConfig) -> Result<CampaignSummary> {
    run_campaign_with(config, &Verifier::<S>::new().with_limits(config.limits))
}

pub fn run_campaign_with<S: Backend>(
    config: &CampaignConfig,
    verifier: &Verifier<S>,
) -> Result<CampaignSummary> {
    config.validate()?;
    let mut reports = Vec::new();
    for id in 0..config.instances {
        reports.extend(run_instance(config, id, verifier)?);
    }
    Ok(CampaignSummary::new(config.seed, config.instances, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::LogFloat;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_level() -> WeightVector<Rational> {
        WeightVector::new(alloc::vec![q(1, 2), q(1, 4)]).unwrap()
    }

    fn find<'a>(
        reports: &'a [VerificationReport],
        claim: Claim,
        indices: &[usize],
    ) -> &'a VerificationReport {
        reports
            .iter()
            .find(|r| r.claim == claim && r.location.indices == indices)
            .unwrap()
    }

    #[test]
    fn lemma_two_level() {
        let reports = verify_lemma(&two_level(), 4).unwrap();
        let r = find(&reports, Claim::Lemma, &[1, 2]);
        assert_eq!(r.verdict, Verdict::PassStrict);
        assert_eq!(r.lhs, Witness::Rational(q(45, 256)));
        assert_eq!(r.rhs, Witness::Rational(q(49, 256)));
        let r = find(&reports, Claim::Lemma, &[0, 1]);
        assert_eq!(
            (r.lhs.clone(), r.rhs.clone()),
            (Witness::Rational(q(7, 16)), Witness::Rational(q(9, 16)))
        );
        assert!(reports.iter().all(|r| r.verdict.is_pass()));
    }

    #[test]
    fn lemma_single_level_is_weak() {
        let w = WeightVector::new(alloc::vec![q(2, 3)]).unwrap();
        let reports = verify_lemma(&w, 6).unwrap();
        assert!(reports
            .iter()
            .filter(|r| r.claim == Claim::Lemma)
            .all(|r| r.verdict == Verdict::PassWeak));
    }

    #[test]
    fn theorem_two_level() {
        let options = TheoremOptions {
            extra_weights: alloc::vec![q(1, 2)],
            ..Default::default()
        };
        let reports = verify_theorem(&TheoremSystem::Weights(two_level()), 2, &options).unwrap();
        let r = find(&reports, Claim::ThmI, &[0]);
        assert_eq!(
            (r.verdict, r.lhs.clone(), r.rhs.clone()),
            (
                Verdict::PassStrict,
                Witness::Rational(q(10, 7)),
                Witness::Rational(q(34, 15))
            )
        );
        let r = find(&reports, Claim::ThmII, &[0, 1]);
        assert_eq!(
            (r.verdict, r.lhs.clone()),
            (Verdict::PassStrict, Witness::Rational(q(-26, 49)))
        );
        let r = find(&reports, Claim::ThmIV, &[0, 0]);
        assert_eq!(
            (r.verdict, r.lhs.clone(), r.rhs.clone()),
            (
                Verdict::PassStrict,
                Witness::Rational(q(14, 17)),
                Witness::Rational(q(10, 7))
            )
        );
    }

    #[test]
    fn theorem_needs_energies_for_iii() {
        let options = TheoremOptions {
            beta_derivative: true,
            ..Default::default()
        };
        let err = verify_theorem(&TheoremSystem::Weights(two_level()), 2, &options).unwrap_err();
        assert_eq!(err, Error::EnergiesRequired);
    }

    #[test]
    fn single_level_is_vacuous() {
        let w = WeightVector::new(alloc::vec![q(1, 3)]).unwrap();
        let reports =
            verify_theorem(&TheoremSystem::Weights(w), 3, &TheoremOptions::default()).unwrap();
        assert_eq!(find(&reports, Claim::ThmII, &[]).verdict, Verdict::Vacuous);
        let beta = InverseTemperature::rational(Rational::one(), q(1, 2)).unwrap();
        let levels = LevelSet::new(alloc::vec![q(0, 1)], alloc::vec![3], beta).unwrap();
        let reports = verify_theorem::<Rational>(
            &TheoremSystem::Levels(levels),
            3,
            &TheoremOptions::default(),
        )
        .unwrap();
        assert_eq!(
            find(&reports, Claim::ThmIII, &[0]).verdict,
            Verdict::Vacuous
        );
    }

    #[test]
    fn superset_strictly_lowers_means() {
        let large = WeightVector::new(alloc::vec![q(1, 4), q(1, 3), q(1, 2)]).unwrap();
        let options = TheoremOptions {
            superset: Some(large),
            ..Default::default()
        };
        let reports = verify_theorem(&TheoremSystem::Weights(two_level()), 3, &options).unwrap();
        let primes: Vec<_> = reports
            .iter()
            .filter(|r| r.claim == Claim::ThmIVPrime)
            .collect();
        assert_eq!(primes.len(), 2);
        assert!(primes.iter().all(|r| r.verdict == Verdict::PassStrict));
        assert_eq!(primes[0].location.indices, alloc::vec![0, 2]);
    }

    #[test]
    fn identities_exact() {
        let w = WeightVector::new(alloc::vec![q(1, 2), q(1, 4), q(2, 3)]).unwrap();
        let reports = verify_identities(&w, 4).unwrap();
        for claim in [
            Claim::Eq5,
            Claim::Eq7,
            Claim::Eq11,
            Claim::ZeroRowSum,
            Claim::MeanTotal,
            Claim::Eq13Product,
        ] {
            assert!(reports.iter().any(|r| r.claim == claim), "{claim}");
        }
        assert!(reports.iter().all(|r| r.verdict == Verdict::PassStrict));
    }

    #[test]
    fn coefficients_examples() {
        let inst = Arc::new(Instance::new(
            0,
            SystemDescriptor::Caps(CapVector::new(alloc::vec![2, 3]).unwrap()),
        ));
        let reports = verify_coefficients(&CapVector::new(alloc::vec![2, 3]).unwrap(), &inst);
        assert!(reports.iter().all(|r| r.verdict.is_pass()));
        let single = verify_coefficients(&CapVector::new(alloc::vec![5]).unwrap(), &inst);
        assert!(single
            .iter()
            .filter(|r| r.claim == Claim::CoeffMonotone)
            .all(|r| r.verdict == Verdict::PassWeak));
    }

    #[test]
    fn flipped_comparator_is_caught() {
        fn flipped(a: &Rational, b: &Rational) -> Option<Ordering> {
            Rational::classify(a, b).map(Ordering::reverse)
        }
        let verifier = Verifier::<Rational>::with_comparator(flipped);
        let inst = Arc::new(Instance::weights(0, &two_level()));
        let reports = verifier
            .theorem(
                &TheoremSystem::Weights(two_level()),
                2,
                &TheoremOptions::default(),
                &inst,
            )
            .unwrap();
        assert!(reports.iter().any(|r| r.verdict == Verdict::Fail));
    }

    #[test]
    fn small_campaign_has_no_failures() {
        let config = CampaignConfig {
            seed: 7,
            instances: 6,
            max_n: 6,
            ..Default::default()
        };
        let summary = run_campaign::<Rational>(&config).unwrap();
        assert!(summary.passed());
        assert!(summary
            .reports
            .iter()
            .all(|r| r.verdict != Verdict::Indeterminate));
        assert_eq!(summary, run_campaign::<Rational>(&config).unwrap());
    }

    #[test]
    fn log_campaign_runs() {
        let config = CampaignConfig {
            seed: 3,
            instances: 3,
            max_n: 5,
            coefficients: false,
            ..Default::default()
        };
        let summary = run_campaign::<LogFloat>(&config).unwrap();
        assert!(summary.passed());
    }

    #[test]
    fn invalid_config() {
        let config = CampaignConfig {
            min_levels: 4,
            max_levels: 2,
            ..Default::default()
        };
        assert!(matches!(
            run_campaign::<Rational>(&config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn claim_ids_round_trip() {
        for c in Claim::ALL {
            assert_eq!(Claim::from_id(c.id()), Some(c));
        }
    }
}
