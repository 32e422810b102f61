//! Scalar backends.
//!
//! Two interchangeable representations of the nonnegative quantities that show
//! up in the canonical ensemble (Boltzmann factors, partition functions,
//! probabilities, means):
//!
//! * [`Rational`]: arbitrary-precision rationals, always in lowest terms. Used
//!   when an inequality has to be decided exactly.
//! * [`LogFloat`]: the natural logarithm of the value as an `f64`, with a
//!   distinguished zero. Used for large spectra and particle numbers.
//!
//! Algorithms are written once against the [`Backend`] trait. Signed
//! quantities (covariances, derivatives) live in [`Backend::Real`], which is
//! the rational itself in exact mode and a plain `f64` in log mode. There is
//! deliberately no log-domain subtraction.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Neg;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::spectrum::InverseTemperature;

/// Exact rational scalar.
pub type Rational = BigRational;

/// Which backend a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    LogFloat,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::LogFloat => f.write_str("logfloat"),
        }
    }
}

/// Relative tolerance used to decide whether two log-mode reals are
/// distinguishable. Anything closer is reported as undecided.
pub const LOG_CLASSIFY_REL_TOL: f64 = 1e-9;

/// Relative tolerance for treating two log-mode weights as the same level.
pub const LOG_MATCH_REL_TOL: f64 = 1e-12;

/// A nonnegative number stored as its natural logarithm.
#[derive(Clone, Copy, PartialEq)]
pub struct LogFloat(Repr);

#[derive(Clone, Copy, PartialEq)]
enum Repr {
    Zero,
    Ln(f64),
}

impl LogFloat {
    pub const ZERO: LogFloat = LogFloat(Repr::Zero);
    pub const ONE: LogFloat = LogFloat(Repr::Ln(0.0));

    /// Wraps a log-value. `-inf` maps to zero; NaN and `+inf` are rejected.
    pub fn from_ln(ln: f64) -> Option<LogFloat> {
        if ln == f64::NEG_INFINITY {
            Some(Self::ZERO)
        } else if ln.is_finite() {
            Some(LogFloat(Repr::Ln(ln)))
        } else {
            None
        }
    }

    /// Converts a nonnegative finite `f64`.
    pub fn from_linear(x: f64) -> Option<LogFloat> {
        if x == 0.0 {
            Some(Self::ZERO)
        } else if x > 0.0 && x.is_finite() {
            Some(LogFloat(Repr::Ln(libm::log(x))))
        } else {
            None
        }
    }

    /// The stored log-value, or `None` for zero.
    pub fn ln_value(&self) -> Option<f64> {
        match self.0 {
            Repr::Zero => None,
            Repr::Ln(v) => Some(v),
        }
    }

    pub fn to_linear(&self) -> f64 {
        match self.0 {
            Repr::Zero => 0.0,
            Repr::Ln(v) => libm::exp(v),
        }
    }
}

impl fmt::Debug for LogFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Zero => f.write_str("LogFloat(zero)"),
            Repr::Ln(v) => write!(f, "LogFloat(ln = {v})"),
        }
    }
}

impl fmt::Display for LogFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Zero => f.write_str("log:zero"),
            Repr::Ln(v) => write!(f, "log:{v}"),
        }
    }
}

impl core::ops::Add for LogFloat {
    type Output = LogFloat;

    fn add(self, rhs: LogFloat) -> LogFloat {
        self.plus(&rhs)
    }
}

impl core::ops::Mul for LogFloat {
    type Output = LogFloat;

    fn mul(self, rhs: LogFloat) -> LogFloat {
        self.times(&rhs)
    }
}

impl Zero for LogFloat {
    fn zero() -> Self {
        LogFloat::ZERO
    }

    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Zero)
    }
}

impl One for LogFloat {
    fn one() -> Self {
        LogFloat::ONE
    }
}

impl PartialOrd for LogFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.0, other.0) {
            (Repr::Zero, Repr::Zero) => Some(Ordering::Equal),
            (Repr::Zero, _) => Some(Ordering::Less),
            (_, Repr::Zero) => Some(Ordering::Greater),
            (Repr::Ln(a), Repr::Ln(b)) => a.partial_cmp(&b),
        }
    }
}

/// `ln(sum(exp(v)))` over log-values, shifted by the maximum.
///
/// Zero entries are skipped; a list made only of zeros sums to zero. An empty
/// list is an error so that callers decide what an empty sum means.
pub fn log_sum_exp(values: &[LogFloat]) -> Result<LogFloat> {
    if values.is_empty() {
        return Err(Error::EmptySum);
    }
    Ok(lse_iter(values.iter().filter_map(LogFloat::ln_value)))
}

fn lse_iter<I: Iterator<Item = f64> + Clone>(logs: I) -> LogFloat {
    let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogFloat::ZERO;
    }
    let mut count = 0usize;
    let mut acc = 0.0;
    for v in logs {
        acc += libm::exp(v - max);
        count += 1;
    }
    if count == 1 {
        return LogFloat(Repr::Ln(max));
    }
    LogFloat(Repr::Ln(max + libm::log(acc)))
}

/// Natural log of a positive big integer, accurate to double precision.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return libm::log(n.to_u64().unwrap_or(0) as f64);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// Natural log of a positive rational. `-inf` for zero, NaN for negatives.
pub fn ln_rational(q: &Rational) -> f64 {
    match q.numer().sign() {
        Sign::NoSign => f64::NEG_INFINITY,
        Sign::Minus => f64::NAN,
        Sign::Plus => {
            if let Some(v) = q.to_f64() {
                if v.is_normal() {
                    return libm::log(v);
                }
            }
            ln_biguint(q.numer().magnitude()) - ln_biguint(q.denom().magnitude())
        }
    }
}

/// Ordering of two exact values by cross-multiplying numerators and
/// denominators (denominators are positive by normalization).
pub fn compare_rationals(a: &Rational, b: &Rational) -> Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

/// A value tagged with its backend, for interfaces that accept either.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Log(LogFloat),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Log(_) => Mode::LogFloat,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Log(l) => l.to_linear(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Log(l) => write!(f, "{l}"),
        }
    }
}

/// Exact tri-state comparison; both operands must be exact.
pub fn exact_compare(a: &Scalar, b: &Scalar) -> Result<Ordering> {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Ok(compare_rationals(x, y)),
        _ => Err(Error::MixedBackends(a.mode(), b.mode())),
    }
}

/// Arithmetic contract shared by both backends.
///
/// Values are nonnegative. `div` panics on a zero divisor; the ensemble code
/// only divides by partition functions of nonempty systems.
pub trait Backend:
    Clone + fmt::Debug + PartialEq + PartialOrd + Zero + One + Send + Sync + 'static
{
    /// Signed companion type for differences.
    type Real: Clone
        + fmt::Debug
        + fmt::Display
        + PartialOrd
        + Num
        + Neg<Output = Self::Real>
        + Send
        + Sync;

    const MODE: Mode;

    fn from_count(n: u64) -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn over(&self, rhs: &Self) -> Self;
    fn powi(&self, k: u32) -> Self;

    /// Sum of nonnegative terms; zero for an empty iterator.
    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self;

    fn ln(&self) -> f64;
    fn to_float(&self) -> f64;

    fn to_real(&self) -> Self::Real;
    fn real_from_rational(q: &Rational) -> Self::Real;
    fn real_from_count(n: u64) -> Self::Real;
    fn real_to_f64(r: &Self::Real) -> f64;
    /// The exact value of a real, when the backend has one.
    fn real_to_rational(r: &Self::Real) -> Option<Rational>;

    /// Decides `lhs` vs `rhs`. Exact mode always decides; log mode returns
    /// `None` when the two are within [`LOG_CLASSIFY_REL_TOL`].
    fn classify(lhs: &Self::Real, rhs: &Self::Real) -> Option<Ordering>;

    /// Level identity used by superset matching.
    fn matches(&self, other: &Self) -> bool;

    /// Converts a nonnegative rational.
    fn from_rational(q: &Rational) -> Result<Self>;

    /// `exp(-beta * energy)` for this backend.
    fn boltzmann(energy: &Rational, beta: &InverseTemperature) -> Result<Self>;

    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;
}

impl Backend for Rational {
    type Real = Rational;

    const MODE: Mode = Mode::Exact;

    fn from_count(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn over(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn powi(&self, k: u32) -> Self {
        num_traits::Pow::pow(self, k)
    }

    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        // Accumulate over a common denominator, reducing once at the end.
        let mut numer = BigInt::zero();
        let mut denom = BigInt::one();
        for t in terms {
            if Zero::is_zero(&t) {
                continue;
            }
            let (n, d) = t.into_raw();
            if d == denom {
                numer += n;
            } else {
                let g = denom.gcd(&d);
                let left = &d / &g;
                let right = &denom / &g;
                numer = numer * &left + n * right;
                denom *= left;
            }
        }
        Rational::new(numer, denom)
    }

    fn ln(&self) -> f64 {
        ln_rational(self)
    }

    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_real(&self) -> Self::Real {
        self.clone()
    }

    fn real_from_rational(q: &Rational) -> Self::Real {
        q.clone()
    }

    fn real_from_count(n: u64) -> Self::Real {
        Self::from_count(n)
    }

    fn real_to_f64(r: &Self::Real) -> f64 {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn real_to_rational(r: &Self::Real) -> Option<Rational> {
        Some(r.clone())
    }

    fn classify(lhs: &Self::Real, rhs: &Self::Real) -> Option<Ordering> {
        Some(compare_rationals(lhs, rhs))
    }

    fn matches(&self, other: &Self) -> bool {
        self == other
    }

    fn from_rational(q: &Rational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::NonPositiveWeight(format!("{q}")));
        }
        Ok(q.clone())
    }

    fn boltzmann(energy: &Rational, beta: &InverseTemperature) -> Result<Self> {
        let (beta, base) = match beta {
            InverseTemperature::Rational { beta, log_base } => (beta, log_base),
            InverseTemperature::Float(_) => return Err(Error::ExactBetaRequired),
        };
        let exponent = beta * energy;
        if !exponent.is_integer() {
            return Err(Error::ExactWeightUnrepresentable(format!("{exponent}")));
        }
        let k = exponent.to_integer();
        let magnitude = k
            .magnitude()
            .to_u32()
            .ok_or_else(|| Error::ExactWeightUnrepresentable(format!("{exponent}")))?;
        let power = num_traits::Pow::pow(base, magnitude);
        Ok(if k.is_negative() {
            power.recip()
        } else {
            power
        })
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(q) => Self::from_rational(q),
            Scalar::Log(_) => Err(Error::MixedBackends(Mode::Exact, Mode::LogFloat)),
        }
    }
}

impl Backend for LogFloat {
    type Real = f64;

    const MODE: Mode = Mode::LogFloat;

    fn from_count(n: u64) -> Self {
        if n == 0 {
            LogFloat::ZERO
        } else {
            LogFloat(Repr::Ln(libm::log(n as f64)))
        }
    }

    fn plus(&self, rhs: &Self) -> Self {
        match (self.0, rhs.0) {
            (Repr::Zero, _) => *rhs,
            (_, Repr::Zero) => *self,
            (Repr::Ln(a), Repr::Ln(b)) => {
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                LogFloat(Repr::Ln(hi + libm::log1p(libm::exp(lo - hi))))
            }
        }
    }

    fn times(&self, rhs: &Self) -> Self {
        match (self.0, rhs.0) {
            (Repr::Ln(a), Repr::Ln(b)) => LogFloat(Repr::Ln(a + b)),
            _ => LogFloat::ZERO,
        }
    }

    fn over(&self, rhs: &Self) -> Self {
        match (self.0, rhs.0) {
            (_, Repr::Zero) => panic!("LogFloat division by zero"),
            (Repr::Zero, _) => LogFloat::ZERO,
            (Repr::Ln(a), Repr::Ln(b)) => LogFloat(Repr::Ln(a - b)),
        }
    }

    fn powi(&self, k: u32) -> Self {
        match self.0 {
            _ if k == 0 => LogFloat::ONE,
            Repr::Zero => LogFloat::ZERO,
            Repr::Ln(a) => LogFloat(Repr::Ln(a * k as f64)),
        }
    }

    fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let logs: Vec<f64> = terms.into_iter().filter_map(|t| t.ln_value()).collect();
        lse_iter(logs.iter().copied())
    }

    fn ln(&self) -> f64 {
        self.ln_value().unwrap_or(f64::NEG_INFINITY)
    }

    fn to_float(&self) -> f64 {
        self.to_linear()
    }

    fn to_real(&self) -> Self::Real {
        self.to_linear()
    }

    fn real_from_rational(q: &Rational) -> Self::Real {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn real_from_count(n: u64) -> Self::Real {
        n as f64
    }

    fn real_to_f64(r: &Self::Real) -> f64 {
        *r
    }

    fn real_to_rational(_: &Self::Real) -> Option<Rational> {
        None
    }

    fn classify(lhs: &Self::Real, rhs: &Self::Real) -> Option<Ordering> {
        let scale = lhs.abs().max(rhs.abs());
        if !(lhs.is_finite() && rhs.is_finite())
            || (lhs - rhs).abs() <= LOG_CLASSIFY_REL_TOL * scale
        {
            None
        } else {
            lhs.partial_cmp(rhs)
        }
    }

    fn matches(&self, other: &Self) -> bool {
        match (self.0, other.0) {
            (Repr::Zero, Repr::Zero) => true,
            // |x - y| <= tol * max(x, y)  <=>  |ln x - ln y| <= -ln(1 - tol)
            (Repr::Ln(a), Repr::Ln(b)) => (a - b).abs() <= -libm::log1p(-LOG_MATCH_REL_TOL),
            _ => false,
        }
    }

    fn from_rational(q: &Rational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::NonPositiveWeight(format!("{q}")));
        }
        Ok(LogFloat::from_ln(ln_rational(q)).unwrap_or(LogFloat::ZERO))
    }

    fn boltzmann(energy: &Rational, beta: &InverseTemperature) -> Result<Self> {
        let e = ToPrimitive::to_f64(energy).unwrap_or(f64::NAN);
        let ln = -beta.physical() * e;
        LogFloat::from_ln(ln).ok_or_else(|| Error::NonPositiveWeight(format!("exp({ln})")))
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Log(*self)
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Log(l) => Ok(*l),
            Scalar::Exact(q) => Self::from_rational(q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn lf(v: f64) -> LogFloat {
        LogFloat::from_ln(v).unwrap()
    }

    #[test]
    fn lse_two_equal_terms() {
        let s = log_sum_exp(&[lf(0.0), lf(0.0)]).unwrap();
        assert!((s.ln_value().unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn lse_no_underflow() {
        let s = log_sum_exp(&[lf(-1000.0), lf(-1000.0)]).unwrap();
        assert!((s.ln_value().unwrap() - (-1000.0 + core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn lse_singleton_is_exact() {
        assert_eq!(log_sum_exp(&[lf(0.0)]).unwrap(), lf(0.0));
        assert_eq!(log_sum_exp(&[lf(-3.25)]).unwrap(), lf(-3.25));
    }

    #[test]
    fn lse_empty_is_error() {
        assert_eq!(log_sum_exp(&[]), Err(Error::EmptySum));
    }

    #[test]
    fn lse_zeros() {
        assert!(log_sum_exp(&[LogFloat::ZERO, LogFloat::ZERO])
            .unwrap()
            .is_zero());
        assert_eq!(log_sum_exp(&[LogFloat::ZERO, lf(1.5)]).unwrap(), lf(1.5));
    }

    #[test]
    fn compare_examples() {
        let cmp = |a, b| exact_compare(&Scalar::Exact(a), &Scalar::Exact(b)).unwrap();
        assert_eq!(cmp(q(7, 16), q(9, 16)), Ordering::Less);
        assert_eq!(cmp(q(1, 2), q(2, 4)), Ordering::Equal);
        assert_eq!(cmp(q(3, 4), q(1, 4)), Ordering::Greater);
    }

    #[test]
    fn compare_mixed_is_error() {
        let r = exact_compare(&Scalar::Exact(q(1, 2)), &Scalar::Log(LogFloat::ONE));
        assert_eq!(r, Err(Error::MixedBackends(Mode::Exact, Mode::LogFloat)));
    }

    #[test]
    fn exact_values_normalized() {
        let x = q(6, -8);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(4));
    }

    #[test]
    fn exact_sum_matches_fold() {
        let terms = vec![q(1, 2), q(1, 3), q(5, 6), Rational::zero(), q(7, 12)];
        let folded = terms.iter().fold(Rational::zero(), |a, b| a + b);
        assert_eq!(<Rational as Backend>::sum(terms), folded);
        assert_eq!(<Rational as Backend>::sum(Vec::new()), Rational::zero());
    }

    #[test]
    fn log_zero_handling() {
        let z = LogFloat::ZERO;
        let one = LogFloat::ONE;
        assert_eq!(z.plus(&one), one);
        assert!(z.times(&one).is_zero());
        assert_eq!(z.powi(0), one);
        assert!(z.powi(3).is_zero());
        assert!(z.over(&one).is_zero());
        assert!(<LogFloat as Backend>::sum(Vec::new()).is_zero());
    }

    #[test]
    #[should_panic]
    fn log_division_by_zero_panics() {
        let _ = LogFloat::ONE.over(&LogFloat::ZERO);
    }

    #[test]
    fn ln_of_huge_rational() {
        let big = BigUint::from(3u32).pow(900u32);
        let r = Rational::new(BigInt::from(big.clone()) + 1, BigInt::from(big));
        // ln(1 + 3^-900) underflows to 0 through the quotient path.
        assert!(ln_rational(&r).abs() < 1e-15);
        let n = BigUint::from(2u32).pow(2000u32);
        assert!((ln_biguint(&n) - 2000.0 * core::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn boltzmann_exact_powers() {
        let beta = InverseTemperature::Rational {
            beta: q(1, 1),
            log_base: q(1, 2),
        };
        assert_eq!(Rational::boltzmann(&q(2, 1), &beta).unwrap(), q(1, 4));
        assert_eq!(Rational::boltzmann(&q(-1, 1), &beta).unwrap(), q(2, 1));
        assert!(matches!(
            Rational::boltzmann(&q(1, 2), &beta),
            Err(Error::ExactWeightUnrepresentable(_))
        ));
        assert_eq!(
            Rational::boltzmann(&q(1, 1), &InverseTemperature::Float(1.0)),
            Err(Error::ExactBetaRequired)
        );
    }

    #[test]
    fn classify_tolerance() {
        assert_eq!(LogFloat::classify(&1.0, &2.0), Some(Ordering::Less));
        assert_eq!(LogFloat::classify(&1.0, &(1.0 + 1e-12)), None);
        assert_eq!(LogFloat::classify(&0.0, &0.0), None);
    }
}
