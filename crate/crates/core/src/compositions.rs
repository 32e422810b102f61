//! Bounded compositions and the monomial expansion of `Z_m Z_{N-m}`.
//!
//! For caps `p = (p_1 <= .. <= p_l)`, `a(p|m)` counts the vectors
//! `0 <= q_i <= p_i` with `sum q_i = m`. Expanding `Z_m Z_{N-m}` into
//! monomials `prod x_j^{n_j}` with `sum n_j = N`, the coefficient of a monomial
//! whose nonzero exponents sort to `p` is exactly `a(p|m)`, so
//!
//! ```text
//! Z_m Z_{N-m} = sum_{p |- N} a(p|m) * orbit_sum(p)
//! ```

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::Backend;
use crate::partition::powersum_values;
use crate::spectrum::WeightVector;

/// Positive caps, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CapVector(Vec<u32>);

impl CapVector {
    pub fn new(mut caps: Vec<u32>) -> Result<Self> {
        if caps.is_empty() || caps.contains(&0) {
            return Err(Error::InvalidCaps);
        }
        caps.sort_unstable();
        Ok(CapVector(caps))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&p| p as u64).sum()
    }

    /// The caps without the largest one, or `None` for a single cap.
    pub fn without_last(&self) -> Option<CapVector> {
        (self.0.len() > 1).then(|| CapVector(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn last(&self) -> u32 {
        self.0[self.0.len() - 1]
    }
}

impl fmt::Display for CapVector {
    /// Plus-separated, e.g. `2+3+7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Every partition of `n`, parts ascending, in lexicographic order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<CapVector>> {
    if n == 0 {
        return Err(Error::NonPositivePartitionTarget(n));
    }
    let mut out = Vec::new();
    let mut parts = Vec::new();
    extend_partitions(n as u32, 1, &mut parts, &mut out);
    Ok(out)
}

fn extend_partitions(
    remaining: u32,
    min_part: u32,
    parts: &mut Vec<u32>,
    out: &mut Vec<CapVector>,
) {
    if remaining == 0 {
        out.push(CapVector(parts.clone()));
        return;
    }
    for part in min_part..=remaining {
        // the rest must still be writable with parts >= `part`
        let rest = remaining - part;
        if rest != 0 && rest < part {
            continue;
        }
        parts.push(part);
        extend_partitions(rest, part, parts, out);
        parts.pop();
    }
}

/// The whole row `a(p|0), .., a(p|total)` by dynamic programming over the
/// caps, each step a sliding-window sum.
pub fn count_bounded_row(p: &CapVector) -> Vec<BigUint> {
    let mut row = alloc::vec![BigUint::one()];
    for &cap in p.as_slice() {
        let cap = cap as usize;
        let len = row.len() + cap;
        let mut next = Vec::with_capacity(len);
        let mut window = BigUint::zero();
        for m in 0..len {
            if m < row.len() {
                window += &row[m];
            }
            if m > cap {
                window -= &row[m - cap - 1];
            }
            next.push(window.clone());
        }
        row = next;
    }
    row
}

/// `a(p|m)`; zero outside `0..=total`.
pub fn count_bounded(p: &CapVector, m: i64) -> BigUint {
    if m < 0 || m as u64 > p.total() {
        return BigUint::zero();
    }
    count_bounded_row(p).swap_remove(m as usize)
}

/// `a(p|m)` by the nested sum over `q_1..q_{l-1}` with `q_l` implied,
/// summation bounds `max{0, m - sum_{i<j} q_i - sum_{i>j} p_i}` and
/// `min{p_j, m - sum_{i<j} q_i}`.
pub fn count_bounded_nested(p: &CapVector, m: i64) -> BigUint {
    let caps: Vec<i64> = p.as_slice().iter().map(|&c| c as i64).collect();
    let l = caps.len();
    if l == 1 {
        return BigUint::from(u8::from((0..=caps[0]).contains(&m)));
    }
    // tail[j] = sum_{i > j} p_i
    let mut tail = alloc::vec![0i64; l];
    for j in (0..l - 1).rev() {
        tail[j] = tail[j + 1] + caps[j + 1];
    }
    BigUint::from(nested_level(&caps, &tail, 0, m))
}

fn nested_level(caps: &[i64], tail: &[i64], j: usize, left: i64) -> u64 {
    if j + 1 == caps.len() {
        return 1;
    }
    let lower = (left - tail[j]).max(0);
    let upper = caps[j].min(left);
    (lower..=upper)
        .map(|q| nested_level(caps, tail, j + 1, left - q))
        .sum()
}

/// `a(p|m)` for `m <= p_position`, where the caps from `position` on cannot
/// bind: sum over `q_1..q_{position-1}` of
/// `C(m - sum q + l - position, l - position)`.
///
/// `position` is 1-based against the sorted caps.
pub fn count_bounded_binomial(p: &CapVector, m: i64, position: usize) -> Result<BigUint> {
    let caps = p.as_slice();
    let l = caps.len();
    if position == 0 || position > l {
        return Err(Error::IndexOutOfRange {
            index: position,
            len: l,
        });
    }
    let cap = caps[position - 1];
    if m > cap as i64 {
        return Err(Error::CapsBind { m, position, cap });
    }
    if m < 0 {
        return Ok(BigUint::zero());
    }
    Ok(binomial_level(caps, position - 1, l, 0, m as u64))
}

fn binomial_level(caps: &[u32], free_from: usize, l: usize, j: usize, left: u64) -> BigUint {
    if j == free_from {
        let k = (l - free_from - 1) as u64;
        return num_integer::binomial(BigUint::from(left + k), BigUint::from(k));
    }
    (0..=left.min(caps[j] as u64))
        .map(|q| binomial_level(caps, free_from, l, j + 1, left - q))
        .sum()
}

/// Coefficients of `prod_i (1 + y + .. + y^{p_i})` by schoolbook polynomial
/// multiplication. Independent of the counting routines above.
pub fn coefficient_row_polynomial(p: &CapVector) -> Vec<BigUint> {
    let mut poly = alloc::vec![BigUint::one()];
    for &cap in p.as_slice() {
        let factor = alloc::vec![BigUint::one(); cap as usize + 1];
        let mut product = alloc::vec![BigUint::zero(); poly.len() + factor.len() - 1];
        for (a, ca) in poly.iter().enumerate() {
            for (b, cb) in factor.iter().enumerate() {
                product[a + b] += ca * cb;
            }
        }
        poly = product;
    }
    poly
}

/// Sum of `prod x_j^{n_j}` over all occupation vectors whose nonzero entries,
/// sorted, equal `p`. Zero when `p` has more parts than there are levels.
pub fn orbit_sum<S: Backend>(w: &WeightVector<S>, p: &CapVector) -> S {
    if p.len() > w.len() {
        return S::zero();
    }
    // distinct part values with multiplicities
    let mut values: Vec<(u32, usize)> = Vec::new();
    for &part in p.as_slice() {
        match values.last_mut() {
            Some((v, c)) if *v == part => *c += 1,
            _ => values.push((part, 1)),
        }
    }
    let mut terms = Vec::new();
    place_parts(w.as_slice(), 0, &mut values, p.len(), S::one(), &mut terms);
    S::sum(terms)
}

fn place_parts<S: Backend>(
    weights: &[S],
    level: usize,
    values: &mut [(u32, usize)],
    unplaced: usize,
    acc: S,
    terms: &mut Vec<S>,
) {
    if unplaced == 0 {
        terms.push(acc);
        return;
    }
    if weights.len() - level < unplaced {
        return;
    }
    // level stays empty
    place_parts(weights, level + 1, values, unplaced, acc.clone(), terms);
    for k in 0..values.len() {
        if values[k].1 == 0 {
            continue;
        }
        values[k].1 -= 1;
        let factor = weights[level].powi(values[k].0);
        place_parts(
            weights,
            level + 1,
            values,
            unplaced - 1,
            acc.times(&factor),
            terms,
        );
        values[k].1 += 1;
    }
}

/// Both sides of `Z_m Z_{N-m} = sum_{p |- N} a(p|m) orbit_sum(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition<S> {
    pub n: usize,
    pub m: usize,
    pub lhs: S,
    pub rhs: S,
    /// `(p, a(p|m), orbit_sum(p))` per partition of `N`.
    pub terms: Vec<(CapVector, BigUint, S)>,
}

impl<S: Backend> ProductDecomposition<S> {
    pub fn holds(&self) -> bool {
        crate::partition::agrees::<S>(&self.lhs.to_real(), &self.rhs.to_real())
    }
}

pub fn product_decomposition_check<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
    m: usize,
) -> Result<ProductDecomposition<S>> {
    if m > n {
        return Err(Error::IndexOutOfRange {
            index: m,
            len: n + 1,
        });
    }
    let z = powersum_values(w.as_slice(), n);
    let orbits = orbit_table(w, n)?;
    Ok(assemble_product(&z, &orbits, n, m))
}

/// [`product_decomposition_check`] for every `m` in `0..=n`, sharing the
/// orbit sums.
pub fn product_decomposition_row<S: Backend>(
    w: &WeightVector<S>,
    n: usize,
) -> Result<Vec<ProductDecomposition<S>>> {
    let z = powersum_values(w.as_slice(), n);
    let orbits = orbit_table(w, n)?;
    Ok((0..=n)
        .map(|m| assemble_product(&z, &orbits, n, m))
        .collect())
}

fn orbit_table<S: Backend>(w: &WeightVector<S>, n: usize) -> Result<Vec<(CapVector, S)>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(enumerate_partitions(n)?
        .into_iter()
        .map(|p| {
            let orbit = orbit_sum(w, &p);
            (p, orbit)
        })
        .collect())
}

fn assemble_product<S: Backend>(
    z: &[S],
    orbits: &[(CapVector, S)],
    n: usize,
    m: usize,
) -> ProductDecomposition<S> {
    let lhs = z[m].times(&z[n - m]);
    if n == 0 {
        return ProductDecomposition {
            n,
            m,
            lhs,
            rhs: S::one(),
            terms: Vec::new(),
        };
    }
    let terms: Vec<(CapVector, BigUint, S)> = orbits
        .iter()
        .map(|(p, orbit)| (p.clone(), count_bounded(p, m as i64), orbit.clone()))
        .collect();
    let rhs = S::sum(
        terms
            .iter()
            .map(|(_, a, orbit)| biguint_scalar::<S>(a).times(orbit)),
    );
    ProductDecomposition {
        n,
        m,
        lhs,
        rhs,
        terms,
    }
}

fn biguint_scalar<S: Backend>(a: &BigUint) -> S {
    let r = crate::numerics::Rational::from_integer(num_bigint::BigInt::from(a.clone()));
    S::from_rational(&r).unwrap_or_else(|_| S::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;
    use alloc::vec;
    use num_bigint::BigInt;

    fn caps(v: &[u32]) -> CapVector {
        CapVector::new(v.to_vec()).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_level() -> WeightVector<Rational> {
        WeightVector::new(vec![q(1, 2), q(1, 4)]).unwrap()
    }

    #[test]
    fn cap_vector_sorts_and_validates() {
        assert_eq!(caps(&[3, 1, 2]).as_slice(), &[1, 2, 3]);
        assert_eq!(CapVector::new(vec![]), Err(Error::InvalidCaps));
        assert_eq!(CapVector::new(vec![2, 0]), Err(Error::InvalidCaps));
        assert_eq!(caps(&[7, 2, 3]).to_string(), "2+3+7");
    }

    #[test]
    fn partitions_of_four() {
        let got: Vec<Vec<u32>> = enumerate_partitions(4)
            .unwrap()
            .iter()
            .map(|p| p.as_slice().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![1, 1, 1, 1],
                vec![1, 1, 2],
                vec![1, 3],
                vec![2, 2],
                vec![4]
            ]
        );
        assert_eq!(enumerate_partitions(1).unwrap(), vec![caps(&[1])]);
        assert_eq!(
            enumerate_partitions(2).unwrap(),
            vec![caps(&[1, 1]), caps(&[2])]
        );
        assert!(enumerate_partitions(0).is_err());
    }

    #[test]
    fn partition_counts() {
        // p(n) for n = 1..=12
        let expected = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];
        for (n, &count) in (1..=12).zip(&expected) {
            assert_eq!(enumerate_partitions(n).unwrap().len(), count);
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_bounded_row(&caps(&[2, 3])), big(&[1, 2, 3, 3, 2, 1]));
        assert_eq!(count_bounded(&caps(&[5]), 3), BigUint::from(1u8));
        assert_eq!(count_bounded(&caps(&[1, 1, 1]), 2), BigUint::from(3u8));
        assert_eq!(count_bounded(&caps(&[2, 3]), -1), BigUint::zero());
        assert_eq!(count_bounded(&caps(&[2, 3]), 6), BigUint::zero());
    }

    #[test]
    fn nested_examples() {
        assert_eq!(count_bounded_nested(&caps(&[2, 3]), 2), BigUint::from(3u8));
        assert_eq!(count_bounded_nested(&caps(&[2, 3]), 5), BigUint::from(1u8));
        assert_eq!(count_bounded_nested(&caps(&[4]), 2), BigUint::from(1u8));
        assert_eq!(count_bounded_nested(&caps(&[4]), 5), BigUint::zero());
        assert_eq!(count_bounded_nested(&caps(&[2, 3]), -2), BigUint::zero());
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(
            count_bounded_binomial(&caps(&[3, 3]), 2, 1).unwrap(),
            BigUint::from(3u8)
        );
        assert_eq!(
            count_bounded_binomial(&caps(&[2, 5, 7]), 2, 1).unwrap(),
            BigUint::from(6u8)
        );
        assert_eq!(
            count_bounded_binomial(&caps(&[2, 3]), 3, 1),
            Err(Error::CapsBind {
                m: 3,
                position: 1,
                cap: 2
            })
        );
        assert_eq!(
            count_bounded_binomial(&caps(&[2, 3]), 3, 2).unwrap(),
            count_bounded(&caps(&[2, 3]), 3)
        );
        assert!(count_bounded_binomial(&caps(&[2, 3]), 1, 3).is_err());
    }

    #[test]
    fn polynomial_row() {
        assert_eq!(
            coefficient_row_polynomial(&caps(&[1, 1, 1])),
            big(&[1, 3, 3, 1])
        );
        assert_eq!(
            coefficient_row_polynomial(&caps(&[2, 3])),
            big(&[1, 2, 3, 3, 2, 1])
        );
    }

    #[test]
    fn orbit_examples() {
        let w = two_level();
        assert_eq!(orbit_sum(&w, &caps(&[2])), q(5, 16));
        assert_eq!(orbit_sum(&w, &caps(&[1, 1])), q(1, 8));
        assert_eq!(orbit_sum(&w, &caps(&[1, 1, 1])), q(0, 1));
        let w3 = WeightVector::new(vec![q(1, 2), q(1, 3), q(1, 5)]).unwrap();
        // x0 x1^2 + x0^2 x1 + ... over the 6 ordered placements of (1, 2)
        let expected = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]
            .iter()
            .map(|&(a, b)| w3[a].clone() * w3[b].clone() * w3[b].clone())
            .fold(q(0, 1), |s, t| s + t);
        assert_eq!(orbit_sum(&w3, &caps(&[1, 2])), expected);
    }

    #[test]
    fn product_examples() {
        let w = two_level();
        let d = product_decomposition_check(&w, 2, 1).unwrap();
        assert_eq!(d.lhs, q(9, 16));
        assert_eq!(d.rhs, q(9, 16));
        let a: Vec<_> = d
            .terms
            .iter()
            .map(|(p, a, _)| (p.to_string(), a.clone()))
            .collect();
        assert_eq!(
            a,
            vec![
                ("1+1".into(), BigUint::from(2u8)),
                ("2".into(), BigUint::from(1u8))
            ]
        );
        let d0 = product_decomposition_check(&w, 2, 0).unwrap();
        assert_eq!(d0.lhs, q(7, 16));
        assert!(d0.holds());
        let trivial = product_decomposition_check(&w, 0, 0).unwrap();
        assert_eq!(trivial.lhs, q(1, 1));
        assert!(trivial.holds());
        assert!(product_decomposition_check(&w, 2, 3).is_err());
    }
}
