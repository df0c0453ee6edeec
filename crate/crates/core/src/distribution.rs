//! Finite probability vectors and joint distributions on product alphabets.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{sum, Rational, Scalar};

/// Probability vector over the alphabet `0..len`. Zero-mass letters are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    weights: Vec<S>,
}

fn check_weights<S: Scalar>(weights: &[S], what: &str) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has negative weight {w} at index {i}"
        )));
    }
    if !S::is_exact() && weights.iter().any(|w| !w.to_f64().is_finite()) {
        return Err(Error::InvalidDistribution(format!("{what} has a non-finite weight")));
    }
    let total = sum(weights);
    if !total.approx_eq(&S::one()) {
        return Err(Error::InvalidDistribution(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

impl<S: Scalar> Distribution<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        check_weights(&weights, "distribution")?;
        Ok(Self { weights })
    }

    pub(crate) fn new_unchecked(weights: Vec<S>) -> Self {
        Self { weights }
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution needs a nonempty alphabet");
        let w = S::one() / S::from_usize(k);
        Self { weights: vec![w; k] }
    }

    /// Uniform on the letters where `mask` is true, zero elsewhere.
    pub fn uniform_on(mask: &[bool]) -> Result<Self> {
        let count = mask.iter().filter(|m| **m).count();
        if count == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let w = S::one() / S::from_usize(count);
        Ok(Self {
            weights: mask
                .iter()
                .map(|&m| if m { w.clone() } else { S::zero() })
                .collect(),
        })
    }

    pub fn point_mass(k: usize, letter: usize) -> Self {
        assert!(letter < k);
        let mut weights = vec![S::zero(); k];
        weights[letter] = S::one();
        Self { weights }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<S> {
        self.weights
    }

    pub fn alphabet_size(&self) -> usize {
        self.weights.len()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Letters carrying non-negligible mass.
    pub fn support_mask(&self) -> Vec<bool> {
        self.weights.iter().map(|w| !w.is_negligible()).collect()
    }

    pub fn rank(&self) -> usize {
        self.support_mask().iter().filter(|m| **m).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.len()
    }

    /// `self ⊗ other`, indexed `i * other.len() + j`.
    pub fn tensor(&self, other: &Self) -> Self {
        let weights = self
            .weights
            .iter()
            .flat_map(|a| other.weights.iter().map(move |b| a.clone() * b.clone()))
            .collect();
        Self { weights }
    }

    /// `(1 - delta) * self + delta * other`.
    pub fn mix(&self, other: &Self, delta: &S) -> Result<Self> {
        same_size("mix", self.len(), other.len())?;
        let keep = S::one() - delta.clone();
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| keep.clone() * a.clone() + delta.clone() * b.clone())
            .collect();
        Ok(Self { weights })
    }

    /// Weights sorted in descending order together with the original indices.
    /// Ties keep the original index order.
    pub fn sorted_desc(&self) -> (Vec<S>, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.weights[b]
                .partial_cmp(&self.weights[a])
                .unwrap_or(Ordering::Equal)
        });
        let sorted = order.iter().map(|&i| self.weights[i].clone()).collect();
        (sorted, order)
    }

    /// Entrywise equality up to the backend tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.approx_eq(b))
    }

    /// `true` if `other` is a rearrangement of `self`.
    pub fn is_permutation_of(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let (a, _) = self.sorted_desc();
        let (b, _) = other.sorted_desc();
        a.iter().zip(&b).all(|(x, y)| x.approx_eq(y))
    }

    pub fn to_float(&self) -> Distribution<f64> {
        Distribution {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Exact rational value of every weight, rescaled so the total is exactly one.
    ///
    /// On the rational backend this is the identity. Float weights are read
    /// bit-exactly and divided by their exact sum.
    pub fn to_rational(&self) -> Distribution<Rational> {
        let weights: Vec<Rational> = self.weights.iter().map(Scalar::to_rational).collect();
        let total = sum(&weights);
        if total == Rational::from_integer(1.into()) {
            return Distribution { weights };
        }
        Distribution {
            weights: weights.into_iter().map(|w| w / &total).collect(),
        }
    }
}

pub(crate) fn same_size(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// `½ Σ |p_i − q_i|`.
pub fn trace_distance<S: Scalar>(p: &Distribution<S>, q: &Distribution<S>) -> Result<S> {
    same_size("trace_distance", p.len(), q.len())?;
    let total = p
        .weights
        .iter()
        .zip(&q.weights)
        .fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(total / S::from_usize(2))
}

/// `Σ_{i: p_i > q_i} (p_i − q_i)`, which equals [`trace_distance`] for normalized inputs.
pub fn trace_distance_one_sided<S: Scalar>(p: &Distribution<S>, q: &Distribution<S>) -> Result<S> {
    same_size("trace_distance", p.len(), q.len())?;
    Ok(p.weights
        .iter()
        .zip(&q.weights)
        .filter(|(a, b)| a > b)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() - b.clone()))
}

/// Distribution on `A × B`, stored row-major: entry `(a, b)` sits at `a * cols + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<S> {
    rows: usize,
    cols: usize,
    weights: Vec<S>,
}

impl<S: Scalar> JointDistribution<S> {
    pub fn new(rows: usize, cols: usize, weights: Vec<S>) -> Result<Self> {
        same_size("joint distribution", rows * cols, weights.len())?;
        check_weights(&weights, "joint distribution")?;
        Ok(Self {
            rows,
            cols,
            weights,
        })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDistribution("ragged joint distribution".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Reinterpret a distribution on the flattened product alphabet.
    pub fn from_flat(rows: usize, cols: usize, flat: Distribution<S>) -> Result<Self> {
        same_size("joint distribution", rows * cols, flat.len())?;
        Ok(Self {
            rows,
            cols,
            weights: flat.weights,
        })
    }

    pub fn product(a: &Distribution<S>, b: &Distribution<S>) -> Self {
        Self {
            rows: a.len(),
            cols: b.len(),
            weights: a.tensor(b).weights,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, a: usize, b: usize) -> &S {
        &self.weights[a * self.cols + b]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.weights.chunks(self.cols).map(<[S]>::to_vec).collect()
    }

    pub fn flatten(&self) -> Distribution<S> {
        Distribution {
            weights: self.weights.clone(),
        }
    }

    /// First marginal (sum over `B`) and second marginal (sum over `A`).
    pub fn marginals(&self) -> (Distribution<S>, Distribution<S>) {
        let mut first = vec![S::zero(); self.rows];
        let mut second = vec![S::zero(); self.cols];
        for (a, fa) in first.iter_mut().enumerate() {
            for (b, sb) in second.iter_mut().enumerate() {
                let w = self.get(a, b).clone();
                *fa = fa.clone() + w.clone();
                *sb = sb.clone() + w;
            }
        }
        (
            Distribution { weights: first },
            Distribution { weights: second },
        )
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.flatten().approx_eq(&other.flatten())
    }

    pub fn to_float(&self) -> JointDistribution<f64> {
        JointDistribution {
            rows: self.rows,
            cols: self.cols,
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Marginals of a joint distribution.
pub fn marginals<S: Scalar>(t: &JointDistribution<S>) -> (Distribution<S>, Distribution<S>) {
    t.marginals()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn rat(v: &[(i64, i64)]) -> Distribution<Rational> {
        Distribution::new(v.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn rejects_invalid_weights() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::<f64>::new(vec![]).is_err());
        assert!(Distribution::new(vec![ratio(1, 3), ratio(1, 3)]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn trace_distance_examples() {
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(trace_distance(&p, &p).unwrap(), 0.0);
        let a = Distribution::<f64>::point_mass(2, 0);
        let b = Distribution::<f64>::point_mass(2, 1);
        assert_eq!(trace_distance(&a, &b).unwrap(), 1.0);
        let p = rat(&[(3, 5), (2, 5)]);
        let q = rat(&[(1, 2), (1, 2)]);
        assert_eq!(trace_distance(&p, &q).unwrap(), ratio(1, 10));
        assert_eq!(trace_distance_one_sided(&p, &q).unwrap(), ratio(1, 10));
    }

    #[test]
    fn trace_distance_size_mismatch() {
        let p = Distribution::<f64>::uniform(2);
        let q = Distribution::<f64>::uniform(3);
        assert!(matches!(
            trace_distance(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn marginal_examples() {
        let t = JointDistribution::from_rows(vec![vec![ratio(1, 2), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 2)]])
            .unwrap();
        let (a, b) = marginals(&t);
        assert_eq!(a, rat(&[(1, 2), (1, 2)]));
        assert_eq!(b, rat(&[(1, 2), (1, 2)]));

        let t = JointDistribution::from_rows(vec![
            vec![ratio(2, 10), ratio(1, 10)],
            vec![ratio(3, 10), ratio(4, 10)],
        ])
        .unwrap();
        let (a, b) = t.marginals();
        assert_eq!(a, rat(&[(3, 10), (7, 10)]));
        assert_eq!(b, rat(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn product_marginals_are_factors() {
        let p = rat(&[(1, 3), (2, 3)]);
        let r = rat(&[(1, 4), (1, 4), (1, 2)]);
        let (a, b) = JointDistribution::product(&p, &r).marginals();
        assert_eq!(a, p);
        assert_eq!(b, r);
    }

    #[test]
    fn float_renormalization_is_exact() {
        let d = Distribution::new(vec![0.1, 0.2, 0.7]).unwrap().to_rational();
        let total: Rational = d.weights().iter().cloned().sum();
        assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn stable_descending_sort() {
        let d = rat(&[(1, 4), (1, 2), (1, 4)]);
        let (sorted, order) = d.sorted_desc();
        assert_eq!(order, vec![1, 0, 2]);
        assert_eq!(sorted[0], ratio(1, 2));
    }
}
