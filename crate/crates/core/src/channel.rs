//! Classical channels as column-stochastic matrices.

use crate::distribution::{same_size, Distribution, JointDistribution};
use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Conditional distribution `P(j | i)` stored as `entries[j][i]`
/// (output-major), so every input column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticChannel<S> {
    out_size: usize,
    in_size: usize,
    entries: Vec<S>,
}

impl<S: Scalar> StochasticChannel<S> {
    /// Build from `entries[output][input]`, checking nonnegativity and column sums.
    pub fn new(entries: Vec<Vec<S>>) -> Result<Self> {
        let out_size = entries.len();
        let in_size = entries.first().map_or(0, Vec::len);
        if out_size == 0 || in_size == 0 {
            return Err(Error::InvalidChannel("empty matrix".into()));
        }
        if entries.iter().any(|row| row.len() != in_size) {
            return Err(Error::InvalidChannel("ragged matrix".into()));
        }
        Self::from_flat(out_size, in_size, entries.into_iter().flatten().collect())
    }

    pub fn from_flat(out_size: usize, in_size: usize, entries: Vec<S>) -> Result<Self> {
        same_size("channel entries", out_size * in_size, entries.len())?;
        let channel = Self {
            out_size,
            in_size,
            entries,
        };
        channel.validate()?;
        Ok(channel)
    }

    pub(crate) fn from_flat_unchecked(out_size: usize, in_size: usize, entries: Vec<S>) -> Self {
        debug_assert_eq!(entries.len(), out_size * in_size);
        Self {
            out_size,
            in_size,
            entries,
        }
    }

    /// Nonnegative entries and unit column sums, up to the backend tolerance.
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.out_size {
            for i in 0..self.in_size {
                let e = self.get(j, i);
                if e.is_negative() && !e.is_negligible() {
                    return Err(Error::InvalidChannel(format!(
                        "negative entry {e} at [{j}][{i}]"
                    )));
                }
                if !S::is_exact() && !e.to_f64().is_finite() {
                    return Err(Error::InvalidChannel(format!("non-finite entry at [{j}][{i}]")));
                }
            }
        }
        for i in 0..self.in_size {
            let total = self.column_sum(i);
            if !total.approx_eq(&S::one()) {
                return Err(Error::InvalidChannel(format!("column {i} sums to {total}")));
            }
        }
        Ok(())
    }

    pub fn identity(k: usize) -> Self {
        Self::permutation(&(0..k).collect::<Vec<_>>())
    }

    /// Channel sending input `i` to output `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let k = perm.len();
        let mut entries = vec![S::zero(); k * k];
        for (i, &j) in perm.iter().enumerate() {
            entries[j * k + i] = S::one();
        }
        Self::from_flat_unchecked(k, k, entries)
    }

    /// Channel that outputs `p` regardless of its input.
    pub fn constant(in_size: usize, p: &Distribution<S>) -> Self {
        let mut entries = Vec::with_capacity(p.len() * in_size);
        for w in p.weights() {
            entries.extend(std::iter::repeat_n(w.clone(), in_size));
        }
        Self::from_flat_unchecked(p.len(), in_size, entries)
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    /// `P(output | input)`.
    pub fn get(&self, output: usize, input: usize) -> &S {
        &self.entries[output * self.in_size + input]
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.entries
            .chunks(self.in_size)
            .map(<[S]>::to_vec)
            .collect()
    }

    pub fn column(&self, input: usize) -> Vec<S> {
        (0..self.out_size)
            .map(|j| self.get(j, input).clone())
            .collect()
    }

    fn column_sum(&self, input: usize) -> S {
        (0..self.out_size).fold(S::zero(), |acc, j| acc + self.get(j, input).clone())
    }

    fn row_sum(&self, output: usize) -> S {
        sum(&self.entries[output * self.in_size..(output + 1) * self.in_size])
    }

    /// Square with every row summing to one as well.
    pub fn is_doubly_stochastic(&self) -> bool {
        self.in_size == self.out_size
            && (0..self.out_size).all(|j| self.row_sum(j).approx_eq(&S::one()))
    }

    /// Raw matrix-vector product, without normalization checks on `x`.
    pub fn apply_weights(&self, x: &[S]) -> Result<Vec<S>> {
        same_size("channel input", self.in_size, x.len())?;
        Ok((0..self.out_size)
            .map(|j| {
                let row = &self.entries[j * self.in_size..(j + 1) * self.in_size];
                row.iter().zip(x).fold(S::zero(), |acc, (e, xi)| {
                    if e.is_zero() || xi.is_zero() {
                        acc
                    } else {
                        acc + e.clone() * xi.clone()
                    }
                })
            })
            .collect())
    }

    pub fn apply(&self, p: &Distribution<S>) -> Result<Distribution<S>> {
        Ok(Distribution::new_unchecked(self.apply_weights(p.weights())?))
    }

    /// Apply to a joint distribution on `in_a × in_b` and read the result on
    /// `out_rows × out_cols`.
    pub fn apply_joint(
        &self,
        t: &JointDistribution<S>,
        out_rows: usize,
        out_cols: usize,
    ) -> Result<JointDistribution<S>> {
        let out = self.apply(&t.flatten())?;
        JointDistribution::from_flat(out_rows, out_cols, out)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.in_size != inner.out_size {
            return Err(Error::DimensionMismatch {
                context: "compose",
                expected: self.in_size,
                found: inner.out_size,
            });
        }
        let (n, m, l) = (self.out_size, self.in_size, inner.in_size);
        let mut entries = vec![S::zero(); n * l];
        for j in 0..n {
            for k in 0..m {
                let a = self.get(j, k);
                if a.is_zero() {
                    continue;
                }
                for i in 0..l {
                    let b = inner.get(k, i);
                    if !b.is_zero() {
                        let slot = &mut entries[j * l + i];
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(Self::from_flat_unchecked(n, l, entries))
    }

    /// Kronecker product; letter `(a, b)` of a product alphabet has index
    /// `a * size_b + b` on both sides.
    pub fn tensor(&self, other: &Self) -> Self {
        let out = self.out_size * other.out_size;
        let inp = self.in_size * other.in_size;
        let mut entries = vec![S::zero(); out * inp];
        for j1 in 0..self.out_size {
            for i1 in 0..self.in_size {
                let a = self.get(j1, i1);
                if a.is_zero() {
                    continue;
                }
                for j2 in 0..other.out_size {
                    for i2 in 0..other.in_size {
                        let b = other.get(j2, i2);
                        if b.is_zero() {
                            continue;
                        }
                        let row = j1 * other.out_size + j2;
                        let col = i1 * other.in_size + i2;
                        entries[row * inp + col] = a.clone() * b.clone();
                    }
                }
            }
        }
        Self::from_flat_unchecked(out, inp, entries)
    }

    /// Block-diagonal channel `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let out = self.out_size + other.out_size;
        let inp = self.in_size + other.in_size;
        let mut entries = vec![S::zero(); out * inp];
        for j in 0..self.out_size {
            for i in 0..self.in_size {
                entries[j * inp + i] = self.get(j, i).clone();
            }
        }
        for j in 0..other.out_size {
            for i in 0..other.in_size {
                entries[(self.out_size + j) * inp + self.in_size + i] = other.get(j, i).clone();
            }
        }
        Self::from_flat_unchecked(out, inp, entries)
    }

    /// Sub-matrix with the given output and input ranges.
    pub fn block(&self, outputs: std::ops::Range<usize>, inputs: std::ops::Range<usize>) -> Self {
        let (n, m) = (outputs.len(), inputs.len());
        let mut entries = Vec::with_capacity(n * m);
        for j in outputs {
            for i in inputs.clone() {
                entries.push(self.get(j, i).clone());
            }
        }
        Self::from_flat_unchecked(n, m, entries)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.out_size == other.out_size
            && self.in_size == other.in_size
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> StochasticChannel<T> {
        StochasticChannel {
            out_size: self.out_size,
            in_size: self.in_size,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_float(&self) -> StochasticChannel<f64> {
        self.map(Scalar::to_f64)
    }
}

/// `channel(p)`.
pub fn apply<S: Scalar>(channel: &StochasticChannel<S>, p: &Distribution<S>) -> Result<Distribution<S>> {
    channel.apply(p)
}

/// `a ∘ b`: apply `b`, then `a`.
pub fn compose<S: Scalar>(
    a: &StochasticChannel<S>,
    b: &StochasticChannel<S>,
) -> Result<StochasticChannel<S>> {
    a.compose(b)
}

pub fn tensor<S: Scalar>(a: &StochasticChannel<S>, b: &StochasticChannel<S>) -> StochasticChannel<S> {
    a.tensor(b)
}
