//! Majorization: partial-sum and `t`-criterion tests, explicit doubly
//! stochastic witnesses built from T-transforms, and a sampled Rényi-entropy
//! check for catalytic majorization.

use crate::channel::StochasticChannel;
use crate::distribution::{same_size, Distribution};
use crate::divergence::{renyi_entropy, Order};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, TOLERANCES};

/// Doubly stochastic `D` with `D x = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationWitness<S> {
    pub matrix: StochasticChannel<S>,
    pub t_transform_count: usize,
}

impl<S: Scalar> MajorizationWitness<S> {
    /// `D` is doubly stochastic and maps `x` to `y` (exactly on rationals).
    pub fn verify(&self, x: &Distribution<S>, y: &Distribution<S>) -> bool {
        self.matrix.validate().is_ok()
            && self.matrix.is_doubly_stochastic()
            && self
                .matrix
                .apply(x)
                .map(|out| out.approx_eq(y))
                .unwrap_or(false)
    }
}

/// `x ≻ y`: every partial sum of `x↓` dominates the one of `y↓`.
pub fn majorizes<S: Scalar>(x: &Distribution<S>, y: &Distribution<S>) -> Result<bool> {
    same_size("majorizes", x.len(), y.len())?;
    let (xs, _) = x.sorted_desc();
    let (ys, _) = y.sorted_desc();
    let (mut sx, mut sy) = (S::zero(), S::zero());
    for (a, b) in xs.into_iter().zip(ys) {
        sx = sx + a;
        sy = sy + b;
        if !sx.ge_tol(&sy) {
            return Ok(false);
        }
    }
    Ok(sx.approx_eq(&sy))
}

fn abs_deviation<S: Scalar>(values: &[S], t: &S) -> S {
    values
        .iter()
        .fold(S::zero(), |acc, v| acc + (v.clone() - t.clone()).abs())
}

/// `x ≻ y` via `Σ|x_i − t| ≥ Σ|y_i − t|` at every breakpoint `t ∈ {x_i} ∪ {y_i}`.
pub fn majorizes_t_criterion<S: Scalar>(x: &Distribution<S>, y: &Distribution<S>) -> Result<bool> {
    same_size("majorizes_t_criterion", x.len(), y.len())?;
    Ok(x.weights()
        .iter()
        .chain(y.weights())
        .all(|t| abs_deviation(x.weights(), t).ge_tol(&abs_deviation(y.weights(), t))))
}

/// Build a doubly stochastic `D` with `D x = y` as a product of at most
/// `k − 1` T-transforms.
pub fn construct_doubly_stochastic<S: Scalar>(
    x: &Distribution<S>,
    y: &Distribution<S>,
) -> Result<MajorizationWitness<S>> {
    if !majorizes(x, y)? {
        return Err(Error::NotMajorized);
    }
    let k = x.len();
    let (mut z, px) = x.sorted_desc();
    let (ys, py) = y.sorted_desc();
    let mut sorted = StochasticChannel::<S>::identity(k);
    let mut count = 0;
    // Each step matches at least one more coordinate, so k steps always suffice.
    for _ in 0..k {
        let Some(j) = (0..k).rev().find(|&i| z[i].definitely_gt(&ys[i])) else {
            break;
        };
        let Some(l) = (j + 1..k).find(|&i| ys[i].definitely_gt(&z[i])) else {
            break;
        };
        let give = z[j].clone() - ys[j].clone();
        let take = ys[l].clone() - z[l].clone();
        let delta = if give < take { give } else { take };
        let keep = S::one() - delta.clone() / (z[j].clone() - z[l].clone());
        let mut t = StochasticChannel::<S>::identity(k).to_rows();
        t[j][j] = keep.clone();
        t[l][l] = keep.clone();
        t[j][l] = S::one() - keep.clone();
        t[l][j] = S::one() - keep;
        let t = StochasticChannel::from_flat_unchecked(k, k, t.into_iter().flatten().collect());
        z[j] = z[j].clone() - delta.clone();
        z[l] = z[l].clone() + delta;
        sorted = t.compose(&sorted)?;
        count += 1;
    }
    // Undo the sorting: D[py[a]][px[b]] = sorted[a][b].
    let mut entries = vec![S::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            entries[py[a] * k + px[b]] = sorted.get(a, b).clone();
        }
    }
    Ok(MajorizationWitness {
        matrix: StochasticChannel::from_flat_unchecked(k, k, entries),
        t_transform_count: count,
    })
}

/// Necessary condition for `p → p′` by catalytic majorization: `H_α(p) ≤ H_α(p′)`
/// at each sampled order. This is a sampler, not the complete criterion.
pub fn catalytic_majorization_necessary<S: Scalar>(
    p: &Distribution<S>,
    p_prime: &Distribution<S>,
    alphas: &[Order],
) -> Result<bool> {
    same_size("catalytic_majorization_necessary", p.len(), p_prime.len())?;
    Ok(alphas.iter().all(|&a| {
        let (h, hp) = (renyi_entropy(a, p), renyi_entropy(a, p_prime));
        h <= hp || (h - hp) <= TOLERANCES.slack
    }))
}
