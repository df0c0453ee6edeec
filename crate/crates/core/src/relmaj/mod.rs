//! Relative majorization `(p, q) ≻ (p′, q′)`: existence of one channel `N`
//! with `N p = p′` and `N q = q′`.
//!
//! Decided two independent ways: an exact LP that also produces the witness
//! channel, and the piecewise-linear Blackwell (testing region) criterion.

pub mod lp;

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::channel::StochasticChannel;
use crate::distribution::{same_size, Distribution};
use crate::error::Result;
use crate::scalar::{rationalize, Rational, Scalar, TOLERANCES};

use lp::{lp_feasible, Constraint, LpOutcome, LpProblem};

/// A dichotomy `(p, q)` on a common alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct DistPair<S> {
    pub p: Distribution<S>,
    pub q: Distribution<S>,
}

impl<S: Scalar> DistPair<S> {
    pub fn new(p: Distribution<S>, q: Distribution<S>) -> Result<Self> {
        same_size("DistPair", p.len(), q.len())?;
        Ok(Self { p, q })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn relative_spectrum(&self) -> RelativeSpectrum<S> {
        relative_spectrum(self)
    }

    pub fn to_rational(&self) -> DistPair<Rational> {
        DistPair {
            p: self.p.to_rational(),
            q: self.q.to_rational(),
        }
    }

    /// `(p ⊗ a, q ⊗ b)`.
    pub fn tensor(&self, a: &Distribution<S>, b: &Distribution<S>) -> Self {
        Self {
            p: self.p.tensor(a),
            q: self.q.tensor(b),
        }
    }
}

/// Likelihood ratio `p(x)/q(x)`, with `+∞` when only `q(x)` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub enum Ratio<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Ratio<S> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Finite(x) => x.to_f64(),
            Ratio::Infinite => f64::INFINITY,
        }
    }

    fn cmp_desc(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ratio::Infinite, Ratio::Infinite) => Ordering::Equal,
            (Ratio::Infinite, _) => Ordering::Less,
            (_, Ratio::Infinite) => Ordering::Greater,
            (Ratio::Finite(a), Ratio::Finite(b)) => {
                b.partial_cmp(a).unwrap_or(Ordering::Equal)
            }
        }
    }

    fn approx_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Ratio::Infinite, Ratio::Infinite) => true,
            (Ratio::Finite(a), Ratio::Finite(b)) => a.approx_eq(b),
            _ => false,
        }
    }
}

/// Distinct likelihood ratios of a pair, in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSpectrum<S> {
    pub values: Vec<Ratio<S>>,
}

impl<S: Scalar> RelativeSpectrum<S> {
    /// Same set of ratios (up to the backend tolerance).
    pub fn same_as(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.approx_eq(b))
    }
}

/// Distinct values of `{p(x)/q(x)}`; letters with `p(x) = q(x) = 0` carry no ratio.
pub fn relative_spectrum<S: Scalar>(pair: &DistPair<S>) -> RelativeSpectrum<S> {
    let mut values: Vec<Ratio<S>> = pair
        .p
        .weights()
        .iter()
        .zip(pair.q.weights())
        .filter_map(|(p, q)| match (p.is_negligible(), q.is_negligible()) {
            (true, true) => None,
            (false, true) => Some(Ratio::Infinite),
            _ => Some(Ratio::Finite(p.clone() / q.clone())),
        })
        .collect();
    values.sort_by(Ratio::cmp_desc);
    values.dedup_by(|a, b| a.approx_eq(b));
    RelativeSpectrum { values }
}

/// How float inputs were turned into rationals before an exact decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Rationalization {
    pub max_denominator: u64,
    /// Largest absolute change of any weight, including renormalization.
    pub max_abs_change: f64,
}

/// Continued-fraction rationalization with the largest entry absorbing the
/// rounding residual, so the result sums to exactly one.
pub fn rationalize_distribution<S: Scalar>(p: &Distribution<S>, max_den: u64) -> (Distribution<Rational>, f64) {
    if S::is_exact() {
        return (p.to_rational(), 0.0);
    }
    let mut weights: Vec<Rational> = p
        .weights()
        .iter()
        .map(|w| rationalize(w.to_f64().max(0.0), max_den))
        .collect();
    let total: Rational = weights.iter().cloned().sum();
    let largest = p.sorted_desc().1[0];
    weights[largest] = weights[largest].clone() + Rational::one() - total;
    let change = weights
        .iter()
        .zip(p.weights())
        .map(|(r, w)| (r.to_f64() - w.to_f64()).abs())
        .fold(0.0, f64::max);
    (Distribution::new_unchecked(weights), change)
}

/// Exact version of a pair, plus a record if anything had to be rounded.
pub fn rationalize_pair<S: Scalar>(pair: &DistPair<S>) -> (DistPair<Rational>, Option<Rationalization>) {
    if S::is_exact() {
        return (pair.to_rational(), None);
    }
    let cap = TOLERANCES.max_denominator;
    let (p, cp) = rationalize_distribution(&pair.p, cap);
    let (q, cq) = rationalize_distribution(&pair.q, cap);
    (
        DistPair { p, q },
        Some(Rationalization {
            max_denominator: cap,
            max_abs_change: cp.max(cq),
        }),
    )
}

/// Verdict of the LP method together with its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct RelmajOutcome {
    pub verdict: bool,
    pub witness: Option<StochasticChannel<Rational>>,
    pub rationalization: Option<Rationalization>,
    pub pivots: usize,
}

/// LP in the entries `N[j][i]` (variable `j * n_in + i`) of a channel with
/// `N p = p′` and `N q = q′`.
pub fn relmaj_problem(source: &DistPair<Rational>, target: &DistPair<Rational>) -> LpProblem {
    let (n_in, n_out) = (source.len(), target.len());
    let var = |j: usize, i: usize| j * n_in + i;
    let mut lp = LpProblem::new(n_in * n_out);
    for i in 0..n_in {
        lp.push(Constraint::eq(
            (0..n_out).map(|j| (var(j, i), Rational::one())).collect(),
            Rational::one(),
        ));
    }
    for (src, dst) in [(&source.p, &target.p), (&source.q, &target.q)] {
        for j in 0..n_out {
            let coeffs = (0..n_in)
                .filter(|&i| !src.weights()[i].is_zero())
                .map(|i| (var(j, i), src.weights()[i].clone()))
                .collect();
            lp.push(Constraint::eq(coeffs, dst.weights()[j].clone()));
        }
    }
    lp
}

pub(crate) fn channel_from_assignment(n_out: usize, n_in: usize, x: Vec<Rational>) -> StochasticChannel<Rational> {
    StochasticChannel::from_flat_unchecked(n_out, n_in, x)
}

/// Decide `(p, q) ≻ (p′, q′)` by exact LP; float inputs are rationalized first.
pub fn relatively_majorizes<S: Scalar>(source: &DistPair<S>, target: &DistPair<S>) -> Result<RelmajOutcome> {
    let (src, rs) = rationalize_pair(source);
    let (dst, rt) = rationalize_pair(target);
    let rationalization = match (rs, rt) {
        (Some(a), Some(b)) => Some(Rationalization {
            max_denominator: a.max_denominator,
            max_abs_change: a.max_abs_change.max(b.max_abs_change),
        }),
        (a, b) => a.or(b),
    };
    let lp = relmaj_problem(&src, &dst);
    let outcome = lp_feasible(&lp)?;
    let pivots = outcome.pivots();
    let witness = match outcome {
        LpOutcome::Feasible(sol) => {
            debug_assert!(lp.is_satisfied_by(&sol.assignment));
            Some(channel_from_assignment(dst.len(), src.len(), sol.assignment))
        }
        LpOutcome::Infeasible { .. } => None,
    };
    Ok(RelmajOutcome {
        verdict: witness.is_some(),
        witness,
        rationalization,
        pivots,
    })
}

/// `Σ_i |p_i − t q_i|`.
fn testing_curve<S: Scalar>(pair: &DistPair<S>, t: &S) -> S {
    pair.p
        .weights()
        .iter()
        .zip(pair.q.weights())
        .fold(S::zero(), |acc, (p, q)| acc + (p.clone() - t.clone() * q.clone()).abs())
}

fn finite_breakpoints<S: Scalar>(pair: &DistPair<S>) -> Vec<S> {
    relative_spectrum(pair)
        .values
        .into_iter()
        .filter_map(|r| match r {
            Ratio::Finite(x) => Some(x),
            Ratio::Infinite => None,
        })
        .collect()
}

/// Blackwell criterion: `Σ|p_i − t q_i| ≥ Σ|p′_j − t q′_j|` for all `t ≥ 0`.
///
/// Both sides are piecewise linear with kinks at the finite likelihood ratios,
/// and both have slope 1 beyond the last kink, so checking `t = 0`, every kink,
/// and one point past the last kink is exact.
pub fn blackwell_criterion<S: Scalar>(source: &DistPair<S>, target: &DistPair<S>) -> bool {
    let mut ts = vec![S::zero()];
    ts.extend(finite_breakpoints(source));
    ts.extend(finite_breakpoints(target));
    let last = ts
        .iter()
        .cloned()
        .fold(S::zero(), |m, t| if t > m { t } else { m });
    ts.push(last + S::one());
    ts.iter()
        .all(|t| testing_curve(source, t).ge_tol(&testing_curve(target, t)))
}

/// Exact LP for `∃ D` doubly stochastic with `D x = y`.
pub fn doubly_stochastic_lp(
    x: &Distribution<Rational>,
    y: &Distribution<Rational>,
) -> Result<Option<StochasticChannel<Rational>>> {
    same_size("doubly_stochastic_lp", x.len(), y.len())?;
    let k = x.len();
    let var = |j: usize, i: usize| j * k + i;
    let mut lp = LpProblem::new(k * k);
    for a in 0..k {
        lp.push(Constraint::eq(
            (0..k).map(|j| (var(j, a), Rational::one())).collect(),
            Rational::one(),
        ));
        lp.push(Constraint::eq(
            (0..k).map(|i| (var(a, i), Rational::one())).collect(),
            Rational::one(),
        ));
        lp.push(Constraint::eq(
            (0..k)
                .filter(|&i| !x.weights()[i].is_zero())
                .map(|i| (var(a, i), x.weights()[i].clone()))
                .collect(),
            y.weights()[a].clone(),
        ));
    }
    Ok(lp_feasible(&lp)?
        .into_solution()
        .map(|sol| channel_from_assignment(k, k, sol.assignment)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::majorize::{construct_doubly_stochastic, majorizes};
    use crate::scalar::ratio;

    fn rat(v: &[(i64, i64)]) -> Distribution<Rational> {
        Distribution::new(v.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    fn pair(p: &[(i64, i64)], q: &[(i64, i64)]) -> DistPair<Rational> {
        DistPair::new(rat(p), rat(q)).unwrap()
    }

    #[test]
    fn self_pair_is_majorized() {
        let a = pair(&[(1, 3), (2, 3)], &[(1, 2), (1, 2)]);
        let out = relatively_majorizes(&a, &a).unwrap();
        assert!(out.verdict);
        let w = out.witness.unwrap();
        assert_eq!(w.apply(&a.p).unwrap(), a.p);
        assert_eq!(w.apply(&a.q).unwrap(), a.q);
        assert!(blackwell_criterion(&a, &a));
    }

    #[test]
    fn feasible_example() {
        let src = pair(&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]);
        let dst = pair(&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]);
        let out = relatively_majorizes(&src, &dst).unwrap();
        assert!(out.verdict);
        let w = out.witness.unwrap();
        assert_eq!(w.apply(&src.p).unwrap(), dst.p);
        assert_eq!(w.apply(&src.q).unwrap(), dst.q);
        assert!(blackwell_criterion(&src, &dst));
    }

    #[test]
    fn infeasible_example() {
        let src = pair(&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]);
        let dst = pair(&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]);
        let out = relatively_majorizes(&src, &dst).unwrap();
        assert!(!out.verdict && out.witness.is_none());
        assert!(!blackwell_criterion(&src, &dst));
    }

    #[test]
    fn spectrum_examples() {
        let s = pair(&[(1, 3), (2, 3)], &[(1, 3), (2, 3)]).relative_spectrum();
        assert_eq!(s.values, vec![Ratio::Finite(ratio(1, 1))]);
        let s = pair(&[(1, 1), (0, 1)], &[(1, 2), (1, 2)]).relative_spectrum();
        assert_eq!(s.values, vec![Ratio::Finite(ratio(2, 1)), Ratio::Finite(ratio(0, 1))]);
        let s = pair(&[(3, 4), (1, 4)], &[(1, 2), (1, 2)]).relative_spectrum();
        assert_eq!(s.values, vec![Ratio::Finite(ratio(3, 2)), Ratio::Finite(ratio(1, 2))]);
        let s = pair(&[(1, 2), (1, 2), (0, 1)], &[(0, 1), (1, 2), (1, 2)]).relative_spectrum();
        assert_eq!(s.values, vec![Ratio::Infinite, Ratio::Finite(ratio(1, 1)), Ratio::Finite(ratio(0, 1))]);
    }

    #[test]
    fn uniform_reference_reduces_to_majorization() {
        let u = rat(&[(1, 3), (1, 3), (1, 3)]);
        let x = rat(&[(1, 2), (1, 3), (1, 6)]);
        let y = rat(&[(1, 3), (1, 2), (1, 6)]);
        let z = rat(&[(2, 3), (1, 6), (1, 6)]);
        for (a, b) in [(&x, &y), (&x, &z), (&z, &x), (&u, &x), (&x, &u)] {
            let src = DistPair::new(a.clone(), u.clone()).unwrap();
            let dst = DistPair::new(b.clone(), u.clone()).unwrap();
            let m = majorizes(a, b).unwrap();
            assert_eq!(blackwell_criterion(&src, &dst), m);
            assert_eq!(relatively_majorizes(&src, &dst).unwrap().verdict, m);
        }
    }

    #[test]
    fn birkhoff_lp_matches_construction() {
        let x = rat(&[(3, 5), (2, 5)]);
        let y = rat(&[(1, 2), (1, 2)]);
        let d = doubly_stochastic_lp(&x, &y).unwrap().unwrap();
        assert!(d.is_doubly_stochastic());
        assert_eq!(d.apply(&x).unwrap(), y);
        assert!(construct_doubly_stochastic(&x, &y).is_ok());
        assert!(doubly_stochastic_lp(&y, &x).unwrap().is_none());
    }

    #[test]
    fn float_inputs_are_rationalized() {
        let src = DistPair::new(
            Distribution::new(vec![0.7, 0.3]).unwrap(),
            Distribution::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let dst = DistPair::new(
            Distribution::new(vec![0.6, 0.4]).unwrap(),
            Distribution::new(vec![0.5, 0.5]).unwrap(),
        )
        .unwrap();
        let out = relatively_majorizes(&src, &dst).unwrap();
        assert!(out.verdict);
        let r = out.rationalization.unwrap();
        assert!(r.max_abs_change < 1e-15);
    }
}
