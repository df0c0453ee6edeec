//! Rényi divergences and entropies of every order, including the limits
//! `α ∈ {0, 1, ±∞}` and negative orders (with the `sgn(α)` normalization).
//!
//! Values are always `f64`; `+∞` is an ordinary return value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::distribution::{same_size, Distribution, JointDistribution};
use crate::error::Result;
use crate::scalar::{common_denominator, Rational, Scalar, TOLERANCES};

/// Orders closer than this to 0 or 1 use the limit formulas.
pub const ORDER_SNAP: f64 = 1e-9;

/// An extended-real order `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    PosInf,
    NegInf,
}

impl Order {
    /// Build from a float, mapping `±inf` to the symbolic orders and snapping
    /// values within [`ORDER_SNAP`] of 0 or 1.
    pub fn new(alpha: f64) -> Self {
        assert!(!alpha.is_nan(), "order must not be NaN");
        if alpha == f64::INFINITY {
            Order::PosInf
        } else if alpha == f64::NEG_INFINITY {
            Order::NegInf
        } else if alpha.abs() < ORDER_SNAP {
            Order::Finite(0.0)
        } else if (alpha - 1.0).abs() < ORDER_SNAP {
            Order::Finite(1.0)
        } else {
            Order::Finite(alpha)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Order::Finite(a) => a,
            Order::PosInf => f64::INFINITY,
            Order::NegInf => f64::NEG_INFINITY,
        }
    }

    /// `sgn(α)`, with `sgn(0) = 1`.
    pub fn sign(self) -> f64 {
        if self.value() < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// `{−∞, −2, −1, −0.5, 0, 0.5, 1, 2, 5, ∞}`.
    pub fn standard_grid() -> Vec<Order> {
        let mut grid = vec![Order::NegInf];
        grid.extend([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0].map(Order::Finite));
        grid.push(Order::PosInf);
        grid
    }
}

impl From<f64> for Order {
    fn from(alpha: f64) -> Self {
        Order::new(alpha)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(a) => write!(f, "{a}"),
            Order::PosInf => f.write_str("inf"),
            Order::NegInf => f.write_str("-inf"),
        }
    }
}

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Order::PosInf),
            "-inf" | "-infinity" => Ok(Order::NegInf),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|a| !a.is_nan())
                .map(Order::new)
                .ok_or_else(|| format!("invalid order {s:?}")),
        }
    }
}

/// Float weights plus the support mask decided on the original backend.
fn float_view<S: Scalar>(p: &Distribution<S>) -> (Vec<f64>, Vec<bool>) {
    (
        p.weights().iter().map(Scalar::to_f64).collect(),
        p.support_mask(),
    )
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `D_α(p‖q)`.
pub fn renyi_divergence<S: Scalar>(
    alpha: impl Into<Order>,
    p: &Distribution<S>,
    q: &Distribution<S>,
) -> Result<f64> {
    same_size("renyi_divergence", p.len(), q.len())?;
    if p == q {
        return Ok(0.0);
    }
    let (pw, ps) = float_view(p);
    let (qw, qs) = float_view(q);
    let alpha = Order::new(alpha.into().value());
    Ok(divergence_raw(alpha, &pw, &ps, &qw, &qs))
}

fn max_log_ratio(pw: &[f64], ps: &[bool], qw: &[f64], qs: &[bool]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..pw.len() {
        if !ps[i] {
            continue;
        }
        if !qs[i] {
            return f64::INFINITY;
        }
        best = best.max(pw[i].ln() - qw[i].ln());
    }
    best
}

fn divergence_raw(alpha: Order, pw: &[f64], ps: &[bool], qw: &[f64], qs: &[bool]) -> f64 {
    let k = pw.len();
    match alpha {
        Order::PosInf => max_log_ratio(pw, ps, qw, qs),
        Order::NegInf => max_log_ratio(qw, qs, pw, ps),
        Order::Finite(1.0) => {
            let mut total = 0.0;
            for i in 0..k {
                if !ps[i] {
                    continue;
                }
                if !qs[i] {
                    return f64::INFINITY;
                }
                total += pw[i] * (pw[i].ln() - qw[i].ln());
            }
            total
        }
        Order::Finite(0.0) => {
            let mass: f64 = (0..k).filter(|&i| ps[i]).map(|i| qw[i]).sum();
            if (0..k).all(|i| !(ps[i] && qs[i])) {
                f64::INFINITY
            } else {
                -mass.ln()
            }
        }
        Order::Finite(a) => {
            let mut terms = Vec::with_capacity(k);
            for i in 0..k {
                match (ps[i], qs[i]) {
                    (true, true) => terms.push(a * pw[i].ln() + (1.0 - a) * qw[i].ln()),
                    // p_i^α q_i^{1-α} blows up when the zero sits under a negative power.
                    (true, false) if a > 1.0 => return f64::INFINITY,
                    (false, true) if a < 0.0 => return f64::INFINITY,
                    _ => {}
                }
            }
            let lse = log_sum_exp(&terms);
            if lse == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            let sign = if a < 0.0 { -1.0 } else { 1.0 };
            sign / (a - 1.0) * lse
        }
    }
}

/// `D(p‖q) = Σ p ln(p/q)`.
pub fn relative_entropy<S: Scalar>(p: &Distribution<S>, q: &Distribution<S>) -> Result<f64> {
    renyi_divergence(Order::Finite(1.0), p, q)
}

/// `D_0(p‖q) = −ln Σ_{p_i > 0} q_i`.
pub fn min_relative_entropy<S: Scalar>(p: &Distribution<S>, q: &Distribution<S>) -> Result<f64> {
    renyi_divergence(Order::Finite(0.0), p, q)
}

/// `H_α(p)`.
pub fn renyi_entropy<S: Scalar>(alpha: impl Into<Order>, p: &Distribution<S>) -> f64 {
    let (pw, ps) = float_view(p);
    let support: Vec<f64> = pw
        .iter()
        .zip(&ps)
        .filter(|(_, s)| **s)
        .map(|(w, _)| *w)
        .collect();
    let full_rank = support.len() == pw.len();
    match Order::new(alpha.into().value()) {
        Order::PosInf => -support.iter().copied().fold(0.0, f64::max).ln(),
        Order::NegInf => {
            if full_rank {
                support.iter().copied().fold(f64::INFINITY, f64::min).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        Order::Finite(0.0) => (support.len() as f64).ln(),
        Order::Finite(1.0) => -support.iter().map(|w| w * w.ln()).sum::<f64>(),
        Order::Finite(a) => {
            if a < 0.0 && !full_rank {
                return f64::NEG_INFINITY;
            }
            let terms: Vec<f64> = support.iter().map(|w| a * w.ln()).collect();
            let sign = if a < 0.0 { -1.0 } else { 1.0 };
            sign / (1.0 - a) * log_sum_exp(&terms)
        }
    }
}

/// Shannon entropy `H(p)`.
pub fn shannon_entropy<S: Scalar>(p: &Distribution<S>) -> f64 {
    renyi_entropy(Order::Finite(1.0), p)
}

/// `|a − b|`, with equal infinities counting as agreement.
pub fn extended_residual(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        (a - b).abs()
    }
}

/// Residual of `D_α(p‖q) = |α|/(|α|+1) · D_{|α|+1}(q‖p)` for finite `α < 0`.
pub fn check_negative_alpha_identity<S: Scalar>(
    alpha: f64,
    p: &Distribution<S>,
    q: &Distribution<S>,
) -> Result<f64> {
    assert!(alpha < 0.0 && alpha.is_finite(), "identity needs a finite negative order");
    let lhs = renyi_divergence(Order::new(alpha), p, q)?;
    let beta = alpha.abs();
    let rhs = beta / (beta + 1.0) * renyi_divergence(Order::new(beta + 1.0), q, p)?;
    Ok(extended_residual(lhs, rhs))
}

/// Residual of `D_α(p‖η_k) = sgn(α) ln k − H_α(p)`, with `η_k` uniform on the alphabet.
///
/// For `α < 0` the sign in front of `ln k` flips; the familiar `ln k − H_α(p)`
/// only holds for `α ≥ 0`.
pub fn entropy_uniform_relation<S: Scalar>(alpha: impl Into<Order>, p: &Distribution<S>) -> f64 {
    let alpha = alpha.into();
    let k = p.len();
    let eta = Distribution::<S>::uniform(k);
    let lhs = renyi_divergence(alpha, p, &eta).expect("same alphabet");
    let rhs = alpha.sign() * (k as f64).ln() - renyi_entropy(alpha, p);
    extended_residual(lhs, rhs)
}

/// `D_α(t‖σ_A⊗σ_B) − D_α(t_A‖σ_A) − D_α(t_B‖σ_B)`.
///
/// Nonnegative for `α ∈ {0, 1}`; for `α = 1` it equals the mutual-information
/// style term `D(t‖t_A⊗t_B)`. An infinite left-hand side gives `+∞`.
pub fn superadditivity_gap<S: Scalar>(
    alpha: impl Into<Order>,
    t: &JointDistribution<S>,
    sigma_a: &Distribution<S>,
    sigma_b: &Distribution<S>,
) -> Result<f64> {
    let alpha = alpha.into();
    same_size("superadditivity_gap", t.rows(), sigma_a.len())?;
    same_size("superadditivity_gap", t.cols(), sigma_b.len())?;
    let (ta, tb) = t.marginals();
    let whole = renyi_divergence(alpha, &t.flatten(), &sigma_a.tensor(sigma_b))?;
    if whole.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let a = renyi_divergence(alpha, &ta, sigma_a)?;
    let b = renyi_divergence(alpha, &tb, sigma_b)?;
    Ok(whole - a - b)
}

/// Common denominators above this make exact entropy comparison too costly;
/// the float value with slack is used instead.
const EXACT_COMPARE_MAX_DENOMINATOR: u64 = 4096;

/// Outcome of comparing two divergence values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub ordering: Ordering,
    /// `true` if decided in exact arithmetic; otherwise floats within
    /// `TOLERANCES.slack` count as equal.
    pub exact: bool,
}

/// `Π (p_i/q_i)^{L p_i}` for a common denominator `L` of `p`.
fn exp_scaled_relative_entropy(p: &[Rational], q: &[Rational], l: &BigInt) -> Rational {
    let mut acc = Rational::one();
    for (pi, qi) in p.iter().zip(q) {
        if pi.is_zero() {
            continue;
        }
        let e = (pi * Rational::from_integer(l.clone())).to_integer();
        let e = e.to_i32().expect("exponent bounded by the denominator cap");
        acc *= (pi / qi).pow(e);
    }
    acc
}

/// Compare `D(p‖q)` with `D(p′‖q′)`.
///
/// Exact when all four inputs are rational with small enough common
/// denominator of `p` and `p′`, since `D(p‖q) = ln Π (p_i/q_i)^{p_i}`.
pub fn compare_relative_entropies<S: Scalar>(
    p: &Distribution<S>,
    q: &Distribution<S>,
    p_prime: &Distribution<S>,
    q_prime: &Distribution<S>,
) -> Result<Comparison> {
    let lhs = relative_entropy(p, q)?;
    let rhs = relative_entropy(p_prime, q_prime)?;
    if lhs.is_infinite() || rhs.is_infinite() {
        return Ok(Comparison {
            ordering: lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal),
            exact: true,
        });
    }
    if S::is_exact() {
        let pr: Vec<Rational> = p.weights().iter().map(Scalar::to_rational).collect();
        let pp: Vec<Rational> = p_prime.weights().iter().map(Scalar::to_rational).collect();
        let l = common_denominator(pr.iter().chain(&pp));
        if l <= BigInt::from(EXACT_COMPARE_MAX_DENOMINATOR) {
            let qr: Vec<Rational> = q.weights().iter().map(Scalar::to_rational).collect();
            let qp: Vec<Rational> = q_prime.weights().iter().map(Scalar::to_rational).collect();
            let a = exp_scaled_relative_entropy(&pr, &qr, &l);
            let b = exp_scaled_relative_entropy(&pp, &qp, &l);
            return Ok(Comparison {
                ordering: a.cmp(&b),
                exact: true,
            });
        }
    }
    let ordering = if (lhs - rhs).abs() <= TOLERANCES.slack {
        Ordering::Equal
    } else {
        lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
    };
    Ok(Comparison {
        ordering,
        exact: false,
    })
}

/// Compare `D_0(p‖q)` with `D_0(p′‖q′)`; exact on the rational backend since
/// `D_0 = −ln(mass of q on supp p)`.
pub fn compare_min_relative_entropies<S: Scalar>(
    p: &Distribution<S>,
    q: &Distribution<S>,
    p_prime: &Distribution<S>,
    q_prime: &Distribution<S>,
) -> Result<Comparison> {
    same_size("compare_min_relative_entropies", p.len(), q.len())?;
    same_size("compare_min_relative_entropies", p_prime.len(), q_prime.len())?;
    let mass = |p: &Distribution<S>, q: &Distribution<S>| -> S {
        p.support_mask()
            .iter()
            .zip(q.weights())
            .filter(|(s, _)| **s)
            .fold(S::zero(), |acc, (_, w)| acc + w.clone())
    };
    let (a, b) = (mass(p, q), mass(p_prime, q_prime));
    // Larger mass means smaller D_0.
    let ordering = if a.approx_eq(&b) {
        Ordering::Equal
    } else if a < b {
        Ordering::Greater
    } else {
        Ordering::Less
    };
    Ok(Comparison {
        ordering,
        exact: S::is_exact(),
    })
}

/// Compare `H(p)` with `H(p′)`: exact on rationals via `Π p_i^{L p_i}`.
pub fn compare_shannon_entropies<S: Scalar>(
    p: &Distribution<S>,
    p_prime: &Distribution<S>,
) -> Result<Comparison> {
    // H(p) = ln k − D(p‖η_k) when both live on the same alphabet.
    same_size("compare_shannon_entropies", p.len(), p_prime.len())?;
    let eta = Distribution::<S>::uniform(p.len());
    let c = compare_relative_entropies(p, &eta, p_prime, &eta)?;
    Ok(Comparison {
        ordering: c.ordering.reverse(),
        exact: c.exact,
    })
}
