#![allow(dead_code)]

use catmaj::scalar::Rational;
use catmaj::{Distribution, StochasticChannel};
use num_bigint::BigInt;
use proptest::prelude::*;

pub fn rat_from_counts(counts: &[u32]) -> Distribution<Rational> {
    let total: u32 = counts.iter().sum();
    Distribution::new(
        counts
            .iter()
            .map(|&c| Rational::new(BigInt::from(c), BigInt::from(total)))
            .collect(),
    )
    .unwrap()
}

/// Rational distribution on `k` letters; zeros allowed unless `full`.
pub fn rational_dist(k: usize, full: bool) -> impl Strategy<Value = Distribution<Rational>> {
    let lo = if full { 1u32 } else { 0 };
    prop::collection::vec(lo..12u32, k)
        .prop_filter("nonzero mass", |v| v.iter().any(|&c| c > 0))
        .prop_map(|v| rat_from_counts(&v))
}

pub fn float_dist(k: usize, full: bool) -> impl Strategy<Value = Distribution<f64>> {
    let lo = if full { 0.05f64 } else { 0.0 };
    prop::collection::vec(lo..1.0f64, k)
        .prop_filter("nonzero mass", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            Distribution::new(v.into_iter().map(|x| x / s).collect()).unwrap()
        })
}

pub fn float_channel(n_out: usize, n_in: usize) -> impl Strategy<Value = StochasticChannel<f64>> {
    prop::collection::vec(float_dist(n_out, false), n_in).prop_map(move |cols| {
        let rows = (0..n_out)
            .map(|j| cols.iter().map(|c| c.weights()[j]).collect())
            .collect();
        StochasticChannel::new(rows).unwrap()
    })
}

pub fn rational_channel(n_out: usize, n_in: usize) -> impl Strategy<Value = StochasticChannel<Rational>> {
    prop::collection::vec(rational_dist(n_out, false), n_in).prop_map(move |cols| {
        let rows = (0..n_out)
            .map(|j| cols.iter().map(|c| c.weights()[j].clone()).collect())
            .collect();
        StochasticChannel::new(rows).unwrap()
    })
}

/// Rényi divergence straight from the definition, for finite `α ∉ {0, 1}`.
pub fn naive_renyi(alpha: f64, p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 && qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            if alpha < 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        if qi == 0.0 {
            if alpha > 1.0 {
                return f64::INFINITY;
            }
            continue;
        }
        s += pi.powf(alpha) * qi.powf(1.0 - alpha);
    }
    alpha.signum() / (alpha - 1.0) * s.ln()
}

pub fn naive_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| if *qi == 0.0 { f64::INFINITY } else { pi * (pi / qi).ln() })
        .sum()
}
