//! Bounded catalyst search.
//!
//! The conversion is first reduced to rational data `(a, q̃) → (b, q̃′)` on the
//! original alphabets (through `E` and `E′` when the references are floats).
//! For each catalyst `r` on a grid of resolution `1/(4m)` the search looks for
//! a channel `N` on `k·m` letters with `N(q̃⊗η) = q̃′⊗η` and `N(a⊗r)` having
//! marginals `b` and `r`, minimizing `D(N(a⊗r)‖b⊗r)` by Frank–Wolfe with the
//! exact simplex as linear oracle. The doubly stochastic `Φ₁` on `N·m` letters
//! is recovered from `N` by conjugating with the embedding.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{ConversionCertificate, PipelineInfo};
use super::{check_conditions, ConversionInstance, Mode};
use crate::channel::StochasticChannel;
use crate::channels::{rational_approximation_with_n, minimal_n, EmbeddingSpec};
use crate::distribution::{trace_distance, Distribution, JointDistribution};
use crate::divergence::relative_entropy;
use crate::error::{Error, Result};
use crate::relmaj::lp::{Constraint, LpError, LpProblem, Simplex};
use crate::relmaj::{blackwell_criterion, relmaj_problem, DistPair};
use crate::scalar::{common_denominator, exact_from_f64, rationalize, Backend, Rational, Scalar, ScalarRepr};

/// Frank–Wolfe gradient entries are clamped below at this value where `w_j = 0`.
const LOG_CLAMP: f64 = -50.0;
/// Gradient coefficients are rounded to rationals with at most this denominator.
const GRADIENT_DENOMINATOR: u64 = 1_000_000;
/// `Φ₁` is built explicitly only up to this many letters.
const PHI1_MAX_LETTERS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_catalyst_dim: usize,
    /// Total work allowance: simplex pivots plus Frank–Wolfe iterations.
    pub budget: u64,
    pub fw_iterations: usize,
    /// Worker threads for candidate evaluation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_catalyst_dim: 8,
            budget: 250_000,
            fw_iterations: 200,
            threads: None,
        }
    }
}

/// One pass of the search at a fixed mixing weight `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStage {
    pub delta: ScalarRepr,
    pub max_dim: usize,
    pub candidates: usize,
    pub cost: u64,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    /// `identity`, `direct`, `product`, `correlated`, or `none`.
    pub method: String,
    pub catalyst_dim: Option<usize>,
    pub budget: u64,
    pub budget_used: u64,
    pub fw_iterations: usize,
    pub objective: Option<f64>,
    pub stages: Vec<SearchStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconclusive_reason: Option<String>,
}

impl SearchLog {
    fn new(budget: u64) -> Self {
        Self {
            method: "none".into(),
            catalyst_dim: None,
            budget,
            budget_used: 0,
            fw_iterations: 0,
            objective: None,
            stages: Vec::new(),
            inconclusive_reason: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(Box<ConversionCertificate>),
    /// No catalyst within the grid and budget. This is not a proof that none exists.
    Inconclusive(SearchLog),
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&ConversionCertificate> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            SearchOutcome::Inconclusive(_) => None,
        }
    }
}

/// `Λ = (E′*⊗id)∘(Γ*_{d′}⊗id)∘Φ₁∘(Γ_d⊗id)∘(E⊗id)` with `id` on `m` letters.
pub fn assemble_pipeline<S: Scalar>(
    spec_d: &EmbeddingSpec,
    spec_d_prime: &EmbeddingSpec,
    e: &StochasticChannel<S>,
    e_rev_prime: &StochasticChannel<S>,
    phi1: &StochasticChannel<S>,
    m: usize,
) -> Result<StochasticChannel<S>> {
    if m == 0 {
        return Err(Error::InvalidDistribution("catalyst dimension must be positive".into()));
    }
    let id = StochasticChannel::<S>::identity(m);
    let factors = [
        e.tensor(&id),
        spec_d.embedding_channel::<S>().tensor(&id),
        phi1.clone(),
        spec_d_prime.unembedding_channel::<S>().tensor(&id),
        e_rev_prime.tensor(&id),
    ];
    for (i, pair) in factors.windows(2).enumerate() {
        if pair[0].out_size() != pair[1].in_size() {
            return Err(Error::Junction {
                index: i,
                detail: format!(
                    "factor {i} emits {} letters but factor {} takes {}",
                    pair[0].out_size(),
                    i + 1,
                    pair[1].in_size()
                ),
            });
        }
    }
    phi1.validate()?;
    if !phi1.is_doubly_stochastic() {
        return Err(Error::InvalidChannel("phi1 is not doubly stochastic".into()));
    }
    let mut lambda = factors[0].clone();
    for f in &factors[1..] {
        lambda = f.compose(&lambda)?;
    }
    Ok(lambda)
}

/// Rational data of one search pass.
struct Reduced {
    source: DistPair<Rational>,
    target: DistPair<Rational>,
    e: StochasticChannel<Rational>,
    r_prime: StochasticChannel<Rational>,
    spec_d: Option<EmbeddingSpec>,
    spec_d_prime: Option<EmbeddingSpec>,
    delta: Rational,
    approximation_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Direct,
    Product,
    Correlated,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Product => "product",
            Method::Correlated => "correlated",
        }
    }
}

struct Found {
    r: Distribution<Rational>,
    channel: StochasticChannel<Rational>,
    method: Method,
    fw_iterations: usize,
    objective: f64,
}

enum Verdict {
    Found(Box<Found>),
    Rejected,
    Exhausted,
}

struct Evaluation {
    cost: u64,
    verdict: Verdict,
}

/// Partitions of `4m` into `m` positive non-increasing parts, lexicographically ascending.
fn grid_parts(m: usize) -> Vec<Vec<usize>> {
    fn walk(left: usize, slots: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let lo = left.div_ceil(slots);
        let hi = cap.min(left - (slots - 1));
        for v in lo..=hi {
            cur.push(v);
            walk(left - v, slots - 1, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(4 * m, m, 4 * m, &mut Vec::with_capacity(m), &mut out);
    out
}

fn grid_catalyst(parts: &[usize]) -> Distribution<Rational> {
    let total: usize = parts.iter().sum();
    Distribution::new_unchecked(
        parts
            .iter()
            .map(|&v| Rational::new(BigInt::from(v), BigInt::from(total)))
            .collect(),
    )
}

fn lp_limit(limit: u64, spent: u64) -> usize {
    limit.saturating_sub(spent).min(usize::MAX as u64) as usize
}

fn evaluate(red: &Reduced, r: &Distribution<Rational>, limit: u64, fw_max: usize, gamma: f64) -> Evaluation {
    let m = r.len();
    let eta = Distribution::<Rational>::uniform(m);
    let src = red.source.tensor(r, &eta);
    let dst = red.target.tensor(r, &eta);
    let mut cost = 1u64;
    if blackwell_criterion(&src, &dst) {
        let mut lp = relmaj_problem(&src, &dst);
        lp.pivot_limit = Some(lp_limit(limit, cost));
        match Simplex::with_counter(&lp) {
            Ok((Some(s), pivots)) => {
                return Evaluation {
                    cost: cost + pivots as u64,
                    verdict: Verdict::Found(Box::new(Found {
                        r: r.clone(),
                        channel: StochasticChannel::from_flat_unchecked(dst.len(), src.len(), s.assignment()),
                        method: if m == 1 { Method::Direct } else { Method::Product },
                        fw_iterations: 0,
                        objective: 0.0,
                    })),
                }
            }
            Ok((None, pivots)) => cost += pivots as u64,
            Err(_) => return Evaluation { cost: limit.max(cost), verdict: Verdict::Exhausted },
        }
    }
    if m == 1 {
        return Evaluation { cost, verdict: Verdict::Rejected };
    }
    correlated(red, r, &src, &dst, cost, limit, fw_max, gamma)
}

#[allow(clippy::too_many_arguments)]
fn correlated(
    red: &Reduced,
    r: &Distribution<Rational>,
    src: &DistPair<Rational>,
    dst: &DistPair<Rational>,
    mut cost: u64,
    limit: u64,
    fw_max: usize,
    gamma: f64,
) -> Evaluation {
    let exhausted = |_: LpError| Evaluation { cost: limit, verdict: Verdict::Exhausted };
    let (n_in, n_out) = (src.len(), dst.len());
    let (kb, m) = (red.target.len(), r.len());
    let s = src.p.weights();
    let var = |j: usize, i: usize| j * n_in + i;

    let mut lp = LpProblem::new(n_in * n_out);
    for i in 0..n_in {
        lp.push(Constraint::eq((0..n_out).map(|j| (var(j, i), Rational::one())).collect(), Rational::one()));
    }
    for j in 0..n_out {
        lp.push(Constraint::eq(
            (0..n_in).map(|i| (var(j, i), src.q.weights()[i].clone())).collect(),
            dst.q.weights()[j].clone(),
        ));
    }
    let mass_terms = |rows: Vec<usize>| -> Vec<(usize, Rational)> {
        rows.into_iter()
            .flat_map(|j| {
                (0..n_in)
                    .filter(|&i| !s[i].is_zero())
                    .map(move |i| (var(j, i), s[i].clone()))
            })
            .collect()
    };
    for a in 0..kb {
        lp.push(Constraint::eq(mass_terms((0..m).map(|c| a * m + c).collect()), red.target.p.weights()[a].clone()));
    }
    for c in 0..m {
        lp.push(Constraint::eq(mass_terms((0..kb).map(|a| a * m + c).collect()), r.weights()[c].clone()));
    }
    lp.pivot_limit = Some(lp_limit(limit, cost));
    let mut simplex = match Simplex::with_counter(&lp) {
        Ok((Some(sx), _)) => sx,
        Ok((None, pivots)) => {
            return Evaluation { cost: cost + pivots as u64, verdict: Verdict::Rejected };
        }
        Err(e) => return exhausted(e),
    };

    let target: Vec<f64> = red.target.p.tensor(r).weights().iter().map(Scalar::to_f64).collect();
    let s_f: Vec<f64> = s.iter().map(Scalar::to_f64).collect();
    let mut x = simplex.assignment();
    let mut iterations = 0usize;
    let mut spent_fw = 0u64;
    let outcome = loop {
        let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
        let w: Vec<f64> = (0..n_out)
            .map(|j| (0..n_in).map(|i| xf[var(j, i)] * s_f[i]).sum())
            .collect();
        let f: f64 = w
            .iter()
            .zip(&target)
            .filter(|(wj, _)| **wj > 0.0)
            .map(|(wj, tj)| wj * (wj / tj).ln())
            .sum();
        if f < gamma - 1e-12 {
            break Some(f);
        }
        if iterations >= fw_max {
            break None;
        }
        let grad: Vec<f64> = (0..n_out * n_in)
            .map(|v| {
                let (j, i) = (v / n_in, v % n_in);
                if target[j] == 0.0 || s_f[i] == 0.0 {
                    0.0
                } else {
                    let l = if w[j] > 0.0 { (w[j] / target[j]).ln() } else { LOG_CLAMP };
                    s_f[i] * l.max(LOG_CLAMP)
                }
            })
            .collect();
        let cost_vec: Vec<Rational> = grad.iter().map(|g| rationalize(*g, GRADIENT_DENOMINATOR)).collect();
        simplex.set_pivot_limit(Some(lp_limit(limit, cost + spent_fw)));
        let vertex = match simplex.minimize(&cost_vec) {
            Ok(sol) => sol.assignment,
            Err(e) => return exhausted(e),
        };
        spent_fw += 1;
        iterations += 1;
        let gap: f64 = grad
            .iter()
            .zip(xf.iter().zip(&vertex))
            .map(|(g, (xv, vv))| g * (xv - vv.to_f64()))
            .sum();
        if gap < gamma / 10.0 {
            break None;
        }
        let step = Rational::new(BigInt::from(2), BigInt::from(iterations + 1));
        for (xv, vv) in x.iter_mut().zip(vertex) {
            if *xv != vv {
                *xv = &*xv + &step * (vv - &*xv);
            }
        }
    };
    cost += simplex.pivots() as u64 + spent_fw;
    if cost > limit {
        return Evaluation { cost, verdict: Verdict::Exhausted };
    }
    match outcome {
        Some(objective) => Evaluation {
            cost,
            verdict: Verdict::Found(Box::new(Found {
                r: r.clone(),
                channel: StochasticChannel::from_flat_unchecked(n_out, n_in, x),
                method: Method::Correlated,
                fw_iterations: iterations,
                objective,
            })),
        },
        None => Evaluation { cost, verdict: Verdict::Rejected },
    }
}

/// Walk the grid for `m = 1..=max_dim` in order; candidates of one chunk run in
/// parallel but are consumed sequentially, so the first success is the
/// lexicographically smallest and the outcome does not depend on the thread count.
fn run_stage(
    red: &Reduced,
    max_dim: usize,
    opts: &SearchOptions,
    gamma: f64,
    remaining: &mut u64,
) -> (Option<Found>, SearchStage) {
    let start = *remaining;
    let mut tried = 0usize;
    let chunk = rayon::current_num_threads().max(1);
    let stage = |outcome: &str, tried: usize, remaining: u64| SearchStage {
        delta: red.delta.to_repr(),
        max_dim,
        candidates: tried,
        cost: start - remaining,
        outcome: outcome.into(),
    };
    for m in 1..=max_dim {
        let grid = grid_parts(m);
        for block in grid.chunks(chunk) {
            let limit = *remaining;
            let results: Vec<Evaluation> = block
                .par_iter()
                .map(|parts| evaluate(red, &grid_catalyst(parts), limit, opts.fw_iterations, gamma))
                .collect();
            for ev in results {
                tried += 1;
                if ev.cost > *remaining || matches!(ev.verdict, Verdict::Exhausted) {
                    *remaining = 0;
                    return (None, stage("budget exhausted", tried, 0));
                }
                *remaining -= ev.cost;
                if let Verdict::Found(found) = ev.verdict {
                    return (Some(*found), stage("found", tried, *remaining));
                }
            }
        }
    }
    let rem = *remaining;
    (None, stage("grid exhausted", tried, rem))
}

fn lcm_embedding(q: &Distribution<Rational>, q_prime: &Distribution<Rational>) -> (Option<EmbeddingSpec>, Option<EmbeddingSpec>) {
    let n: BigInt = common_denominator(q.weights().iter().chain(q_prime.weights()));
    (
        EmbeddingSpec::from_rational(q, Some(&n)).ok(),
        EmbeddingSpec::from_rational(q_prime, Some(&n)).ok(),
    )
}

/// Reduction at mixing weight `δ`. `None` when the resulting `p′_ε` misses the
/// `ε` budget.
fn reduce(
    exact: &ConversionInstance<Rational>,
    backend: Backend,
    delta: &Rational,
) -> Result<Option<Reduced>> {
    let (p, q) = (&exact.source.p, &exact.source.q);
    let (pp, qp) = (&exact.target.p, &exact.target.q);
    let mixed = if delta.is_zero() {
        pp.clone()
    } else {
        pp.mix(qp, delta)?
    };
    let red = match (exact.mode, backend) {
        (Mode::Exact, _) | (_, Backend::Rational) => {
            let (spec_d, spec_d_prime) = lcm_embedding(q, qp);
            Reduced {
                source: exact.source.clone(),
                target: DistPair::new(mixed, qp.clone())?,
                e: StochasticChannel::identity(p.len()),
                r_prime: StochasticChannel::identity(pp.len()),
                spec_d,
                spec_d_prime,
                delta: delta.clone(),
                approximation_epsilon: None,
            }
        }
        (_, Backend::Float) => {
            let eps = exact.epsilon.expect("validated instance");
            let eps_src = p.len() as f64 * (eps / 6.0).powi(2);
            let eps_dst = pp.len() as f64 * (eps / 6.0).powi(2);
            let n = minimal_n(q, eps_src)?.max(minimal_n(qp, eps_dst)?);
            let approx = rational_approximation_with_n(q, eps_src, n)?;
            let approx_p = rational_approximation_with_n(qp, eps_dst, n)?;
            Reduced {
                source: DistPair::new(approx.e.apply(p)?, approx.q_tilde.clone())?,
                target: DistPair::new(approx_p.e.apply(&mixed)?, approx_p.q_tilde.clone())?,
                e: approx.e,
                r_prime: approx_p.r,
                spec_d: Some(approx.spec),
                spec_d_prime: Some(approx_p.spec),
                delta: delta.clone(),
                approximation_epsilon: Some(eps_src.max(eps_dst)),
            }
        }
    };
    if let Some(eps) = exact.epsilon {
        let landed = red.r_prime.apply(&red.target.p)?;
        if trace_distance(pp, &landed)? > exact_from_f64(eps) {
            return Ok(None);
        }
    }
    Ok(Some(red))
}

/// `min(ε/3, 1/100)`, with `ε/3` rounded down to a multiple of `10⁻⁶`.
fn initial_delta(eps: f64) -> Rational {
    let micro = (eps / 3.0 * 1e6).floor().max(1.0) as i64;
    let third = Rational::new(BigInt::from(micro), BigInt::from(1_000_000));
    third.min(Rational::new(BigInt::one(), BigInt::from(100)))
}

fn identity_certificate(
    exact: &ConversionInstance<Rational>,
    backend: Backend,
    log: SearchLog,
) -> Result<ConversionCertificate> {
    let k = exact.source.len();
    let one = Distribution::<Rational>::uniform(1);
    let (spec_d, spec_d_prime) = lcm_embedding(&exact.source.q, &exact.target.q);
    Ok(ConversionCertificate {
        instance: exact.clone(),
        source_backend: backend,
        catalyst: one.clone(),
        eta: one.clone(),
        joint: JointDistribution::product(&exact.target.p, &one),
        channel: StochasticChannel::identity(k),
        p_prime_eps: exact.target.p.clone(),
        achieved_gamma: 0.0,
        achieved_epsilon: 0.0,
        pipeline: PipelineInfo {
            delta: Rational::zero().to_repr(),
            approximation_epsilon: None,
            embedding_n: spec_d.as_ref().map(EmbeddingSpec::n),
            d: spec_d.map(|s| s.d().to_vec()),
            d_prime: spec_d_prime.map(|s| s.d().to_vec()),
            approximation_channels: false,
            phi1_materialized: false,
            phi1_doubly_stochastic: None,
        },
        search_log: log,
    })
}

fn build_certificate(
    exact: &ConversionInstance<Rational>,
    backend: Backend,
    red: &Reduced,
    found: Found,
    log: SearchLog,
) -> Result<ConversionCertificate> {
    let m = found.r.len();
    let id = StochasticChannel::<Rational>::identity(m);
    let lambda = red
        .r_prime
        .tensor(&id)
        .compose(&found.channel.compose(&red.e.tensor(&id))?)?;

    let mut phi1_doubly_stochastic = None;
    if let (Some(sd), Some(sdp)) = (&red.spec_d, &red.spec_d_prime) {
        if sd.n() == sdp.n() && sd.n() * m <= PHI1_MAX_LETTERS {
            let phi1 = sdp
                .embedding_channel::<Rational>()
                .tensor(&id)
                .compose(&found.channel.compose(&sd.unembedding_channel::<Rational>().tensor(&id))?)?;
            phi1_doubly_stochastic = Some(phi1.is_doubly_stochastic());
            let assembled = assemble_pipeline(sd, sdp, &red.e, &red.r_prime, &phi1, m)?;
            if assembled != lambda {
                return Err(Error::InvalidChannel("assembled pipeline disagrees with the coarse channel".into()));
            }
        }
    }

    let eta = Distribution::<Rational>::uniform_on(&found.r.support_mask())?;
    let t = lambda.apply(&exact.source.p.tensor(&found.r))?;
    let joint = JointDistribution::from_flat(exact.target.len(), m, t)?;
    let (p_eps, _) = joint.marginals();
    let achieved_gamma = relative_entropy(&joint.flatten(), &p_eps.tensor(&found.r))?;
    let achieved_epsilon = trace_distance(&exact.target.p, &p_eps)?.to_f64();
    Ok(ConversionCertificate {
        instance: exact.clone(),
        source_backend: backend,
        catalyst: found.r,
        eta,
        joint,
        channel: lambda,
        p_prime_eps: p_eps,
        achieved_gamma,
        achieved_epsilon,
        pipeline: PipelineInfo {
            delta: red.delta.to_repr(),
            approximation_epsilon: red.approximation_epsilon,
            embedding_n: red.spec_d.as_ref().map(EmbeddingSpec::n),
            d: red.spec_d.as_ref().map(|s| s.d().to_vec()),
            d_prime: red.spec_d_prime.as_ref().map(|s| s.d().to_vec()),
            approximation_channels: red.approximation_epsilon.is_some(),
            phi1_materialized: phi1_doubly_stochastic.is_some(),
            phi1_doubly_stochastic,
        },
        search_log: log,
    })
}

/// Search for a catalyst and channel realizing the conversion.
///
/// Identity conversions get the trivial certificate without consulting the
/// condition checker. Otherwise the checker for the instance mode must hold,
/// or [`Error::ConditionFalse`] is returned without searching.
pub fn search_catalyst<S: Scalar>(inst: &ConversionInstance<S>, opts: &SearchOptions) -> Result<SearchOutcome> {
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidDistribution(format!("thread pool: {e}")))?;
            pool.install(|| search_inner(inst, opts))
        }
        None => search_inner(inst, opts),
    }
}

fn search_inner<S: Scalar>(inst: &ConversionInstance<S>, opts: &SearchOptions) -> Result<SearchOutcome> {
    let exact = ConversionInstance::new(
        inst.source.to_rational(),
        inst.target.to_rational(),
        inst.gamma,
        inst.epsilon,
        inst.mode,
    )?;
    let mut log = SearchLog::new(opts.budget);
    if exact.source == exact.target {
        log.method = "identity".into();
        log.catalyst_dim = Some(1);
        log.objective = Some(0.0);
        return Ok(SearchOutcome::Found(Box::new(identity_certificate(&exact, S::BACKEND, log)?)));
    }
    let report = check_conditions(inst)?;
    if !report.verdict {
        return Err(Error::ConditionFalse(format!(
            "{} conditions fail: {:.6} vs {:.6}",
            inst.mode, report.source_value, report.target_value
        )));
    }

    let zero = Rational::zero();
    let mut attempts: Vec<(Rational, usize)> = vec![(zero.clone(), opts.max_catalyst_dim)];
    if let Some(eps) = exact.epsilon {
        attempts = vec![(zero, 1)];
        let mut delta = initial_delta(eps);
        for _ in 0..=10 {
            attempts.push((delta.clone(), opts.max_catalyst_dim));
            delta /= Rational::from_integer(BigInt::from(2));
        }
    }

    let mut remaining = opts.budget;
    let mut tried_mixing = false;
    for (delta, max_dim) in attempts {
        let is_mixing = !delta.is_zero();
        if is_mixing && tried_mixing {
            // Smaller δ only matters when the previous one missed the ε budget.
            break;
        }
        let Some(red) = reduce(&exact, S::BACKEND, &delta)? else {
            log.stages.push(SearchStage {
                delta: delta.to_repr(),
                max_dim,
                candidates: 0,
                cost: 0,
                outcome: "epsilon budget missed".into(),
            });
            continue;
        };
        tried_mixing |= is_mixing;
        let (found, stage) = run_stage(&red, max_dim, opts, exact.gamma, &mut remaining);
        let out_of_budget = stage.outcome == "budget exhausted";
        log.stages.push(stage);
        log.budget_used = opts.budget - remaining;
        if let Some(found) = found {
            log.method = found.method.name().into();
            log.catalyst_dim = Some(found.r.len());
            log.fw_iterations = found.fw_iterations;
            log.objective = Some(found.objective);
            return Ok(SearchOutcome::Found(Box::new(build_certificate(&exact, S::BACKEND, &red, found, log)?)));
        }
        if out_of_budget {
            log.inconclusive_reason = Some("budget exhausted".into());
            return Ok(SearchOutcome::Inconclusive(log));
        }
    }
    log.inconclusive_reason = Some("no grid catalyst passed".into());
    Ok(SearchOutcome::Inconclusive(log))
}
