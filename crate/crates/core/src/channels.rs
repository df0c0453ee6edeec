//! Named channel constructions: the embedding `Γ_d` and its left inverse
//! `Γ*_d`, the rational-approximation channel `E` with its reversal `R`,
//! Bayes reversal in general, and block splitting of channels.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::StochasticChannel;
use crate::distribution::{same_size, trace_distance, Distribution};
use crate::error::{Error, Result};
use crate::scalar::{ceil_integer, common_denominator, exact_from_f64, Rational, Scalar};

/// Block sizes `d` of an embedding, with `N = Σ d_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    d: Vec<usize>,
    #[serde(rename = "N")]
    n: usize,
}

impl EmbeddingSpec {
    pub fn new(d: Vec<usize>) -> Result<Self> {
        if d.is_empty() || d.contains(&0) {
            return Err(Error::InvalidDistribution(
                "embedding blocks must be positive integers".into(),
            ));
        }
        let n = d.iter().sum();
        Ok(Self { d, n })
    }

    /// Blocks `d_i = q_i · N` of a rational distribution, with `N` the least
    /// common denominator (or a given multiple of it).
    pub fn from_rational(q: &Distribution<Rational>, n: Option<&BigInt>) -> Result<Self> {
        let lcd = common_denominator(q.weights());
        let n = n.cloned().unwrap_or(lcd.clone());
        if (&n % &lcd) != BigInt::zero() {
            return Err(Error::InvalidDistribution(format!(
                "{n} is not a multiple of the common denominator {lcd}"
            )));
        }
        let d = q
            .weights()
            .iter()
            .map(|w| {
                (w * Rational::from_integer(n.clone()))
                    .to_integer()
                    .to_usize()
                    .ok_or_else(|| Error::InvalidDistribution("embedding too large".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d)
    }

    /// Check that `N` equals the block total (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        let fresh = Self::new(self.d.clone())?;
        same_size("embedding total", fresh.n, self.n)
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.d.len()
    }

    /// `γ_d = (d_1/N, …, d_k/N)`.
    pub fn gamma(&self) -> Distribution<Rational> {
        Distribution::new_unchecked(
            self.d
                .iter()
                .map(|&di| Rational::from_ratio(di as i64, self.n as i64))
                .collect(),
        )
    }

    fn block_starts(&self) -> Vec<usize> {
        self.d
            .iter()
            .scan(0, |acc, &di| {
                let start = *acc;
                *acc += di;
                Some(start)
            })
            .collect()
    }

    /// `Γ_d`: letter `i` is spread uniformly over its `d_i` sub-letters.
    pub fn embedding_channel<S: Scalar>(&self) -> StochasticChannel<S> {
        let k = self.k();
        let mut entries = vec![S::zero(); self.n * k];
        for (i, (&start, &di)) in self.block_starts().iter().zip(&self.d).enumerate() {
            let w = S::one() / S::from_usize(di);
            for j in start..start + di {
                entries[j * k + i] = w.clone();
            }
        }
        StochasticChannel::from_flat_unchecked(self.n, k, entries)
    }

    /// `Γ*_d`: sum each block back into a single letter.
    pub fn unembedding_channel<S: Scalar>(&self) -> StochasticChannel<S> {
        let k = self.k();
        let mut entries = vec![S::zero(); k * self.n];
        for (i, (&start, &di)) in self.block_starts().iter().zip(&self.d).enumerate() {
            for j in start..start + di {
                entries[i * self.n + j] = S::one();
            }
        }
        StochasticChannel::from_flat_unchecked(k, self.n, entries)
    }
}

/// `Γ_d(p) = ⊕_i p_i η_{d_i}`.
pub fn embed<S: Scalar>(spec: &EmbeddingSpec, p: &Distribution<S>) -> Result<Distribution<S>> {
    same_size("embed", spec.k(), p.len())?;
    let mut out = Vec::with_capacity(spec.n);
    for (w, &di) in p.weights().iter().zip(&spec.d) {
        let part = w.clone() / S::from_usize(di);
        out.extend(std::iter::repeat_n(part, di));
    }
    Ok(Distribution::new_unchecked(out))
}

/// `Γ*_d(x)`: block sums.
pub fn unembed<S: Scalar>(spec: &EmbeddingSpec, x: &Distribution<S>) -> Result<Distribution<S>> {
    same_size("unembed", spec.n, x.len())?;
    let mut out = Vec::with_capacity(spec.k());
    let mut rest = x.weights();
    for &di in &spec.d {
        let (block, tail) = rest.split_at(di);
        out.push(block.iter().fold(S::zero(), |acc, v| acc + v.clone()));
        rest = tail;
    }
    Ok(Distribution::new_unchecked(out))
}

/// Bayes reversal of `channel` with respect to `prior`:
/// `R(x|y) = channel(y|x) prior(x) / (channel prior)(y)`.
///
/// Output letters of zero mass get a uniform column.
pub fn reversal<S: Scalar>(channel: &StochasticChannel<S>, prior: &Distribution<S>) -> Result<StochasticChannel<S>> {
    let image = channel.apply(prior)?;
    let (n_in, n_out) = (channel.in_size(), channel.out_size());
    let uniform = S::one() / S::from_usize(n_in);
    let mut entries = vec![S::zero(); n_in * n_out];
    for y in 0..n_out {
        let mass = &image.weights()[y];
        for x in 0..n_in {
            entries[x * n_out + y] = if mass.is_zero() {
                uniform.clone()
            } else {
                channel.get(y, x).clone() * prior.weights()[x].clone() / mass.clone()
            };
        }
    }
    Ok(StochasticChannel::from_flat_unchecked(n_in, n_out, entries))
}

/// Rational stand-in `q̃` for a full-rank `q`, with channels `E(q) = q̃` and
/// `R(q̃) = q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximation {
    /// Exact value of the input (float weights are read bit-exactly and renormalized).
    pub q: Distribution<Rational>,
    pub q_tilde: Distribution<Rational>,
    pub spec: EmbeddingSpec,
    pub e: StochasticChannel<Rational>,
    pub r: StochasticChannel<Rational>,
    pub epsilon: f64,
    /// `true` when the input was already rational and `E = R = id`.
    pub trivial: bool,
}

impl RationalApproximation {
    pub fn n(&self) -> usize {
        self.spec.n()
    }
}

fn check_approximation_inputs<S: Scalar>(q: &Distribution<S>, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !q.is_full_rank() {
        return Err(Error::RankDeficient("q"));
    }
    Ok(())
}

/// Smallest integer `N ≥ max{((k+1)/q_min)², k/ε, 4}`.
pub fn minimal_n<S: Scalar>(q: &Distribution<S>, epsilon: f64) -> Result<usize> {
    check_approximation_inputs(q, epsilon)?;
    let exact = q.to_rational();
    let k = exact.len();
    let q_min = exact
        .weights()
        .iter()
        .min()
        .cloned()
        .expect("nonempty distribution");
    let k1 = Rational::from_integer(BigInt::from(k + 1));
    let a = ceil_integer(&((&k1 / &q_min) * (&k1 / &q_min)));
    let b = ceil_integer(&(Rational::from_integer(BigInt::from(k)) / exact_from_f64(epsilon)));
    let n = a.max(b).max(BigInt::from(4));
    n.to_usize()
        .ok_or_else(|| Error::InvalidDistribution("approximation size overflows".into()))
}

/// Rational approximation with the smallest admissible `N`.
///
/// On the rational backend the input is already rational and the channels are
/// identities. Float inputs go through the ceiling construction.
pub fn rational_approximation<S: Scalar>(q: &Distribution<S>, epsilon: f64) -> Result<RationalApproximation> {
    check_approximation_inputs(q, epsilon)?;
    if S::is_exact() {
        let exact = q.to_rational();
        let k = exact.len();
        return Ok(RationalApproximation {
            spec: EmbeddingSpec::from_rational(&exact, None)?,
            q_tilde: exact.clone(),
            q: exact,
            e: StochasticChannel::identity(k),
            r: StochasticChannel::identity(k),
            epsilon,
            trivial: true,
        });
    }
    let n = minimal_n(q, epsilon)?;
    rational_approximation_with_n(q, epsilon, n)
}

/// Ceiling construction with a caller-chosen `N` (at least [`minimal_n`]), so
/// that two distributions can share one embedding size.
pub fn rational_approximation_with_n<S: Scalar>(
    q: &Distribution<S>,
    epsilon: f64,
    n: usize,
) -> Result<RationalApproximation> {
    let min = minimal_n(q, epsilon)?;
    if n < min {
        return Err(Error::InvalidDistribution(format!(
            "N = {n} is below the admissible minimum {min}"
        )));
    }
    let exact = q.to_rational();
    let k = exact.len();
    let (sorted, order) = exact.sorted_desc();
    let big_n = Rational::from_integer(BigInt::from(n));

    // d_i = ceil(q_i N) for the first k-1 sorted letters, the last takes the rest.
    let mut d = Vec::with_capacity(k);
    for w in &sorted[..k - 1] {
        let di = ceil_integer(&(w * &big_n))
            .to_usize()
            .expect("block bounded by N");
        d.push(di);
    }
    let head: usize = d.iter().sum();
    if head >= n {
        return Err(Error::InvalidDistribution(
            "approximation leaves no mass for the smallest letter".into(),
        ));
    }
    d.push(n - head);

    let q_tilde_sorted: Vec<Rational> = d
        .iter()
        .map(|&di| Rational::from_ratio(di as i64, n as i64))
        .collect();
    let deltas: Vec<Rational> = (0..k - 1)
        .map(|i| &q_tilde_sorted[i] - &sorted[i])
        .collect();
    let total_delta: Rational = deltas.iter().cloned().sum();
    let q_k = &sorted[k - 1];

    // E in sorted coordinates: identity on the first k-1 letters, the last
    // letter leaks Δ_j / q_k onto letter j.
    let last = k - 1;
    let mut e_sorted = vec![Rational::zero(); k * k];
    for i in 0..last {
        e_sorted[i * k + i] = Rational::one();
    }
    for (j, dj) in deltas.iter().enumerate() {
        e_sorted[j * k + last] = dj / q_k;
    }
    e_sorted[last * k + last] = Rational::one() - &total_delta / q_k;

    // Undo the sort: original letter order[a] sits at sorted position a.
    let mut e = vec![Rational::zero(); k * k];
    for a in 0..k {
        for b in 0..k {
            e[order[a] * k + order[b]] = e_sorted[a * k + b].clone();
        }
    }
    let e = StochasticChannel::from_flat_unchecked(k, k, e);
    let mut q_tilde = vec![Rational::zero(); k];
    let mut d_orig = vec![0usize; k];
    for a in 0..k {
        q_tilde[order[a]] = q_tilde_sorted[a].clone();
        d_orig[order[a]] = d[a];
    }
    let q_tilde = Distribution::new_unchecked(q_tilde);
    let r = reversal(&e, &exact)?;
    Ok(RationalApproximation {
        q: exact,
        q_tilde,
        spec: EmbeddingSpec::new(d_orig)?,
        e,
        r,
        epsilon,
        trivial: false,
    })
}

/// Exact check of the guarantees of a rational approximation for one test
/// distribution `p`: `½‖q−q̃‖ ≤ ε`, `½‖p−E p‖ ≤ √(ε/k)`, `½‖p−R p‖ ≤ 2√(ε/k)`,
/// `E q = q̃` and `R q̃ = q`. Square roots are avoided by comparing squares.
pub fn approximation_bounds_hold(approx: &RationalApproximation, p: &Distribution<Rational>) -> Result<bool> {
    let k = Rational::from_integer(BigInt::from(approx.q.len()));
    let eps = exact_from_f64(approx.epsilon);
    let tv_q = trace_distance(&approx.q, &approx.q_tilde)?;
    let tv_e = trace_distance(p, &approx.e.apply(p)?)?;
    let tv_r = trace_distance(p, &approx.r.apply(p)?)?;
    let bound = &eps / &k;
    let four = Rational::from_integer(BigInt::from(4));
    Ok(tv_q <= eps
        && &tv_e * &tv_e <= bound
        && &tv_r * &tv_r <= &four * &bound
        && approx.e.apply(&approx.q)? == approx.q_tilde
        && approx.r.apply(&approx.q_tilde)? == approx.q)
}

/// Split a channel that fixes a full-rank `w` and maps `u` (supported exactly
/// on its first `ℓ` letters) to `u′` (supported within them) into `Λ₁ ⊕ Λ₂`.
pub fn split_channel<S: Scalar>(
    channel: &StochasticChannel<S>,
    u: &Distribution<S>,
    u_prime: &Distribution<S>,
    w: &Distribution<S>,
) -> Result<(StochasticChannel<S>, StochasticChannel<S>)> {
    let n = channel.in_size();
    if channel.out_size() != n {
        return Err(Error::SplitHypothesis("channel is not square".into()));
    }
    same_size("split_channel u", n, u.len())?;
    same_size("split_channel u'", n, u_prime.len())?;
    same_size("split_channel w", n, w.len())?;
    let support = u.support_mask();
    let ell = support.iter().take_while(|s| **s).count();
    if ell == 0 || support[ell..].iter().any(|s| *s) {
        return Err(Error::SplitHypothesis(
            "u must be positive on a leading block of letters and zero elsewhere".into(),
        ));
    }
    if u_prime.support_mask()[ell..].iter().any(|s| *s) {
        return Err(Error::SplitHypothesis(format!(
            "u' has mass outside the first {ell} letters"
        )));
    }
    if !w.is_full_rank() {
        return Err(Error::SplitHypothesis("w is not full rank".into()));
    }
    for j in 0..n {
        for i in 0..n {
            let off_block = (j < ell) != (i < ell);
            let e = channel.get(j, i);
            if off_block && !e.is_negligible() {
                return Err(Error::Structure {
                    row: j,
                    col: i,
                    value: e.to_string(),
                });
            }
        }
    }
    if !channel.apply(w)?.approx_eq(w) {
        return Err(Error::SplitHypothesis("channel does not fix w".into()));
    }
    if !channel.apply(u)?.approx_eq(u_prime) {
        return Err(Error::SplitHypothesis("channel does not map u to u'".into()));
    }
    Ok((channel.block(0..ell, 0..ell), channel.block(ell..n, ell..n)))
}
