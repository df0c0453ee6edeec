//! Catalytic conversion of pairs `(p, q) → (p′, q′)` with a correlated catalyst.
//!
//! Three modes are supported:
//! * `exact`: `t′` has first marginal exactly `p′`; needs rational full-rank
//!   references with different relative spectra, `D(p‖q) > D(p′‖q′)` and
//!   `D_0(p‖q) ≥ D_0(p′‖q′)`.
//! * `approximate`: the first marginal `p′_ε` is within `ε` of `p′` in trace
//!   distance; needs full-rank references and `D(p‖q) ≥ D(p′‖q′)`.
//! * `unital`: `q = q′` uniform, where the condition becomes `H(p) ≤ H(p′)`.
//!
//! In every mode the reference side is converted exactly: `Λ(q⊗η) = q′⊗η`.

mod certificate;
mod search;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::distribution::{same_size, Distribution};
use crate::divergence::{
    compare_min_relative_entropies, compare_relative_entropies, compare_shannon_entropies,
    min_relative_entropy, relative_entropy, shannon_entropy, Comparison,
};
use crate::error::{Error, Result};
use crate::relmaj::DistPair;
use crate::scalar::Scalar;

pub use certificate::{
    converse_audit, verify_certificate, AuditLink, AuditReport, CertificateDoc, CheckResult,
    ConversionCertificate, PipelineInfo, VerificationReport,
};
pub use search::{
    assemble_pipeline, search_catalyst, SearchLog, SearchOptions, SearchOutcome, SearchStage,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approximate,
    Unital,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Approximate => "approximate",
            Mode::Unital => "unital",
        })
    }
}

/// Source pair, target pair and tolerances of a requested conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionInstance<S> {
    pub source: DistPair<S>,
    pub target: DistPair<S>,
    /// Bound on `D(t′‖p′_ε⊗r)`.
    pub gamma: f64,
    /// Trace-distance budget for `p′_ε`; required outside exact mode.
    pub epsilon: Option<f64>,
    pub mode: Mode,
}

impl<S: Scalar> ConversionInstance<S> {
    pub fn new(
        source: DistPair<S>,
        target: DistPair<S>,
        gamma: f64,
        epsilon: Option<f64>,
        mode: Mode,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        match (mode, epsilon) {
            (Mode::Exact, None) => {}
            (_, Some(e)) if e > 0.0 && e < 1.0 => {}
            (_, Some(e)) => return Err(Error::EpsilonOutOfRange(e)),
            (Mode::Approximate, None) => return Err(Error::EpsilonRequired("approximate")),
            (_, None) => return Err(Error::EpsilonRequired("unital")),
        }
        if mode == Mode::Unital {
            same_size("unital instance", source.len(), target.len())?;
            let uniform = Distribution::<S>::uniform(source.len());
            if !source.q.approx_eq(&uniform) || !target.q.approx_eq(&uniform) {
                return Err(Error::InvalidDistribution(
                    "unital mode needs uniform reference distributions".into(),
                ));
            }
        }
        Ok(Self {
            source,
            target,
            gamma,
            epsilon,
            mode,
        })
    }

    /// `p → p′` with both references uniform.
    pub fn unital(
        p: Distribution<S>,
        p_prime: Distribution<S>,
        gamma: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let (k, kp) = (p.len(), p_prime.len());
        Self::new(
            DistPair::new(p, Distribution::uniform(k))?,
            DistPair::new(p_prime, Distribution::uniform(kp))?,
            gamma,
            Some(epsilon),
            Mode::Unital,
        )
    }
}

/// Outcome of a condition checker, with the quantities it compared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub mode: Mode,
    pub verdict: bool,
    /// `D(p‖q)`, `D(p′‖q′)` (or `H(p)`, `H(p′)` in unital mode).
    pub source_value: f64,
    pub target_value: f64,
    /// `D_0(p‖q)` and `D_0(p′‖q′)`; reported in every mode, required only in exact mode.
    pub source_min: f64,
    pub target_min: f64,
    /// Whether the main comparison was decided in exact arithmetic.
    pub exact_comparison: bool,
    pub relative_spectra_differ: bool,
}

fn require_full_rank<S: Scalar>(inst: &ConversionInstance<S>) -> Result<()> {
    if !inst.source.q.is_full_rank() {
        return Err(Error::RankDeficient("q"));
    }
    if !inst.target.q.is_full_rank() {
        return Err(Error::RankDeficient("q'"));
    }
    Ok(())
}

fn base_report<S: Scalar>(inst: &ConversionInstance<S>, c: Comparison, verdict: bool) -> Result<ConditionReport> {
    Ok(ConditionReport {
        mode: inst.mode,
        verdict,
        source_value: relative_entropy(&inst.source.p, &inst.source.q)?,
        target_value: relative_entropy(&inst.target.p, &inst.target.q)?,
        source_min: min_relative_entropy(&inst.source.p, &inst.source.q)?,
        target_min: min_relative_entropy(&inst.target.p, &inst.target.q)?,
        exact_comparison: c.exact,
        relative_spectra_differ: !inst
            .source
            .relative_spectrum()
            .same_as(&inst.target.relative_spectrum()),
    })
}

/// `D(p‖q) > D(p′‖q′)` and `D_0(p‖q) ≥ D_0(p′‖q′)`, after checking that the
/// references are rational, full rank, and the relative spectra differ.
pub fn check_exact_conditions<S: Scalar>(inst: &ConversionInstance<S>) -> Result<ConditionReport> {
    if !S::is_exact() {
        return Err(Error::IrrationalReference("q"));
    }
    require_full_rank(inst)?;
    if inst
        .source
        .relative_spectrum()
        .same_as(&inst.target.relative_spectrum())
    {
        return Err(Error::EqualRelativeSpectra);
    }
    let d = compare_relative_entropies(&inst.source.p, &inst.source.q, &inst.target.p, &inst.target.q)?;
    let d0 = compare_min_relative_entropies(
        &inst.source.p,
        &inst.source.q,
        &inst.target.p,
        &inst.target.q,
    )?;
    let verdict = d.ordering == Ordering::Greater && d0.ordering != Ordering::Less;
    base_report(inst, d, verdict)
}

/// `D(p‖q) ≥ D(p′‖q′)` with full-rank references.
pub fn check_approximate_conditions<S: Scalar>(inst: &ConversionInstance<S>) -> Result<ConditionReport> {
    require_full_rank(inst)?;
    let d = compare_relative_entropies(&inst.source.p, &inst.source.q, &inst.target.p, &inst.target.q)?;
    base_report(inst, d, d.ordering != Ordering::Less)
}

/// `H(p) ≤ H(p′)` for `p` not a rearrangement of `p′`.
pub fn check_unital_conditions<S: Scalar>(p: &Distribution<S>, p_prime: &Distribution<S>) -> Result<ConditionReport> {
    same_size("check_unital_conditions", p.len(), p_prime.len())?;
    if p.is_permutation_of(p_prime) {
        return Err(Error::PermutationEquivalent);
    }
    let c = compare_shannon_entropies(p, p_prime)?;
    let eta = Distribution::<S>::uniform(p.len());
    Ok(ConditionReport {
        mode: Mode::Unital,
        verdict: c.ordering != Ordering::Greater,
        source_value: shannon_entropy(p),
        target_value: shannon_entropy(p_prime),
        source_min: min_relative_entropy(p, &eta)?,
        target_min: min_relative_entropy(p_prime, &eta)?,
        exact_comparison: c.exact,
        relative_spectra_differ: true,
    })
}

/// Dispatch on the instance mode.
pub fn check_conditions<S: Scalar>(inst: &ConversionInstance<S>) -> Result<ConditionReport> {
    match inst.mode {
        Mode::Exact => check_exact_conditions(inst),
        Mode::Approximate => check_approximate_conditions(inst),
        Mode::Unital => check_unital_conditions(&inst.source.p, &inst.target.p),
    }
}
