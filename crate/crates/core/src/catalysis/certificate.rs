//! Conversion certificates: the exact data, its JSON form, the verifier, and
//! the numerical audit of the converse chain.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::search::SearchLog;
use super::{ConversionInstance, Mode};
use crate::channel::StochasticChannel;
use crate::distribution::{trace_distance, Distribution, JointDistribution};
use crate::divergence::{relative_entropy, renyi_divergence, superadditivity_gap, Order};
use crate::error::{Error, Result};
use crate::json::{dist_to_json, joint_to_json, parse_values, ChannelDoc, InstanceDoc};
use crate::scalar::{exact_from_f64, Backend, Rational, Scalar, ScalarRepr, TOLERANCES};

pub const CERTIFICATE_FORMAT: &str = "catmaj-certificate/1";

/// How `Λ` was put together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineInfo {
    /// Mixing weight `δ` in `p″ = (1−δ)p′ + δq′`.
    pub delta: ScalarRepr,
    /// Accuracy handed to the rational approximations of `q` and `q′`.
    pub approximation_epsilon: Option<f64>,
    pub embedding_n: Option<usize>,
    pub d: Option<Vec<usize>>,
    pub d_prime: Option<Vec<usize>>,
    /// `E`, `E′*` are non-trivial (float references).
    pub approximation_channels: bool,
    pub phi1_materialized: bool,
    pub phi1_doubly_stochastic: Option<bool>,
}

/// Catalyst `r`, channel `Λ` and joint output `t′ = Λ(p⊗r)` for an instance,
/// all in exact arithmetic. Entries read from JSON are not validated here;
/// [`verify_certificate`] does that.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionCertificate {
    pub instance: ConversionInstance<Rational>,
    /// Backend of the instance the search was run on.
    pub source_backend: Backend,
    pub catalyst: Distribution<Rational>,
    pub eta: Distribution<Rational>,
    pub joint: JointDistribution<Rational>,
    pub channel: StochasticChannel<Rational>,
    pub p_prime_eps: Distribution<Rational>,
    pub achieved_gamma: f64,
    pub achieved_epsilon: f64,
    pub pipeline: PipelineInfo,
    pub search_log: SearchLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub format: String,
    pub instance: InstanceDoc,
    pub source_backend: Backend,
    pub catalyst: Vec<ScalarRepr>,
    pub eta: Vec<ScalarRepr>,
    pub joint: Vec<Vec<ScalarRepr>>,
    pub channel: ChannelDoc,
    pub p_prime_eps: Vec<ScalarRepr>,
    pub achieved_gamma: f64,
    pub achieved_epsilon: f64,
    pub pipeline: PipelineInfo,
    pub search_log: SearchLog,
}

fn raw_dist(values: &[ScalarRepr], what: &str) -> Result<Distribution<Rational>> {
    Ok(Distribution::new_unchecked(parse_values(values, what)?))
}

impl ConversionCertificate {
    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            format: CERTIFICATE_FORMAT.into(),
            instance: InstanceDoc::from_instance(&self.instance),
            source_backend: self.source_backend,
            catalyst: dist_to_json(&self.catalyst),
            eta: dist_to_json(&self.eta),
            joint: joint_to_json(&self.joint),
            channel: ChannelDoc::from_channel(&self.channel),
            p_prime_eps: dist_to_json(&self.p_prime_eps),
            achieved_gamma: self.achieved_gamma,
            achieved_epsilon: self.achieved_epsilon,
            pipeline: self.pipeline.clone(),
            search_log: self.search_log.clone(),
        }
    }

    /// Read a certificate. Only the shape is checked; the contents are left
    /// to the verifier so that a forged certificate fails checks instead of parsing.
    pub fn from_doc(doc: &CertificateDoc) -> Result<Self> {
        if doc.format != CERTIFICATE_FORMAT {
            return Err(Error::InvalidDistribution(format!(
                "unknown certificate format {:?}",
                doc.format
            )));
        }
        let instance = doc.instance.to_instance::<Rational>()?;
        let (out, inp, flat) = doc.channel.to_matrix::<Rational>()?;
        let rows = doc.joint.len();
        let cols = doc.joint.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || doc.joint.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("joint: empty or ragged".into()));
        }
        let flat_joint = doc
            .joint
            .iter()
            .enumerate()
            .map(|(i, r)| parse_values::<Rational>(r, &format!("joint[{i}]")))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(Self {
            instance,
            source_backend: doc.source_backend,
            catalyst: raw_dist(&doc.catalyst, "catalyst")?,
            eta: raw_dist(&doc.eta, "eta")?,
            joint: JointDistribution::from_flat(rows, cols, Distribution::new_unchecked(flat_joint))?,
            channel: StochasticChannel::from_flat_unchecked(out, inp, flat),
            p_prime_eps: raw_dist(&doc.p_prime_eps, "p_prime_eps")?,
            achieved_gamma: doc.achieved_gamma,
            achieved_epsilon: doc.achieved_epsilon,
            pipeline: doc.pipeline.clone(),
            search_log: doc.search_log.clone(),
        })
    }

    pub fn catalyst_dim(&self) -> usize {
        self.catalyst.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn is_exact_distribution(d: &Distribution<Rational>) -> bool {
    d.weights().iter().all(|w| !w.is_negative()) && d.weights().iter().sum::<Rational>() == Rational::from_integer(1.into())
}

fn mismatch_count(a: &[Rational], b: &[Rational]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

const CHECK_NAMES: [&str; 11] = [
    "instance",
    "catalyst",
    "channel_valid",
    "joint_output",
    "marginal_target",
    "marginal_catalyst",
    "q_side_exact",
    "correlation_bound",
    "target_distance",
    "unital",
    "reported_values",
];

/// Check a certificate against an instance. Every check is reported; the
/// report passes only if all of them do.
pub fn verify_certificate(instance: &ConversionInstance<Rational>, cert: &ConversionCertificate) -> VerificationReport {
    let mut c = Checks(Vec::new());
    let (k, kp, m) = (instance.source.len(), instance.target.len(), cert.catalyst.len());

    c.push(
        "instance",
        cert.instance == *instance,
        if cert.instance == *instance { "embedded instance matches" } else { "embedded instance differs" },
    );

    let shapes_ok = cert.channel.in_size() == k * m
        && cert.channel.out_size() == kp * m
        && cert.eta.len() == m
        && cert.joint.rows() == kp
        && cert.joint.cols() == m
        && cert.p_prime_eps.len() == kp;
    if !shapes_ok {
        for name in &CHECK_NAMES[1..] {
            c.push(
                name,
                false,
                format!(
                    "shapes inconsistent: channel {}x{}, catalyst {m}, eta {}, joint {}x{}, p_prime_eps {} for k={k}, k'={kp}",
                    cert.channel.out_size(),
                    cert.channel.in_size(),
                    cert.eta.len(),
                    cert.joint.rows(),
                    cert.joint.cols(),
                    cert.p_prime_eps.len()
                ),
            );
        }
        return finish(c);
    }

    let r_valid = is_exact_distribution(&cert.catalyst);
    let eta_expected = Distribution::<Rational>::uniform_on(&cert.catalyst.support_mask()).ok();
    let eta_ok = eta_expected.as_ref() == Some(&cert.eta);
    c.push(
        "catalyst",
        r_valid && eta_ok,
        match (r_valid, eta_ok) {
            (false, _) => "r is not a probability vector".to_string(),
            (true, false) => "eta is not uniform on the support of r".to_string(),
            _ => format!("r on {m} letters, eta uniform on {} of them", cert.catalyst.rank()),
        },
    );

    let channel_ok = cert.channel.validate().is_ok();
    c.push(
        "channel_valid",
        channel_ok,
        match cert.channel.validate() {
            Ok(()) => "entries nonnegative, columns sum to 1".to_string(),
            Err(e) => e.to_string(),
        },
    );

    let t_flat = cert.joint.flatten();
    let produced = cert
        .channel
        .apply_weights(instance.source.p.tensor(&cert.catalyst).weights())
        .unwrap_or_default();
    let bad = mismatch_count(&produced, t_flat.weights());
    c.push(
        "joint_output",
        bad == 0,
        format!("Λ(p⊗r) vs t′: {bad} differing entries"),
    );

    let (t_a, t_b) = cert.joint.marginals();
    let marg_ok = t_a == cert.p_prime_eps;
    let exact_ok = instance.mode != Mode::Exact || cert.p_prime_eps == instance.target.p;
    c.push(
        "marginal_target",
        marg_ok && exact_ok,
        match (marg_ok, exact_ok) {
            (false, _) => "first marginal of t′ differs from p′_ε",
            (true, false) => "exact mode needs p′_ε = p′",
            _ => "first marginal of t′ is p′_ε",
        },
    );

    c.push(
        "marginal_catalyst",
        t_b == cert.catalyst,
        if t_b == cert.catalyst { "catalyst returned unchanged" } else { "second marginal of t′ differs from r" },
    );

    let q_in = instance.source.q.tensor(&cert.eta);
    let q_out = instance.target.q.tensor(&cert.eta);
    let q_img = cert.channel.apply_weights(q_in.weights()).unwrap_or_default();
    let q_residual: Rational = q_img
        .iter()
        .zip(q_out.weights())
        .map(|(a, b)| (a - b).abs())
        .sum();
    c.push(
        "q_side_exact",
        q_residual.is_zero(),
        format!("Σ|Λ(q⊗η) − q′⊗η| = {}", q_residual),
    );

    let measurable = r_valid && is_exact_distribution(&t_flat) && is_exact_distribution(&cert.p_prime_eps);
    let achieved = if measurable {
        relative_entropy(&t_flat, &cert.p_prime_eps.tensor(&cert.catalyst)).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    c.push(
        "correlation_bound",
        achieved <= instance.gamma,
        format!("D(t′‖p′_ε⊗r) = {achieved:.12e}, gamma = {}", instance.gamma),
    );

    let distance = trace_distance(&instance.target.p, &cert.p_prime_eps).unwrap_or_else(|_| Rational::from_integer(1.into()));
    let (dist_ok, dist_detail) = match instance.epsilon {
        None => (distance.is_zero(), format!("½‖p′ − p′_ε‖₁ = {}", distance.to_f64())),
        Some(eps) => (
            distance <= exact_from_f64(eps),
            format!("½‖p′ − p′_ε‖₁ = {:.12e}, epsilon = {eps}", distance.to_f64()),
        ),
    };
    c.push("target_distance", dist_ok, dist_detail);

    if instance.mode == Mode::Unital && k == kp {
        let u = Distribution::<Rational>::uniform(k * m);
        let img = cert.channel.apply_weights(u.weights()).unwrap_or_default();
        let bad = mismatch_count(&img, u.weights());
        c.push("unital", bad == 0, format!("Λ(uniform) differs in {bad} entries"));
    } else {
        c.push("unital", true, "not applicable");
    }

    let reported_ok = (cert.achieved_gamma - achieved).abs() <= TOLERANCES.slack
        && (cert.achieved_epsilon - distance.to_f64()).abs() <= TOLERANCES.slack;
    c.push(
        "reported_values",
        reported_ok,
        format!(
            "reported gamma {:.12e}, epsilon {:.12e}",
            cert.achieved_gamma, cert.achieved_epsilon
        ),
    );
    finish(c)
}

fn finish(c: Checks) -> VerificationReport {
    VerificationReport {
        passed: c.0.iter().all(|x| x.passed),
        checks: c.0,
    }
}

/// One link of the converse chain at order `alpha`. `slack` is `lhs − rhs`
/// for inequalities and `−|lhs − rhs|` for identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLink {
    pub alpha: f64,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub passed: bool,
    pub links: Vec<AuditLink>,
    /// `D(p‖q) − D(p′_ε‖q′)`.
    pub total_slack: f64,
    /// Data-processing slack plus superadditivity slack at `α = 1`; equals `total_slack`.
    pub chain_sum: f64,
    /// `D(t′‖p′_ε⊗r)`, which the `α = 1` superadditivity slack must match.
    pub correlation: f64,
    /// `D(p′_ε‖q′) − D(p′‖q′)`, the cost of substituting `p′_ε` for `p′`.
    pub substitution: f64,
}

fn link(alpha: f64, name: &str, lhs: f64, rhs: f64, identity: bool) -> AuditLink {
    let diff = lhs - rhs;
    AuditLink {
        alpha,
        name: name.into(),
        lhs,
        rhs,
        slack: if identity { -diff.abs() } else { diff },
    }
}

/// Recompute the converse chain
/// `D_α(p‖q) + D_α(r‖η) = D_α(p⊗r‖q⊗η) ≥ D_α(t′‖q′⊗η) ≥ D_α(p′_ε‖q′) + D_α(r‖η)`
/// for `α ∈ {0, 1}` on the certificate data.
pub fn converse_audit(instance: &ConversionInstance<Rational>, cert: &ConversionCertificate) -> Result<AuditReport> {
    let (p, q) = (&instance.source.p, &instance.source.q);
    let (pp, qp) = (&instance.target.p, &instance.target.q);
    let (r, eta) = (&cert.catalyst, &cert.eta);
    let t = &cert.joint;
    let mut links = Vec::new();
    for alpha in [0.0, 1.0] {
        let order = Order::Finite(alpha);
        let d = |a: &Distribution<Rational>, b: &Distribution<Rational>| renyi_divergence(order, a, b);
        let d_pq = d(p, q)?;
        let d_r = d(r, eta)?;
        let d_joint_in = d(&p.tensor(r), &q.tensor(eta))?;
        let d_joint_out = d(&t.flatten(), &qp.tensor(eta))?;
        let d_target = d(&cert.p_prime_eps, qp)?;
        let (_, t_b) = t.marginals();
        links.push(link(alpha, "additivity", d_pq + d_r, d_joint_in, true));
        links.push(link(alpha, "data_processing", d_joint_in, d_joint_out, false));
        links.push(link(alpha, "superadditivity", d_joint_out, d_target + d(&t_b, eta)?, false));
        links.push(link(alpha, "catalyst_return", d(&t_b, eta)?, d_r, true));
    }
    let d1 = |a: &Distribution<Rational>, b: &Distribution<Rational>| relative_entropy(a, b);
    let total_slack = d1(p, q)? - d1(&cert.p_prime_eps, qp)?;
    let at_one = |name: &str| {
        links
            .iter()
            .find(|l| l.alpha == 1.0 && l.name == name)
            .map_or(f64::NAN, |l| l.slack)
    };
    let chain_sum = at_one("data_processing") + at_one("superadditivity");
    let correlation = superadditivity_gap(1.0, t, &cert.p_prime_eps, r)?;
    let direct = d1(&t.flatten(), &cert.p_prime_eps.tensor(r))?;
    let substitution = d1(&cert.p_prime_eps, qp)? - d1(pp, qp)?;
    let tol = TOLERANCES.slack;
    let passed = links.iter().all(|l| l.slack >= -tol)
        && (total_slack - chain_sum).abs() <= tol
        && (at_one("superadditivity") - direct).abs() <= tol
        && (correlation - direct).abs() <= tol;
    Ok(AuditReport {
        passed,
        links,
        total_slack,
        chain_sum,
        correlation: direct,
        substitution,
    })
}
