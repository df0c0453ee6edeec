//! JSON shapes shared by the library and the command-line tool.
//!
//! Rationals travel as `"num/den"` strings and floats as numbers. Channels are
//! row-major nested arrays tagged with `"orientation": "output-major"`.

use serde::{Deserialize, Serialize};

use crate::catalysis::{ConversionInstance, Mode};
use crate::channel::StochasticChannel;
use crate::distribution::{Distribution, JointDistribution};
use crate::error::{Error, Result};
use crate::relmaj::DistPair;
use crate::scalar::{Backend, Rational, Scalar, ScalarRepr};

pub const OUTPUT_MAJOR: &str = "output-major";

pub fn dist_to_json<S: Scalar>(d: &Distribution<S>) -> Vec<ScalarRepr> {
    d.weights().iter().map(Scalar::to_repr).collect()
}

pub(crate) fn parse_values<S: Scalar>(values: &[ScalarRepr], what: &str) -> Result<Vec<S>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            S::from_repr(v).map_err(|e| Error::InvalidDistribution(format!("{what}[{i}]: {e}")))
        })
        .collect()
}

pub fn dist_from_json<S: Scalar>(values: &[ScalarRepr], what: &str) -> Result<Distribution<S>> {
    Distribution::new(parse_values(values, what)?)
        .map_err(|e| Error::InvalidDistribution(format!("{what}: {e}")))
}

pub fn joint_to_json<S: Scalar>(t: &JointDistribution<S>) -> Vec<Vec<ScalarRepr>> {
    t.to_rows()
        .iter()
        .map(|row| row.iter().map(Scalar::to_repr).collect())
        .collect()
}

pub fn joint_from_json<S: Scalar>(rows: &[Vec<ScalarRepr>], what: &str) -> Result<JointDistribution<S>> {
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_values(r, &format!("{what}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    JointDistribution::from_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub orientation: String,
    pub entries: Vec<Vec<ScalarRepr>>,
}

impl ChannelDoc {
    pub fn from_channel<S: Scalar>(c: &StochasticChannel<S>) -> Self {
        Self {
            orientation: OUTPUT_MAJOR.into(),
            entries: c
                .to_rows()
                .iter()
                .map(|row| row.iter().map(Scalar::to_repr).collect())
                .collect(),
        }
    }

    /// Parse without validating stochasticity, so that a verifier can report
    /// a malformed channel as a failed check rather than a parse error.
    pub fn to_matrix<S: Scalar>(&self) -> Result<(usize, usize, Vec<S>)> {
        if self.orientation != OUTPUT_MAJOR {
            return Err(Error::InvalidChannel(format!(
                "unsupported orientation {:?}",
                self.orientation
            )));
        }
        let out = self.entries.len();
        let inp = self.entries.first().map_or(0, Vec::len);
        if out == 0 || inp == 0 || self.entries.iter().any(|r| r.len() != inp) {
            return Err(Error::InvalidChannel("empty or ragged matrix".into()));
        }
        let mut flat = Vec::with_capacity(out * inp);
        for (j, row) in self.entries.iter().enumerate() {
            flat.extend(
                parse_values::<S>(row, &format!("channel[{j}]"))
                    .map_err(|e| Error::InvalidChannel(e.to_string()))?,
            );
        }
        Ok((out, inp, flat))
    }

    pub fn to_channel<S: Scalar>(&self) -> Result<StochasticChannel<S>> {
        let (out, inp, flat) = self.to_matrix()?;
        StochasticChannel::from_flat(out, inp, flat)
    }
}

/// Conversion instance as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub p: Vec<ScalarRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<ScalarRepr>>,
    pub p_prime: Vec<ScalarRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<Vec<ScalarRepr>>,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
}

impl InstanceDoc {
    /// Declared backend, or rational when every weight is a string.
    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or_else(|| {
            let all_text = [Some(&self.p), self.q.as_ref(), Some(&self.p_prime), self.q_prime.as_ref()]
                .into_iter()
                .flatten()
                .flatten()
                .all(|v| matches!(v, ScalarRepr::Text(_)));
            if all_text {
                Backend::Rational
            } else {
                Backend::Float
            }
        })
    }

    /// Build the instance. Unital mode fills in uniform references when
    /// `q`/`q_prime` are absent.
    pub fn to_instance<S: Scalar>(&self) -> Result<ConversionInstance<S>> {
        let p: Distribution<S> = dist_from_json(&self.p, "p")?;
        let pp: Distribution<S> = dist_from_json(&self.p_prime, "p_prime")?;
        let reference = |v: &Option<Vec<ScalarRepr>>, what: &str, k: usize| -> Result<Distribution<S>> {
            match (v, self.mode) {
                (Some(v), _) => dist_from_json(v, what),
                (None, Mode::Unital) => Ok(Distribution::uniform(k)),
                (None, _) => Err(Error::InvalidDistribution(format!("{what} is required"))),
            }
        };
        let q = reference(&self.q, "q", p.len())?;
        let qp = reference(&self.q_prime, "q_prime", pp.len())?;
        ConversionInstance::new(
            DistPair::new(p, q)?,
            DistPair::new(pp, qp)?,
            self.gamma,
            self.epsilon,
            self.mode,
        )
    }

    pub fn from_instance<S: Scalar>(inst: &ConversionInstance<S>) -> Self {
        Self {
            p: dist_to_json(&inst.source.p),
            q: Some(dist_to_json(&inst.source.q)),
            p_prime: dist_to_json(&inst.target.p),
            q_prime: Some(dist_to_json(&inst.target.q)),
            gamma: inst.gamma,
            epsilon: inst.epsilon,
            mode: inst.mode,
            backend: Some(S::BACKEND),
        }
    }
}

/// Exact copy of an instance for embedding in certificates.
pub fn exact_instance_doc(inst: &ConversionInstance<Rational>) -> InstanceDoc {
    InstanceDoc::from_instance(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn channel_doc_round_trip() {
        let c = StochasticChannel::new(vec![
            vec![ratio(1, 1), ratio(1, 2)],
            vec![ratio(0, 1), ratio(1, 2)],
        ])
        .unwrap();
        let doc = ChannelDoc::from_channel(&c);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(
            text,
            r#"{"orientation":"output-major","entries":[["1/1","1/2"],["0/1","1/2"]]}"#
        );
        let back: ChannelDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_channel::<Rational>().unwrap(), c);
    }

    #[test]
    fn instance_backend_inference() {
        let doc: InstanceDoc = serde_json::from_str(
            r#"{"p":["1/1","0/1"],"p_prime":["3/4","1/4"],"gamma":0.1,"mode":"unital","epsilon":0.05}"#,
        )
        .unwrap();
        assert_eq!(doc.backend(), Backend::Rational);
        let inst = doc.to_instance::<Rational>().unwrap();
        assert_eq!(inst.source.q, Distribution::uniform(2));

        let doc: InstanceDoc = serde_json::from_str(
            r#"{"p":[1,0],"q":[0.5,0.5],"p_prime":[0.75,0.25],"q_prime":[0.5,0.5],"gamma":0.1,"mode":"approximate","epsilon":0.1}"#,
        )
        .unwrap();
        assert_eq!(doc.backend(), Backend::Float);
        assert!(doc.to_instance::<Rational>().is_err());
        assert!(doc.to_instance::<f64>().is_ok());
    }

    #[test]
    fn missing_reference_is_an_error() {
        let doc: InstanceDoc = serde_json::from_str(
            r#"{"p":["1"],"p_prime":["1"],"gamma":0.1,"mode":"exact"}"#,
        )
        .unwrap();
        assert!(doc.to_instance::<Rational>().is_err());
    }
}
