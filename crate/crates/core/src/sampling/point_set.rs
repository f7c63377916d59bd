use rand::Rng;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{invalid, Result};
use crate::function_space::SparseFunction;
use crate::rng::seeded;
use crate::sampling::TwoStageParams;

/// How a point set was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Provenance {
    Iid {
        seed: u64,
    },
    Equispaced,
    TwoStage {
        params: TwoStageParams,
        seed: u64,
        stage1_size: usize,
        attempt: usize,
        trial: Option<usize>,
    },
    Explicit,
}

/// Ordered sample nodes `ξ¹, …, ξ^m` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    nodes: Vec<f64>,
    provenance: Provenance,
}

impl PointSet {
    pub fn new(nodes: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("a point set needs at least one node"));
        }
        if let Some(bad) = nodes.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(invalid(format!("node {bad} outside [0, 1)")));
        }
        Ok(PointSet { nodes, provenance })
    }

    pub fn explicit(nodes: Vec<f64>) -> Result<Self> {
        Self::new(nodes, Provenance::Explicit)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `m`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes at the given positions, in that order.
    pub fn subset(&self, positions: &[usize], provenance: Provenance) -> Result<Self> {
        let nodes = positions.iter().map(|&i| self.nodes[i]).collect();
        Self::new(nodes, provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("point set JSON: {e}")))
    }
}

/// Nodes print with 17 significant digits so the document round-trips exactly.
fn format_node(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("formatted float is valid JSON")
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let nodes: Vec<Box<RawValue>> = self.nodes.iter().map(|&x| format_node(x)).collect();
        let mut s = serializer.serialize_struct("PointSet", 3)?;
        s.serialize_field("m", &self.nodes.len())?;
        s.serialize_field("nodes", &nodes)?;
        s.serialize_field("provenance", &self.provenance)?;
        s.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSetDoc {
    m: usize,
    nodes: Vec<f64>,
    provenance: Provenance,
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PointSetDoc::deserialize(deserializer)?;
        if doc.m != doc.nodes.len() {
            return Err(D::Error::custom(format!(
                "m = {} but {} nodes",
                doc.m,
                doc.nodes.len()
            )));
        }
        PointSet::new(doc.nodes, doc.provenance).map_err(D::Error::custom)
    }
}

/// `m` iid uniform points from the seeded stream.
pub fn sample_iid(m: usize, seed: u64) -> Result<PointSet> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let mut rng = seeded(seed);
    let nodes = (0..m).map(|_| rng.random::<f64>()).collect();
    PointSet::new(nodes, Provenance::Iid { seed })
}

/// `{j/m : j = 0..m-1}`.
pub fn equispaced(m: usize) -> Result<PointSet> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let nodes = (0..m).map(|j| j as f64 / m as f64).collect();
    PointSet::new(nodes, Provenance::Equispaced)
}

/// `(1/m) ∑ |f(ξ^j)|^p`.
pub fn discrete_mean_pow(f: &SparseFunction<'_>, points: &PointSet, p: f64) -> f64 {
    let m = points.len() as f64;
    points
        .nodes()
        .iter()
        .map(|&x| f.evaluate(x).abs().powf(p))
        .sum::<f64>()
        / m
}

/// `((1/m) ∑ |f(ξ^j)|^p)^{1/p}`.
pub fn discrete_lp(f: &SparseFunction<'_>, points: &PointSet, p: f64) -> f64 {
    discrete_mean_pow(f, points, p).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::Dictionary;

    #[test]
    fn iid_is_deterministic() {
        let a = sample_iid(3, 0).unwrap();
        let b = sample_iid(3, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.nodes(), sample_iid(3, 1).unwrap().nodes());
    }

    #[test]
    fn iid_prefix_property() {
        let long = sample_iid(50, 9).unwrap();
        let short = sample_iid(20, 9).unwrap();
        assert_eq!(&long.nodes()[..20], short.nodes());
    }

    #[test]
    fn iid_mean_within_clt_band() {
        let s = sample_iid(10_000, 1).unwrap();
        let mean = s.nodes().iter().sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.015, "mean {mean}");
    }

    #[test]
    fn zero_size_rejected() {
        assert!(sample_iid(0, 0).is_err());
        assert!(equispaced(0).is_err());
    }

    #[test]
    fn equispaced_nodes() {
        assert_eq!(equispaced(4).unwrap().nodes(), &[0.0, 0.25, 0.5, 0.75]);
        assert_eq!(equispaced(1).unwrap().nodes(), &[0.0]);
        assert_eq!(equispaced(2).unwrap().nodes(), &[0.0, 0.5]);
    }

    #[test]
    fn discrete_norm_examples() {
        let d = Dictionary::trig_real(2);
        let xi = equispaced(4).unwrap();
        let one = SparseFunction::single(&d, 0, 1.0).unwrap();
        assert_eq!(discrete_lp(&one, &sample_iid(7, 3).unwrap(), 1.0), 1.0);
        let c1 = SparseFunction::single(&d, 1, 1.0).unwrap();
        assert!((discrete_lp(&c1, &xi, 2.0) - 0.5f64.sqrt()).abs() < 1e-12);
        let c2 = SparseFunction::single(&d, 3, 1.0).unwrap();
        assert!((discrete_lp(&c2, &xi, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_uses_seventeen_digits_and_round_trips() {
        let s = sample_iid(5, 4).unwrap();
        let json = s.to_json();
        assert!(json.starts_with("{\"m\":5,\"nodes\":["));
        let open = json.find('[').unwrap() + 1;
        let first = &json[open..open + json[open..].find(',').unwrap()];
        let mantissa = first.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17, "{first}");
        let back = PointSet::from_json(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn json_rejects_inconsistent_documents() {
        let bad_m = r#"{"m":2,"nodes":[0.5],"provenance":{"generator":"explicit"}}"#;
        assert!(PointSet::from_json(bad_m).is_err());
        let bad_node = r#"{"m":1,"nodes":[1.5],"provenance":{"generator":"explicit"}}"#;
        assert!(PointSet::from_json(bad_node).is_err());
        let extra = r#"{"m":1,"nodes":[0.5],"provenance":{"generator":"explicit"},"x":1}"#;
        assert!(PointSet::from_json(extra).is_err());
    }
}
