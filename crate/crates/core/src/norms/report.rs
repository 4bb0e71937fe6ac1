use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{GridDomain, SpaceTimePoint};

/// Arg-max pair of a sup-over-pairs, by node id and coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub p: usize,
    pub q: usize,
    pub p_point: SpaceTimePoint,
    pub q_point: SpaceTimePoint,
    /// The quotient attained at `(p, q)`.
    pub quotient: f64,
}

impl Witness {
    pub(crate) fn new(dom: &GridDomain, p: usize, q: usize, quotient: f64) -> Self {
        Witness { p, q, p_point: dom.node_point(p), q_point: dom.node_point(q), quotient }
    }
}

/// A norm or seminorm value with its witness and per-term breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub name: String,
    pub value: f64,
    pub witness: Option<Witness>,
    pub breakdown: BTreeMap<String, f64>,
    /// Witnesses of the individual pair terms, keyed like `breakdown`.
    pub witnesses: BTreeMap<String, Witness>,
}

impl HolderReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        HolderReport {
            name: name.into(),
            value: 0.0,
            witness: None,
            breakdown: BTreeMap::new(),
            witnesses: BTreeMap::new(),
        }
    }

    pub fn term(&self, key: &str) -> Option<f64> {
        self.breakdown.get(key).copied()
    }

    pub(crate) fn add_term(&mut self, key: &str, value: f64) {
        self.breakdown.insert(key.to_string(), value);
    }

    pub(crate) fn add_pair_term(&mut self, key: &str, value: f64, witness: Option<Witness>) {
        self.add_term(key, value);
        if let Some(w) = witness {
            self.witnesses.insert(key.to_string(), w);
        }
    }

    /// Sets `value` to the sum of all breakdown terms and `witness` to the
    /// witness of the largest pair term.
    pub(crate) fn finish_sum(mut self) -> Self {
        self.value = self.breakdown.values().sum();
        self.witness = self
            .witnesses
            .iter()
            .max_by(|a, b| {
                let va = self.breakdown[a.0];
                let vb = self.breakdown[b.0];
                va.total_cmp(&vb).then_with(|| b.0.cmp(a.0))
            })
            .map(|(_, w)| w.clone());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "name,value,witness_p,witness_q,witness_p_t,witness_q_t,breakdown"
    }

    /// One CSV row; breakdown entries are written as `key=value` joined by `;`.
    pub fn csv_row(&self) -> String {
        let (p, q, pt, qt) = match &self.witness {
            Some(w) => (
                w.p.to_string(),
                w.q.to_string(),
                format!("{:e}", w.p_point.t),
                format!("{:e}", w.q_point.t),
            ),
            None => Default::default(),
        };
        let breakdown: Vec<String> =
            self.breakdown.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        format!(
            "\"{}\",{:e},{p},{q},{pt},{qt},\"{}\"",
            self.name.replace('"', "\"\""),
            self.value,
            breakdown.join(";").replace('"', "\"\"")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_and_serialization() {
        let mut r = HolderReport::new("toy");
        r.add_term("a", 1.0);
        r.add_term("b", 2.5);
        let r = r.finish_sum();
        assert_eq!(r.value, 3.5);
        let back: HolderReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.csv_row().starts_with("\"toy\",3.5e0,"));
        assert_eq!(HolderReport::csv_header().split(',').count(), 7);
    }
}
