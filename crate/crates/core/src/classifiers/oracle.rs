use super::Classifier;
use crate::error::{Error, Result};
use crate::label::Label;
use serde::{Deserialize, Serialize};

/// Membership-query access to a classifier, as seen by an adversary.
pub trait LabelOracle {
    fn query(&mut self, x: &[f64]) -> Result<Label>;
}

/// One query and its answer, as exported to JSON lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub q: Vec<f64>,
    pub a: Label,
}

/// Wraps a classifier, counts queries, enforces an optional hard budget and
/// optionally records the transcript.
pub struct CountedOracle<'a> {
    classifier: &'a dyn Classifier,
    count: u64,
    budget: Option<u64>,
    transcript: Option<Vec<QueryRecord>>,
}

impl<'a> CountedOracle<'a> {
    pub fn new(classifier: &'a dyn Classifier) -> Self {
        Self {
            classifier,
            count: 0,
            budget: None,
            transcript: None,
        }
    }

    /// Queries beyond `budget` fail with [`Error::BudgetExceeded`].
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn recording(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn query_count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn transcript(&self) -> Option<&[QueryRecord]> {
        self.transcript.as_deref()
    }

    pub fn take_transcript(&mut self) -> Vec<QueryRecord> {
        self.transcript
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }
}

impl LabelOracle for CountedOracle<'_> {
    fn query(&mut self, x: &[f64]) -> Result<Label> {
        if let Some(b) = self.budget {
            if self.count >= b {
                return Err(Error::BudgetExceeded { budget: b });
            }
        }
        let a = self.classifier.classify(x);
        self.count += 1;
        if let Some(t) = self.transcript.as_mut() {
            t.push(QueryRecord { q: x.to_vec(), a });
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::FnClassifier;

    #[test]
    fn counts_and_records() {
        let f = FnClassifier(|x: &[f64]| Label::from_sign(x[0]));
        let mut o = CountedOracle::new(&f).recording();
        assert_eq!(o.query(&[1.0]).unwrap(), Label::Pos);
        assert_eq!(o.query(&[-1.0]).unwrap(), Label::Neg);
        assert_eq!(o.query_count(), 2);
        assert_eq!(o.transcript().unwrap().len(), 2);
    }

    #[test]
    fn budget_is_enforced() {
        let f = FnClassifier(|_: &[f64]| Label::Pos);
        let mut o = CountedOracle::new(&f).with_budget(1);
        o.query(&[0.0]).unwrap();
        assert!(matches!(
            o.query(&[0.0]),
            Err(Error::BudgetExceeded { budget: 1 })
        ));
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn transcript_json_line_shape() {
        let r = QueryRecord {
            q: vec![0.5, -1.0],
            a: Label::Neg,
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"q":[0.5,-1.0],"a":-1}"#
        );
    }
}
