//! Step-by-step log of a post-processing run.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use veriloop_core::CqState;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Step {
    pub step: String,
    pub registers_added: Vec<String>,
    pub trace_before: f64,
    pub trace_after: f64,
    pub parameters: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
#[serde(transparent)]
pub struct Transcript {
    pub steps: Vec<Step>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the transition `before → after`; registers present in `after`
    /// but not in `before` are listed as added.
    pub fn record<I, K>(&mut self, step: &str, before: &CqState, after: &CqState, parameters: I)
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        let registers_added = after
            .register_names()
            .filter(|n| !before.has_register(n))
            .map(str::to_owned)
            .collect();
        self.steps.push(Step {
            step: step.to_owned(),
            registers_added,
            trace_before: before.total_trace(),
            trace_after: after.total_trace(),
            parameters: parameters.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        });
    }
}
