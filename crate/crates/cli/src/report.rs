//! JSON report documents. Field order is fixed; timings are emitted only
//! when requested, so reports are byte-identical across runs otherwise.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use isorelabel::oracle::{OracleOutcome, OracleValue};
use isorelabel::{Instance, LpError, Norm, RegressionResult};

/// Per-phase wall-clock times in milliseconds, in recording order.
#[derive(Debug, Default)]
pub struct Timings {
    enabled: bool,
    phases: Vec<(&'static str, f64)>,
}

impl Timings {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            phases: Vec::new(),
        }
    }

    pub fn record(&mut self, phase: &'static str, start: Instant) {
        if self.enabled {
            self.phases
                .push((phase, start.elapsed().as_secs_f64() * 1e3));
        }
    }

    pub fn finish(self) -> Option<serde_json::Map<String, Value>> {
        self.enabled.then(|| {
            self.phases
                .into_iter()
                .map(|(k, v)| (k.to_string(), Value::from(v)))
                .collect()
        })
    }
}

/// Label token for ordinal scales, a JSON number otherwise (integers
/// without a fraction).
pub fn value_json(inst: &Instance, v: f64) -> Value {
    let scale = inst.scale();
    if !scale.is_numeric() {
        if let Some(r) = scale.rank_of(v) {
            return Value::from(scale.label(r));
        }
    }
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

#[derive(Debug, Serialize)]
pub struct LpReport {
    pub norm: &'static str,
    pub value: f64,
    pub sum_pow: f64,
}

impl From<LpError> for LpReport {
    fn from(e: LpError) -> Self {
        let norm = match e.norm {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        };
        Self {
            norm,
            value: e.value,
            sum_pow: e.sum_pow,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RelabelReport {
    pub command: &'static str,
    pub order: &'static str,
    pub objective: String,
    pub n: usize,
    pub g: Vec<Value>,
    pub kept: Vec<usize>,
    pub delta0: usize,
    pub stage_counts: Option<Vec<usize>>,
    pub lp_error: Option<LpReport>,
    pub objective_value: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<serde_json::Map<String, Value>>,
}

impl RelabelReport {
    pub fn new(
        inst: &Instance,
        order: &'static str,
        objective: String,
        res: &RegressionResult,
        timings: Timings,
    ) -> Self {
        Self {
            command: "relabel",
            order,
            objective,
            n: inst.len(),
            g: res.g.iter().map(|&v| value_json(inst, v)).collect(),
            kept: res.kept.clone(),
            delta0: res.l0_distance,
            stage_counts: res.stage_counts.clone(),
            lp_error: res.lp_error.map(LpReport::from),
            objective_value: res.objective,
            threshold: res.threshold,
            timings_ms: timings.finish(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DistanceReport {
    pub command: &'static str,
    pub order: &'static str,
    pub n: usize,
    pub delta0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<serde_json::Map<String, Value>>,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub command: &'static str,
    pub objective: String,
    pub n: usize,
    pub delta0: Option<usize>,
    pub error: Option<f64>,
    pub stage_counts: Option<Vec<usize>>,
    pub threshold: Option<f64>,
    pub g: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<serde_json::Map<String, Value>>,
}

impl OracleReport {
    pub fn new(
        inst: &Instance,
        objective: String,
        outcome: OracleOutcome,
        timings: Timings,
    ) -> Self {
        let mut report = Self::empty(inst, objective, timings);
        match outcome.value {
            OracleValue::Distance(d) => report.delta0 = Some(d),
            OracleValue::Error(e) => report.error = Some(e),
            OracleValue::Stages(s) => report.stage_counts = Some(s),
        }
        report.g = Some(outcome.g.iter().map(|&v| value_json(inst, v)).collect());
        report
    }

    pub fn threshold(inst: &Instance, objective: String, threshold: f64, timings: Timings) -> Self {
        Self {
            threshold: Some(threshold),
            ..Self::empty(inst, objective, timings)
        }
    }

    fn empty(inst: &Instance, objective: String, timings: Timings) -> Self {
        Self {
            command: "oracle",
            objective,
            n: inst.len(),
            delta0: None,
            error: None,
            stage_counts: None,
            threshold: None,
            g: None,
            timings_ms: timings.finish(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub family: &'static str,
    pub n: usize,
    pub n_hat: usize,
    pub m_hat_closure: usize,
    pub m_hat_reduction: usize,
    pub delta0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub command: &'static str,
    pub seed: u64,
    pub labels: usize,
    pub rows: Vec<BenchRow>,
}
