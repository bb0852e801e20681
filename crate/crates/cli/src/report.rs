//! Run reports and their JSON / CSV encodings.

use kersize_core::average::AverageReport;
use kersize_core::eval::GapReport;
use kersize_core::metric::Point;
use kersize_core::problem::GroupKey;
use kersize_core::rnsp::{RnspCertificate, RnspVerdict};
use kersize_core::spec::canonical_json;
use kersize_core::sweep::SweepReport;
use kersize_core::worst_case::WorstCaseReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeResult {
    pub y: Point,
    pub key: GroupKey,
    pub mode: String,
    pub policy: String,
    pub outputs: Vec<Point>,
    /// Lexicographically smallest output.
    pub selected: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateResult {
    pub decoder: String,
    #[serde(flatten)]
    pub gap: GapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnspResult {
    pub certificate: RnspCertificate,
    #[serde(flatten)]
    pub verdict: RnspVerdict,
    pub probes: usize,
    /// A vector violating the property, if the sampler found one. Absence
    /// proves nothing.
    pub counterexample: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub model_points: usize,
    pub noise_points: usize,
    pub groups: usize,
    pub forward: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    /// Normalized command line; flags that cannot change the result are
    /// dropped.
    pub command: String,
    pub config_hash: String,
    pub problem: ProblemSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<WorstCaseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average: Option<AverageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluate: Option<EvaluateResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode: Option<DecodeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rnsp: Option<RnspResult>,
    pub verdicts_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(command: String, config_hash: String, problem: ProblemSummary) -> Self {
        RunReport {
            command,
            config_hash,
            problem,
            worst: None,
            average: None,
            evaluate: None,
            decode: None,
            sweep: None,
            rnsp: None,
            verdicts_hold: true,
            wall_clock_seconds: None,
        }
    }

    /// Recomputes `verdicts_hold` from the guaranteed verdicts.
    pub fn settle(&mut self) {
        self.verdicts_hold = self.worst.as_ref().is_none_or(WorstCaseReport::verdicts_hold)
            && self.average.as_ref().is_none_or(AverageReport::verdicts_hold)
            && self.evaluate.as_ref().is_none_or(|e| e.gap.verdicts_hold());
    }
}

/// SHA-256 over the canonical problem spec, the normalized command and
/// any auxiliary input (decoder table, model family), newline-joined.
pub fn config_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            h.update(b"\n");
        }
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn to_json(report: &RunReport) -> Vec<u8> {
    let mut s = canonical_json(report);
    s.push('\n');
    s.into_bytes()
}

fn points_cell(points: &[Point]) -> String {
    points.iter().map(Point::to_string).collect::<Vec<_>>().join(";")
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// CSV view of the report. Group reports give one row per measurement
/// group; the other commands give their own small tables.
pub fn to_csv(report: &RunReport) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.worst.is_some() || report.average.is_some() {
        w.write_record([
            "key",
            "feasible_size",
            "diameter",
            "radius",
            "centers",
            "mass",
            "posterior_support",
            "outputs",
            "error_contribution",
        ])?;
        let n = report
            .worst
            .as_ref()
            .map(|r| r.groups.len())
            .or(report.average.as_ref().map(|r| r.groups.len()))
            .unwrap_or(0);
        for i in 0..n {
            let wg = report.worst.as_ref().map(|r| &r.groups[i]);
            let ag = report.average.as_ref().map(|r| &r.groups[i]);
            let key = wg.map(|g| &g.key).or(ag.map(|g| &g.key)).expect("a section");
            w.write_record([
                key.to_string(),
                wg.map(|g| g.feasible_size.to_string()).unwrap_or_default(),
                opt(wg.map(|g| g.diameter)),
                opt(wg.map(|g| g.radius)),
                wg.map(|g| points_cell(&g.centers)).unwrap_or_default(),
                opt(ag.map(|g| g.mass)),
                ag.map(|g| g.posterior_support.to_string()).unwrap_or_default(),
                ag.map(|g| points_cell(&g.outputs)).unwrap_or_default(),
                opt(ag.map(|g| g.error_contribution)),
            ])?;
        }
    } else if let Some(e) = &report.evaluate {
        let mut header = vec!["worst_error".to_string()];
        let mut row = vec![num(e.gap.worst_error)];
        for o in &e.gap.orders {
            header.push(format!("err_a_p{}", o.order));
            row.push(num(o.err_a));
        }
        w.write_record(&header)?;
        w.write_record(&row)?;
    } else if let Some(d) = &report.decode {
        w.write_record(["key", "point", "selected"])?;
        for p in &d.outputs {
            w.write_record([d.key.to_string(), p.to_string(), (*p == d.selected).to_string()])?;
        }
    } else if let Some(s) = &report.sweep {
        w.write_record(["id", "kind", "kersize", "best"])?;
        for r in &s.rows {
            w.write_record([r.id.clone(), r.kind.to_string(), num(r.kersize), (r.id == s.best).to_string()])?;
        }
    } else if let Some(r) = &report.rnsp {
        w.write_record(["kersize", "bound", "passes", "counterexample"])?;
        let ce = r
            .counterexample
            .as_ref()
            .map(|h| h.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        w.write_record([num(r.verdict.kersize), num(r.verdict.bound), r.verdict.passes.to_string(), ce])?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kersize_core::fixtures::two_point;
    use kersize_core::problem::MeasurementTable;
    use kersize_core::worst_case::{worst_case_report, CandidatePolicy};

    fn summary() -> ProblemSummary {
        ProblemSummary {
            model_points: 2,
            noise_points: 1,
            groups: 1,
            forward: "linear_additive",
        }
    }

    #[test]
    fn settle_tracks_failed_verdicts() {
        let (p, _) = two_point(0.5).unwrap();
        let t = MeasurementTable::build(&p).unwrap();
        let mut r = RunReport::new("analyze worst".into(), String::new(), summary());
        r.worst = Some(worst_case_report(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap());
        r.settle();
        assert!(r.verdicts_hold);
        r.worst.as_mut().unwrap().upper_bound_holds = false;
        r.settle();
        assert!(!r.verdicts_hold);
    }

    #[test]
    fn hash_separates_parts() {
        assert_ne!(config_hash(&["ab", "c"]), config_hash(&["a", "bc"]));
        assert_eq!(config_hash(&["x"]).len(), 64);
    }

    #[test]
    fn csv_without_sections_is_empty() {
        let r = RunReport::new(String::new(), String::new(), summary());
        assert!(to_csv(&r).unwrap().is_empty());
    }
}
