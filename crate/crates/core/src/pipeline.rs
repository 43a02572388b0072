//! Feeds wildfire detections into a cognitive map: the count of fire
//! detections in a time window becomes the activation of the
//! wildfire-frequency concept, and the map is run with and without it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcm::{scenario_compare, ActivationVector, Fcm, Verdict};
use crate::localize::Detection;

/// Default saturation count for [`frequency_activation`].
pub const DEFAULT_CAP: usize = 10;

/// Index of "frequency of wildfires" in the sanitary-condition map.
pub const WILDFIRE_CONCEPT: usize = 4;

pub const NON_CONVERGED: &str = "non-converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::Input(format!("window start {start} is after end {end}")));
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, t: i64) -> bool {
        (self.start..=self.end).contains(&t)
    }
}

/// Timestamped detections (epoch seconds), in nondecreasing time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionLog {
    entries: Vec<(i64, Detection)>,
}

impl DetectionLog {
    pub fn new(entries: Vec<(i64, Detection)>) -> Result<Self> {
        if let Some(w) = entries.windows(2).find(|w| w[1].0 < w[0].0) {
            return Err(Error::Input(format!(
                "detection log timestamps must be nondecreasing ({} follows {})",
                w[1].0, w[0].0
            )));
        }
        Ok(DetectionLog { entries })
    }

    /// Builds a log from entries in any order; sorting is stable.
    pub fn from_unsorted(mut entries: Vec<(i64, Detection)>) -> Self {
        entries.sort_by_key(|(t, _)| *t);
        DetectionLog { entries }
    }

    pub fn push(&mut self, timestamp: i64, detection: Detection) -> Result<()> {
        if let Some(&(last, _)) = self.entries.last() {
            if timestamp < last {
                return Err(Error::Input(format!("timestamp {timestamp} precedes the last entry {last}")));
            }
        }
        self.entries.push((timestamp, detection));
        Ok(())
    }

    pub fn entries(&self) -> &[(i64, Detection)] {
        &self.entries
    }

    pub fn fire_count(&self, window: Window) -> usize {
        self.entries
            .iter()
            .filter(|(t, d)| window.contains(*t) && d.is_fire())
            .count()
    }
}

/// What the detections say about wildfire frequency over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireObservation {
    pub window: Window,
    pub fire_count: usize,
    pub activation: f64,
}

impl FireObservation {
    pub fn from_log(log: &DetectionLog, window: Window, cap: usize) -> Result<Self> {
        if window.start > window.end {
            return Err(Error::Input(format!("window start {} is after end {}", window.start, window.end)));
        }
        if cap == 0 {
            return Err(Error::Input("frequency cap must be at least 1".into()));
        }
        let fire_count = log.fire_count(window);
        Ok(FireObservation {
            window,
            fire_count,
            activation: (fire_count as f64 / cap as f64).min(1.0),
        })
    }
}

/// `min(1, fires_in_window / cap)`.
pub fn frequency_activation(log: &DetectionLog, window: Window, cap: usize) -> Result<f64> {
    Ok(FireObservation::from_log(log, window, cap)?.activation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub baseline: Verdict,
    pub scenario: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub window: Window,
    pub fire_count: usize,
    pub activation_e5: f64,
    pub baseline: Vec<f64>,
    pub scenario: Vec<f64>,
    pub deltas: Vec<f64>,
    pub verdicts: Verdicts,
    pub concepts: Vec<String>,
    pub wildfire_concept: usize,
    pub warnings: Vec<String>,
}

/// Runs the map from `baseline` and from `baseline` with the wildfire
/// concept set to the observed activation, and reports the difference of
/// the final states.
pub fn run_fire_scenario(
    fcm: &Fcm,
    baseline: &ActivationVector,
    observation: &FireObservation,
    wildfire_concept: usize,
) -> Result<ScenarioReport> {
    if wildfire_concept >= fcm.size() {
        return Err(Error::Input(format!(
            "wildfire concept index {wildfire_concept} out of range for {} concepts",
            fcm.size()
        )));
    }
    let perturbed = baseline.with(wildfire_concept, observation.activation)?;
    let cmp = scenario_compare(fcm, baseline, &perturbed)?;
    let warnings = if cmp.converged {
        Vec::new()
    } else {
        vec![NON_CONVERGED.to_string()]
    };
    Ok(ScenarioReport {
        window: observation.window,
        fire_count: observation.fire_count,
        activation_e5: observation.activation,
        baseline: cmp.baseline.final_state().values().to_vec(),
        scenario: cmp.perturbed.final_state().values().to_vec(),
        deltas: cmp.deltas,
        verdicts: Verdicts {
            baseline: cmp.baseline.verdict,
            scenario: cmp.perturbed.verdict,
        },
        concepts: fcm.concepts().iter().map(|c| c.name.clone()).collect(),
        wildfire_concept,
        warnings,
    })
}

impl ScenarioReport {
    pub fn converged(&self) -> bool {
        !self.warnings.iter().any(|w| w == NON_CONVERGED)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text table, largest |delta| first, ties by concept index.
    pub fn to_table(&self) -> String {
        let mut order: Vec<usize> = (0..self.deltas.len()).collect();
        order.sort_by(|&a, &b| self.deltas[b].abs().total_cmp(&self.deltas[a].abs()).then(a.cmp(&b)));
        let name_width = self.concepts.iter().map(|c| c.len()).max().unwrap_or(0).max(7);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "window {}..{}  fires {}  wildfire activation {:.6}",
            self.window.start, self.window.end, self.fire_count, self.activation_e5
        );
        if !self.converged() {
            let _ = writeln!(out, "WARNING: {NON_CONVERGED} ({:?} / {:?})", self.verdicts.baseline, self.verdicts.scenario);
        }
        let _ = writeln!(out, "{:>3}  {:<name_width$}  {:>9}  {:>9}  {:>10}", "id", "concept", "baseline", "scenario", "delta");
        for i in order {
            let name = self.concepts.get(i).map(String::as_str).unwrap_or("");
            let _ = writeln!(
                out,
                "{:>3}  {:<name_width$}  {:>9.6}  {:>9.6}  {:>10.6}",
                i, name, self.baseline[i], self.scenario[i], self.deltas[i]
            );
        }
        out
    }
}

/// JSON document and human-readable table for a report.
pub fn render_report(report: &ScenarioReport) -> Result<(String, String)> {
    Ok((report.to_table(), report.to_json()?))
}
