use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::sweep::{AdversarialCase, Objective};
use crate::error::{Error, Result};
use crate::skeldata::Interaction;

/// Outcome for one (objective, ε, sample) cell; indices refer to the
/// report's objective, ε and sample lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFlag {
    pub objective: usize,
    pub epsilon: usize,
    pub sample: usize,
    pub distance: f64,
    pub success: bool,
}

impl SampleFlag {
    pub(crate) fn from_case(c: &AdversarialCase) -> Self {
        Self { objective: c.objective, epsilon: c.epsilon, sample: c.sample, distance: c.distance, success: c.success }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub objective: Interaction,
    pub epsilon: f64,
    pub successes: usize,
    pub evaluated: usize,
    pub success_rate: f64,
}

/// Success rates of one model over an objective × ε grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub model: String,
    pub epsilons: Vec<f64>,
    pub objectives: Vec<Interaction>,
    pub kappas: Vec<f64>,
    pub samples: usize,
    /// Objective-major, then ε.
    pub cells: Vec<SweepCell>,
    /// Success rate per ε over all objectives and samples.
    pub overall: Vec<f64>,
    pub flags: Vec<SampleFlag>,
}

impl SuccessReport {
    /// Aggregate per-sample flags. The order of `flags` does not matter.
    pub fn from_flags(
        model: &str,
        objectives: &[Objective],
        epsilons: &[f64],
        samples: usize,
        mut flags: Vec<SampleFlag>,
    ) -> Result<Self> {
        let (n_o, n_e) = (objectives.len(), epsilons.len());
        if flags.iter().any(|f| f.objective >= n_o || f.epsilon >= n_e || f.sample >= samples) {
            return Err(Error::Config("sample flag outside the report grid".into()));
        }
        flags.sort_by_key(|f| (f.objective, f.epsilon, f.sample));
        let mut hits = vec![0usize; n_o * n_e];
        let mut seen = vec![0usize; n_o * n_e];
        for f in &flags {
            let i = f.objective * n_e + f.epsilon;
            seen[i] += 1;
            hits[i] += f.success as usize;
        }
        let cells = (0..n_o * n_e)
            .map(|i| SweepCell {
                objective: objectives[i / n_e].label,
                epsilon: epsilons[i % n_e],
                successes: hits[i],
                evaluated: seen[i],
                success_rate: rate(hits[i], seen[i]),
            })
            .collect();
        let overall = (0..n_e)
            .map(|e| {
                let s: usize = (0..n_o).map(|o| hits[o * n_e + e]).sum();
                let n: usize = (0..n_o).map(|o| seen[o * n_e + e]).sum();
                rate(s, n)
            })
            .collect();
        Ok(Self {
            model: model.to_string(),
            epsilons: epsilons.to_vec(),
            objectives: objectives.iter().map(|o| o.label).collect(),
            kappas: objectives.iter().map(|o| o.kappa).collect(),
            samples,
            cells,
            overall,
            flags,
        })
    }

    /// Mean over objectives of the per-objective success rate, per ε.
    pub fn mean_rate_per_epsilon(&self) -> Vec<f64> {
        let n_e = self.epsilons.len();
        (0..n_e)
            .map(|e| {
                let rates: Vec<f64> = self.cells.iter().skip(e).step_by(n_e).map(|c| c.success_rate).collect();
                rates.iter().sum::<f64>() / rates.len() as f64
            })
            .collect()
    }

    /// `model,objective,epsilon,successes,evaluated,success_rate`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,objective,epsilon,successes,evaluated,success_rate\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                self.model, c.objective, c.epsilon, c.successes, c.evaluated, c.success_rate
            );
        }
        s
    }

    /// Plain-text table: one row per objective, one column per ε.
    pub fn summary(&self) -> String {
        let mut s = format!("model: {}\nsamples: {}\n", self.model, self.samples);
        let _ = write!(s, "{:<13}{:>9}", "objective", "kappa");
        for e in &self.epsilons {
            let _ = write!(s, "{e:>8}");
        }
        s.push('\n');
        let n_e = self.epsilons.len();
        for (o, label) in self.objectives.iter().enumerate() {
            let _ = write!(s, "{:<13}{:>9.3}", label.label(), self.kappas[o]);
            for c in &self.cells[o * n_e..(o + 1) * n_e] {
                let _ = write!(s, "{:>8.3}", c.success_rate);
            }
            s.push('\n');
        }
        let _ = write!(s, "{:<22}", "overall");
        for r in &self.overall {
            let _ = write!(s, "{r:>8.3}");
        }
        s.push('\n');
        s
    }
}

fn rate(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

/// Success of one source model's adversarial inputs on one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEntry {
    pub source: String,
    pub receiver: String,
    pub report: SuccessReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub entries: Vec<TransferEntry>,
}

impl TransferMatrix {
    pub fn get(&self, source: &str, receiver: &str) -> Option<&TransferEntry> {
        self.entries.iter().find(|e| e.source == source && e.receiver == receiver)
    }

    /// `source,receiver,objective,epsilon,successes,evaluated,success_rate`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("source,receiver,objective,epsilon,successes,evaluated,success_rate\n");
        for e in &self.entries {
            for c in &e.report.cells {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    e.source, e.receiver, c.objective, c.epsilon, c.successes, c.evaluated, c.success_rate
                );
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = writeln!(s, "{} -> {}", e.source, e.receiver);
            for (eps, r) in e.report.epsilons.iter().zip(&e.report.overall) {
                let _ = writeln!(s, "  epsilon {eps}: {r:.3}");
            }
        }
        s
    }
}
