use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-reaction tolerance κ on the summed frame distance.
///
/// The defaults are the optimal tolerances found for the five surveyed
/// reactions; any other label resolves to the mean of the entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct ToleranceTable {
    entries: BTreeMap<String, f64>,
}

impl Default for ToleranceTable {
    fn default() -> Self {
        let entries =
            [("handshaking", 79.52), ("punching", 52.04), ("kicking", 93.17), ("departing", 71.77), ("pushing", 22.77)];
        Self { entries: entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }
}

impl ToleranceTable {
    /// An empty table; [`resolve_kappa`] fails until an entry is added.
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, label: impl Into<String>, kappa: f64) -> Result<()> {
        let label = label.into();
        if kappa.is_nan() || kappa < 0.0 {
            return Err(Error::Config(format!("tolerance for '{label}' must be ≥ 0, got {kappa}")));
        }
        self.entries.insert(label, kappa);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.get(label).copied()
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Arithmetic mean of all entries, `None` for an empty table.
    pub fn mean(&self) -> Option<f64> {
        if self.entries.is_empty() {
            return None;
        }
        Some(self.entries.values().sum::<f64>() / self.entries.len() as f64)
    }
}

impl TryFrom<BTreeMap<String, f64>> for ToleranceTable {
    type Error = Error;

    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        let mut t = Self::empty();
        for (k, v) in map {
            t.insert(k, v)?;
        }
        Ok(t)
    }
}

impl From<ToleranceTable> for BTreeMap<String, f64> {
    fn from(t: ToleranceTable) -> Self {
        t.entries
    }
}

/// κ for `label`: the table entry if present, otherwise the mean of all
/// entries.
pub fn resolve_kappa(table: &ToleranceTable, label: &str) -> Result<f64> {
    if let Some(k) = table.get(label) {
        return Ok(k);
    }
    table.mean().ok_or_else(|| Error::Config(format!("cannot resolve tolerance for '{label}': table is empty")))
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of `values`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("percentile", "no values"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("percentile", format!("quantile must lie in [0, 1], got {q}")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("percentile", "NaN in values"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surveyed_labels_resolve_exactly() {
        let t = ToleranceTable::default();
        assert_eq!(resolve_kappa(&t, "punching").unwrap(), 52.04);
        assert_eq!(resolve_kappa(&t, "pushing").unwrap(), 22.77);
    }

    #[test]
    fn unsurveyed_labels_use_the_mean() {
        let t = ToleranceTable::default();
        let expect = (79.52 + 52.04 + 93.17 + 71.77 + 22.77) / 5.0;
        assert_eq!(resolve_kappa(&t, "hugging").unwrap(), expect);
        assert!((expect - 63.854).abs() < 1e-12);
    }

    #[test]
    fn single_entry_and_empty_tables() {
        let mut t = ToleranceTable::empty();
        assert!(resolve_kappa(&t, "hugging").is_err());
        t.insert("kicking", 10.0).unwrap();
        assert_eq!(resolve_kappa(&t, "exchanging").unwrap(), 10.0);
        assert!(t.insert("x", -1.0).is_err());
    }

    #[test]
    fn table_serde_rejects_negative() {
        let t: ToleranceTable = serde_json::from_str(r#"{"a": 1.5}"#).unwrap();
        assert_eq!(t.get("a"), Some(1.5));
        assert!(serde_json::from_str::<ToleranceTable>(r#"{"a": -1}"#).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0, 5.0], 0.25).unwrap(), 2.0);
        assert_eq!(percentile(&[1.0, 2.0], 0.25).unwrap(), 1.25);
        assert_eq!(percentile(&[7.0], 0.9).unwrap(), 7.0);
        assert!(percentile(&[], 0.5).is_err());
    }
}
