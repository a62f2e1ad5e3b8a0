//! Machine-readable experiment reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version of the report JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Solve,
    Conservation,
    Global,
    Blowup,
    Illposed,
    Picard,
    UniqueContinuation,
    Crossval,
    Besov,
}

/// Outcome of a scenario. Failed hypotheses are `Inapplicable`, not `Fail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { assertion: String, detail: String },
    Inapplicable { assertion: String, reason: String },
}

impl Verdict {
    /// Process exit code: 0 pass, 2 fail, 3 inapplicable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail { .. } => 2,
            Verdict::Inapplicable { .. } => 3,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// A single named assertion with the measured value and its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    #[serde(with = "nullable_f64")]
    pub value: f64,
    #[serde(with = "nullable_f64")]
    pub bound: f64,
}

mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

mod nullable_estimates {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let view: BTreeMap<&String, Option<f64>> = map
            .iter()
            .map(|(k, v)| (k, v.is_finite().then_some(*v)))
            .collect();
        view.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Option<f64>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(k, v)| (k, v.unwrap_or(f64::NAN)))
            .collect())
    }
}

/// Named columns of equal length. Undefined entries are NaN (`null` in JSON).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    #[serde(with = "nullable_columns")]
    pub columns: BTreeMap<String, Vec<f64>>,
}

mod nullable_columns {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        columns: &BTreeMap<String, Vec<f64>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let view: BTreeMap<&String, Vec<Option<f64>>> = columns
            .iter()
            .map(|(k, v)| (k, v.iter().map(|x| x.is_finite().then_some(*x)).collect()))
            .collect();
        view.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Vec<f64>>, D::Error> {
        let raw = BTreeMap::<String, Vec<Option<f64>>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect()))
            .collect())
    }
}

impl SeriesTable {
    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.columns.insert(name.to_string(), values);
        self
    }

    pub fn len(&self) -> usize {
        self.columns.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_aligned(&self) -> bool {
        let n = self.len();
        self.columns.values().all(|c| c.len() == n)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns.keys())?;
        for i in 0..self.len() {
            w.write_record(self.columns.values().map(|c| c[i].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub inputs: serde_json::Value,
    pub series: BTreeMap<String, SeriesTable>,
    /// Named scalars; non-finite values appear as `null`.
    #[serde(with = "nullable_estimates")]
    pub estimates: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub runtime_s: f64,
}

impl ExperimentReport {
    pub fn new(scenario: Scenario, inputs: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            inputs,
            series: BTreeMap::new(),
            estimates: BTreeMap::new(),
            checks: Vec::new(),
            verdict: Verdict::Pass,
            runtime_s: 0.0,
        }
    }

    pub fn estimate(&mut self, name: &str, value: f64) {
        self.estimates.insert(name.to_string(), value);
    }

    pub fn table(&mut self, name: &str, table: SeriesTable) {
        self.series.insert(name.to_string(), table);
    }

    /// Records `value ≤ bound`.
    pub fn check_le(&mut self, id: &str, value: f64, bound: f64) -> bool {
        self.push_check(id, value <= bound, value, bound)
    }

    /// Records `value ≥ bound`.
    pub fn check_ge(&mut self, id: &str, value: f64, bound: f64) -> bool {
        self.push_check(id, value >= bound, value, bound)
    }

    /// Records a boolean condition (value 1 or 0, bound 1).
    pub fn check_true(&mut self, id: &str, condition: bool) -> bool {
        self.push_check(id, condition, if condition { 1.0 } else { 0.0 }, 1.0)
    }

    fn push_check(&mut self, id: &str, passed: bool, value: f64, bound: f64) -> bool {
        self.checks.push(Check {
            id: id.to_string(),
            passed,
            value,
            bound,
        });
        passed
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Marks the scenario inapplicable; further checks are not meaningful.
    pub fn inapplicable(mut self, assertion: &str, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::Inapplicable {
            assertion: assertion.to_string(),
            reason: reason.into(),
        };
        self
    }

    /// Sets the verdict from the recorded checks: the first failed one is named.
    pub fn conclude(mut self, started: std::time::Instant) -> Self {
        self.runtime_s = started.elapsed().as_secs_f64();
        if matches!(self.verdict, Verdict::Inapplicable { .. }) {
            return self;
        }
        self.verdict = match self.checks.iter().find(|c| !c.passed) {
            None => Verdict::Pass,
            Some(c) => Verdict::Fail {
                assertion: c.id.clone(),
                detail: format!("measured {:e}, bound {:e}", c.value, c.bound),
            },
        };
        self
    }

    pub fn series_aligned(&self) -> bool {
        self.series.values().all(SeriesTable::is_aligned)
    }

    /// Writes `report.json` and `series/<name>.csv` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        if !self.series_aligned() {
            return Err(Error::InvalidParams("report series are not aligned".into()));
        }
        let series_dir = dir.join("series");
        std::fs::create_dir_all(&series_dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)?)?;
        for (name, table) in &self.series {
            table.write_csv(&series_dir.join(format!("{name}.csv")))?;
        }
        Ok(())
    }
}
