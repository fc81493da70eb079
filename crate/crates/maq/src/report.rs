use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
        })
    }
}

/// One named measurement compared against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let ok = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Equal => value == tolerance,
        };
        Self {
            name: name.to_string(),
            status: if ok { "pass" } else { "fail" },
            value,
            tolerance,
            comparison,
        }
    }

    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, tolerance)
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, tolerance)
    }

    pub fn equal(name: &str, value: f64, expected: f64) -> Self {
        Self::new(name, value, Comparison::Equal, expected)
    }

    /// A yes/no condition, recorded as `1 == 1` or `0 == 1`.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::equal(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub command: String,
    pub seed: u64,
    pub status: &'static str,
    pub checks: Vec<Check>,
    /// Measured quantities that are reported but not judged.
    pub values: BTreeMap<String, Value>,
    /// File names written next to the report.
    pub artifacts: Vec<String>,
}

impl SuiteReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            status: "pass",
            checks: Vec::new(),
            values: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.passed() {
            self.status = "fail";
        }
        self.checks.push(check);
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.values.insert(key.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    /// Pretty JSON with every object's keys in sorted order.
    pub fn to_json(&self) -> String {
        // `Value` objects are ordered maps, so routing through it sorts the
        // struct fields as well as the `values` entries
        let v = serde_json::to_value(self).expect("report is plain data");
        let mut s = serde_json::to_string_pretty(&v).expect("report is plain data");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_come_out_sorted() {
        let mut r = SuiteReport::new("flat", 3);
        r.value("zeta", 1.0);
        r.value("alpha", 2.0);
        r.push(Check::at_most("residual", 0.5, 1.0));
        let json = r.to_json();
        let top: Vec<&str> = json
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim_start().split('"').nth(1).unwrap())
            .collect();
        assert_eq!(top, ["artifacts", "checks", "command", "seed", "status", "values"]);
        assert!(json.find("\"alpha\"").unwrap() < json.find("\"zeta\"").unwrap());
    }

    #[test]
    fn one_failure_fails_the_suite() {
        let mut r = SuiteReport::new("tube", 0);
        r.push(Check::at_most("a", 1.0, 2.0));
        assert_eq!(r.status, "pass");
        r.push(Check::at_least("b", 1.0, 2.0));
        assert_eq!(r.status, "fail");
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed());
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed());
    }
}
