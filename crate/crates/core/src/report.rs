//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "chern-lab-report/1";

/// One measured residual against its tolerance. `anchor` names the identity
/// the check exercises, or "plumbing".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl Check {
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64, seconds: f64) -> Check {
        Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual,
            tolerance,
            // NaN residuals fail.
            pass: residual <= tolerance,
            seconds,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub max_deg: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub suite: String,
    pub checks: Vec<Check>,
    pub environment: Environment,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str, mut checks: Vec<Check>, mut environment: Environment) -> Report {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        environment.sizes.sort_unstable();
        environment.sizes.dedup();
        environment.seeds.sort_unstable();
        environment.seeds.dedup();
        let pass = checks.iter().all(|c| c.pass);
        Report { schema: SCHEMA.to_string(), suite: suite.to_string(), checks, environment, pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// One line per check, aligned for terminals.
    pub fn lines(&self) -> Vec<String> {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:width$}  residual {:.3e}  tol {:.1e}  {:.2}s",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.residual,
                    c.tolerance,
                    c.seconds,
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_are_sorted_and_nan_fails() {
        let r = Report::new(
            "x",
            vec![Check::new("b", "plumbing", 1.0, 2.0, 0.0), Check::new("a", "plumbing", f64::NAN, 1.0, 0.0)],
            Environment { sizes: vec![32, 16, 32], seeds: vec![0], max_deg: None },
        );
        assert_eq!(r.checks[0].name, "a");
        assert!(!r.checks[0].pass && r.checks[1].pass && !r.pass);
        assert_eq!(r.environment.sizes, vec![16, 32]);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains(SCHEMA));
    }
}
