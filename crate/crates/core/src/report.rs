//! Pass/fail records shared by every validator in the crate.

use serde::{Deserialize, Serialize};

/// One named check with its worst-case residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, pass: bool, residual: f64) -> &mut Check {
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual,
            detail: None,
        });
        self.checks.last_mut().unwrap()
    }

    pub fn push_detail(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        residual: f64,
        detail: impl Into<String>,
    ) {
        self.push(name, pass, residual).detail = Some(detail.into());
    }

    pub fn extend(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    /// Overall verdict: every check passed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            write!(f, "{mark} {:<32} residual {:.3e}", c.name, c.residual)?;
            if let Some(d) = &c.detail {
                write!(f, "  ({d})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
