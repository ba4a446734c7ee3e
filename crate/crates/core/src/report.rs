//! Validation reports: a list of typed violations, valid when empty.

use std::fmt;

/// Outcome of a semantic validation pass. Unlike structural errors, a
/// failed validation is an ordinary value carrying every violated check.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<V> {
    violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn new() -> Self {
        ValidationReport {
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, v: V) {
        self.violations.push(v);
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[V] {
        &self.violations
    }
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: fmt::Display> fmt::Display for ValidationReport<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            writeln!(f, "invalid ({} violations):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}
