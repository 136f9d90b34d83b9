use std::fmt;

use crate::linalg::Mat;

/// One failed check: a short machine-readable code, the degree it concerns
/// and, for matrix identities, the first entry where the two sides differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: String,
    pub degree: Option<i64>,
    pub entry: Option<(usize, usize)>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)?;
        if let Some(n) = self.degree {
            write!(f, " degree={n}")?;
        }
        if let Some((r, c)) = self.entry {
            write!(f, " entry=({r},{c})")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, code: &str, degree: Option<i64>, detail: impl Into<String>) {
        self.violations.push(Violation { code: code.into(), degree, entry: None, detail: detail.into() });
    }

    /// Records a violation unless `lhs == rhs`.
    pub fn expect_eq(&mut self, code: &str, degree: Option<i64>, lhs: &Mat, rhs: &Mat) {
        if (lhs.rows(), lhs.cols()) != (rhs.rows(), rhs.cols()) {
            self.push(code, degree, format!("shape {}x{} vs {}x{}", lhs.rows(), lhs.cols(), rhs.rows(), rhs.cols()));
            return;
        }
        if let Some((r, c)) = lhs.first_difference(rhs) {
            self.violations.push(Violation {
                code: code.into(),
                degree,
                entry: Some((r, c)),
                detail: format!("{} != {}", lhs.get(r, c), rhs.get(r, c)),
            });
        }
    }

    pub fn absorb(&mut self, other: VerifyReport) {
        self.violations.extend(other.violations);
    }

    /// Prefixes every code with `scope.`, for reports assembled from parts.
    pub fn scoped(mut self, scope: &str) -> Self {
        for v in &mut self.violations {
            v.code = format!("{scope}.{}", v.code);
        }
        self
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
