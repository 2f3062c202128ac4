//! Check reports and failure witnesses.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::ring::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        })
    }
}

/// Concrete evidence that an identity does not hold: the nonzero residual
/// (left side minus right side) together with the inputs that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub label: String,
    pub variables: Vec<String>,
    pub inputs: Vec<(String, String)>,
    pub residual: Vec<Poly>,
}

impl Witness {
    pub fn new(label: impl Into<String>, variables: &[String]) -> Self {
        Witness { label: label.into(), variables: variables.to_vec(), inputs: Vec::new(), residual: Vec::new() }
    }

    pub fn input(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.inputs.push((name.into(), value.into()));
        self
    }

    pub fn poly_input(self, name: impl Into<String>, p: &Poly) -> Self {
        let text = p.to_text(&self.variables);
        self.input(name, text)
    }

    pub fn residual(mut self, residual: impl IntoIterator<Item = Poly>) -> Self {
        self.residual.extend(residual);
        self
    }

    pub fn is_nonzero(&self) -> bool {
        self.residual.iter().any(|p| !p.is_zero())
    }

    pub fn residual_text(&self) -> Vec<String> {
        self.residual.iter().map(|p| p.to_text(&self.variables)).collect()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        for (k, v) in &self.inputs {
            write!(f, "; {k} = {v}")?;
        }
        write!(f, "; residual = [{}]", self.residual_text().join(", "))
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let inputs: serde_json::Map<String, serde_json::Value> =
            self.inputs.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let mut st = s.serialize_struct("Witness", 4)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("variables", &self.variables)?;
        st.serialize_field("inputs", &inputs)?;
        st.serialize_field("residual", &self.residual_text())?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>) -> Self {
        CheckResult { name: name.into(), status: Status::Pass, detail: None, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: Witness) -> Self {
        CheckResult { name: name.into(), status: Status::Fail, detail: None, witness: Some(witness) }
    }

    pub fn error(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult { name: name.into(), status: Status::Error, detail: Some(detail.into()), witness: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Outcome of a checker. A report fails when any check fails, and every
/// failing check carries a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub subject: String,
    pub status: Status,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report { subject: subject.into(), status: Status::Pass, checks: Vec::new() }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.status = match (self.status, check.status) {
            (Status::Error, _) | (_, Status::Error) => Status::Error,
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            _ => Status::Pass,
        };
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.checks.iter().find_map(|c| c.witness.as_ref())
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.checks.iter().filter_map(|c| c.witness.as_ref())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.subject, self.status)?;
        for c in &self.checks {
            write!(f, "  [{}] {}", c.status, c.name)?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
            if let Some(w) = &c.witness {
                writeln!(f, "      witness: {w}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_folds_to_worst() {
        let mut r = Report::new("demo");
        r.push(CheckResult::pass("a"));
        assert!(r.passed());
        let names = vec!["x1".to_string()];
        let w = Witness::new("a != b", &names).residual([Poly::var(1, 0)]);
        r.push(CheckResult::fail("b", w));
        assert_eq!(r.status, Status::Fail);
        r.push(CheckResult::pass("c"));
        assert_eq!(r.status, Status::Fail);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["checks"][1]["witness"]["residual"][0], "1*x1");
    }
}
