use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefix that negates the value of any term, e.g. `"negative:strong"`.
pub const NEGATION_PREFIX: &str = "negative:";

/// Ordered mapping from verbal influence strengths to weights in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, f64)>", into = "Vec<(String, f64)>")]
pub struct LinguisticScale {
    terms: Vec<(String, f64)>,
}

impl Default for LinguisticScale {
    fn default() -> Self {
        LinguisticScale {
            terms: [
                ("extremely weak", 0.1),
                ("weak", 0.3),
                ("moderately", 0.5),
                ("stronger than usual", 0.7),
                ("strong", 0.9),
            ]
            .into_iter()
            .map(|(t, v)| (t.to_string(), v))
            .collect(),
        }
    }
}

impl LinguisticScale {
    pub fn new<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut scale = LinguisticScale { terms: Vec::new() };
        for (term, value) in terms {
            scale.insert(term, value)?;
        }
        Ok(scale)
    }

    /// Adds a term, or overrides the value of an existing one.
    pub fn insert(&mut self, term: impl Into<String>, value: f64) -> Result<()> {
        let term = term.into();
        if term.trim().is_empty() {
            return Err(Error::Validation("linguistic term must not be empty".into()));
        }
        if term.starts_with(NEGATION_PREFIX) {
            return Err(Error::Validation(format!(
                "term {term:?} may not start with the reserved prefix {NEGATION_PREFIX:?}"
            )));
        }
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::Validation(format!("term {term:?} has value {value} outside [-1, 1]")));
        }
        match self.terms.iter_mut().find(|(t, _)| *t == term) {
            Some(entry) => entry.1 = value,
            None => self.terms.push((term, value)),
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.terms.iter().map(|(t, v)| (t.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact lookup. `"negative:<term>"` yields the negated value of `<term>`.
    pub fn resolve(&self, term: &str) -> Result<f64> {
        if self.terms.is_empty() {
            return Err(Error::Validation("linguistic scale is empty".into()));
        }
        let (base, sign) = match term.strip_prefix(NEGATION_PREFIX) {
            Some(rest) => (rest, -1.0),
            None => (term, 1.0),
        };
        self.terms
            .iter()
            .find(|(t, _)| t == base)
            .map(|(_, v)| sign * v)
            .ok_or_else(|| Error::UnknownTerm {
                term: term.to_string(),
                available: self.terms.iter().map(|(t, _)| t.clone()).collect(),
            })
    }
}

impl TryFrom<Vec<(String, f64)>> for LinguisticScale {
    type Error = Error;

    fn try_from(terms: Vec<(String, f64)>) -> Result<Self> {
        LinguisticScale::new(terms)
    }
}

impl From<LinguisticScale> for Vec<(String, f64)> {
    fn from(s: LinguisticScale) -> Self {
        s.terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lookup() {
        let s = LinguisticScale::new([("extremely weak", 0.1), ("moderately", 0.5)]).unwrap();
        assert_eq!(s.resolve("moderately").unwrap(), 0.5);
        assert_eq!(s.resolve("extremely weak").unwrap(), 0.1);
    }

    #[test]
    fn unknown_term_lists_alternatives() {
        let s = LinguisticScale::new([("extremely weak", 0.1), ("moderately", 0.5)]).unwrap();
        match s.resolve("huge") {
            Err(Error::UnknownTerm { term, available }) => {
                assert_eq!(term, "huge");
                assert_eq!(available, vec!["extremely weak", "moderately"]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.resolve("Moderately").is_err());
    }

    #[test]
    fn negative_values_and_prefix() {
        let s = LinguisticScale::new([("inhibits strongly", -0.9)]).unwrap();
        assert_eq!(s.resolve("inhibits strongly").unwrap(), -0.9);
        assert_eq!(s.resolve("negative:inhibits strongly").unwrap(), 0.9);
        assert_eq!(LinguisticScale::default().resolve("negative:strong").unwrap(), -0.9);
    }

    #[test]
    fn default_table() {
        let d = LinguisticScale::default();
        let terms: Vec<_> = d.terms().collect();
        assert_eq!(
            terms,
            vec![
                ("extremely weak", 0.1),
                ("weak", 0.3),
                ("moderately", 0.5),
                ("stronger than usual", 0.7),
                ("strong", 0.9)
            ]
        );
    }

    #[test]
    fn validation() {
        assert!(LinguisticScale::new([("x", 1.5)]).is_err());
        assert!(LinguisticScale::new([("", 0.5)]).is_err());
        assert!(LinguisticScale::new([("negative:x", 0.5)]).is_err());
        assert!(LinguisticScale::new(Vec::<(String, f64)>::new()).unwrap().resolve("x").is_err());
        let mut s = LinguisticScale::default();
        s.insert("weak", 0.2).unwrap();
        assert_eq!(s.resolve("weak").unwrap(), 0.2);
        assert_eq!(s.len(), 5);
    }
}
