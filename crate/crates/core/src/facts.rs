//! Curated rank facts for congruent twists, kept apart from anything the
//! crate computes so certificates can say where a claim came from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../data/external_facts.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankFact {
    pub d: i64,
    pub rank: u32,
    pub citation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalFactTable {
    rows: BTreeMap<i64, RankFact>,
}

impl ExternalFactTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled fact table parses")
    }

    /// Whitespace-separated `D rank citation...`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("fact table line {}: {line:?}", lineno + 1));
            let mut parts = line.split_whitespace();
            let d: i64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let rank: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let citation = parts.collect::<Vec<_>>().join(" ");
            if citation.is_empty() {
                return Err(bad());
            }
            rows.insert(d, RankFact { d, rank, citation });
        }
        Ok(ExternalFactTable { rows })
    }

    pub fn lookup(&self, d: i64) -> Option<&RankFact> {
        self.rows.get(&d)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rows() {
        let t = ExternalFactTable::builtin();
        assert_eq!(t.lookup(34).unwrap().rank, 2);
        assert_eq!(t.lookup(119).unwrap().citation, "curve-database");
        assert!(t.lookup(1).is_none());
    }

    #[test]
    fn rejects_missing_citation() {
        assert!(ExternalFactTable::parse("7 1\n").is_err());
        assert!(ExternalFactTable::parse("x 1 c\n").is_err());
        assert_eq!(ExternalFactTable::parse("# only comments\n\n").unwrap().len(), 0);
    }
}
