//! Best known codes for fields GF(2^3) through GF(2^14), bundled as data.

use std::sync::Arc;

use thiserror::Error;

use crate::codec::{CodeSpec, CodecError};
use crate::gf::{Field, GfError};
use crate::minors::{self, MinorsError, ProperSubmatrix, Superregularity};

const DATA: &str = include_str!("../data/tables.txt");

/// Entries with m at or above this are only verified on request.
pub const SLOW_FROM_M: u32 = 10;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Minors(#[from] MinorsError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub table: String,
    pub m: u32,
    pub n: usize,
    /// Largest D with CDP [2, ..., D] known for (2^m, n).
    pub delta: usize,
    /// True when delta was shown to be maximal.
    pub exact: bool,
    /// Rareness as printed, e.g. "3.4e-8" or "~2e-17".
    pub rareness: String,
    /// Rows for degrees 1..=delta-2, each r_{i,k} .. r_{i,1} as logs.
    pub log_rows: Vec<Vec<u64>>,
}

impl TableEntry {
    pub fn degree(&self) -> usize {
        self.log_rows.len()
    }

    pub fn is_slow(&self) -> bool {
        self.m >= SLOW_FROM_M
    }

    /// Rareness as a number, ignoring any "~" or "<" qualifier.
    pub fn rareness_value(&self) -> Option<f64> {
        self.rareness.trim_start_matches(['~', '<']).parse().ok()
    }

    pub fn code(&self) -> Result<CodeSpec, TableError> {
        let field = Arc::new(Field::with_default_poly(self.m)?);
        Ok(CodeSpec::from_log_rows(field, self.n, &self.log_rows)?)
    }

    /// Checks that the code has CDP [2, ..., delta].
    pub fn verify(&self) -> Result<Verdict, TableError> {
        let code = self.code()?;
        let shape_ok = self.delta == self.degree() + 2 && code.all_nonzero();
        match minors::is_k_superregular_capped(&code, self.degree(), u64::MAX)? {
            Superregularity::Superregular if shape_ok => Ok(Verdict::Pass),
            Superregularity::Superregular => Ok(Verdict::Fail(None)),
            Superregularity::Singular(w) => Ok(Verdict::Fail(Some(w))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Carries the vanishing minor, if one was found.
    Fail(Option<ProperSubmatrix>),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn parse_line(line_no: usize, line: &str) -> Result<TableEntry, TableError> {
    let err = |msg: &str| TableError::Parse {
        line: line_no,
        msg: msg.to_string(),
    };
    let cols: Vec<&str> = line.split('|').map(str::trim).collect();
    let [table, m, n, delta, status, rareness, rows] = cols[..] else {
        return Err(err("expected 7 fields"));
    };
    let exact = match status {
        "exact" => true,
        "lower" => false,
        _ => return Err(err("status must be exact or lower")),
    };
    let log_rows = rows
        .split(',')
        .map(|r| {
            r.split_whitespace()
                .map(|x| x.parse::<u64>().map_err(|_| err("bad log value")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TableEntry {
        table: table.to_string(),
        m: m.parse().map_err(|_| err("bad m"))?,
        n: n.parse().map_err(|_| err("bad n"))?,
        delta: delta.parse().map_err(|_| err("bad delta"))?,
        exact,
        rareness: rareness.to_string(),
        log_rows,
    })
}

/// Parses table text: `#` comments, otherwise one `|`-separated entry per line.
pub fn parse(text: &str) -> Result<Vec<TableEntry>, TableError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_line(i + 1, l))
        .collect()
}

pub fn all_entries() -> Vec<TableEntry> {
    parse(DATA).expect("bundled table parses")
}

pub fn lookup(m: u32, n: usize) -> Option<TableEntry> {
    all_entries().into_iter().find(|e| e.m == m && e.n == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_is_well_formed() {
        let all = all_entries();
        assert_eq!(all.len(), 36);
        for e in &all {
            assert_eq!(e.degree() + 2, e.delta, "m={} n={}", e.m, e.n);
            assert!(e.code().is_ok(), "m={} n={}", e.m, e.n);
            assert!(e.rareness_value().is_some());
        }
    }

    #[test]
    fn small_entries_verify() {
        for e in all_entries().iter().filter(|e| e.m <= 5) {
            assert!(e.verify().unwrap().passed(), "m={} n={}", e.m, e.n);
        }
    }

    #[test]
    fn corrupted_entry_fails() {
        let mut e = lookup(4, 2).unwrap();
        e.log_rows[1][0] = 0;
        assert!(!e.verify().unwrap().passed());
    }
}
