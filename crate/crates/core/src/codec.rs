//! The code model: coefficient storage, truncated parity-check and generator
//! matrices, and the text code-file format.
//!
//! A systematic rate (n-1)/n code is fixed by its parity coefficients
//! `r[i][j]`, degree `i = 0..=D`, information position `j = 0..k` (stored
//! j-ascending; the published tables list each degree j-descending).

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Fe, Field, GfError};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("row {row}: expected {expected} coefficients, found {found}")]
    RowLengthMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: log value {value} out of range 0..={max}")]
    LogOutOfRange { row: usize, value: u64, max: u32 },
    #[error("code length n = {0} must be at least 2")]
    BadLength(usize),
    #[error("coefficient array is empty or ragged")]
    BadShape,
    #[error("line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("declared field is invalid: {0}")]
    FieldMismatch(#[source] GfError),
    #[error("code is not representable in the file format: {0}")]
    NotSerializable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A systematic rate (n-1)/n convolutional code.
#[derive(Clone, PartialEq, Eq)]
pub struct CodeSpec {
    field: Arc<Field>,
    n: usize,
    coeffs: Vec<Vec<Fe>>,
}

impl fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodeSpec")
            .field("field", &self.field)
            .field("n", &self.n)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl CodeSpec {
    /// Builds a code from coefficient rows `coeffs[i][j]` (j-ascending).
    pub fn new(field: Arc<Field>, coeffs: Vec<Vec<Fe>>) -> Result<CodeSpec, CodecError> {
        let k = coeffs.first().map(Vec::len).ok_or(CodecError::BadShape)?;
        if k == 0 || coeffs.iter().any(|r| r.len() != k) {
            return Err(CodecError::BadShape);
        }
        if coeffs.iter().flatten().any(|&x| !field.contains(x)) {
            return Err(CodecError::BadShape);
        }
        Ok(CodeSpec {
            field,
            n: k + 1,
            coeffs,
        })
    }

    /// Parses the table convention: one row per degree 1..=D, each row
    /// j-descending logs; the degree-0 row is all ones.
    pub fn from_log_rows(
        field: Arc<Field>,
        n: usize,
        log_rows: &[Vec<u64>],
    ) -> Result<CodeSpec, CodecError> {
        if n < 2 {
            return Err(CodecError::BadLength(n));
        }
        let k = n - 1;
        let mut coeffs = vec![vec![Fe::ONE; k]];
        for (idx, row) in log_rows.iter().enumerate() {
            if row.len() != k {
                return Err(CodecError::RowLengthMismatch {
                    row: idx + 1,
                    expected: k,
                    found: row.len(),
                });
            }
            let mut r = Vec::with_capacity(k);
            for &l in row.iter().rev() {
                if l >= field.order() as u64 {
                    return Err(CodecError::LogOutOfRange {
                        row: idx + 1,
                        value: l,
                        max: field.order() - 1,
                    });
                }
                r.push(field.exp(l as i64));
            }
            coeffs.push(r);
        }
        Ok(CodeSpec { field, n, coeffs })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - 1
    }

    /// Maximum coefficient degree D.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// r_{i,j} with 0-based j; zero above the maximum degree.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> Fe {
        self.coeffs.get(i).map_or(Fe::ZERO, |r| r[j])
    }

    pub fn rows(&self) -> &[Vec<Fe>] {
        &self.coeffs
    }

    pub fn all_nonzero(&self) -> bool {
        self.coeffs.iter().flatten().all(|x| !x.is_zero())
    }

    /// r_{0,j} = 1 for all j.
    pub fn has_unit_constant_terms(&self) -> bool {
        self.coeffs[0].iter().all(|&x| x == Fe::ONE)
    }

    /// Canonical form: unit constant terms and r_{1,k} = 1.
    pub fn is_canonical(&self) -> bool {
        self.has_unit_constant_terms()
            && (self.degree() == 0 || self.coeffs[1][self.k() - 1] == Fe::ONE)
    }

    /// The same code cut down to degrees 0..=d.
    pub fn truncate(&self, d: usize) -> CodeSpec {
        let d = d.min(self.degree());
        CodeSpec {
            field: self.field.clone(),
            n: self.n,
            coeffs: self.coeffs[..=d].to_vec(),
        }
    }

    /// Coefficient rows as logs in table order (degrees 1..=D, j-descending).
    pub fn log_rows(&self) -> Result<Vec<Vec<u32>>, CodecError> {
        if !self.has_unit_constant_terms() {
            return Err(CodecError::NotSerializable(
                "constant terms are not all one".into(),
            ));
        }
        self.coeffs[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .rev()
                    .map(|&x| {
                        self.field.log(x).map_err(|_| {
                            CodecError::NotSerializable("zero coefficient".into())
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Polynomial entries of H(x), lowest degree first, one per information position.
    pub fn parity_polynomials(&self) -> Vec<Vec<Fe>> {
        (0..self.k())
            .map(|j| self.coeffs.iter().map(|r| r[j]).collect())
            .collect()
    }

    /// Truncated parity-check matrix H^(L): (L+1) x n(L+1).
    pub fn parity_truncated(&self, l: usize) -> TruncMatrix {
        let n = self.n;
        let k = self.k();
        let mut m = TruncMatrix::zeros(l + 1, n * (l + 1));
        for row in 0..=l {
            for block in 0..=row {
                let deg = row - block;
                for j in 0..k {
                    m.set(row, block * n + j, self.coeff(deg, j));
                }
                if deg == 0 {
                    m.set(row, block * n + k, Fe::ONE);
                }
            }
        }
        m
    }

    /// Truncated systematic generator matrix G^(L): k(L+1) x n(L+1).
    pub fn generator_truncated(&self, l: usize) -> TruncMatrix {
        let n = self.n;
        let k = self.k();
        let mut m = TruncMatrix::zeros(k * (l + 1), n * (l + 1));
        for a in 0..=l {
            for j in 0..k {
                let row = a * k + j;
                m.set(row, a * n + j, Fe::ONE);
                for b in a..=l {
                    m.set(row, b * n + k, self.coeff(b - a, j));
                }
            }
        }
        m
    }

    /// The matrix H'^(d) obtained from H^(d) by deleting the parity columns:
    /// (d+1) x k(d+1), block Toeplitz with entry r_{row-block, j}.
    pub fn reduced_matrix(&self, d: usize) -> TruncMatrix {
        let k = self.k();
        let mut m = TruncMatrix::zeros(d + 1, k * (d + 1));
        for row in 0..=d {
            for block in 0..=row {
                for j in 0..k {
                    m.set(row, block * k + j, self.coeff(row - block, j));
                }
            }
        }
        m
    }

    /// Serializes to the line-oriented code-file format.
    pub fn to_text(&self) -> Result<String, CodecError> {
        let rows = self.log_rows()?;
        let mut s = format!(
            "gf {} {:#b}\nn {}\nrows {}\n",
            self.field.m(),
            self.field.poly(),
            self.n,
            rows.len()
        );
        for row in rows {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<CodeSpec, CodecError> {
        parse_code_text(text)
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<(), CodecError> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<CodeSpec, CodecError> {
        let text = std::fs::read_to_string(path)?;
        parse_code_text(&text)
    }
}

fn perr(line: usize, column: usize, msg: impl Into<String>) -> CodecError {
    CodecError::Parse {
        line,
        column,
        msg: msg.into(),
    }
}

/// Splits a line into (1-based column, token) pairs.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_uint(tok: (usize, &str), line: usize) -> Result<u64, CodecError> {
    let (col, t) = tok;
    let parsed = if let Some(b) = t.strip_prefix("0b") {
        u64::from_str_radix(b, 2)
    } else if let Some(h) = t.strip_prefix("0x") {
        u64::from_str_radix(h, 16)
    } else {
        t.parse::<u64>()
    };
    parsed.map_err(|_| perr(line, col, format!("expected an unsigned integer, found `{t}`")))
}

fn parse_code_text(text: &str) -> Result<CodeSpec, CodecError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut field: Option<Arc<Field>> = None;
    let mut n: Option<usize> = None;
    let mut rows: Option<usize> = None;
    let mut idx = 0;

    // header: exactly one each of gf / n / rows, in that order
    for (key, lineno) in [("gf", 1), ("n", 2), ("rows", 3)] {
        let line = lines
            .get(idx)
            .ok_or_else(|| perr(lineno, 1, format!("missing `{key}` header")))?;
        let toks = tokens(line);
        let head = toks.first().map(|t| t.1).unwrap_or("");
        if head != key {
            let col = toks.first().map_or(1, |t| t.0);
            let msg = if ["gf", "n", "rows"].contains(&head) {
                format!("duplicate or misplaced `{head}` header, expected `{key}`")
            } else {
                format!("expected `{key}` header")
            };
            return Err(perr(lineno, col, msg));
        }
        match key {
            "gf" => {
                if toks.len() != 3 {
                    return Err(perr(lineno, 1, "expected `gf <m> <poly>`"));
                }
                let m = parse_uint(toks[1], lineno)? as u32;
                let poly = parse_uint(toks[2], lineno)? as u32;
                let f = Field::new(m, poly).map_err(CodecError::FieldMismatch)?;
                field = Some(Arc::new(f));
            }
            "n" => {
                if toks.len() != 2 {
                    return Err(perr(lineno, 1, "expected `n <length>`"));
                }
                let v = parse_uint(toks[1], lineno)? as usize;
                if v < 2 {
                    return Err(perr(lineno, toks[1].0, "n must be at least 2"));
                }
                n = Some(v);
            }
            _ => {
                if toks.len() != 2 {
                    return Err(perr(lineno, 1, "expected `rows <D>`"));
                }
                rows = Some(parse_uint(toks[1], lineno)? as usize);
            }
        }
        idx += 1;
    }
    let field = field.expect("header parsed");
    let n = n.expect("header parsed");
    let rows = rows.expect("header parsed");
    let k = n - 1;

    let mut log_rows = Vec::with_capacity(rows);
    for r in 0..rows {
        let lineno = idx + 1;
        let line = lines
            .get(idx)
            .ok_or_else(|| perr(lineno, 1, format!("expected {rows} coefficient rows, found {r}")))?;
        let toks = tokens(line);
        if toks.len() != k {
            return Err(perr(
                lineno,
                1,
                format!("expected {k} coefficients, found {}", toks.len()),
            ));
        }
        let mut row = Vec::with_capacity(k);
        for t in toks {
            let v = parse_uint(t, lineno)?;
            if v >= field.order() as u64 {
                return Err(perr(
                    lineno,
                    t.0,
                    format!("log value {v} out of range 0..={}", field.order() - 1),
                ));
            }
            row.push(v);
        }
        log_rows.push(row);
        idx += 1;
    }
    if let Some((off, extra)) = lines[idx..]
        .iter()
        .enumerate()
        .find(|(_, l)| !l.trim().is_empty())
    {
        let col = tokens(extra).first().map_or(1, |t| t.0);
        return Err(perr(idx + off + 1, col, "unexpected trailing content"));
    }
    CodeSpec::from_log_rows(field, n, &log_rows)
}

/// A dense matrix over GF(2^m).
#[derive(Clone, PartialEq, Eq)]
pub struct TruncMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Fe>,
}

impl fmt::Debug for TruncMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TruncMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|x| x.0.to_string()).collect();
            writeln!(f, "  [{}]", line.join(" "))?;
        }
        Ok(())
    }
}

impl TruncMatrix {
    pub fn zeros(rows: usize, cols: usize) -> TruncMatrix {
        TruncMatrix {
            rows,
            cols,
            entries: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Fe>>) -> TruncMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        TruncMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> TruncMatrix {
        let mut t = TruncMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, field: &Field, other: &TruncMatrix) -> TruncMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = TruncMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Fe::ZERO;
                for i in 0..self.cols {
                    acc += field.mul(self.get(r, i), other.get(i, c));
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> TruncMatrix {
        let mut out = TruncMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c));
            }
        }
        out
    }
}
