//! Plain-text formats for seeds, coefficient tables and embeddings.
//!
//! Files are UTF-8, line-feed terminated, whitespace separated. A line whose
//! first non-blank character is `#` is a comment. Every file opens with a
//! kind/version line, followed by header directives, followed by one record
//! per line:
//!
//! ```text
//! seedfile 1             coefffile 1            embedding 1
//! m 1                    m 1                    m 2
//! S 2                    S 2                    mprime 1
//! k 3                    region 8 8             S 2 0
//! <n v.. value>          k 3                    S 0 4
//!                        <a v.. b value>        E 1
//!                                               E 0
//! ```
//!
//! Values are integers or `num/den` in lowest terms with a positive
//! denominator; writers always emit that canonical form and sorted records,
//! so writing is deterministic and `parse(write(f)) = f` holds bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use maass_core::{
    CoeffError, CoeffFn, Index, LatticeError, MaassError, QuadSpace, Rational, Region, SeedFn,
    SeedKey, Weight,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{msg}")]
    Invariant { msg: String },
}

impl FormatError {
    fn parse(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            msg: msg.into(),
        }
    }

    fn invariant(msg: impl std::fmt::Display) -> Self {
        FormatError::Invariant {
            msg: msg.to_string(),
        }
    }
}

impl From<LatticeError> for FormatError {
    fn from(e: LatticeError) -> Self {
        FormatError::invariant(e)
    }
}

impl From<CoeffError> for FormatError {
    fn from(e: CoeffError) -> Self {
        FormatError::invariant(e)
    }
}

impl From<MaassError> for FormatError {
    fn from(e: MaassError) -> Self {
        FormatError::invariant(e)
    }
}

/// Canonical serialization: integers bare, otherwise `num/den` in lowest
/// terms with `den > 0`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(token: &str, line: usize) -> Result<Rational, FormatError> {
    match token.split_once('/') {
        None => {
            let n = BigInt::from_str(token)
                .map_err(|_| FormatError::parse(line, format!("bad integer `{token}`")))?;
            Ok(Rational::from_integer(n))
        }
        Some((num, den)) => {
            let n = BigInt::from_str(num)
                .map_err(|_| FormatError::parse(line, format!("bad numerator `{num}`")))?;
            let d = BigInt::from_str(den)
                .map_err(|_| FormatError::parse(line, format!("bad denominator `{den}`")))?;
            if d.is_zero() || d.is_negative() {
                return Err(FormatError::parse(
                    line,
                    format!("denominator must be positive, got `{den}`"),
                ));
            }
            Ok(Rational::new(n, d))
        }
    }
}

fn parse_i64(token: &str, line: usize) -> Result<i64, FormatError> {
    token
        .parse::<i64>()
        .map_err(|_| FormatError::parse(line, format!("bad integer `{token}`")))
}

/// Significant lines with their 1-based numbers; comments and blanks dropped.
fn significant_lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                None
            } else {
                Some((i + 1, trimmed.split_whitespace().collect()))
            }
        })
        .collect()
}

struct Header {
    m: usize,
    gram: Vec<Vec<i64>>,
    region: Option<(i64, i64)>,
    mprime: Option<usize>,
    embedding_rows: Vec<Vec<i64>>,
    k: Option<u32>,
    /// position in `lines` where the body starts
    body_start: usize,
}

fn parse_header(
    lines: &[(usize, Vec<&str>)],
    kind: &str,
) -> Result<Header, FormatError> {
    let Some((first_no, first)) = lines.first() else {
        return Err(FormatError::parse(1, format!("empty file, expected `{kind} 1`")));
    };
    if first.len() != 2 || first[0] != kind {
        return Err(FormatError::parse(
            *first_no,
            format!("expected `{kind} <version>`, got `{}`", first.join(" ")),
        ));
    }
    if first[1] != "1" {
        return Err(FormatError::parse(
            *first_no,
            format!("unsupported {kind} version `{}`", first[1]),
        ));
    }
    let mut header = Header {
        m: 0,
        gram: Vec::new(),
        region: None,
        mprime: None,
        embedding_rows: Vec::new(),
        k: None,
        body_start: lines.len(),
    };
    let mut seen_m = false;
    let mut pos = 1;
    while pos < lines.len() {
        let (no, tokens) = &lines[pos];
        match tokens[0] {
            "m" => {
                if tokens.len() != 2 {
                    return Err(FormatError::parse(*no, "expected `m <rank>`"));
                }
                header.m = tokens[1]
                    .parse()
                    .map_err(|_| FormatError::parse(*no, format!("bad rank `{}`", tokens[1])))?;
                seen_m = true;
            }
            "mprime" => {
                if tokens.len() != 2 {
                    return Err(FormatError::parse(*no, "expected `mprime <rank>`"));
                }
                header.mprime = Some(tokens[1].parse().map_err(|_| {
                    FormatError::parse(*no, format!("bad rank `{}`", tokens[1]))
                })?);
            }
            "S" => {
                let row: Result<Vec<i64>, _> =
                    tokens[1..].iter().map(|t| parse_i64(t, *no)).collect();
                header.gram.push(row?);
            }
            "E" => {
                let row: Result<Vec<i64>, _> =
                    tokens[1..].iter().map(|t| parse_i64(t, *no)).collect();
                header.embedding_rows.push(row?);
            }
            "region" => {
                if tokens.len() != 3 {
                    return Err(FormatError::parse(*no, "expected `region <a_max> <b_max>`"));
                }
                header.region = Some((parse_i64(tokens[1], *no)?, parse_i64(tokens[2], *no)?));
            }
            "k" => {
                if tokens.len() != 2 {
                    return Err(FormatError::parse(*no, "expected `k <weight>`"));
                }
                header.k = Some(tokens[1].parse().map_err(|_| {
                    FormatError::parse(*no, format!("bad weight `{}`", tokens[1]))
                })?);
            }
            _ => {
                header.body_start = pos;
                break;
            }
        }
        pos += 1;
        header.body_start = pos;
    }
    if !seen_m {
        return Err(FormatError::parse(
            lines[0].0,
            "missing `m <rank>` header line",
        ));
    }
    Ok(header)
}

fn quad_space_from_header(header: &Header) -> Result<Arc<QuadSpace>, FormatError> {
    if header.gram.len() != header.m {
        return Err(FormatError::invariant(format!(
            "expected {} Gram rows, found {}",
            header.m,
            header.gram.len()
        )));
    }
    Ok(Arc::new(QuadSpace::new(header.gram.clone())?))
}

fn write_gram(out: &mut String, qs: &QuadSpace) {
    let _ = writeln!(out, "m {}", qs.rank());
    for row in qs.gram() {
        let mut line = String::from("S");
        for e in row {
            let _ = write!(line, " {e}");
        }
        let _ = writeln!(out, "{line}");
    }
}

pub fn write_seed(seed: &SeedFn, k: Option<Weight>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seedfile 1");
    write_gram(&mut out, seed.qs());
    if let Some(k) = k {
        let _ = writeln!(out, "k {}", k.get());
    }
    for (key, value) in seed.entries() {
        let mut line = format!("{}", key.n);
        for c in &key.v {
            let _ = write!(line, " {c}");
        }
        let _ = write!(line, " {}", format_rational(value));
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn parse_seed(text: &str) -> Result<(SeedFn, Option<u32>), FormatError> {
    let lines = significant_lines(text);
    let header = parse_header(&lines, "seedfile")?;
    let qs = quad_space_from_header(&header)?;
    let m = header.m;
    let mut table: BTreeMap<SeedKey, Rational> = BTreeMap::new();
    for (no, tokens) in &lines[header.body_start..] {
        if tokens.len() != m + 2 {
            return Err(FormatError::parse(
                *no,
                format!("expected `n v_1 .. v_{m} value` ({} fields), got {}", m + 2, tokens.len()),
            ));
        }
        let n = parse_i64(tokens[0], *no)?;
        let v: Result<Vec<i64>, _> = tokens[1..1 + m].iter().map(|t| parse_i64(t, *no)).collect();
        let value = parse_rational(tokens[m + 1], *no)?;
        let key = SeedKey::new(n, v?);
        if table.insert(key, value).is_some() {
            return Err(FormatError::parse(*no, "duplicate seed key"));
        }
    }
    Ok((SeedFn::new(qs, table)?, header.k))
}

pub fn write_coeffs(f: &CoeffFn) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "coefffile 1");
    write_gram(&mut out, f.qs());
    let region = f.region();
    let _ = writeln!(out, "region {} {}", region.a_max, region.b_max);
    if let Some(k) = f.weight_hint() {
        let _ = writeln!(out, "k {}", k.get());
    }
    for (x, value) in f.support() {
        let mut line = format!("{}", x.a);
        for c in &x.v {
            let _ = write!(line, " {c}");
        }
        let _ = write!(line, " {} {}", x.b, format_rational(value));
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn parse_coeffs(text: &str) -> Result<CoeffFn, FormatError> {
    let lines = significant_lines(text);
    let header = parse_header(&lines, "coefffile")?;
    let qs = quad_space_from_header(&header)?;
    let m = header.m;
    let Some((a_max, b_max)) = header.region else {
        return Err(FormatError::invariant("missing `region <a_max> <b_max>` header line"));
    };
    if a_max < 0 || b_max < 0 {
        return Err(FormatError::invariant("region bounds must be non-negative"));
    }
    let mut table: BTreeMap<Index, Rational> = BTreeMap::new();
    for (no, tokens) in &lines[header.body_start..] {
        if tokens.len() != m + 3 {
            return Err(FormatError::parse(
                *no,
                format!("expected `a v_1 .. v_{m} b value` ({} fields), got {}", m + 3, tokens.len()),
            ));
        }
        let a = parse_i64(tokens[0], *no)?;
        let v: Result<Vec<i64>, _> = tokens[1..1 + m].iter().map(|t| parse_i64(t, *no)).collect();
        let b = parse_i64(tokens[m + 1], *no)?;
        let value = parse_rational(tokens[m + 2], *no)?;
        let key = Index::new(a, v?, b);
        if table.insert(key, value).is_some() {
            return Err(FormatError::parse(*no, "duplicate coefficient key"));
        }
    }
    let weight = match header.k {
        Some(k) => Some(Weight::new(k).map_err(FormatError::invariant)?),
        None => None,
    };
    Ok(CoeffFn::new(qs, Region::new(a_max, b_max), table, weight)?)
}

/// Parsed embedding file: the declared source Gram matrix and the embedding
/// matrix rows. Validation against a coefficient file happens at the command
/// layer.
pub struct EmbeddingFile {
    pub source_gram: Vec<Vec<i64>>,
    pub matrix: Vec<Vec<i64>>,
    pub target_rank: usize,
}

pub fn parse_embedding(text: &str) -> Result<EmbeddingFile, FormatError> {
    let lines = significant_lines(text);
    let header = parse_header(&lines, "embedding")?;
    if header.body_start != lines.len() {
        let (no, _) = lines[header.body_start];
        return Err(FormatError::parse(no, "embedding files have no record lines"));
    }
    if header.gram.len() != header.m {
        return Err(FormatError::invariant(format!(
            "expected {} Gram rows, found {}",
            header.m,
            header.gram.len()
        )));
    }
    let Some(mprime) = header.mprime else {
        return Err(FormatError::invariant("missing `mprime <rank>` header line"));
    };
    if header.embedding_rows.len() != header.m {
        return Err(FormatError::invariant(format!(
            "expected {} E rows, found {}",
            header.m,
            header.embedding_rows.len()
        )));
    }
    for row in &header.embedding_rows {
        if row.len() != mprime {
            return Err(FormatError::invariant(format!(
                "E rows must have {} entries (mprime)",
                mprime
            )));
        }
    }
    Ok(EmbeddingFile {
        source_gram: header.gram,
        matrix: header.embedding_rows,
        target_rank: mprime,
    })
}

pub fn write_embedding(source_gram: &[Vec<i64>], matrix: &[Vec<i64>], mprime: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "embedding 1");
    let _ = writeln!(out, "m {}", source_gram.len());
    let _ = writeln!(out, "mprime {mprime}");
    for row in source_gram {
        let mut line = String::from("S");
        for e in row {
            let _ = write!(line, " {e}");
        }
        let _ = writeln!(out, "{line}");
    }
    for row in matrix {
        let mut line = String::from("E");
        for e in row {
            let _ = write!(line, " {e}");
        }
        let _ = writeln!(out, "{line}");
    }
    out
}
