//! The `TNS 1` text format.
//!
//! ```text
//! TNS 1
//! dims: 2 3 4
//! sym
//! 0.1 0.2 ...
//! ```
//!
//! The `sym` line is optional. Values are whitespace separated, row-major.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, SymTensor, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct TnsFile {
    pub tensor: DenseTensor,
    pub symmetric: bool,
}

impl TnsFile {
    /// Validates the payload as a symmetric tensor.
    pub fn into_sym(self, tol: &Tolerances) -> Result<SymTensor> {
        SymTensor::new(self.tensor, tol)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_tns(text: &str) -> Result<TnsFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header != "TNS 1" {
        return Err(parse_err(ln, format!("expected header `TNS 1`, found `{header}`")));
    }

    let (ln, dims_line) = lines
        .next()
        .ok_or_else(|| parse_err(ln + 1, "missing `dims:` line"))?;
    let dims_rest = dims_line
        .strip_prefix("dims:")
        .ok_or_else(|| parse_err(ln, format!("expected `dims:` line, found `{dims_line}`")))?;
    let shape = dims_rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| parse_err(ln, format!("invalid dimension `{tok}`")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut symmetric = false;
    let mut values = Vec::with_capacity(shape.iter().product());
    let mut first_body = true;
    for (ln, line) in lines {
        if first_body && line == "sym" {
            symmetric = true;
            first_body = false;
            continue;
        }
        first_body = false;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(ln, format!("invalid value `{tok}`")))?;
            values.push(v);
        }
    }
    let expected: usize = shape.iter().product();
    if values.len() != expected {
        return Err(Error::ValueCount {
            expected,
            found: values.len(),
        });
    }
    let tensor = DenseTensor::new(shape, values)?;
    Ok(TnsFile { tensor, symmetric })
}

pub fn read_tns<R: BufRead>(mut reader: R) -> Result<TnsFile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_tns(&text)
}

/// Serializes with 17 significant digits so that parsing recovers every bit.
pub fn format_tns(tensor: &DenseTensor, symmetric: bool) -> String {
    let mut out = String::from("TNS 1\ndims:");
    for n in tensor.shape() {
        let _ = write!(out, " {n}");
    }
    out.push('\n');
    if symmetric {
        out.push_str("sym\n");
    }
    let row = *tensor.shape().last().unwrap_or(&1);
    for chunk in tensor.as_slice().chunks(row) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_tns<W: Write>(mut writer: W, tensor: &DenseTensor, symmetric: bool) -> Result<()> {
    writer.write_all(format_tns(tensor, symmetric).as_bytes())?;
    Ok(())
}
