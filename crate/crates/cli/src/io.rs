use std::fs;
use std::io::Write;
use std::path::Path;

use entropic_map::{CountMatrix, CountVector};

use crate::CliError;

fn parse_number(token: &str, what: &str) -> Result<f64, CliError> {
    let token = token.trim();
    token
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("{what}: cannot parse {token:?} as a number")))
}

/// Parses comma-separated numbers; empty fields are rejected.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(|t| parse_number(t, what)).collect()
}

/// Reads `file` as either one number per line or one comma-separated row.
pub fn parse_counts_file(text: &str) -> Result<Vec<f64>, CliError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    match lines.as_slice() {
        [] => Err(CliError::Input("counts file is empty".into())),
        [row] => parse_list(row, "counts file"),
        many => {
            if many.iter().any(|l| l.contains(',')) {
                return Err(CliError::Input(
                    "counts file must hold one number per line or a single comma-separated row"
                        .into(),
                ));
            }
            many.iter()
                .map(|l| parse_number(l, "counts file"))
                .collect()
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load_counts(inline: Option<&str>, path: Option<&Path>) -> Result<CountVector, CliError> {
    let values = match (inline, path) {
        (Some(text), _) => parse_list(text, "--counts")?,
        (None, Some(path)) => parse_counts_file(&read_text(path)?)?,
        (None, None) => return Err(CliError::Usage("no counts given".into())),
    };
    Ok(CountVector::new(values)?)
}

/// Shape comment written ahead of generated matrices. Lines starting with `#` are ignored
/// when reading, except that a shape comment lets a zero-column matrix keep its row count.
fn shape_header(features: usize, columns: usize) -> String {
    format!("# features={features} columns={columns}")
}

fn parse_shape_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?.trim();
    let mut features = None;
    let mut columns = None;
    for field in rest.split_whitespace() {
        match field.split_once('=')? {
            ("features", v) => features = v.parse().ok(),
            ("columns", v) => columns = v.parse().ok(),
            _ => return None,
        }
    }
    Some((features?, columns?))
}

pub fn parse_matrix(text: &str) -> Result<CountMatrix, CliError> {
    let mut shape = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if shape.is_none() {
                shape = parse_shape_header(line);
            }
            continue;
        }
        rows.push(parse_list(line, &format!("matrix line {}", n + 1))?);
    }
    match shape {
        Some((features, 0)) if rows.is_empty() => {
            Ok(CountMatrix::from_rows(vec![Vec::new(); features])?)
        }
        Some((features, columns)) if rows.len() != features || rows[0].len() != columns => {
            Err(CliError::Input(format!(
                "matrix header promises {features}x{columns}, body is {}x{}",
                rows.len(),
                rows.first().map_or(0, Vec::len)
            )))
        }
        _ => Ok(CountMatrix::from_rows(rows)?),
    }
}

pub fn format_matrix(matrix: &CountMatrix) -> String {
    let mut out = shape_header(matrix.features(), matrix.columns());
    out.push('\n');
    if matrix.columns() > 0 {
        for row in matrix.rows() {
            let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Writes `contents` to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(path) => write_file(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("cannot write to standard output: {e}")))
        }
    }
}
