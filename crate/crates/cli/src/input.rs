//! CSV ingestion. Lines starting with `#` and blank lines are skipped, and a
//! header row is recognised by a non-numeric value in a selected column.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub struct Source {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Source {
    /// Reads a file, or standard input for `-`.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        if path == Path::new("-") {
            io::stdin()
                .read_to_end(&mut bytes)
                .map_err(|e| CliError::io(path, e))?;
        } else {
            File::open(path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(|e| CliError::io(path, e))?;
        }
        Ok(Self {
            path: path.to_path_buf(),
            bytes,
        })
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }

    fn records(&self) -> Result<Vec<(u64, csv::StringRecord)>> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(self.bytes.as_slice());
        let newlines: Vec<usize> = newline_offsets(&self.bytes);
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| CliError::Parse {
                path: self.path.clone(),
                line: e.position().map_or(0, |p| self.line_at(&newlines, p.byte())),
                msg: e.to_string(),
            })?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let line = rec.position().map_or(0, |p| self.line_at(&newlines, p.byte()));
            out.push((line, rec));
        }
        Ok(out)
    }

    /// 1-based line of the record whose position is `byte`. The reader's own
    /// line count ignores blank lines, and its positions can point at the
    /// blank or comment lines skipped before a record.
    fn line_at(&self, newlines: &[usize], byte: u64) -> u64 {
        let b = &self.bytes;
        let mut i = (byte as usize).min(b.len());
        while i < b.len() {
            match b[i] {
                b'\n' | b'\r' => i += 1,
                b'#' => i += b[i..].iter().position(|&c| c == b'\n').map_or(b.len() - i, |k| k + 1),
                _ => break,
            }
        }
        newlines.partition_point(|&n| n < i) as u64 + 1
    }

    fn parse_error(&self, line: u64, msg: String) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line,
            msg,
        }
    }
}

fn newline_offsets(bytes: &[u8]) -> Vec<usize> {
    bytes
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| (b == b'\n').then_some(i))
        .collect()
}

/// Numeric columns with the source line of each row.
pub struct Columns {
    pub lines: Vec<u64>,
    pub columns: Vec<Vec<f64>>,
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads the selected columns; `None` selects every column of the first row.
/// Negative indices count from the end, so `-1` is the last column.
pub fn read_columns(src: &Source, select: Option<&[isize]>) -> Result<Columns> {
    let records = src.records()?;
    let Some((first_line, first)) = records.first() else {
        return Err(src.parse_error(0, "no data rows".into()));
    };
    let width = first.len();
    let resolve = |i: isize| -> Result<usize> {
        let j = if i < 0 { width as isize + i } else { i };
        if j < 0 || j as usize >= width {
            return Err(src.parse_error(
                *first_line,
                format!("column {i} does not exist in a row of {width} fields"),
            ));
        }
        Ok(j as usize)
    };
    let cols: Vec<usize> = match select {
        Some(s) => s.iter().map(|&i| resolve(i)).collect::<Result<_>>()?,
        None => (0..width).collect(),
    };
    let header = cols
        .iter()
        .any(|&c| parse_number(first.get(c).unwrap_or("")).is_none());

    let mut out = Columns {
        lines: Vec::new(),
        columns: vec![Vec::new(); cols.len()],
    };
    for (line, rec) in records.iter().skip(usize::from(header)) {
        for (k, &c) in cols.iter().enumerate() {
            let field = rec.get(c).ok_or_else(|| {
                src.parse_error(*line, format!("expected at least {} fields, found {}", c + 1, rec.len()))
            })?;
            let v = parse_number(field)
                .ok_or_else(|| src.parse_error(*line, format!("`{field}` is not a finite number")))?;
            out.columns[k].push(v);
        }
        out.lines.push(*line);
    }
    if out.lines.is_empty() {
        return Err(src.parse_error(*first_line, "no data rows".into()));
    }
    Ok(out)
}

/// `ln(v_t / v_{t-1})`, dropping the first observation.
pub fn log_returns(src: &Source, prices: &[f64], lines: &[u64]) -> Result<Vec<f64>> {
    if let Some(i) = prices.iter().position(|&v| v <= 0.0) {
        return Err(CliError::NonPositivePrice {
            path: src.path.clone(),
            line: lines[i],
            value: prices[i],
        });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> Source {
        Source {
            path: PathBuf::from("mem.csv"),
            bytes: text.as_bytes().to_vec(),
        }
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let s = src("# generated\nx,y\n1,2\n\n3.5,-4e-3\n");
        let c = read_columns(&s, None).unwrap();
        assert_eq!(c.columns, vec![vec![1.0, 3.5], vec![2.0, -4e-3]]);
        assert_eq!(c.lines, vec![3, 5]);

        let s = src("1\n2\n3\n");
        assert_eq!(read_columns(&s, Some(&[-1])).unwrap().columns, vec![vec![1.0, 2.0, 3.0]]);
    }

    #[test]
    fn errors_cite_the_line() {
        let s = src("x,y\n1,2\na,b\n");
        match read_columns(&s, None) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{:?}", other.err()),
        }
        assert!(read_columns(&src("1,2\n"), Some(&[5])).is_err());
        assert!(read_columns(&src("# nothing\n"), None).is_err());
    }

    #[test]
    fn dated_prices() {
        let s = src("date,price\n2024-01-02,100\n2024-01-03,110\n2024-01-04,0\n");
        let c = read_columns(&s, Some(&[-1])).unwrap();
        match log_returns(&s, &c.columns[0], &c.lines) {
            Err(CliError::NonPositivePrice { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let r = log_returns(&s, &[100.0, 110.0], &[2, 3]).unwrap();
        assert_eq!(r, vec![(1.1f64).ln()]);
    }
}
