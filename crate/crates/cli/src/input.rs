//! Reading univariate samples from text or CSV.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use crate::error::CliError;

fn open(path: &Path) -> Result<Box<dyn Read>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin()));
    }
    let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(file))
}

fn parse_value(text: &str, line: usize) -> Result<f64, CliError> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Parse { line, message: format!("expected a finite number, found {text:?}") }),
    }
}

/// One value per line; blank lines and everything after `#` are ignored.
pub fn read_lines<R: Read>(input: R) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        let text = line.split('#').next().unwrap_or("").trim();
        if !text.is_empty() {
            values.push(parse_value(text, i + 1)?);
        }
    }
    Ok(values)
}

/// The named column of a headed CSV file, or the zero-based column index
/// when `column` is an integer that is not itself a header.
pub fn read_csv_column<R: Read>(input: R, column: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| CliError::Parse { line: 1, message: e.to_string() })?.clone();
    let index = match headers.iter().position(|h| h == column) {
        Some(i) => i,
        None => match column.parse::<usize>() {
            Ok(i) if i < headers.len() => i,
            _ => return Err(CliError::Usage(format!("no column {column:?} in header {:?}", headers.iter().collect::<Vec<_>>()))),
        },
    };
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        match record.get(index) {
            Some("") | None => continue,
            Some(text) => values.push(parse_value(text, line)?),
        }
    }
    Ok(values)
}

pub fn read_sample(path: &Path, csv_column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let input = open(path)?;
    match csv_column {
        Some(col) => read_csv_column(input, col),
        None => read_lines(input),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# header\n1.5\n\n  -2 # trailing\n3e-1\n";
        assert_eq!(read_lines(text.as_bytes()).unwrap(), vec![1.5, -2.0, 0.3]);
    }

    #[test]
    fn bad_line_reports_its_number() {
        match read_lines("1\n2\nabc\n".as_bytes()) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_lines("1\nNaN\n".as_bytes()), Err(CliError::Parse { line: 2, .. })));
        assert!(matches!(read_lines("inf\n".as_bytes()), Err(CliError::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_column_by_name_or_index() {
        let text = "id,x\n1,0.5\n2,0.25\n";
        assert_eq!(read_csv_column(text.as_bytes(), "x").unwrap(), vec![0.5, 0.25]);
        assert_eq!(read_csv_column(text.as_bytes(), "0").unwrap(), vec![1.0, 2.0]);
        assert!(matches!(read_csv_column(text.as_bytes(), "y"), Err(CliError::Usage(_))));
        assert!(matches!(read_csv_column("x\n1\nz\n".as_bytes(), "x"), Err(CliError::Parse { line: 3, .. })));
    }
}
