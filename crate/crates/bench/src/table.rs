//! Flat result records and their CSV / JSON encodings.
//!
//! Every experiment reduces to rows with the same columns. Floats are
//! written with 10 significant digits; a missing value is an empty field in
//! CSV and `null` in JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use qse_core::{Distribution, Summary};

use crate::error::{BenchError, Result};
use crate::studies::{IqrCell, MethodCell, OptimumCell, QuantileCell};
use crate::sweep::{BiasCurve, Cell};

pub const COLUMNS: [&str; 15] = [
    "spec",
    "method",
    "n_s",
    "grid_value",
    "rep_count",
    "fail_count",
    "mean",
    "median",
    "q25",
    "q75",
    "p2_5",
    "p97_5",
    "std",
    "percent_bias",
    "abs_error",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub spec: String,
    pub method: String,
    /// Sample size; 0 where no sample is involved.
    pub n_s: usize,
    pub grid_value: f64,
    pub rep_count: usize,
    pub fail_count: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
    pub p2_5: Option<f64>,
    pub p97_5: Option<f64>,
    pub std: Option<f64>,
    pub percent_bias: Option<f64>,
    pub abs_error: Option<f64>,
}

pub fn spec_label(spec: &Distribution) -> String {
    spec.family().to_string()
}

fn round10(v: f64) -> f64 {
    format_float(v).parse().expect("formatted float parses")
}

fn format_float(v: f64) -> String {
    format!("{v:.9e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl Record {
    fn blank(spec: String, method: String, n_s: usize, grid_value: f64) -> Self {
        Self {
            spec,
            method,
            n_s,
            grid_value,
            rep_count: 0,
            fail_count: 0,
            mean: None,
            median: None,
            q25: None,
            q75: None,
            p2_5: None,
            p97_5: None,
            std: None,
            percent_bias: None,
            abs_error: None,
        }
    }

    fn with_stats(mut self, stats: Option<Summary>) -> Self {
        if let Some(s) = stats {
            self.mean = Some(s.mean);
            self.median = Some(s.median);
            self.q25 = Some(s.q25);
            self.q75 = Some(s.q75);
            self.p2_5 = Some(s.p2_5);
            self.p97_5 = Some(s.p97_5);
            self.std = Some(s.std);
        }
        self
    }

    /// A single exact value (no sampling): every location statistic equals
    /// it and the spread is zero.
    pub fn exact(spec: &str, method: &str, grid_value: f64, value: f64, truth: Option<f64>) -> Self {
        let mut r = Self::blank(spec.into(), method.into(), 0, grid_value);
        r.rep_count = 1;
        for slot in [&mut r.mean, &mut r.median, &mut r.q25, &mut r.q75, &mut r.p2_5, &mut r.p97_5] {
            *slot = Some(value);
        }
        r.std = Some(0.0);
        if let Some(t) = truth {
            r.abs_error = Some(value - t);
            if t.abs() >= crate::sweep::MIN_RELATIVE_TRUTH {
                r.percent_bias = Some(100.0 * (value - t) / t);
            }
        }
        r
    }

    pub fn from_cell(spec: &Distribution, method: &str, cell: &Cell) -> Self {
        let mut r = Self::blank(spec_label(spec), method.into(), cell.n_s, cell.grid_value).with_stats(cell.stats);
        r.rep_count = cell.rep_count;
        r.fail_count = cell.fail_count;
        r.percent_bias = cell.percent_bias;
        r.abs_error = cell.abs_error;
        r
    }

    /// Optimum rows carry the median optimum as `grid_value`.
    pub fn from_optimum(spec: &Distribution, method: &str, cell: &OptimumCell) -> Self {
        let grid = cell.stats.map(|s| s.median).unwrap_or(0.0);
        let mut r = Self::blank(spec_label(spec), method.into(), cell.n_s, grid).with_stats(cell.stats);
        r.rep_count = cell.rep_count;
        r.fail_count = cell.fail_count;
        r
    }

    pub fn from_iqr(spec: &Distribution, alpha: f64, cell: &IqrCell) -> Self {
        let mut r = Self::blank(spec_label(spec), "qs:iqr-ratio".into(), cell.n_s, alpha).with_stats(cell.stats);
        r.rep_count = cell.rep_count;
        r.fail_count = cell.fail_count;
        r
    }

    /// Quantile rows: `method` names the probability and `N_K`,
    /// `grid_value` is `N_Z`, and the statistics are percent errors.
    pub fn from_quantile(spec: &Distribution, cell: &QuantileCell) -> Self {
        let method = format!("qs:p{}:nk{}", cell.probability, cell.n_subsamples);
        let mut r = Self::blank(spec_label(spec), method, 0, cell.n_quantiles as f64).with_stats(Some(cell.stats));
        r.rep_count = cell.rep_count;
        r.percent_bias = Some(cell.stats.mean);
        r.abs_error = Some(cell.stats.mean * cell.true_quantile / 100.0);
        r
    }

    pub fn from_method_cell(mc: &MethodCell) -> Self {
        Self::from_cell(&mc.spec, mc.method.label(), &mc.cell)
    }

    /// The record as it reads back after a write.
    pub fn rounded(&self) -> Self {
        let r = |v: Option<f64>| v.map(round10);
        Self {
            spec: self.spec.clone(),
            method: self.method.clone(),
            n_s: self.n_s,
            grid_value: round10(self.grid_value),
            rep_count: self.rep_count,
            fail_count: self.fail_count,
            mean: r(self.mean),
            median: r(self.median),
            q25: r(self.q25),
            q75: r(self.q75),
            p2_5: r(self.p2_5),
            p97_5: r(self.p97_5),
            std: r(self.std),
            percent_bias: r(self.percent_bias),
            abs_error: r(self.abs_error),
        }
    }

    fn fields(&self) -> [String; 15] {
        [
            self.spec.clone(),
            self.method.clone(),
            self.n_s.to_string(),
            format_float(self.grid_value),
            self.rep_count.to_string(),
            self.fail_count.to_string(),
            format_opt(self.mean),
            format_opt(self.median),
            format_opt(self.q25),
            format_opt(self.q75),
            format_opt(self.p2_5),
            format_opt(self.p97_5),
            format_opt(self.std),
            format_opt(self.percent_bias),
            format_opt(self.abs_error),
        ]
    }
}

pub fn curve_records(curve: &BiasCurve) -> Vec<Record> {
    curve.cells.iter().map(|c| Record::from_cell(&curve.spec, curve.method.label(), c)).collect()
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != COLUMNS {
        return Err(BenchError::Table(format!("unexpected header {header:?}")));
    }
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_json<W: Write>(records: &[Record], mut out: W) -> Result<()> {
    let rounded: Vec<Record> = records.iter().map(Record::rounded).collect();
    serde_json::to_writer_pretty(&mut out, &rounded)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<Record>> {
    Ok(serde_json::from_reader(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<Record> {
        let mut a = Record::exact("gaussian", "qs", 30.0, 1.0123456789123, Some(1.0));
        a.n_s = 0;
        let mut b = Record::blank("mixture".into(), "kd".into(), 100, 2.0 / 3.0);
        b.fail_count = 200;
        b.percent_bias = Some(-1.0 / 3.0);
        vec![a, b]
    }

    #[test]
    fn csv_round_trips_at_printed_precision() {
        let records = sample_records();
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("spec,method,n_s,grid_value,"));
        assert!(text.contains("6.666666667e-1"));
        let back = read_csv(&buf[..]).unwrap();
        let expect: Vec<Record> = records.iter().map(Record::rounded).collect();
        assert_eq!(back, expect);
    }

    #[test]
    fn json_mirrors_csv() {
        let records = sample_records();
        let mut buf = Vec::new();
        write_json(&records, &mut buf).unwrap();
        let back = read_json(&buf[..]).unwrap();
        assert_eq!(back, records.iter().map(Record::rounded).collect::<Vec<_>>());
    }

    #[test]
    fn header_is_checked() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.333333333e-1");
        assert_eq!(format_float(-12345.678901234), "-1.234567890e4");
        assert_eq!(round10(2.0 / 3.0), 0.6666666667);
    }
}
