//! Loading, aligning and scaling the two quarterly series.
//!
//! Input files are plain CSV with a header row, an ISO `YYYY-MM-DD` date
//! column and one numeric value column. Dates must fall on the first day of
//! a quarter (Jan 1, Apr 1, Jul 1, Oct 1).

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SwapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuarterIndex {
    pub year: i32,
    pub quarter: u8,
}

impl QuarterIndex {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(SwapError::DomainError(format!("quarter {quarter} not in 1..=4")));
        }
        Ok(Self { year, quarter })
    }

    /// Maps a quarter-start date onto its quarter. Any other day is rejected.
    pub fn from_date(date: NaiveDate) -> Option<Self> {
        if date.day() != 1 || !(date.month() - 1).is_multiple_of(3) {
            return None;
        }
        Some(Self { year: date.year(), quarter: ((date.month() - 1) / 3 + 1) as u8 })
    }

    pub fn start_date(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, u32::from(self.quarter - 1) * 3 + 1, 1)
            .expect("quarter start is a valid date")
    }

    pub fn succ(self) -> Self {
        if self.quarter == 4 {
            Self { year: self.year + 1, quarter: 1 }
        } else {
            Self { year: self.year, quarter: self.quarter + 1 }
        }
    }

    /// Quarters elapsed since year 0 Q1; handy for distances between indices.
    pub fn ordinal(self) -> i64 {
        i64::from(self.year) * 4 + i64::from(self.quarter) - 1
    }

    /// Fractional year of the quarter start, e.g. 1966Q3 -> 1966.5.
    pub fn as_year_fraction(self) -> f64 {
        f64::from(self.year) + f64::from(self.quarter - 1) / 4.0
    }
}

impl fmt::Display for QuarterIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for QuarterIndex {
    type Err = SwapError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SwapError::DomainError(format!("bad quarter label {s:?}"));
        let (y, q) = s.split_once('Q').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let quarter = q.parse().map_err(|_| bad())?;
        Self::new(year, quarter)
    }
}

impl Serialize for QuarterIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuarterIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    pub points: Vec<(QuarterIndex, f64)>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Aligned bivariate sample. `x` plays the GDP role, `y` the public-debt role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub index: Vec<QuarterIndex>,
    pub scale_applied: f64,
}

impl SeriesPair {
    /// Builds a pair from plain vectors, labelling observations with
    /// consecutive quarters from `start`.
    pub fn from_vecs(x: Vec<f64>, y: Vec<f64>, start: QuarterIndex) -> Result<Self> {
        if x.len() != y.len() {
            return Err(SwapError::LengthMismatch(x.len(), y.len()));
        }
        let index = std::iter::successors(Some(start), |q| Some(q.succ())).take(x.len()).collect();
        Ok(Self { x, y, index, scale_applied: 1.0 })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_range(&self) -> (f64, f64) {
        min_max(&self.x)
    }

    pub fn y_range(&self) -> (f64, f64) {
        min_max(&self.y)
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
}

/// Reads one series from a CSV file.
pub fn load_series_csv(path: impl AsRef<Path>, date_column: &str, value_column: &str) -> Result<RawSeries> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(SwapError::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|_| SwapError::FileNotFound(path.to_path_buf()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_series(file, &name, date_column, value_column)
}

/// Parses CSV content from any reader. Row numbers in errors are 1-based
/// data rows (the header is row 0).
pub fn parse_series<R: std::io::Read>(
    reader: R,
    name: &str,
    date_column: &str,
    value_column: &str,
) -> Result<RawSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| SwapError::ParseError { row: 0, reason: e.to_string() })?.clone();
    let column = |label: &str| {
        headers
            .iter()
            .position(|h| h == label)
            .ok_or_else(|| SwapError::ParseError { row: 0, reason: format!("missing column {label:?}") })
    };
    let date_idx = column(date_column)?;
    let value_idx = column(value_column)?;

    let mut points = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| SwapError::ParseError { row, reason: e.to_string() })?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(date_idx), "%Y-%m-%d")
            .map_err(|e| SwapError::ParseError { row, reason: format!("date {:?}: {e}", field(date_idx)) })?;
        let quarter = QuarterIndex::from_date(date).ok_or_else(|| SwapError::ParseError {
            row,
            reason: format!("{date} is not the first day of a quarter"),
        })?;
        let raw = field(value_idx);
        let value: f64 =
            raw.parse().map_err(|_| SwapError::ParseError { row, reason: format!("value {raw:?} is not a number") })?;
        if !value.is_finite() {
            return Err(SwapError::NonFiniteValue(row));
        }
        if !seen.insert(quarter) {
            return Err(SwapError::DuplicateQuarter(quarter));
        }
        points.push((quarter, value));
    }
    points.sort_by_key(|p| p.0);
    Ok(RawSeries { name: name.to_owned(), points })
}

/// Keeps the quarters present in both series; `a` becomes `x`, `b` becomes `y`.
pub fn align_pair(a: &RawSeries, b: &RawSeries) -> Result<SeriesPair> {
    let b_lookup: std::collections::HashMap<QuarterIndex, f64> = b.points.iter().copied().collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut index = Vec::new();
    for &(q, va) in &a.points {
        if let Some(&vb) = b_lookup.get(&q) {
            index.push(q);
            x.push(va);
            y.push(vb);
        }
    }
    if index.is_empty() {
        return Err(SwapError::EmptyIntersection);
    }
    Ok(SeriesPair { x, y, index, scale_applied: 1.0 })
}

pub fn scale_pair(p: &SeriesPair, factor: f64) -> Result<SeriesPair> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(SwapError::NonPositiveFactor(factor));
    }
    Ok(SeriesPair {
        x: p.x.iter().map(|v| v * factor).collect(),
        y: p.y.iter().map(|v| v * factor).collect(),
        index: p.index.clone(),
        scale_applied: p.scale_applied * factor,
    })
}

/// Serializes a raw series back to the CSV layout accepted by [`parse_series`].
pub fn write_series_csv<W: std::io::Write>(
    writer: W,
    date_column: &str,
    value_column: &str,
    points: impl IntoIterator<Item = (QuarterIndex, f64)>,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([date_column, value_column])?;
    for (q, v) in points {
        w.write_record([q.start_date().format("%Y-%m-%d").to_string(), format!("{v}")])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(y: i32, n: u8) -> QuarterIndex {
        QuarterIndex::new(y, n).unwrap()
    }

    fn series(start: QuarterIndex, vals: &[f64]) -> RawSeries {
        let points = std::iter::successors(Some(start), |q| Some(q.succ())).zip(vals.iter().copied()).collect();
        RawSeries { name: "s".into(), points }
    }

    #[test]
    fn three_rows_map_to_quarters() {
        let csv = "DATE,V\n1966-01-01,1.0\n1966-04-01,2.0\n1966-07-01,3.5\n";
        let s = parse_series(csv.as_bytes(), "t", "DATE", "V").unwrap();
        let idx: Vec<_> = s.points.iter().map(|p| p.0).collect();
        assert_eq!(idx, vec![q(1966, 1), q(1966, 2), q(1966, 3)]);
        assert_eq!(s.values(), vec![1.0, 2.0, 3.5]);
    }

    #[test]
    fn nan_is_rejected() {
        let csv = "DATE,V\n1966-01-01,1.0\n1966-04-01,NaN\n";
        assert_eq!(parse_series(csv.as_bytes(), "t", "DATE", "V"), Err(SwapError::NonFiniteValue(2)));
    }

    #[test]
    fn mid_quarter_date_is_parse_error() {
        let csv = "DATE,V\n1966-02-01,1.0\n";
        assert!(matches!(parse_series(csv.as_bytes(), "t", "DATE", "V"), Err(SwapError::ParseError { row: 1, .. })));
        let csv = "DATE,V\n1966-01-15,1.0\n";
        assert!(matches!(parse_series(csv.as_bytes(), "t", "DATE", "V"), Err(SwapError::ParseError { .. })));
    }

    #[test]
    fn duplicate_quarter_rejected() {
        let csv = "DATE,V\n1966-01-01,1.0\n1966-01-01,2.0\n";
        assert_eq!(parse_series(csv.as_bytes(), "t", "DATE", "V"), Err(SwapError::DuplicateQuarter(q(1966, 1))));
    }

    #[test]
    fn missing_column_and_file() {
        let csv = "DATE,V\n1966-01-01,1.0\n";
        assert!(matches!(parse_series(csv.as_bytes(), "t", "DATE", "W"), Err(SwapError::ParseError { row: 0, .. })));
        assert!(matches!(load_series_csv("/nonexistent/file.csv", "DATE", "V"), Err(SwapError::FileNotFound(_))));
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let csv = "DATE,V\n1966-04-01,2.0\n1966-01-01,1.0\n";
        let s = parse_series(csv.as_bytes(), "t", "DATE", "V").unwrap();
        assert_eq!(s.values(), vec![1.0, 2.0]);
    }

    #[test]
    fn align_intersects() {
        let a = series(q(1966, 1), &(0..229).map(f64::from).collect::<Vec<_>>());
        let b = series(q(1970, 1), &(0..213).map(f64::from).collect::<Vec<_>>());
        let p = align_pair(&a, &b).unwrap();
        assert_eq!(p.index.first(), Some(&q(1970, 1)));
        assert_eq!(p.index.last(), Some(&q(2023, 1)));
        assert_eq!(p.len(), 213);
        assert_eq!(p.x[0], 16.0);
        assert_eq!(p.y[0], 0.0);

        let same = align_pair(&a, &a).unwrap();
        assert_eq!(same.len(), a.len());

        let c = series(q(2030, 1), &[1.0]);
        assert_eq!(align_pair(&a, &c), Err(SwapError::EmptyIntersection));
    }

    #[test]
    fn scaling() {
        let a = series(q(1966, 1), &[1.0, 2.0, 3.0]);
        let p = align_pair(&a, &a).unwrap();
        assert_eq!(scale_pair(&p, 1.0).unwrap(), p);
        assert_eq!(scale_pair(&p, 0.0), Err(SwapError::NonPositiveFactor(0.0)));
        assert!(scale_pair(&p, -1.0).is_err());
        let s = scale_pair(&p, 1e-6).unwrap();
        assert_eq!(s.scale_applied, 1e-6);
        assert_eq!(s.x[2], 3e-6);
    }

    #[test]
    fn quarter_label_roundtrip() {
        let x = q(2023, 1);
        assert_eq!(x.to_string(), "2023Q1");
        assert_eq!("2023Q1".parse::<QuarterIndex>().unwrap(), x);
        assert!("2023Q5".parse::<QuarterIndex>().is_err());
        assert_eq!(q(1966, 4).succ(), q(1967, 1));
        assert!(q(1966, 4) < q(1967, 1));
    }

    #[test]
    fn csv_writer_roundtrip() {
        let pts = vec![(q(1966, 1), 1.5), (q(1966, 2), 2.25)];
        let mut buf = Vec::new();
        write_series_csv(&mut buf, "DATE", "V", pts.clone()).unwrap();
        let s = parse_series(buf.as_slice(), "t", "DATE", "V").unwrap();
        assert_eq!(s.points, pts);
    }

    proptest::proptest! {
        #[test]
        fn scaling_composes(a in 1e-3f64..1e3, b in 1e-3f64..1e3, vals in proptest::collection::vec(0.0f64..1e6, 2..20)) {
            // (v*a)*b and v*(a*b) can differ in the last bit
            let s = series(q(1966, 1), &vals);
            let p = align_pair(&s, &s).unwrap();
            let two = scale_pair(&scale_pair(&p, a).unwrap(), b).unwrap();
            let one = scale_pair(&p, a * b).unwrap();
            for (u, v) in two.x.iter().zip(&one.x) {
                proptest::prop_assert!((u - v).abs() <= 4.0 * f64::EPSILON * v.abs());
            }
        }
    }
}
