//! Text formats: signal files, ground-truth spec tables and the CSV outputs.
//!
//! Signal files hold one decimal real per line (LF). CSV files carry a header
//! row and print reals with 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{Cluster, PiecewiseSpec, Signal};

/// Formats `x` with 12 significant digits, trailing zeros removed.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("'{}' is not a decimal number", s.trim()),
    })
}

/// Parses a signal file. A first line starting with a letter is taken as a
/// column header and skipped; trailing blank lines are ignored.
pub fn parse_signal(text: &str) -> Result<Signal> {
    let mut values = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |i| i + 1);
    for (i, raw) in lines[..last].iter().enumerate() {
        let s = raw.trim();
        if i == 0 && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && s.parse::<f64>().is_err() {
            continue;
        }
        let v = parse_real(s, i + 1)?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: "value is not finite".into(),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no values".into(),
        });
    }
    Signal::new(values)
}

/// One value per line, printed with the shortest representation that parses
/// back to the same `f64`.
pub fn format_signal(y: &[f64]) -> String {
    let mut out = String::with_capacity(y.len() * 20);
    for v in y {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn read_signal(path: &Path) -> Result<Signal> {
    parse_signal(&fs::read_to_string(path)?)
}

pub fn write_signal(path: &Path, y: &[f64]) -> Result<()> {
    fs::write(path, format_signal(y))?;
    Ok(())
}

const SPEC_HEADER: &str = "cluster_index,level,seg_start,seg_end";

/// `cluster_index,level,seg_start,seg_end` rows, one per segment, in index
/// order. Cluster indices are 1-based.
pub fn format_spec(spec: &PiecewiseSpec) -> String {
    let mut out = String::from(SPEC_HEADER);
    out.push('\n');
    for &(a, b, c) in spec.segments_in_order() {
        let _ = writeln!(
            out,
            "{},{},{a},{b}",
            c + 1,
            format_real(spec.clusters()[c].level)
        );
    }
    out
}

pub fn parse_spec(text: &str) -> Result<PiecewiseSpec> {
    let table = Table::parse(text)?;
    if table.header.join(",") != SPEC_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{SPEC_HEADER}'"),
        });
    }
    let mut clusters: Vec<Option<Cluster>> = Vec::new();
    let mut n = 0;
    for (i, row) in table.rows.iter().enumerate() {
        let line = i + 2;
        let int = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("'{s}' is not a nonnegative integer"),
            })
        };
        let c = int(&row[0])?;
        if c == 0 {
            return Err(Error::Parse {
                line,
                message: "cluster indices start at 1".into(),
            });
        }
        let level = parse_real(&row[1], line)?;
        let (a, b) = (int(&row[2])?, int(&row[3])?);
        if clusters.len() < c {
            clusters.resize(c, None);
        }
        let slot = clusters[c - 1].get_or_insert(Cluster {
            level,
            segments: Vec::new(),
        });
        if slot.level != level {
            return Err(Error::Parse {
                line,
                message: format!("cluster {c} listed with two levels"),
            });
        }
        slot.segments.push((a, b));
        n = n.max(b);
    }
    let clusters = clusters
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::invalid(format!("cluster {} has no segments", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    PiecewiseSpec::new(clusters, n)
}

pub fn read_spec(path: &Path) -> Result<PiecewiseSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

/// A header plus rows of string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, l) in lines {
            let row: Vec<String> = l.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {} fields, found {}", header.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    /// Column `name` parsed as reals.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("no column '{name}'")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| parse_real(&r[j], i + 2))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{example1_spec, EXAMPLE1_DEFAULT_LEVELS};
    use proptest::prelude::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.5), "1.5");
        assert_eq!(format_real(-2.0), "-2");
        assert_eq!(format_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_real(123456.789), "123456.789");
        assert_eq!(format_real(1e-9), "1e-9");
        assert_eq!(format_real(3296.0870934966833), "3296.0870935");
        assert_eq!(format_real(9.9999999999999), "10");
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn signal_parse_errors_carry_line_numbers() {
        assert_eq!(
            parse_signal("1.0\n2.0\nabc\n").unwrap_err(),
            Error::Parse { line: 3, message: "'abc' is not a decimal number".into() }
        );
        assert!(parse_signal("").is_err());
        assert!(matches!(parse_signal("1\nNaN\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn signal_header_is_skipped() {
        let s = parse_signal("fitted\n1\n2.5\n\n").unwrap();
        assert_eq!(s.values(), &[1.0, 2.5]);
    }

    #[test]
    fn spec_table_round_trip() {
        let spec = example1_spec(EXAMPLE1_DEFAULT_LEVELS).unwrap();
        let text = format_spec(&spec);
        assert!(text.starts_with("cluster_index,level,seg_start,seg_end\n"));
        assert_eq!(text.lines().count(), 14);
        let back = parse_spec(&text).unwrap();
        assert_eq!(back.ground_truth(), spec.ground_truth());
        assert_eq!(format_spec(&back), text);
    }

    #[test]
    fn table_rejects_ragged_rows() {
        assert!(matches!(Table::parse("a,b\n1,2\n3\n"), Err(Error::Parse { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn signal_file_round_trips_exactly(v in prop::collection::vec(-1e6f64..1e6, 1..50)) {
            let back = parse_signal(&format_signal(&v)).unwrap();
            prop_assert_eq!(back.values(), &v[..]);
        }

        #[test]
        fn csv_cells_are_stable(v in prop::collection::vec(-1e8f64..1e8, 1..30)) {
            let mut t = Table::new(&["x"]);
            for x in &v {
                t.push(vec![format_real(*x)]);
            }
            let csv = t.to_csv();
            let back = Table::parse(&csv).unwrap();
            prop_assert_eq!(&back, &t);
            for (a, b) in back.column("x").unwrap().iter().zip(&v) {
                prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
                prop_assert_eq!(format_real(*a), format_real(*b));
            }
        }
    }
}
