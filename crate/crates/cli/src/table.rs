//! CSV point lists and results.
//!
//! Input points: at least three numeric columns `x1,x2,x3`; extra columns are
//! ignored, so an `eval-points` result can be fed back in. A first row that is
//! not numeric is taken as a header. Lines starting with `#` are skipped.
//!
//! `eval-points` writes `x1,x2,x3,re,im,rho`; `tube` writes
//! `x1,x2,x3,rho,level`. Numbers are written so that they read back exactly.

use std::io::{Read, Write};

use num_complex::Complex64;

use fourier3::tube::TubePointCloud;

use crate::error::{CliError, Result};

pub fn read_points<R: Read>(input: R, name: &str) -> Result<Vec<[f64; 3]>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let bad = |record: u64, message: String| CliError::Csv {
            path: name.to_string(),
            record,
            message,
        };
        let record = record.map_err(|e| bad(i as u64 + 1, e.to_string()))?;
        let row = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() < 3 {
            return Err(bad(row, format!("expected 3 coordinates, found {} field(s)", record.len())));
        }
        let parsed: std::result::Result<Vec<f64>, _> = (0..3).map(|d| record[d].parse::<f64>()).collect();
        match parsed {
            Ok(x) => {
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(bad(row, format!("non-finite coordinate in {x:?}")));
                }
                points.push([x[0], x[1], x[2]]);
            }
            Err(_) if i == 0 => continue,
            Err(_) => return Err(bad(row, format!("cannot parse `{}` as numbers", record.iter().collect::<Vec<_>>().join(",")))),
        }
    }
    Ok(points)
}

/// Shortest text that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Csv {
        path: "output".into(),
        record: 0,
        message: e.to_string(),
    }
}

pub fn write_values<W: Write>(out: W, points: &[[f64; 3]], values: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "x3", "re", "im", "rho"]).map_err(csv_error)?;
    for (x, v) in points.iter().zip(values) {
        w.write_record([num(x[0]), num(x[1]), num(x[2]), num(v.re), num(v.im), num(v.norm_sqr())])
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| csv_error(e.into()))
}

pub fn write_cloud<W: Write>(out: W, cloud: &TubePointCloud) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "x3", "rho", "level"]).map_err(csv_error)?;
    for ((x, r), l) in cloud.points.iter().zip(&cloud.rho).zip(&cloud.level) {
        w.write_record([num(x[0]), num(x[1]), num(x[2]), num(*r), l.to_string()]).map_err(csv_error)?;
    }
    w.flush().map_err(|e| csv_error(e.into()))
}

/// Reads a file written by [`write_cloud`].
pub fn read_cloud<R: Read>(input: R) -> Result<TubePointCloud> {
    let mut reader = csv::Reader::from_reader(input);
    let mut cloud = TubePointCloud::default();
    for (i, record) in reader.records().enumerate() {
        let bad = |message: String| CliError::Csv {
            path: "cloud".into(),
            record: i as u64 + 2,
            message,
        };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", record.len())));
        }
        let f = |d: usize| record[d].parse::<f64>().map_err(|_| bad(format!("bad number `{}`", &record[d])));
        cloud.points.push([f(0)?, f(1)?, f(2)?]);
        cloud.rho.push(f(3)?);
        cloud.level.push(record[4].parse().map_err(|_| bad(format!("bad level `{}`", &record[4])))?);
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_read_back_exactly() {
        for x in [0.0, -0.0, 1.0, 0.1 + 0.2, 1e-300, -3.5e-5, 1e20, f64::MAX, 1.0 / 3.0, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn points_with_header_comments_and_extra_columns() {
        let text = "x1,x2,x3\n# note\n1, 2, 3\n0.5,-1e-3,4,9,9\n";
        let pts = read_points(text.as_bytes(), "p.csv").unwrap();
        assert_eq!(pts, vec![[1.0, 2.0, 3.0], [0.5, -1e-3, 4.0]]);
        assert!(read_points("".as_bytes(), "p.csv").unwrap().is_empty());
    }

    #[test]
    fn malformed_points_are_reported_with_their_line() {
        let err = read_points("1,2,3\n4,5\n".as_bytes(), "p.csv").unwrap_err();
        assert!(matches!(err, CliError::Csv { record: 2, .. }), "{err}");
        let err = read_points("1,2,3\n4,x,6\n".as_bytes(), "p.csv").unwrap_err();
        assert!(matches!(err, CliError::Csv { record: 2, .. }), "{err}");
        assert!(read_points("1,2,nan\n".as_bytes(), "p.csv").is_err());
    }

    #[test]
    fn cloud_round_trips() {
        let cloud = TubePointCloud {
            points: vec![[0.1, -2.0, 1e-7], [3.0, 4.0, 5.0]],
            rho: vec![1e-5, 0.04],
            level: vec![2, 1],
        };
        let mut buf = Vec::new();
        write_cloud(&mut buf, &cloud).unwrap();
        assert!(buf.starts_with(b"x1,x2,x3,rho,level\n"));
        assert_eq!(read_cloud(buf.as_slice()).unwrap(), cloud);
    }
}
