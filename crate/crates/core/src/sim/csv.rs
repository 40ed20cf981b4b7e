//! Per-step log in CSV form.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use super::{SimResult, StepRecord};

pub const CSV_HEADER: [&str; 11] = [
    "step",
    "t",
    "x",
    "y",
    "u",
    "u_d",
    "p",
    "norm_F",
    "krylov_residual",
    "iterations",
    "rebuilt",
];

/// Plain decimal with at least 17 significant digits, enough to round-trip
/// any `f64`.
fn decimal(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return format!("{:.16}", v);
    }
    let exp = v.abs().log10().floor() as i32;
    // log10 may land on the wrong side of a power of ten; one spare digit.
    let decimals = (17 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

fn to_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Writes the log to any sink.
pub fn write_csv_to<W: Write>(result: &SimResult, sink: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(sink);
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for r in &result.records {
        w.write_record([
            r.step.to_string(),
            decimal(r.t),
            decimal(r.x),
            decimal(r.y),
            decimal(r.u),
            decimal(r.u_d),
            decimal(r.p),
            decimal(r.norm_f),
            decimal(r.krylov_residual),
            r.iterations.to_string(),
            u8::from(r.rebuilt).to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush()
}

pub fn write_csv(result: &SimResult, path: &Path) -> io::Result<()> {
    let with_path = |e: io::Error| io::Error::new(e.kind(), format!("{}: {e}", path.display()));
    let file = File::create(path).map_err(with_path)?;
    write_csv_to(result, BufWriter::new(file)).map_err(with_path)
}

/// Parses a log written by [`write_csv_to`].
pub fn read_csv<R: Read>(source: R) -> io::Result<Vec<StepRecord>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut rd = csv::Reader::from_reader(source);
    let header = rd.headers().map_err(to_io)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header: {header:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(to_io)?;
        let f = |i: usize| -> io::Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("record {}: field {}: {e}", line + 1, CSV_HEADER[i])))
        };
        let n = |i: usize| -> io::Result<usize> {
            rec[i]
                .parse::<usize>()
                .map_err(|e| bad(format!("record {}: field {}: {e}", line + 1, CSV_HEADER[i])))
        };
        out.push(StepRecord {
            step: n(0)?,
            t: f(1)?,
            x: f(2)?,
            y: f(3)?,
            u: f(4)?,
            u_d: f(5)?,
            p: f(6)?,
            norm_f: f(7)?,
            krylov_residual: f(8)?,
            iterations: n(9)?,
            rebuilt: n(10)? != 0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn result(records: Vec<StepRecord>) -> SimResult {
        SimResult::from_records(records, 33)
    }

    fn record(step: usize, v: f64) -> StepRecord {
        StepRecord {
            step,
            t: step as f64 * 0.02,
            x: v,
            y: -v,
            u: 0.8,
            u_d: 0.1,
            p: 1.0 / 3.0,
            norm_f: 1e-7,
            krylov_residual: 0.5,
            iterations: 10,
            rebuilt: step == 0,
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_csv_to(&result(vec![]), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,t,x,y,u,u_d,p,norm_F,krylov_residual,iterations,rebuilt\n"
        );
    }

    #[test]
    fn one_record_two_lines() {
        let mut buf = Vec::new();
        write_csv_to(&result(vec![record(0, 0.25)]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n'));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,0.0000000000000000,0.250000000000000000,"));
        assert!(!lines[1].contains('e'));
    }

    #[test]
    fn decimal_has_enough_digits() {
        for v in [0.02, 1.0, 123.456, 1e-9, 7.0e5] {
            let s = decimal(v);
            let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
            assert!(digits.trim_start_matches('0').len() >= 12, "{v} -> {s}");
            assert!(!s.contains('e'));
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            vals in prop::collection::vec(
                (-1e6f64..1e6, 1e-300f64..1e3, any::<bool>(), 0usize..50), 0..20)
        ) {
            let recs: Vec<_> = vals
                .iter()
                .enumerate()
                .map(|(i, &(a, b, flag, it))| StepRecord {
                    step: i,
                    t: a,
                    x: b,
                    y: -a * b,
                    u: a / 7.0,
                    u_d: b.sqrt(),
                    p: 1.0 / (1.0 + b),
                    norm_f: b,
                    krylov_residual: a.abs(),
                    iterations: it,
                    rebuilt: flag,
                })
                .collect();
            let mut buf = Vec::new();
            write_csv_to(&result(recs.clone()), &mut buf).unwrap();
            let back = read_csv(&buf[..]).unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
