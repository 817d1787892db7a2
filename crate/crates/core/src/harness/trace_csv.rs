//! Trace files.
//!
//! Columns, in order: `k, j, f_j_before, f_j_after, full_f, alpha, mu,
//! fallback_used, elapsed_s, slope`. `full_f` and `mu` are empty when absent,
//! `fallback_used` is `0` or `1`, and reals are written with 17 significant
//! digits so that reading a file back reproduces every value bit-for-bit.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizer::TraceRecord;

pub const TRACE_COLUMNS: [&str; 10] = [
    "k",
    "j",
    "f_j_before",
    "f_j_after",
    "full_f",
    "alpha",
    "mu",
    "fallback_used",
    "elapsed_s",
    "slope",
];

/// Index of the wall-clock column.
pub const ELAPSED_COLUMN: usize = 8;

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn row(r: &TraceRecord) -> [String; 10] {
    [
        r.k.to_string(),
        r.j.to_string(),
        real(r.f_j_before),
        real(r.f_j_after),
        opt_real(r.full_f),
        real(r.alpha),
        opt_real(r.mu),
        if r.fallback_used { "1" } else { "0" }.to_string(),
        real(r.elapsed),
        real(r.slope),
    ]
}

pub fn write_trace<W: Write>(trace: &[TraceRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in trace {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("trace output is ASCII")
}

pub fn write_trace_csv(trace: &[TraceRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(trace, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

pub fn read_trace<R: Read>(input: R, path: &Path) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(Error::format(path, format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |c: usize| Error::format(path, format!("line {line}: bad `{}` value `{}`", TRACE_COLUMNS[c], field(c)));
        let int = |c: usize| field(c).parse::<usize>().map_err(|_| bad(c));
        let num = |c: usize| field(c).parse::<f64>().map_err(|_| bad(c));
        let opt = |c: usize| if field(c).is_empty() { Ok(None) } else { num(c).map(Some) };
        out.push(TraceRecord {
            k: int(0)?,
            j: int(1)?,
            f_j_before: num(2)?,
            f_j_after: num(3)?,
            full_f: opt(4)?,
            alpha: num(5)?,
            mu: opt(6)?,
            fallback_used: match field(7) {
                "0" => false,
                "1" => true,
                _ => return Err(bad(7)),
            },
            elapsed: num(8)?,
            slope: num(9)?,
        });
    }
    Ok(out)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(std::io::BufReader::new(file), path)
}

/// Trace text with the wall-clock column blanked, for reproducibility checks.
pub fn without_elapsed(csv_text: &str) -> String {
    let mut out = String::with_capacity(csv_text.len());
    for line in csv_text.lines() {
        let kept: Vec<&str> = line
            .split(',')
            .enumerate()
            .map(|(i, f)| if i == ELAPSED_COLUMN { "" } else { f })
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize) -> TraceRecord {
        TraceRecord {
            k,
            j: k % 3,
            f_j_before: 1.0 / 3.0,
            f_j_after: -0.1 * k as f64,
            full_f: k.is_multiple_of(2).then_some(std::f64::consts::PI),
            alpha: 0.5f64.powi(k as i32),
            mu: (k > 0).then_some(-1e-300),
            fallback_used: k == 1,
            elapsed: 1e-7 * k as f64,
            slope: -2.0,
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let s = trace_to_string(&[]);
        assert_eq!(s, format!("{}\n", TRACE_COLUMNS.join(",")));
    }

    #[test]
    fn three_records_four_lines_and_round_trip() {
        let trace: Vec<_> = (0..3).map(rec).collect();
        let s = trace_to_string(&trace);
        assert_eq!(s.lines().count(), 4);
        let back = read_trace(s.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(back, trace);
        for (a, b) in back.iter().zip(&trace) {
            assert_eq!(a.f_j_before.to_bits(), b.f_j_before.to_bits());
            assert_eq!(a.mu.map(f64::to_bits), b.mu.map(f64::to_bits));
        }
    }

    #[test]
    fn elapsed_is_blanked() {
        let s = "k,j,a,b,c,d,e,f,elapsed_s,slope\n1,2,3,4,5,6,7,8,9.5,10\n";
        assert_eq!(without_elapsed(s), "k,j,a,b,c,d,e,f,,slope\n1,2,3,4,5,6,7,8,,10\n");
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trace("a,b\n1,2\n".as_bytes(), Path::new("mem")).is_err());
    }
}
