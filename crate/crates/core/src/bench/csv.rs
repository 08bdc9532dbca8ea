use std::fmt::Write as _;
use std::path::Path;

use super::runner::SummaryRow;
use super::TrialRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "method,M,D,snr_db,noise,theta0_deg,theta_hat_deg,abs_err_deg,seed,ok";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header plus one line per record. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.m,
            r.d,
            r.snr_db,
            r.noise,
            r.theta0_deg,
            opt(r.theta_hat_deg),
            opt(r.abs_err_deg),
            r.seed,
            u8::from(r.ok())
        );
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_file(path, &write_csv(records))
}

pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, line)| parse_line(line).map_err(|e| Error::Parse(format!("line {}: {e}", n + 2))))
        .collect()
}

fn parse_line(line: &str) -> std::result::Result<TrialRecord, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 10 {
        return Err(format!("expected 10 fields, got {}", f.len()));
    }
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("bad {what} {s:?}"))
    }
    fn opt_num(s: &str, what: &str) -> std::result::Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, what).map(Some)
        }
    }
    let record = TrialRecord {
        method: f[0].parse().map_err(|e: Error| e.to_string())?,
        m: num(f[1], "M")?,
        d: num(f[2], "D")?,
        snr_db: num(f[3], "snr_db")?,
        noise: f[4].to_string(),
        theta0_deg: num(f[5], "theta0_deg")?,
        theta_hat_deg: opt_num(f[6], "theta_hat_deg")?,
        abs_err_deg: opt_num(f[7], "abs_err_deg")?,
        seed: num(f[8], "seed")?,
    };
    let ok = match f[9] {
        "1" => true,
        "0" => false,
        other => return Err(format!("bad ok flag {other:?}")),
    };
    if ok != record.ok() {
        return Err("ok flag disagrees with the estimate column".into());
    }
    Ok(record)
}

pub fn emit_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let mut out = String::from("method,M,D,snr_db,noise,trials,ok,failed,mean_abs_err_deg\n");
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.method,
            s.m,
            s.d,
            s.snr_db,
            s.noise,
            s.trials,
            s.ok,
            s.failed,
            opt(s.mean_abs_err_deg)
        );
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Method;

    fn record(ok: bool) -> TrialRecord {
        TrialRecord {
            method: Method::R1hL1,
            m: 16,
            d: 8,
            snr_db: -5.0,
            noise: "impulsive".into(),
            theta0_deg: 0.1 + 0.2,
            theta_hat_deg: ok.then_some(1.0 / 3.0),
            abs_err_deg: ok.then_some((1.0f64 / 3.0 - 0.3).abs()),
            seed: u64::MAX,
        }
    }

    #[test]
    fn header_only_for_no_records() {
        assert_eq!(write_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_record_two_lines() {
        assert_eq!(write_csv(&[record(true)]).lines().count(), 2);
    }

    #[test]
    fn round_trip() {
        let records = vec![record(true), record(false)];
        assert_eq!(parse_csv(&write_csv(&records)).unwrap(), records);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_csv("a,b\n").is_err());
        let text = write_csv(&[record(true)]).replace(",1\n", ",0\n");
        assert!(parse_csv(&text).is_err());
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_csv(&[], &blocker.join("out.csv")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
