//! CSV emission with reproducibility headers.
//!
//! Every CSV opens with `#`-prefixed comment lines embedding the canonical
//! configuration and a content hash of the inputs, so a result file is
//! self-describing: re-running the embedded config with the same seeds
//! reproduces the file byte for byte. Floats are written with Rust's
//! shortest-round-trip formatting, which is deterministic.
//!
//! Column contracts:
//!
//! * sync series: `t,err_L2,err_H1,err_c1,err_c2,err_c3,energy_ref,energy_da,cond1,cond2`
//! * diagnostics: `t,energy,enstrophy,H1_hom,H2_hom,G,prop2_flag,prop3_flag`
//! * sweep map:   `mu,h,verdict,rate,err_initial,err_final,cond1,cond2,failure`

use crate::assimilation::{CellVerdict, SweepCell, SyncSeries};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Standard comment header: tool line, content hash, canonical config.
pub fn reproducibility_header(kind: &str, canonical_config: &str, hash: &str) -> Vec<String> {
    let mut lines = vec![
        format!("# adas {kind} v1"),
        format!("# input_sha256: {hash}"),
        "# config:".to_string(),
    ];
    for line in canonical_config.lines() {
        lines.push(format!("#   {line}"));
    }
    lines
}

fn open(path: &Path, header: &[String]) -> Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    for line in header {
        writeln!(w, "{line}")?;
    }
    Ok(w)
}

pub fn write_sync_csv(path: &Path, header: &[String], series: &SyncSeries) -> Result<()> {
    let mut w = open(path, header)?;
    writeln!(
        w,
        "t,err_L2,err_H1,err_c1,err_c2,err_c3,energy_ref,energy_da,cond1,cond2"
    )?;
    for i in 0..series.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            series.times[i],
            series.err_l2[i],
            series.err_h1[i],
            series.err_comp[0][i],
            series.err_comp[1][i],
            series.err_comp[2][i],
            series.energy_ref[i],
            series.energy_da[i],
            series.cond1 as u8,
            series.cond2 as u8,
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diag_csv(path: &Path, header: &[String], records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = open(path, header)?;
    writeln!(w, "t,energy,enstrophy,H1_hom,H2_hom,G,prop2_flag,prop3_flag")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.energy,
            r.enstrophy,
            r.h1_hom,
            r.h2_hom,
            r.grashof,
            r.prop2_flag as u8,
            r.prop3_flag as u8,
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, header: &[String], cells: &[SweepCell]) -> Result<()> {
    let mut w = open(path, header)?;
    writeln!(w, "mu,h,verdict,rate,err_initial,err_final,cond1,cond2,failure")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.mu,
            c.h,
            c.verdict.name(),
            c.rate.map_or(String::new(), |r| r.to_string()),
            c.err_initial,
            c.err_final,
            c.cond1 as u8,
            c.cond2 as u8,
            c.failure.as_deref().unwrap_or(""),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a sweep CSV back (comment lines skipped); used by calibration.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepCell>> {
    let text = std::fs::read_to_string(path)?;
    let mut cells = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if !line.starts_with("mu,") {
                return Err(Error::ConfigParse(format!(
                    "not a sweep CSV: unexpected header '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 8 {
            return Err(Error::ConfigParse(format!("short sweep row: '{line}'")));
        }
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::ConfigParse(format!("bad {name} value '{s}'")))
        };
        let verdict = match fields[2] {
            "floor" => CellVerdict::Floor,
            "converged" => CellVerdict::Converged,
            "not_converged" => CellVerdict::NotConverged,
            "diverged" => CellVerdict::Diverged,
            other => {
                return Err(Error::ConfigParse(format!("unknown verdict '{other}'")));
            }
        };
        cells.push(SweepCell {
            mu: parse_f(fields[0], "mu")?,
            h: parse_f(fields[1], "h")?,
            verdict,
            rate: if fields[3].is_empty() {
                None
            } else {
                Some(parse_f(fields[3], "rate")?)
            },
            err_initial: parse_f(fields[4], "err_initial")?,
            err_final: parse_f(fields[5], "err_final")?,
            cond1: fields[6] == "1",
            cond2: fields[7] == "1",
            failure: fields.get(8).and_then(|s| {
                if s.is_empty() {
                    None
                } else {
                    Some(s.to_string())
                }
            }),
        });
    }
    if !saw_header {
        return Err(Error::ConfigParse("empty sweep CSV".into()));
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_series() -> SyncSeries {
        let mut s = SyncSeries {
            cond1: true,
            cond2: false,
            ..SyncSeries::default()
        };
        for i in 0..5 {
            let t = i as f64 * 0.25;
            s.times.push(t);
            s.err_l2.push((-t).exp());
            s.err_h1.push(2.0 * (-t).exp());
            for c in 0..3 {
                s.err_comp[c].push((-t).exp() / (c + 1) as f64);
            }
            s.energy_ref.push(1.0);
            s.energy_da.push(0.9);
        }
        s
    }

    #[test]
    fn sync_csv_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let header = reproducibility_header("twin", "a = 1\nb = 2", "deadbeef");
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        let series = sample_series();
        write_sync_csv(&p1, &header, &series).unwrap();
        write_sync_csv(&p2, &header, &series).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2);
        let text = String::from_utf8(b1).unwrap();
        assert!(text.starts_with("# adas twin v1\n# input_sha256: deadbeef\n"));
        assert!(text.contains("#   a = 1"));
        assert!(text.contains("t,err_L2,err_H1"));
    }

    #[test]
    fn sweep_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let cells = vec![
            SweepCell {
                mu: 0.0,
                h: 0.25,
                verdict: CellVerdict::NotConverged,
                rate: None,
                err_initial: 1.0,
                err_final: 0.8,
                cond1: false,
                cond2: true,
                failure: None,
            },
            SweepCell {
                mu: 8.0,
                h: 0.125,
                verdict: CellVerdict::Floor,
                rate: Some(1.25),
                err_initial: 1.0,
                err_final: 1e-10,
                cond1: true,
                cond2: true,
                failure: None,
            },
        ];
        let header = reproducibility_header("sweep", "x = 1", "cafe");
        write_sweep_csv(&path, &header, &cells).unwrap();
        let back = read_sweep_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].verdict, CellVerdict::NotConverged);
        assert_eq!(back[1].rate, Some(1.25));
        assert_eq!(back[1].verdict, CellVerdict::Floor);
        assert!(back[1].cond1 && back[1].cond2);
    }
}
