use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "experiment",
    "nu",
    "tau",
    "n_points",
    "N",
    "T",
    "err_L2",
    "err_B0inf1",
    "err_B0inf2",
    "picard_mean_iters",
    "stability_flag",
    "wall_seconds",
];

/// One experiment cell. Error columns are `None` for a failed cell, whose
/// `note` then carries the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub nu: f64,
    pub tau: f64,
    pub n_points: usize,
    pub truncation: usize,
    pub horizon: f64,
    pub err_l2: Option<f64>,
    pub err_b0inf1: Option<f64>,
    pub err_b0inf2: Option<f64>,
    pub picard_mean_iters: Option<f64>,
    pub stability_flag: Option<bool>,
    pub wall_seconds: f64,
    pub note: Option<String>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.note.is_some()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows with the fixed header; a trailing `note` column appears only
/// when at least one row failed.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let with_note = rows.iter().any(ResultRow::failed);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_note {
        header.push("note");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.experiment.clone(),
            r.nu.to_string(),
            r.tau.to_string(),
            r.n_points.to_string(),
            r.truncation.to_string(),
            r.horizon.to_string(),
            opt(r.err_l2),
            opt(r.err_b0inf1),
            opt(r.err_b0inf2),
            opt(r.picard_mean_iters),
            r.stability_flag.map(|f| if f { "1" } else { "0" }.to_string()).unwrap_or_default(),
            r.wall_seconds.to_string(),
        ];
        if with_note {
            rec.push(r.note.clone().unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn schema(msg: String) -> Error {
    Error::Data(msg)
}

fn field(rec: &csv::StringRecord, i: usize) -> Result<&str> {
    rec.get(i)
        .ok_or_else(|| schema(format!("missing column {}", CSV_HEADER.get(i).unwrap_or(&"note"))))
}

fn num(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = field(rec, i)?;
    s.parse()
        .map_err(|_| schema(format!("column {} holds non-numeric value {s:?}", CSV_HEADER[i])))
}

fn opt_num(rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    if field(rec, i)?.is_empty() {
        Ok(None)
    } else {
        num(rec, i).map(Some)
    }
}

fn count(rec: &csv::StringRecord, i: usize) -> Result<usize> {
    let s = field(rec, i)?;
    s.parse()
        .map_err(|_| schema(format!("column {} holds non-integer value {s:?}", CSV_HEADER[i])))
}

/// Parses CSV text produced by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| schema(format!("unreadable header: {e}")))?
        .clone();
    let with_note = header.len() == CSV_HEADER.len() + 1 && header.get(CSV_HEADER.len()) == Some("note");
    for (i, name) in CSV_HEADER.iter().enumerate() {
        if header.get(i) != Some(name) {
            return Err(schema(format!(
                "header column {i} is {:?}, expected {name:?}",
                header.get(i).unwrap_or("")
            )));
        }
    }
    if header.len() != CSV_HEADER.len() && !with_note {
        return Err(schema(format!("unexpected header width {}", header.len())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| schema(format!("malformed record: {e}")))?;
        let flag = match field(&rec, 10)? {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(schema(format!("column stability_flag holds {other:?}"))),
        };
        let note = if with_note {
            Some(field(&rec, 12)?.to_string()).filter(|s| !s.is_empty())
        } else {
            None
        };
        rows.push(ResultRow {
            experiment: field(&rec, 0)?.to_string(),
            nu: num(&rec, 1)?,
            tau: num(&rec, 2)?,
            n_points: count(&rec, 3)?,
            truncation: count(&rec, 4)?,
            horizon: num(&rec, 5)?,
            err_l2: opt_num(&rec, 6)?,
            err_b0inf1: opt_num(&rec, 7)?,
            err_b0inf2: opt_num(&rec, 8)?,
            picard_mean_iters: opt_num(&rec, 9)?,
            stability_flag: flag,
            wall_seconds: num(&rec, 11)?,
            note,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: "converge".into(),
            nu: 1e-5,
            tau: 0.01 / 32.0,
            n_points: 64,
            truncation: 21,
            horizon: 2.0,
            err_l2: Some(0.1 + 0.2),
            err_b0inf1: Some(1.7608e-3),
            err_b0inf2: Some(1.3148941e-3),
            picard_mean_iters: Some(2.0),
            stability_flag: Some(false),
            wall_seconds: 0.125,
            note: None,
        }
    }

    fn emit(rows: &[ResultRow]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_for_empty_rows() {
        assert_eq!(emit(&[]), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn one_row_two_lines() {
        let text = emit(&[row()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(text.ends_with('\n'));
        assert!(lines.iter().all(|l| l.split(',').count() == 12));
        assert!(lines[1].contains("0.30000000000000004"));
    }

    #[test]
    fn failed_row_adds_note_column() {
        let mut bad = row();
        bad.err_l2 = None;
        bad.err_b0inf1 = None;
        bad.err_b0inf2 = None;
        bad.stability_flag = None;
        bad.note = Some("picard iteration did not converge, last residual 1e-3".into());
        let text = emit(&[row(), bad.clone()]);
        assert!(text.lines().next().unwrap().ends_with(",note"));
        let back = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(back, vec![row(), bad]);
    }

    #[test]
    fn rejects_wrong_header() {
        let text = emit(&[row()]).replacen("err_L2", "err_l2", 1);
        let err = parse_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("err_L2"));
    }

    #[test]
    fn unwritable_path_reports_context() {
        let p = Path::new("/nonexistent-dir/out.csv");
        let err = emit_csv(&[], p).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
