//! File formats: sample CSVs, marker lists, and the exported artefacts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! written here and read back reproduces every sample bit for bit.

use crate::num::Num;
use std::fs;
use std::path::Path;

use crate::cardiac::RPeaks;
use crate::dsp::IirFilter;
use crate::eeg::EegRecording;
use crate::error::{Error, Result};
use crate::pupil::GappySeries;
use crate::signal::{EventMarkers, UniformSeries};
use crate::synth::SyntheticSession;

/// Spacing tolerance for `t_sec`, in seconds.
pub const TIME_TOLERANCE: f64 = 1e-6;

/// Columns of a `t_sec,<label>...` file. Missing values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub start_time: f64,
    pub dt: f64,
    pub labels: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_value(field: &str, allow_missing: bool) -> Option<f64> {
    let f = field.trim();
    if allow_missing && (f.is_empty() || f.eq_ignore_ascii_case("nan")) {
        return Some(f64::NAN);
    }
    f.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a sample CSV. With `allow_missing`, empty fields and `nan` become NaN.
pub fn read_sample_csv(path: &Path, allow_missing: bool) -> Result<SampleTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            other => parse_err(path, 1, format!("{other:?}")),
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("t_sec") {
        return Err(parse_err(path, 1, "first column must be `t_sec`"));
    }
    if headers.len() < 2 {
        return Err(parse_err(path, 1, "no data columns"));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); labels.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != labels.len() + 1 {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", labels.len() + 1, rec.len()),
            ));
        }
        let t = parse_value(&rec[0], false)
            .ok_or_else(|| parse_err(path, line, format!("bad time value `{}`", &rec[0])))?;
        times.push((t, line));
        for (c, col) in columns.iter_mut().enumerate() {
            let v = parse_value(&rec[c + 1], allow_missing).ok_or_else(|| {
                parse_err(
                    path,
                    line,
                    format!("bad value `{}` in column `{}`", &rec[c + 1], labels[c]),
                )
            })?;
            col.push(v);
        }
    }
    if times.len() < 2 {
        return Err(parse_err(path, 1, "need at least two samples"));
    }
    let t0 = times[0].0;
    let dt = (times[times.len() - 1].0 - t0) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(parse_err(path, times[1].1, "`t_sec` must be strictly increasing"));
    }
    for (i, &(t, line)) in times.iter().enumerate() {
        if (t - (t0 + i as f64 * dt)).abs() > TIME_TOLERANCE {
            return Err(parse_err(
                path,
                line,
                format!("`t_sec` {t} breaks uniform spacing of {dt} s"),
            ));
        }
    }
    Ok(SampleTable {
        start_time: t0,
        dt,
        labels,
        columns,
    })
}

pub fn read_eeg_csv(path: &Path) -> Result<EegRecording> {
    let t = read_sample_csv(path, false)?;
    let channels = t
        .labels
        .iter()
        .zip(t.columns)
        .map(|(l, c)| Ok(UniformSeries::new(t.start_time, t.dt, c)?.with_label(l.as_str())))
        .collect::<Result<Vec<_>>>()?;
    EegRecording::new(channels)
}

fn single_column(path: &Path, t: SampleTable, name: &str) -> Result<(f64, f64, Vec<f64>)> {
    let idx = match t.labels.iter().position(|l| l == name) {
        Some(i) => i,
        None if t.labels.len() == 1 => 0,
        None => return Err(parse_err(path, 1, format!("no `{name}` column"))),
    };
    let SampleTable {
        start_time,
        dt,
        mut columns,
        ..
    } = t;
    Ok((start_time, dt, columns.swap_remove(idx)))
}

/// `t_sec,pupil`; empty fields and `nan` are missing.
pub fn read_pupil_csv(path: &Path) -> Result<GappySeries> {
    let t = read_sample_csv(path, true)?;
    let (t0, dt, v) = single_column(path, t, "pupil")?;
    GappySeries::from_raw(t0, dt, v)
}

/// `t_sec,ecg`.
pub fn read_ecg_csv(path: &Path) -> Result<UniformSeries> {
    let t = read_sample_csv(path, false)?;
    let (t0, dt, v) = single_column(path, t, "ecg")?;
    Ok(UniformSeries::new(t0, dt, v)?.with_label("ecg"))
}

/// One time in seconds per line; blank lines and `#` comments are skipped.
pub fn parse_markers(text: &str, path: &Path) -> Result<EventMarkers> {
    let mut times: Vec<f64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ln = i as u64 + 1;
        let t = parse_value(line, false)
            .ok_or_else(|| parse_err(path, ln, format!("bad marker time `{line}`")))?;
        if times.last().is_some_and(|&p| t < p) {
            return Err(parse_err(path, ln, "marker times must be sorted"));
        }
        times.push(t);
    }
    EventMarkers::new(times)
}

pub fn read_markers(path: &Path) -> Result<EventMarkers> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_markers(&text, path)
}

pub fn markers_to_text(m: &EventMarkers) -> String {
    m.times().iter().map(|t| format!("{t}\n")).collect()
}

fn fmt_value(v: f64) -> String {
    Num(v).to_string()
}

/// `t_sec,<label>...` for series sharing one grid.
pub fn series_to_csv(series: &[&UniformSeries]) -> Result<String> {
    let first = series.first().ok_or_else(|| Error::invalid("nothing to write"))?;
    if series.iter().any(|s| s.len() != first.len()) {
        return Err(Error::invalid("series lengths differ"));
    }
    let mut out = String::from("t_sec");
    for s in series {
        out.push(',');
        out.push_str(s.label());
    }
    out.push('\n');
    for i in 0..first.len() {
        out.push_str(&fmt_value(first.time_at(i)));
        for s in series {
            out.push(',');
            out.push_str(&fmt_value(s.samples()[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn eeg_to_csv(rec: &EegRecording) -> Result<String> {
    series_to_csv(&rec.channels().iter().collect::<Vec<_>>())
}

/// `t_sec,pupil` with missing samples as `nan`.
pub fn pupil_to_csv(g: &GappySeries) -> String {
    let mut out = String::from("t_sec,pupil\n");
    for (i, v) in g.values_with_nan().iter().enumerate() {
        out.push_str(&format!(
            "{},{}\n",
            fmt_value(g.start_time + i as f64 * g.dt),
            fmt_value(*v)
        ));
    }
    out
}

/// Kind, order, cutoffs and second-order sections.
pub fn filter_to_json(f: &IirFilter) -> Result<String> {
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "kind": f.kind,
        "order": f.order,
        "cutoffs_hz": f.cutoffs_hz,
        "sample_rate_hz": f.sample_rate_hz,
        "sections": f.sections.iter().map(|s| serde_json::json!({"b": s.b, "a": s.a})).collect::<Vec<_>>(),
    }))?)
}

pub fn peaks_to_text(p: &RPeaks) -> String {
    p.to_text()
}

/// One named numeric column of any CSV with a header row; `nan` is accepted.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            other => parse_err(path, 1, format!("{other:?}")),
        })?;
    let idx = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| parse_err(path, 1, format!("no `{column}` column")))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| parse_err(path, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = rec.get(idx).unwrap_or("");
        out.push(
            parse_value(field, true)
                .ok_or_else(|| parse_err(path, line, format!("bad value `{field}` in column `{column}`")))?,
        );
    }
    Ok(out)
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e.to_string()))
}

/// File names written by [`write_session`].
pub const SESSION_FILES: [&str; 5] = ["eeg.csv", "pupil.csv", "ecg.csv", "triggers.txt", "truth.json"];

/// Writes `eeg.csv`, `pupil.csv`, `ecg.csv`, `triggers.txt` and `truth.json`.
pub fn write_session(dir: &Path, s: &SyntheticSession) -> Result<()> {
    write_text(&dir.join("eeg.csv"), &eeg_to_csv(&s.eeg)?)?;
    write_text(&dir.join("pupil.csv"), &pupil_to_csv(&s.pupil))?;
    write_text(&dir.join("ecg.csv"), &series_to_csv(&[&s.ecg])?)?;
    write_text(&dir.join("triggers.txt"), &markers_to_text(&s.triggers))?;
    write_json(&dir.join("truth.json"), &s.truth)
}
