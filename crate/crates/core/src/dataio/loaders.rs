use std::collections::BTreeSet;
use std::path::Path;

use chrono::NaiveDate;

use super::FrameTable;
use crate::error::{Error, Result};
use crate::ndcore::Tensor;

/// Header of the Beijing PM2.5 hourly file.
pub const PM25_COLUMNS: [&str; 13] = [
    "No", "year", "month", "day", "hour", "pm2.5", "DEWP", "TEMP", "PRES", "cbwd", "Iws", "Is",
    "Ir",
];

/// Header of the Jena 10-minute weather file.
pub const JENA_COLUMNS: [&str; 15] = [
    "Date Time",
    "p (mbar)",
    "T (degC)",
    "Tpot (K)",
    "Tdew (degC)",
    "rh (%)",
    "VPmax (mbar)",
    "VPact (mbar)",
    "VPdef (mbar)",
    "sh (g/kg)",
    "H2OC (mmol/mol)",
    "rho (g/m**3)",
    "wv (m/s)",
    "max. wv (m/s)",
    "wd (deg)",
];

const JENA_STRIDE: usize = 6;

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Maps each expected column to its position in the file header.
fn locate_columns(
    reader: &mut csv::Reader<std::fs::File>,
    expected: &[&str],
) -> Result<Vec<usize>> {
    let header = reader
        .headers()
        .map_err(|e| Error::Format(format!("cannot read header: {e}")))?
        .clone();
    expected
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
        })
        .collect()
}

fn row_err(line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        line: line as usize,
        message: message.into(),
    }
}

fn parse_num(rec: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| row_err(line, format!("cannot parse `{raw}` in column `{name}`")))
}

/// Drops rows whose timestamp does not advance past the previous kept row.
fn keep_increasing(rows: Vec<(i64, Vec<f64>)>) -> Vec<(i64, Vec<f64>)> {
    let mut out: Vec<(i64, Vec<f64>)> = Vec::with_capacity(rows.len());
    for row in rows {
        if out.last().is_none_or(|last| row.0 > last.0) {
            out.push(row);
        }
    }
    out
}

fn into_frame(rows: Vec<(i64, Vec<f64>)>, names: Vec<String>, target: usize) -> Result<FrameTable> {
    let t = rows.len();
    let f = names.len();
    let mut stamps = Vec::with_capacity(t);
    let mut data = Vec::with_capacity(t * f);
    for (ts, values) in rows {
        stamps.push(ts);
        data.extend(values);
    }
    FrameTable::new(stamps, Tensor::new(vec![t, f], data)?, names, target)
}

/// Loads the PM2.5 file as an hourly table of 8 features with `pm2.5` as
/// target. Missing `pm2.5` values are forward-filled; rows before the first
/// observed value are dropped. Wind direction is label-encoded by sorted
/// label order.
pub fn load_pm25(path: impl AsRef<Path>) -> Result<FrameTable> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let cols = locate_columns(&mut reader, &PM25_COLUMNS)?;
    let col = |name: &str| {
        cols[PM25_COLUMNS
            .iter()
            .position(|c| *c == name)
            .expect("known column")]
    };

    struct Raw {
        line: u64,
        ts: i64,
        pm: Option<f64>,
        nums: [f64; 6],
        wind: String,
    }

    let mut raws = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let int = |name: &str| -> Result<i64> {
            let raw = rec.get(col(name)).unwrap_or("");
            raw.parse::<i64>()
                .map_err(|_| row_err(line, format!("cannot parse `{raw}` in column `{name}`")))
        };
        let (y, mo, d, h) = (int("year")?, int("month")?, int("day")?, int("hour")?);
        let ts = NaiveDate::from_ymd_opt(y as i32, mo as u32, d as u32)
            .and_then(|date| date.and_hms_opt(h as u32, 0, 0))
            .ok_or_else(|| row_err(line, format!("invalid date {y}-{mo}-{d} {h}:00")))?
            .and_utc()
            .timestamp();
        let pm_raw = rec.get(col("pm2.5")).unwrap_or("");
        let pm = if pm_raw == "NA" || pm_raw.is_empty() {
            None
        } else {
            Some(parse_num(&rec, col("pm2.5"), "pm2.5", line)?)
        };
        let mut nums = [0.0; 6];
        for (slot, name) in nums
            .iter_mut()
            .zip(["DEWP", "TEMP", "PRES", "Iws", "Is", "Ir"])
        {
            *slot = parse_num(&rec, col(name), name, line)?;
        }
        let wind = rec.get(col("cbwd")).unwrap_or("").to_string();
        if wind.is_empty() || wind == "NA" {
            return Err(row_err(line, "missing wind direction"));
        }
        raws.push(Raw {
            line,
            ts,
            pm,
            nums,
            wind,
        });
    }

    let labels: Vec<String> = raws
        .iter()
        .map(|r| r.wind.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rows = Vec::with_capacity(raws.len());
    let mut last_pm: Option<f64> = None;
    let mut last_ts: Option<(i64, u64)> = None;
    for r in raws {
        if let Some((prev, prev_line)) = last_ts {
            if r.ts <= prev {
                return Err(row_err(
                    r.line,
                    format!("timestamp does not follow line {prev_line}"),
                ));
            }
        }
        last_ts = Some((r.ts, r.line));
        let pm = match r.pm.or(last_pm) {
            Some(v) => v,
            None => continue,
        };
        last_pm = Some(pm);
        let code = labels
            .iter()
            .position(|l| *l == r.wind)
            .expect("label collected") as f64;
        let [dewp, temp, pres, iws, is, ir] = r.nums;
        rows.push((r.ts, vec![pm, dewp, temp, pres, code, iws, is, ir]));
    }
    let names = ["pm2.5", "DEWP", "TEMP", "PRES", "cbwd", "Iws", "Is", "Ir"]
        .map(String::from)
        .to_vec();
    into_frame(rows, names, 0)
}

/// Loads the 10-minute weather file keeping every sixth row (hourly), with
/// air pressure as target. Retained rows whose timestamp does not advance
/// are dropped.
pub fn load_jena(path: impl AsRef<Path>) -> Result<FrameTable> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let cols = locate_columns(&mut reader, &JENA_COLUMNS)?;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        if k % JENA_STRIDE != 0 {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        let raw_ts = rec.get(cols[0]).unwrap_or("");
        let ts = chrono::NaiveDateTime::parse_from_str(raw_ts, "%d.%m.%Y %H:%M:%S")
            .map_err(|_| row_err(line, format!("cannot parse timestamp `{raw_ts}`")))?
            .and_utc()
            .timestamp();
        let values = cols[1..]
            .iter()
            .zip(&JENA_COLUMNS[1..])
            .map(|(&c, name)| parse_num(&rec, c, name, line))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((ts, values));
    }
    let names = JENA_COLUMNS[1..].iter().map(|s| s.to_string()).collect();
    into_frame(keep_increasing(rows), names, 0)
}
