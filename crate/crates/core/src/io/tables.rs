//! CSV writers for frontiers, price series, wealth paths and summaries.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::backtest::{PriceSeries, SummaryRow, WealthPath};
use crate::error::{Error, Result};
use crate::frontier::FrontierPoint;
use crate::io::fmt_f64;

fn weight_headers(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}{i}"))
}

/// `lambda,achieved_net_return,risk,w0..wn`
pub fn write_frontier(writer: impl Write, points: &[FrontierPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let n = points.first().map_or(0, |p| p.weights.len());
    let mut header = vec!["lambda".to_string(), "achieved_net_return".into(), "risk".into()];
    header.extend(weight_headers("w", n));
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![fmt_f64(p.lambda), fmt_f64(p.achieved_net_return), fmt_f64(p.risk)];
        row.extend(p.weights.as_slice().iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `date,r0..rn` with ISO dates.
pub fn write_series(writer: impl Write, series: &PriceSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(weight_headers("r", series.n_assets()));
    w.write_record(&header)?;
    for (d, r) in series.dates.iter().zip(&series.returns) {
        let mut row = vec![d.to_string()];
        row.extend(r.iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_series(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    parse_series(File::open(path)?, path)
}

pub fn parse_series(reader: impl Read, origin: &Path) -> Result<PriceSeries> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 3 {
        return Err(err(
            1,
            "series needs a date column and at least two return columns".into(),
        ));
    }
    let mut dates = Vec::new();
    let mut returns = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(err(line, format!("expected {width} fields, found {}", record.len())));
        }
        let date: NaiveDate = record[0]
            .parse()
            .map_err(|_| err(line, format!("not an ISO-8601 date: {:?}", &record[0])))?;
        let row = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|_| err(line, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        dates.push(date);
        returns.push(row);
    }
    PriceSeries::new(dates, returns).map_err(|e| err(0, e.to_string()))
}

/// `date,wealth_start,wealth,cost,cumulative_cost,exposure,w0..wn`; `wealth`
/// is the value at the end of the row's period.
pub fn write_wealth_path(writer: impl Write, path: &WealthPath) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let n = path.records.first().map_or(0, |r| r.weights.len());
    let mut header: Vec<String> = ["date", "wealth_start", "wealth", "cost", "cumulative_cost", "exposure"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(weight_headers("w", n));
    w.write_record(&header)?;
    for r in &path.records {
        let mut row = vec![
            r.date.to_string(),
            fmt_f64(r.wealth_start),
            fmt_f64(r.wealth),
            fmt_f64(r.cost),
            fmt_f64(r.cumulative_cost),
            r.exposure.map(fmt_f64).unwrap_or_default(),
        ];
        row.extend(r.weights.iter().map(|&v| fmt_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(writer: impl Write, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "strategy",
        "terminal_wealth",
        "min_wealth",
        "total_cost",
        "max_drawdown",
    ])?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            fmt_f64(r.terminal_wealth),
            fmt_f64(r.min_wealth),
            fmt_f64(r.total_cost),
            fmt_f64(r.max_drawdown),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Header plus rows of already formatted cells.
pub fn write_rows(writer: impl Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
