//! Asset CSV: `index,dist_type,p1,p2,buy_cost,sell_cost,lower,upper`.
//!
//! `p1, p2` are `a, b` for linear, `e, sigma` for normal and `c,` (empty
//! `p2`) for constant distributions.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::model::{validate_specs, AssetSpec};
use crate::uncertainty::UncertainDistribution;

pub const ASSET_HEADER: [&str; 8] = [
    "index",
    "dist_type",
    "p1",
    "p2",
    "buy_cost",
    "sell_cost",
    "lower",
    "upper",
];

pub fn load_assets(path: impl AsRef<Path>) -> Result<Vec<AssetSpec>> {
    let path = path.as_ref();
    parse_assets(File::open(path)?, path)
}

/// Parses asset rows, reporting problems against `origin` and a 1-based line.
pub fn parse_assets(reader: impl Read, origin: &Path) -> Result<Vec<AssetSpec>> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    if header != ASSET_HEADER {
        return Err(err(
            1,
            format!("expected header {}, found {}", ASSET_HEADER.join(","), header.join(",")),
        ));
    }

    let mut by_index: BTreeMap<usize, (usize, AssetSpec)> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != ASSET_HEADER.len() {
            return Err(err(
                line,
                format!("expected {} fields, found {}", ASSET_HEADER.len(), record.len()),
            ));
        }
        let field = |k: usize| record.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            field(k).parse::<f64>().map_err(|_| {
                err(
                    line,
                    format!("column {} is not a number: {:?}", ASSET_HEADER[k], field(k)),
                )
            })
        };
        let index: usize = field(0)
            .parse()
            .map_err(|_| err(line, format!("index is not a nonnegative integer: {:?}", field(0))))?;
        let dist = match field(1).to_ascii_lowercase().as_str() {
            "linear" => UncertainDistribution::Linear { a: num(2)?, b: num(3)? },
            "normal" => UncertainDistribution::Normal {
                e: num(2)?,
                sigma: num(3)?,
            },
            "constant" => {
                if !field(3).is_empty() {
                    return Err(err(line, "constant distributions take no p2".into()));
                }
                UncertainDistribution::Constant { c: num(2)? }
            }
            other => {
                return Err(err(
                    line,
                    format!("unknown dist_type {other:?} (linear, normal, constant)"),
                ))
            }
        };
        let spec = AssetSpec {
            index,
            dist,
            buy_cost: num(4)?,
            sell_cost: num(5)?,
            lower: num(6)?,
            upper: num(7)?,
        };
        spec.validate().map_err(|e| err(line, e.to_string()))?;
        if let Some((first, _)) = by_index.get(&index) {
            return Err(err(line, format!("duplicate index {index} (lines {first} and {line})")));
        }
        by_index.insert(index, (line, spec));
    }

    if !by_index.contains_key(&0) {
        return Err(err(0, "missing risk-free row (index 0)".into()));
    }
    let specs: Vec<AssetSpec> = by_index.into_values().map(|(_, s)| s).collect();
    if let Some((pos, s)) = specs.iter().enumerate().find(|(pos, s)| s.index != *pos) {
        return Err(err(
            0,
            format!(
                "asset indices must be contiguous from 0; index {} found where {pos} was expected",
                s.index
            ),
        ));
    }
    validate_specs(&specs)?;
    Ok(specs)
}

pub fn save_assets(path: impl AsRef<Path>, specs: &[AssetSpec]) -> Result<()> {
    write_assets(File::create(path)?, specs)
}

pub fn write_assets(writer: impl Write, specs: &[AssetSpec]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ASSET_HEADER)?;
    for s in specs {
        let (kind, p1, p2) = match s.dist {
            UncertainDistribution::Linear { a, b } => ("linear", fmt_f64(a), fmt_f64(b)),
            UncertainDistribution::Normal { e, sigma } => ("normal", fmt_f64(e), fmt_f64(sigma)),
            UncertainDistribution::Constant { c } => ("constant", fmt_f64(c), String::new()),
        };
        w.write_record([
            s.index.to_string(),
            kind.to_string(),
            p1,
            p2,
            fmt_f64(s.buy_cost),
            fmt_f64(s.sell_cost),
            fmt_f64(s.lower),
            fmt_f64(s.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fees;

    const HEAD: &str = "index,dist_type,p1,p2,buy_cost,sell_cost,lower,upper\n";

    fn parse(body: &str) -> Result<Vec<AssetSpec>> {
        parse_assets(format!("{HEAD}{body}").as_bytes(), Path::new("assets.csv"))
    }

    #[test]
    fn table_rows_parse() {
        let specs =
            parse("0,constant,0.00056,,0.000726,0.000774,0,1\n1,normal,0.00045,0.02776,0.00486,0.01029,0,1\n").unwrap();
        assert_eq!(specs[0].dist, UncertainDistribution::Constant { c: 0.00056 });
        assert_eq!(specs[0].buy_cost, fees::BOND_BUY);
        assert_eq!(
            specs[1].dist,
            UncertainDistribution::Normal {
                e: 0.00045,
                sigma: 0.02776
            }
        );
        assert_eq!(
            (specs[1].buy_cost, specs[1].sell_cost),
            (fees::STOCK_BUY, fees::STOCK_SELL)
        );
    }

    #[test]
    fn duplicate_index_names_both_lines() {
        let e = parse("0,constant,0.00056,,0,0,0,1\n1,normal,0,0.1,0,0,0,1\n1,normal,0,0.2,0,0,0,1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("lines 3 and 4"), "{msg}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1,normal,0,0.1,0,0,0,1\n", "risk-free"),
            (
                "0,constant,0.00056,,0,0,0,1\n1,linear,0.2,0.1,0,0,0,1\n",
                "assets.csv:3",
            ),
            ("0,constant,0.00056,,0,0,0,1\n1,normal,0,0,0,0,0,1\n", "assets.csv:3"),
            (
                "0,constant,0.00056,,0,0,0,1\n1,normal,zero,0.1,0,0,0,1\n",
                "assets.csv:3",
            ),
            ("0,constant,0.00056,,0,0,0,1\n1,normal,0,0.1,0,0\n", "assets.csv:3"),
            ("0,constant,0.00056,,0,0,0,1\n1,gamma,0,0.1,0,0,0,1\n", "assets.csv:3"),
            ("0,constant,0.00056,,0,0,0,1\n2,normal,0,0.1,0,0,0,1\n", "contiguous"),
        ];
        for (body, needle) in cases {
            let msg = parse(body).unwrap_err().to_string();
            assert!(msg.contains(needle), "{body:?} gave {msg}");
        }
    }

    #[test]
    fn save_then_load_is_identity() {
        let specs = crate::presets::level_assets(3, 10).unwrap();
        let mut buf = Vec::new();
        write_assets(&mut buf, &specs).unwrap();
        assert_eq!(parse_assets(buf.as_slice(), Path::new("x")).unwrap(), specs);
    }
}
