use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{PanelDataset, PanelObservation};

pub const PANEL_CSV_HEADER: [&str; 10] = [
    "unit_id",
    "period",
    "outcome",
    "treated",
    "post",
    "age_years",
    "cluster_id",
    "popular_unit",
    "popular_artist",
    "dose_decile",
];

fn parse_flag(v: &str, col: &str, row: usize) -> Result<bool> {
    match v.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::Data(format!("row {row}: column `{col}` expects 0/1, got `{other}`"))),
    }
}

fn parse_num<N: std::str::FromStr>(v: &str, col: &str, row: usize) -> Result<N> {
    v.trim()
        .parse()
        .map_err(|_| Error::Data(format!("row {row}: column `{col}` cannot parse `{v}`")))
}

/// Read a long-format panel CSV (UTF-8, header row). Column order is free;
/// every column of [`PANEL_CSV_HEADER`] must be present. An empty
/// `dose_decile` cell means "not measured". Without an explicit policy
/// period the earliest period flagged `post` is used.
pub fn read_panel_csv<T: Scalar, R: Read>(
    reader: R,
    policy_period: Option<i64>,
    allow_unbalanced: bool,
) -> Result<PanelDataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 10];
    for (k, name) in PANEL_CSV_HEADER.iter().enumerate() {
        idx[k] = headers
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| Error::MissingColumn((*name).to_string()))?;
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let get = |k: usize| rec.get(idx[k]).unwrap_or("");
        let outcome: f64 = parse_num(get(2), "outcome", row)?;
        let dose = get(9).trim();
        rows.push(PanelObservation {
            unit_id: get(0).to_string(),
            period: parse_num(get(1), "period", row)?,
            outcome: T::lit(outcome),
            treated: parse_flag(get(3), "treated", row)?,
            post: parse_flag(get(4), "post", row)?,
            age_years: parse_num(get(5), "age_years", row)?,
            cluster_id: get(6).to_string(),
            popular_unit: parse_flag(get(7), "popular_unit", row)?,
            popular_artist: parse_flag(get(8), "popular_artist", row)?,
            dose_decile: if dose.is_empty() {
                None
            } else {
                Some(parse_num(dose, "dose_decile", row)?)
            },
        });
    }
    let policy_period = match policy_period {
        Some(p) => p,
        None => rows
            .iter()
            .filter(|o| o.post)
            .map(|o| o.period)
            .min()
            .ok_or_else(|| Error::Data("no row has post = 1; cannot infer the policy period".into()))?,
    };
    PanelDataset::new(rows, policy_period, allow_unbalanced)
}

pub fn write_panel_csv<T: Scalar, W: Write>(ds: &PanelDataset<T>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PANEL_CSV_HEADER)?;
    for o in ds.observations() {
        w.write_record([
            o.unit_id.clone(),
            o.period.to_string(),
            // shortest round-trip representation
            format!("{:?}", o.outcome.to_f64_lossy()),
            (o.treated as u8).to_string(),
            (o.post as u8).to_string(),
            o.age_years.to_string(),
            o.cluster_id.clone(),
            (o.popular_unit as u8).to_string(),
            (o.popular_artist as u8).to_string(),
            o.dose_decile.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "unit_id,period,outcome,treated,post,age_years,cluster_id,popular_unit,popular_artist,dose_decile
a,0,10,1,0,3,a,1,0,2
a,1,12.5,1,1,3,a,1,0,7
b,0,4,0,0,5,b,0,1,
b,1,4,0,1,5,b,0,1,
";

    #[test]
    fn reads_and_round_trips() {
        let ds: PanelDataset<f64> = read_panel_csv(CSV.as_bytes(), Some(1), false).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.observations()[1].dose_decile, Some(7));
        assert_eq!(ds.observations()[2].dose_decile, None);
        let mut buf = Vec::new();
        write_panel_csv(&ds, &mut buf).unwrap();
        let again: PanelDataset<f64> = read_panel_csv(buf.as_slice(), None, false).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn missing_column_is_named() {
        let bad = CSV.replacen("age_years", "age", 1);
        let err = read_panel_csv::<f64, _>(bad.as_bytes(), Some(1), false).unwrap_err();
        match err {
            Error::MissingColumn(c) => assert_eq!(c, "age_years"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_flag_is_data_error() {
        let bad = CSV.replacen("a,0,10,1,0", "a,0,10,yes,0", 1);
        assert!(matches!(read_panel_csv::<f64, _>(bad.as_bytes(), Some(1), false), Err(Error::Data(_))));
    }
}
