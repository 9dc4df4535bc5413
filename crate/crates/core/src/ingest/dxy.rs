//! Parser for the DXY repository's area-record JSON.
//!
//! Each record carries `provinceName`, optional `countryName` /
//! `countryEnglishName`, the cumulative `confirmedCount`, `curedCount` and
//! `deadCount`, an epoch-millisecond `updateTime`, and optionally a nested
//! `cities` array with `cityName` and the same counts.

use chrono::{DateTime, Utc};
use serde_json::{Map, Value};

use crate::canonical::RawRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DxyParse {
    pub rows: Vec<RawRow>,
    /// Records (area or city) dropped for a missing mandatory field.
    pub skipped: usize,
}

pub fn parse_dxy_json(data: &[u8]) -> Result<DxyParse> {
    let doc: Value =
        serde_json::from_slice(data).map_err(|e| Error::Document(format!("DXY JSON: {e}")))?;
    let records = match &doc {
        Value::Array(items) => items,
        Value::Object(obj) => match obj.get("results") {
            Some(Value::Array(items)) => items,
            _ => return Err(Error::Document("DXY JSON: expected an array of area records".into())),
        },
        _ => return Err(Error::Document("DXY JSON: expected an array of area records".into())),
    };

    let mut out = DxyParse::default();
    for record in records {
        let Some(area) = record.as_object() else {
            out.skipped += 1;
            continue;
        };
        let (Some(province), Some(observed_at)) = (name(area, "provinceName"), update_time(area)) else {
            out.skipped += 1;
            continue;
        };
        let Some((confirmed, cured, deaths)) = counts(area) else {
            out.skipped += 1;
            continue;
        };
        let country_name = name(area, "countryName");
        let raw_country = name(area, "countryEnglishName")
            .or_else(|| country_name.clone())
            .unwrap_or_else(|| province.clone());
        let raw_province = (country_name.as_deref() != Some(province.as_str())).then(|| province.clone());
        out.rows.push(RawRow {
            observed_at,
            raw_country: raw_country.clone(),
            raw_province: raw_province.clone(),
            raw_city: None,
            confirmed,
            cured,
            deaths,
        });

        let cities = area.get("cities").and_then(Value::as_array).map(Vec::as_slice).unwrap_or_default();
        for city in cities {
            let parsed = city.as_object().and_then(|c| {
                let city_name = name(c, "cityName")?;
                let (confirmed, cured, deaths) = counts(c)?;
                Some(RawRow {
                    observed_at: update_time(c).unwrap_or(observed_at),
                    raw_country: raw_country.clone(),
                    raw_province: Some(province.clone()),
                    raw_city: Some(city_name),
                    confirmed,
                    cured,
                    deaths,
                })
            });
            match parsed {
                Some(row) => out.rows.push(row),
                None => out.skipped += 1,
            }
        }
    }
    Ok(out)
}

fn name(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
}

fn update_time(obj: &Map<String, Value>) -> Option<DateTime<Utc>> {
    obj.get("updateTime").and_then(Value::as_i64).and_then(DateTime::from_timestamp_millis)
}

/// Missing counts read as 0; a present but negative or non-integer count
/// invalidates the record.
fn counts(obj: &Map<String, Value>) -> Option<(u64, u64, u64)> {
    let get = |key: &str| match obj.get(key) {
        None | Some(Value::Null) => Some(0),
        Some(v) => v.as_u64(),
    };
    Some((get("confirmedCount")?, get("curedCount")?, get("deadCount")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hubei_record() {
        let data = r#"[{"provinceName":"湖北省","confirmedCount":67803,"curedCount":64435,"deadCount":3222,"updateTime":1586476800000}]"#;
        let parsed = parse_dxy_json(data.as_bytes()).unwrap();
        assert_eq!(parsed.skipped, 0);
        let row = &parsed.rows[0];
        assert_eq!(row.raw_province.as_deref(), Some("湖北省"));
        assert_eq!((row.confirmed, row.cured, row.deaths), (67803, 64435, 3222));
        assert_eq!(row.observed_at.to_rfc3339(), "2020-04-10T00:00:00+00:00");
    }

    #[test]
    fn empty_array() {
        assert_eq!(parse_dxy_json(b"[]").unwrap(), DxyParse::default());
        assert_eq!(parse_dxy_json(br#"{"results":[],"success":true}"#).unwrap(), DxyParse::default());
    }

    #[test]
    fn missing_province_name_is_skipped() {
        let data = r#"[{"countryName":"中国","confirmedCount":5,"updateTime":1586476800000}]"#;
        let parsed = parse_dxy_json(data.as_bytes()).unwrap();
        assert!(parsed.rows.is_empty());
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn missing_counts_default_to_zero_and_cities_expand() {
        let data = r#"[{"countryName":"中国","provinceName":"湖北省","confirmedCount":10,"updateTime":1586476800000,
            "cities":[{"cityName":"武汉","confirmedCount":7},{"confirmedCount":1}]}]"#;
        let parsed = parse_dxy_json(data.as_bytes()).unwrap();
        assert_eq!(parsed.rows.len(), 2);
        assert_eq!(parsed.skipped, 1);
        assert_eq!((parsed.rows[0].cured, parsed.rows[0].deaths), (0, 0));
        assert_eq!(parsed.rows[1].raw_city.as_deref(), Some("武汉"));
        assert_eq!(parsed.rows[1].raw_province.as_deref(), Some("湖北省"));
        assert_eq!(parsed.rows[1].observed_at, parsed.rows[0].observed_at);
    }

    #[test]
    fn foreign_country_record_has_no_province() {
        let data = r#"[{"countryName":"意大利","countryEnglishName":"Italy","provinceName":"意大利","confirmedCount":1,"updateTime":0}]"#;
        let row = &parse_dxy_json(data.as_bytes()).unwrap().rows[0];
        assert_eq!(row.raw_country, "Italy");
        assert_eq!(row.raw_province, None);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_dxy_json(b"{not json"), Err(Error::Document(_))));
        assert!(matches!(parse_dxy_json(br#"{"a":1}"#), Err(Error::Document(_))));
        assert!(matches!(parse_dxy_json(b"42"), Err(Error::Document(_))));
    }

    #[test]
    fn negative_count_skips_record() {
        let data = r#"[{"provinceName":"湖北省","confirmedCount":-1,"updateTime":0}]"#;
        assert_eq!(parse_dxy_json(data.as_bytes()).unwrap().skipped, 1);
    }
}
