use crate::canonical::RawRow;
use crate::region::{RegionId, QUARANTINE_COUNTRY};
use crate::tables::{AliasTarget, Tables};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub region: RegionId,
    pub quarantined: bool,
}

/// Maps raw upstream names onto a canonical region. Never fails: a country
/// name that cannot be resolved lands under the quarantine code, keyed by the
/// raw name so distinct unknowns stay distinct.
///
/// Province and city names resolve through the alias table when an entry for
/// the same country (and province) exists; otherwise the cleaned raw name is
/// kept as the canonical name.
pub fn normalize_region(row: &RawRow, tables: &Tables) -> Normalized {
    let raw_country = clean(&row.raw_country).unwrap_or_default();
    let base = lookup(tables, &row.raw_country).next().cloned().or_else(|| {
        (tables.is_known_country(&raw_country) || raw_country == QUARANTINE_COUNTRY).then(|| AliasTarget {
            country: raw_country.clone(),
            province: None,
            city: None,
        })
    });
    let Some(base) = base else {
        return quarantine(&raw_country);
    };

    let province = match base.province {
        Some(p) => Some(p),
        None => row
            .raw_province
            .as_deref()
            .and_then(|p| resolve_province(tables, &base.country, p)),
    };
    let city = match (&base.city, &province) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(p)) => row
            .raw_city
            .as_deref()
            .and_then(|c| resolve_city(tables, &base.country, p, c)),
        (None, None) if row.raw_city.as_deref().and_then(clean).is_some() => {
            return quarantine(&format!(
                "{raw_country} - {}",
                row.raw_city.as_deref().unwrap_or_default()
            ));
        }
        (None, None) => None,
    };
    match RegionId::new(base.country.clone(), province, city) {
        Ok(region) => Normalized {
            quarantined: region.is_quarantine(),
            region,
        },
        Err(_) => quarantine(&raw_country),
    }
}

fn resolve_province(tables: &Tables, country: &str, raw: &str) -> Option<String> {
    let name = clean(raw)?;
    let mut same_country = lookup(tables, raw).filter(|t| t.country == country);
    match same_country.next() {
        Some(AliasTarget { province: Some(p), .. }) => Some(p.clone()),
        // the "province" is the country itself (e.g. `France,France`)
        Some(AliasTarget { province: None, .. }) => None,
        None => Some(name),
    }
}

fn resolve_city(tables: &Tables, country: &str, province: &str, raw: &str) -> Option<String> {
    let name = clean(raw)?;
    let hit = lookup(tables, raw).find(|t| t.country == country && t.province.as_deref() == Some(province));
    match hit {
        Some(AliasTarget { city: Some(c), .. }) => Some(c.clone()),
        Some(AliasTarget { city: None, .. }) => None,
        None => Some(name),
    }
}

/// Alias entries may contain characters that `clean` replaces (e.g.
/// `"Korea, South"`), so the trimmed raw name is tried first.
fn lookup<'a>(tables: &'a Tables, raw: &str) -> impl Iterator<Item = &'a AliasTarget> + 'a {
    let trimmed = raw.trim();
    let mut hits: Vec<&AliasTarget> = tables.aliases.lookup(trimmed).collect();
    if hits.is_empty() {
        if let Some(cleaned) = clean(raw) {
            hits = tables.aliases.lookup(&cleaned).collect();
        }
    }
    hits.into_iter()
}

fn quarantine(raw_name: &str) -> Normalized {
    let region = clean(raw_name)
        .and_then(|name| RegionId::new(QUARANTINE_COUNTRY, Some(name), None).ok())
        .unwrap_or_else(|| RegionId::country(QUARANTINE_COUNTRY).expect("valid code"));
    Normalized {
        region,
        quarantined: true,
    }
}

/// Trims and strips characters that cannot appear in a canonical name
/// (path separator, CSV separator, control characters).
fn clean(raw: &str) -> Option<String> {
    let cleaned: String = raw
        .chars()
        .map(|c| match c {
            '/' | ',' => '-',
            c if c.is_control() => ' ',
            c => c,
        })
        .collect();
    let trimmed = cleaned.trim();
    (!trimmed.is_empty()).then(|| trimmed.to_owned())
}
