use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Country code of the bucket that collects rows whose region name could not
/// be resolved. Excluded from world totals and continent groups.
pub const QUARANTINE_COUNTRY: &str = "XX";

/// Hierarchical region identity: country, optionally a province, optionally a
/// city within that province.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionId {
    country: String,
    province: Option<String>,
    city: Option<String>,
}

impl RegionId {
    pub fn new(
        country: impl Into<String>,
        province: Option<String>,
        city: Option<String>,
    ) -> Result<Self> {
        let country = country.into();
        if country.len() != 2 || !country.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(Error::invalid(format!(
                "country code must be two uppercase ASCII letters, got {country:?}"
            )));
        }
        let clean = |part: Option<String>, what: &str| -> Result<Option<String>> {
            match part {
                Some(p) if p.trim().is_empty() || p.trim() != p || p.contains('/') => {
                    Err(Error::invalid(format!("bad {what} name {p:?}")))
                }
                other => Ok(other),
            }
        };
        let province = clean(province, "province")?;
        let city = clean(city, "city")?;
        if city.is_some() && province.is_none() {
            return Err(Error::invalid(format!(
                "city {:?} given without a province",
                city.unwrap_or_default()
            )));
        }
        Ok(RegionId {
            country,
            province,
            city,
        })
    }

    pub fn country(code: &str) -> Result<Self> {
        Self::new(code, None, None)
    }

    pub fn province(code: &str, province: &str) -> Result<Self> {
        Self::new(code, Some(province.to_owned()), None)
    }

    pub fn city(code: &str, province: &str, city: &str) -> Result<Self> {
        Self::new(code, Some(province.to_owned()), Some(city.to_owned()))
    }

    pub fn country_code(&self) -> &str {
        &self.country
    }

    pub fn province_name(&self) -> Option<&str> {
        self.province.as_deref()
    }

    pub fn city_name(&self) -> Option<&str> {
        self.city.as_deref()
    }

    pub fn is_country(&self) -> bool {
        self.province.is_none()
    }

    pub fn is_city(&self) -> bool {
        self.city.is_some()
    }

    pub fn is_quarantine(&self) -> bool {
        self.country == QUARANTINE_COUNTRY
    }

    /// 0 for a country, 1 for a province, 2 for a city.
    pub fn depth(&self) -> usize {
        match (&self.province, &self.city) {
            (None, _) => 0,
            (Some(_), None) => 1,
            (Some(_), Some(_)) => 2,
        }
    }

    pub fn parent(&self) -> Option<RegionId> {
        match (&self.province, &self.city) {
            (None, _) => None,
            (Some(_), None) => Some(RegionId {
                country: self.country.clone(),
                province: None,
                city: None,
            }),
            (Some(p), Some(_)) => Some(RegionId {
                country: self.country.clone(),
                province: Some(p.clone()),
                city: None,
            }),
        }
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(&self) -> impl Iterator<Item = RegionId> {
        std::iter::successors(self.parent(), |r| r.parent())
    }

    pub fn is_child_of(&self, other: &RegionId) -> bool {
        self.parent().as_ref() == Some(other)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.country)?;
        if let Some(p) = &self.province {
            write!(f, "/{p}")?;
        }
        if let Some(c) = &self.city {
            write!(f, "/{c}")?;
        }
        Ok(())
    }
}

/// Parses the `CN/Hubei/Wuhan` path form produced by `Display`.
impl FromStr for RegionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split('/');
        let country = parts.next().unwrap_or_default();
        let province = parts.next().map(str::to_owned);
        let city = parts.next().map(str::to_owned);
        if parts.next().is_some() {
            return Err(Error::invalid(format!("region path {s:?} has too many parts")));
        }
        RegionId::new(country, province, city)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Continent {
    Africa,
    Asia,
    Europe,
    NorthAmerica,
    SouthAmerica,
    Oceania,
    Other,
}

impl Continent {
    pub const ALL: [Continent; 7] = [
        Continent::Africa,
        Continent::Asia,
        Continent::Europe,
        Continent::NorthAmerica,
        Continent::SouthAmerica,
        Continent::Oceania,
        Continent::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Continent::Africa => "Africa",
            Continent::Asia => "Asia",
            Continent::Europe => "Europe",
            Continent::NorthAmerica => "NorthAmerica",
            Continent::SouthAmerica => "SouthAmerica",
            Continent::Oceania => "Oceania",
            Continent::Other => "Other",
        }
    }
}

impl fmt::Display for Continent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Continent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Continent::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown continent {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMeta {
    pub id: RegionId,
    pub display_name: String,
    pub continent: Continent,
    pub population: Option<u64>,
    pub aliases: BTreeSet<String>,
}
