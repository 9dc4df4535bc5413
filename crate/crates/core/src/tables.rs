//! Bundled reference tables: region aliases, country display names,
//! continents and populations. Each table can be overridden by a file of the
//! same name in the data directory.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::region::{Continent, RegionId, RegionMeta, QUARANTINE_COUNTRY};

pub const ALIASES_FILE: &str = "aliases.csv";
pub const COUNTRIES_FILE: &str = "countries.csv";
pub const CONTINENTS_FILE: &str = "continents.csv";
pub const POPULATION_FILE: &str = "population.csv";

const BUNDLED_ALIASES: &str = include_str!("../data/aliases.csv");
const BUNDLED_COUNTRIES: &str = include_str!("../data/countries.csv");
const BUNDLED_CONTINENTS: &str = include_str!("../data/continents.csv");
const BUNDLED_POPULATION: &str = include_str!("../data/population.csv");

/// Where an alias points. Province and city are canonical names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AliasTarget {
    pub country: String,
    pub province: Option<String>,
    pub city: Option<String>,
}

#[derive(Debug, Default, Clone)]
pub struct AliasTable {
    entries: Vec<(String, AliasTarget)>,
    exact: HashMap<String, Vec<usize>>,
    folded: HashMap<String, Vec<usize>>,
}

impl AliasTable {
    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            raw_name: String,
            country: String,
            province: String,
            city: String,
        }
        let mut table = AliasTable::default();
        let rows: Vec<Row> = read_table(ALIASES_FILE, text, &["raw_name", "country", "province", "city"])?;
        for row in rows {
            let opt = |s: String| (!s.is_empty()).then_some(s);
            let target = AliasTarget {
                country: row.country,
                province: opt(row.province),
                city: opt(row.city),
            };
            RegionId::new(target.country.clone(), target.province.clone(), target.city.clone())
                .map_err(|e| Error::Table {
                    table: ALIASES_FILE,
                    message: format!("{}: {e}", row.raw_name),
                })?;
            table.push(row.raw_name, target);
        }
        Ok(table)
    }

    pub fn push(&mut self, raw_name: String, target: AliasTarget) {
        let idx = self.entries.len();
        self.exact.entry(raw_name.clone()).or_default().push(idx);
        self.folded.entry(raw_name.to_lowercase()).or_default().push(idx);
        self.entries.push((raw_name, target));
    }

    /// Exact-string match first (this is what non-Latin names rely on), then a
    /// case-insensitive match.
    pub fn lookup(&self, raw_name: &str) -> impl Iterator<Item = &AliasTarget> {
        let hits = self
            .exact
            .get(raw_name)
            .or_else(|| self.folded.get(&raw_name.to_lowercase()));
        hits.into_iter().flatten().map(|&i| &self.entries[i].1)
    }

    pub fn names_for<'a>(&'a self, id: &'a RegionId) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter_map(move |(name, t)| {
            (t.country == id.country_code()
                && t.province.as_deref() == id.province_name()
                && t.city.as_deref() == id.city_name())
            .then_some(name.as_str())
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryInfo {
    pub display_name: String,
    pub continent: Continent,
    pub population: Option<u64>,
    pub population_year: Option<i32>,
}

#[derive(Debug, Clone)]
pub struct Tables {
    pub aliases: AliasTable,
    pub countries: BTreeMap<String, CountryInfo>,
}

impl Tables {
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED_ALIASES, BUNDLED_COUNTRIES, BUNDLED_CONTINENTS, BUNDLED_POPULATION)
            .expect("bundled tables are well-formed")
    }

    /// Bundled tables, with any table present in `dir` taking precedence.
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str, bundled: &'static str| -> Result<String> {
            let path = dir.join(name);
            if path.is_file() {
                Ok(std::fs::read_to_string(path)?)
            } else {
                Ok(bundled.to_owned())
            }
        };
        Self::from_texts(
            &read(ALIASES_FILE, BUNDLED_ALIASES)?,
            &read(COUNTRIES_FILE, BUNDLED_COUNTRIES)?,
            &read(CONTINENTS_FILE, BUNDLED_CONTINENTS)?,
            &read(POPULATION_FILE, BUNDLED_POPULATION)?,
        )
    }

    pub fn from_texts(aliases: &str, countries: &str, continents: &str, population: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct CountryRow {
            country: String,
            display_name: String,
        }
        #[derive(Deserialize)]
        struct ContinentRow {
            country: String,
            continent: String,
        }
        #[derive(Deserialize)]
        struct PopulationRow {
            country: String,
            population: u64,
            source_year: Option<i32>,
        }

        let aliases = AliasTable::from_csv(aliases)?;
        let continent_rows: Vec<ContinentRow> =
            read_table(CONTINENTS_FILE, continents, &["country", "continent"])?;
        let mut continent_of = HashMap::new();
        for row in continent_rows {
            let c = row.continent.parse().map_err(|e: Error| Error::Table {
                table: CONTINENTS_FILE,
                message: e.to_string(),
            })?;
            continent_of.insert(row.country, c);
        }
        let pop_rows: Vec<PopulationRow> =
            read_table(POPULATION_FILE, population, &["country", "population", "source_year"])?;
        let mut pop_of = HashMap::new();
        for row in pop_rows {
            if row.population == 0 {
                return Err(Error::Table {
                    table: POPULATION_FILE,
                    message: format!("population of {} must be positive", row.country),
                });
            }
            pop_of.insert(row.country, (row.population, row.source_year));
        }

        let country_rows: Vec<CountryRow> =
            read_table(COUNTRIES_FILE, countries, &["country", "display_name"])?;
        let mut out = BTreeMap::new();
        for row in country_rows {
            RegionId::country(&row.country).map_err(|e| Error::Table {
                table: COUNTRIES_FILE,
                message: e.to_string(),
            })?;
            if row.display_name.trim().is_empty() {
                return Err(Error::Table {
                    table: COUNTRIES_FILE,
                    message: format!("empty display name for {}", row.country),
                });
            }
            let pop = pop_of.get(&row.country).copied();
            out.insert(
                row.country.clone(),
                CountryInfo {
                    display_name: row.display_name,
                    continent: continent_of.get(&row.country).copied().unwrap_or(Continent::Other),
                    population: pop.map(|p| p.0),
                    population_year: pop.and_then(|p| p.1),
                },
            );
        }
        Ok(Tables {
            aliases,
            countries: out,
        })
    }

    pub fn is_known_country(&self, code: &str) -> bool {
        self.countries.contains_key(code)
    }

    pub fn meta_for(&self, id: &RegionId) -> RegionMeta {
        let country = self.countries.get(id.country_code());
        let display_name = match (id.city_name(), id.province_name()) {
            (Some(city), _) => city.to_owned(),
            (None, Some(province)) => province.to_owned(),
            (None, None) => match country {
                Some(info) => info.display_name.clone(),
                None if id.is_quarantine() => "Unresolved regions".to_owned(),
                None => id.country_code().to_owned(),
            },
        };
        let mut aliases: BTreeSet<String> = self.aliases.names_for(id).map(str::to_owned).collect();
        aliases.insert(display_name.clone());
        RegionMeta {
            id: id.clone(),
            display_name,
            continent: country.map(|c| c.continent).unwrap_or(Continent::Other),
            population: if id.is_country() {
                country.and_then(|c| c.population)
            } else {
                None
            },
            aliases,
        }
    }
}

fn read_table<T: serde::de::DeserializeOwned>(
    table: &'static str,
    text: &str,
    header: &[&str],
) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found = reader
        .headers()
        .map_err(|e| Error::Table {
            table,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>();
    if found != header {
        return Err(Error::Table {
            table,
            message: format!("expected header {}, found {}", header.join(","), found.join(",")),
        });
    }
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Table {
            table,
            message: e.to_string(),
        })
}

impl Default for Tables {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Root region of the quarantine bucket.
pub fn quarantine_root() -> RegionId {
    RegionId::country(QUARANTINE_COUNTRY).expect("valid code")
}
