//! The location dimension: GeoNames ingestion, homonym and synonym
//! bookkeeping, and case/diacritics-insensitive lookup.

mod geonames;
mod store;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::textprep::normalize_key;

pub use geonames::{build_gazetteer, BuildOptions};
pub use store::{load_gazetteer, save_gazetteer, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no rows accepted from {source_name} ({skipped} malformed, {filtered} filtered out)")]
    Empty {
        source_name: String,
        skipped: usize,
        filtered: usize,
    },
    #[error("unsupported gazetteer format {found:?}, expected {expected:?}")]
    VersionMismatch { expected: String, found: String },
    #[error("corrupt gazetteer file (expected format {expected:?}): {reason}")]
    Corrupt { expected: String, reason: String },
}

/// One gazetteer entry. Canonical records have no `synonym_canonical`;
/// alias records carry the canonical name and share its country,
/// coordinates and population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRecord {
    pub name: String,
    pub ascii_name: String,
    pub country: String,
    pub admin1: Option<String>,
    pub longitude: f64,
    pub latitude: f64,
    pub homonym_count: u32,
    pub synonym_canonical: Option<String>,
    pub population: u64,
}

impl LocationRecord {
    pub fn is_alias(&self) -> bool {
        self.synonym_canonical.is_some()
    }

    /// The formal name this record stands for.
    pub fn canonical_name(&self) -> &str {
        self.synonym_canonical.as_deref().unwrap_or(&self.name)
    }

    pub fn has_valid_coordinates(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude) && (-180.0..=180.0).contains(&self.longitude)
    }

    /// Lookup ordering: population descending, then country ascending.
    /// The remaining fields only break exact ties.
    fn order_key(&self) -> impl Ord + '_ {
        (
            std::cmp::Reverse(self.population),
            self.country.as_str(),
            self.is_alias(),
            self.name.as_str(),
            self.admin1.as_deref(),
            self.latitude.to_bits(),
            self.longitude.to_bits(),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub sources: Vec<String>,
    pub canonical_records: usize,
    pub alias_records: usize,
    /// Malformed rows (wrong column count, bad coordinates, missing fields).
    pub skipped_rows: usize,
    /// Well-formed rows excluded by feature class, population or country.
    pub filtered_rows: usize,
    /// Modification time of the source file, seconds since the Unix epoch.
    pub built_at: u64,
    pub min_population: u64,
    pub country_filter: Option<Vec<String>>,
}

/// Immutable name index over [`LocationRecord`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    records: HashMap<String, Vec<LocationRecord>>,
    metadata: BuildMetadata,
}

impl Gazetteer {
    /// Indexes records by normalized name, sorts each bucket and sets
    /// `homonym_count` to the bucket size.
    pub fn from_records(
        records: impl IntoIterator<Item = LocationRecord>,
        mut metadata: BuildMetadata,
    ) -> Self {
        let mut index: HashMap<String, Vec<LocationRecord>> = HashMap::new();
        for record in records {
            index
                .entry(normalize_key(&record.name))
                .or_default()
                .push(record);
        }
        let mut canonical = 0;
        let mut aliases = 0;
        for bucket in index.values_mut() {
            bucket.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
            let count = bucket.len() as u32;
            for record in bucket.iter_mut() {
                record.homonym_count = count;
                if record.is_alias() {
                    aliases += 1;
                } else {
                    canonical += 1;
                }
            }
        }
        metadata.canonical_records = canonical;
        metadata.alias_records = aliases;
        Self {
            records: index,
            metadata,
        }
    }

    /// All records whose normalized name equals `normalize_key(name)`.
    pub fn lookup(&self, name: &str) -> &[LocationRecord] {
        self.records
            .get(&normalize_key(name))
            .map_or(&[], Vec::as_slice)
    }

    /// The highest-ranked canonical record named `name` in `country`.
    pub fn find_canonical(&self, name: &str, country: &str) -> Option<&LocationRecord> {
        self.lookup(name)
            .iter()
            .find(|r| !r.is_alias() && r.country == country)
    }

    pub fn metadata(&self) -> &BuildMetadata {
        &self.metadata
    }

    /// Number of stored records, canonical and alias.
    pub fn len(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn canonical_len(&self) -> usize {
        self.metadata.canonical_records
    }

    /// Normalized keys in sorted order.
    pub fn keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self.records.keys().map(String::as_str).collect();
        keys.sort_unstable();
        keys
    }

    pub fn records(&self) -> impl Iterator<Item = &LocationRecord> {
        self.records.values().flatten()
    }

    /// A copy without records below `min_population`, homonym counts recomputed.
    pub fn with_min_population(&self, min_population: u64) -> Self {
        let mut metadata = self.metadata.clone();
        metadata.min_population = metadata.min_population.max(min_population);
        Self::from_records(
            self.records()
                .filter(|r| r.population >= min_population)
                .cloned(),
            metadata,
        )
    }

    /// Checks the structural invariants; returns the first violation found.
    pub fn validate(&self) -> Result<(), String> {
        for (key, bucket) in &self.records {
            for record in bucket {
                if normalize_key(&record.name) != *key {
                    return Err(format!("record {:?} filed under key {key:?}", record.name));
                }
                if record.homonym_count as usize != bucket.len() {
                    return Err(format!(
                        "record {:?} has homonym_count {} but its key holds {}",
                        record.name,
                        record.homonym_count,
                        bucket.len()
                    ));
                }
                if !record.has_valid_coordinates() {
                    return Err(format!(
                        "record {:?} has out-of-range coordinates",
                        record.name
                    ));
                }
                if record.country.is_empty() {
                    return Err(format!("record {:?} has no country", record.name));
                }
                if let Some(canonical) = &record.synonym_canonical {
                    if self.find_canonical(canonical, &record.country).is_none() {
                        return Err(format!(
                            "alias {:?} points to missing canonical {canonical:?}/{}",
                            record.name, record.country
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Distinct countries among the candidates for `name`.
    pub fn countries_of(&self, name: &str) -> BTreeSet<&str> {
        self.lookup(name)
            .iter()
            .map(|r| r.country.as_str())
            .collect()
    }
}
