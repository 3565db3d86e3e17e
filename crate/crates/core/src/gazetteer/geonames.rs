//! GeoNames main-table ingestion.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::time::UNIX_EPOCH;

use super::{BuildMetadata, Gazetteer, GazetteerError, LocationRecord};
use crate::textprep::normalize_key;

const COLUMNS: usize = 19;
const NAME: usize = 1;
const ASCII_NAME: usize = 2;
const ALTERNATE_NAMES: usize = 3;
const LATITUDE: usize = 4;
const LONGITUDE: usize = 5;
const FEATURE_CLASS: usize = 6;
const COUNTRY: usize = 8;
const ADMIN1: usize = 10;
const POPULATION: usize = 14;

/// Row filters applied during ingestion.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub min_population: u64,
    /// ISO-3166 alpha-2 codes; `None` or an empty set accepts every country.
    pub country_filter: Option<BTreeSet<String>>,
}

enum Row {
    Accepted(LocationRecord, Vec<String>),
    Filtered,
    Malformed,
}

fn parse_row(line: &str, options: &BuildOptions) -> Row {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != COLUMNS {
        return Row::Malformed;
    }
    let name = cols[NAME].trim();
    let country = cols[COUNTRY].trim().to_ascii_uppercase();
    let (Ok(latitude), Ok(longitude)) = (
        cols[LATITUDE].trim().parse::<f64>(),
        cols[LONGITUDE].trim().parse::<f64>(),
    ) else {
        return Row::Malformed;
    };
    let population = match cols[POPULATION].trim() {
        "" => 0,
        p => match p.parse::<u64>() {
            Ok(p) => p,
            Err(_) => return Row::Malformed,
        },
    };
    if name.is_empty() || normalize_key(name).is_empty() || country.is_empty() {
        return Row::Malformed;
    }
    if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
        return Row::Malformed;
    }

    if !matches!(cols[FEATURE_CLASS].trim(), "P" | "A") || population < options.min_population {
        return Row::Filtered;
    }
    if let Some(filter) = options.country_filter.as_ref().filter(|f| !f.is_empty()) {
        if !filter.iter().any(|c| c.eq_ignore_ascii_case(&country)) {
            return Row::Filtered;
        }
    }

    let ascii_name = match cols[ASCII_NAME].trim() {
        "" => deunicode::deunicode(name),
        a => a.to_string(),
    };
    let admin1 = Some(cols[ADMIN1].trim())
        .filter(|a| !a.is_empty())
        .map(str::to_string);

    // The ASCII spelling and every alternate name become aliases, once per
    // distinct key, skipping spellings that fold onto the canonical name.
    let own_key = normalize_key(name);
    let mut seen = HashSet::from([own_key]);
    let mut aliases = Vec::new();
    let alternates = std::iter::once(ascii_name.as_str()).chain(cols[ALTERNATE_NAMES].split(','));
    for alternate in alternates {
        let alternate = alternate.trim();
        let key = normalize_key(alternate);
        if !key.chars().any(|c| c.is_ascii_alphabetic()) || alternate.contains("://") {
            continue;
        }
        if seen.insert(key) {
            aliases.push(alternate.to_string());
        }
    }

    let record = LocationRecord {
        name: name.to_string(),
        ascii_name,
        country,
        admin1,
        longitude,
        latitude,
        homonym_count: 0,
        synonym_canonical: None,
        population,
    };
    Row::Accepted(record, aliases)
}

pub(crate) fn build_from_str(
    content: &str,
    source_name: &str,
    options: &BuildOptions,
) -> Result<Gazetteer, GazetteerError> {
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut filtered = 0;
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(line, options) {
            Row::Accepted(record, aliases) => {
                for alias in aliases {
                    records.push(LocationRecord {
                        ascii_name: deunicode::deunicode(&alias),
                        name: alias,
                        synonym_canonical: Some(record.name.clone()),
                        ..record.clone()
                    });
                }
                records.push(record);
            }
            Row::Filtered => filtered += 1,
            Row::Malformed => skipped += 1,
        }
    }
    if records.is_empty() {
        return Err(GazetteerError::Empty {
            source_name: source_name.to_string(),
            skipped,
            filtered,
        });
    }
    if skipped > 0 {
        log::warn!("{source_name}: skipped {skipped} malformed row(s)");
    }
    let metadata = BuildMetadata {
        sources: vec![source_name.to_string()],
        skipped_rows: skipped,
        filtered_rows: filtered,
        min_population: options.min_population,
        country_filter: options
            .country_filter
            .as_ref()
            .filter(|f| !f.is_empty())
            .map(|f| f.iter().map(|c| c.to_ascii_uppercase()).collect()),
        ..BuildMetadata::default()
    };
    Ok(Gazetteer::from_records(records, metadata))
}

/// Builds a gazetteer from a GeoNames main-table TSV file.
///
/// Only populated places (class P) and administrative areas (class A) are
/// kept. Malformed rows are skipped and counted in the build metadata; a
/// build that accepts no row at all is an error.
pub fn build_gazetteer(
    source_path: impl AsRef<Path>,
    options: &BuildOptions,
) -> Result<Gazetteer, GazetteerError> {
    let path = source_path.as_ref();
    let read_err = |source| GazetteerError::Read {
        path: path.to_path_buf(),
        source,
    };
    let content = fs::read_to_string(path).map_err(read_err)?;
    let built_at = fs::metadata(path)
        .and_then(|m| m.modified())
        .ok()
        .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
        .map_or(0, |d| d.as_secs());
    let source_name = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    let mut gazetteer = build_from_str(&content, &source_name, options)?;
    gazetteer.metadata.built_at = built_at;
    Ok(gazetteer)
}
