//! Line-delimited gazetteer index file.
//!
//! ```text
//! trajext-gazetteer/1
//! {metadata json}
//! {record json}        one per record, keys sorted, bucket order kept
//! ...
//! end <record count> <sha256 of the record lines>
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BuildMetadata, Gazetteer, GazetteerError, LocationRecord};

pub const FORMAT_VERSION: &str = "trajext-gazetteer/1";
const FORMAT_PREFIX: &str = "trajext-gazetteer/";

fn corrupt(reason: impl Into<String>) -> GazetteerError {
    GazetteerError::Corrupt {
        expected: FORMAT_VERSION.to_string(),
        reason: reason.into(),
    }
}

pub fn save_gazetteer(g: &Gazetteer, path: impl AsRef<Path>) -> Result<(), GazetteerError> {
    let path = path.as_ref();
    let write_err = |source| GazetteerError::Write {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(write_err)?;
    let mut out = BufWriter::new(file);
    let mut hasher = Sha256::new();
    let mut count = 0usize;

    let metadata = serde_json::to_string(&g.metadata).expect("metadata serializes");
    writeln!(out, "{FORMAT_VERSION}").map_err(write_err)?;
    writeln!(out, "{metadata}").map_err(write_err)?;
    for key in g.keys() {
        for record in &g.records[key] {
            let line = serde_json::to_string(record).expect("record serializes");
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
            writeln!(out, "{line}").map_err(write_err)?;
            count += 1;
        }
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    writeln!(out, "end {count} {hex}").map_err(write_err)?;
    out.flush().map_err(write_err)
}

pub fn load_gazetteer(path: impl AsRef<Path>) -> Result<Gazetteer, GazetteerError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|source| GazetteerError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = content.lines();

    match lines.next() {
        Some(FORMAT_VERSION) => {}
        Some(other) if other.starts_with(FORMAT_PREFIX) => {
            return Err(GazetteerError::VersionMismatch {
                expected: FORMAT_VERSION.to_string(),
                found: other.to_string(),
            })
        }
        _ => return Err(corrupt("missing format header")),
    }
    let metadata: BuildMetadata = lines
        .next()
        .ok_or_else(|| corrupt("missing metadata line"))
        .and_then(|l| serde_json::from_str(l).map_err(|e| corrupt(format!("metadata: {e}"))))?;

    let mut hasher = Sha256::new();
    let mut records = Vec::new();
    let mut trailer = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("end ") {
            trailer = Some(rest);
            break;
        }
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
        let record: LocationRecord = serde_json::from_str(line)
            .map_err(|e| corrupt(format!("record {}: {e}", records.len() + 1)))?;
        records.push(record);
    }
    let trailer = trailer.ok_or_else(|| corrupt("missing end marker (truncated file?)"))?;
    let (count, digest) = trailer
        .split_once(' ')
        .ok_or_else(|| corrupt("malformed end marker"))?;
    if count.parse::<usize>().ok() != Some(records.len()) {
        return Err(corrupt(format!(
            "end marker announces {count} records, found {}",
            records.len()
        )));
    }
    let actual: String = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    if actual != digest {
        return Err(corrupt("checksum mismatch"));
    }

    let stored_counts: Vec<u32> = records.iter().map(|r| r.homonym_count).collect();
    let g = Gazetteer::from_records(records, metadata.clone());
    if g.metadata != metadata {
        return Err(corrupt("record counts disagree with metadata"));
    }
    let rebuilt_counts = g
        .keys()
        .into_iter()
        .flat_map(|k| g.records[k].iter().map(|r| r.homonym_count));
    if !rebuilt_counts.eq(stored_counts) {
        return Err(corrupt("homonym counts disagree with records"));
    }
    g.validate().map_err(corrupt)?;
    Ok(g)
}
