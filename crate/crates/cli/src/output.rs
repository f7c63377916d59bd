use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Failure;

/// Identity of a run, embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Stamp {
    pub fn new(command: &'static str, config: &[u8], seed: u64) -> Self {
        Stamp {
            command,
            config_sha256: hex::encode(Sha256::digest(config)),
            seed,
        }
    }
}

/// A finished output file, held in memory until every output is ready.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub fn json<T: Serialize>(name: &str, stamp: &Stamp, result: &T) -> Result<Artifact, Failure> {
    #[derive(Serialize)]
    struct Stamped<'a, T> {
        #[serde(flatten)]
        stamp: &'a Stamp,
        result: &'a T,
    }
    let mut bytes = serde_json::to_vec_pretty(&Stamped { stamp, result })
        .map_err(|e| Failure::Io(format!("serializing {name}: {e}")))?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

/// Appends `config_sha256` and `seed` columns to a CSV document.
pub fn csv(name: &str, stamp: &Stamp, table: &[u8]) -> Result<Artifact, Failure> {
    let bad = |e: csv::Error| Failure::Io(format!("{name}: {e}"));
    let mut reader = csv::Reader::from_reader(table);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = reader.headers().map_err(bad)?.clone();
    header.push_field("config_sha256");
    header.push_field("seed");
    writer.write_record(&header).map_err(bad)?;
    let seed = stamp.seed.to_string();
    for record in reader.records() {
        let mut record = record.map_err(bad)?;
        record.push_field(&stamp.config_sha256);
        record.push_field(&seed);
        writer.write_record(&record).map_err(bad)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::Io(format!("{name}: {e}")))?;
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
