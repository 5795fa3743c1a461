use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// A fully rendered output file.
pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &'static str, value: &T) -> anyhow::Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self { name, bytes })
    }

    pub fn text(name: &'static str, text: String) -> Self {
        Self { name, bytes: text.into_bytes() }
    }

    /// CSV preceded by a `# config_hash:` comment line.
    pub fn csv(name: &'static str, hash: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<Self> {
        let mut bytes = format!("# config_hash: {hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(Self { name, bytes })
    }
}

/// Writes every artifact through a temporary file renamed into place.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for a in artifacts {
        let mut tmp =
            tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
        tmp.write_all(&a.bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(dir.join(a.name)).with_context(|| format!("writing {}", a.name))?;
    }
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
