//! Files in and out: dataset CSV, the physical-parameter mapping, density
//! curves, expansion documents, run manifests and config overrides.

mod config;
mod density;
mod files;
mod mapping;
mod table;

pub use config::{apply_override, apply_overrides, parse_overrides};
pub use density::{kde_density, ks_distance, silverman_bandwidth, Bandwidth, DensityCurve};
pub use files::{
    read_expansion, read_manifest, write_expansion, write_manifest, ExpansionDocument, RunManifest, StageRecord,
    EXPANSION_FORMAT, MANIFEST_FORMAT,
};
pub use mapping::{
    gaussian_to_uniform, inverse_normal_cdf, normal_cdf, read_ranges, uniform_to_gaussian, ParameterRange,
};
pub use table::{format_real, read_dataset_csv, write_dataset_csv, write_table_csv, ColumnSchema};

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
