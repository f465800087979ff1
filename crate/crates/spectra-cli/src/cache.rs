//! Disk cache for covering tables, keyed by configuration hash, threshold,
//! scale, and budget. Stores are atomic (write to a temporary file in the
//! same directory, then rename); a corrupt file is a miss with a warning,
//! never wrong data.

use spectra_core::dimension::CoveringTable;
use std::path::PathBuf;

pub const CACHE_ENV: &str = "SPECTRA_CACHE_DIR";

pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    /// Cache rooted at the directory named by `SPECTRA_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(|d| Self { dir: PathBuf::from(d) })
    }

    #[cfg(test)]
    pub fn at(dir: &std::path::Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    fn key_path(&self, config_hash: &str, t: f64, r_max: i64, budget_level: u32) -> PathBuf {
        // exact bit pattern of t keeps distinct thresholds distinct
        let t_bits = t.to_bits();
        self.dir.join(format!("table-{config_hash}-{t_bits:016x}-r{r_max}-b{budget_level}.json"))
    }

    pub fn load(
        &self,
        config_hash: &str,
        t: f64,
        r_max: i64,
        budget_level: u32,
    ) -> Option<CoveringTable> {
        let path = self.key_path(config_hash, t, r_max, budget_level);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice::<CoveringTable>(&bytes) {
            Ok(table) if table.t.to_bits() == t.to_bits() && table.r_max == r_max => Some(table),
            Ok(_) => {
                eprintln!("warning: cache entry {} does not match its key; ignoring", path.display());
                None
            }
            Err(e) => {
                eprintln!("warning: corrupt cache entry {}: {e}; ignoring", path.display());
                None
            }
        }
    }

    pub fn store(
        &self,
        config_hash: &str,
        t: f64,
        r_max: i64,
        budget_level: u32,
        table: &CoveringTable,
    ) -> std::io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.key_path(config_hash, t, r_max, budget_level);
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        let bytes = serde_json::to_vec(table).expect("table serializes");
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectra_core::dimension::compute_covering_table;
    use spectra_core::geometry::CfGeometry;
    use spectra_core::potential::ClassicalCfPotential;
    use spectra_core::sublevel::SearchBudget;
    use spectra_core::TransitionSystem;

    fn sample_table() -> CoveringTable {
        let ts = TransitionSystem::full_shift_n(2).unwrap();
        let pot = ClassicalCfPotential::new(ts.clone());
        compute_covering_table(3.1, 6, &ts, &CfGeometry, &pot, SearchBudget::default(), false)
            .unwrap()
    }

    #[test]
    fn store_then_load_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::at(dir.path());
        let table = sample_table();
        cache.store("h", 3.1, 6, 6, &table).unwrap();
        let loaded = cache.load("h", 3.1, 6, 6).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn key_mismatch_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::at(dir.path());
        let table = sample_table();
        cache.store("h", 3.1, 6, 6, &table).unwrap();
        assert!(cache.load("other", 3.1, 6, 6).is_none());
        assert!(cache.load("h", 3.2, 6, 6).is_none());
        assert!(cache.load("h", 3.1, 7, 6).is_none());
    }

    #[test]
    fn corrupt_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::at(dir.path());
        let table = sample_table();
        cache.store("h", 3.1, 6, 6, &table).unwrap();
        // clobber the file with torn bytes
        let path = dir.path().read_dir().unwrap().next().unwrap().unwrap().path();
        std::fs::write(&path, b"{ not json").unwrap();
        assert!(cache.load("h", 3.1, 6, 6).is_none());
    }
}
