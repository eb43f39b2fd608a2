//! Dataset directory handling: split file discovery and loading.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use transa::data::{load_triples, ColumnOrder, TripleSet};

/// Environment variable naming the dataset root directory.
pub const DATA_DIR_ENV: &str = "TRANSA_DATA_DIR";

/// Resolves the dataset directory from the flag and the environment: an
/// absolute flag wins; a relative flag is joined onto the env root when the
/// path does not exist as given; no flag falls back to the env root alone.
pub fn resolve_dir(flag: Option<&Path>) -> Result<PathBuf> {
    let root = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    match (flag, root) {
        (Some(dir), _) if dir.is_dir() => Ok(dir.to_owned()),
        (Some(dir), Some(root)) => {
            let joined = root.join(dir);
            if joined.is_dir() {
                Ok(joined)
            } else {
                bail!(
                    "dataset directory `{}` not found (also tried `{}`)",
                    dir.display(),
                    joined.display()
                )
            }
        }
        (Some(dir), None) => bail!("dataset directory `{}` not found", dir.display()),
        (None, Some(root)) => Ok(root),
        (None, None) => bail!("no dataset given: pass --dataset or set {DATA_DIR_ENV}"),
    }
}

/// The valid split ships as `valid.txt` or `dev.txt` depending on the
/// benchmark distribution.
fn valid_file(dir: &Path) -> Option<PathBuf> {
    for name in ["valid.txt", "dev.txt"] {
        let p = dir.join(name);
        if p.is_file() {
            return Some(p);
        }
    }
    None
}

/// Loads train/valid/test from a benchmark directory.
pub fn load(dir: &Path, order: ColumnOrder) -> Result<TripleSet> {
    let train_path = dir.join("train.txt");
    if !train_path.is_file() {
        bail!("missing dataset file `{}`", train_path.display());
    }
    let test_path = dir.join("test.txt");
    if !test_path.is_file() {
        bail!("missing dataset file `{}`", test_path.display());
    }
    let train = load_triples(&train_path, order).context("loading train split")?;
    let valid = match valid_file(dir) {
        Some(p) => load_triples(&p, order).context("loading valid split")?,
        None => Vec::new(),
    };
    let test = load_triples(&test_path, order).context("loading test split")?;
    Ok(TripleSet::build(&train, &valid, &test)?)
}
