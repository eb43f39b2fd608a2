//! Plain-text model checkpoints.
//!
//! Layout (line oriented, space separated):
//!
//! ```text
//! transa-checkpoint v1
//! variant <transe|transa|psd>
//! dim <k>
//! entities <count> <sha256 of the entity vocabulary>
//! relations <count> <sha256 of the relation vocabulary>
//! <count> entity rows, k values each>
//! <count> relation rows, k values each>
//! <for transa/psd: count * k weight-matrix rows, k values each>
//! end
//! ```
//!
//! Floats are written in shortest scientific notation that parses back to
//! the identical bits, so save -> load -> save reproduces the file byte for
//! byte. Vocabulary names stay with the dataset; the checkpoint records
//! their hashes so a mismatched dataset is rejected at load time.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::TripleSet;
use crate::error::{Error, Result};
use crate::linalg::SquareMat;
use crate::metric::{EmbeddingModel, Variant};

/// Vocabulary fingerprints stored alongside the matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub entity_hash: String,
    pub relation_hash: String,
}

impl CheckpointMeta {
    pub fn of(ts: &TripleSet) -> Self {
        Self {
            entity_hash: vocab_hash(ts.entities.names()),
            relation_hash: vocab_hash(ts.relations.names()),
        }
    }

    /// Errors unless the dataset's vocabularies match the checkpoint's.
    pub fn verify(&self, ts: &TripleSet, path: &Path) -> Result<()> {
        if *self != Self::of(ts) {
            return Err(Error::Checkpoint {
                path: path.to_owned(),
                reason: "vocabulary hash mismatch: checkpoint was trained on a different dataset"
                    .to_owned(),
            });
        }
        Ok(())
    }
}

/// SHA-256 over the newline-joined vocabulary, hex encoded.
pub fn vocab_hash(names: &[String]) -> String {
    let mut hasher = Sha256::new();
    for name in names {
        hasher.update(name.as_bytes());
        hasher.update(b"\n");
    }
    hex(&hasher.finalize())
}

/// SHA-256 of a file's bytes, hex encoded. Used for manifest content
/// hashes.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").expect("writing to a String");
    }
    s
}

pub fn save_checkpoint(model: &EmbeddingModel, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("transa-checkpoint v1\n");
    writeln!(out, "variant {}", model.variant.label()).unwrap();
    writeln!(out, "dim {}", model.dim).unwrap();
    writeln!(out, "entities {} {}", model.entity_count(), meta.entity_hash).unwrap();
    writeln!(out, "relations {} {}", model.relation_count(), meta.relation_hash).unwrap();
    for id in 0..model.entity_count() as u32 {
        write_row(&mut out, model.entity(id));
    }
    for id in 0..model.relation_count() as u32 {
        write_row(&mut out, model.relation(id));
    }
    if let Some(ws) = &model.weights {
        for w in ws {
            for i in 0..w.dim() {
                write_row(&mut out, w.row(i));
            }
        }
    }
    out.push_str("end\n");
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_row(out: &mut String, row: &[f64]) {
    for (i, x) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x:e}").unwrap();
    }
    out.push('\n');
}

pub fn load_checkpoint(path: &Path) -> Result<(EmbeddingModel, CheckpointMeta)> {
    let content = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let fail = |reason: String| Error::Checkpoint {
        path: path.to_owned(),
        reason,
    };
    let mut lines = content.lines();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| fail(format!("truncated file, expected {what}")))
    };

    if next("header")? != "transa-checkpoint v1" {
        return Err(fail("not a transa checkpoint (bad header)".to_owned()));
    }
    let variant_line = next("variant")?;
    let variant = variant_line
        .strip_prefix("variant ")
        .and_then(Variant::parse)
        .ok_or_else(|| fail(format!("bad variant line `{variant_line}`")))?;
    let dim_line = next("dim")?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| fail(format!("bad dim line `{dim_line}`")))?;
    let parse_section = |line: &str, tag: &str| -> Result<(usize, String)> {
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| fail(format!("expected `{tag}...`, got `{line}`")))?;
        let mut parts = rest.split_whitespace();
        let count = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(format!("bad count in `{line}`")))?;
        let hash = parts
            .next()
            .ok_or_else(|| fail(format!("missing hash in `{line}`")))?;
        Ok((count, hash.to_owned()))
    };
    let (entity_count, entity_hash) = parse_section(next("entities")?, "entities ")?;
    let (relation_count, relation_hash) = parse_section(next("relations")?, "relations ")?;

    let mut model = EmbeddingModel::zeros(variant, dim, entity_count, relation_count)?;
    let mut read_row = |row: &mut [f64], what: &str| -> Result<()> {
        let line = lines
            .next()
            .ok_or_else(|| fail(format!("truncated file in {what}")))?;
        let mut n = 0;
        for (slot, tok) in row.iter_mut().zip(line.split(' ')) {
            *slot = tok
                .parse()
                .map_err(|_| fail(format!("bad float `{tok}` in {what}")))?;
            n += 1;
        }
        if n != dim || line.split(' ').count() != dim {
            return Err(fail(format!("row length mismatch in {what}")));
        }
        Ok(())
    };
    for id in 0..entity_count as u32 {
        read_row(model.entity_mut(id), "entity rows")?;
    }
    for id in 0..relation_count as u32 {
        read_row(model.relation_mut(id), "relation rows")?;
    }
    if variant.uses_weights() {
        for rel in 0..relation_count as u32 {
            let mut w = SquareMat::zeros(dim)?;
            let mut row = vec![0.0; dim];
            for i in 0..dim {
                read_row(&mut row, "weight rows")?;
                for (j, &x) in row.iter().enumerate() {
                    w.set(i, j, x);
                }
            }
            model.set_weight(rel, w);
        }
    }
    if lines.next() != Some("end") {
        return Err(fail("missing end marker".to_owned()));
    }
    Ok((
        model,
        CheckpointMeta {
            entity_hash,
            relation_hash,
        },
    ))
}
