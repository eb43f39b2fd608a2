//! Run configuration: built-in defaults, named presets, flat key-value
//! config files, and flag overrides, in that precedence order (later wins).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use transa::data::Strategy;
use transa::metric::Variant;
use transa::train::TrainConfig;

/// Named hyperparameter presets matching the reported best configurations
/// per benchmark.
pub fn preset(name: &str) -> Result<TrainConfig> {
    let base = TrainConfig::default();
    let cfg = match name {
        // The defaults already encode the WN18 configuration.
        "wn18" => base,
        "fb15k" => TrainConfig {
            alpha: 0.002,
            k: 200,
            gamma: 3.2,
            c: 0.2,
            epochs: 1000,
            batch_size: 500,
            validation_period: 50,
            ..base
        },
        "wn11" => TrainConfig {
            alpha: 0.02,
            k: 50,
            gamma: 10.0,
            c: 0.2,
            epochs: 500,
            batch_size: 100,
            validation_period: 10,
            ..base
        },
        "fb13" => TrainConfig {
            alpha: 0.002,
            k: 200,
            gamma: 3.0,
            c: 0.00002,
            epochs: 1000,
            batch_size: 500,
            ..base
        },
        other => bail!("unknown preset `{other}` (expected wn18, fb15k, wn11 or fb13)"),
    };
    Ok(cfg)
}

/// Applies one `key = value` assignment to the config.
pub fn apply_key(cfg: &mut TrainConfig, key: &str, value: &str) -> Result<()> {
    let parse_f64 = || -> Result<f64> {
        value
            .parse()
            .with_context(|| format!("bad value `{value}` for `{key}`"))
    };
    let parse_usize = || -> Result<usize> {
        value
            .parse()
            .with_context(|| format!("bad value `{value}` for `{key}`"))
    };
    match key {
        "alpha" => cfg.alpha = parse_f64()?,
        "k" => cfg.k = parse_usize()?,
        "gamma" => cfg.gamma = parse_f64()?,
        "c" => cfg.c = parse_f64()?,
        "lambda" => cfg.lambda = parse_f64()?,
        "epochs" => cfg.epochs = parse_usize()?,
        "batch_size" => cfg.batch_size = parse_usize()?,
        "strategy" => {
            cfg.strategy = Strategy::parse(value)
                .ok_or_else(|| anyhow!("bad strategy `{value}` (expected unif or bern)"))?
        }
        "variant" => {
            cfg.variant = Variant::parse(value)
                .ok_or_else(|| anyhow!("bad variant `{value}` (expected transe, transa or psd)"))?
        }
        "w_update_period" => cfg.w_update_period = parse_usize()?,
        "seed" => {
            cfg.seed = value
                .parse()
                .with_context(|| format!("bad value `{value}` for `seed`"))?
        }
        "validation_period" => cfg.validation_period = parse_usize()?,
        "patience" => cfg.patience = parse_usize()?,
        other => bail!("unknown config key `{other}`"),
    }
    Ok(())
}

/// Parses a flat `key = value` config file; `#` starts a comment.
pub fn apply_file(cfg: &mut TrainConfig, path: &Path) -> Result<()> {
    let content =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    for (idx, line) in content.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), idx + 1))?;
        apply_key(cfg, key.trim(), value.trim())
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
    }
    Ok(())
}

/// Flat echo of every knob, for manifests and reports.
pub fn config_map(cfg: &TrainConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("alpha".into(), cfg.alpha.to_string());
    m.insert("k".into(), cfg.k.to_string());
    m.insert("gamma".into(), cfg.gamma.to_string());
    m.insert("c".into(), cfg.c.to_string());
    m.insert("lambda".into(), cfg.lambda.to_string());
    m.insert("epochs".into(), cfg.epochs.to_string());
    m.insert("batch_size".into(), cfg.batch_size.to_string());
    m.insert("strategy".into(), cfg.strategy.label().into());
    m.insert("variant".into(), cfg.variant.label().into());
    m.insert("w_update_period".into(), cfg.w_update_period.to_string());
    m.insert("seed".into(), cfg.seed.to_string());
    m.insert("validation_period".into(), cfg.validation_period.to_string());
    m.insert("patience".into(), cfg.patience.to_string());
    m
}
