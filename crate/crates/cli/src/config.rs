//! Tracker configuration file plus CLI-flag overrides.
//!
//! Precedence: built-in defaults < config file < flags. Every effective
//! value is reported with its provenance so runs are auditable.

use std::path::Path;

use motpipe_core::kalman::NoiseConfig;
use motpipe_core::tracker::TrackerConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    association: AssociationSection,
    tracker: TrackerSection,
    kalman: Option<NoiseConfig>,
    fingerprint: FingerprintSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AssociationSection {
    alpha: Option<f64>,
    beta: Option<f64>,
    gate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrackerSection {
    timeout: Option<u32>,
    buffer: Option<u32>,
    min_confidence: Option<f64>,
    report_coasting: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FingerprintSection {
    dim: Option<usize>,
}

/// Flag-level overrides; `None` means "not given".
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gate: Option<f64>,
    pub timeout: Option<u32>,
    pub buffer: Option<u32>,
    pub min_conf: Option<f64>,
}

/// Effective config plus one provenance line per key.
pub struct ResolvedConfig {
    pub tracker: TrackerConfig,
    pub provenance: Vec<String>,
}

pub fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<ResolvedConfig, CliError> {
    let mut cfg = TrackerConfig::default();
    let file: FileConfig = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let mut provenance = Vec::new();
    let apply_f64 = |name: &str,
                         slot: &mut f64,
                         from_file: Option<f64>,
                         from_flag: Option<f64>,
                         prov: &mut Vec<String>| {
        let _ = name;
        if let Some(v) = from_file {
            *slot = v;
        }
        if let Some(v) = from_flag {
            *slot = v;
        }
        let source = if from_flag.is_some() {
            "flag"
        } else if from_file.is_some() {
            "config"
        } else {
            "default"
        };
        prov.push(format!("{name} = {slot} ({source})"));
    };

    apply_f64("alpha", &mut cfg.weights.alpha, file.association.alpha, overrides.alpha, &mut provenance);
    apply_f64("beta", &mut cfg.weights.beta, file.association.beta, overrides.beta, &mut provenance);
    apply_f64("gate", &mut cfg.weights.gate, file.association.gate, overrides.gate, &mut provenance);
    apply_f64(
        "min_confidence",
        &mut cfg.min_confidence,
        file.tracker.min_confidence,
        overrides.min_conf,
        &mut provenance,
    );

    let apply_u32 = |name: &str,
                         slot: &mut u32,
                         from_file: Option<u32>,
                         from_flag: Option<u32>,
                         prov: &mut Vec<String>| {
        if let Some(v) = from_file {
            *slot = v;
        }
        if let Some(v) = from_flag {
            *slot = v;
        }
        let source = if from_flag.is_some() {
            "flag"
        } else if from_file.is_some() {
            "config"
        } else {
            "default"
        };
        prov.push(format!("{name} = {slot} ({source})"));
    };
    apply_u32("timeout", &mut cfg.timeout, file.tracker.timeout, overrides.timeout, &mut provenance);
    apply_u32("buffer", &mut cfg.buffer_len, file.tracker.buffer, overrides.buffer, &mut provenance);

    if let Some(v) = file.tracker.report_coasting {
        cfg.report_coasting = v;
        provenance.push(format!("report_coasting = {v} (config)"));
    } else {
        provenance.push(format!("report_coasting = {} (default)", cfg.report_coasting));
    }
    if let Some(noise) = file.kalman {
        cfg.noise = noise;
        provenance.push("kalman noise (config)".into());
    } else {
        provenance.push("kalman noise (default)".into());
    }
    if let Some(dim) = file.fingerprint.dim {
        cfg.fingerprint_dim = dim;
        provenance.push(format!("fingerprint_dim = {dim} (config)"));
    } else {
        provenance.push(format!("fingerprint_dim = {} (default)", cfg.fingerprint_dim));
    }

    cfg.validate().map_err(CliError::Config)?;
    Ok(ResolvedConfig { tracker: cfg, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_without_file() {
        let r = resolve(None, &Overrides::default()).unwrap();
        assert_eq!(r.tracker.weights.alpha, 1.0);
        assert_eq!(r.tracker.timeout, 30);
        assert!(r.provenance.iter().all(|l| l.contains("default")));
    }

    #[test]
    fn file_overrides_defaults_flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "[association]\nalpha = 0.5\nbeta = 2.0\n[tracker]\ntimeout = 10\n[fingerprint]\ndim = 64\n"
        )
        .unwrap();
        let ov = Overrides { beta: Some(3.0), ..Overrides::default() };
        let r = resolve(Some(f.path()), &ov).unwrap();
        assert_eq!(r.tracker.weights.alpha, 0.5);
        assert_eq!(r.tracker.weights.beta, 3.0);
        assert_eq!(r.tracker.timeout, 10);
        assert_eq!(r.tracker.fingerprint_dim, 64);
        assert!(r.provenance.iter().any(|l| l == "beta = 3 (flag)"));
        assert!(r.provenance.iter().any(|l| l == "alpha = 0.5 (config)"));
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[association]\nalhpa = 0.5\n").unwrap();
        assert!(matches!(
            resolve(Some(f.path()), &Overrides::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn invalid_value_is_a_config_error() {
        let ov = Overrides { gate: Some(-1.0), ..Overrides::default() };
        assert!(matches!(resolve(None, &ov), Err(CliError::Config(_))));
    }
}
