//! Experiment configuration: a flat `key = value` text format with a
//! version tag. Unknown or duplicated keys are errors so that misspelled
//! settings cannot be ignored silently.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::priors::PriorModel;
use crate::sampler::{AcceptanceMode, HyperPrior, SamplerConfig};
use crate::topology::PhWeightParams;

pub const CONFIG_VERSION: u64 = 1;

/// Noise levels of the reference sweeps.
pub const TABLE_NOISE_LEVELS: [f64; 3] = [0.01, 0.03, 0.05];

/// Kernel length scale and Gamma shape used for each example in the
/// reference experiments.
pub fn example_defaults(example_id: u8) -> Result<(f64, f64)> {
    match example_id {
        1 => Ok((0.25, 50.0)),
        2 => Ok((0.15, 50.0)),
        3 => Ok((0.03, 200.0)),
        other => Err(Error::Config(format!(
            "example_id must be 1, 2 or 3, got {other}"
        ))),
    }
}

/// Marginal standard deviation of the reference kernel: the papered 0.1 read
/// as the marginal variance.
pub const REFERENCE_AMPLITUDE: f64 = 0.31622776601683794;

/// Weight sensitivity of the reference persistence prior. The published
/// regularization strengths back-solve to weighted persistence sums of
/// roughly tau * (level + 1) per pair, which pins the sensitivity near zero;
/// the printed 0.001 of the topological prior is read as this parameter.
pub const REFERENCE_ETA_W: f64 = 0.001;

/// pCN step sizes (warm-up phase, sampling phase) of the reference
/// experiments. The hierarchical chains need both: transport toward the
/// posterior bulk happens during the warm-up with coarse steps and a frozen
/// small regularization strength, while sampling near low-variation states
/// under the active regularizer only accepts fine steps (and coarse ones
/// erode sharp features through the coupled Gibbs updates).
pub fn reference_betas(example_id: u8, prior: &PriorModel) -> (f64, f64) {
    match (example_id, prior) {
        (3, PriorModel::Gaussian) => (0.05, 0.05),
        (_, PriorModel::Gaussian) => (0.02, 0.02),
        (3, _) => (0.1, 0.003),
        (_, _) => (0.05, 0.01),
    }
}

/// Fully resolved description of one inversion experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub example_id: u8,
    pub noise_level: f64,
    pub prior: PriorModel,
    pub length_scale: f64,
    pub amplitude: f64,
    pub jitter: f64,
    pub sampler: SamplerConfig,
    pub hyper: HyperPrior,
    /// Seed of the observation noise; independent of the chain seed in
    /// `sampler.seed` so data and proposals can be varied separately.
    pub data_seed: u64,
    /// Fixed observation noise level; when absent sigma is derived from the
    /// data as max(noise_level, 1e-6) * max |Y|.
    pub sigma_override: Option<f64>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Reference configuration for one (example, noise, prior, seed) cell.
    pub fn reference(
        example_id: u8,
        noise_level: f64,
        prior: PriorModel,
        seed: u64,
    ) -> Result<Self> {
        let (length_scale, m1) = example_defaults(example_id)?;
        let hyper = HyperPrior { m1, m2: 0.1 };
        Ok(Self {
            example_id,
            noise_level,
            prior,
            length_scale,
            // the reference experiments read the papered 0.1 as the marginal
            // variance of the kernel
            amplitude: REFERENCE_AMPLITUDE,
            jitter: 1e-10,
            sampler: SamplerConfig {
                n_samples: 100_000,
                beta: reference_betas(example_id, &prior).1,
                burn_in_fraction: 0.5,
                lambda_init: 1.0,
                lambda_warmup_fraction: 0.5,
                warmup_beta: Some(reference_betas(example_id, &prior).0),
                mode: AcceptanceMode::StandardPcn,
                seed,
            },
            hyper,
            data_seed: seed,
            sigma_override: None,
            out_dir: PathBuf::from("out"),
        })
    }

    pub fn validate(&self) -> Result<()> {
        example_defaults(self.example_id)?;
        if !(self.noise_level >= 0.0) {
            return Err(Error::Config(format!(
                "noise_level must be >= 0, got {}",
                self.noise_level
            )));
        }
        if !(self.length_scale > 0.0) {
            return Err(Error::Config(format!(
                "length_scale must be > 0, got {}",
                self.length_scale
            )));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::Config(format!(
                "amplitude must be > 0, got {}",
                self.amplitude
            )));
        }
        if !(self.jitter >= 0.0) {
            return Err(Error::Config(format!(
                "jitter must be >= 0, got {}",
                self.jitter
            )));
        }
        if !(self.hyper.m1 > 0.0 && self.hyper.m2 > 0.0) {
            return Err(Error::Config(format!(
                "m1 and m2 must be > 0, got {} and {}",
                self.hyper.m1, self.hyper.m2
            )));
        }
        if let Some(s) = self.sigma_override {
            if !(s > 0.0) {
                return Err(Error::Config(format!("sigma must be > 0, got {s}")));
            }
        }
        if let PriorModel::PhGaussian(params) = &self.prior {
            params.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.sampler.validate()
    }
}

fn parse_key<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "field {key}: cannot parse {value:?} as {}",
            std::any::type_name::<T>()
        ))
    })
}

/// Parse the flat key-value experiment format. Lines are `key = value`;
/// blank lines and `#` comments are allowed.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if fields.insert(key, value).is_some() {
            return Err(Error::Config(format!("duplicate key {key:?}")));
        }
    }

    const KNOWN: [&str; 21] = [
        "config_version",
        "example_id",
        "noise_level",
        "prior",
        "length_scale",
        "amplitude",
        "jitter",
        "tau",
        "eta_w",
        "n_samples",
        "beta",
        "burn_in_fraction",
        "m1",
        "m2",
        "lambda_init",
        "lambda_warmup_fraction",
        "warmup_beta",
        "mode",
        "chain_seed",
        "data_seed",
        "sigma",
    ];
    for key in fields.keys() {
        if *key != "out_dir" && !KNOWN.contains(key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
    }

    let version: u64 = match fields.get("config_version") {
        Some(v) => parse_key("config_version", v)?,
        None => return Err(Error::Config("missing required key config_version".into())),
    };
    if version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "config_version {version} not supported (expected {CONFIG_VERSION})"
        )));
    }

    let required = |key: &'static str| -> Result<&str> {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
    };
    let example_id: u8 = parse_key("example_id", required("example_id")?)?;
    let noise_level: f64 = parse_key("noise_level", required("noise_level")?)?;
    let prior_name = required("prior")?;

    let (default_l, default_m1) = example_defaults(example_id)?;
    let opt = |key: &str| fields.get(key).copied();
    let tau: f64 = opt("tau").map(|v| parse_key("tau", v)).transpose()?.unwrap_or(3.0);
    let eta_w: f64 = opt("eta_w")
        .map(|v| parse_key("eta_w", v))
        .transpose()?
        .unwrap_or(REFERENCE_ETA_W);
    let prior = match prior_name {
        "gaussian" => PriorModel::Gaussian,
        "tv-gaussian" => PriorModel::TvGaussian,
        "ph-gaussian" => PriorModel::PhGaussian(PhWeightParams { tau, eta_w }),
        other => {
            return Err(Error::Config(format!(
                "prior must be gaussian, tv-gaussian or ph-gaussian, got {other:?}"
            )))
        }
    };

    let m1: f64 = opt("m1").map(|v| parse_key("m1", v)).transpose()?.unwrap_or(default_m1);
    let m2: f64 = opt("m2").map(|v| parse_key("m2", v)).transpose()?.unwrap_or(0.1);
    let hyper = HyperPrior { m1, m2 };
    let lambda_init: f64 = opt("lambda_init")
        .map(|v| parse_key("lambda_init", v))
        .transpose()?
        .unwrap_or(1.0);
    let mode = match opt("mode") {
        Some(v) => AcceptanceMode::parse(v)?,
        None => AcceptanceMode::StandardPcn,
    };

    let config = ExperimentConfig {
        example_id,
        noise_level,
        prior,
        length_scale: opt("length_scale")
            .map(|v| parse_key("length_scale", v))
            .transpose()?
            .unwrap_or(default_l),
        amplitude: opt("amplitude")
            .map(|v| parse_key("amplitude", v))
            .transpose()?
            .unwrap_or(REFERENCE_AMPLITUDE),
        jitter: opt("jitter")
            .map(|v| parse_key("jitter", v))
            .transpose()?
            .unwrap_or(1e-10),
        sampler: SamplerConfig {
            n_samples: opt("n_samples")
                .map(|v| parse_key("n_samples", v))
                .transpose()?
                .unwrap_or(100_000),
            beta: opt("beta")
                .map(|v| parse_key("beta", v))
                .transpose()?
                .unwrap_or_else(|| reference_betas(example_id, &prior).1),
            burn_in_fraction: opt("burn_in_fraction")
                .map(|v| parse_key("burn_in_fraction", v))
                .transpose()?
                .unwrap_or(0.5),
            lambda_init,
            lambda_warmup_fraction: opt("lambda_warmup_fraction")
                .map(|v| parse_key("lambda_warmup_fraction", v))
                .transpose()?
                .unwrap_or(0.5),
            warmup_beta: Some(
                opt("warmup_beta")
                    .map(|v| parse_key("warmup_beta", v))
                    .transpose()?
                    .unwrap_or_else(|| reference_betas(example_id, &prior).0),
            ),
            mode,
            seed: opt("chain_seed")
                .map(|v| parse_key("chain_seed", v))
                .transpose()?
                .unwrap_or(0),
        },
        hyper,
        data_seed: opt("data_seed")
            .map(|v| parse_key("data_seed", v))
            .transpose()?
            .unwrap_or(1),
        sigma_override: opt("sigma").map(|v| parse_key("sigma", v)).transpose()?,
        out_dir: PathBuf::from(opt("out_dir").unwrap_or("out")),
    };
    config.validate()?;
    Ok(config)
}

pub fn parse_config_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}
