use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featselect::Decay;
use crate::imaging::CN_CHANNELS;
use crate::scale::ScaleConfig;

/// Tracker parameters. Serialized flat so config files read as plain
/// `key = value` lists; absent keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// appearance and filter blend rate
    pub lr_appearance: f64,
    /// projection history blend rate
    pub lr_dim: f64,
    /// color-name channels kept after ranking
    pub num_selected: usize,
    /// projected color dimensions
    pub compressed_dim: usize,
    pub kernel_sigma: f64,
    pub label_sigma_factor: f64,
    pub lambda_reg: f64,
    /// search window enlargement; `None` estimates it from frame and box size
    pub padding: Option<f64>,
    pub microshift: bool,
    pub scale_adapt: bool,
    /// cap on the larger side of the template, in cells
    pub max_template_side: usize,
    /// path decay for ranking; `None` uses `0.9 / ρ(A)`
    pub inffs_decay: Option<f64>,
    /// rank and re-select channels every frame; off keeps the initial top-k
    pub dynamic_selection: bool,
    pub patch_side: usize,
    pub dict_atoms: usize,
    pub dict_max_iters: usize,
    pub sparsity: f64,
    pub scales: Vec<f64>,
    pub shifts: Vec<f64>,
    pub scale_damping: f64,
    pub rng_seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        let scale = ScaleConfig::default();
        Self {
            lr_appearance: 0.005,
            lr_dim: 0.1,
            num_selected: 8,
            compressed_dim: 4,
            kernel_sigma: 0.2,
            label_sigma_factor: 0.1,
            lambda_reg: 1e-2,
            padding: None,
            microshift: true,
            scale_adapt: true,
            max_template_side: 96,
            inffs_decay: None,
            dynamic_selection: true,
            patch_side: scale.patch_side,
            dict_atoms: scale.atoms,
            dict_max_iters: scale.max_iters,
            sparsity: scale.sparsity,
            scales: scale.scales,
            shifts: scale.shifts,
            scale_damping: scale.damping,
            rng_seed: scale.rng_seed,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lr_appearance > 0.0 && self.lr_appearance <= 1.0) {
            return bad(format!("lr_appearance {} outside (0, 1]", self.lr_appearance));
        }
        if !(self.lr_dim > 0.0 && self.lr_dim <= 1.0) {
            return bad(format!("lr_dim {} outside (0, 1]", self.lr_dim));
        }
        if !(1 <= self.compressed_dim
            && self.compressed_dim <= self.num_selected
            && self.num_selected <= CN_CHANNELS)
        {
            return bad(format!(
                "need 1 <= compressed_dim ({}) <= num_selected ({}) <= {CN_CHANNELS}",
                self.compressed_dim, self.num_selected
            ));
        }
        if !(self.kernel_sigma > 0.0) || !(self.label_sigma_factor > 0.0) {
            return bad("kernel_sigma and label_sigma_factor must be positive".into());
        }
        if !(self.lambda_reg >= 1e-4) {
            return bad(format!("lambda_reg {} below 1e-4", self.lambda_reg));
        }
        if let Some(p) = self.padding {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("padding {p} must be a nonnegative number"));
            }
        }
        if let Some(r) = self.inffs_decay {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("inffs_decay {r} must be positive"));
            }
        }
        if self.max_template_side < 4 {
            return bad("max_template_side must be at least 4".into());
        }
        if self.patch_side == 0 || self.dict_atoms == 0 || self.dict_max_iters == 0 {
            return bad("patch_side, dict_atoms and dict_max_iters must be positive".into());
        }
        if !(self.sparsity >= 0.0) {
            return bad("sparsity must be nonnegative".into());
        }
        if !self.scales.contains(&1.0) || self.scales.iter().any(|s| !(*s > 0.0)) {
            return bad("scales must be positive and include 1.0".into());
        }
        if !self.shifts.contains(&0.0) {
            return bad("shifts must include 0".into());
        }
        if !(0.0..=1.0).contains(&self.scale_damping) {
            return bad("scale_damping must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn decay(&self) -> Decay {
        self.inffs_decay.map_or(Decay::Auto, Decay::Fixed)
    }

    pub fn scale_config(&self) -> ScaleConfig {
        ScaleConfig {
            patch_side: self.patch_side,
            atoms: self.dict_atoms,
            max_iters: self.dict_max_iters,
            sparsity: self.sparsity,
            scales: self.scales.clone(),
            shifts: self.shifts.clone(),
            damping: self.scale_damping,
            rng_seed: self.rng_seed,
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn from_str_auto(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides; values parse as JSON, falling back to a
    /// plain string.
    pub fn with_overrides<'a>(&self, pairs: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let map = value.as_object_mut().expect("config serializes to an object");
        for pair in pairs {
            let (key, raw) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {pair:?} is not key=value")))?;
            let key = key.trim().replace('-', "_");
            if !map.contains_key(&key) {
                return Err(Error::Config(format!("unknown config key {key:?}")));
            }
            let raw = raw.trim();
            let parsed = match raw {
                "auto" | "none" => serde_json::Value::Null,
                _ => serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.into())),
            };
            map.insert(key, parsed);
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
