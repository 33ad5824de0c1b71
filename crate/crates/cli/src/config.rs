//! Optional overrides for the vehicle's physical parameters.

use std::path::Path;

use anyhow::{bail, Context};
use rgvroute::RgvParams;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RgvOverride {
    pub w_rgv: Option<f64>,
    pub accel: Option<f64>,
    pub cruise_speed: Option<f64>,
    pub mu: Option<f64>,
    pub g: Option<f64>,
}

impl RgvOverride {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RgvOverride = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        if let Err(e) = cfg.apply(RgvParams::default()).validate() {
            bail!("{}: {e}", path.display());
        }
        Ok(cfg)
    }

    pub fn apply(&self, mut p: RgvParams) -> RgvParams {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.w_rgv, self.w_rgv);
        set(&mut p.accel, self.accel);
        set(&mut p.cruise_speed, self.cruise_speed);
        set(&mut p.mu, self.mu);
        set(&mut p.g, self.g);
        p
    }
}
