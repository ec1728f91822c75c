//! Run configuration: a TOML document layered over the committed reference
//! config, so every physical default is versioned data.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel_plan::{build_configuration, ChannelPlan};
use crate::error::{Error, Result};
use crate::noise::{output_power_dbm, DetectionParams, DwdmParams, FiberSpec, FwmParams, RamanTable};
use crate::scenario::{split_lengths, LinkScenario, PathSettings};
use crate::security::ProtocolParams;

pub const REFERENCE_CONFIG: &str = include_str!("../config/reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub configurations: Vec<u32>,
    pub ratios: Vec<f64>,
    pub max_km: f64,
    pub step_km: f64,
    pub search_upper_km: f64,
    pub resolution_km: f64,
    #[serde(default)]
    pub emit_plot_script: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raman_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub baseline_excess_snu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub alice: PathSettings,
    pub bob: PathSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverride {
    pub quantum_wavelength_nm: f64,
    pub classical_thz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_power_dbm: Option<f64>,
}

/// Checksums written into a run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool_version: String,
    pub raman_table_sha256: String,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub protocol: ProtocolParams,
    pub fiber: FiberSpec,
    pub dwdm: DwdmParams,
    pub detection: DetectionParams,
    pub fwm: FwmParams,
    pub noise: NoiseSection,
    pub paths: PathsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))
}

impl RunConfig {
    pub fn reference() -> Self {
        Self::from_toml_str("").expect("reference config is valid")
    }

    /// Parses `text` as overrides on top of the reference config.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table = parse_table(REFERENCE_CONFIG, "reference config")?;
        merge(&mut table, parse_table(text, "config")?);
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::InvalidInput(m) => Error::Config(m),
            other => other,
        };
        let run = &self.run;
        if self.plan.is_none() {
            if run.configurations.is_empty() {
                return Err(Error::Config("no configurations requested".into()));
            }
            if let Some(bad) = run.configurations.iter().find(|&&id| !(1..=4).contains(&id)) {
                return Err(Error::Config(format!(
                    "unknown configuration id {bad} (expected 1..=4)"
                )));
            }
        }
        if run.ratios.is_empty() || run.ratios.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::Config(
                "ratios must be a non-empty list of positive numbers".into(),
            ));
        }
        for (name, v) in [
            ("max_km", run.max_km),
            ("step_km", run.step_km),
            ("search_upper_km", run.search_upper_km),
            ("resolution_km", run.resolution_km),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("run.{name} must be positive")));
            }
        }
        if let Some(rate) = run.symbol_rate_hz {
            if !(rate > 0.0) {
                return Err(Error::Config("run.symbol_rate_hz must be positive".into()));
            }
        }
        if !(self.noise.baseline_excess_snu >= 0.0) {
            return Err(Error::Config("noise.baseline_excess_snu must be >= 0".into()));
        }
        self.protocol.validate().map_err(cfg_err)?;
        self.dwdm.validate().map_err(cfg_err)?;
        self.detection.validate().map_err(cfg_err)?;
        self.fwm.validate().map_err(cfg_err)?;
        if let Some(p) = &self.plan {
            self.override_plan(p).map_err(cfg_err)?;
        }
        Ok(())
    }

    /// The sweep grid 0, step, 2·step, ... up to `max_km`.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let n = (self.run.max_km / self.run.step_km + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.run.step_km).collect()
    }

    pub fn output_power_dbm(&self) -> f64 {
        output_power_dbm(&self.dwdm)
    }

    fn override_plan(&self, p: &PlanOverride) -> Result<ChannelPlan> {
        ChannelPlan::new(
            p.quantum_wavelength_nm,
            p.classical_thz.iter().map(|f| f * 1e12).collect(),
            p.output_power_dbm.unwrap_or_else(|| self.output_power_dbm()),
        )
    }

    /// Labelled plans to run: the explicit override, or the requested
    /// reference configurations.
    pub fn plans(&self) -> Result<Vec<(String, ChannelPlan)>> {
        match &self.plan {
            Some(p) => Ok(vec![("custom".to_string(), self.override_plan(p)?)]),
            None => self
                .run
                .configurations
                .iter()
                .map(|&id| Ok((id.to_string(), build_configuration(id, self.output_power_dbm())?)))
                .collect(),
        }
    }

    /// Scenario at zero length with the given plan and asymmetry ratio.
    pub fn scenario(&self, plan: &ChannelPlan, ratio: f64, table: Arc<RamanTable>) -> Result<LinkScenario> {
        let (length_alice_km, length_bob_km) = split_lengths(0.0, ratio)?;
        let s = LinkScenario {
            length_alice_km,
            length_bob_km,
            asymmetry_ratio: ratio,
            plan: plan.clone(),
            fiber: self.fiber,
            dwdm: self.dwdm,
            detection: self.detection,
            fwm: self.fwm,
            protocol: self.protocol,
            raman_table: table,
            alice: self.paths.alice,
            bob: self.paths.bob,
            baseline_excess_snu: self.noise.baseline_excess_snu,
        };
        s.validate()?;
        Ok(s)
    }
}
