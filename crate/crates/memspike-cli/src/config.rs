//! TOML configuration: device parameter overrides and gate definitions.
//!
//! Precedence is built-in defaults < config file < command-line flags.
//! Preset gates (`or`, `xor`, `not`) accept partial overrides; any other
//! `[gate.<name>]` section defines a new two-input gate and must give
//! `zero_volts`, `one_volts`, `threshold` and `truth`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use memspike::{Bit, Comparator, DeviceParams, Encoding, Error, GateSpec, Truth};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub device: DeviceOverrides,
    #[serde(default)]
    pub gate: BTreeMap<String, GateOverrides>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverrides {
    pub kappa: Option<f64>,
    pub tau_u: Option<f64>,
    pub tau_s: Option<f64>,
    pub g_dc: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub zero_hold: Option<f64>,
    pub eps_u: Option<f64>,
    pub eps_s: Option<f64>,
    pub v_compliance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOverrides {
    pub zero_volts: Option<f64>,
    pub one_volts: Option<f64>,
    pub threshold: Option<f64>,
    /// Outputs for inputs 00, 01, 10, 11 (or 0, 1 for a unary gate).
    pub truth: Option<Vec<u8>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, String> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
            }
        }
    }

    pub fn device_params(&self, no_noise: bool) -> DeviceParams {
        let mut params = DeviceParams::default();
        let d = &self.device;
        if let Some(v) = d.kappa {
            params.kappa = v;
        }
        if let Some(v) = d.tau_u {
            params.tau_u = v;
        }
        if let Some(v) = d.tau_s {
            params.tau_s = v;
        }
        if let Some(v) = d.g_dc {
            params.g_dc = v;
        }
        if let Some(v) = d.noise_sigma {
            params.noise_sigma = v;
        }
        if let Some(v) = d.zero_hold {
            params.zero_hold = v;
        }
        if let Some(v) = d.eps_u {
            params.eps_u = v;
        }
        if let Some(v) = d.eps_s {
            params.eps_s = v;
        }
        if let Some(v) = d.v_compliance {
            params.v_compliance = v;
        }
        if no_noise {
            params.noise_sigma = 0.0;
        }
        params
    }

    pub fn gate(&self, name: &str) -> Result<GateSpec, Error> {
        let overrides = self.gate.get(name);
        match GateSpec::by_name(name) {
            Ok(mut spec) => {
                if let Some(o) = overrides {
                    if let Some(v) = o.zero_volts {
                        spec.encoding.zero = v;
                    }
                    if let Some(v) = o.one_volts {
                        spec.encoding.one = v;
                    }
                    if let Some(v) = o.threshold {
                        spec.threshold = v;
                    }
                    if let Some(bits) = &o.truth {
                        spec.truth = parse_truth(name, bits)?;
                    }
                }
                spec.validate()?;
                Ok(spec)
            }
            Err(unknown) => {
                let Some(o) = overrides else {
                    return Err(unknown);
                };
                let (Some(zero), Some(one), Some(threshold), Some(bits)) =
                    (o.zero_volts, o.one_volts, o.threshold, o.truth.as_ref())
                else {
                    return Err(Error::InvalidGate {
                        gate: name.to_string(),
                        reason: "custom gates need zero_volts, one_volts, threshold and truth",
                    });
                };
                let spec = GateSpec {
                    name: name.to_string(),
                    encoding: Encoding { zero, one },
                    threshold,
                    comparator: Comparator::Magnitude,
                    truth: parse_truth(name, bits)?,
                };
                spec.validate()?;
                Ok(spec)
            }
        }
    }
}

fn parse_truth(gate: &str, bits: &[u8]) -> Result<Truth, Error> {
    let parse_bit = |b: u8| match b {
        0 => Ok(Bit::Zero),
        1 => Ok(Bit::One),
        other => Err(Error::InvalidBit(other.to_string())),
    };
    match bits {
        [a, b] => Ok(Truth::Unary([parse_bit(*a)?, parse_bit(*b)?])),
        [a, b, c, d] => Ok(Truth::Binary([
            parse_bit(*a)?,
            parse_bit(*b)?,
            parse_bit(*c)?,
            parse_bit(*d)?,
        ])),
        _ => Err(Error::InvalidGate {
            gate: gate.to_string(),
            reason: "truth must list 4 outputs (or 2 for a unary gate)",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_config() {
        let cfg = FileConfig::load(None).unwrap();
        assert_eq!(cfg.device_params(false), DeviceParams::default());
        let or = cfg.gate("or").unwrap();
        assert_eq!(or.threshold, memspike::OR_THRESHOLD);
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg: FileConfig = toml::from_str(
            r#"
            [device]
            noise_sigma = 5e-9

            [gate.or]
            threshold = 5e-9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.device_params(false).noise_sigma, 5e-9);
        // the flag wins over the config
        assert_eq!(cfg.device_params(true).noise_sigma, 0.0);
        assert_eq!(cfg.gate("or").unwrap().threshold, 5e-9);
    }

    #[test]
    fn custom_gate_requires_full_definition() {
        let cfg: FileConfig = toml::from_str(
            r#"
            [gate.nand]
            threshold = 1e-8
            "#,
        )
        .unwrap();
        assert!(matches!(cfg.gate("nand"), Err(Error::InvalidGate { .. })));
        let cfg: FileConfig = toml::from_str(
            r#"
            [gate.myor]
            zero_volts = 0.01
            one_volts = 0.2
            threshold = 1.8e-8
            truth = [0, 1, 1, 1]
            "#,
        )
        .unwrap();
        let spec = cfg.gate("myor").unwrap();
        assert_eq!(spec.arity(), 2);
        assert_eq!(spec.threshold, 1.8e-8);
    }

    #[test]
    fn unknown_gate_stays_unknown() {
        let cfg = FileConfig::load(None).unwrap();
        assert!(matches!(cfg.gate("nor"), Err(Error::UnknownGate(_))));
    }
}
