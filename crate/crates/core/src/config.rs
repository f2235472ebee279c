//! Plain-text run configuration: one `key = value` per line, `#` starts a
//! comment. Keys are `m`, `omega0`, `kappa`, `gamma1`, `gamma2`, `T1`, `T2`,
//! `regime`, `s`, `d`; anything missing falls back to [`RunConfig::default`].

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{InitialState, Regime, SystemParams};

/// A validated parameter set plus initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: SystemParams,
    pub init: InitialState,
}

impl Default for RunConfig {
    /// `m = 2, omega0 = 1, kappa = -1, gamma = 0.01, T1 = 1, T2 = 1/4`, high
    /// temperature, `s = 1, d = 6`.
    fn default() -> Self {
        RunConfig {
            params: SystemParams {
                m: 2.0,
                omega0: 1.0,
                kappa: -1.0,
                gamma1: 0.01,
                gamma2: 0.01,
                t1: 1.0,
                t2: 0.25,
                regime: Regime::HighTemperature,
            },
            init: InitialState { s: 1.0, d: 6.0 },
        }
    }
}

/// Partial assignment of configuration keys, as read from a file or flags.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfigValues {
    pub m: Option<f64>,
    pub omega0: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub regime: Option<Regime>,
    pub s: Option<f64>,
    pub d: Option<f64>,
}

pub const CONFIG_KEYS: [&str; 10] = ["m", "omega0", "kappa", "gamma1", "gamma2", "T1", "T2", "regime", "s", "d"];

impl ConfigValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = ConfigValues::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key.to_string()) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            seen.push(key.to_string());
            if key == "regime" {
                values.regime = Some(value.parse().map_err(|e: Error| err(e.to_string()))?);
                continue;
            }
            let number: f64 = value
                .parse()
                .map_err(|_| err(format!("'{value}' is not a number (key '{key}')")))?;
            let slot = values
                .number_slot(key)
                .ok_or_else(|| err(format!("unknown key '{key}' (expected one of {})", CONFIG_KEYS.join(", "))))?;
            *slot = Some(number);
        }
        Ok(values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn number_slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "m" => &mut self.m,
            "omega0" => &mut self.omega0,
            "kappa" => &mut self.kappa,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "T1" => &mut self.t1,
            "T2" => &mut self.t2,
            "s" => &mut self.s,
            "d" => &mut self.d,
            _ => return None,
        })
    }

    /// Values from `other` win where set.
    pub fn overridden_by(self, other: &ConfigValues) -> ConfigValues {
        ConfigValues {
            m: other.m.or(self.m),
            omega0: other.omega0.or(self.omega0),
            kappa: other.kappa.or(self.kappa),
            gamma1: other.gamma1.or(self.gamma1),
            gamma2: other.gamma2.or(self.gamma2),
            t1: other.t1.or(self.t1),
            t2: other.t2.or(self.t2),
            regime: other.regime.or(self.regime),
            s: other.s.or(self.s),
            d: other.d.or(self.d),
        }
    }

    /// Fills unset keys from the defaults and validates the result.
    pub fn resolve(&self) -> Result<RunConfig> {
        let RunConfig { params: p, init } = RunConfig::default();
        let params = SystemParams::new(
            self.m.unwrap_or(p.m),
            self.omega0.unwrap_or(p.omega0),
            self.kappa.unwrap_or(p.kappa),
            self.gamma1.unwrap_or(p.gamma1),
            self.gamma2.unwrap_or(p.gamma2),
            self.t1.unwrap_or(p.t1),
            self.t2.unwrap_or(p.t2),
            self.regime.unwrap_or(p.regime),
        )?;
        let init = InitialState::new(self.s.unwrap_or(init.s), self.d.unwrap_or(init.d))?;
        Ok(RunConfig { params, init })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = "# attractive coupling set\nm = 1\nomega0 = 1.3\nkappa = -1.6   # attractive\n\ngamma1=0.009\ngamma2 = 0.01\nT1 = 2\nT2 = 4\nregime = weak\ns = 10\nd = 6\n";
        let cfg = ConfigValues::parse(text).unwrap().resolve().unwrap();
        assert_eq!(cfg.params.kappa, -1.6);
        assert_eq!(cfg.params.gamma1, 0.009);
        assert_eq!(cfg.params.t2, 4.0);
        assert_eq!(cfg.params.regime, Regime::WeakCoupling);
        assert_eq!(cfg.init.s, 10.0);
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ConfigValues::parse("").unwrap().resolve().unwrap(), RunConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigValues::parse("T1 = 3\nT2 = 2").unwrap();
        let flags = ConfigValues { t1: Some(0.5), ..Default::default() };
        let cfg = file.overridden_by(&flags).resolve().unwrap();
        assert_eq!((cfg.params.t1, cfg.params.t2), (0.5, 2.0));
    }

    #[test]
    fn reports_line_numbers() {
        for (text, line) in [
            ("m = 1\nfoo = 2", 2),
            ("m = 1\n\nkappa: 3", 3),
            ("m = abc", 1),
            ("m = 1\nm = 2", 2),
            ("regime = lukewarm", 1),
        ] {
            match ConfigValues::parse(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn resolve_validates() {
        let v = ConfigValues { kappa: Some(-5.0), ..Default::default() };
        assert!(matches!(v.resolve(), Err(Error::UnstableSystem { .. })));
        let v = ConfigValues { s: Some(0.0), ..Default::default() };
        assert!(v.resolve().is_err());
    }
}
