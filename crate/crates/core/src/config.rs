//! Experiment configuration in TOML. Durations are strings with a unit
//! suffix, e.g. `"264us"` or `"100ns"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::parse_duration;
use crate::codes::CodeKind;
use crate::error::{Error, Result};
use crate::timing::{Scheme, TimingModel};

/// Shortest string in a common unit that parses back to exactly `x`.
pub fn format_duration_exact(x: f64) -> String {
    for (unit, scale) in [("us", 1e6), ("ns", 1e9), ("ms", 1e3), ("s", 1.0)] {
        let s = format!("{}{unit}", x * scale);
        if s.len() <= 12 && parse_duration(&s).ok() == Some(x) {
            return s;
        }
    }
    format!("{x:e}s")
}

mod duration {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_duration_exact(*x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        crate::circuit::parse_duration(&s).map_err(serde::de::Error::custom)
    }
}

mod opt_duration {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_str(&super::format_duration_exact(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| crate::circuit::parse_duration(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

mod durations {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match xs {
            Some(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(&super::format_duration_exact(*x))?;
                }
                seq.end()
            }
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| v.iter().map(|s| crate::circuit::parse_duration(s).map_err(serde::de::Error::custom)).collect())
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    #[serde(with = "duration")]
    pub t_2q: f64,
    #[serde(with = "duration")]
    pub t_meas: f64,
    #[serde(with = "duration")]
    pub t_xfer: f64,
    #[serde(with = "duration")]
    pub t_ncx: f64,
    #[serde(with = "opt_duration", default, skip_serializing_if = "Option::is_none")]
    pub t_sq: Option<f64>,
    #[serde(with = "opt_duration", default, skip_serializing_if = "Option::is_none")]
    pub t_scx: Option<f64>,
    #[serde(with = "opt_duration", default, skip_serializing_if = "Option::is_none")]
    pub t_nscx: Option<f64>,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingModel::default().into()
    }
}

impl From<TimingModel> for TimingConfig {
    fn from(t: TimingModel) -> Self {
        Self {
            t_2q: t.t_2q,
            t_meas: t.t_meas,
            t_xfer: t.t_xfer,
            t_ncx: t.t_ncx,
            t_sq: t.t_sq_override,
            t_scx: t.t_scx_override,
            t_nscx: t.t_nscx_override,
        }
    }
}

impl From<&TimingConfig> for TimingModel {
    fn from(t: &TimingConfig) -> Self {
        Self {
            t_2q: t.t_2q,
            t_meas: t.t_meas,
            t_xfer: t.t_xfer,
            t_ncx: t.t_ncx,
            t_sq_override: t.t_sq,
            t_scx_override: t.t_scx,
            t_nscx_override: t.t_nscx,
        }
    }
}

/// Log-spaced points from `min` to `max`, or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(with = "opt_duration", default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(with = "opt_duration", default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(with = "durations", default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self { min: Some(1e-6), max: Some(1e-2), points: Some(41), taus: None }
    }
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        match (self.min, self.max, self.points, &self.taus) {
            (None, None, None, Some(taus)) => {
                if taus.is_empty() {
                    return Err(Error::Parameter("sweep.taus is empty".into()));
                }
                Ok(())
            }
            (Some(min), Some(max), Some(points), None) => {
                if min.is_nan() || min <= 0.0 {
                    return Err(Error::Parameter("sweep.min must be positive".into()));
                }
                if max.is_nan() || max < min {
                    return Err(Error::Parameter("sweep.max must be at least sweep.min".into()));
                }
                if points < 2 {
                    return Err(Error::Parameter("sweep.points must be at least 2".into()));
                }
                Ok(())
            }
            _ => Err(Error::Parameter("sweep needs either min/max/points or taus".into())),
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if let Some(t) = &self.taus {
            return Ok(t.clone());
        }
        let (min, max, points) = (self.min.unwrap(), self.max.unwrap(), self.points.unwrap());
        let (a, b) = (min.ln(), max.ln());
        Ok((0..points)
            .map(|i| match i {
                0 => min,
                i if i + 1 == points => max,
                i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
            })
            .collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeKind,
    pub scheme: Scheme,
    /// Per-chip event rate, s⁻¹.
    pub lambda: f64,
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Add Monte Carlo columns to the rate sweep.
    #[serde(default)]
    pub monte_carlo: bool,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub timing: TimingConfig,
    #[serde(default)]
    pub output: Output,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            code: CodeKind::Steane,
            scheme: Scheme::ErasureFlag,
            lambda: 0.1,
            trials: 10_000,
            seed: None,
            monte_carlo: false,
            sweep: Sweep::default(),
            timing: TimingConfig::default(),
            output: Output::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        self.sweep.validate()?;
        self.timing_model().validate()
    }

    pub fn timing_model(&self) -> TimingModel {
        (&self.timing).into()
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
code = "412"
scheme = "erasure-flag"
lambda = 0.1
trials = 500
seed = 7

[sweep]
min = "1us"
max = "100us"
points = 3

[timing]
t_2q = "100ns"
t_meas = "200ns"
t_xfer = "100ns"
t_ncx = "300ns"
t_sq = "6us"
"#;

    #[test]
    fn parse_and_round_trip() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.code, CodeKind::FourQubit);
        assert_eq!(c.timing.t_sq, Some(6e-6));
        let v = c.sweep.values().unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], 1e-6);
        assert!((v[1] - 1e-5).abs() < 1e-18);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_sweeps() {
        for bad in [
            SAMPLE.replace("min = \"1us\"", "min = \"0us\""),
            SAMPLE.replace("points = 3", "points = 1"),
            SAMPLE.replace("t_2q = \"100ns\"", "t_2q = \"100\""),
            SAMPLE.replace("lambda = 0.1", "lambda = -1.0"),
        ] {
            assert!(ExperimentConfig::from_toml(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn explicit_taus() {
        let s = SAMPLE.replace("min = \"1us\"\nmax = \"100us\"\npoints = 3", "taus = [\"0s\", \"264us\"]");
        let c = ExperimentConfig::from_toml(&s).unwrap();
        assert_eq!(c.sweep.values().unwrap(), vec![0.0, 264e-6]);
    }

    #[test]
    fn exact_duration_strings() {
        for x in [1e-7, 6e-6, 39e-6, 264e-6, 1.014e-3, 0.0, 1.0 / 3.0] {
            assert_eq!(parse_duration(&format_duration_exact(x)).unwrap(), x);
        }
        assert_eq!(format_duration_exact(264e-6), "264us");
    }
}
