//! Hardware time constants and worst-case recovery times.

use serde::{Deserialize, Serialize};

use crate::codes::CodeKind;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ErasureFlag,
    Knill,
    /// Fixed-order Steane syndrome extraction without flags.
    Nonft,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ErasureFlag => "erasure-flag",
            Scheme::Knill => "knill",
            Scheme::Nonft => "nonft",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "erasure-flag" | "flag" => Ok(Scheme::ErasureFlag),
            "knill" => Ok(Scheme::Knill),
            "nonft" | "non-ft" => Ok(Scheme::Nonft),
            _ => Err(Error::Parse(format!("unknown protocol {s:?}"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Durations in seconds. The three composite constants are derived from the
/// primitive ones unless overridden.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub t_2q: f64,
    pub t_meas: f64,
    pub t_xfer: f64,
    pub t_ncx: f64,
    pub t_sq_override: Option<f64>,
    pub t_scx_override: Option<f64>,
    pub t_nscx_override: Option<f64>,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            t_2q: 100e-9,
            t_meas: 200e-9,
            t_xfer: 100e-9,
            t_ncx: 300e-9,
            t_sq_override: None,
            t_scx_override: None,
            t_nscx_override: None,
        }
    }
}

impl TimingModel {
    /// One round of surface-code stabilizer measurement, d = 10 cycles.
    pub fn t_sq(&self) -> f64 {
        self.t_sq_override.unwrap_or(10.0 * (4.0 * self.t_2q + self.t_meas))
    }

    /// Lattice-surgery CX between patches on one chip.
    pub fn t_scx(&self) -> f64 {
        self.t_scx_override.unwrap_or(6.0 * self.t_sq())
    }

    /// Lattice-surgery CX between chips.
    pub fn t_nscx(&self) -> f64 {
        self.t_nscx_override.unwrap_or(self.t_scx() + 10.0 * self.t_ncx)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("t_2q", Some(self.t_2q)),
            ("t_meas", Some(self.t_meas)),
            ("t_xfer", Some(self.t_xfer)),
            ("t_ncx", Some(self.t_ncx)),
            ("t_sq", self.t_sq_override),
            ("t_scx", self.t_scx_override),
            ("t_nscx", self.t_nscx_override),
        ];
        for (name, v) in all {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Worst-case duration of one correction cycle, as a closed-form count of
/// the time constants.
pub fn recovery_time(code: CodeKind, scheme: Scheme, timing: &TimingModel) -> Result<f64> {
    let (sq, scx, nscx) = (timing.t_sq(), timing.t_scx(), timing.t_nscx());
    match (code, scheme) {
        (CodeKind::FourQubit, Scheme::ErasureFlag) => Ok(5.0 * sq + 6.0 * nscx),
        (CodeKind::Steane, Scheme::ErasureFlag) => Ok(13.0 * sq + 24.0 * nscx),
        (CodeKind::FourQubit, Scheme::Knill) => Ok(4.0 * sq + 2.0 * scx + 3.0 * nscx),
        (CodeKind::Steane, Scheme::Knill) => Ok(6.0 * sq + 2.0 * scx + 6.0 * nscx),
        // Detection round plus six weight-4 measurements.
        (CodeKind::Steane, Scheme::Nonft) => Ok(13.0 * sq + 24.0 * nscx),
        _ => Err(Error::Unsupported(format!("no recovery-time formula for {scheme} on {code}"))),
    }
}
