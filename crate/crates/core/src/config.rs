//! Physical and protocol constants of the simulated cell.
//!
//! Defaults reproduce the reference single-cell setup: 20 MHz bandwidth,
//! 1800-symbol coherence blocks, one pilot per scheduled user in each
//! direction, a 0.4/0.6 uplink/downlink split and -96 dBm of noise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Uplink receive combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UplinkScheme {
    Mrc,
    Zf,
}

/// Downlink precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DownlinkScheme {
    Mrt,
    Zf,
}

/// Uplink/downlink linear processing pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Combo {
    pub uplink: UplinkScheme,
    pub downlink: DownlinkScheme,
}

impl Combo {
    pub const MRC_MRT: Combo = Combo {
        uplink: UplinkScheme::Mrc,
        downlink: DownlinkScheme::Mrt,
    };
    pub const MRC_ZF: Combo = Combo {
        uplink: UplinkScheme::Mrc,
        downlink: DownlinkScheme::Zf,
    };
    pub const ZF_MRT: Combo = Combo {
        uplink: UplinkScheme::Zf,
        downlink: DownlinkScheme::Mrt,
    };
    pub const ZF_ZF: Combo = Combo {
        uplink: UplinkScheme::Zf,
        downlink: DownlinkScheme::Zf,
    };

    pub const ALL: [Combo; 4] = [Self::MRC_MRT, Self::MRC_ZF, Self::ZF_MRT, Self::ZF_ZF];

    /// True when either direction uses zero-forcing, which needs one spare
    /// antenna per scheduled user.
    pub fn uses_zf(&self) -> bool {
        self.uplink == UplinkScheme::Zf || self.downlink == DownlinkScheme::Zf
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ul = match self.uplink {
            UplinkScheme::Mrc => "MRC",
            UplinkScheme::Zf => "ZF",
        };
        let dl = match self.downlink {
            DownlinkScheme::Mrt => "MRT",
            DownlinkScheme::Zf => "ZF",
        };
        write!(f, "{ul}/{dl}")
    }
}

impl FromStr for Combo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (ul, dl) = s
            .split_once('/')
            .ok_or_else(|| format!("expected UL/DL pair, got {s:?}"))?;
        let uplink = match ul.trim().to_ascii_uppercase().as_str() {
            "MRC" => UplinkScheme::Mrc,
            "ZF" => UplinkScheme::Zf,
            other => return Err(format!("unknown uplink scheme {other:?}")),
        };
        let downlink = match dl.trim().to_ascii_uppercase().as_str() {
            "MRT" => DownlinkScheme::Mrt,
            "ZF" => DownlinkScheme::Zf,
            other => return Err(format!("unknown downlink scheme {other:?}")),
        };
        Ok(Combo { uplink, downlink })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Csi {
    Perfect,
    /// Pilot-based MMSE estimates.
    Imperfect,
}

impl fmt::Display for Csi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Csi::Perfect => "perfect",
            Csi::Imperfect => "imperfect",
        })
    }
}

impl FromStr for Csi {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(Csi::Perfect),
            "imperfect" => Ok(Csi::Imperfect),
            other => Err(format!("expected perfect|imperfect, got {other:?}")),
        }
    }
}

/// Which antenna count enters the per-antenna power term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PowerAntennas {
    /// Only the active (selected) antennas draw circuit power.
    #[default]
    Selected,
    /// Every antenna of the array draws circuit power.
    Total,
}

impl fmt::Display for PowerAntennas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerAntennas::Selected => "selected",
            PowerAntennas::Total => "total",
        })
    }
}

impl FromStr for PowerAntennas {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "selected" => Ok(PowerAntennas::Selected),
            "total" => Ok(PowerAntennas::Total),
            other => Err(format!("expected selected|total, got {other:?}")),
        }
    }
}

/// Hardware power-consumption parameters. All values in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerParams {
    /// Amplifier efficiency at the users.
    pub eta_ul: f64,
    /// Amplifier efficiency at the BS.
    pub eta_dl: f64,
    pub p_fix: f64,
    pub p_syn: f64,
    /// Circuit power per user terminal (W).
    pub p_u: f64,
    /// Circuit power per BS antenna chain (W).
    pub p_bs: f64,
    /// Computational efficiency at the BS (flops/W).
    pub l_bs: f64,
    /// Computational efficiency at the users (flops/W).
    pub l_u: f64,
    /// Coding power (W per bit/s).
    pub p_cod: f64,
    pub p_dec: f64,
    pub p_bt: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            eta_ul: 0.3,
            eta_dl: 0.39,
            p_fix: 18.0,
            p_syn: 2.0,
            p_u: 0.1,
            p_bs: 1.0,
            l_bs: 12.8e9,
            l_u: 5.0e9,
            p_cod: 0.1e-9,
            p_dec: 0.8e-9,
            p_bt: 0.25e-9,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eta_ul", self.eta_ul),
            ("eta_dl", self.eta_dl),
            ("P_FIX", self.p_fix),
            ("P_SYN", self.p_syn),
            ("P_U", self.p_u),
            ("P_BS", self.p_bs),
            ("L_BS", self.l_bs),
            ("L_U", self.l_u),
            ("P_COD", self.p_cod),
            ("P_DEC", self.p_dec),
            ("P_BT", self.p_bt),
        ];
        for (key, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be > 0, got {value}")));
            }
        }
        Ok(())
    }
}

pub const NOISE_DBM_DEFAULT: f64 = -96.0;
pub const SNR_DB_DEFAULT: f64 = 20.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antennas.
    pub m: usize,
    /// Users in the cell.
    pub k: usize,
    /// Transmission bandwidth (Hz).
    pub bandwidth: f64,
    /// Coherence bandwidth (Hz). Informational; the block length is `block_len`.
    pub coherence_bandwidth: f64,
    /// Symbols per coherence block.
    pub block_len: f64,
    pub tau_ul: f64,
    pub tau_dl: f64,
    pub zeta_ul: f64,
    pub zeta_dl: f64,
    pub p_ul: f64,
    pub p_dl: f64,
    pub p_pilot: f64,
    /// Noise power (W).
    pub sigma2: f64,
    pub n_rf: usize,
    pub combo: Combo,
    pub csi: Csi,
    pub power_antennas: PowerAntennas,
    pub power: PowerParams,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let sigma2 = dbm_to_watts(NOISE_DBM_DEFAULT);
        let p = sigma2 * db_to_linear(SNR_DB_DEFAULT);
        Self {
            m: 60,
            k: 50,
            bandwidth: 20e6,
            coherence_bandwidth: 180e3,
            block_len: 1800.0,
            tau_ul: 1.0,
            tau_dl: 1.0,
            zeta_ul: 0.4,
            zeta_dl: 0.6,
            p_ul: p,
            p_dl: p,
            p_pilot: p,
            sigma2,
            n_rf: 60,
            combo: Combo::ZF_ZF,
            csi: Csi::Perfect,
            power_antennas: PowerAntennas::Selected,
            power: PowerParams::default(),
        }
    }
}

impl SystemConfig {
    /// Length of a selection vector: users first, then antennas.
    pub fn n_bits(&self) -> usize {
        self.k + self.m
    }

    /// Sets all transmit powers from a pre-fading SNR referenced to the noise.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        let p = self.sigma2 * db_to_linear(snr_db);
        self.p_ul = p;
        self.p_dl = p;
        self.p_pilot = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("K", "must be ≥ 1"));
        }
        if self.m < 2 {
            return Err(Error::config("M", format!("must be ≥ 2, got {}", self.m)));
        }
        if self.n_rf < 1 {
            return Err(Error::config("N_RF", "N_RF must be ≥ 1"));
        }
        if self.n_rf > self.m {
            return Err(Error::config(
                "N_RF",
                format!("must be ≤ M = {}, got {}", self.m, self.n_rf),
            ));
        }
        let positive = [
            ("B", self.bandwidth),
            ("Bc", self.coherence_bandwidth),
            ("U", self.block_len),
            ("p_ul", self.p_ul),
            ("p_dl", self.p_dl),
            ("p_pilot", self.p_pilot),
            ("sigma2", self.sigma2),
            ("zeta_ul", self.zeta_ul),
            ("zeta_dl", self.zeta_dl),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be > 0, got {value}")));
            }
        }
        if !(self.tau_ul >= 1.0) {
            return Err(Error::config(
                "tau_ul",
                format!("must be ≥ 1, got {}", self.tau_ul),
            ));
        }
        if !(self.tau_dl >= 1.0) {
            return Err(Error::config(
                "tau_dl",
                format!("must be ≥ 1, got {}", self.tau_dl),
            ));
        }
        if (self.zeta_ul + self.zeta_dl - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "zeta_dl",
                format!(
                    "zeta_ul + zeta_dl must equal 1, got {} + {}",
                    self.zeta_ul, self.zeta_dl
                ),
            ));
        }
        let k = self.k as f64;
        if self.tau_ul * k > self.block_len * self.zeta_ul {
            return Err(Error::config(
                "tau_ul",
                format!(
                    "uplink pilots tau_ul*K = {} exceed U*zeta_ul",
                    self.tau_ul * k
                ),
            ));
        }
        if self.tau_dl * k > self.block_len * self.zeta_dl {
            return Err(Error::config(
                "tau_dl",
                format!(
                    "downlink pilots tau_dl*K = {} exceed U*zeta_dl",
                    self.tau_dl * k
                ),
            ));
        }
        self.power.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn noise_floor_conversion() {
        let sigma2 = dbm_to_watts(-96.0);
        assert!((sigma2 - 2.511_886_431_509_58e-13).abs() < 1e-24);
    }

    #[test]
    fn combo_round_trips_through_text() {
        for combo in Combo::ALL {
            assert_eq!(combo.to_string().parse::<Combo>().unwrap(), combo);
        }
        assert_eq!("zf/zf".parse::<Combo>().unwrap(), Combo::ZF_ZF);
        assert!("ZF".parse::<Combo>().is_err());
    }

    #[test]
    fn rejects_bad_rf_budget() {
        let cfg = SystemConfig {
            n_rf: 0,
            ..SystemConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("N_RF must be ≥ 1"), "{err}");

        let cfg = SystemConfig {
            n_rf: 61,
            ..SystemConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_pilot_overflow() {
        let cfg = SystemConfig {
            block_len: 100.0,
            ..SystemConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
