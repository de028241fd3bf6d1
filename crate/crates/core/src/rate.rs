//! Closed-form lower bounds on the achievable uplink and downlink spectral
//! efficiency for MRC/ZF reception and MRT/ZF precoding, with perfect or
//! MMSE-estimated channel knowledge.
//!
//! Every bound is written for per-user transmit powers. Each `p * beta_i`
//! becomes `p_i * beta_i` (likewise for the estimate and error variances)
//! and the noise term stays `sigma2`; with equal powers the expressions
//! reduce exactly to the textbook equal-power bounds.

use crate::config::{Csi, DownlinkScheme, SystemConfig, UplinkScheme};
use crate::error::{Error, Result};

/// Per-user split of the channel variance into an estimate part and an
/// estimation-error part; `beta_hat[k] + gamma_err[k] == beta[k]` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiStats {
    pub beta_hat: Vec<f64>,
    pub gamma_err: Vec<f64>,
}

/// MMSE estimate/error variances for `pilots` orthogonal pilot sequences of
/// relative length `tau_ul`.
pub fn mmse_stats(beta: &[f64], tau_ul: f64, pilots: usize, p_pilot: f64, sigma2: f64) -> CsiStats {
    let gain = tau_ul * pilots as f64 * p_pilot;
    let (beta_hat, gamma_err) = beta
        .iter()
        .map(|&b| {
            let denom = gain * b + sigma2;
            (gain * b * b / denom, b * sigma2 / denom)
        })
        .unzip();
    CsiStats {
        beta_hat,
        gamma_err,
    }
}

/// Inputs of one link direction for the scheduled users only.
#[derive(Debug, Clone, Copy)]
pub struct LinkInput<'a> {
    /// Active antennas.
    pub m1: usize,
    /// True large-scale fading of the scheduled users.
    pub beta: &'a [f64],
    /// MMSE statistics; `None` means perfect CSI.
    pub stats: Option<&'a CsiStats>,
    /// Transmit power per scheduled user in this direction (W).
    pub power: &'a [f64],
    pub sigma2: f64,
}

impl LinkInput<'_> {
    fn k1(&self) -> usize {
        self.beta.len()
    }

    fn check(&self, zf: bool) -> Result<()> {
        let k1 = self.k1();
        if self.power.len() != k1 || self.stats.is_some_and(|s| s.beta_hat.len() != k1) {
            return Err(Error::Usage("per-user vectors differ in length".into()));
        }
        if k1 == 0 {
            return Ok(());
        }
        if zf && self.m1 < k1 + 1 {
            return Err(Error::Infeasible(format!(
                "zero-forcing needs M1 >= K1 + 1, got M1 = {}, K1 = {k1}",
                self.m1
            )));
        }
        if !zf && self.m1 < k1 {
            return Err(Error::Infeasible(format!(
                "maximum-ratio processing needs M1 >= K1, got M1 = {}, K1 = {k1}",
                self.m1
            )));
        }
        if let Some(p) = self.power.iter().find(|p| !(**p > 0.0)) {
            return Err(Error::Infeasible(format!("scheduled user with power {p}")));
        }
        Ok(())
    }

    /// Variance of the channel part the BS knows.
    fn known(&self) -> &[f64] {
        match self.stats {
            Some(s) => &s.beta_hat,
            None => self.beta,
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.max(0.0).ln_1p() / std::f64::consts::LN_2
}

/// Uplink spectral efficiency bound per scheduled user (bit/s/Hz).
pub fn rate_ul(input: &LinkInput<'_>, scheme: UplinkScheme) -> Result<Vec<f64>> {
    input.check(scheme == UplinkScheme::Zf)?;
    let k1 = input.k1();
    let known = input.known();
    let p = input.power;
    let err_interf: f64 = match input.stats {
        Some(s) => s.gamma_err.iter().zip(p).map(|(g, p)| g * p).sum(),
        None => 0.0,
    };
    let rates = match scheme {
        UplinkScheme::Mrc => {
            let gain = (input.m1 as f64 - 1.0).max(0.0);
            let total: f64 = known.iter().zip(p).map(|(b, p)| b * p).sum();
            (0..k1)
                .map(|k| {
                    let own = p[k] * known[k];
                    let interference = (total - own).max(0.0);
                    log2_1p(gain * own / (interference + err_interf + input.sigma2))
                })
                .collect()
        }
        UplinkScheme::Zf => {
            let gain = (input.m1 - k1) as f64;
            (0..k1)
                .map(|k| log2_1p(gain * p[k] * known[k] / (err_interf + input.sigma2)))
                .collect()
        }
    };
    Ok(rates)
}

/// Downlink spectral efficiency bound per scheduled user (bit/s/Hz).
pub fn rate_dl(input: &LinkInput<'_>, scheme: DownlinkScheme) -> Result<Vec<f64>> {
    input.check(scheme == DownlinkScheme::Zf)?;
    let k1 = input.k1();
    let known = input.known();
    let p = input.power;
    let total_power: f64 = p.iter().sum();
    let err = |k: usize| input.stats.map_or(0.0, |s| s.gamma_err[k]);
    let rates = match scheme {
        DownlinkScheme::Mrt => {
            let gain = (input.m1 as f64 - 1.0).max(0.0);
            (0..k1)
                .map(|k| {
                    let others = (total_power - p[k]).max(0.0);
                    let denom = others * known[k] + total_power * err(k) + input.sigma2;
                    log2_1p(gain * p[k] * known[k] / denom)
                })
                .collect()
        }
        DownlinkScheme::Zf => {
            let gain = (input.m1 - k1) as f64;
            (0..k1)
                .map(|k| {
                    let denom = total_power * err(k) + input.sigma2;
                    log2_1p(gain * p[k] * known[k] / denom)
                })
                .collect()
        }
    };
    Ok(rates)
}

/// Pilot-overhead weighted bandwidths `(a, b)` in Hz for `pilots` scheduled users.
pub fn overhead_coeffs(pilots: usize, config: &SystemConfig) -> Result<(f64, f64)> {
    let k = pilots as f64;
    let ul_pilots = config.tau_ul * k;
    let dl_pilots = config.tau_dl * k;
    if ul_pilots > config.block_len * config.zeta_ul
        || dl_pilots > config.block_len * config.zeta_dl
    {
        return Err(Error::Infeasible(format!(
            "pilot overhead of {pilots} users exceeds the coherence block"
        )));
    }
    let a =
        config.zeta_ul * (1.0 - ul_pilots / (config.block_len * config.zeta_ul)) * config.bandwidth;
    let b =
        config.zeta_dl * (1.0 - dl_pilots / (config.block_len * config.zeta_dl)) * config.bandwidth;
    Ok((a.max(0.0), b.max(0.0)))
}

/// Total rate in bit/s: `a * sum(ul) + b * sum(dl)`.
pub fn total_rate(per_user_ul: &[f64], per_user_dl: &[f64], a: f64, b: f64) -> f64 {
    a * per_user_ul.iter().sum::<f64>() + b * per_user_dl.iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBreakdown {
    pub per_user_ul: Vec<f64>,
    pub per_user_dl: Vec<f64>,
    pub a_coeff: f64,
    pub b_coeff: f64,
    /// Total rate (bit/s).
    pub total: f64,
}

/// Evaluates both directions for a scheduled user set under the configured
/// combo and CSI mode. Pilots are spent only on the scheduled users.
pub fn rate_breakdown(
    config: &SystemConfig,
    beta: &[f64],
    ul_power: &[f64],
    dl_power: &[f64],
    m1: usize,
) -> Result<RateBreakdown> {
    let k1 = beta.len();
    let stats = match config.csi {
        Csi::Perfect => None,
        Csi::Imperfect => Some(mmse_stats(
            beta,
            config.tau_ul,
            k1,
            config.p_pilot,
            config.sigma2,
        )),
    };
    let link = |power| LinkInput {
        m1,
        beta,
        stats: stats.as_ref(),
        power,
        sigma2: config.sigma2,
    };
    let per_user_ul = rate_ul(&link(ul_power), config.combo.uplink)?;
    let per_user_dl = rate_dl(&link(dl_power), config.combo.downlink)?;
    let (a_coeff, b_coeff) = overhead_coeffs(k1, config)?;
    let total = total_rate(&per_user_ul, &per_user_dl, a_coeff, b_coeff);
    Ok(RateBreakdown {
        per_user_ul,
        per_user_dl,
        a_coeff,
        b_coeff,
        total,
    })
}
