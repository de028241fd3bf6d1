//! Power consumption model, energy efficiency and the selection objective.

use crate::config::{Combo, PowerAntennas, SystemConfig};
use crate::error::{Error, Result};
use crate::optimizer::check_constraints;
use crate::rate::rate_breakdown;
use crate::scenario::Scenario;

/// `P_sum = c + d * M + f * R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCoeffs {
    /// Static and rate-independent power (W).
    pub c: f64,
    /// Power per active antenna (W).
    pub d: f64,
    /// Power per unit of throughput (W per bit/s).
    pub f: f64,
}

/// Coefficients with every scheduled user radiating the configured
/// `p_ul`/`p_dl`.
pub fn power_coeffs(combo: Combo, k1: usize, m_power: usize, config: &SystemConfig) -> PowerCoeffs {
    let k = k1 as f64;
    power_coeffs_for(combo, k1, m_power, k * config.p_ul, k * config.p_dl, config)
}

/// Coefficients for an arbitrary allocation, given the summed uplink and
/// downlink transmit power of the scheduled users.
pub fn power_coeffs_for(
    combo: Combo,
    k1: usize,
    m_power: usize,
    ul_power_sum: f64,
    dl_power_sum: f64,
    config: &SystemConfig,
) -> PowerCoeffs {
    let pp = &config.power;
    let k = k1 as f64;
    let m = m_power as f64;
    let bw = config.bandwidth;
    let u = config.block_len;

    let amplifiers = ul_power_sum / pp.eta_ul + dl_power_sum / pp.eta_dl;
    let estimation =
        2.0 * bw * k * k / u * (config.tau_ul * m / pp.l_bs + 2.0 * config.tau_dl / pp.l_u);
    let c1 = amplifiers + estimation + pp.p_fix + pp.p_syn + k * pp.p_u;
    let d1 = pp.p_bs + 2.0 * bw * k / pp.l_bs * (1.0 - (config.tau_ul + config.tau_dl) * k / u);

    let c = if combo == Combo::MRC_MRT {
        c1
    } else {
        c1 + bw * k.powi(3) / (3.0 * u * pp.l_bs)
    };
    let flops = if combo == Combo::MRC_MRT {
        3.0 * k
    } else if combo == Combo::ZF_ZF {
        3.0 * k * k + k
    } else {
        3.0 * k * k + 3.0 * k + k
    };
    let d = d1 + bw * flops / (u * pp.l_bs);
    let f = pp.p_cod + pp.p_dec + pp.p_bt;
    PowerCoeffs { c, d, f }
}

/// Returns `(P_sum, EE)` in watts and bit/Joule.
pub fn energy_efficiency(rate: f64, coeffs: &PowerCoeffs, m_power: usize) -> (f64, f64) {
    let power = coeffs.c + coeffs.d * m_power as f64 + coeffs.f * rate;
    (power, rate / power)
}

/// Outcome of evaluating one selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub feasible: bool,
    /// Total rate (bit/s).
    pub rate: f64,
    /// Total consumed power (W). Zero when infeasible.
    pub power: f64,
    /// Energy efficiency (bit/J). Meaningless when infeasible.
    pub ee: f64,
    pub k1: usize,
    pub m1: usize,
}

impl EvalResult {
    pub fn infeasible(k1: usize, m1: usize) -> Self {
        EvalResult {
            feasible: false,
            rate: 0.0,
            power: 0.0,
            ee: f64::NEG_INFINITY,
            k1,
            m1,
        }
    }

    /// Ordering key: feasible results by EE, infeasible below everything.
    pub fn score(&self) -> f64 {
        if self.feasible {
            self.ee
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Per-user transmit powers and the common pilot power.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPowers {
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
    pub pilot: f64,
}

impl UserPowers {
    pub fn equal(config: &SystemConfig, k: usize) -> Self {
        UserPowers {
            ul: vec![config.p_ul; k],
            dl: vec![config.p_dl; k],
            pilot: config.p_pilot,
        }
    }
}

/// `(K1, M1)`: scheduled users and active antennas of a selection vector
/// laid out users-first.
pub fn selection_counts(x: &[bool], k: usize) -> (usize, usize) {
    let k1 = x[..k].iter().filter(|&&b| b).count();
    let m1 = x[k..].iter().filter(|&&b| b).count();
    (k1, m1)
}

/// A scenario bound to a configuration and a power allocation: everything
/// needed to score selection vectors.
#[derive(Debug, Clone)]
pub struct Problem {
    config: SystemConfig,
    beta: Vec<f64>,
    powers: UserPowers,
}

impl Problem {
    pub fn new(config: &SystemConfig, scenario: &Scenario, powers: UserPowers) -> Result<Self> {
        let k = scenario.k();
        if k != config.k {
            return Err(Error::Usage(format!(
                "scenario has {k} users but the configuration expects {}",
                config.k
            )));
        }
        if powers.ul.len() != k || powers.dl.len() != k {
            return Err(Error::Usage(
                "power vectors must have one entry per user".into(),
            ));
        }
        if !(powers.pilot > 0.0) {
            return Err(Error::Usage(format!(
                "pilot power must be positive, got {}",
                powers.pilot
            )));
        }
        let mut config = config.clone();
        config.p_pilot = powers.pilot;
        Ok(Problem {
            config,
            beta: scenario.beta.clone(),
            powers,
        })
    }

    pub fn equal_power(config: &SystemConfig, scenario: &Scenario) -> Result<Self> {
        Self::new(config, scenario, UserPowers::equal(config, scenario.k()))
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn powers(&self) -> &UserPowers {
        &self.powers
    }

    pub fn n_bits(&self) -> usize {
        self.config.n_bits()
    }

    /// Energy efficiency of selection `x` (users first, then antennas).
    pub fn phi(&self, x: &[bool]) -> Result<EvalResult> {
        let cfg = &self.config;
        if x.len() != cfg.n_bits() {
            return Err(Error::Usage(format!(
                "selection has length {}, expected K + M = {}",
                x.len(),
                cfg.n_bits()
            )));
        }
        let (k1, m1) = selection_counts(x, cfg.k);
        if !check_constraints(x, cfg) {
            return Ok(EvalResult::infeasible(k1, m1));
        }
        let mut beta = Vec::with_capacity(k1);
        let mut ul = Vec::with_capacity(k1);
        let mut dl = Vec::with_capacity(k1);
        for (i, _) in x[..cfg.k].iter().enumerate().filter(|(_, &b)| b) {
            beta.push(self.beta[i]);
            ul.push(self.powers.ul[i]);
            dl.push(self.powers.dl[i]);
        }
        let rates = match rate_breakdown(cfg, &beta, &ul, &dl, m1) {
            Ok(r) => r,
            Err(Error::Infeasible(_)) => return Ok(EvalResult::infeasible(k1, m1)),
            Err(e) => return Err(e),
        };
        let m_power = match cfg.power_antennas {
            PowerAntennas::Selected => m1,
            PowerAntennas::Total => cfg.m,
        };
        let coeffs = power_coeffs_for(
            cfg.combo,
            k1,
            m_power,
            ul.iter().sum(),
            dl.iter().sum(),
            cfg,
        );
        let (power, ee) = energy_efficiency(rates.total, &coeffs, m_power);
        Ok(EvalResult {
            feasible: true,
            rate: rates.total,
            power,
            ee,
            k1,
            m1,
        })
    }
}

/// Free-function form of [`Problem::phi`].
pub fn phi(x: &[bool], problem: &Problem) -> Result<EvalResult> {
    problem.phi(x)
}
