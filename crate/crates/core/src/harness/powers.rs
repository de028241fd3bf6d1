use super::params::PowerScheme;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::power::UserPowers;
use crate::scenario::Scenario;

/// Splits the total budget `rho * sigma2 * K * mean(1/beta)` over the users
/// according to `scheme`. Uplink and downlink get the same vector and the
/// pilot power is the mean data power.
pub fn rho_to_powers(
    rho: f64,
    scenario: &Scenario,
    scheme: PowerScheme,
    config: &SystemConfig,
) -> Result<UserPowers> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Usage(format!("rho must be > 0, got {rho}")));
    }
    let beta = &scenario.beta;
    if beta.is_empty() {
        return Err(Error::Usage(
            "power allocation needs at least one user".into(),
        ));
    }
    if let Some(b) = beta.iter().find(|&&b| !(b > 0.0)) {
        return Err(Error::Usage(format!(
            "large-scale fading must be > 0, got {b}"
        )));
    }
    let k = beta.len() as f64;
    let s_beta = beta.iter().map(|b| 1.0 / b).sum::<f64>() / k;
    let total = rho * config.sigma2 * k * s_beta;

    let weights: Vec<f64> = match scheme {
        PowerScheme::Equal => vec![1.0; beta.len()],
        PowerScheme::PropBeta => beta.clone(),
        PowerScheme::InvBeta => beta.iter().map(|b| 1.0 / b).collect(),
        PowerScheme::InvNorm => {
            let norms = scenario.channel_norms.as_ref().ok_or_else(|| {
                Error::Usage("inv-norm allocation needs channel norms in the scenario".into())
            })?;
            if norms.len() != beta.len() {
                return Err(Error::Usage("one channel norm per user is required".into()));
            }
            if let Some(g) = norms.iter().find(|&&g| !(g > 0.0)) {
                return Err(Error::Usage(format!("channel norm must be > 0, got {g}")));
            }
            norms.iter().map(|g| 1.0 / g).collect()
        }
    };
    let sum: f64 = weights.iter().sum();
    let p: Vec<f64> = weights.iter().map(|w| total * w / sum).collect();
    Ok(UserPowers {
        pilot: total / k,
        ul: p.clone(),
        dl: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_noise() -> SystemConfig {
        SystemConfig {
            sigma2: 1.0,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn two_user_hand_example() {
        let sc = Scenario::from_beta(vec![1.0, 4.0]);
        let p = rho_to_powers(1.0, &sc, PowerScheme::InvBeta, &unit_noise()).unwrap();
        assert!((p.ul[0] - 1.0).abs() < 1e-15 && (p.ul[1] - 0.25).abs() < 1e-15);
        assert!((p.ul.iter().sum::<f64>() - 1.25).abs() < 1e-15);
        assert!((p.pilot - 0.625).abs() < 1e-15);
    }

    #[test]
    fn inverse_fading_equalizes_received_power() {
        let sc = Scenario::from_beta(vec![1e-9, 3e-11, 7e-10, 2e-12]);
        let cfg = SystemConfig::default();
        let p = rho_to_powers(5.0, &sc, PowerScheme::InvBeta, &cfg).unwrap();
        for (pk, b) in p.ul.iter().zip(&sc.beta) {
            let rel = (pk * b / cfg.sigma2 - 5.0).abs() / 5.0;
            assert!(rel < 1e-12, "{rel}");
        }
    }

    #[test]
    fn equal_fading_makes_schemes_coincide() {
        let mut sc = Scenario::from_beta(vec![2e-10; 3]);
        sc.channel_norms = Some(vec![1e-9; 3]);
        let cfg = SystemConfig::default();
        let reference = rho_to_powers(10.0, &sc, PowerScheme::Equal, &cfg).unwrap();
        for scheme in PowerScheme::ALL {
            let p = rho_to_powers(10.0, &sc, scheme, &cfg).unwrap();
            for (a, b) in p.ul.iter().zip(&reference.ul) {
                assert!((a - b).abs() <= 1e-15 * b);
            }
        }
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        let cfg = unit_noise();
        assert!(rho_to_powers(
            1.0,
            &Scenario::from_beta(vec![1.0, 0.0]),
            PowerScheme::Equal,
            &cfg
        )
        .is_err());
        let mut sc = Scenario::from_beta(vec![1.0, 1.0]);
        assert!(rho_to_powers(1.0, &sc, PowerScheme::InvNorm, &cfg).is_err());
        sc.channel_norms = Some(vec![1.0, 0.0]);
        assert!(rho_to_powers(1.0, &sc, PowerScheme::InvNorm, &cfg).is_err());
        assert!(rho_to_powers(
            0.0,
            &Scenario::from_beta(vec![1.0]),
            PowerScheme::Equal,
            &cfg
        )
        .is_err());
    }
}
