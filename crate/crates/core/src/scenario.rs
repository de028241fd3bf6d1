//! Cell realizations: user drop, large-scale fading and the squared channel
//! norms used by the norm-inverse power allocation.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};

/// How users are placed and how their large-scale fading is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Users uniform over an annulus, log-distance path loss relative to
    /// `d0` plus log-normal shadowing.
    Annulus {
        r_min: f64,
        r_max: f64,
        d0: f64,
        pathloss_exp: f64,
        sigma_shad_db: f64,
    },
    /// Users uniform over an annulus, no shadowing, attenuation of
    /// `beta0_db` at `d_min` and exponent `alpha` beyond it.
    PathlossOnly {
        d_min: f64,
        d_max: f64,
        beta0_db: f64,
        alpha: f64,
    },
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::Annulus {
            r_min: 100.0,
            r_max: 1000.0,
            d0: 100.0,
            pathloss_exp: 3.8,
            sigma_shad_db: 8.0,
        }
    }
}

impl Geometry {
    /// The small-cell, shadowing-free layout used for the power-allocation
    /// comparison.
    pub fn pathloss_default() -> Self {
        Geometry::PathlossOnly {
            d_min: 35.0,
            d_max: 250.0,
            beta0_db: 35.3,
            alpha: 3.76,
        }
    }

    pub fn radii(&self) -> (f64, f64) {
        match *self {
            Geometry::Annulus { r_min, r_max, .. } => (r_min, r_max),
            Geometry::PathlossOnly { d_min, d_max, .. } => (d_min, d_max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Annulus { .. } => "annulus",
            Geometry::PathlossOnly { .. } => "pathloss_only",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.radii();
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::config(
                "geometry",
                format!("radii must satisfy 0 < min < max, got [{lo}, {hi}]"),
            ));
        }
        match *self {
            Geometry::Annulus {
                d0,
                pathloss_exp,
                sigma_shad_db,
                ..
            } => {
                if !(d0 > 0.0) {
                    return Err(Error::config("d0", "must be > 0"));
                }
                if !(pathloss_exp > 0.0) {
                    return Err(Error::config("pathloss_exp", "must be > 0"));
                }
                if !(sigma_shad_db >= 0.0) {
                    return Err(Error::config("sigma_shad_db", "must be ≥ 0"));
                }
            }
            Geometry::PathlossOnly {
                alpha, beta0_db, ..
            } => {
                if !(alpha > 0.0) {
                    return Err(Error::config("alpha_pl", "must be > 0"));
                }
                if !beta0_db.is_finite() {
                    return Err(Error::config("beta0_db", "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Draws `count` user distances uniformly over the annulus area
/// (density proportional to r on `[r_min, r_max]`).
pub fn drop_users<R: Rng + ?Sized>(
    count: usize,
    geometry: &Geometry,
    rng: &mut R,
) -> Result<Vec<f64>> {
    geometry.validate()?;
    let (lo, hi) = geometry.radii();
    let (lo2, span) = (lo * lo, hi * hi - lo * lo);
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            (lo2 + u * span).sqrt().clamp(lo, hi)
        })
        .collect())
}

/// Linear-scale large-scale fading coefficient for each distance.
pub fn large_scale_fading<R: Rng + ?Sized>(
    distances: &[f64],
    geometry: &Geometry,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if let Some(d) = distances.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Usage(format!("distances must be positive, got {d}")));
    }
    match *geometry {
        Geometry::Annulus {
            d0,
            pathloss_exp,
            sigma_shad_db,
            ..
        } => {
            let shadow = Normal::new(0.0, sigma_shad_db)
                .map_err(|e| Error::config("sigma_shad_db", e.to_string()))?;
            Ok(distances
                .iter()
                .map(|&r| {
                    let z_db = shadow.sample(rng);
                    10f64.powf(z_db / 10.0) * (r / d0).powf(-pathloss_exp)
                })
                .collect())
        }
        Geometry::PathlossOnly {
            d_min,
            beta0_db,
            alpha,
            ..
        } => {
            let beta0 = 10f64.powf(-beta0_db / 10.0);
            Ok(distances
                .iter()
                .map(|&d| beta0 * (d / d_min).powf(-alpha))
                .collect())
        }
    }
}

/// Squared norms of `g_k = beta_k h_k` with `h_k` having `m` i.i.d. unit
/// complex Gaussian entries, i.e. `beta_k^2` times a Gamma(m, 1) variate.
pub fn draw_channel_gains<R: Rng + ?Sized>(
    beta: &[f64],
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Usage(
            "channel gains need at least one antenna".into(),
        ));
    }
    let gamma = Gamma::new(m as f64, 1.0).map_err(|e| Error::Usage(e.to_string()))?;
    Ok(beta.iter().map(|&b| b * b * gamma.sample(rng)).collect())
}

/// One realized cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: Geometry,
    pub distances: Vec<f64>,
    pub beta: Vec<f64>,
    /// Present only when a power allocation needs instantaneous norms.
    pub channel_norms: Option<Vec<f64>>,
}

impl Scenario {
    /// Drops `k` users and draws their fading. When `norms_for_antennas` is
    /// set, squared channel norms over that many antennas are drawn as well.
    pub fn generate<R: Rng + ?Sized>(
        k: usize,
        geometry: &Geometry,
        norms_for_antennas: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        let distances = drop_users(k, geometry, rng)?;
        let beta = large_scale_fading(&distances, geometry, rng)?;
        let channel_norms = match norms_for_antennas {
            Some(m) => Some(draw_channel_gains(&beta, m, rng)?),
            None => None,
        };
        Ok(Scenario {
            geometry: geometry.clone(),
            distances,
            beta,
            channel_norms,
        })
    }

    /// A scenario with fixed fading coefficients, mostly for tests and
    /// hand-built fixtures. Distances are set to zero.
    pub fn from_beta(beta: Vec<f64>) -> Self {
        Scenario {
            geometry: Geometry::default(),
            distances: vec![0.0; beta.len()],
            beta,
            channel_norms: None,
        }
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    /// Flat `key=value` record, one pair per line.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("geometry={}\n", self.geometry.name()));
        match &self.geometry {
            Geometry::Annulus {
                r_min,
                r_max,
                d0,
                pathloss_exp,
                sigma_shad_db,
            } => {
                out.push_str(&format!("r_min={r_min}\nr_max={r_max}\nd0={d0}\n"));
                out.push_str(&format!(
                    "pathloss_exp={pathloss_exp}\nsigma_shad_db={sigma_shad_db}\n"
                ));
            }
            Geometry::PathlossOnly {
                d_min,
                d_max,
                beta0_db,
                alpha,
            } => {
                out.push_str(&format!("d_min={d_min}\nd_max={d_max}\n"));
                out.push_str(&format!("beta0_db={beta0_db}\nalpha_pl={alpha}\n"));
            }
        }
        out.push_str(&format!("distances={}\n", join(&self.distances)));
        out.push_str(&format!("beta={}\n", join(&self.beta)));
        if let Some(norms) = &self.channel_norms {
            out.push_str(&format!("channel_norms={}\n", join(norms)));
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line, "expected key=value"))?;
            fields.insert(key.trim().to_string(), value.trim().to_string());
        }
        let num = |key: &str| -> Result<f64> {
            fields
                .get(key)
                .ok_or_else(|| Error::config(key, "missing"))?
                .parse::<f64>()
                .map_err(|e| Error::config(key, e.to_string()))
        };
        let list = |key: &str| -> Result<Option<Vec<f64>>> {
            fields
                .get(key)
                .map(|v| {
                    if v.is_empty() {
                        return Ok(Vec::new());
                    }
                    v.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::config(key, e.to_string()))
                        })
                        .collect()
                })
                .transpose()
        };
        let geometry = match fields.get("geometry").map(String::as_str) {
            Some("annulus") => Geometry::Annulus {
                r_min: num("r_min")?,
                r_max: num("r_max")?,
                d0: num("d0")?,
                pathloss_exp: num("pathloss_exp")?,
                sigma_shad_db: num("sigma_shad_db")?,
            },
            Some("pathloss_only") => Geometry::PathlossOnly {
                d_min: num("d_min")?,
                d_max: num("d_max")?,
                beta0_db: num("beta0_db")?,
                alpha: num("alpha_pl")?,
            },
            other => {
                return Err(Error::config(
                    "geometry",
                    format!("unknown geometry {other:?}"),
                ))
            }
        };
        let distances = list("distances")?.ok_or_else(|| Error::config("distances", "missing"))?;
        let beta = list("beta")?.ok_or_else(|| Error::config("beta", "missing"))?;
        if distances.len() != beta.len() {
            return Err(Error::config("beta", "length differs from distances"));
        }
        Ok(Scenario {
            geometry,
            distances,
            beta,
            channel_norms: list("channel_norms")?,
        })
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
