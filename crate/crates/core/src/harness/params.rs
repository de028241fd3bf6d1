use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::config::{db_to_linear, dbm_to_watts, SystemConfig, NOISE_DBM_DEFAULT, SNR_DB_DEFAULT};
use crate::error::{Error, Result};
use crate::optimizer::{LearnerConfig, ObjectiveScale};
use crate::scenario::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Solve,
    SweepSnr,
    SweepRf,
    SweepRho,
    CompareBaselines,
    ConvergenceCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Solve,
        ExperimentKind::SweepSnr,
        ExperimentKind::SweepRf,
        ExperimentKind::SweepRho,
        ExperimentKind::CompareBaselines,
        ExperimentKind::ConvergenceCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::SweepSnr => "sweep-snr",
            ExperimentKind::SweepRf => "sweep-rf",
            ExperimentKind::SweepRho => "sweep-rho",
            ExperimentKind::CompareBaselines => "compare-baselines",
            ExperimentKind::ConvergenceCheck => "convergence-check",
        }
    }

    /// Column value identifying what the grid varies.
    pub fn grid_key(self) -> &'static str {
        match self {
            ExperimentKind::Solve | ExperimentKind::SweepRf => "n_rf",
            ExperimentKind::SweepSnr | ExperimentKind::ConvergenceCheck => "snr_db",
            ExperimentKind::SweepRho | ExperimentKind::CompareBaselines => "rho",
        }
    }

    /// Whether transmit powers come from a ρ budget instead of an SNR.
    pub fn uses_rho(self) -> bool {
        matches!(
            self,
            ExperimentKind::SweepRho | ExperimentKind::CompareBaselines
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind {s:?}"))
    }
}

/// How a total transmit budget is split over users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PowerScheme {
    #[default]
    Equal,
    PropBeta,
    InvBeta,
    InvNorm,
}

impl PowerScheme {
    pub const ALL: [PowerScheme; 4] = [
        PowerScheme::Equal,
        PowerScheme::PropBeta,
        PowerScheme::InvBeta,
        PowerScheme::InvNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PowerScheme::Equal => "equal",
            PowerScheme::PropBeta => "prop-beta",
            PowerScheme::InvBeta => "inv-beta",
            PowerScheme::InvNorm => "inv-norm",
        }
    }
}

impl fmt::Display for PowerScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PowerScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("expected one of equal, prop-beta, inv-beta, inv-norm, got {s:?}")
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Monte Carlo realizations per grid point.
    pub realizations: usize,
    pub seed: u64,
    /// Sweep points; `None` selects the default grid of the kind.
    pub grid: Option<Vec<f64>>,
    pub output: PathBuf,
    pub geometry: Geometry,
    pub power_scheme: PowerScheme,
    /// Random draws per (users, antennas) count pair for the baseline.
    pub baseline_trials: usize,
    /// Worker threads; 1 runs everything on the calling thread.
    pub parallel: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Solve,
            realizations: 200,
            seed: 1,
            grid: None,
            output: PathBuf::from("out"),
            geometry: Geometry::default(),
            power_scheme: PowerScheme::Equal,
            baseline_trials: 1,
            parallel: 1,
        }
    }
}

impl ExperimentSpec {
    /// The sweep points, falling back to the default grid of the kind.
    pub fn grid_points(&self, sys: &SystemConfig) -> Vec<f64> {
        if let Some(grid) = &self.grid {
            return grid.clone();
        }
        match self.kind {
            ExperimentKind::Solve => vec![sys.n_rf as f64],
            ExperimentKind::SweepSnr => (0..=6).map(|i| 5.0 * i as f64).collect(),
            ExperimentKind::ConvergenceCheck => vec![0.0, 10.0, 20.0],
            ExperimentKind::SweepRf => {
                let mut points: Vec<f64> = (1..=sys.m / 5).map(|i| 5.0 * i as f64).collect();
                if !sys.m.is_multiple_of(5) {
                    points.push(sys.m as f64);
                }
                points
            }
            ExperimentKind::SweepRho | ExperimentKind::CompareBaselines => {
                vec![1.0, 3.0, 10.0, 30.0, 100.0]
            }
        }
    }

    pub fn validate(&self, sys: &SystemConfig) -> Result<()> {
        if self.realizations < 1 {
            return Err(Error::config("realizations", "must be ≥ 1"));
        }
        if self.realizations > u32::MAX as usize {
            return Err(Error::config(
                "realizations",
                format!("must be ≤ {}", u32::MAX),
            ));
        }
        if self.baseline_trials < 1 {
            return Err(Error::config("baseline_trials", "must be ≥ 1"));
        }
        if self.parallel < 1 {
            return Err(Error::config("parallel", "must be ≥ 1"));
        }
        self.geometry.validate()?;
        let grid = self.grid_points(sys);
        if grid.is_empty() {
            return Err(Error::config("grid", "must list at least one point"));
        }
        if self.kind == ExperimentKind::Solve && self.grid.is_some() {
            return Err(Error::config("grid", "a solve run has no sweep grid"));
        }
        for &v in &grid {
            let ok = match self.kind {
                ExperimentKind::Solve | ExperimentKind::SweepRf => {
                    v.fract() == 0.0 && v >= 1.0 && v <= sys.m as f64
                }
                ExperimentKind::SweepSnr | ExperimentKind::ConvergenceCheck => v.is_finite(),
                ExperimentKind::SweepRho | ExperimentKind::CompareBaselines => {
                    v.is_finite() && v > 0.0
                }
            };
            if !ok {
                let expected = match self.kind {
                    ExperimentKind::Solve | ExperimentKind::SweepRf => {
                        format!("integers in [1, M = {}]", sys.m)
                    }
                    ExperimentKind::SweepSnr | ExperimentKind::ConvergenceCheck => {
                        "finite SNR values in dB".into()
                    }
                    ExperimentKind::SweepRho | ExperimentKind::CompareBaselines => {
                        "positive ρ values".into()
                    }
                };
                return Err(Error::config(
                    "grid",
                    format!("{} expects {expected}, got {v}", self.kind),
                ));
            }
        }
        Ok(())
    }
}

/// Accepted keys in canonical spelling. Lookup is case-insensitive.
const KEYS: &[&str] = &[
    "M",
    "K",
    "N_RF",
    "B",
    "Bc",
    "U",
    "tau_ul",
    "tau_dl",
    "zeta_ul",
    "zeta_dl",
    "sigma2",
    "sigma2_dbm",
    "snr_db",
    "p_ul",
    "p_dl",
    "p_pilot",
    "combo",
    "csi",
    "power_antennas",
    "eta_ul",
    "eta_dl",
    "P_FIX",
    "P_SYN",
    "P_U",
    "P_BS",
    "L_BS",
    "L_U",
    "P_COD",
    "P_DEC",
    "P_BT",
    // user layout
    "geometry",
    "r_min",
    "r_max",
    "d0",
    "pathloss_exp",
    "sigma_shad_db",
    "d_min",
    "d_max",
    "beta0_db",
    "alpha_pl",
    // learner
    "alpha",
    "beta_sharp",
    "temperature",
    "N1",
    "tol",
    "patience",
    "max_iters",
    "theta_clip",
    "objective_scale",
    "p0",
    "max_levels",
    "min_population",
    // experiment
    "experiment",
    "realizations",
    "seed",
    "grid",
    "output",
    "power_scheme",
    "baseline_trials",
    "parallel",
];

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|k| k.eq_ignore_ascii_case(key)).copied()
}

struct Values(BTreeMap<&'static str, String>);

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str, expected: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(key, format!("expected {expected}, got {v:?}"))),
        }
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        let v = self.get::<f64>(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(Error::config(
                key,
                format!("expected a finite number, got {x}"),
            )),
            _ => Ok(v),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key, "a nonnegative integer")
    }

    fn set_num(&self, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(v) = self.num(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn set_count(&self, key: &str, slot: &mut usize) -> Result<()> {
        if let Some(v) = self.count(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn set_parsed<T: FromStr<Err: fmt::Display>>(&self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.raw(key) {
            *slot = v
                .parse()
                .map_err(|e: T::Err| Error::config(key, e.to_string()))?;
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Result<Values> {
    let mut values = BTreeMap::new();
    let mut unknown = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", n + 1),
                format!("expected key=value, got {line:?}"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        match canonical(key) {
            None => unknown.push(key.to_string()),
            Some(k) => {
                if values.insert(k, value.to_string()).is_some() {
                    return Err(Error::config(k, "given more than once"));
                }
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::config(
            "config",
            format!("unknown keys: {}", unknown.join(", ")),
        ));
    }
    Ok(Values(values))
}

/// Parses a flat `key=value` document (one pair per line, `#` starts a
/// comment). Omitted keys take their defaults, `N_RF` defaults to `M`,
/// `snr_db` sets all transmit powers relative to the noise power and an
/// explicit `p_ul`/`p_dl`/`p_pilot` overrides it.
pub fn parse_config(text: &str) -> Result<(SystemConfig, ExperimentSpec, LearnerConfig)> {
    parse_config_as(text, None)
}

/// Like [`parse_config`], with the experiment kind forced to `kind` (when
/// given) before the grid is checked.
pub fn parse_config_as(
    text: &str,
    kind: Option<ExperimentKind>,
) -> Result<(SystemConfig, ExperimentSpec, LearnerConfig)> {
    let v = tokenize(text)?;
    let sys = parse_system(&v)?;
    let mut spec = parse_experiment(&v)?;
    if let Some(kind) = kind {
        spec.kind = kind;
    }
    let learner = parse_learner(&v)?;
    sys.validate()?;
    spec.validate(&sys)?;
    learner.validate()?;
    Ok((sys, spec, learner))
}

fn parse_system(v: &Values) -> Result<SystemConfig> {
    let mut c = SystemConfig::default();
    v.set_count("M", &mut c.m)?;
    v.set_count("K", &mut c.k)?;
    c.n_rf = v.count("N_RF")?.unwrap_or(c.m);
    v.set_num("B", &mut c.bandwidth)?;
    v.set_num("Bc", &mut c.coherence_bandwidth)?;
    v.set_num("U", &mut c.block_len)?;
    v.set_num("tau_ul", &mut c.tau_ul)?;
    v.set_num("tau_dl", &mut c.tau_dl)?;

    match (v.num("zeta_ul")?, v.num("zeta_dl")?) {
        (Some(ul), Some(dl)) => (c.zeta_ul, c.zeta_dl) = (ul, dl),
        (Some(ul), None) => (c.zeta_ul, c.zeta_dl) = (ul, 1.0 - ul),
        (None, Some(dl)) => (c.zeta_ul, c.zeta_dl) = (1.0 - dl, dl),
        (None, None) => {}
    }

    c.sigma2 = match (v.num("sigma2")?, v.num("sigma2_dbm")?) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "sigma2",
                "give either sigma2 or sigma2_dbm, not both",
            ))
        }
        (Some(w), None) => w,
        (None, Some(dbm)) => dbm_to_watts(dbm),
        (None, None) => dbm_to_watts(NOISE_DBM_DEFAULT),
    };
    let (ul, dl, pilot) = snr_to_powers(v.num("snr_db")?.unwrap_or(SNR_DB_DEFAULT), c.sigma2);
    (c.p_ul, c.p_dl, c.p_pilot) = (ul, dl, pilot);
    v.set_num("p_ul", &mut c.p_ul)?;
    v.set_num("p_dl", &mut c.p_dl)?;
    v.set_num("p_pilot", &mut c.p_pilot)?;

    v.set_parsed("combo", &mut c.combo)?;
    v.set_parsed("csi", &mut c.csi)?;
    v.set_parsed("power_antennas", &mut c.power_antennas)?;

    let p = &mut c.power;
    v.set_num("eta_ul", &mut p.eta_ul)?;
    v.set_num("eta_dl", &mut p.eta_dl)?;
    v.set_num("P_FIX", &mut p.p_fix)?;
    v.set_num("P_SYN", &mut p.p_syn)?;
    v.set_num("P_U", &mut p.p_u)?;
    v.set_num("P_BS", &mut p.p_bs)?;
    v.set_num("L_BS", &mut p.l_bs)?;
    v.set_num("L_U", &mut p.l_u)?;
    v.set_num("P_COD", &mut p.p_cod)?;
    v.set_num("P_DEC", &mut p.p_dec)?;
    v.set_num("P_BT", &mut p.p_bt)?;
    Ok(c)
}

fn parse_geometry(v: &Values) -> Result<Geometry> {
    let name = v.raw("geometry").unwrap_or("annulus");
    let (mut g, foreign): (Geometry, &[&str]) = match name {
        "annulus" => (
            Geometry::default(),
            &["d_min", "d_max", "beta0_db", "alpha_pl"],
        ),
        "pathloss_only" => (
            Geometry::pathloss_default(),
            &["r_min", "r_max", "d0", "pathloss_exp", "sigma_shad_db"],
        ),
        other => {
            return Err(Error::config(
                "geometry",
                format!("expected annulus or pathloss_only, got {other:?}"),
            ))
        }
    };
    if let Some(key) = foreign.iter().find(|k| v.has(k)) {
        return Err(Error::config(
            *key,
            format!("does not apply to geometry {name}"),
        ));
    }
    match &mut g {
        Geometry::Annulus {
            r_min,
            r_max,
            d0,
            pathloss_exp,
            sigma_shad_db,
        } => {
            v.set_num("r_min", r_min)?;
            v.set_num("r_max", r_max)?;
            v.set_num("d0", d0)?;
            v.set_num("pathloss_exp", pathloss_exp)?;
            v.set_num("sigma_shad_db", sigma_shad_db)?;
        }
        Geometry::PathlossOnly {
            d_min,
            d_max,
            beta0_db,
            alpha,
        } => {
            v.set_num("d_min", d_min)?;
            v.set_num("d_max", d_max)?;
            v.set_num("beta0_db", beta0_db)?;
            v.set_num("alpha_pl", alpha)?;
        }
    }
    Ok(g)
}

fn parse_experiment(v: &Values) -> Result<ExperimentSpec> {
    let mut s = ExperimentSpec {
        geometry: parse_geometry(v)?,
        ..ExperimentSpec::default()
    };
    v.set_parsed("experiment", &mut s.kind)?;
    v.set_count("realizations", &mut s.realizations)?;
    if let Some(seed) = v.get("seed", "an unsigned 64-bit integer")? {
        s.seed = seed;
    }
    if let Some(raw) = v.raw("grid") {
        let points = raw
            .split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<f64>().map_err(|_| {
                    Error::config(
                        "grid",
                        format!("expected a comma-separated list of numbers, got {p:?}"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        s.grid = Some(points);
    }
    if let Some(out) = v.raw("output") {
        s.output = PathBuf::from(out);
    }
    v.set_parsed("power_scheme", &mut s.power_scheme)?;
    v.set_count("baseline_trials", &mut s.baseline_trials)?;
    v.set_count("parallel", &mut s.parallel)?;
    Ok(s)
}

fn parse_learner(v: &Values) -> Result<LearnerConfig> {
    let mut l = LearnerConfig::default();
    v.set_num("alpha", &mut l.alpha)?;
    v.set_num("beta_sharp", &mut l.beta_sharp)?;
    v.set_num("temperature", &mut l.temperature)?;
    v.set_count("N1", &mut l.population)?;
    v.set_num("tol", &mut l.tol)?;
    v.set_count("patience", &mut l.patience)?;
    v.set_count("max_iters", &mut l.max_iters)?;
    if let Some(clip) = v.num("theta_clip")? {
        l.theta_clip = Some(clip);
    }
    if let Some(raw) = v.raw("objective_scale") {
        l.objective_scale = if raw == "auto" {
            ObjectiveScale::Auto
        } else {
            ObjectiveScale::Fixed(raw.parse().map_err(|_| {
                Error::config(
                    "objective_scale",
                    format!("expected auto or a number, got {raw:?}"),
                )
            })?)
        };
    }
    v.set_num("p0", &mut l.subset.level_fraction)?;
    v.set_count("max_levels", &mut l.subset.max_levels)?;
    v.set_count("min_population", &mut l.subset.min_population)?;
    Ok(l)
}

/// Canonical text form of a full configuration. Feeding it back to
/// [`parse_config`] reproduces the same values.
pub fn render_config(sys: &SystemConfig, spec: &ExperimentSpec, learner: &LearnerConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    put("M", sys.m.to_string());
    put("K", sys.k.to_string());
    put("N_RF", sys.n_rf.to_string());
    put("B", sys.bandwidth.to_string());
    put("Bc", sys.coherence_bandwidth.to_string());
    put("U", sys.block_len.to_string());
    put("tau_ul", sys.tau_ul.to_string());
    put("tau_dl", sys.tau_dl.to_string());
    put("zeta_ul", sys.zeta_ul.to_string());
    put("zeta_dl", sys.zeta_dl.to_string());
    put("sigma2", sys.sigma2.to_string());
    put("p_ul", sys.p_ul.to_string());
    put("p_dl", sys.p_dl.to_string());
    put("p_pilot", sys.p_pilot.to_string());
    put("combo", sys.combo.to_string());
    put("csi", sys.csi.to_string());
    put("power_antennas", sys.power_antennas.to_string());
    let p = &sys.power;
    put("eta_ul", p.eta_ul.to_string());
    put("eta_dl", p.eta_dl.to_string());
    put("P_FIX", p.p_fix.to_string());
    put("P_SYN", p.p_syn.to_string());
    put("P_U", p.p_u.to_string());
    put("P_BS", p.p_bs.to_string());
    put("L_BS", p.l_bs.to_string());
    put("L_U", p.l_u.to_string());
    put("P_COD", p.p_cod.to_string());
    put("P_DEC", p.p_dec.to_string());
    put("P_BT", p.p_bt.to_string());
    put("geometry", spec.geometry.name().to_string());
    match spec.geometry {
        Geometry::Annulus {
            r_min,
            r_max,
            d0,
            pathloss_exp,
            sigma_shad_db,
        } => {
            put("r_min", r_min.to_string());
            put("r_max", r_max.to_string());
            put("d0", d0.to_string());
            put("pathloss_exp", pathloss_exp.to_string());
            put("sigma_shad_db", sigma_shad_db.to_string());
        }
        Geometry::PathlossOnly {
            d_min,
            d_max,
            beta0_db,
            alpha,
        } => {
            put("d_min", d_min.to_string());
            put("d_max", d_max.to_string());
            put("beta0_db", beta0_db.to_string());
            put("alpha_pl", alpha.to_string());
        }
    }
    put("alpha", learner.alpha.to_string());
    put("beta_sharp", learner.beta_sharp.to_string());
    put("temperature", learner.temperature.to_string());
    put("N1", learner.population.to_string());
    put("tol", learner.tol.to_string());
    put("patience", learner.patience.to_string());
    put("max_iters", learner.max_iters.to_string());
    put("theta_clip", learner.theta_clip().to_string());
    put(
        "objective_scale",
        match learner.objective_scale {
            ObjectiveScale::Auto => "auto".to_string(),
            ObjectiveScale::Fixed(s) => s.to_string(),
        },
    );
    put("p0", learner.subset.level_fraction.to_string());
    put("max_levels", learner.subset.max_levels.to_string());
    put("min_population", learner.subset.min_population.to_string());
    put("experiment", spec.kind.to_string());
    put("realizations", spec.realizations.to_string());
    put("seed", spec.seed.to_string());
    if let Some(grid) = &spec.grid {
        put(
            "grid",
            grid.iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    put("output", spec.output.display().to_string());
    put("power_scheme", spec.power_scheme.to_string());
    put("baseline_trials", spec.baseline_trials.to_string());
    put("parallel", spec.parallel.to_string());
    out
}

/// Equal uplink, downlink and pilot powers at `snr_db` above the noise
/// power: `(p_ul, p_dl, p_pilot)`.
pub fn snr_to_powers(snr_db: f64, sigma2: f64) -> (f64, f64, f64) {
    let p = sigma2 * db_to_linear(snr_db);
    (p, p, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Combo, Csi};

    #[test]
    fn empty_document_gives_defaults() {
        let (sys, spec, learner) = parse_config("").unwrap();
        assert_eq!(sys, SystemConfig::default());
        assert_eq!(sys.bandwidth, 20e6);
        assert_eq!(sys.block_len, 1800.0);
        assert_eq!(sys.zeta_ul, 0.4);
        assert!((sys.sigma2 - 2.511_886_431_509_58e-13).abs() < 1e-24);
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!(learner, LearnerConfig::default());
    }

    #[test]
    fn uplink_share_alone_fixes_downlink() {
        let (sys, _, _) = parse_config("zeta_ul=0.7").unwrap();
        assert!((sys.zeta_dl - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_rf_budget_is_rejected() {
        let err = parse_config("N_RF=0").unwrap_err().to_string();
        assert!(err.contains("N_RF must be ≥ 1"), "{err}");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config("M=8\nfoo=1\nbar = 2 # note\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("foo") && err.contains("bar"), "{err}");
    }

    #[test]
    fn type_errors_name_the_key() {
        let err = parse_config("K=six").unwrap_err().to_string();
        assert!(err.contains("K:") && err.contains("integer"), "{err}");
        let err = parse_config("combo=ZF").unwrap_err().to_string();
        assert!(err.contains("combo"), "{err}");
    }

    #[test]
    fn rf_budget_defaults_to_array_size() {
        let (sys, _, _) = parse_config("M=8\nK=6").unwrap();
        assert_eq!(sys.n_rf, 8);
    }

    #[test]
    fn snr_sets_powers_and_explicit_power_wins() {
        let (sys, _, _) = parse_config("sigma2_dbm=-96\nsnr_db=10\np_dl=1e-3").unwrap();
        assert!((sys.p_ul - 2.511_886_431_509_58e-12).abs() < 1e-23);
        assert_eq!(sys.p_pilot, sys.p_ul);
        assert_eq!(sys.p_dl, 1e-3);
    }

    #[test]
    fn snr_conversion_examples() {
        assert_eq!(snr_to_powers(0.0, 1.0), (1.0, 1.0, 1.0));
        let (p, _, _) = snr_to_powers(20.0, 3.0);
        assert!((p - 300.0).abs() < 1e-12);
    }

    #[test]
    fn comments_case_and_whitespace() {
        let text = "# header\n  n_rf = 4  # budget\nm=8\nk=6\ncombo = mrc/mrt\ncsi=imperfect\n\n";
        let (sys, _, _) = parse_config(text).unwrap();
        assert_eq!((sys.m, sys.k, sys.n_rf), (8, 6, 4));
        assert_eq!(sys.combo, Combo::MRC_MRT);
        assert_eq!(sys.csi, Csi::Imperfect);
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        assert!(parse_config("M=8\nm=9").is_err());
        let err = parse_config("M 8").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn grid_is_checked_against_kind() {
        assert!(parse_config("M=8\nK=6\nexperiment=sweep-rf\ngrid=2,4,9").is_err());
        assert!(parse_config("M=8\nK=6\nexperiment=sweep-rf\ngrid=2.5").is_err());
        assert!(parse_config("experiment=sweep-rho\ngrid=0").is_err());
        assert!(parse_config("experiment=sweep-snr\ngrid=").is_err());
        let (sys, spec, _) = parse_config("M=12\nK=6\nexperiment=sweep-rf").unwrap();
        assert_eq!(spec.grid_points(&sys), vec![5.0, 10.0, 12.0]);
    }

    #[test]
    fn forced_kind_is_used_for_grid_checks() {
        assert!(parse_config("grid=1,2").is_err());
        let (_, spec, _) =
            parse_config_as("grid=1,2\nexperiment=solve", Some(ExperimentKind::SweepRho)).unwrap();
        assert_eq!(spec.kind, ExperimentKind::SweepRho);
    }

    #[test]
    fn geometry_keys_must_match_layout() {
        assert!(parse_config("alpha_pl=3").is_err());
        let (_, spec, _) = parse_config("geometry=pathloss_only\nalpha_pl=3").unwrap();
        assert!(matches!(spec.geometry, Geometry::PathlossOnly { alpha, .. } if alpha == 3.0));
    }

    #[test]
    fn learner_keys() {
        let (_, _, l) = parse_config("N1=30\nobjective_scale=2.5\np0=0.2\nalpha=0.05").unwrap();
        assert_eq!(l.population, 30);
        assert_eq!(l.objective_scale, ObjectiveScale::Fixed(2.5));
        assert_eq!(l.subset.level_fraction, 0.2);
        assert!(parse_config("p0=1").is_err());
        assert!(parse_config("objective_scale=big").is_err());
    }

    #[test]
    fn rendered_config_round_trips() {
        let text = "M=16\nK=10\nN_RF=6\ncsi=imperfect\ngeometry=pathloss_only\nexperiment=sweep-rho\ngrid=1,10\npower_scheme=inv-norm\nseed=99\nobjective_scale=3";
        let (sys, spec, learner) = parse_config(text).unwrap();
        let rendered = render_config(&sys, &spec, &learner);
        let (sys2, spec2, learner2) = parse_config(&rendered).unwrap();
        assert_eq!(sys, sys2);
        assert_eq!(spec, spec2);
        assert_eq!(learner.population, learner2.population);
        assert_eq!(learner.theta_clip(), learner2.theta_clip());
        assert_eq!(render_config(&sys2, &spec2, &learner2), rendered);
    }
}
