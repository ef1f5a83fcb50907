//! Run configuration: flat file keys, command-line overrides, defaults and
//! validation.

use std::fmt;
use std::path::{Path, PathBuf};

use aggrekin::{ChemoModel, Gaussian, InitialSplit, MergeRule, Scenario, VelocityLaw, DOMAIN_PADDING};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

/// Environment variable consulted when no `output_dir` is configured.
pub const OUTPUT_DIR_ENV: &str = "AGGREKIN_OUTPUT_DIR";

/// Every key accepted in a config file or as a `--key=value` override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigKeys {
    /// two_gauss, three_gauss, asymmetric, single_dirac, custom or random.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Custom point masses as `y:m` pairs separated by commas.
    #[arg(long)]
    pub particles: Option<String>,
    /// Custom density as `amplitude:center:rate` triples separated by commas.
    #[arg(long)]
    pub gaussians: Option<String>,
    #[arg(long = "x_min", allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long = "x_max", allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t_end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub phi0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Velocity law: smooth, step or identity.
    #[arg(long)]
    pub mode: Option<String>,
    /// midpoint or center_of_mass.
    #[arg(long = "merge_rule")]
    pub merge_rule: Option<String>,
    /// Initial kinetic split: equilibrium or even.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long = "eps_list", value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    #[arg(long = "sample_every")]
    pub sample_every: Option<usize>,
    #[arg(long = "output_dir")]
    pub output_dir: Option<PathBuf>,
    #[arg(long = "emit_svg")]
    pub emit_svg: Option<bool>,
    /// Seed of the `random` scenario.
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        ConfigKeys { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ConfigKeys {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("cannot parse config {}: {e}", path.display()))
    }

    /// Keys set in `top` win over those in `self`.
    pub fn overlay(self, top: ConfigKeys) -> Self {
        overlay!(
            self, top, scenario, particles, gaussians, x_min, x_max, dx, dt, t_end, c, phi0, lambda, alpha, mode,
            merge_rule, split, eps_list, sample_every, output_dir, emit_svg, seed
        )
    }
}

/// A configuration value that violates a constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key,
        message: message.into(),
    }
}

/// What the configuration is resolved for; kinetic runs add a CFL check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Aggregate,
    Kinetic,
    Study,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario_name: String,
    pub scenario: Scenario,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    /// `t_end` came from the user rather than the scenario default.
    pub t_end_given: bool,
    pub model: ChemoModel,
    pub merge_rule: MergeRule,
    pub split: InitialSplit,
    pub eps_list: Vec<f64>,
    pub sample_every: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub seed: u64,
}

pub const DEFAULT_DX: f64 = 2e-3;
pub const DEFAULT_AGGREGATE_DT: f64 = 1e-3;
pub const DEFAULT_SAMPLE_EVERY: usize = 250;
pub const DEFAULT_EPS_LIST: [f64; 3] = [0.2, 0.1, 0.05];
pub const DEFAULT_SEED: u64 = 1;

/// Horizon long enough for the default model to collapse the scenario.
pub fn default_t_end(name: &str) -> f64 {
    match name {
        "two_gauss" => 3.0,
        "three_gauss" => 5.0,
        "asymmetric" => 6.0,
        "single_dirac" => 1.0,
        _ => 10.0,
    }
}

/// Default domain: the support padded by a little more than the required
/// margin, rounded outwards to integers.
pub fn default_domain(scenario: &Scenario) -> (f64, f64) {
    let (lo, hi) = scenario.support();
    ((lo - DOMAIN_PADDING - 1.0).floor(), (hi + DOMAIN_PADDING + 1.0).ceil())
}

fn parse_list<const N: usize>(key: &'static str, text: &str) -> Result<Vec<[f64; N]>, ConfigError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        if parts.len() != N {
            return Err(bad(key, format!("`{item}` should have {N} `:`-separated numbers")));
        }
        let mut vals = [0.0; N];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| bad(key, format!("`{p}` is not a finite number")))?;
        }
        out.push(vals);
    }
    if out.is_empty() {
        return Err(bad(key, "empty list"));
    }
    Ok(out)
}

/// Random configuration of 2 to 10 aggregates with masses in `(0, 2]` and
/// positions in `[-5, 5]`.
pub fn random_particles(seed: u64) -> Vec<(f64, f64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=10);
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    y.sort_by(f64::total_cmp);
    y.into_iter().map(|y| (y, 2.0 - rng.gen_range(0.0..2.0))).collect()
}

fn resolve_scenario(keys: &ConfigKeys, seed: u64) -> Result<(String, Scenario), ConfigError> {
    let name = match (&keys.scenario, &keys.particles, &keys.gaussians) {
        (Some(s), _, _) => s.to_ascii_lowercase().replace('-', "_"),
        (None, Some(_), _) | (None, _, Some(_)) => "custom".to_string(),
        (None, None, None) => "two_gauss".to_string(),
    };
    let scenario = match name.as_str() {
        "custom" => match (&keys.particles, &keys.gaussians) {
            (Some(_), Some(_)) => return Err(bad("particles", "give either particles or gaussians, not both")),
            (Some(p), None) => {
                let list = parse_list::<2>("particles", p)?;
                if let Some(q) = list.iter().find(|q| q[1] <= 0.0) {
                    return Err(bad("particles", format!("mass {} is not positive", q[1])));
                }
                Scenario::CustomParticles(list.into_iter().map(|q| (q[0], q[1])).collect())
            }
            (None, Some(g)) => {
                let list = parse_list::<3>("gaussians", g)?;
                if let Some(q) = list.iter().find(|q| q[0] < 0.0 || q[2] <= 0.0) {
                    return Err(bad(
                        "gaussians",
                        format!("need amplitude >= 0 and rate > 0, got {}:{}:{}", q[0], q[1], q[2]),
                    ));
                }
                Scenario::CustomDensity(list.into_iter().map(|q| Gaussian::new(q[0], q[1], q[2])).collect())
            }
            (None, None) => return Err(bad("scenario", "custom needs `particles` or `gaussians`")),
        },
        "random" => Scenario::CustomParticles(random_particles(seed)),
        other => {
            if keys.particles.is_some() || keys.gaussians.is_some() {
                return Err(bad("scenario", format!("`{other}` does not take particles or gaussians")));
            }
            Scenario::from_name(other).map_err(|e| bad("scenario", e.to_string()))?
        }
    };
    let name = match &scenario {
        Scenario::CustomParticles(_) | Scenario::CustomDensity(_) => name,
        s => s.name().to_string(),
    };
    Ok((name, scenario))
}

fn positive(key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("{v} must be positive and finite")))
    }
}

fn parsed<T: std::str::FromStr<Err = String>>(key: &'static str, v: &Option<String>) -> Result<Option<T>, ConfigError> {
    v.as_deref().map(str::parse).transpose().map_err(|e| bad(key, e))
}

impl SimConfig {
    pub fn resolve(keys: &ConfigKeys, kind: RunKind) -> Result<Self, ConfigError> {
        let seed = keys.seed.unwrap_or(DEFAULT_SEED);
        let (scenario_name, scenario) = resolve_scenario(keys, seed)?;

        let law = parsed::<VelocityLaw>("mode", &keys.mode)?.unwrap_or(VelocityLaw::Smooth);
        let defaults = ChemoModel::default();
        let model = ChemoModel {
            c: keys.c.unwrap_or(defaults.c),
            phi0: keys.phi0.unwrap_or(defaults.phi0),
            lambda: keys.lambda.unwrap_or(defaults.lambda),
            alpha: keys.alpha.unwrap_or(defaults.alpha),
            law,
        };
        model.validate().map_err(|e| match e {
            aggrekin::Error::InvalidModel { key, reason } => bad(key, reason),
            other => bad("mode", other.to_string()),
        })?;

        let (dx_min, dx_max) = default_domain(&scenario);
        let x_min = keys.x_min.unwrap_or(dx_min);
        let x_max = keys.x_max.unwrap_or(dx_max);
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(bad("x_max", format!("domain [{x_min}, {x_max}] is empty")));
        }
        let (lo, hi) = scenario.support();
        if x_min > lo - DOMAIN_PADDING {
            return Err(bad(
                "x_min",
                format!("{x_min} leaves less than {DOMAIN_PADDING} of padding left of the support start {lo}"),
            ));
        }
        if x_max < hi + DOMAIN_PADDING {
            return Err(bad(
                "x_max",
                format!("{x_max} leaves less than {DOMAIN_PADDING} of padding right of the support end {hi}"),
            ));
        }

        let dx = positive("dx", keys.dx.unwrap_or(DEFAULT_DX))?;
        if (x_max - x_min) / dx > 5e7 {
            return Err(bad("dx", format!("{dx} gives more than 5e7 cells")));
        }
        let kinetic = kind != RunKind::Aggregate;
        if kinetic && law == VelocityLaw::Identity {
            return Err(bad("mode", "the kinetic model needs a bounded velocity law (smooth or step)"));
        }
        let dt_default = if kinetic {
            dx / model.c
        } else {
            DEFAULT_AGGREGATE_DT
        };
        let dt = positive("dt", keys.dt.unwrap_or(dt_default))?;
        if kinetic && model.c * dt / dx > 1.0 + 1e-12 {
            return Err(bad("dt", format!("{dt} exceeds dx/c = {} required by the kinetic scheme", dx / model.c)));
        }
        let t_end = positive("t_end", keys.t_end.unwrap_or_else(|| default_t_end(&scenario_name)))?;

        let eps_list = keys.eps_list.clone().unwrap_or_else(|| DEFAULT_EPS_LIST.to_vec());
        if eps_list.is_empty() {
            return Err(bad("eps_list", "empty list"));
        }
        for &e in &eps_list {
            positive("eps_list", e)?;
        }
        let sample_every = keys.sample_every.unwrap_or(DEFAULT_SAMPLE_EVERY);
        if sample_every == 0 {
            return Err(bad("sample_every", "must be at least 1"));
        }
        let output_dir = keys
            .output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        Ok(SimConfig {
            scenario_name,
            scenario,
            x_min,
            x_max,
            dx,
            dt,
            t_end,
            t_end_given: keys.t_end.is_some(),
            model,
            merge_rule: parsed("merge_rule", &keys.merge_rule)?.unwrap_or_default(),
            split: parsed("split", &keys.split)?.unwrap_or_default(),
            eps_list,
            sample_every,
            output_dir,
            emit_svg: keys.emit_svg.unwrap_or(false),
            seed,
        })
    }

    /// `(key, value)` pairs echoed at the top of every output file.
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        let split = match self.split {
            InitialSplit::Equilibrium => "equilibrium",
            InitialSplit::Even => "even",
        };
        vec![
            ("version", env!("CARGO_PKG_VERSION").to_string()),
            ("scenario", self.scenario_name.clone()),
            ("initial_data", self.scenario.formula()),
            ("x_min", self.x_min.to_string()),
            ("x_max", self.x_max.to_string()),
            ("dx", self.dx.to_string()),
            ("dt", self.dt.to_string()),
            ("t_end", self.t_end.to_string()),
            ("c", self.model.c.to_string()),
            ("phi0", self.model.phi0.to_string()),
            ("lambda", self.model.lambda.to_string()),
            ("alpha", self.model.alpha.to_string()),
            ("mode", self.model.law.name().to_string()),
            ("merge_rule", self.merge_rule.name().to_string()),
            ("split", split.to_string()),
            (
                "eps_list",
                self.eps_list.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            ),
            ("sample_every", self.sample_every.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("emit_svg", self.emit_svg.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(f: impl FnOnce(&mut ConfigKeys)) -> ConfigKeys {
        let mut k = ConfigKeys {
            output_dir: Some("o".into()),
            ..Default::default()
        };
        f(&mut k);
        k
    }

    #[test]
    fn defaults() {
        let cfg = SimConfig::resolve(&keys(|_| {}), RunKind::Aggregate).unwrap();
        assert_eq!(cfg.scenario_name, "two_gauss");
        assert_eq!((cfg.x_min, cfg.x_max), (-23.0, 23.0));
        assert_eq!((cfg.dx, cfg.dt, cfg.t_end), (2e-3, 1e-3, 3.0));
        assert_eq!(cfg.model, ChemoModel::default());
        assert!(!cfg.t_end_given);
        let kin = SimConfig::resolve(&keys(|_| {}), RunKind::Kinetic).unwrap();
        assert_eq!(kin.dt, 2e-3);
    }

    #[test]
    fn overlay_prefers_top() {
        let base = keys(|k| {
            k.dx = Some(0.1);
            k.dt = Some(0.2);
        });
        let top = ConfigKeys {
            dt: Some(0.3),
            ..Default::default()
        };
        let m = base.overlay(top);
        assert_eq!((m.dx, m.dt), (Some(0.1), Some(0.3)));
    }

    #[test]
    fn file_keys_parse() {
        let k: ConfigKeys =
            toml::from_str("scenario = \"asymmetric\"\ndx = 0.01\neps_list = [0.2, 0.1]\nemit_svg = true\n").unwrap();
        assert_eq!(k.scenario.as_deref(), Some("asymmetric"));
        assert_eq!(k.eps_list, Some(vec![0.2, 0.1]));
        assert!(toml::from_str::<ConfigKeys>("dxx = 1.0").is_err());
    }

    #[test]
    fn violations_name_the_key() {
        let cases: Vec<(ConfigKeys, RunKind, &str)> = vec![
            (keys(|k| k.dx = Some(0.0)), RunKind::Aggregate, "dx"),
            (keys(|k| k.dt = Some(-1.0)), RunKind::Aggregate, "dt"),
            (keys(|k| k.t_end = Some(0.0)), RunKind::Aggregate, "t_end"),
            (keys(|k| k.x_min = Some(-5.0)), RunKind::Aggregate, "x_min"),
            (keys(|k| k.x_max = Some(10.0)), RunKind::Aggregate, "x_max"),
            (keys(|k| k.dt = Some(0.01)), RunKind::Kinetic, "dt"),
            (keys(|k| k.mode = Some("identity".into())), RunKind::Study, "mode"),
            (keys(|k| k.mode = Some("linear".into())), RunKind::Aggregate, "mode"),
            (keys(|k| k.alpha = Some(0.0)), RunKind::Aggregate, "alpha"),
            (keys(|k| k.scenario = Some("nope".into())), RunKind::Aggregate, "scenario"),
            (keys(|k| k.particles = Some("0:-1".into())), RunKind::Aggregate, "particles"),
            (keys(|k| k.eps_list = Some(vec![0.1, 0.0])), RunKind::Study, "eps_list"),
            (keys(|k| k.sample_every = Some(0)), RunKind::Aggregate, "sample_every"),
        ];
        for (k, kind, key) in cases {
            let err = SimConfig::resolve(&k, kind).unwrap_err();
            assert_eq!(err.key, key, "{err}");
        }
        // the aggregate solver has no CFL restriction
        assert!(SimConfig::resolve(&keys(|k| k.dt = Some(0.01)), RunKind::Aggregate).is_ok());
    }

    #[test]
    fn custom_scenarios() {
        let cfg = SimConfig::resolve(&keys(|k| k.particles = Some("-1:0.5, 2:1".into())), RunKind::Aggregate).unwrap();
        assert_eq!(cfg.scenario, Scenario::CustomParticles(vec![(-1.0, 0.5), (2.0, 1.0)]));
        assert_eq!((cfg.x_min, cfg.x_max), (-22.0, 23.0));
        let cfg = SimConfig::resolve(&keys(|k| k.gaussians = Some("1:0:20".into())), RunKind::Kinetic).unwrap();
        assert_eq!(cfg.scenario, Scenario::CustomDensity(vec![Gaussian::new(1.0, 0.0, 20.0)]));
        let a = SimConfig::resolve(&keys(|k| k.scenario = Some("random".into())), RunKind::Aggregate).unwrap();
        let b = SimConfig::resolve(&keys(|k| k.scenario = Some("random".into())), RunKind::Aggregate).unwrap();
        assert_eq!(a.scenario, b.scenario);
    }

    #[test]
    fn random_particles_in_range() {
        for seed in 0..50 {
            let p = random_particles(seed);
            assert!((2..=10).contains(&p.len()));
            assert!(p.windows(2).all(|w| w[0].0 <= w[1].0));
            assert!(p.iter().all(|&(y, m)| (-5.0..=5.0).contains(&y) && m > 0.0 && m <= 2.0));
        }
    }
}
