//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # 1-qubit comparison
//! kind = compare
//! ansatz = bandit1q
//! agents = vanilla, natural, regularized_natural
//! seeds = 100
//! episodes = 500
//! ```
//!
//! Unknown keys are rejected. [`ExperimentConfig::render`] writes every key
//! with its resolved value, which is what the `.meta` sidecar records.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ansatz::{parity_optimum, CircuitTemplate};
use crate::bandit::OptimalRule;
use crate::error::{QnpgError, Result};
use crate::fixture::Fixture;
use crate::metric::{GradMethod, MetricMode};
use crate::policy::Estimator;
use crate::solver::DEFAULT_XI;
use crate::trainer::{EvalMode, InitMode, TrainerConfig, DEFAULT_EVAL_SUBSET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Compare,
    Landscape,
    Trajectory,
    Table,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Compare => "compare",
            ExperimentKind::Landscape => "landscape",
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Table => "table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzSpec {
    Bandit1q,
    Parity { n_qubits: usize, entangling: bool },
}

impl AnsatzSpec {
    pub fn build(self) -> Result<CircuitTemplate> {
        match self {
            AnsatzSpec::Bandit1q => Ok(CircuitTemplate::bandit1q()),
            AnsatzSpec::Parity { n_qubits, entangling } => CircuitTemplate::parity(n_qubits, entangling),
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            AnsatzSpec::Bandit1q => 1,
            AnsatzSpec::Parity { n_qubits, .. } => n_qubits,
        }
    }
}

/// The training variants an experiment can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agent {
    Vanilla,
    Natural,
    RegularizedNatural,
}

impl Agent {
    pub fn name(self) -> &'static str {
        match self {
            Agent::Vanilla => "vanilla",
            Agent::Natural => "natural",
            Agent::RegularizedNatural => "regularized_natural",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(Agent::Vanilla),
            "natural" => Ok(Agent::Natural),
            "regularized_natural" | "regnatural" => Ok(Agent::RegularizedNatural),
            other => Err(QnpgError::config(format!("unknown agent {other:?}"))),
        }
    }

    /// Specializes the shared trainer settings for this agent.
    pub fn configure(self, base: &TrainerConfig, metric: MetricMode, xi: f64) -> TrainerConfig {
        let mut c = base.clone();
        match self {
            Agent::Vanilla => {
                c.metric_mode = None;
                c.xi = 0.0;
            }
            Agent::Natural => {
                c.metric_mode = Some(metric);
                c.xi = 0.0;
            }
            Agent::RegularizedNatural => {
                c.metric_mode = Some(metric);
                c.xi = xi;
            }
        }
        c
    }
}

/// Where the starting point of a trajectory run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Theta0 {
    Explicit(Vec<f64>),
    /// Flat saddle region of the 1-qubit landscape.
    Distorted,
    /// Next to the landscape minimum.
    NearMinimum,
}

/// Parameters evaluated by the threshold table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableParams {
    Optimum,
    Fixture,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ansatz: AnsatzSpec,
    pub env_rule: OptimalRule,
    pub agents: Vec<Agent>,
    pub seeds: usize,
    pub master_seed: u64,
    pub trainer: TrainerConfig,
    pub metric_mode: MetricMode,
    pub regularization: f64,
    pub init_sigma: f64,
    pub near_optimal: bool,
    pub fixture: Option<PathBuf>,
    pub resolution: usize,
    pub theta0: Theta0,
    pub table_params: TableParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Compare,
            ansatz: AnsatzSpec::Bandit1q,
            env_rule: OptimalRule::Constant(0),
            agents: vec![Agent::Vanilla, Agent::Natural],
            seeds: 1,
            master_seed: 0,
            trainer: TrainerConfig::default(),
            metric_mode: MetricMode::BlockDiagonal,
            regularization: DEFAULT_XI,
            init_sigma: 0.5,
            near_optimal: false,
            fixture: None,
            resolution: 45,
            theta0: Theta0::Distorted,
            table_params: TableParams::Optimum,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| QnpgError::config(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(QnpgError::config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x.trim())).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses config text. `base_dir` resolves a relative `fixture` path.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut n_qubits: Option<usize> = None;
        let mut entangling = true;
        let mut ansatz_name = String::from("bandit1q");
        let mut env_rule: Option<String> = None;
        let mut spsa_samples = 10usize;
        let mut spsa_c: Option<f64> = None;
        let mut grad = String::from("param_shift");
        let mut eval = String::from("all");
        let mut eval_states = DEFAULT_EVAL_SUBSET;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| QnpgError::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            let t = &mut c.trainer;
            match key {
                "kind" => {
                    c.kind = match v {
                        "compare" => ExperimentKind::Compare,
                        "landscape" => ExperimentKind::Landscape,
                        "trajectory" => ExperimentKind::Trajectory,
                        "table" | "threshold_table" => ExperimentKind::Table,
                        _ => return Err(QnpgError::config(format!("unknown kind {v:?}"))),
                    }
                }
                "ansatz" => ansatz_name = v.to_string(),
                "n_qubits" => n_qubits = Some(parse_num(key, v)?),
                "entangling" => entangling = parse_bool(key, v)?,
                "env" => env_rule = Some(v.to_string()),
                "agents" => {
                    c.agents = v
                        .split(',')
                        .map(|a| Agent::parse(a.trim()))
                        .collect::<Result<Vec<_>>>()?
                }
                "seeds" => c.seeds = parse_num(key, v)?,
                "seed" => c.master_seed = parse_num(key, v)?,
                "episodes" => t.episodes = parse_num(key, v)?,
                "learning_rate" => t.learning_rate = parse_num(key, v)?,
                "batch_size" => t.batch_size = parse_num(key, v)?,
                "discount" => t.discount = parse_num(key, v)?,
                "shots" => {
                    t.estimator = if v == "exact" {
                        Estimator::Exact
                    } else {
                        Estimator::Shots(parse_num(key, v)?)
                    }
                }
                "grad_method" => grad = v.to_string(),
                "spsa_samples" => spsa_samples = parse_num(key, v)?,
                "spsa_c" => spsa_c = Some(parse_num(key, v)?),
                "metric_mode" => {
                    c.metric_mode = match v {
                        "block_diagonal" => MetricMode::BlockDiagonal,
                        "diagonal" => MetricMode::Diagonal,
                        "identity" => MetricMode::Identity,
                        _ => return Err(QnpgError::config(format!("unknown metric_mode {v:?}"))),
                    }
                }
                "xi" => c.regularization = parse_num(key, v)?,
                "metric_scale" => t.metric_scale = parse_num(key, v)?,
                "clip" => t.clip = if v == "none" { None } else { Some(parse_num(key, v)?) },
                "init" => {
                    c.near_optimal = match v {
                        "uniform" => false,
                        "near_optimal" => true,
                        _ => return Err(QnpgError::config(format!("unknown init {v:?}"))),
                    }
                }
                "init_sigma" => c.init_sigma = parse_num(key, v)?,
                "fixture" => {
                    let p = PathBuf::from(v);
                    c.fixture = Some(match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    });
                }
                "eval" => eval = v.to_string(),
                "eval_states" => eval_states = parse_num(key, v)?,
                "eval_every" => t.eval_every = parse_num(key, v)?,
                "theta_every" => t.theta_every = parse_num(key, v)?,
                "resolution" => c.resolution = parse_num(key, v)?,
                "theta0" => {
                    c.theta0 = match v {
                        "distorted" => Theta0::Distorted,
                        "near_minimum" => Theta0::NearMinimum,
                        _ => Theta0::Explicit(parse_list(key, v)?),
                    }
                }
                "table_params" => {
                    c.table_params = match v {
                        "optimum" => TableParams::Optimum,
                        "fixture" => TableParams::Fixture,
                        _ => TableParams::Explicit(parse_list(key, v)?),
                    }
                }
                _ => return Err(QnpgError::config(format!("unknown key {key:?}"))),
            }
        }

        c.ansatz = match ansatz_name.as_str() {
            "bandit1q" => AnsatzSpec::Bandit1q,
            "parity" => AnsatzSpec::Parity {
                n_qubits: n_qubits.unwrap_or(12),
                entangling,
            },
            other => return Err(QnpgError::config(format!("unknown ansatz {other:?}"))),
        };
        c.env_rule = match env_rule.as_deref() {
            None => match c.ansatz {
                AnsatzSpec::Bandit1q => OptimalRule::Constant(0),
                AnsatzSpec::Parity { .. } => OptimalRule::Parity,
            },
            Some("constant0") => OptimalRule::Constant(0),
            Some("constant1") => OptimalRule::Constant(1),
            Some("parity") => OptimalRule::Parity,
            Some(other) => return Err(QnpgError::config(format!("unknown env {other:?}"))),
        };
        let default_c = match c.trainer.estimator {
            Estimator::Exact => 1e-3,
            Estimator::Shots(_) => 0.1,
        };
        c.trainer.grad_method = match grad.as_str() {
            "param_shift" => GradMethod::ParamShift,
            "spsa" => GradMethod::Spsa {
                samples: spsa_samples,
                c: spsa_c.unwrap_or(default_c),
            },
            other => return Err(QnpgError::config(format!("unknown grad_method {other:?}"))),
        };
        c.trainer.eval = match eval.as_str() {
            "all" => EvalMode::All,
            "subset" => EvalMode::Subset(eval_states),
            other => return Err(QnpgError::config(format!("unknown eval {other:?}"))),
        };
        c.trainer.seed = c.master_seed;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| QnpgError::config(format!("cannot read config {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(QnpgError::config("at least one agent is required"));
        }
        if self.seeds == 0 {
            return Err(QnpgError::config("seeds must be at least 1"));
        }
        if !(self.regularization > 0.0) {
            return Err(QnpgError::config("xi must be positive"));
        }
        if self.resolution < 2 {
            return Err(QnpgError::config("resolution must be at least 2"));
        }
        self.ansatz.build()?;
        self.trainer.validate()
    }

    pub fn template(&self) -> Result<CircuitTemplate> {
        self.ansatz.build()
    }

    /// Fixture angles, if a fixture path is configured.
    pub fn load_fixture(&self, template: &CircuitTemplate) -> Result<Vec<f64>> {
        let path = self
            .fixture
            .as_ref()
            .ok_or_else(|| QnpgError::config("this experiment needs `fixture = <path>`"))?;
        Fixture::load(path)?.for_template(template)
    }

    /// Initialization mode with the fixture resolved.
    pub fn init_mode(&self, template: &CircuitTemplate) -> Result<InitMode> {
        if self.near_optimal {
            Ok(InitMode::NearOptimal {
                sigma: self.init_sigma,
                center: self.load_fixture(template)?,
            })
        } else {
            Ok(InitMode::Uniform)
        }
    }

    pub fn table_theta(&self, template: &CircuitTemplate) -> Result<Vec<f64>> {
        let theta = match (&self.table_params, self.ansatz) {
            (TableParams::Explicit(v), _) => v.clone(),
            (TableParams::Fixture, _) => self.load_fixture(template)?,
            (TableParams::Optimum, AnsatzSpec::Parity { n_qubits, entangling }) => parity_optimum(n_qubits, entangling),
            (TableParams::Optimum, AnsatzSpec::Bandit1q) => vec![0.0, std::f64::consts::FRAC_PI_2],
        };
        template.check_params(&theta)?;
        Ok(theta)
    }

    /// Every key with its resolved value, one per line.
    pub fn render(&self) -> String {
        let t = &self.trainer;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("kind", self.kind.name().into());
        match self.ansatz {
            AnsatzSpec::Bandit1q => kv("ansatz", "bandit1q".into()),
            AnsatzSpec::Parity { n_qubits, entangling } => {
                kv("ansatz", "parity".into());
                kv("n_qubits", n_qubits.to_string());
                kv("entangling", entangling.to_string());
            }
        }
        kv(
            "env",
            match self.env_rule {
                OptimalRule::Constant(a) => format!("constant{a}"),
                OptimalRule::Parity => "parity".into(),
            },
        );
        kv(
            "agents",
            self.agents.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
        );
        kv("seeds", self.seeds.to_string());
        kv("seed", self.master_seed.to_string());
        kv("episodes", t.episodes.to_string());
        kv("learning_rate", t.learning_rate.to_string());
        kv("batch_size", t.batch_size.to_string());
        kv("discount", t.discount.to_string());
        kv(
            "shots",
            match t.estimator {
                Estimator::Exact => "exact".into(),
                Estimator::Shots(k) => k.to_string(),
            },
        );
        match t.grad_method {
            GradMethod::ParamShift => kv("grad_method", "param_shift".into()),
            GradMethod::Spsa { samples, c } => {
                kv("grad_method", "spsa".into());
                kv("spsa_samples", samples.to_string());
                kv("spsa_c", c.to_string());
            }
        }
        kv(
            "metric_mode",
            match self.metric_mode {
                MetricMode::BlockDiagonal => "block_diagonal",
                MetricMode::Diagonal => "diagonal",
                MetricMode::Identity => "identity",
            }
            .into(),
        );
        kv("xi", self.regularization.to_string());
        kv("metric_scale", t.metric_scale.to_string());
        kv("clip", t.clip.map_or("none".into(), |c| c.to_string()));
        kv("init", if self.near_optimal { "near_optimal" } else { "uniform" }.into());
        kv("init_sigma", self.init_sigma.to_string());
        if let Some(f) = &self.fixture {
            kv("fixture", f.display().to_string());
        }
        match t.eval {
            EvalMode::All => kv("eval", "all".into()),
            EvalMode::Subset(k) => {
                kv("eval", "subset".into());
                kv("eval_states", k.to_string());
            }
        }
        kv("eval_every", t.eval_every.to_string());
        kv("theta_every", t.theta_every.to_string());
        kv("resolution", self.resolution.to_string());
        kv(
            "theta0",
            match &self.theta0 {
                Theta0::Distorted => "distorted".into(),
                Theta0::NearMinimum => "near_minimum".into(),
                Theta0::Explicit(v) => join(v),
            },
        );
        kv(
            "table_params",
            match &self.table_params {
                TableParams::Optimum => "optimum".into(),
                TableParams::Fixture => "fixture".into(),
                TableParams::Explicit(v) => join(v),
            },
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse(
            "kind = compare\n# comment\nagents = vanilla, regularized_natural\nseeds = 3 # inline\nshots = exact\n",
            None,
        )
        .unwrap();
        assert_eq!(c.agents, vec![Agent::Vanilla, Agent::RegularizedNatural]);
        assert_eq!(c.seeds, 3);
        assert_eq!(c.trainer.estimator, Estimator::Exact);
        assert_eq!(c.env_rule, OptimalRule::Constant(0));
        assert_eq!(c.trainer.learning_rate, 0.01);
    }

    #[test]
    fn parity_defaults_to_parity_env_and_spsa_c_by_mode() {
        let c = ExperimentConfig::parse("ansatz = parity\nn_qubits = 6\ngrad_method = spsa\n", None).unwrap();
        assert_eq!(c.env_rule, OptimalRule::Parity);
        assert_eq!(c.trainer.grad_method, GradMethod::Spsa { samples: 10, c: 0.1 });
        let c = ExperimentConfig::parse("ansatz = parity\nn_qubits = 4\ngrad_method = spsa\nshots = exact\n", None)
            .unwrap();
        assert_eq!(c.trainer.grad_method, GradMethod::Spsa { samples: 10, c: 1e-3 });
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "kind = nope",
            "agents = ",
            "seeds = 0",
            "ansatz = parity\nn_qubits = 3",
            "learning_rate = -1",
            "no equals sign",
            "xi = 0",
        ] {
            assert!(ExperimentConfig::parse(text, None).is_err(), "{text}");
        }
    }

    #[test]
    fn render_round_trips() {
        let c = ExperimentConfig::parse(
            "kind = trajectory\nansatz = parity\nn_qubits = 4\nentangling = false\ntheta0 = 0.5,1\neval = subset\neval_states = 8\nclip = none\n",
            None,
        )
        .unwrap();
        let again = ExperimentConfig::parse(&c.render(), None).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.render(), c.render());
    }

    #[test]
    fn near_optimal_without_fixture_fails() {
        let c = ExperimentConfig::parse("ansatz = parity\nn_qubits = 2\ninit = near_optimal\n", None).unwrap();
        let t = c.template().unwrap();
        assert!(matches!(c.init_mode(&t), Err(QnpgError::Config(_))));
    }

    #[test]
    fn relative_fixture_resolves_against_config_dir() {
        let c = ExperimentConfig::parse("fixture = fx.txt", Some(Path::new("/tmp/cfg"))).unwrap();
        assert_eq!(c.fixture, Some(PathBuf::from("/tmp/cfg/fx.txt")));
    }
}
