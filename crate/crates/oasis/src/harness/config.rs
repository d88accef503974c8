//! Flat key–value experiment manifests.
//!
//! A manifest is a plain text file: one `key = value` pair per line, `#`
//! starts a comment, blank lines are ignored, every key is known and may
//! appear at most once. The same text describes both the problem (data) and
//! the experiment (method, hyper-parameters, run controls), so one file
//! reproduces a run exactly. The full grammar is documented in the README.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dataio::{load_libsvm, synth_classification};
use crate::error::{OasisError, Result};
use crate::harness::{ExperimentConfig, MethodSpec, ScheduleEntry};
use crate::linalg::Rng;
use crate::optimizers::OasisMode;
use crate::problems::{
    LogisticRegression, NonlinearLeastSquares, Objective, Quadratic, QuadraticMatrix,
};

/// Every key a manifest may contain.
const KNOWN_KEYS: &[&str] = &[
    // problem
    "problem",
    "diag",
    "b",
    "n",
    "d",
    "separation",
    "keep_prob",
    "data_seed",
    "lambda",
    "half_scale",
    "data",
    "loss",
    // method + hyper-parameters
    "method",
    "eta0",
    "alpha",
    "beta1",
    "beta2",
    "gamma",
    "warmstart",
    "optimistic",
    "epsilon",
    "weight_decay",
    "eta_init",
    "c1",
    "tau",
    // run controls
    "length",
    "batch_size",
    "distinct_probe_batch",
    "seeds",
    "w0_scale",
    "schedule",
];

/// A parsed manifest: raw key–value pairs plus typed builders.
#[derive(Debug, Clone)]
pub struct Manifest {
    values: BTreeMap<String, String>,
}

impl Manifest {
    /// Parse manifest text. Unknown or duplicate keys are configuration
    /// errors (with their line number), so typos cannot silently change an
    /// experiment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(OasisError::Config(format!(
                    "manifest line {line_no}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(OasisError::Config(format!(
                    "manifest line {line_no}: unknown key `{key}` (known keys: {})",
                    KNOWN_KEYS.join(", ")
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(OasisError::Config(format!(
                    "manifest line {line_no}: key `{key}` appears twice"
                )));
            }
        }
        Ok(Manifest { values })
    }

    /// Parse a manifest file. An unreadable manifest is a configuration
    /// error, not a runtime failure.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            OasisError::Config(format!("cannot read manifest `{}`: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Override a key from the command line (the flag wins over the file).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(OasisError::Config(format!("unknown manifest key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| OasisError::Config(format!("manifest is missing required key `{key}`")))
    }

    fn parse_f64(&self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| OasisError::Config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    fn parse_usize(&self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
                OasisError::Config(format!("key `{key}`: `{v}` is not a nonnegative integer"))
            }),
        }
    }

    fn parse_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(OasisError::Config(format!(
                "key `{key}`: `{v}` is not `true` or `false`"
            ))),
        }
    }

    fn parse_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| OasisError::Config(format!("key `{key}`: `{s}` is not a number")))
            })
            .collect()
    }

    /// `lambda` accepts a plain number or the form `a/n` (regularization
    /// expressed relative to the sample count).
    fn parse_lambda(&self, n_samples: usize) -> Result<f64> {
        let raw = self.require("lambda")?;
        if let Some(numer) = raw.strip_suffix("/n") {
            let a = numer.trim().parse::<f64>().map_err(|_| {
                OasisError::Config(format!("key `lambda`: `{raw}` is not a number or `a/n`"))
            })?;
            return Ok(a / n_samples as f64);
        }
        raw.parse::<f64>().map_err(|_| {
            OasisError::Config(format!("key `lambda`: `{raw}` is not a number or `a/n`"))
        })
    }

    /// Build the problem this manifest describes.
    pub fn build_problem(&self) -> Result<Box<dyn Objective + Sync + Send>> {
        match self.require("problem")? {
            "quadratic" => {
                let diag = self.parse_f64_list("diag")?;
                let b = self.parse_f64_list("b")?;
                Ok(Box::new(Quadratic::new(
                    QuadraticMatrix::Diagonal(diag),
                    b,
                )?))
            }
            "synthetic-logistic" | "synthetic-nls" => {
                let n = self
                    .parse_usize("n", None)?
                    .ok_or_else(|| OasisError::Config("synthetic problems need `n`".into()))?;
                let d = self
                    .parse_usize("d", None)?
                    .ok_or_else(|| OasisError::Config("synthetic problems need `d`".into()))?;
                let separation = self.parse_f64("separation", Some(1.0))?.unwrap();
                let keep_prob = self.parse_f64("keep_prob", Some(1.0))?.unwrap();
                let data_seed = self.parse_usize("data_seed", Some(1))?.unwrap() as u64;
                let mut rng = Rng::new(data_seed);
                let (x, y) = synth_classification(n, d, separation, keep_prob, &mut rng)?;
                if self.require("problem")? == "synthetic-logistic" {
                    let lambda = self.parse_lambda(n)?;
                    Ok(Box::new(LogisticRegression::new(x, y, lambda)?))
                } else {
                    let half_scale = self.parse_bool("half_scale", false)?;
                    Ok(Box::new(NonlinearLeastSquares::from_pm_labels(
                        x, &y, half_scale,
                    )?))
                }
            }
            "libsvm" => {
                let path = self.require("data")?;
                let (x, y) = load_libsvm(path, None)?;
                let n = x.n_rows();
                match self.get("loss").unwrap_or("logistic") {
                    "logistic" => {
                        let lambda = self.parse_lambda(n)?;
                        Ok(Box::new(LogisticRegression::new(x, y, lambda)?))
                    }
                    "nls" => {
                        let half_scale = self.parse_bool("half_scale", false)?;
                        Ok(Box::new(NonlinearLeastSquares::from_pm_labels(
                            x, &y, half_scale,
                        )?))
                    }
                    other => Err(OasisError::Config(format!(
                        "key `loss`: `{other}` is not `logistic` or `nls`"
                    ))),
                }
            }
            other => Err(OasisError::Config(format!(
                "key `problem`: `{other}` is not one of quadratic, synthetic-logistic, \
                 synthetic-nls, libsvm"
            ))),
        }
    }

    /// Build the experiment configuration this manifest describes.
    pub fn build_experiment(&self) -> Result<ExperimentConfig> {
        let method_name = self.require("method")?;
        let mut method = MethodSpec::from_name(method_name)?;
        // Line-search shape parameters live in the mode, not in `Hyper`.
        if let MethodSpec::Oasis(OasisMode::LineSearch { eta_init, c1, tau }) = &mut method {
            *eta_init = self.parse_f64("eta_init", Some(*eta_init))?.unwrap();
            *c1 = self.parse_f64("c1", Some(*c1))?.unwrap();
            *tau = self.parse_f64("tau", Some(*tau))?.unwrap();
        }
        let mut config = ExperimentConfig::new(method);

        let h = &mut config.hyper;
        h.eta0 = self.parse_f64("eta0", Some(h.eta0))?.unwrap();
        h.alpha = self.parse_f64("alpha", Some(h.alpha))?.unwrap();
        h.beta1 = self.parse_f64("beta1", Some(h.beta1))?.unwrap();
        h.beta2 = self.parse_f64("beta2", Some(h.beta2))?.unwrap();
        h.gamma = self.parse_f64("gamma", Some(h.gamma))?.unwrap();
        h.epsilon = self.parse_f64("epsilon", Some(h.epsilon))?.unwrap();
        h.weight_decay = self
            .parse_f64("weight_decay", Some(h.weight_decay))?
            .unwrap();
        h.warmstart = self.parse_usize("warmstart", Some(h.warmstart))?.unwrap();
        h.optimistic = self.parse_bool("optimistic", h.optimistic)?;

        config.length = self.parse_usize("length", Some(config.length))?.unwrap();
        // `batch_size = 0` (or absence) selects full batches.
        config.batch_size = match self.parse_usize("batch_size", None)? {
            None | Some(0) => None,
            Some(b) => Some(b),
        };
        config.distinct_probe_batch =
            self.parse_bool("distinct_probe_batch", config.distinct_probe_batch)?;
        config.w0_scale = self.parse_f64("w0_scale", Some(config.w0_scale))?.unwrap();

        if let Some(raw) = self.get("seeds") {
            let seeds: Result<Vec<u64>> = raw
                .split(',')
                .map(|s| {
                    s.trim().parse::<u64>().map_err(|_| {
                        OasisError::Config(format!("key `seeds`: `{s}` is not an integer"))
                    })
                })
                .collect();
            config.seeds = seeds?;
        }

        if let Some(raw) = self.get("schedule") {
            let mut schedule = Vec::new();
            for part in raw.split(',') {
                let Some((at, factor)) = part.split_once(':') else {
                    return Err(OasisError::Config(format!(
                        "key `schedule`: `{part}` is not `at:factor`"
                    )));
                };
                let at = at.trim().parse::<usize>().map_err(|_| {
                    OasisError::Config(format!("key `schedule`: `{at}` is not an integer"))
                })?;
                let factor = factor.trim().parse::<f64>().map_err(|_| {
                    OasisError::Config(format!("key `schedule`: `{factor}` is not a number"))
                })?;
                schedule.push(ScheduleEntry { at, factor });
            }
            config.schedule = schedule;
        }

        Ok(config)
    }

    /// Replace the seed list with `1..=count` (the `--seed-count` override).
    pub fn set_seed_count(&mut self, count: usize) -> Result<()> {
        if count == 0 {
            return Err(OasisError::Config("--seed-count must be at least 1".into()));
        }
        let seeds: Vec<String> = (1..=count as u64).map(|s| s.to_string()).collect();
        self.set("seeds", &seeds.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_a_full_experiment() {
        let text = "
            # quadratic sanity run
            problem = quadratic
            diag = 2, 8
            b = 2, 8
            method = oasis
            eta0 = 1e-3
            alpha = 1e-4
            length = 25          # iterations
            seeds = 5, 6
            schedule = 10:0.5, 20:0.5
        ";
        let manifest = Manifest::parse(text).unwrap();
        let problem = manifest.build_problem().unwrap();
        assert_eq!(problem.dim(), 2);
        let config = manifest.build_experiment().unwrap();
        assert_eq!(config.length, 25);
        assert_eq!(config.seeds, vec![5, 6]);
        assert_eq!(config.hyper.alpha, 1e-4);
        assert_eq!(config.schedule.len(), 2);
        assert_eq!(
            config.schedule[1],
            ScheduleEntry {
                at: 20,
                factor: 0.5
            }
        );
        assert!(config.batch_size.is_none());
    }

    #[test]
    fn unknown_duplicate_and_malformed_keys_are_rejected_with_line_numbers() {
        let err = Manifest::parse("problem = quadratic\nmethood = oasis").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("methood"), "{err}");

        let err = Manifest::parse("method = oasis\nmethod = adgd").unwrap_err();
        assert!(err.to_string().contains("appears twice"), "{err}");

        let err = Manifest::parse("just words").unwrap_err();
        assert!(err.to_string().contains("key = value"), "{err}");
    }

    #[test]
    fn lambda_accepts_fraction_of_sample_count() {
        let text = "
            problem = synthetic-logistic
            n = 50
            d = 4
            lambda = 1/n
            method = oasis
        ";
        let manifest = Manifest::parse(text).unwrap();
        let problem = manifest.build_problem().unwrap();
        assert_eq!(problem.n_samples(), 50);
        // The regularizer enters the Hessian diagonal additively; probing it
        // through the curvature constants confirms the 1/50 value.
        match problem.curvature().unwrap() {
            crate::problems::Curvature::StronglyConvex { mu, .. } => {
                assert!((mu - 0.02).abs() < 1e-15);
            }
            _ => panic!("regularized logistic is strongly convex"),
        }
    }

    #[test]
    fn line_search_shape_keys_reach_the_mode() {
        let text = "
            problem = quadratic
            diag = 1
            b = 1
            method = oasis_linesearch
            eta_init = 2.0
            c1 = 0.3
            tau = 0.25
        ";
        let config = Manifest::parse(text).unwrap().build_experiment().unwrap();
        match config.method {
            MethodSpec::Oasis(OasisMode::LineSearch { eta_init, c1, tau }) => {
                assert_eq!(eta_init, 2.0);
                assert_eq!(c1, 0.3);
                assert_eq!(tau, 0.25);
            }
            other => panic!("expected a line-search method, got {other:?}"),
        }
    }

    #[test]
    fn seed_count_override_replaces_the_seed_list() {
        let mut manifest =
            Manifest::parse("problem = quadratic\ndiag = 1\nb = 1\nmethod = oasis\nseeds = 9")
                .unwrap();
        manifest.set_seed_count(4).unwrap();
        let config = manifest.build_experiment().unwrap();
        assert_eq!(config.seeds, vec![1, 2, 3, 4]);
        assert!(manifest.set_seed_count(0).is_err());
    }

    #[test]
    fn batch_size_zero_means_full_batch() {
        let base = "problem = quadratic\ndiag = 1\nb = 1\nmethod = oasis\n";
        let full = Manifest::parse(&format!("{base}batch_size = 0"))
            .unwrap()
            .build_experiment()
            .unwrap();
        assert!(full.batch_size.is_none());
        let mini = Manifest::parse(&format!("{base}batch_size = 7"))
            .unwrap()
            .build_experiment()
            .unwrap();
        assert_eq!(mini.batch_size, Some(7));
    }
}
