//! The `qf-run-1` run configuration.
//!
//! ```toml
//! format = "qf-run-1"
//! seed = 42
//! corpus = "corpus.jsonl"
//! caps = "../caps/scholar.toml"
//! genspecs = ["../genspecs"]        # files, or directories of *.toml
//! out = "warehouse"
//! policy = "all-pages"
//!
//! [grid]
//! sizes = [5, 30, 100]
//! categories = ["Author", "Title", "Venue", "Random"]
//! reps = 5
//!
//! [noise]                           # any NoiseProfile field
//! distractor_count = 2000
//!
//! [match]
//! title_threshold = 0.8
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! Without `noise.seed` the index seed is derived from the master seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::corpus::{Category, NoiseProfile};
use crate::evaluator::FollowPolicy;
use crate::matcher::MatchConfig;
use crate::seed::{self, stage};

pub const RUN_FORMAT: &str = "qf-run-1";

/// A 64-bit seed; TOML integers stop at `i64::MAX`, so larger seeds may be
/// written as decimal strings.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(i64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format: Option<String>,
    seed: Option<SeedValue>,
    corpus: Option<PathBuf>,
    caps: Option<PathBuf>,
    genspecs: Option<Vec<PathBuf>>,
    datasets: Option<PathBuf>,
    out: Option<PathBuf>,
    policy: Option<String>,
    jobs: Option<usize>,
    grid: Option<RawGrid>,
    noise: Option<toml::Table>,
    #[serde(rename = "match")]
    matching: Option<MatchConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    sizes: Vec<usize>,
    categories: Option<Vec<String>>,
    reps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub categories: Vec<Category>,
    pub reps: usize,
}

impl Default for Grid {
    /// 3 sizes x 4 categories x 5 repetitions.
    fn default() -> Self {
        Grid {
            sizes: vec![5, 30, 100],
            categories: Category::ALL.to_vec(),
            reps: 5,
        }
    }
}

/// A validated run configuration with resolved paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// The config file itself; `None` for configs built in code.
    pub source: Option<PathBuf>,
    pub seed: u64,
    pub corpus: PathBuf,
    pub caps: PathBuf,
    pub genspecs: Vec<PathBuf>,
    /// Precomputed datasets; generated from `grid` when absent.
    pub datasets: Option<PathBuf>,
    pub out: PathBuf,
    pub policy: FollowPolicy,
    pub jobs: Option<usize>,
    pub grid: Grid,
    pub noise: NoiseProfile,
    /// Whether `noise.seed` was given explicitly.
    pub noise_seed_fixed: bool,
    pub matching: MatchConfig,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn existing(field: &str, base: &Path, path: Option<PathBuf>) -> Result<PathBuf, CliError> {
    let path = path.ok_or_else(|| invalid(field, "missing"))?;
    let resolved = base.join(path);
    if !resolved.exists() {
        return Err(invalid(field, format!("{} does not exist", resolved.display())));
    }
    Ok(resolved)
}

fn parse_seed(value: SeedValue) -> Result<u64, CliError> {
    match value {
        SeedValue::Int(n) => u64::try_from(n).map_err(|_| invalid("seed", format!("{n} is negative"))),
        SeedValue::Text(s) => s
            .trim()
            .parse()
            .map_err(|_| invalid("seed", format!("{s:?} is not a 64-bit unsigned integer"))),
    }
}

fn genspec_files(base: &Path, entries: Vec<PathBuf>) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for (i, entry) in entries.into_iter().enumerate() {
        let field = format!("genspecs[{i}]");
        let path = existing(&field, base, Some(entry))?;
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(&path)
                .map_err(|e| invalid(&field, e.to_string()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "toml"))
                .collect();
            if found.is_empty() {
                return Err(invalid(field, format!("{} holds no *.toml files", path.display())));
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(path);
        }
    }
    if out.is_empty() {
        return Err(invalid("genspecs", "no generator specs listed"));
    }
    Ok(out)
}

fn grid(raw: Option<RawGrid>) -> Result<Grid, CliError> {
    let Some(raw) = raw else {
        return Ok(Grid::default());
    };
    if raw.sizes.is_empty() {
        return Err(invalid("grid.sizes", "empty"));
    }
    if let Some(i) = raw.sizes.iter().position(|&s| s == 0) {
        return Err(invalid(format!("grid.sizes[{i}]"), "sizes must be at least 1"));
    }
    let categories = match raw.categories {
        None => Category::ALL.to_vec(),
        Some(names) if names.is_empty() => return Err(invalid("grid.categories", "empty")),
        Some(names) => names
            .iter()
            .enumerate()
            .map(|(i, n)| n.parse().map_err(|e: String| invalid(format!("grid.categories[{i}]"), e)))
            .collect::<Result<_, _>>()?,
    };
    let reps = raw.reps.unwrap_or(5);
    if reps == 0 {
        return Err(invalid("grid.reps", "must be at least 1"));
    }
    Ok(Grid {
        sizes: raw.sizes,
        categories,
        reps,
    })
}

fn noise(table: Option<toml::Table>) -> Result<(NoiseProfile, bool), CliError> {
    let Some(table) = table else {
        return Ok((NoiseProfile::default(), false));
    };
    let fixed = table.contains_key("seed");
    let profile: NoiseProfile = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| invalid("noise", e.message().to_string()))?;
    profile.validate().map_err(|e| invalid("noise", e.to_string()))?;
    Ok((profile, fixed))
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::from_toml_str(&text, base)?;
        config.source = Some(path.to_path_buf());
        Ok(config)
    }

    /// Parses and validates `text`, resolving paths against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| format!("byte {}", s.start))
                .unwrap_or_else(|| "config".into());
            invalid(at, e.message().to_string())
        })?;
        match raw.format.as_deref() {
            Some(RUN_FORMAT) => {}
            Some(other) => return Err(invalid("format", format!("expected {RUN_FORMAT}, found {other}"))),
            None => return Err(invalid("format", format!("missing; expected {RUN_FORMAT}"))),
        }
        let seed = parse_seed(raw.seed.ok_or_else(|| invalid("seed", "missing"))?)?;
        let corpus = existing("corpus", base, raw.corpus)?;
        let caps = existing("caps", base, raw.caps)?;
        let genspecs = genspec_files(base, raw.genspecs.ok_or_else(|| invalid("genspecs", "missing"))?)?;
        let datasets = raw.datasets.map(|d| existing("datasets", base, Some(d))).transpose()?;
        let policy = match raw.policy {
            None => FollowPolicy::AllPages,
            Some(p) => p.parse().map_err(|e: String| invalid("policy", e))?,
        };
        if raw.jobs == Some(0) {
            return Err(invalid("jobs", "must be at least 1"));
        }
        let (noise, noise_seed_fixed) = noise(raw.noise)?;
        let matching = raw.matching.unwrap_or_default();
        if let Some(field) = matching.invalid_field() {
            return Err(invalid(format!("match.{field}"), "must lie in [0,1]"));
        }
        Ok(RunConfig {
            source: None,
            seed,
            corpus,
            caps,
            genspecs,
            datasets,
            out: base.join(raw.out.unwrap_or_else(|| PathBuf::from("warehouse"))),
            policy,
            jobs: raw.jobs,
            grid: grid(raw.grid)?,
            noise,
            noise_seed_fixed,
            matching,
        })
    }

    pub fn dataset_seed(&self) -> u64 {
        seed::derive(self.seed, stage::DATASETS)
    }

    /// The noise profile with its effective seed.
    pub fn noise_profile(&self) -> NoiseProfile {
        if self.noise_seed_fixed {
            self.noise.clone()
        } else {
            self.noise.clone().with_seed(seed::derive(self.seed, stage::INDEX))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with_inputs() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for f in ["corpus.jsonl", "caps.toml"] {
            fs::write(dir.path().join(f), "").unwrap();
        }
        fs::create_dir(dir.path().join("specs")).unwrap();
        fs::write(dir.path().join("specs/02.toml"), "").unwrap();
        fs::write(dir.path().join("specs/01.toml"), "").unwrap();
        dir
    }

    const MINIMAL: &str = r#"
        format = "qf-run-1"
        seed = 7
        corpus = "corpus.jsonl"
        caps = "caps.toml"
        genspecs = ["specs"]
    "#;

    fn field_of(e: CliError) -> String {
        match e {
            CliError::Config { field, .. } => field,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = dir_with_inputs();
        let c = RunConfig::from_toml_str(MINIMAL, dir.path()).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid, Grid::default());
        assert_eq!(c.policy, FollowPolicy::AllPages);
        assert_eq!(c.out, dir.path().join("warehouse"));
        let names: Vec<_> = c.genspecs.iter().map(|p| p.file_name().unwrap().to_owned()).collect();
        assert_eq!(names, ["01.toml", "02.toml"]);
        assert_eq!(c.noise_profile().seed, seed::derive(7, stage::INDEX));
    }

    #[test]
    fn missing_corpus_names_the_field() {
        let dir = dir_with_inputs();
        let text = MINIMAL.replace("corpus.jsonl", "nope.jsonl");
        assert_eq!(field_of(RunConfig::from_toml_str(&text, dir.path()).unwrap_err()), "corpus");
        let text = MINIMAL.replace("corpus = \"corpus.jsonl\"", "");
        assert_eq!(field_of(RunConfig::from_toml_str(&text, dir.path()).unwrap_err()), "corpus");
    }

    #[test]
    fn nested_fields_are_named() {
        let dir = dir_with_inputs();
        let cases = [
            ("[grid]\nsizes = [5, 0]", "grid.sizes[1]"),
            ("[grid]\nsizes = [5]\ncategories = [\"Author\", \"Poetry\"]", "grid.categories[1]"),
            ("[noise]\nduplicate_probability = 1.5", "noise"),
            ("[match]\ntitle_threshold = 2.0", "match.title_threshold"),
        ];
        for (extra, field) in cases {
            let text = format!("{MINIMAL}\n{extra}");
            assert_eq!(field_of(RunConfig::from_toml_str(&text, dir.path()).unwrap_err()), field);
        }
        let text = MINIMAL.replace("seed = 7", "seed = -1");
        assert_eq!(field_of(RunConfig::from_toml_str(&text, dir.path()).unwrap_err()), "seed");
        let text = MINIMAL.replace("qf-run-1", "qf-run-0");
        assert_eq!(field_of(RunConfig::from_toml_str(&text, dir.path()).unwrap_err()), "format");
    }

    #[test]
    fn large_seeds_as_strings() {
        let dir = dir_with_inputs();
        let text = MINIMAL.replace("seed = 7", "seed = \"18446744073709551615\"");
        assert_eq!(RunConfig::from_toml_str(&text, dir.path()).unwrap().seed, u64::MAX);
    }

    #[test]
    fn explicit_noise_seed_is_kept() {
        let dir = dir_with_inputs();
        let text = format!("{MINIMAL}\n[noise]\nseed = 99\ndistractor_count = 3");
        let c = RunConfig::from_toml_str(&text, dir.path()).unwrap();
        assert_eq!(c.noise_profile().seed, 99);
        assert_eq!(c.noise_profile().distractor_count, 3);
        assert_eq!(c.noise_profile().duplicate_probability, NoiseProfile::default().duplicate_probability);
    }
}
