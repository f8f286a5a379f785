//! JSON configuration files merged with command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use setpersist::depth::DepthOptions;
use setpersist::envelope::RankOrdering;
use setpersist::pipeline::GridSettings;
use setpersist::raster::Window;
use setpersist::simulate::{Model, ModelSpec};
use setpersist::summaries::CurveKind;

use crate::CliError;

/// A model given by name or spelled out in full.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Named(String),
    Spec(ModelSpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` file; every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<OneOrMany<ModelRef>>,
    pub alternative: Option<OneOrMany<ModelRef>>,
    pub window: Option<Window>,
    pub resolution: Option<usize>,
    pub summaries: Option<Vec<CurveKind>>,
    pub grids: Option<GridSettings>,
    pub depth: Option<DepthOptions>,
    pub ordering: Option<RankOrdering>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub alpha: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Values given on the command line, overriding the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub alternative: Option<String>,
    pub resolution: Option<usize>,
    pub summary: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub alpha: Option<f64>,
    pub ordering: Option<String>,
}

/// A resolved, validated pipeline configuration.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub models: Vec<(String, ModelSpec)>,
    pub alternatives: Vec<(String, ModelSpec)>,
    pub window: Window,
    pub resolution: usize,
    pub summaries: Vec<CurveKind>,
    pub grids: GridSettings,
    pub depth: DepthOptions,
    pub ordering: RankOrdering,
    pub seed: u64,
    pub out: PathBuf,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub alpha: f64,
}

pub const MIN_RESOLUTION: usize = 64;

fn resolve_models(refs: Vec<ModelRef>) -> Result<Vec<(String, ModelSpec)>, CliError> {
    let custom = refs.len() > 1;
    refs.into_iter()
        .enumerate()
        .map(|(k, r)| {
            let (name, spec) = match r {
                ModelRef::Named(name) => {
                    let m = Model::from_str(&name).map_err(|e| CliError::Usage(e.to_string()))?;
                    (m.as_str().to_string(), m.spec())
                }
                ModelRef::Spec(spec) => {
                    (if custom { format!("custom{k}") } else { "custom".into() }, spec)
                }
            };
            spec.validate()
                .map_err(|e| CliError::Usage(format!("model {name}: {e}")))?;
            Ok((name, spec))
        })
        .collect()
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

impl PipelineConfig {
    pub fn resolve(file: ConfigFile, flags: Overrides) -> Result<Self, CliError> {
        let named = |s: Option<String>| s.map(|s| split_list(&s).into_iter().map(ModelRef::Named).collect());
        let models: Vec<ModelRef> = named(flags.model)
            .or(file.model.map(OneOrMany::into_vec))
            .unwrap_or_else(|| vec![ModelRef::Named("boolean".into())]);
        let alternatives: Vec<ModelRef> = named(flags.alternative)
            .or(file.alternative.map(OneOrMany::into_vec))
            .unwrap_or_default();
        let summaries = match flags.summary {
            Some(s) => split_list(&s)
                .iter()
                .map(|k| CurveKind::from_str(k).map_err(|e| CliError::Usage(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
            None => file.summaries.unwrap_or_else(|| vec![CurveKind::Apf0]),
        };
        if summaries.is_empty() || summaries.contains(&CurveKind::Custom) {
            return Err(CliError::Usage(
                "select at least one of APF0, APF1, HZ0, HZ1, CF, ESF".into(),
            ));
        }
        let resolution = flags.resolution.or(file.resolution).unwrap_or(400);
        if resolution < MIN_RESOLUTION {
            return Err(CliError::Usage(format!(
                "resolution {resolution} is below the minimum of {MIN_RESOLUTION}"
            )));
        }
        let alpha = flags.alpha.or(file.alpha).unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha {alpha} not in (0, 1)")));
        }
        let ordering = match flags.ordering {
            Some(s) => RankOrdering::from_str(&s).map_err(|e| CliError::Usage(e.to_string()))?,
            None => file.ordering.unwrap_or_default(),
        };
        let window = file.window.unwrap_or_else(Model::window);
        Window::new(window.width, window.height).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            models: resolve_models(models)?,
            alternatives: resolve_models(alternatives)?,
            window,
            resolution,
            summaries,
            grids: file.grids.unwrap_or_default(),
            depth: file.depth.unwrap_or_default(),
            ordering,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            n: flags.n.or(file.n),
            reps: flags.reps.or(file.reps),
            alpha,
        })
    }
}
