//! From a realisation to summary curves: rasterise, signed distance,
//! sublevel persistence, then evaluate summaries on grids shared by a whole
//! sample.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::depth::FunctionalSample;
use crate::distance::{signed_distance, ScalarField};
use crate::error::{Error, Result};
use crate::persistence::{sublevel_persistence, PersistenceDiagram};
use crate::raster::{rasterize, BinaryRaster, GrainConfiguration};
use crate::setstats::{capacity_on_squares, extended_empty_space};
use crate::summaries::{apf, hz_slice, uniform_grid, CurveKind, SummaryCurve};

/// Grid sizes for the summary curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    /// Meanage grid of the APFs, spanning the pooled meanage range.
    pub apf_points: usize,
    /// Slice grid of the support functions over `[0, 2pi]`.
    pub rho_points: usize,
    /// Square sizes of the capacity functional over `[0, side / 4]`.
    pub cf_points: usize,
    /// Distance grid of the extended empty-space function, spanning the
    /// pooled signed-distance range.
    pub esf_points: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            apf_points: 200,
            rho_points: 128,
            cf_points: 100,
            esf_points: 200,
        }
    }
}

/// Everything computed once per raster.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub raster: BinaryRaster,
    pub field: ScalarField,
    pub diagram: PersistenceDiagram,
}

impl Analysis {
    /// Fails with `DegenerateSet` on empty or full rasters.
    pub fn of_raster(raster: BinaryRaster) -> Result<Self> {
        let field = signed_distance(&raster)?;
        let diagram = sublevel_persistence(&field);
        Ok(Self {
            raster,
            field,
            diagram,
        })
    }

    pub fn of_config(config: &GrainConfiguration, nx: usize) -> Result<Self> {
        Self::of_raster(rasterize(config, nx)?)
    }

    pub fn curve(&self, kind: CurveKind, grid: &[f64]) -> Result<SummaryCurve> {
        match kind {
            CurveKind::Apf0 => apf(&self.diagram, 0, grid),
            CurveKind::Apf1 => apf(&self.diagram, 1, grid),
            CurveKind::Hz0 => hz_slice(&self.diagram, 0, grid),
            CurveKind::Hz1 => hz_slice(&self.diagram, 1, grid),
            CurveKind::Cf => capacity_on_squares(&self.raster, grid),
            CurveKind::Esf => extended_empty_space(&self.field, grid),
            CurveKind::Custom => Err(Error::InvalidInput(
                "custom curves are not produced by the pipeline".into(),
            )),
        }
    }

    fn meanage_range(&self, q: u8) -> Option<(f64, f64)> {
        self.diagram
            .dim(q)
            .map(|p| p.meanage())
            .fold(None, |acc, m| match acc {
                None => Some((m, m)),
                Some((lo, hi)) => Some((lo.min(m), hi.max(m))),
            })
    }
}

fn pooled(ranges: impl Iterator<Item = Option<(f64, f64)>>) -> Option<(f64, f64)> {
    ranges.flatten().reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// Argument grid for `kind` shared by all `analyses`.
pub fn pooled_grid(kind: CurveKind, analyses: &[Analysis], grids: &GridSettings) -> Result<Vec<f64>> {
    if analyses.is_empty() {
        return Err(Error::InvalidInput("no analyses to pool".into()));
    }
    let field_range = || {
        pooled(
            analyses
                .iter()
                .map(|a| Some((a.field.min(), a.field.max()))),
        )
        .expect("non-empty")
    };
    Ok(match kind {
        CurveKind::Apf0 | CurveKind::Apf1 => {
            let q = kind.dimension().expect("diagram summary");
            let (lo, hi) =
                pooled(analyses.iter().map(|a| a.meanage_range(q))).unwrap_or_else(field_range);
            uniform_grid(lo, hi, grids.apf_points)
        }
        CurveKind::Hz0 | CurveKind::Hz1 => uniform_grid(0.0, 2.0 * PI, grids.rho_points),
        CurveKind::Cf => {
            let side = analyses
                .iter()
                .map(|a| {
                    let w = a.raster.window();
                    w.width.min(w.height)
                })
                .fold(f64::INFINITY, f64::min);
            uniform_grid(0.0, 0.25 * side, grids.cf_points)
        }
        CurveKind::Esf => {
            let (lo, hi) = field_range();
            uniform_grid(lo, hi, grids.esf_points)
        }
        CurveKind::Custom => {
            return Err(Error::InvalidInput(
                "custom curves are not produced by the pipeline".into(),
            ))
        }
    })
}

/// Curves of `kind` for every analysis on the pooled grid.
pub fn summary_curves(
    kind: CurveKind,
    analyses: &[Analysis],
    grids: &GridSettings,
) -> Result<Vec<SummaryCurve>> {
    let grid = pooled_grid(kind, analyses, grids)?;
    analyses.iter().map(|a| a.curve(kind, &grid)).collect()
}

/// Functional sample of `kind` over `analyses`, labelled by position.
pub fn summary_sample(
    kind: CurveKind,
    analyses: &[Analysis],
    grids: &GridSettings,
) -> Result<FunctionalSample> {
    FunctionalSample::new(summary_curves(kind, analyses, grids)?)
}
