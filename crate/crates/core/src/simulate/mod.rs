//! Germ-grain samplers: Poisson, Matérn cluster, cell and hard-core germs
//! with disc or ellipse grains, and the Quermass-interaction process.

mod functionals;
mod quermass;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Grain, GrainConfiguration, Window};

pub use functionals::{exposed_perimeter, geometric_functionals, GeometricFunctionals};
pub use quermass::{quermass_mh, QuermassParams, QuermassSampler};

/// Point process of grain centres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GermSpec {
    Poisson {
        intensity: f64,
    },
    /// Poisson parents, each with a Poisson number of children uniform in a
    /// disc around it.
    MaternCluster {
        parent_intensity: f64,
        mean_per_cluster: f64,
        cluster_radius: f64,
    },
    /// Square cells of side `1/sqrt(intensity)` holding 0, 1 or 10 points
    /// with probabilities 1/10, 8/9 and 1/90.
    Cell {
        intensity: f64,
    },
    /// Matérn type-II thinning tuned to the requested retained intensity.
    Hardcore {
        intensity: f64,
        inhibition_radius: f64,
    },
}

impl GermSpec {
    pub fn intensity(&self) -> f64 {
        match *self {
            GermSpec::Poisson { intensity }
            | GermSpec::Cell { intensity }
            | GermSpec::Hardcore { intensity, .. } => intensity,
            GermSpec::MaternCluster {
                parent_intensity,
                mean_per_cluster,
                ..
            } => parent_intensity * mean_per_cluster,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let valid = match *self {
            GermSpec::Poisson { intensity } | GermSpec::Cell { intensity } => ok(intensity),
            GermSpec::MaternCluster {
                parent_intensity,
                mean_per_cluster,
                cluster_radius,
            } => ok(parent_intensity) && ok(mean_per_cluster) && cluster_radius > 0.0,
            GermSpec::Hardcore {
                intensity,
                inhibition_radius,
            } => ok(intensity) && inhibition_radius > 0.0 && inhibition_radius.is_finite(),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid germ specification {self:?}")))
        }
    }
}

/// Grain shape distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrainSpec {
    Disc {
        r_min: f64,
        r_max: f64,
    },
    /// Semi-axes drawn independently; orientation uniform on `[0, pi)`.
    Ellipse {
        a_min: f64,
        a_max: f64,
        b_min: f64,
        b_max: f64,
    },
}

impl GrainSpec {
    pub fn validate(&self) -> Result<()> {
        let range = |lo: f64, hi: f64| lo > 0.0 && lo <= hi && hi.is_finite();
        let valid = match *self {
            GrainSpec::Disc { r_min, r_max } => range(r_min, r_max),
            GrainSpec::Ellipse {
                a_min,
                a_max,
                b_min,
                b_max,
            } => range(a_min, a_max) && range(b_min, b_max),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid grain specification {self:?}")))
        }
    }

    /// Largest possible distance from a germ to a point of its grain.
    pub fn max_extent(&self) -> f64 {
        match *self {
            GrainSpec::Disc { r_max, .. } => r_max,
            GrainSpec::Ellipse { a_max, b_max, .. } => a_max.max(b_max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, center: [f64; 2], rng: &mut R) -> Grain {
        let [x, y] = center;
        match *self {
            GrainSpec::Disc { r_min, r_max } => Grain::disc(x, y, uniform(rng, r_min, r_max)),
            GrainSpec::Ellipse {
                a_min,
                a_max,
                b_min,
                b_max,
            } => {
                let a = uniform(rng, a_min, a_max);
                let b = uniform(rng, b_min, b_max);
                let theta = rng.random_range(0.0..PI);
                if a >= b {
                    Grain::ellipse(x, y, a, b, theta)
                } else {
                    // Same ellipse with the long axis listed first.
                    Grain::ellipse(x, y, b, a, (theta + PI / 2.0) % PI)
                }
            }
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as usize)
}

fn uniform_points<R: Rng + ?Sized>(
    rng: &mut R,
    (x0, y0, x1, y1): (f64, f64, f64, f64),
    count: usize,
) -> Vec<[f64; 2]> {
    (0..count)
        .map(|_| [uniform(rng, x0, x1), uniform(rng, y0, y1)])
        .collect()
}

fn inside((x0, y0, x1, y1): (f64, f64, f64, f64), p: &[f64; 2]) -> bool {
    p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
}

fn dilate((x0, y0, x1, y1): (f64, f64, f64, f64), r: f64) -> (f64, f64, f64, f64) {
    (x0 - r, y0 - r, x1 + r, y1 + r)
}

fn rect_area((x0, y0, x1, y1): (f64, f64, f64, f64)) -> f64 {
    (x1 - x0) * (y1 - y0)
}

/// Proposal intensity of the Poisson process whose Matérn II thinning with
/// radius `r` retains `intensity` points per unit area.
pub fn hardcore_proposal_intensity(intensity: f64, r: f64) -> Result<f64> {
    let packing = intensity * PI * r * r;
    if packing >= 1.0 {
        return Err(Error::InfeasibleIntensity(format!(
            "Matérn II retains at most 1/(pi r^2) = {:.4} points per unit area, {} requested",
            1.0 / (PI * r * r),
            intensity
        )));
    }
    Ok(-(1.0 - packing).ln() / (PI * r * r))
}

/// Germs in the window extended by `margin` on every side.
pub fn sample_germs<R: Rng + ?Sized>(
    spec: &GermSpec,
    window: &Window,
    margin: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    spec.validate()?;
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidInput(format!("margin {margin}")));
    }
    let ext = window.extended(margin);
    let pts = match *spec {
        GermSpec::Poisson { intensity } => {
            let n = poisson(rng, intensity * rect_area(ext));
            uniform_points(rng, ext, n)
        }
        GermSpec::MaternCluster {
            parent_intensity,
            mean_per_cluster,
            cluster_radius: r,
        } => {
            let parent_box = dilate(ext, r);
            let n = poisson(rng, parent_intensity * rect_area(parent_box));
            let parents = uniform_points(rng, parent_box, n);
            let mut pts = Vec::new();
            for p in parents {
                for _ in 0..poisson(rng, mean_per_cluster) {
                    let rho = r * rng.random::<f64>().sqrt();
                    let phi = rng.random_range(0.0..2.0 * PI);
                    let c = [p[0] + rho * phi.cos(), p[1] + rho * phi.sin()];
                    if inside(ext, &c) {
                        pts.push(c);
                    }
                }
            }
            pts
        }
        GermSpec::Cell { intensity } => {
            if intensity == 0.0 {
                return Ok(Vec::new());
            }
            let side = 1.0 / intensity.sqrt();
            let (x0, y0, x1, y1) = ext;
            let cols = ((x1 - x0) / side).ceil() as usize;
            let rows = ((y1 - y0) / side).ceil() as usize;
            let mut pts = Vec::new();
            for j in 0..rows {
                for i in 0..cols {
                    let u: f64 = rng.random();
                    let count = if u < 0.1 {
                        0
                    } else if u < 0.1 + 8.0 / 9.0 {
                        1
                    } else {
                        10
                    };
                    let cell = (
                        x0 + i as f64 * side,
                        y0 + j as f64 * side,
                        x0 + (i + 1) as f64 * side,
                        y0 + (j + 1) as f64 * side,
                    );
                    pts.extend(
                        uniform_points(rng, cell, count)
                            .into_iter()
                            .filter(|p| inside(ext, p)),
                    );
                }
            }
            pts
        }
        GermSpec::Hardcore {
            intensity,
            inhibition_radius: r,
        } => {
            let proposal = hardcore_proposal_intensity(intensity, r)?;
            // Proposals outside the extended window still inhibit.
            let outer = dilate(ext, r);
            let n = poisson(rng, proposal * rect_area(outer));
            let cand = uniform_points(rng, outer, n);
            let marks: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let grid = PointGrid::new(&cand, outer, r);
            (0..n)
                .filter(|&i| inside(ext, &cand[i]))
                .filter(|&i| {
                    grid.near(&cand[i]).all(|k| {
                        k == i || dist2(&cand[i], &cand[k]) >= r * r || marks[k] > marks[i]
                    })
                })
                .map(|i| cand[i])
                .collect()
        }
    };
    Ok(pts)
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Bucket grid for fixed-radius neighbour queries.
struct PointGrid {
    origin: [f64; 2],
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointGrid {
    fn new(pts: &[[f64; 2]], (x0, y0, x1, y1): (f64, f64, f64, f64), cell: f64) -> Self {
        let cols = ((x1 - x0) / cell).ceil().max(1.0) as usize;
        let rows = ((y1 - y0) / cell).ceil().max(1.0) as usize;
        let mut g = Self {
            origin: [x0, y0],
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        };
        for (k, p) in pts.iter().enumerate() {
            let (i, j) = g.index(p);
            g.buckets[j * cols + i].push(k);
        }
        g
    }

    fn index(&self, p: &[f64; 2]) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(p[0], self.origin[0], self.cols), f(p[1], self.origin[1], self.rows))
    }

    fn near(&self, p: &[f64; 2]) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.index(p);
        let (i0, i1) = (i.saturating_sub(1), (i + 1).min(self.cols - 1));
        let (j0, j1) = (j.saturating_sub(1), (j + 1).min(self.rows - 1));
        (j0..=j1).flat_map(move |b| {
            (i0..=i1).flat_map(move |a| self.buckets[b * self.cols + a].iter().copied())
        })
    }
}

/// Germ-grain model with independent grains. Germs are sampled in the window
/// extended by the largest grain extent and grains meeting the window kept.
pub fn sample_boolean<R: Rng + ?Sized>(
    germ: &GermSpec,
    grain: &GrainSpec,
    window: &Window,
    rng: &mut R,
) -> Result<GrainConfiguration> {
    grain.validate()?;
    let germs = sample_germs(germ, window, grain.max_extent(), rng)?;
    let grains = germs
        .into_iter()
        .map(|c| grain.sample(c, rng))
        .filter(|g| g.touches(window))
        .collect();
    Ok(GrainConfiguration::new(*window, grains))
}

/// A fully specified random-set model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    GermGrain { germ: GermSpec, grain: GrainSpec },
    Quermass(QuermassParams),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::GermGrain { germ, grain } => {
                germ.validate()?;
                grain.validate()
            }
            ModelSpec::Quermass(p) => p.validate(),
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, window: &Window, rng: &mut R) -> Result<GrainConfiguration> {
        match self {
            ModelSpec::GermGrain { germ, grain } => sample_boolean(germ, grain, window, rng),
            ModelSpec::Quermass(p) => quermass_mh(p, window, rng),
        }
    }
}

/// The named models of the simulation study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Boolean,
    BooleanEllipse,
    Cluster,
    Repulsive,
    MaternCluster,
    Cell,
    /// Matérn II hard-core germs, standing in for the Bessel-type DPP.
    Hardcore,
}

impl Model {
    pub const ALL: [Model; 7] = [
        Model::Boolean,
        Model::BooleanEllipse,
        Model::Cluster,
        Model::Repulsive,
        Model::MaternCluster,
        Model::Cell,
        Model::Hardcore,
    ];

    pub const INTENSITY: f64 = 0.4;
    pub const WINDOW_SIDE: f64 = 25.0;
    pub const HARDCORE_RADIUS: f64 = 0.8;

    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Boolean => "boolean",
            Model::BooleanEllipse => "boolean-ellipse",
            Model::Cluster => "cluster",
            Model::Repulsive => "repulsive",
            Model::MaternCluster => "matern-cluster",
            Model::Cell => "cell",
            Model::Hardcore => "hardcore",
        }
    }

    pub fn window() -> Window {
        Window {
            width: Self::WINDOW_SIDE,
            height: Self::WINDOW_SIDE,
        }
    }

    pub fn spec(&self) -> ModelSpec {
        let disc = GrainSpec::Disc {
            r_min: 0.5,
            r_max: 1.0,
        };
        let poisson = GermSpec::Poisson {
            intensity: Self::INTENSITY,
        };
        let germ_grain = |germ| ModelSpec::GermGrain { germ, grain: disc };
        match self {
            Model::Boolean => germ_grain(poisson),
            Model::BooleanEllipse => ModelSpec::GermGrain {
                germ: poisson,
                grain: GrainSpec::Ellipse {
                    a_min: 0.5,
                    a_max: 1.0,
                    b_min: 0.2,
                    b_max: 0.7,
                },
            },
            Model::Cluster => ModelSpec::Quermass(QuermassParams {
                steps: 80_000,
                ..QuermassParams::new([0.62, -0.86, 0.7])
            }),
            Model::Repulsive => ModelSpec::Quermass(QuermassParams {
                steps: 20_000,
                ..QuermassParams::new([-1.0, 1.0, 0.0])
            }),
            Model::MaternCluster => germ_grain(GermSpec::MaternCluster {
                parent_intensity: 0.08,
                mean_per_cluster: 5.0,
                cluster_radius: 2.0,
            }),
            Model::Cell => germ_grain(GermSpec::Cell {
                intensity: Self::INTENSITY,
            }),
            Model::Hardcore => germ_grain(GermSpec::Hardcore {
                intensity: Self::INTENSITY,
                inhibition_radius: Self::HARDCORE_RADIUS,
            }),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .or(match key.as_str() {
                "b" => Some(Model::Boolean),
                "be" | "ellipse" => Some(Model::BooleanEllipse),
                "c" => Some(Model::Cluster),
                "r" => Some(Model::Repulsive),
                "m" | "matern" => Some(Model::MaternCluster),
                "hard-core" | "dpp" => Some(Model::Hardcore),
                _ => None,
            })
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown model '{s}' (expected one of {})",
                    Model::ALL.map(|m| m.as_str()).join(", ")
                ))
            })
    }
}

/// Independent generator for realisation `index` under `master_seed`.
pub fn realisation_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests;
