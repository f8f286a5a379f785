//! Exact distance transforms on pixel centres and the signed distance
//! function of a binary raster.
//!
//! Both transforms use the separable lower-envelope scheme of Meijster et al.
//! in pure integer arithmetic, so the results do not depend on evaluation
//! order and squared Euclidean distances are exact in pixel units.

use crate::error::{Error, Result};
use crate::raster::{check_grid, BinaryRaster, Window};

/// Real-valued function sampled on the pixel centres of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    window: Window,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(window: Window, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(&window, nx, ny, values.len())?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite field value {v}")));
        }
        Ok(Self {
            window,
            nx,
            ny,
            values,
        })
    }

    /// Field over a unit-spaced grid, handy for tests and synthetic inputs.
    pub fn from_grid(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        let window = Window::new(nx as f64, ny as f64)?;
        Self::new(window, nx, ny, values)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.window.width / self.nx as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            window: self.window,
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Indicator-style field: `on` on foreground pixels, `off` elsewhere.
    pub fn from_raster(raster: &BinaryRaster, on: f64, off: f64) -> Self {
        Self {
            window: raster.window(),
            nx: raster.nx(),
            ny: raster.ny(),
            values: raster
                .cells()
                .iter()
                .map(|&c| if c { on } else { off })
                .collect(),
        }
    }
}

/// Column pass shared by both metrics: vertical distance to the nearest
/// feature pixel in the same column, `inf` when the column has none.
fn column_distances(feature: &[bool], nx: usize, ny: usize, inf: i64) -> Vec<i64> {
    let mut g = vec![0i64; nx * ny];
    for i in 0..nx {
        g[i] = if feature[i] { 0 } else { inf };
        for j in 1..ny {
            let k = j * nx + i;
            g[k] = if feature[k] { 0 } else { (g[k - nx] + 1).min(inf) };
        }
        for j in (0..ny.saturating_sub(1)).rev() {
            let k = j * nx + i;
            if g[k + nx] < g[k] {
                g[k] = g[k + nx] + 1;
            }
        }
    }
    g
}

trait Metric {
    fn f(x: i64, i: i64, gi: i64) -> i64;
    fn sep(i: i64, u: i64, gi: i64, gu: i64) -> i64;
}

struct Euclidean;

impl Metric for Euclidean {
    fn f(x: i64, i: i64, gi: i64) -> i64 {
        (x - i) * (x - i) + gi * gi
    }

    fn sep(i: i64, u: i64, gi: i64, gu: i64) -> i64 {
        (u * u - i * i + gu * gu - gi * gi).div_euclid(2 * (u - i))
    }
}

struct Chessboard;

impl Metric for Chessboard {
    fn f(x: i64, i: i64, gi: i64) -> i64 {
        (x - i).abs().max(gi)
    }

    fn sep(i: i64, u: i64, gi: i64, gu: i64) -> i64 {
        if gi <= gu {
            (i + gu).max((i + u).div_euclid(2))
        } else {
            (u - gi).min((i + u).div_euclid(2))
        }
    }
}

/// Row pass: lower envelope of the per-column profiles.
fn row_pass<M: Metric>(g: &[i64], nx: usize, ny: usize) -> Vec<i64> {
    let m = nx as i64;
    let mut out = vec![0i64; nx * ny];
    let mut s = vec![0i64; nx];
    let mut t = vec![0i64; nx];
    for j in 0..ny {
        let row = &g[j * nx..(j + 1) * nx];
        let gv = |i: i64| row[i as usize];
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 {
                let sq = s[q as usize];
                let tq = t[q as usize];
                if M::f(tq, sq, gv(sq)) > M::f(tq, u, gv(u)) {
                    q -= 1;
                } else {
                    break;
                }
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let sq = s[q as usize];
                let w = 1 + M::sep(sq, u, gv(sq), gv(u));
                if w < m {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = w;
                }
            }
        }
        let dst = &mut out[j * nx..(j + 1) * nx];
        for u in (0..m).rev() {
            let sq = s[q as usize];
            dst[u as usize] = M::f(u, sq, gv(sq));
            if u == t[q as usize] {
                q -= 1;
            }
        }
    }
    out
}

/// Squared Euclidean distance, in pixel units, from every pixel centre to the
/// nearest `feature` pixel centre. Requires at least one feature pixel.
pub fn squared_edt(feature: &[bool], nx: usize, ny: usize) -> Vec<i64> {
    debug_assert_eq!(feature.len(), nx * ny);
    let inf = (nx + ny) as i64;
    let g = column_distances(feature, nx, ny, inf);
    row_pass::<Euclidean>(&g, nx, ny)
}

/// Chessboard distance, in pixel units, to the nearest feature pixel centre.
pub fn chessboard_dt(feature: &[bool], nx: usize, ny: usize) -> Vec<i64> {
    debug_assert_eq!(feature.len(), nx * ny);
    let inf = (nx + ny) as i64;
    let g = column_distances(feature, nx, ny, inf);
    row_pass::<Chessboard>(&g, nx, ny)
}

/// Signed distance function: positive distance to the foreground on
/// background pixels, negative distance to the background on foreground
/// pixels, in window length units.
pub fn signed_distance(raster: &BinaryRaster) -> Result<ScalarField> {
    let (nx, ny) = (raster.nx(), raster.ny());
    let fg = raster.count_foreground();
    if fg == 0 || fg == nx * ny {
        return Err(Error::DegenerateSet(
            "signed distance needs both foreground and background pixels".into(),
        ));
    }
    let cells = raster.cells();
    let background: Vec<bool> = cells.iter().map(|c| !c).collect();
    let to_fg = squared_edt(cells, nx, ny);
    let to_bg = squared_edt(&background, nx, ny);
    let s = raster.spacing();
    let values = cells
        .iter()
        .zip(to_fg.iter().zip(&to_bg))
        .map(|(&inside, (&df, &db))| {
            if inside {
                -(db as f64).sqrt() * s
            } else {
                (df as f64).sqrt() * s
            }
        })
        .collect();
    ScalarField::new(raster.window(), nx, ny, values)
}

/// Chessboard (L-infinity) distance to the foreground, zero on foreground.
pub fn chebyshev_distance_to_set(raster: &BinaryRaster) -> Result<ScalarField> {
    if raster.count_foreground() == 0 {
        return Err(Error::DegenerateSet("empty foreground".into()));
    }
    let d = chessboard_dt(raster.cells(), raster.nx(), raster.ny());
    let s = raster.spacing();
    ScalarField::new(
        raster.window(),
        raster.nx(),
        raster.ny(),
        d.into_iter().map(|v| v as f64 * s).collect(),
    )
}
