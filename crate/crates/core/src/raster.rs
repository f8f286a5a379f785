//! Observation windows, parametric grain configurations and their binary
//! rasterisation.
//!
//! Pixels are addressed as `(i, j)` with `i` along the x axis and `j` along
//! the y axis; cell storage is row-major (`j * nx + i`). The centre of pixel
//! `(i, j)` sits at `((i + 0.5) * dx, (j + 0.5) * dy)` and membership is decided
//! by testing that centre point only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that pixels are square.
const SQUARE_TOL: f64 = 1e-9;

/// Rectangular observation window `[0, width] x [0, height]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && height > 0.0 && height.is_finite()) {
            return Err(Error::InvalidWindow(format!("{width} x {height}")));
        }
        Ok(Self { width, height })
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Window grown by `margin` on every side, as `(x0, y0, x1, y1)`.
    pub fn extended(&self, margin: f64) -> (f64, f64, f64, f64) {
        (-margin, -margin, self.width + margin, self.height + margin)
    }
}

/// A single compact grain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grain {
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        /// `[semi_major, semi_minor]`
        axes: [f64; 2],
        orientation: f64,
    },
}

impl Grain {
    pub fn disc(x: f64, y: f64, radius: f64) -> Self {
        Grain::Disc {
            center: [x, y],
            radius,
        }
    }

    pub fn ellipse(x: f64, y: f64, semi_major: f64, semi_minor: f64, orientation: f64) -> Self {
        Grain::Ellipse {
            center: [x, y],
            axes: [semi_major, semi_minor],
            orientation,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match *self {
            Grain::Disc { center, .. } | Grain::Ellipse { center, .. } => center,
        }
    }

    /// Largest distance from the centre to a point of the grain.
    pub fn extent(&self) -> f64 {
        match *self {
            Grain::Disc { radius, .. } => radius,
            Grain::Ellipse { axes, .. } => axes[0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_center = self.center().iter().all(|c| c.is_finite());
        match *self {
            Grain::Disc { radius, .. } => {
                if !(finite_center && radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidGrain(format!("disc radius {radius}")));
                }
            }
            Grain::Ellipse {
                axes: [a, b],
                orientation,
                ..
            } => {
                if !(finite_center && b > 0.0 && a >= b && a.is_finite()) {
                    return Err(Error::InvalidGrain(format!("ellipse axes {a}, {b}")));
                }
                if !(0.0..std::f64::consts::PI).contains(&orientation) {
                    return Err(Error::InvalidGrain(format!(
                        "ellipse orientation {orientation} outside [0, pi)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point-membership test (closed grain).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Grain::Disc { center, radius } => {
                let dx = x - center[0];
                let dy = y - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Grain::Ellipse {
                center,
                axes: [a, b],
                orientation,
            } => {
                let (s, c) = orientation.sin_cos();
                let dx = x - center[0];
                let dy = y - center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
        }
    }

    /// Axis-aligned bounding box `(x0, y0, x1, y1)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match *self {
            Grain::Disc { center, radius } => (
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ),
            Grain::Ellipse {
                center,
                axes: [a, b],
                orientation,
            } => {
                let (s, c) = orientation.sin_cos();
                let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                (center[0] - hx, center[1] - hy, center[0] + hx, center[1] + hy)
            }
        }
    }

    /// Whether the bounding box of the grain meets the window.
    pub fn touches(&self, window: &Window) -> bool {
        let (x0, y0, x1, y1) = self.bounding_box();
        x1 >= 0.0 && y1 >= 0.0 && x0 <= window.width && y0 <= window.height
    }
}

/// Finite list of grains observed through a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrainConfiguration {
    pub window: Window,
    pub grains: Vec<Grain>,
}

impl GrainConfiguration {
    pub fn new(window: Window, grains: Vec<Grain>) -> Self {
        Self { window, grains }
    }

    pub fn empty(window: Window) -> Self {
        Self::new(window, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.grains.iter().try_for_each(Grain::validate)
    }
}

/// Rectangular grid of foreground/background cells over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryRaster {
    window: Window,
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
}

pub(crate) fn check_grid(window: &Window, nx: usize, ny: usize, len: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidRaster(format!("grid {nx} x {ny} is too small")));
    }
    if len != nx * ny {
        return Err(Error::InvalidRaster(format!(
            "expected {} cells, got {len}",
            nx * ny
        )));
    }
    let dx = window.width / nx as f64;
    let dy = window.height / ny as f64;
    if ((dx - dy) / dx).abs() > SQUARE_TOL {
        return Err(Error::InvalidRaster(format!(
            "pixels are not square ({dx} vs {dy})"
        )));
    }
    Ok(())
}

/// Number of rows giving square pixels for `nx` columns.
pub fn rows_for(window: &Window, nx: usize) -> usize {
    (nx as f64 * window.height / window.width).round() as usize
}

impl BinaryRaster {
    pub fn new(window: Window, nx: usize, ny: usize, cells: Vec<bool>) -> Result<Self> {
        check_grid(&window, nx, ny, cells.len())?;
        Ok(Self {
            window,
            nx,
            ny,
            cells,
        })
    }

    pub fn filled(window: Window, nx: usize, value: bool) -> Result<Self> {
        let ny = rows_for(&window, nx);
        Self::new(window, nx, ny, vec![value; nx * ny])
    }

    pub fn from_fn(window: Window, nx: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let ny = rows_for(&window, nx);
        let cells = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::new(window, nx, ny, cells)
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

    /// Physical side length of one pixel.
    pub fn spacing(&self) -> f64 {
        self.window.width / self.nx as f64
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.cells[j * self.nx + i] = value;
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let s = self.spacing();
        ((i as f64 + 0.5) * s, (j as f64 + 0.5) * s)
    }

    pub fn count_foreground(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            window: self.window,
            nx: self.nx,
            ny: self.ny,
            cells: self.cells.iter().map(|c| !c).collect(),
        }
    }
}

/// Rasterise the union of grains by pixel-centre membership.
pub fn rasterize(config: &GrainConfiguration, nx: usize) -> Result<BinaryRaster> {
    config.validate()?;
    let window = config.window;
    let ny = rows_for(&window, nx);
    check_grid(&window, nx, ny, nx * ny)?;
    let s = window.width / nx as f64;
    let mut cells = vec![false; nx * ny];
    for grain in &config.grains {
        let (x0, y0, x1, y1) = grain.bounding_box();
        let Some((i0, i1)) = pixel_span(x0, x1, s, nx) else {
            continue;
        };
        let Some((j0, j1)) = pixel_span(y0, y1, s, ny) else {
            continue;
        };
        for j in j0..=j1 {
            let y = (j as f64 + 0.5) * s;
            let row = &mut cells[j * nx..(j + 1) * nx];
            for (i, cell) in row.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                if !*cell && grain.contains((i as f64 + 0.5) * s, y) {
                    *cell = true;
                }
            }
        }
    }
    BinaryRaster::new(window, nx, ny, cells)
}

/// Inclusive index range of pixels whose centres may fall in `[lo, hi]`.
fn pixel_span(lo: f64, hi: f64, s: f64, n: usize) -> Option<(usize, usize)> {
    let a = (lo / s - 0.5).ceil().max(0.0);
    let b = (hi / s - 0.5).floor().min(n as f64 - 1.0);
    (a <= b).then_some((a as usize, b as usize))
}

/// Fraction of foreground pixels.
pub fn area_fraction(raster: &BinaryRaster) -> f64 {
    raster.count_foreground() as f64 / raster.cells.len() as f64
}
