//! Area, perimeter and Euler characteristic of unions of discs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Grain, GrainConfiguration};

/// Quermass functionals of a union of discs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeometricFunctionals {
    pub area: f64,
    pub perimeter: f64,
    pub euler: i64,
}

impl GeometricFunctionals {
    pub fn dot(&self, theta: &[f64; 3]) -> f64 {
        theta[0] * self.area + theta[1] * self.perimeter + theta[2] * self.euler as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Disc {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    /// Breaks ties between coincident discs: of two identical circles only
    /// the one with the smaller id is exposed.
    pub id: u64,
}

/// Arc length of circle `d` not covered by any disc in `others`.
pub(crate) fn exposed_arc<'a>(d: &Disc, others: impl Iterator<Item = &'a Disc>) -> f64 {
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for o in others {
        if o.id == d.id {
            continue;
        }
        let (dx, dy) = (o.x - d.x, o.y - d.y);
        let dist = (dx * dx + dy * dy).sqrt();
        if dist >= d.r + o.r {
            continue;
        }
        if dist + d.r <= o.r {
            if dist == 0.0 && d.r == o.r && d.id < o.id {
                continue;
            }
            return 0.0;
        }
        if dist + o.r <= d.r {
            continue;
        }
        let half = ((d.r * d.r + dist * dist - o.r * o.r) / (2.0 * d.r * dist))
            .clamp(-1.0, 1.0)
            .acos();
        // Normalise to [0, 2pi), splitting arcs across the cut.
        let a = (dy.atan2(dx) - half).rem_euclid(2.0 * PI);
        let b = a + 2.0 * half;
        if b > 2.0 * PI {
            arcs.push((a, 2.0 * PI));
            arcs.push((0.0, b - 2.0 * PI));
        } else {
            arcs.push((a, b));
        }
    }
    if arcs.is_empty() {
        return 2.0 * PI * d.r;
    }
    arcs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut covered = 0.0;
    let (mut lo, mut hi) = arcs[0];
    for &(a, b) in &arcs[1..] {
        if a > hi {
            covered += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    covered += hi - lo;
    ((2.0 * PI - covered).max(0.0)) * d.r
}

/// Boundary length of a union of discs (exact up to rounding).
pub fn exposed_perimeter(discs: &[(f64, f64, f64)]) -> f64 {
    let ds: Vec<Disc> = discs
        .iter()
        .enumerate()
        .map(|(k, &(x, y, r))| Disc { x, y, r, id: k as u64 })
        .collect();
    ds.iter().map(|d| exposed_arc(d, ds.iter())).sum()
}

/// Bit-quad weights for the Euler number of 4-connected foreground, scaled
/// by four: one set pixel +1, three set -1, diagonal pair +2.
const QUAD_WEIGHT: [i64; 16] = {
    let mut w = [0i64; 16];
    let mut q = 0;
    while q < 16 {
        w[q] = match (q as u32).count_ones() {
            1 => 1,
            3 => -1,
            2 if q == 0b1001 || q == 0b0110 => 2,
            _ => 0,
        };
        q += 1;
    }
    w
};

/// Disc coverage counts on the lattice of pixel centres `((i + 0.5) / ppu,
/// (j + 0.5) / ppu)` for `i, j` in absolute coordinates, restricted to a box.
#[derive(Clone, Debug)]
pub(crate) struct CoverageGrid {
    ppu: f64,
    /// Absolute lattice index of the first column and row.
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    counts: Vec<u16>,
    covered: usize,
    /// Four times the Euler number.
    quads: i64,
}

impl CoverageGrid {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64, ppu: f64) -> Self {
        let i0 = (x0 * ppu).floor() as i64 - 1;
        let j0 = (y0 * ppu).floor() as i64 - 1;
        let nx = ((x1 * ppu).ceil() as i64 + 1 - i0).max(1) as usize;
        let ny = ((y1 * ppu).ceil() as i64 + 1 - j0).max(1) as usize;
        Self {
            ppu,
            i0,
            j0,
            nx,
            ny,
            counts: vec![0; nx * ny],
            covered: 0,
            quads: 0,
        }
    }

    pub fn area(&self) -> f64 {
        self.covered as f64 / (self.ppu * self.ppu)
    }

    pub fn euler(&self) -> i64 {
        self.quads / 4
    }

    fn set(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.counts[j as usize * self.nx + i as usize] > 0
    }

    /// Scaled Euler contribution of the quads with lower-right pixel in the
    /// inclusive local ranges.
    fn quad_sum(&self, i0: i64, i1: i64, j0: i64, j1: i64) -> i64 {
        if i0 >= 1 && j0 >= 1 && i1 < self.nx as i64 && j1 < self.ny as i64 {
            return self.quad_sum_interior(i0 as usize, i1 as usize, j0 as usize, j1 as usize);
        }
        let mut total = 0;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let q = self.set(i - 1, j - 1) as usize
                    | (self.set(i, j - 1) as usize) << 1
                    | (self.set(i - 1, j) as usize) << 2
                    | (self.set(i, j) as usize) << 3;
                total += QUAD_WEIGHT[q];
            }
        }
        total
    }

    /// `quad_sum` when every pixel read lies on the grid, sliding along rows.
    fn quad_sum_interior(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> i64 {
        let nx = self.nx;
        let mut total = 0;
        for j in j0..=j1 {
            let up = &self.counts[(j - 1) * nx..j * nx];
            let row = &self.counts[j * nx..(j + 1) * nx];
            let mut left = (up[i0 - 1] > 0) as usize | ((row[i0 - 1] > 0) as usize) << 2;
            for (&u, &r) in up[i0..=i1].iter().zip(&row[i0..=i1]) {
                let right = ((u > 0) as usize) << 1 | ((r > 0) as usize) << 3;
                total += QUAD_WEIGHT[left | right];
                left = right >> 1;
            }
        }
        total
    }

    /// Local pixel range whose centres may lie in the disc.
    fn span(&self, d: &Disc) -> Option<(i64, i64, i64, i64)> {
        let lo = |c: f64, o: i64| ((c - d.r) * self.ppu - 0.5).ceil() as i64 - o;
        let hi = |c: f64, o: i64| ((c + d.r) * self.ppu - 0.5).floor() as i64 - o;
        let (a, b) = (lo(d.x, self.i0).max(0), hi(d.x, self.i0).min(self.nx as i64 - 1));
        let (c, e) = (lo(d.y, self.j0).max(0), hi(d.y, self.j0).min(self.ny as i64 - 1));
        (a <= b && c <= e).then_some((a, b, c, e))
    }

    /// Adds (`delta = 1`) or removes (`delta = -1`) a disc.
    pub fn apply(&mut self, d: &Disc, delta: i32) {
        let Some((a, b, c, e)) = self.span(d) else {
            return;
        };
        let before = self.quad_sum(a, b + 1, c, e + 1);
        let r2 = d.r * d.r;
        for j in c..=e {
            let y = ((j + self.j0) as f64 + 0.5) / self.ppu - d.y;
            for i in a..=b {
                let x = ((i + self.i0) as f64 + 0.5) / self.ppu - d.x;
                if x * x + y * y <= r2 {
                    let cell = &mut self.counts[j as usize * self.nx + i as usize];
                    if delta > 0 {
                        if *cell == 0 {
                            self.covered += 1;
                        }
                        *cell += 1;
                    } else {
                        *cell -= 1;
                        if *cell == 0 {
                            self.covered -= 1;
                        }
                    }
                }
            }
        }
        self.quads += self.quad_sum(a, b + 1, c, e + 1) - before;
    }
}

/// Default rasterisation density for area and Euler characteristic.
pub const PIXELS_PER_UNIT: f64 = 8.0;

/// Area and Euler characteristic of the disc union by pixel counting on a
/// lattice of `PIXELS_PER_UNIT` per unit length; perimeter exact from the
/// exposed circle arcs.
pub fn geometric_functionals(config: &GrainConfiguration) -> Result<GeometricFunctionals> {
    config.validate()?;
    let mut discs = Vec::with_capacity(config.len());
    for (k, g) in config.grains.iter().enumerate() {
        match *g {
            Grain::Disc { center, radius } => discs.push(Disc {
                x: center[0],
                y: center[1],
                r: radius,
                id: k as u64,
            }),
            Grain::Ellipse { .. } => {
                return Err(Error::InvalidGrain(
                    "geometric functionals need disc grains".into(),
                ))
            }
        }
    }
    Ok(functionals_of(&discs, PIXELS_PER_UNIT))
}

pub(crate) fn functionals_of(discs: &[Disc], ppu: f64) -> GeometricFunctionals {
    if discs.is_empty() {
        return GeometricFunctionals::default();
    }
    let x0 = discs.iter().map(|d| d.x - d.r).fold(f64::INFINITY, f64::min);
    let y0 = discs.iter().map(|d| d.y - d.r).fold(f64::INFINITY, f64::min);
    let x1 = discs.iter().map(|d| d.x + d.r).fold(f64::NEG_INFINITY, f64::max);
    let y1 = discs.iter().map(|d| d.y + d.r).fold(f64::NEG_INFINITY, f64::max);
    let mut grid = CoverageGrid::new(x0, y0, x1, y1, ppu);
    for d in discs {
        grid.apply(d, 1);
    }
    GeometricFunctionals {
        area: grid.area(),
        perimeter: discs.iter().map(|d| exposed_arc(d, discs.iter())).sum(),
        euler: grid.euler(),
    }
}
