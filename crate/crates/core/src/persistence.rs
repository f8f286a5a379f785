//! Sublevel-set persistent homology of scalar fields on a pixel grid.
//!
//! Components (dimension 0) are tracked with a union-find over pixels in
//! increasing value order under 4-connectivity; the younger component dies
//! when two meet. Holes (dimension 1) come from the same sweep run on the
//! negated field under 8-connectivity with a virtual vertex joined to every
//! border pixel: a superlevel component that merges at `-s` after being born
//! at `-m` is a hole of the sublevel filtration living on `[s, m)`.

use std::cmp::Ordering;

use crate::distance::ScalarField;
use crate::raster::BinaryRaster;

/// One (aggregated) point of a persistence diagram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePoint {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
    pub essential: bool,
}

impl PersistencePoint {
    pub fn new(dim: u8, birth: f64, death: f64) -> Self {
        Self {
            dim,
            birth,
            death,
            multiplicity: 1,
            essential: false,
        }
    }

    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }

    pub fn meanage(&self) -> f64 {
        0.5 * (self.birth + self.death)
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
            .then(self.essential.cmp(&other.essential))
    }
}

/// Multiset of persistence points for dimensions 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
    field_min: f64,
    field_max: f64,
}

impl PersistenceDiagram {
    /// Build a diagram, merging identical points into multiplicities.
    pub fn new(points: Vec<PersistencePoint>, field_min: f64, field_max: f64) -> Self {
        Self {
            points: aggregate(points),
            field_min,
            field_max,
        }
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    /// Points of one homological dimension.
    pub fn dim(&self, q: u8) -> impl Iterator<Item = &PersistencePoint> + '_ {
        self.points.iter().filter(move |p| p.dim == q)
    }

    pub fn field_min(&self) -> f64 {
        self.field_min
    }

    pub fn field_max(&self) -> f64 {
        self.field_max
    }

    /// Number of points of dimension `q`, counted with multiplicity.
    pub fn count(&self, q: u8) -> u64 {
        self.dim(q).map(|p| p.multiplicity as u64).sum()
    }

    /// Sum of `multiplicity * lifetime` over dimension `q`.
    pub fn total_persistence(&self, q: u8) -> f64 {
        self.dim(q)
            .map(|p| p.multiplicity as f64 * p.lifetime())
            .sum()
    }
}

fn aggregate(mut points: Vec<PersistencePoint>) -> Vec<PersistencePoint> {
    points.sort_by(PersistencePoint::key_cmp);
    let mut out: Vec<PersistencePoint> = Vec::with_capacity(points.len());
    for p in points {
        match out.last_mut() {
            Some(last) if last.key_cmp(&p) == Ordering::Equal => {
                last.multiplicity += p.multiplicity
            }
            _ => out.push(p),
        }
    }
    out
}

struct UnionFind {
    parent: Vec<u32>,
    // Processing position of the component's oldest pixel (stored at roots).
    age: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            age: vec![u32::MAX; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }
}

const N4: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const N8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Result of one elder-rule sweep.
struct Sweep {
    /// Finite `(birth, death)` pairs in sweep values.
    pairs: Vec<(f64, f64)>,
    /// Births of components still alive at the end.
    survivors: Vec<f64>,
}

/// Elder-rule zeroth persistence of `values` on an `nx x ny` grid. With
/// `border_root`, a virtual vertex older than every pixel is adjacent to all
/// border pixels and never reported.
fn zero_dim_sweep(values: &[f64], nx: usize, ny: usize, eight: bool, border_root: bool) -> Sweep {
    let n = nx * ny;
    let mut order: Vec<u32> = (0..n as u32).collect();
    // Stable sort keeps row-major order among ties.
    order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));

    let virt = n as u32;
    let mut uf = UnionFind::new(n + 1);
    uf.age[virt as usize] = 0;
    let mut active = vec![false; n];
    let mut birth_value = vec![0.0f64; n + 1];
    let nbrs: &[(isize, isize)] = if eight { &N8 } else { &N4 };

    let mut pairs = Vec::new();
    let mut roots: Vec<u32> = Vec::with_capacity(9);
    for (pos, &p) in order.iter().enumerate() {
        let pu = p as usize;
        let v = values[pu];
        let (i, j) = ((pu % nx) as isize, (pu / nx) as isize);
        roots.clear();
        let on_border = i == 0 || j == 0 || i == nx as isize - 1 || j == ny as isize - 1;
        if border_root && on_border {
            roots.push(virt);
        }
        for &(di, dj) in nbrs {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                continue;
            }
            let q = b as usize * nx + a as usize;
            if active[q] {
                let r = uf.find(q as u32);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        active[pu] = true;
        if roots.is_empty() {
            uf.age[pu] = pos as u32 + 1;
            birth_value[pu] = v;
            continue;
        }
        let elder = *roots
            .iter()
            .min_by_key(|&&r| uf.age[r as usize])
            .expect("non-empty");
        uf.parent[pu] = elder;
        for &r in roots.iter() {
            if r != elder {
                pairs.push((birth_value[r as usize], v));
                uf.parent[r as usize] = elder;
            }
        }
    }

    let mut survivors = Vec::new();
    for p in 0..n as u32 {
        if uf.parent[p as usize] == p {
            survivors.push(birth_value[p as usize]);
        }
    }
    Sweep { pairs, survivors }
}

/// Persistence diagram (dimensions 0 and 1) of the sublevel filtration.
///
/// The oldest component is reported once as an essential dimension-0 point
/// with death set to the field maximum. Background components touching the
/// border are not holes and produce no dimension-1 points.
pub fn sublevel_persistence(field: &ScalarField) -> PersistenceDiagram {
    grid_persistence(field.values(), field.nx(), field.ny())
}

/// Same as [`sublevel_persistence`] on a bare row-major grid of any shape
/// (including single rows).
pub fn grid_persistence(values: &[f64], nx: usize, ny: usize) -> PersistenceDiagram {
    assert_eq!(values.len(), nx * ny, "grid size mismatch");
    let fmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut points = Vec::new();
    let comp = zero_dim_sweep(values, nx, ny, false, false);
    points.extend(
        comp.pairs
            .iter()
            .map(|&(b, d)| PersistencePoint::new(0, b, d)),
    );
    for b in comp.survivors {
        points.push(PersistencePoint {
            essential: true,
            ..PersistencePoint::new(0, b, fmax)
        });
    }

    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    let dual = zero_dim_sweep(&negated, nx, ny, true, true);
    points.extend(
        dual.pairs
            .iter()
            .map(|&(b, d)| PersistencePoint::new(1, -d, -b)),
    );
    PersistenceDiagram::new(points, fmin, fmax)
}

/// Betti numbers `(beta0, beta1)` of the sublevel set at threshold `r`.
pub fn betti_counts(pd: &PersistenceDiagram, r: f64) -> (u64, u64) {
    let mut betti = [0u64; 2];
    for p in pd.points() {
        let alive = if p.essential {
            p.birth <= r
        } else {
            p.birth <= r && r < p.death
        };
        if alive && (p.dim as usize) < 2 {
            betti[p.dim as usize] += p.multiplicity as u64;
        }
    }
    (betti[0], betti[1])
}

/// Labels connected components of `mask` and reports, per component,
/// whether it touches the grid border.
pub(crate) fn components(mask: &[bool], nx: usize, ny: usize, eight: bool) -> Vec<bool> {
    let nbrs: &[(isize, isize)] = if eight { &N8 } else { &N4 };
    let mut seen = vec![false; mask.len()];
    let mut touches = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut border = false;
        while let Some(p) = stack.pop() {
            let (i, j) = ((p % nx) as isize, (p / nx) as isize);
            border |= i == 0 || j == 0 || i == nx as isize - 1 || j == ny as isize - 1;
            for &(di, dj) in nbrs {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                    continue;
                }
                let q = b as usize * nx + a as usize;
                if mask[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        touches.push(border);
    }
    touches
}

/// Components (4-connected foreground) minus holes (8-connected background
/// components not touching the border).
pub fn euler_characteristic(raster: &BinaryRaster) -> i64 {
    let (nx, ny) = (raster.nx(), raster.ny());
    let fg = components(raster.cells(), nx, ny, false).len() as i64;
    let bg: Vec<bool> = raster.cells().iter().map(|c| !c).collect();
    let holes = components(&bg, nx, ny, true)
        .into_iter()
        .filter(|&t| !t)
        .count() as i64;
    fg - holes
}
