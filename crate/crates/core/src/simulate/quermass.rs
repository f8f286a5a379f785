//! Birth-death-move Metropolis-Hastings sampler of the Quermass-interaction
//! disc process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::functionals::{exposed_arc, CoverageGrid, Disc, GeometricFunctionals, PIXELS_PER_UNIT};
use crate::error::{Error, Result};
use crate::raster::{Grain, GrainConfiguration, Window};

fn default_burn_in() -> usize {
    10_000
}

fn default_ppu() -> f64 {
    PIXELS_PER_UNIT
}

/// Density parameters and chain settings. The reference measure is the
/// Boolean model with Poisson germs of `intensity` and disc radii uniform on
/// `[r_min, r_max]`, observed on the window extended by `margin`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuermassParams {
    /// Weights of area, perimeter and Euler characteristic.
    pub theta: [f64; 3],
    pub intensity: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
    /// Steps discarded before [`QuermassSampler::sample_states`] records.
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Defaults to `r_max`.
    #[serde(default)]
    pub margin: Option<f64>,
    /// Births beyond this many discs are rejected.
    #[serde(default)]
    pub max_discs: Option<usize>,
    /// Half side of the uniform square displacement; defaults to `r_max`.
    #[serde(default)]
    pub move_radius: Option<f64>,
    #[serde(default = "default_ppu")]
    pub pixels_per_unit: f64,
}

impl QuermassParams {
    /// The study's reference model (intensity 0.4, radii on `[0.5, 1]`) with
    /// the default chain length.
    pub fn new(theta: [f64; 3]) -> Self {
        Self {
            theta,
            intensity: 0.4,
            r_min: 0.5,
            r_max: 1.0,
            steps: 50_000,
            burn_in: default_burn_in(),
            margin: None,
            max_discs: None,
            move_radius: None,
            pixels_per_unit: PIXELS_PER_UNIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let valid = self.theta.iter().all(|t| t.is_finite())
            && self.intensity.is_finite()
            && self.intensity >= 0.0
            && self.r_min > 0.0
            && self.r_min <= self.r_max
            && self.r_max.is_finite()
            && self.steps >= 1
            && self.margin.is_none_or(|m| m >= 0.0 && m.is_finite())
            && self.move_radius.is_none_or(|m| m > 0.0 && m.is_finite())
            && self.pixels_per_unit > 0.0
            && self.pixels_per_unit.is_finite();
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid Quermass parameters {self:?}")))
        }
    }

    fn margin(&self) -> f64 {
        self.margin.unwrap_or(self.r_max)
    }

    fn draw_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.r_min < self.r_max {
            rng.random_range(self.r_min..self.r_max)
        } else {
            self.r_min
        }
    }
}

/// Markov chain state with incrementally maintained functionals of the
/// union of all discs in the extended window.
#[derive(Clone, Debug)]
pub struct QuermassSampler {
    params: QuermassParams,
    window: Window,
    ext: (f64, f64, f64, f64),
    ext_area: f64,
    slots: Vec<Option<Disc>>,
    free: Vec<usize>,
    alive: Vec<usize>,
    alive_pos: Vec<usize>,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
    grid: CoverageGrid,
    perimeter: f64,
    next_id: u64,
    proposed: [u64; 3],
    accepted: [u64; 3],
}

enum Proposal {
    Birth,
    Death,
    Move,
}

impl QuermassSampler {
    /// Starts from a realisation of the reference Boolean model.
    pub fn new<R: Rng + ?Sized>(params: &QuermassParams, window: &Window, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let margin = params.margin();
        let ext = window.extended(margin);
        let (x0, y0, x1, y1) = ext;
        let cell = 2.0 * params.r_max;
        let cols = ((x1 - x0) / cell).ceil().max(1.0) as usize;
        let rows = ((y1 - y0) / cell).ceil().max(1.0) as usize;
        let r = params.r_max;
        let mut s = Self {
            params: *params,
            window: *window,
            ext,
            ext_area: (x1 - x0) * (y1 - y0),
            slots: Vec::new(),
            free: Vec::new(),
            alive: Vec::new(),
            alive_pos: Vec::new(),
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
            grid: CoverageGrid::new(x0 - r, y0 - r, x1 + r, y1 + r, params.pixels_per_unit),
            perimeter: 0.0,
            next_id: 0,
            proposed: [0; 3],
            accepted: [0; 3],
        };
        let mean = params.intensity * s.ext_area;
        let mut n = if mean > 0.0 {
            use rand_distr::{Distribution, Poisson};
            Poisson::new(mean).map_or(0, |d| d.sample(rng) as usize)
        } else {
            0
        };
        if let Some(cap) = params.max_discs {
            n = n.min(cap);
        }
        for _ in 0..n {
            let c = s.uniform_center(rng);
            let d = s.new_disc(c, params.draw_radius(rng));
            s.insert(d);
        }
        Ok(s)
    }

    fn uniform_center<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let (x0, y0, x1, y1) = self.ext;
        let u = |rng: &mut R, a: f64, b: f64| if a < b { rng.random_range(a..b) } else { a };
        [u(rng, x0, x1), u(rng, y0, y1)]
    }

    fn new_disc(&mut self, c: [f64; 2], r: f64) -> Disc {
        self.next_id += 1;
        Disc {
            x: c[0],
            y: c[1],
            r,
            id: self.next_id,
        }
    }

    fn bucket_of(&self, x: f64, y: f64) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(x, self.ext.0, self.cols), f(y, self.ext.1, self.rows))
    }

    /// Slots of discs overlapping `d` (excluding `d` itself).
    fn overlapping<'a>(&'a self, d: &'a Disc) -> impl Iterator<Item = usize> + 'a {
        let (i, j) = self.bucket_of(d.x, d.y);
        let cols = i.saturating_sub(1)..=(i + 1).min(self.cols - 1);
        (j.saturating_sub(1)..=(j + 1).min(self.rows - 1))
            .flat_map(move |b| cols.clone().map(move |a| b * self.cols + a))
            .flat_map(move |bucket| self.buckets[bucket].iter().copied())
            .filter(move |&k| {
                let o = self.slots[k].as_ref().expect("bucketed slot is alive");
                let (dx, dy) = (o.x - d.x, o.y - d.y);
                o.id != d.id && dx * dx + dy * dy < (o.r + d.r) * (o.r + d.r)
            })
    }

    fn neighbours(&self, d: &Disc) -> Vec<usize> {
        self.overlapping(d).collect()
    }

    fn exposed(&self, slot: usize) -> f64 {
        let d = self.slots[slot].as_ref().expect("live slot");
        exposed_arc(
            d,
            self.overlapping(d)
                .map(|k| self.slots[k].as_ref().expect("live slot")),
        )
    }

    fn local_perimeter(&self, slots: &[usize]) -> f64 {
        slots.iter().map(|&k| self.exposed(k)).sum()
    }

    /// Adds a disc, updating every functional; returns its slot.
    fn insert(&mut self, d: Disc) -> usize {
        let nb = self.neighbours(&d);
        let before = self.local_perimeter(&nb);
        let slot = match self.free.pop() {
            Some(k) => {
                self.slots[k] = Some(d);
                k
            }
            None => {
                self.slots.push(Some(d));
                self.alive_pos.push(0);
                self.slots.len() - 1
            }
        };
        self.alive_pos[slot] = self.alive.len();
        self.alive.push(slot);
        let (i, j) = self.bucket_of(d.x, d.y);
        self.buckets[j * self.cols + i].push(slot);
        self.grid.apply(&d, 1);
        let mut touched = nb;
        touched.push(slot);
        self.perimeter += self.local_perimeter(&touched) - before;
        slot
    }

    /// Removes the disc in `slot`, updating every functional.
    fn remove(&mut self, slot: usize) -> Disc {
        let d = self.slots[slot].expect("live slot");
        let nb = self.neighbours(&d);
        let mut touched = nb.clone();
        touched.push(slot);
        let before = self.local_perimeter(&touched);
        let (i, j) = self.bucket_of(d.x, d.y);
        let bucket = &mut self.buckets[j * self.cols + i];
        let at = bucket.iter().position(|&k| k == slot).expect("slot in bucket");
        bucket.swap_remove(at);
        let pos = self.alive_pos[slot];
        self.alive.swap_remove(pos);
        if let Some(&moved) = self.alive.get(pos) {
            self.alive_pos[moved] = pos;
        }
        self.slots[slot] = None;
        self.free.push(slot);
        self.grid.apply(&d, -1);
        self.perimeter += self.local_perimeter(&nb) - before;
        d
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    /// Functionals of the union of all discs in the extended window.
    pub fn functionals(&self) -> GeometricFunctionals {
        GeometricFunctionals {
            area: self.grid.area(),
            perimeter: self.perimeter,
            euler: self.grid.euler(),
        }
    }

    fn discs(&self) -> impl Iterator<Item = &Disc> + '_ {
        self.alive.iter().map(|&k| self.slots[k].as_ref().expect("live slot"))
    }

    /// Every disc of the chain state, including those outside the window.
    pub fn all_discs(&self) -> Vec<Grain> {
        self.discs().map(|d| Grain::disc(d.x, d.y, d.r)).collect()
    }

    /// Discs meeting the observation window.
    pub fn configuration(&self) -> GrainConfiguration {
        let grains = self
            .all_discs()
            .into_iter()
            .filter(|g| g.touches(&self.window))
            .collect();
        GrainConfiguration::new(self.window, grains)
    }

    /// Acceptance rates of births, deaths and moves so far.
    pub fn acceptance_rates(&self) -> [f64; 3] {
        std::array::from_fn(|k| {
            if self.proposed[k] == 0 {
                0.0
            } else {
                self.accepted[k] as f64 / self.proposed[k] as f64
            }
        })
    }

    fn accept<R: Rng + ?Sized>(&self, before: &GeometricFunctionals, log_prior: f64, rng: &mut R) -> bool {
        let after = self.functionals();
        let theta = &self.params.theta;
        let delta = after.dot(theta) - before.dot(theta);
        let log_ratio = delta + log_prior;
        if log_ratio.is_nan() {
            log::warn!("non-finite Quermass density ratio ({delta} + {log_prior}); proposal rejected");
            return false;
        }
        log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
    }

    /// One Metropolis-Hastings transition; returns whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let u: f64 = rng.random();
        let proposal = if u < 0.4 {
            Proposal::Birth
        } else if u < 0.8 {
            Proposal::Death
        } else {
            Proposal::Move
        };
        let n = self.len();
        let before = self.functionals();
        let scale = self.params.intensity * self.ext_area;
        let (kind, accepted) = match proposal {
            Proposal::Birth => {
                let allowed = self.params.max_discs.is_none_or(|cap| n < cap);
                let c = self.uniform_center(rng);
                let r = self.params.draw_radius(rng);
                let ok = allowed && {
                    let d = self.new_disc(c, r);
                    let slot = self.insert(d);
                    let ok = self.accept(&before, (scale / (n + 1) as f64).ln(), rng);
                    if !ok {
                        self.remove(slot);
                    }
                    ok
                };
                (0, ok)
            }
            Proposal::Death => {
                let ok = n > 0 && {
                    let slot = self.alive[rng.random_range(0..n)];
                    let d = self.remove(slot);
                    let ok = self.accept(&before, (n as f64 / scale).ln(), rng);
                    if !ok {
                        self.insert(d);
                    }
                    ok
                };
                (1, ok)
            }
            Proposal::Move => {
                let ok = n > 0 && {
                    let slot = self.alive[rng.random_range(0..n)];
                    let h = self.params.move_radius.unwrap_or(self.params.r_max);
                    let dx = rng.random_range(-h..h);
                    let dy = rng.random_range(-h..h);
                    let old = self.slots[slot].expect("live slot");
                    let (x0, y0, x1, y1) = self.ext;
                    let (nx, ny) = (old.x + dx, old.y + dy);
                    (x0..=x1).contains(&nx) && (y0..=y1).contains(&ny) && {
                        self.remove(slot);
                        let moved = self.insert(Disc { x: nx, y: ny, ..old });
                        let ok = self.accept(&before, 0.0, rng);
                        if !ok {
                            self.remove(moved);
                            self.insert(old);
                        }
                        ok
                    }
                };
                (2, ok)
            }
        };
        self.proposed[kind] += 1;
        self.accepted[kind] += accepted as u64;
        accepted
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// After `burn_in` steps, records `count` states `thin` steps apart.
    pub fn sample_states<R: Rng + ?Sized, T>(
        &mut self,
        count: usize,
        thin: usize,
        rng: &mut R,
        mut record: impl FnMut(&Self) -> T,
    ) -> Vec<T> {
        self.run(self.params.burn_in, rng);
        (0..count)
            .map(|_| {
                self.run(thin, rng);
                record(self)
            })
            .collect()
    }
}

/// Runs `params.steps` transitions from a reference Boolean state and
/// returns the discs meeting `window`.
pub fn quermass_mh<R: Rng + ?Sized>(
    params: &QuermassParams,
    window: &Window,
    rng: &mut R,
) -> Result<GrainConfiguration> {
    let mut s = QuermassSampler::new(params, window, rng)?;
    s.run(params.steps, rng);
    Ok(s.configuration())
}
