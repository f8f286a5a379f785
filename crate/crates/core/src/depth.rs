//! Tukey halfspace depth, integrated functional depths of order 1 to 3 and
//! outlier detection over samples of summary curves.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::summaries::{CurveKind, SummaryCurve};

/// Curves sharing one argument grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSample {
    args: Vec<f64>,
    curves: Vec<Vec<f64>>,
    labels: Vec<String>,
    kind: CurveKind,
}

impl FunctionalSample {
    /// Builds a sample from at least two curves on identical grids. Labels
    /// default to the curve positions.
    pub fn new(curves: Vec<SummaryCurve>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InsufficientSample("empty sample".into()))?;
        let (args, kind) = (first.args.clone(), first.kind);
        if curves.iter().any(|c| c.args != args) {
            return Err(Error::GridMismatch);
        }
        Self::from_values(args, curves.into_iter().map(|c| c.values).collect(), kind)
    }

    pub fn from_values(args: Vec<f64>, curves: Vec<Vec<f64>>, kind: CurveKind) -> Result<Self> {
        crate::summaries::check_grid(&args)?;
        if curves.len() < 2 {
            return Err(Error::InsufficientSample(format!(
                "{} curves, need at least 2",
                curves.len()
            )));
        }
        if curves.iter().any(|c| c.len() != args.len()) {
            return Err(Error::GridMismatch);
        }
        if curves.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite curve value".into()));
        }
        let labels = (0..curves.len()).map(|i| i.to_string()).collect();
        Ok(Self {
            args,
            curves,
            labels,
            kind,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.curves.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} curves",
                labels.len(),
                self.curves.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn args(&self) -> &[f64] {
        &self.args
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.curves[i]
    }

    pub fn curves(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.curves.iter().map(Vec::as_slice)
    }

    pub fn curve(&self, i: usize) -> SummaryCurve {
        SummaryCurve {
            args: self.args.clone(),
            values: self.curves[i].clone(),
            kind: self.kind,
        }
    }
}

/// Monte Carlo settings for integrated depths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthOptions {
    /// Argument tuples drawn for orders 2 and 3 (and order 1 on grids longer
    /// than this). All tuples are enumerated when there are at most `draws`.
    pub draws: usize,
    /// Random directions in the order-3 halfspace depth.
    pub directions: usize,
    pub seed: u64,
}

impl Default for DepthOptions {
    fn default() -> Self {
        Self {
            draws: 2000,
            directions: 512,
            seed: 0,
        }
    }
}

fn depth_1d(x: f64, cloud: &[f64]) -> f64 {
    let below = cloud.iter().filter(|&&y| y <= x).count();
    let above = cloud.iter().filter(|&&y| y >= x).count();
    below.min(above) as f64 / cloud.len() as f64
}

/// 1D depth against an ascending cloud.
fn depth_sorted(x: f64, sorted: &[f64]) -> usize {
    let below = sorted.partition_point(|&y| y <= x);
    let above = sorted.len() - sorted.partition_point(|&y| y < x);
    below.min(above)
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Number of cloud points in the least populated closed halfplane through `x`.
///
/// Points equal to `x` lie in every halfplane. For the rest, the complement
/// of a closed halfplane is an open one, and the fullest open halfplane can
/// be rotated until its boundary meets a point, so it is the fullest
/// half-open half-turn `[angle(v_i), angle(v_i) + pi)`.
fn depth_2d_count(x: [f64; 2], cloud: &[[f64; 2]]) -> usize {
    let mut at_x = 0;
    let mut v = Vec::with_capacity(cloud.len());
    for p in cloud {
        let d = [p[0] - x[0], p[1] - x[1]];
        if d == [0.0, 0.0] {
            at_x += 1;
        } else {
            v.push(d);
        }
    }
    let best = v
        .iter()
        .map(|&a| {
            v.iter()
                .filter(|&&b| {
                    let c = cross(a, b);
                    c > 0.0 || (c == 0.0 && dot(a, b) > 0.0)
                })
                .count()
        })
        .max()
        .unwrap_or(0);
    at_x + v.len() - best
}

/// `k` unit vectors drawn uniformly on the sphere.
pub fn random_directions(k: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            out.push(v.map(|c| c / norm));
        }
    }
    out
}

fn project(p: &[f64], u: &[f64; 3]) -> f64 {
    p[0] * u[0] + p[1] * u[1] + p[2] * u[2]
}

/// Minimum over `directions` of the 1D depth of the projected point.
pub fn directional_depth(x: &[f64], cloud: &[Vec<f64>], directions: &[[f64; 3]]) -> Result<f64> {
    check_cloud(x, cloud)?;
    if x.len() != 3 || directions.is_empty() {
        return Err(Error::InvalidInput(
            "directional depth needs 3-vectors and at least one direction".into(),
        ));
    }
    let mut proj = vec![0.0; cloud.len()];
    let d = directions
        .iter()
        .map(|u| {
            for (p, y) in proj.iter_mut().zip(cloud) {
                *p = project(y, u);
            }
            depth_1d(project(x, u), &proj)
        })
        .fold(1.0, f64::min);
    Ok(d)
}

fn check_cloud(x: &[f64], cloud: &[Vec<f64>]) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::InvalidInput("empty cloud".into()));
    }
    if !(1..=3).contains(&x.len()) {
        return Err(Error::InvalidInput(format!(
            "dimension {} not in 1..=3",
            x.len()
        )));
    }
    if cloud.iter().any(|y| y.len() != x.len()) {
        return Err(Error::InvalidInput("cloud dimension differs from x".into()));
    }
    Ok(())
}

/// Tukey halfspace depth of `x` in `cloud`: exact in one and two dimensions,
/// approximated over the default 512 seeded directions in three.
pub fn halfspace_depth(x: &[f64], cloud: &[Vec<f64>]) -> Result<f64> {
    check_cloud(x, cloud)?;
    match x.len() {
        1 => Ok(depth_1d(x[0], &cloud.iter().map(|y| y[0]).collect::<Vec<_>>())),
        2 => {
            let pts: Vec<[f64; 2]> = cloud.iter().map(|y| [y[0], y[1]]).collect();
            Ok(depth_2d_count([x[0], x[1]], &pts) as f64 / cloud.len() as f64)
        }
        _ => {
            let opts = DepthOptions::default();
            directional_depth(x, cloud, &random_directions(opts.directions, opts.seed))
        }
    }
}

/// Argument index tuples for order `j`: every tuple when there are at most
/// `draws` of them, otherwise `draws` uniform tuples.
fn argument_tuples(m: usize, j: usize, opts: &DepthOptions) -> Vec<[usize; 3]> {
    let total = m.checked_pow(j as u32).unwrap_or(usize::MAX);
    if total <= opts.draws {
        return (0..total)
            .map(|mut k| {
                let mut t = [0; 3];
                for slot in t.iter_mut().take(j) {
                    *slot = k % m;
                    k /= m;
                }
                t
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(j as u64);
    (0..opts.draws)
        .map(|_| {
            let mut t = [0; 3];
            for slot in t.iter_mut().take(j) {
                *slot = rng.random_range(0..m);
            }
            t
        })
        .collect()
}

/// Per-tuple depth counts of each query against the sample cloud.
fn tuple_depths(
    queries: &[&[f64]],
    sample: &FunctionalSample,
    j: usize,
    t: &[usize; 3],
    directions: &[[f64; 3]],
) -> Vec<usize> {
    let cloud = &sample.curves;
    match j {
        1 => {
            let mut col: Vec<f64> = cloud.iter().map(|g| g[t[0]]).collect();
            col.sort_by(f64::total_cmp);
            queries.iter().map(|f| depth_sorted(f[t[0]], &col)).collect()
        }
        2 => {
            let pts: Vec<[f64; 2]> = cloud.iter().map(|g| [g[t[0]], g[t[1]]]).collect();
            queries
                .iter()
                .map(|f| depth_2d_count([f[t[0]], f[t[1]]], &pts))
                .collect()
        }
        _ => {
            let pts: Vec<[f64; 3]> = cloud.iter().map(|g| t.map(|k| g[k])).collect();
            let qs: Vec<[f64; 3]> = queries.iter().map(|f| t.map(|k| f[k])).collect();
            let mut best = vec![usize::MAX; qs.len()];
            let mut proj = vec![0.0; pts.len()];
            for u in directions {
                for (p, y) in proj.iter_mut().zip(&pts) {
                    *p = project(y, u);
                }
                proj.sort_unstable_by(f64::total_cmp);
                for (b, q) in best.iter_mut().zip(&qs) {
                    *b = (*b).min(depth_sorted(project(q, u), &proj));
                }
            }
            best
        }
    }
}

fn check_order(j: usize) -> Result<()> {
    if (1..=3).contains(&j) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("depth order {j} not in 1..=3")))
    }
}

fn integrated(
    queries: &[&[f64]],
    sample: &FunctionalSample,
    j: usize,
    opts: &DepthOptions,
) -> Result<Vec<f64>> {
    check_order(j)?;
    if j == 3 && opts.directions == 0 {
        return Err(Error::InvalidInput("order 3 needs at least one direction".into()));
    }
    let m = sample.args.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty argument grid".into()));
    }
    let tuples = argument_tuples(m, j, opts);
    if tuples.is_empty() {
        return Err(Error::InvalidInput("no argument tuples drawn".into()));
    }
    let directions = if j == 3 {
        random_directions(opts.directions, opts.seed ^ 0x5eed_d1ec)
    } else {
        Vec::new()
    };
    let per_tuple =
        par::map_range(tuples.len(), |k| tuple_depths(queries, sample, j, &tuples[k], &directions));
    let mut totals = vec![0u64; queries.len()];
    for row in &per_tuple {
        for (s, &c) in totals.iter_mut().zip(row) {
            *s += c as u64;
        }
    }
    let denom = (sample.len() as u64 * tuples.len() as u64) as f64;
    Ok(totals.into_iter().map(|s| s as f64 / denom).collect())
}

/// Order-`j` integrated depth of `f` relative to `sample`.
pub fn integrated_depth(
    f: &SummaryCurve,
    sample: &FunctionalSample,
    j: usize,
    opts: &DepthOptions,
) -> Result<f64> {
    if f.args != sample.args {
        return Err(Error::GridMismatch);
    }
    Ok(integrated(&[&f.values], sample, j, opts)?[0])
}

/// Order-`j` integrated depth of every sample curve relative to the sample.
/// The same argument tuples are used for all curves.
pub fn sample_depths(sample: &FunctionalSample, j: usize, opts: &DepthOptions) -> Result<Vec<f64>> {
    let queries: Vec<&[f64]> = sample.curves().collect();
    integrated(&queries, sample, j, opts)
}

/// Outlier class of a curve; the lowest flagged order wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutlierOrder {
    None,
    First,
    Second,
    Third,
}

impl OutlierOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::First => "1",
            Self::Second => "2",
            Self::Third => "3",
        }
    }

    pub fn is_outlier(&self) -> bool {
        *self != Self::None
    }
}

impl fmt::Display for OutlierOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveOutlier {
    pub label: String,
    pub depth1: f64,
    pub depth2: f64,
    pub depth3: f64,
    pub order: OutlierOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub alpha: f64,
    pub curves: Vec<CurveOutlier>,
}

impl OutlierReport {
    pub fn order_of(&self, label: &str) -> Option<OutlierOrder> {
        self.curves.iter().find(|c| c.label == label).map(|c| c.order)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &CurveOutlier> + '_ {
        self.curves.iter().filter(|c| c.order.is_outlier())
    }
}

/// Type-7 sample quantile of ascending data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Flags values strictly below the lower boxplot fence `Q1 - 1.5 IQR`.
fn below_fence(values: &[f64]) -> Vec<bool> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q1, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.75));
    let fence = q1 - 1.5 * (q3 - q1);
    values.iter().map(|&v| v < fence).collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}

/// Order-1 outliers are the curves whose `FD_1` is among the `ceil(alpha n)`
/// smallest, ties at the threshold included. Orders 2 and 3 apply the
/// boxplot lower fence to `FD_2 / FD_1` and `FD_3 / FD_2`, which isolates
/// the loss of depth that only appears in joint values.
pub fn detect_outliers(
    sample: &FunctionalSample,
    alpha: f64,
    opts: &DepthOptions,
) -> Result<OutlierReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha {alpha} not in (0, 1)")));
    }
    let n = sample.len();
    if n < 5 {
        return Err(Error::InsufficientSample(format!("{n} curves, need at least 5")));
    }
    let d1 = sample_depths(sample, 1, opts)?;
    let d2 = sample_depths(sample, 2, opts)?;
    let d3 = sample_depths(sample, 3, opts)?;

    let k = ((alpha * n as f64).ceil() as usize).clamp(1, n);
    let mut sorted = d1.clone();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[k - 1];
    let r2: Vec<f64> = d2.iter().zip(&d1).map(|(&a, &b)| ratio(a, b)).collect();
    let r3: Vec<f64> = d3.iter().zip(&d2).map(|(&a, &b)| ratio(a, b)).collect();
    let (f2, f3) = (below_fence(&r2), below_fence(&r3));

    let curves = (0..n)
        .map(|i| {
            let order = if d1[i] <= threshold {
                OutlierOrder::First
            } else if f2[i] {
                OutlierOrder::Second
            } else if f3[i] {
                OutlierOrder::Third
            } else {
                OutlierOrder::None
            };
            CurveOutlier {
                label: sample.labels[i].clone(),
                depth1: d1[i],
                depth2: d2[i],
                depth3: d3[i],
                order,
            }
        })
        .collect();
    Ok(OutlierReport { alpha, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn sample(curves: Vec<Vec<f64>>) -> FunctionalSample {
        let m = curves[0].len();
        FunctionalSample::from_values((0..m).map(|k| k as f64).collect(), curves, CurveKind::Custom)
            .unwrap()
    }

    /// Fullest open halfplane through `x`, found by rotating boundaries onto
    /// each point and tilting towards whichever ray on the line is fuller.
    fn brute_depth_2d(x: [f64; 2], cloud: &[[f64; 2]]) -> usize {
        let v: Vec<[f64; 2]> = cloud
            .iter()
            .map(|p| [p[0] - x[0], p[1] - x[1]])
            .filter(|d| *d != [0.0, 0.0])
            .collect();
        let mut best = 0;
        for &a in &v {
            for side in [1.0, -1.0] {
                let strict = v.iter().filter(|&&b| side * cross(a, b) > 0.0).count();
                let on = |s: f64| {
                    v.iter()
                        .filter(|&&b| cross(a, b) == 0.0 && s * dot(a, b) > 0.0)
                        .count()
                };
                best = best.max(strict + on(1.0).max(on(-1.0)));
            }
        }
        cloud.len() - best
    }

    #[test]
    fn one_dimensional_examples() {
        let cloud = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(halfspace_depth(&[2.0], &cloud).unwrap(), 2.0 / 3.0);
        assert_eq!(halfspace_depth(&[9.0], &cloud).unwrap(), 0.0);
        let far = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(halfspace_depth(&[5.0, 5.0], &far).unwrap(), 0.0);
        assert!(matches!(halfspace_depth(&[0.0], &[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn planar_depth_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            // Small integer coordinates force collinear and repeated points.
            let span = if trial % 2 == 0 { 4 } else { 1000 };
            let cloud: Vec<[f64; 2]> = (0..10)
                .map(|_| [rng.random_range(0..span) as f64, rng.random_range(0..span) as f64])
                .collect();
            let x = if trial % 3 == 0 {
                [rng.random_range(0..span) as f64, rng.random_range(0..span) as f64]
            } else {
                cloud[trial % 10]
            };
            assert_eq!(depth_2d_count(x, &cloud), brute_depth_2d(x, &cloud), "{cloud:?} {x:?}");
        }
    }

    #[test]
    fn identical_and_constant_samples() {
        let s = sample(vec![vec![1.0, 4.0, 2.0]; 6]);
        let opts = DepthOptions::default();
        for j in 1..=3 {
            assert!(sample_depths(&s, j, &opts).unwrap().iter().all(|&d| d == 1.0));
        }
        let s = sample((1..=5).map(|c| vec![c as f64; 7]).collect());
        let f = SummaryCurve::new(s.args().to_vec(), vec![3.0; 7], CurveKind::Custom).unwrap();
        assert_eq!(integrated_depth(&f, &s, 1, &opts).unwrap(), 3.0 / 5.0);
        let g = SummaryCurve::new(vec![0.0, 1.0], vec![3.0; 2], CurveKind::Custom).unwrap();
        assert!(matches!(integrated_depth(&g, &s, 1, &opts), Err(Error::GridMismatch)));
    }

    #[test]
    fn second_order_matches_exhaustive_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = sample(
            (0..5)
                .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
        );
        let got = sample_depths(&s, 2, &DepthOptions::default()).unwrap();
        let cloud_at = |a: usize, b: usize| -> Vec<Vec<f64>> {
            s.curves().map(|g| vec![g[a], g[b]]).collect()
        };
        for (i, &d) in got.iter().enumerate() {
            let f = s.values(i);
            let mut total = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    total += halfspace_depth(&[f[a], f[b]], &cloud_at(a, b)).unwrap();
                }
            }
            assert!((d - total / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_depth_on_tiny_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cloud: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        for x in &cloud {
            let d = halfspace_depth(x, &cloud).unwrap();
            assert!((1.0 / 8.0..=0.5).contains(&d));
        }
        // Centre of the octahedron: every generic halfspace through it holds
        // one vertex of each opposite pair.
        let vertices: Vec<Vec<f64>> = (0..6)
            .map(|k| {
                let mut v = vec![0.0; 3];
                v[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect();
        assert_eq!(halfspace_depth(&[0.0; 3], &vertices).unwrap(), 0.5);
        assert_eq!(halfspace_depth(&[2.0, 0.0, 0.0], &vertices).unwrap(), 0.0);
    }

    #[test]
    fn magnitude_outlier_is_first_order() {
        let mut curves = vec![vec![0.0; 20]; 30];
        curves.push(vec![10.0; 20]);
        let r = detect_outliers(&sample(curves), 0.05, &DepthOptions::default()).unwrap();
        assert_eq!(r.curves[30].order, OutlierOrder::First);
        assert!(r.curves[30].depth1 < r.curves[0].depth1);
    }

    #[test]
    fn reversed_line_is_shape_outlier() {
        // Lines t + c with integer offsets spread over the range, and one
        // decreasing line crossing the middle of the band.
        let mut curves: Vec<Vec<f64>> = (-15..15)
            .map(|c| (0..20).map(|t| (t + c) as f64).collect())
            .collect();
        curves.push((0..20).map(|t| (19 - t) as f64 - 10.0).collect());
        let r = detect_outliers(&sample(curves), 0.05, &DepthOptions::default()).unwrap();
        let o = r.curves[30].order;
        assert!(matches!(o, OutlierOrder::Second | OutlierOrder::Third), "{o:?}");
        assert!(r.curves[30].depth2 < 0.25 * r.curves[30].depth1);
    }

    #[test]
    fn small_samples_and_bad_alpha_rejected() {
        let s = sample(vec![vec![0.0, 1.0]; 4]);
        assert!(matches!(
            detect_outliers(&s, 0.05, &DepthOptions::default()),
            Err(Error::InsufficientSample(_))
        ));
        let s = sample(vec![vec![0.0, 1.0]; 6]);
        assert!(detect_outliers(&s, 1.0, &DepthOptions::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn depth_bounds_and_affine_invariance(
            cloud in prop::collection::vec(-50i32..50, 1..30),
            a in prop::sample::select(vec![-3.0, -1.0, 0.5, 2.0]),
            b in -5i32..5,
        ) {
            let c: Vec<Vec<f64>> = cloud.iter().map(|&v| vec![v as f64]).collect();
            let n = c.len() as f64;
            for y in &c {
                let d = halfspace_depth(y, &c).unwrap();
                prop_assert!(d >= 1.0 / n && d <= 1.0);
                let t: Vec<Vec<f64>> = c.iter().map(|v| vec![a * v[0] + b as f64]).collect();
                let dt = halfspace_depth(&[a * y[0] + b as f64], &t).unwrap();
                prop_assert_eq!(d, dt);
            }
        }

        #[test]
        fn sample_order_does_not_matter(
            seed in 0u64..1000,
            perm_seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let curves: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..6).map(|_| rng.random_range(0..5) as f64).collect())
                .collect();
            let mut order: Vec<usize> = (0..8).collect();
            let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
            for i in (1..8).rev() {
                order.swap(i, prng.random_range(0..=i));
            }
            let opts = DepthOptions { draws: 30, directions: 16, seed: 9 };
            let s = sample(curves.clone());
            let p = sample(order.iter().map(|&i| curves[i].clone()).collect());
            // Same grid but stretched arguments: tuples are drawn by index.
            let stretched = FunctionalSample::from_values(
                (0..6).map(|k| (k as f64).powi(3)).collect(), curves.clone(), CurveKind::Custom,
            ).unwrap();
            for j in 1..=3 {
                let d = sample_depths(&s, j, &opts).unwrap();
                let dp = sample_depths(&p, j, &opts).unwrap();
                for (k, &i) in order.iter().enumerate() {
                    prop_assert_eq!(d[i], dp[k]);
                }
                prop_assert_eq!(&d, &sample_depths(&stretched, j, &opts).unwrap());
                prop_assert!(d.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            let r = detect_outliers(&s, 0.1, &opts).unwrap();
            let rp = detect_outliers(&p, 0.1, &opts).unwrap();
            for (k, &i) in order.iter().enumerate() {
                prop_assert_eq!(r.curves[i].order, rp.curves[k].order);
            }
        }
    }
}
