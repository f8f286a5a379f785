//! Rank-based global envelope test over a pooled sample of summary curves.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depth::FunctionalSample;
use crate::error::{Error, Result};
use crate::summaries::SummaryCurve;

/// How curves are ordered from most to least extreme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankOrdering {
    /// The extreme rank alone.
    Extreme,
    /// Extreme rank with ties broken by the remaining pointwise ranks in
    /// increasing order (extreme rank length).
    #[default]
    Erl,
}

impl fmt::Display for RankOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Extreme => "extreme",
            Self::Erl => "erl",
        })
    }
}

impl FromStr for RankOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "extreme" | "rank" => Ok(Self::Extreme),
            "erl" => Ok(Self::Erl),
            _ => Err(Error::Parse(format!("unknown rank ordering '{s}'"))),
        }
    }
}

/// Pointwise two-sided ranks, curve-major: at each argument the smaller of
/// the rank from below and from above, tied values sharing the smaller rank.
pub fn pointwise_ranks(curves: &[&[f64]]) -> Vec<Vec<usize>> {
    let n = curves.len();
    let m = curves.first().map_or(0, |c| c.len());
    let mut ranks = vec![vec![0; m]; n];
    let mut col = vec![0.0; n];
    for t in 0..m {
        for (c, g) in col.iter_mut().zip(curves) {
            *c = g[t];
        }
        col.sort_by(f64::total_cmp);
        for (i, g) in curves.iter().enumerate() {
            let v = g[t];
            let below = 1 + col.partition_point(|&y| y < v);
            let above = 1 + n - col.partition_point(|&y| y <= v);
            ranks[i][t] = below.min(above);
        }
    }
    ranks
}

fn check_pool(curves: &[&[f64]]) -> Result<()> {
    if curves.len() < 3 {
        return Err(Error::InsufficientSample(format!(
            "{} curves, need at least 3",
            curves.len()
        )));
    }
    Ok(())
}

/// Extreme rank of every curve: the minimum of its pointwise ranks.
pub fn extreme_ranks(sample: &FunctionalSample) -> Result<Vec<usize>> {
    let curves: Vec<&[f64]> = sample.curves().collect();
    check_pool(&curves)?;
    Ok(pointwise_ranks(&curves)
        .into_iter()
        .map(|r| r.into_iter().min().unwrap_or(1))
        .collect())
}

/// Sort keys: lexicographically smaller means more extreme.
fn extremeness_keys(curves: &[&[f64]], ordering: RankOrdering) -> Vec<Vec<usize>> {
    pointwise_ranks(curves)
        .into_iter()
        .map(|mut r| match ordering {
            RankOrdering::Extreme => vec![r.into_iter().min().unwrap_or(1)],
            RankOrdering::Erl => {
                r.sort_unstable();
                r
            }
        })
        .collect()
}

/// Outcome of a global envelope test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    /// Share of pooled curves at least as extreme as the observed one.
    pub p_value: f64,
    /// Share of pooled curves strictly more extreme (may be 0).
    pub p_strict: f64,
    pub alpha: f64,
    pub reject: bool,
    /// Extreme rank of the observed curve in the pool.
    pub observed_rank: usize,
    pub ordering: RankOrdering,
    pub n_sims: usize,
    pub lower: SummaryCurve,
    pub upper: SummaryCurve,
}

impl EnvelopeResult {
    /// Arguments where `curve` leaves the envelope.
    pub fn outside(&self, curve: &SummaryCurve) -> Vec<bool> {
        curve
            .values
            .iter()
            .zip(self.lower.values.iter().zip(&self.upper.values))
            .map(|(&v, (&lo, &hi))| v < lo - 1e-9 || v > hi + 1e-9)
            .collect()
    }
}

/// Global envelope test with the default extreme rank length ordering.
pub fn global_envelope_test(
    observed: &SummaryCurve,
    sims: &FunctionalSample,
    alpha: f64,
) -> Result<EnvelopeResult> {
    global_envelope_test_with(observed, sims, alpha, RankOrdering::default())
}

/// Pools `observed` (first) with `sims`, computes the p-value
/// `#{i: curve i at least as extreme as observed} / (n + 1)` and the
/// `1 - alpha` envelope spanned by the curves whose own p-value exceeds
/// `alpha`. The observed curve is rejected exactly when it is not one of
/// them.
pub fn global_envelope_test_with(
    observed: &SummaryCurve,
    sims: &FunctionalSample,
    alpha: f64,
    ordering: RankOrdering,
) -> Result<EnvelopeResult> {
    if observed.args != sims.args() {
        return Err(Error::GridMismatch);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha {alpha} not in (0, 1)")));
    }
    let n = sims.len();
    let pool = (n + 1) as f64;
    if alpha * pool < 1.0 - 1e-9 {
        return Err(Error::InsufficientSimulations { n, alpha });
    }
    let curves: Vec<&[f64]> = std::iter::once(observed.values.as_slice())
        .chain(sims.curves())
        .collect();
    check_pool(&curves)?;

    let keys = extremeness_keys(&curves, ordering);
    let at_least_as_extreme = |i: usize| keys.iter().filter(|k| *k <= &keys[i]).count();
    let significant = |count: usize| count as f64 <= alpha * pool + 1e-9;

    let count = at_least_as_extreme(0);
    let strict = keys.iter().filter(|k| k.cmp(&&keys[0]) == Ordering::Less).count();
    let central: Vec<usize> = (0..curves.len())
        .filter(|&i| !significant(at_least_as_extreme(i)))
        .collect();

    let m = observed.len();
    let mut lower = vec![f64::INFINITY; m];
    let mut upper = vec![f64::NEG_INFINITY; m];
    for &i in &central {
        for t in 0..m {
            lower[t] = lower[t].min(curves[i][t]);
            upper[t] = upper[t].max(curves[i][t]);
        }
    }
    let observed_rank = pointwise_ranks(&curves)[0].iter().copied().min().unwrap_or(1);
    Ok(EnvelopeResult {
        p_value: count as f64 / pool,
        p_strict: strict as f64 / pool,
        alpha,
        reject: significant(count),
        observed_rank,
        ordering,
        n_sims: n,
        lower: SummaryCurve::new(observed.args.clone(), lower, observed.kind)?,
        upper: SummaryCurve::new(observed.args.clone(), upper, observed.kind)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::CurveKind;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(curves: Vec<Vec<f64>>) -> FunctionalSample {
        let m = curves[0].len();
        FunctionalSample::from_values((0..m).map(|k| k as f64).collect(), curves, CurveKind::Custom)
            .unwrap()
    }

    fn curve(values: Vec<f64>) -> SummaryCurve {
        let m = values.len();
        SummaryCurve::new((0..m).map(|k| k as f64).collect(), values, CurveKind::Custom).unwrap()
    }

    fn brute_extreme_ranks(curves: &[Vec<f64>]) -> Vec<usize> {
        curves
            .iter()
            .map(|f| {
                (0..f.len())
                    .map(|t| {
                        let below = 1 + curves.iter().filter(|g| g[t] < f[t]).count();
                        let above = 1 + curves.iter().filter(|g| g[t] > f[t]).count();
                        below.min(above)
                    })
                    .min()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        let s = sample(vec![vec![1.0; 4], vec![2.0; 4], vec![3.0; 4]]);
        assert_eq!(extreme_ranks(&s).unwrap(), vec![1, 2, 1]);
        let s = sample(vec![vec![0.5, 1.0]; 5]);
        assert_eq!(extreme_ranks(&s).unwrap(), vec![1; 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let curves: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..12).map(|_| rng.random_range(0..6) as f64).collect())
                .collect();
            assert_eq!(extreme_ranks(&sample(curves.clone())).unwrap(), brute_extreme_ranks(&curves));
        }
        assert!(extreme_ranks(&sample(vec![vec![0.0]; 2])).is_err());
    }

    #[test]
    fn identical_and_dominating_observations() {
        let sims = sample(vec![vec![1.0, 2.0, 3.0]; 19]);
        for ordering in [RankOrdering::Extreme, RankOrdering::Erl] {
            let r = global_envelope_test_with(&curve(vec![1.0, 2.0, 3.0]), &sims, 0.05, ordering)
                .unwrap();
            assert_eq!(r.p_value, 1.0);
            assert!(!r.reject);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sims = sample(
            (0..49)
                .map(|_| (0..30).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect(),
        );
        let above = curve(vec![2.0; 30]);
        let r = global_envelope_test(&above, &sims, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0 / 50.0);
        assert!(r.reject);
        assert!(r.outside(&above).iter().all(|&o| o));
        // The bare extreme rank ties the observation with every curve that is
        // extreme at some argument.
        let r = global_envelope_test_with(&above, &sims, 0.05, RankOrdering::Extreme).unwrap();
        let mut pooled: Vec<Vec<f64>> = vec![above.values.clone()];
        pooled.extend(sims.curves().map(<[f64]>::to_vec));
        let ones = extreme_ranks(&sample(pooled)).unwrap().iter().filter(|&&r| r == 1).count();
        assert_eq!(r.p_value, ones as f64 / 50.0);
        assert_eq!(r.observed_rank, 1);
    }

    #[test]
    fn too_few_simulations() {
        let sims = sample(vec![vec![0.0, 1.0]; 10]);
        assert!(matches!(
            global_envelope_test(&curve(vec![0.0, 1.0]), &sims, 0.05),
            Err(Error::InsufficientSimulations { n: 10, .. })
        ));
        let sims = sample(vec![vec![0.0, 1.0]; 19]);
        assert!(global_envelope_test(&curve(vec![0.0, 1.0]), &sims, 0.05).is_ok());
        assert!(matches!(
            global_envelope_test(&curve(vec![0.0, 1.0, 2.0]), &sims, 0.05),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn exchangeable_rejection_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut rejected = 0;
        for _ in 0..400 {
            // Random walks share structure across arguments.
            let walk = |rng: &mut ChaCha8Rng| {
                let mut acc = 0.0;
                (0..40)
                    .map(|_| {
                        acc += rng.random_range(-1.0..1.0);
                        acc
                    })
                    .collect::<Vec<f64>>()
            };
            let obs = curve(walk(&mut rng));
            let sims = sample((0..50).map(|_| walk(&mut rng)).collect());
            rejected += global_envelope_test(&obs, &sims, 0.05).unwrap().reject as usize;
        }
        let rate = rejected as f64 / 400.0;
        assert!((0.01..=0.10).contains(&rate), "{rate}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn envelope_properties(
            seed in 0u64..10_000,
            n in 19usize..40,
            levels in prop::sample::select(vec![3u32, 0]),
            alpha in prop::sample::select(vec![0.05, 0.1, 0.2]),
            extreme in prop::bool::ANY,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..15)
                    .map(|_| {
                        if levels == 3 {
                            rng.random_range(0..3) as f64
                        } else {
                            rng.random_range(0.0..1.0)
                        }
                    })
                    .collect()
            };
            let obs = curve(draw(&mut rng));
            let sims: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
            let ordering = if extreme { RankOrdering::Extreme } else { RankOrdering::Erl };
            let r = global_envelope_test_with(&obs, &sample(sims.clone()), alpha, ordering).unwrap();

            let k = (r.p_value * (n + 1) as f64).round();
            prop_assert!((k - r.p_value * (n + 1) as f64).abs() < 1e-9 && k >= 1.0);
            prop_assert!(r.p_strict < r.p_value);
            prop_assert!(r.lower.values.iter().zip(&r.upper.values).all(|(a, b)| a <= b));

            // Tie-free values make the ordering strict enough for both modes;
            // the pure extreme rank is consistent even with ties.
            if extreme || levels == 0 {
                let exits = r.outside(&obs).iter().any(|&o| o);
                prop_assert_eq!(r.reject, exits);
            }

            let looser = global_envelope_test_with(&obs, &sample(sims.clone()), alpha + 0.1, ordering).unwrap();
            prop_assert!(!r.reject || looser.reject);

            let mut rev = sims.clone();
            rev.reverse();
            let rr = global_envelope_test_with(&obs, &sample(rev), alpha, ordering).unwrap();
            prop_assert_eq!(rr.p_value, r.p_value);
            prop_assert_eq!(rr.lower, r.lower);
        }
    }
}
