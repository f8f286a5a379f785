//! Repeated-simulation experiments: intruder detection by functional depth
//! and goodness of fit by global envelope tests.

use serde::{Deserialize, Serialize};

use crate::depth::{detect_outliers, DepthOptions, FunctionalSample, OutlierOrder};
use crate::envelope::{global_envelope_test_with, RankOrdering};
use crate::error::{Error, Result};
use crate::par;
use crate::pipeline::{summary_curves, Analysis, GridSettings};
use crate::raster::Window;
use crate::simulate::{realisation_rng, ModelSpec};
use crate::summaries::CurveKind;

/// Generator of realisation `k` within repetition `rep`.
fn stream(seed: u64, rep: usize, k: usize) -> rand_chacha::ChaCha8Rng {
    realisation_rng(seed, ((rep as u64) << 32) | k as u64)
}

fn simulate_and_analyze(
    model: &ModelSpec,
    window: &Window,
    resolution: usize,
    seed: u64,
    rep: usize,
    k: usize,
) -> Result<Analysis> {
    let config = model.simulate(window, &mut stream(seed, rep, k))?;
    Analysis::of_config(&config, resolution)
}

fn describe<E: std::borrow::Borrow<Error>>(e: E) -> String {
    let e = e.borrow();
    format!("{}: {e}", e.kind())
}

fn check_summaries(summaries: &[CurveKind]) -> Result<()> {
    if summaries.is_empty() {
        return Err(Error::InvalidInput("select at least one summary".into()));
    }
    if summaries.contains(&CurveKind::Custom) {
        return Err(Error::InvalidInput("custom curves cannot be simulated".into()));
    }
    Ok(())
}

/// Intruder detection: a sample of `sample_size` null realisations plus one
/// intruder, repeated `reps` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierStudy {
    pub null: ModelSpec,
    pub intruder: ModelSpec,
    pub summaries: Vec<CurveKind>,
    pub sample_size: usize,
    pub reps: usize,
    pub alpha: f64,
    pub resolution: usize,
    pub window: Window,
    pub seed: u64,
    pub grids: GridSettings,
    pub depth: DepthOptions,
}

/// One repetition for one summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierRecord {
    pub rep: usize,
    pub summary: CurveKind,
    /// `None` when the repetition failed.
    pub intruder_order: Option<OutlierOrder>,
    /// Null curves flagged at any order.
    pub null_flagged: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierCell {
    pub summary: CurveKind,
    pub reps: usize,
    pub failures: usize,
    pub detected: usize,
    /// Intruder detections at orders 1, 2 and 3.
    pub by_order: [usize; 3],
    pub mean_null_flagged: f64,
}

impl OutlierCell {
    /// Share of successful repetitions in which the intruder was flagged.
    pub fn detection_rate(&self) -> f64 {
        let ok = self.reps - self.failures;
        if ok == 0 {
            0.0
        } else {
            self.detected as f64 / ok as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierStudyResult {
    pub cells: Vec<OutlierCell>,
    pub records: Vec<OutlierRecord>,
}

impl OutlierStudy {
    pub fn new(null: ModelSpec, intruder: ModelSpec, window: Window) -> Self {
        Self {
            null,
            intruder,
            summaries: vec![CurveKind::Apf0],
            sample_size: 30,
            reps: 100,
            alpha: 0.05,
            resolution: 400,
            window,
            seed: 0,
            grids: GridSettings::default(),
            depth: DepthOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_summaries(&self.summaries)?;
        self.null.validate()?;
        self.intruder.validate()?;
        if self.sample_size < 4 {
            return Err(Error::InsufficientSample(format!(
                "{} null curves plus the intruder",
                self.sample_size
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.reps == 0 || self.resolution < 2 {
            return Err(Error::InvalidInput("need reps >= 1 and resolution >= 2".into()));
        }
        Ok(())
    }

    /// Runs one repetition; the intruder is the last realisation.
    pub fn run_rep(&self, rep: usize) -> Vec<OutlierRecord> {
        let n = self.sample_size;
        let analyses: Result<Vec<Analysis>> = (0..=n)
            .map(|k| {
                let model = if k == n { &self.intruder } else { &self.null };
                simulate_and_analyze(model, &self.window, self.resolution, self.seed, rep, k)
            })
            .collect();
        self.summaries
            .iter()
            .map(|&summary| {
                let outcome = analyses.as_ref().map_err(describe).and_then(|a| {
                    self.detect(summary, a, rep).map_err(describe)
                });
                match outcome {
                    Ok((order, null_flagged)) => OutlierRecord {
                        rep,
                        summary,
                        intruder_order: Some(order),
                        null_flagged,
                        error: None,
                    },
                    Err(e) => OutlierRecord {
                        rep,
                        summary,
                        intruder_order: None,
                        null_flagged: 0,
                        error: Some(e),
                    },
                }
            })
            .collect()
    }

    fn detect(
        &self,
        summary: CurveKind,
        analyses: &[Analysis],
        rep: usize,
    ) -> Result<(OutlierOrder, usize)> {
        let sample = FunctionalSample::new(summary_curves(summary, analyses, &self.grids)?)?;
        let opts = DepthOptions {
            seed: self.depth.seed.wrapping_add(rep as u64),
            ..self.depth
        };
        let report = detect_outliers(&sample, self.alpha, &opts)?;
        let (nulls, intruder) = report.curves.split_at(self.sample_size);
        let flagged = nulls.iter().filter(|c| c.order.is_outlier()).count();
        Ok((intruder[0].order, flagged))
    }

    pub fn run(&self) -> Result<OutlierStudyResult> {
        self.validate()?;
        let records: Vec<OutlierRecord> = par::map_range(self.reps, |rep| self.run_rep(rep))
            .into_iter()
            .flatten()
            .collect();
        let cells = self
            .summaries
            .iter()
            .map(|&summary| {
                let rs: Vec<&OutlierRecord> =
                    records.iter().filter(|r| r.summary == summary).collect();
                let mut by_order = [0; 3];
                let mut flagged = 0;
                for r in &rs {
                    match r.intruder_order {
                        Some(OutlierOrder::First) => by_order[0] += 1,
                        Some(OutlierOrder::Second) => by_order[1] += 1,
                        Some(OutlierOrder::Third) => by_order[2] += 1,
                        _ => {}
                    }
                    flagged += r.null_flagged;
                }
                let failures = rs.iter().filter(|r| r.error.is_some()).count();
                let ok = rs.len() - failures;
                OutlierCell {
                    summary,
                    reps: rs.len(),
                    failures,
                    detected: by_order.iter().sum(),
                    by_order,
                    mean_null_flagged: if ok == 0 { 0.0 } else { flagged as f64 / ok as f64 },
                }
            })
            .collect();
        Ok(OutlierStudyResult { cells, records })
    }
}

/// Goodness of fit: one realisation of the alternative tested against `sims`
/// null realisations, repeated `reps` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofStudy {
    pub null: ModelSpec,
    pub alternative: ModelSpec,
    pub summaries: Vec<CurveKind>,
    pub sims: usize,
    pub reps: usize,
    pub alpha: f64,
    pub ordering: RankOrdering,
    pub resolution: usize,
    pub window: Window,
    pub seed: u64,
    pub grids: GridSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofRecord {
    pub rep: usize,
    pub summary: CurveKind,
    /// `None` when the repetition failed.
    pub p_value: Option<f64>,
    pub observed_rank: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofCell {
    pub summary: CurveKind,
    pub reps: usize,
    pub failures: usize,
    /// Repetitions with `p <= 0.05`.
    pub rejected_05: usize,
    /// Repetitions with `p <= 0.1`.
    pub rejected_10: usize,
    /// Repetitions with `p <= alpha`.
    pub rejected_alpha: usize,
}

impl GofCell {
    fn rate(&self, count: usize) -> f64 {
        let ok = self.reps - self.failures;
        if ok == 0 {
            0.0
        } else {
            count as f64 / ok as f64
        }
    }

    pub fn rejection_rate_05(&self) -> f64 {
        self.rate(self.rejected_05)
    }

    pub fn rejection_rate_10(&self) -> f64 {
        self.rate(self.rejected_10)
    }

    pub fn rejection_rate(&self) -> f64 {
        self.rate(self.rejected_alpha)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofStudyResult {
    pub cells: Vec<GofCell>,
    pub records: Vec<GofRecord>,
}

impl GofStudy {
    pub fn new(null: ModelSpec, alternative: ModelSpec, window: Window) -> Self {
        Self {
            null,
            alternative,
            summaries: vec![CurveKind::Apf0],
            sims: 50,
            reps: 50,
            alpha: 0.05,
            ordering: RankOrdering::default(),
            resolution: 400,
            window,
            seed: 0,
            grids: GridSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_summaries(&self.summaries)?;
        self.null.validate()?;
        self.alternative.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.alpha * ((self.sims + 1) as f64) < 1.0 - 1e-9 {
            return Err(Error::InsufficientSimulations {
                n: self.sims,
                alpha: self.alpha,
            });
        }
        if self.reps == 0 || self.resolution < 2 {
            return Err(Error::InvalidInput("need reps >= 1 and resolution >= 2".into()));
        }
        Ok(())
    }

    /// Runs one repetition; realisation 0 is the observed one.
    pub fn run_rep(&self, rep: usize) -> Vec<GofRecord> {
        let analyses: Result<Vec<Analysis>> = (0..=self.sims)
            .map(|k| {
                let model = if k == 0 { &self.alternative } else { &self.null };
                simulate_and_analyze(model, &self.window, self.resolution, self.seed, rep, k)
            })
            .collect();
        self.summaries
            .iter()
            .map(|&summary| {
                let outcome = analyses
                    .as_ref()
                    .map_err(describe)
                    .and_then(|a| self.test(summary, a).map_err(describe));
                match outcome {
                    Ok((p, rank)) => GofRecord {
                        rep,
                        summary,
                        p_value: Some(p),
                        observed_rank: Some(rank),
                        error: None,
                    },
                    Err(e) => GofRecord {
                        rep,
                        summary,
                        p_value: None,
                        observed_rank: None,
                        error: Some(e),
                    },
                }
            })
            .collect()
    }

    fn test(&self, summary: CurveKind, analyses: &[Analysis]) -> Result<(f64, usize)> {
        let mut curves = summary_curves(summary, analyses, &self.grids)?;
        let sims = FunctionalSample::new(curves.split_off(1))?;
        let r = global_envelope_test_with(&curves[0], &sims, self.alpha, self.ordering)?;
        Ok((r.p_value, r.observed_rank))
    }

    pub fn run(&self) -> Result<GofStudyResult> {
        self.validate()?;
        let records: Vec<GofRecord> = par::map_range(self.reps, |rep| self.run_rep(rep))
            .into_iter()
            .flatten()
            .collect();
        let cells = self
            .summaries
            .iter()
            .map(|&summary| {
                let rs: Vec<&GofRecord> = records.iter().filter(|r| r.summary == summary).collect();
                let count = |a: f64| {
                    rs.iter()
                        .filter(|r| r.p_value.is_some_and(|p| p <= a + 1e-12))
                        .count()
                };
                GofCell {
                    summary,
                    reps: rs.len(),
                    failures: rs.iter().filter(|r| r.error.is_some()).count(),
                    rejected_05: count(0.05),
                    rejected_10: count(0.1),
                    rejected_alpha: count(self.alpha),
                }
            })
            .collect();
        Ok(GofStudyResult { cells, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{GermSpec, GrainSpec};

    fn boolean(intensity: f64) -> ModelSpec {
        ModelSpec::GermGrain {
            germ: GermSpec::Poisson { intensity },
            grain: GrainSpec::Disc {
                r_min: 0.5,
                r_max: 1.0,
            },
        }
    }

    fn small_window() -> Window {
        Window::square(10.0).unwrap()
    }

    #[test]
    fn outlier_study_aggregates_every_rep() {
        let study = OutlierStudy {
            summaries: vec![CurveKind::Apf0, CurveKind::Esf],
            sample_size: 9,
            reps: 3,
            resolution: 64,
            depth: DepthOptions {
                draws: 200,
                directions: 32,
                seed: 0,
            },
            ..OutlierStudy::new(boolean(0.4), boolean(1.5), small_window())
        };
        let out = study.run().unwrap();
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.cells.len(), 2);
        for cell in &out.cells {
            assert_eq!(cell.reps, 3);
            assert_eq!(cell.failures, 0);
            assert_eq!(cell.detected, cell.by_order.iter().sum::<usize>());
        }
        assert_eq!(out, study.run().unwrap());
    }

    #[test]
    fn failures_are_recorded_not_dropped() {
        // Zero intensity gives empty rasters, which have no signed distance.
        let study = OutlierStudy {
            sample_size: 4,
            reps: 2,
            resolution: 32,
            ..OutlierStudy::new(boolean(0.4), boolean(0.0), small_window())
        };
        let out = study.run().unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.cells[0].failures, 2);
        assert!(out.records.iter().all(|r| r
            .error
            .as_deref()
            .is_some_and(|e| e.contains("degenerate"))));
    }

    #[test]
    fn gof_study_needs_enough_sims() {
        let study = GofStudy {
            sims: 10,
            ..GofStudy::new(boolean(0.4), boolean(0.4), small_window())
        };
        assert!(matches!(
            study.run(),
            Err(Error::InsufficientSimulations { n: 10, .. })
        ));
    }

    #[test]
    fn gof_study_counts_rejections() {
        let study = GofStudy {
            sims: 19,
            reps: 3,
            resolution: 64,
            ..GofStudy::new(boolean(0.4), boolean(1.5), small_window())
        };
        let out = study.run().unwrap();
        let cell = &out.cells[0];
        assert_eq!((cell.reps, cell.failures), (3, 0));
        assert!(cell.rejected_05 <= cell.rejected_10);
        // A much denser alternative is the most extreme curve every time.
        assert_eq!(cell.rejected_05, 3);
        for r in &out.records {
            let p = r.p_value.unwrap();
            assert!(p > 0.0 && p <= 1.0);
        }
    }
}
