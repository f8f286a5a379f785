//! Classical random-set summaries estimated from a single raster: the
//! extended empty-space function and the capacity functional on squares.

use crate::distance::{chessboard_dt, ScalarField};
use crate::error::{Error, Result};
use crate::raster::BinaryRaster;
use crate::summaries::{check_grid, uniform_grid, CurveKind, SummaryCurve};

/// Empirical distribution function of the signed distance values.
pub fn extended_empty_space(field: &ScalarField, r_grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(r_grid)?;
    let mut sorted = field.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let values = r_grid
        .iter()
        .map(|&r| sorted.partition_point(|&v| v <= r) as f64 / n)
        .collect();
    SummaryCurve::new(r_grid.to_vec(), values, CurveKind::Esf)
}

/// Capacity functional on centred axis-aligned squares of side `r`, with
/// minus-sampling: only pixels whose `r`-square lies inside the window count.
///
/// The square centred on a pixel covers the pixel centres within `r/2` in
/// both axes; a pixel is eligible when that whole footprint lies on the
/// raster, so eligibility and hits change at the same radii.
pub fn capacity_on_squares(raster: &BinaryRaster, r_grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(r_grid)?;
    let w = raster.window();
    let half_limit = 0.5 * w.width.min(w.height);
    if let Some(&r) = r_grid.iter().find(|&&r| r < 0.0 || r / 2.0 > half_limit) {
        return Err(Error::InsufficientWindow { r });
    }
    let (nx, ny) = (raster.nx(), raster.ny());
    if raster.count_foreground() == 0 {
        return SummaryCurve::new(r_grid.to_vec(), vec![0.0; r_grid.len()], CurveKind::Cf);
    }
    let d = chessboard_dt(raster.cells(), nx, ny);
    let s = raster.spacing();
    const EPS: f64 = 1e-9;
    let mut values = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        // Footprint half-width in whole pixels.
        let h = (r / (2.0 * s) + EPS).floor() as usize;
        let mut hits = 0usize;
        let mut eligible = 0usize;
        if 2 * h < nx && 2 * h < ny {
            for j in h..ny - h {
                for i in h..nx - h {
                    eligible += 1;
                    if d[j * nx + i] as usize <= h {
                        hits += 1;
                    }
                }
            }
        }
        values.push(if eligible == 0 {
            0.0
        } else {
            hits as f64 / eligible as f64
        });
    }
    SummaryCurve::new(r_grid.to_vec(), values, CurveKind::Cf)
}

/// Default capacity grid: 100 points from 0 to a quarter of the window side.
pub fn default_cf_grid(raster: &BinaryRaster) -> Vec<f64> {
    let w = raster.window();
    uniform_grid(0.0, 0.25 * w.width.min(w.height), 100)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::signed_distance;
    use crate::raster::{area_fraction, rasterize, Grain, GrainConfiguration, Window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raster(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BinaryRaster {
        let w = Window::square(n as f64).unwrap();
        let cells = (0..n * n).map(|_| rng.random_bool(p)).collect();
        BinaryRaster::new(w, n, n, cells).unwrap()
    }

    #[test]
    fn esf_limits_and_disc_identity() {
        let w = Window::square(10.0).unwrap();
        let cfg = GrainConfiguration::new(w, vec![Grain::disc(4.0, 5.0, 2.2)]);
        let r = rasterize(&cfg, 80).unwrap();
        let f = signed_distance(&r).unwrap();
        let grid = [f.min() - 1.0, 0.0, f.max()];
        let c = extended_empty_space(&f, &grid).unwrap();
        assert_eq!(c.values[0], 0.0);
        assert_eq!(c.values[1], area_fraction(&r));
        assert_eq!(c.values[2], 1.0);
    }

    #[test]
    fn capacity_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_raster(&mut rng, 20, 0.1);
        let c = capacity_on_squares(&r, &[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(c.values[0], area_fraction(&r));
        let full = BinaryRaster::filled(Window::square(20.0).unwrap(), 20, true).unwrap();
        let c = capacity_on_squares(&full, &[0.0, 2.0, 10.0]).unwrap();
        assert!(c.values.iter().all(|&v| v == 1.0));
        let empty = BinaryRaster::filled(Window::square(20.0).unwrap(), 20, false).unwrap();
        let c = capacity_on_squares(&empty, &[0.0, 2.0]).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            capacity_on_squares(&full, &[0.0, 21.0]),
            Err(Error::InsufficientWindow { .. })
        ));
    }

    #[test]
    fn capacity_matches_square_placement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let n = 32;
            let p = rng.random_range(0.005..0.05);
            let r = random_raster(&mut rng, n, p);
            for side in [2usize, 4] {
                let c = capacity_on_squares(&r, &[side as f64]).unwrap();
                // Brute force: the closed square of side `side` centred on
                // pixel (i, j) covers centres within side/2 in both axes.
                let h = side as i64 / 2;
                let mut hits = 0;
                let mut total = 0;
                for j in h..n as i64 - h {
                    for i in h..n as i64 - h {
                        total += 1;
                        let mut hit = false;
                        for b in j - h..=j + h {
                            for a in i - h..=i + h {
                                hit |= r.get(a as usize, b as usize);
                            }
                        }
                        hits += hit as usize;
                    }
                }
                assert_eq!(c.values[0], hits as f64 / total as f64);
            }
        }
    }

    #[test]
    fn curves_are_monotone_cdfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let r = random_raster(&mut rng, 24, 0.08);
            if r.count_foreground() == 0 {
                continue;
            }
            let cf = capacity_on_squares(&r, &default_cf_grid(&r)).unwrap();
            assert_eq!(cf.values[0], area_fraction(&r));
            assert!(cf.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let f = signed_distance(&r).unwrap();
            let esf = extended_empty_space(&f, &uniform_grid(f.min(), f.max(), 50)).unwrap();
            assert!(esf.values.windows(2).all(|w| w[0] <= w[1]));
            // Quantile round trip on the empirical CDF.
            let mut sorted = f.values().to_vec();
            sorted.sort_by(f64::total_cmp);
            for p in [0.1, 0.25, 0.5, 0.9] {
                let qv = sorted[((p * sorted.len() as f64).ceil() as usize).max(1) - 1];
                let c = extended_empty_space(&f, &[qv]).unwrap();
                assert!(c.values[0] >= p);
            }
        }
    }
}
