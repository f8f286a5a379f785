//! Functional summaries of persistence diagrams: rotated/rescaled diagrams,
//! accumulated persistence functions and support functions of the lift
//! zonotope of the lifetime-weighted diagram measure.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

/// Which summary a curve holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "APF0")]
    Apf0,
    #[serde(rename = "APF1")]
    Apf1,
    #[serde(rename = "HZ0")]
    Hz0,
    #[serde(rename = "HZ1")]
    Hz1,
    #[serde(rename = "CF")]
    Cf,
    #[serde(rename = "ESF")]
    Esf,
    #[serde(rename = "custom")]
    Custom,
}

impl CurveKind {
    pub const SUMMARIES: [CurveKind; 6] = [
        CurveKind::Apf0,
        CurveKind::Apf1,
        CurveKind::Hz0,
        CurveKind::Hz1,
        CurveKind::Cf,
        CurveKind::Esf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Apf0 => "APF0",
            CurveKind::Apf1 => "APF1",
            CurveKind::Hz0 => "HZ0",
            CurveKind::Hz1 => "HZ1",
            CurveKind::Cf => "CF",
            CurveKind::Esf => "ESF",
            CurveKind::Custom => "custom",
        }
    }

    /// Homological dimension for the diagram-based kinds.
    pub fn dimension(&self) -> Option<u8> {
        match self {
            CurveKind::Apf0 | CurveKind::Hz0 => Some(0),
            CurveKind::Apf1 | CurveKind::Hz1 => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "APF0" | "APF_0" => CurveKind::Apf0,
            "APF1" | "APF_1" => CurveKind::Apf1,
            "HZ0" | "HZ_0" => CurveKind::Hz0,
            "HZ1" | "HZ_1" => CurveKind::Hz1,
            "CF" => CurveKind::Cf,
            "ESF" => CurveKind::Esf,
            "CUSTOM" => CurveKind::Custom,
            _ => return Err(Error::Parse(format!("unknown summary '{s}'"))),
        })
    }
}

/// A function sampled on a strictly increasing argument grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub args: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

impl SummaryCurve {
    pub fn new(args: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        check_grid(&args)?;
        if args.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} arguments but {} values",
                args.len(),
                values.len()
            )));
        }
        Ok(Self { args, values, kind })
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }
}

pub(crate) fn check_grid(args: &[f64]) -> Result<()> {
    if args.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidInput("non-finite grid argument".into()));
    }
    if args.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("grid is not strictly increasing".into()));
    }
    Ok(())
}

/// `n` equispaced points covering `[lo, hi]`; a degenerate range is widened
/// to a unit interval so the grid stays strictly increasing.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

/// Point of a rotated and rescaled diagram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RrpdPoint {
    pub meanage: f64,
    pub lifetime: f64,
    pub multiplicity: u32,
}

/// Rotated/rescaled diagram of dimension `q`, aggregated on identical
/// `(meanage, lifetime)` and sorted by meanage.
pub fn rrpd(pd: &PersistenceDiagram, q: u8) -> Vec<RrpdPoint> {
    let mut pts: Vec<RrpdPoint> = pd
        .dim(q)
        .map(|p| RrpdPoint {
            meanage: p.meanage(),
            lifetime: p.lifetime(),
            multiplicity: p.multiplicity,
        })
        .collect();
    pts.sort_by(|a, b| {
        a.meanage
            .total_cmp(&b.meanage)
            .then(a.lifetime.total_cmp(&b.lifetime))
    });
    let mut out: Vec<RrpdPoint> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last_mut() {
            Some(l) if l.meanage == p.meanage && l.lifetime == p.lifetime => {
                l.multiplicity += p.multiplicity
            }
            _ => out.push(p),
        }
    }
    out
}

/// Accumulated persistence function `m -> sum c_i l_i 1(m_i <= m)` sampled on
/// `m_grid`.
pub fn apf(pd: &PersistenceDiagram, q: u8, m_grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(m_grid)?;
    let pts = rrpd(pd, q);
    let mut values = Vec::with_capacity(m_grid.len());
    let mut acc = 0.0;
    let mut k = 0;
    for &m in m_grid {
        while k < pts.len() && pts[k].meanage <= m {
            acc += pts[k].multiplicity as f64 * pts[k].lifetime;
            k += 1;
        }
        values.push(acc);
    }
    let kind = if q == 0 { CurveKind::Apf0 } else { CurveKind::Apf1 };
    SummaryCurve::new(m_grid.to_vec(), values, kind)
}

/// Unit vector `(sin r cos p, sin r sin p, cos r)` for `r` in `[0, 2pi]`,
/// `p` in `[0, pi]`.
pub fn sphere_direction(rho: f64, phi: f64) -> Result<[f64; 3]> {
    if !(0.0..=2.0 * PI).contains(&rho) || !(0.0..=PI).contains(&phi) {
        return Err(Error::InvalidAngle(format!("rho={rho}, phi={phi}")));
    }
    let (sr, cr) = rho.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok([sr * cp, sr * sp, cr])
}

/// Support function of the lift zonotope of dimension `q`:
/// `h(u) = sum c_i l_i max(0, <u, (1, b_i, d_i)>)`.
pub fn support_value(pd: &PersistenceDiagram, q: u8, u: [f64; 3]) -> f64 {
    pd.dim(q)
        .map(|p| {
            let dot = u[0] + u[1] * p.birth + u[2] * p.death;
            p.multiplicity as f64 * p.lifetime() * dot.max(0.0)
        })
        .sum()
}

fn hz_kind(q: u8) -> CurveKind {
    if q == 0 {
        CurveKind::Hz0
    } else {
        CurveKind::Hz1
    }
}

/// Support function evaluated on a list of directions; the curve argument is
/// the direction index.
pub fn lift_zonotope_support(
    pd: &PersistenceDiagram,
    q: u8,
    directions: &[[f64; 3]],
) -> Result<SummaryCurve> {
    for u in directions {
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("direction {u:?} is not unit")));
        }
    }
    let values = directions.iter().map(|&u| support_value(pd, q, u)).collect();
    let args = (0..directions.len()).map(|k| k as f64).collect();
    SummaryCurve::new(args, values, hz_kind(q))
}

/// Support function along the great circle `phi = pi/2`, indexed by `rho`.
pub fn hz_slice(pd: &PersistenceDiagram, q: u8, rho_grid: &[f64]) -> Result<SummaryCurve> {
    check_grid(rho_grid)?;
    let values = rho_grid
        .iter()
        .map(|&rho| sphere_direction(rho, PI / 2.0).map(|u| support_value(pd, q, u)))
        .collect::<Result<Vec<_>>>()?;
    SummaryCurve::new(rho_grid.to_vec(), values, hz_kind(q))
}

/// Default slice grid: 128 points over `[0, 2pi]`.
pub fn default_rho_grid() -> Vec<f64> {
    uniform_grid(0.0, 2.0 * PI, 128)
}

/// Parameter grid over the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SphereGrid {
    pub fn new(rho: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        check_grid(&rho)?;
        check_grid(&phi)?;
        let in_range = |g: &[f64], hi: f64| g.iter().all(|v| (0.0..=hi).contains(v));
        if !in_range(&rho, 2.0 * PI) || !in_range(&phi, PI) {
            return Err(Error::InvalidAngle("sphere grid out of range".into()));
        }
        Ok(Self { rho, phi })
    }

    pub fn uniform(n_rho: usize, n_phi: usize) -> Self {
        Self {
            rho: uniform_grid(0.0, 2.0 * PI, n_rho),
            phi: uniform_grid(0.0, PI, n_phi),
        }
    }
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self::uniform(64, 32)
    }
}

/// Support function on a sphere grid, `rho`-major (`values[i * n_phi + j]`).
pub fn hz_sphere(pd: &PersistenceDiagram, q: u8, grid: &SphereGrid) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.rho.len() * grid.phi.len());
    for &rho in &grid.rho {
        for &phi in &grid.phi {
            let u = sphere_direction(rho, phi).expect("grid validated");
            out.push(support_value(pd, q, u));
        }
    }
    out
}
