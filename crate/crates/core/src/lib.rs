//! Persistent-homology summaries of planar random sets.
//!
//! A realisation is rasterised ([`raster`]), turned into a signed distance
//! field ([`distance`]) and reduced to a sublevel persistence diagram
//! ([`persistence`]). From the diagram come functional summaries: the
//! accumulated persistence function and slices of the lifted zonotope
//! support ([`summaries`]). Classical set statistics ([`setstats`]) give the
//! reference curves. Samples of curves are ranked by functional depth
//! ([`depth`]) to flag outliers, and tested against a null model with
//! global rank envelopes ([`envelope`]). [`simulate`] provides the Boolean,
//! Quermass-interaction, Matérn cluster, cell and hard-core models, and
//! [`study`] runs the simulation studies.
//!
//! ```
//! use setpersist::pipeline::Analysis;
//! use setpersist::raster::{Grain, GrainConfiguration, Window};
//! use setpersist::summaries::{uniform_grid, CurveKind};
//!
//! let config = GrainConfiguration::new(
//!     Window::square(10.0).unwrap(),
//!     vec![Grain::disc(3.0, 3.0, 1.5), Grain::disc(7.0, 6.0, 1.0)],
//! );
//! let a = Analysis::of_config(&config, 100).unwrap();
//! assert_eq!(a.diagram.count(0), 2);
//! let apf = a.curve(CurveKind::Apf0, &uniform_grid(-2.0, 2.0, 50)).unwrap();
//! assert_eq!(apf.len(), 50);
//! ```

pub mod depth;
pub mod distance;
pub mod envelope;
pub mod error;
pub mod io;
mod par;
pub mod persistence;
pub mod pipeline;
pub mod plot;
pub mod raster;
pub mod setstats;
pub mod simulate;
pub mod study;
pub mod summaries;

pub use error::{Error, Result};
