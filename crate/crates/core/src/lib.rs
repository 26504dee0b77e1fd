//! Hausdorff-metric arithmetic on finite compacta, Hutchinson operators of
//! multifunction systems, attractor solving and sampled continuity probes.
//!
//! ```
//! use hutchinson_core::hutchinson::HutchinsonOperator;
//! use hutchinson_core::hyperspace::{hausdorff, FiniteCompact};
//! use hutchinson_core::systems::{build, presets};
//!
//! let phi = build(&presets::cantor()).unwrap();
//! let f = HutchinsonOperator::new(phi);
//! let b = f.power(&FiniteCompact::from_reals(&[0.0]).unwrap(), 3).unwrap();
//! assert_eq!(b.len(), 8);
//! let step = hausdorff(&f.apply(&b).unwrap(), &b).unwrap();
//! assert!((step - 2.0 / 81.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod hutchinson;
pub mod hyperspace;
pub mod io;
pub mod jsonpos;
pub mod multifunction;
pub mod probes;
pub mod raster;
pub mod sampling;
pub mod space;
pub mod systems;

pub use error::{Error, ParseError, Result};
pub use hyperspace::{hausdorff, FiniteCompact};
pub use space::{Domain, Point, Space};
