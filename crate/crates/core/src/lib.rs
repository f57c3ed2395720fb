//! Density-adaptive safe perturbation radii.
//!
//! For every sample of a labeled dataset this crate computes a radius such
//! that balls around points of different classes do not overlap, while the
//! growth of each ball is throttled by how densely its own class is sampled
//! around it. The result bounds how far a point may be perturbed, for example
//! by an adversarial search, before it risks crossing into another class.
//!
//! ```
//! use adaptive_eps::dataset::{Dataset, LabeledPoint};
//! use adaptive_eps::expansion::{expand, RunConfig};
//!
//! let ds = Dataset::new(vec![
//!     LabeledPoint::new(vec![0.0, 0.0], "a"),
//!     LabeledPoint::new(vec![0.5, 0.0], "b"),
//! ])
//! .unwrap();
//! let radii = expand(&ds, &RunConfig::strict()).unwrap();
//! assert_eq!(radii.epsilons, vec![0.25, 0.25]);
//! ```

pub mod cli;
pub mod dataset;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod expansion;
pub mod io;
pub mod oracle;
pub mod projection;
pub mod regions;

pub use dataset::{distance, ClassId, Dataset, LabeledPoint};
pub use density::{default_shape, rbf, DensityModel};
pub use error::{Error, Result};
pub use expansion::{expand, step_size, Mode, RadiusResult, RunConfig, Shape, StopReason};
pub use regions::{nearest_foreign, SafeRegion};
