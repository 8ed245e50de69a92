//! Maximum-entropy random graphs with a prescribed degree sequence.
//!
//! The crate fits the canonical ensemble (independent edges with
//! `p_ij = x_i x_j / (1 + x_i x_j)`) to a degree sequence, counts the graphs of
//! the microcanonical ensemble exactly, and measures how far apart the two
//! ensembles are through their relative entropy, both exactly and through the
//! determinant of the canonical degree covariance.
//!
//! ```
//! use ensemble_gap::{canonical::FitOptions, degrees::DegreeSequence, entropy};
//!
//! let d = DegreeSequence::new(vec![1, 1, 1, 1]).unwrap();
//! let s = entropy::relative_entropy_exact(&d, &FitOptions::default(), 16).unwrap();
//! assert!((s - (729.0f64 / 48.0).ln()).abs() < 1e-10);
//! ```

pub mod canonical;
pub mod cli;
pub mod covariance;
pub mod degrees;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod io;
pub mod microcanonical;
pub mod sampler;
pub mod scan;
pub mod verify;

pub use canonical::{fit, CanonicalModel, FitOptions};
pub use degrees::{dual_sequence, is_graphical, DegreeSequence};
pub use error::{Error, Result};
pub use graph::Graph;
pub use microcanonical::{count_graphs, GraphCount};
