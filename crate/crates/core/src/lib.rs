//! Surface germs, their links and tangent cones, and the invariants that separate them.

pub mod constructions;
pub mod contour;
pub mod error;
pub mod fit;
pub mod geom;
pub mod knots;
pub mod laurent;
pub mod germ;
pub mod metrics;
pub mod poly;
pub mod rational;
pub mod report;
pub mod section;

pub use error::{GermError, Result};
pub use rational::Rational;
