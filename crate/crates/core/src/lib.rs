//! Random polytopes in smooth convex bodies.
//!
//! The crate samples Poisson and binomial point sets in smooth convex
//! bodies, builds their convex hulls with exact predicates, scores every
//! vertex by the k-faces it belongs to, simulates the paraboloid growth and
//! hull processes that describe the boundary in the large-intensity limit,
//! and runs the variance-scaling experiments that tie the two pictures
//! together.

pub mod bodies;
pub mod config;
pub mod error;
pub mod experiments;
pub mod hull;
pub mod par;
pub mod paraboloid;
pub mod points;
pub mod predicates;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod testfn;

pub use bodies::{make_body, BodyKind, BoundaryPoint, SmoothBody};
pub use error::{Error, Result};
pub use hull::{convex_hull, weighted_score_sum, xi_scores, FaceLattice, ScoreVector};
pub use points::PointSet;
pub use rng::{Role, SeedKey};
pub use testfn::TestFunction;
