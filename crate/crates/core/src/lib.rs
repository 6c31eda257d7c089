//! Exact analysis of finite pointed metric spaces.
//!
//! Given a finite metric space with a base point, this crate decides whether
//! it embeds in a tree (the four-point condition), builds the minimal tree
//! containing it, computes norms in its Lipschitz-free space and in the dual
//! Lipschitz space, decides whether the free space is isometric to `l1`, and
//! produces certificates that can be re-checked independently:
//!
//! * a coordinate map onto `l1` when every branching point of the tree is a
//!   point of the space;
//! * otherwise two pairs of extreme points (one in the free-space ball, one in
//!   the dual ball) that are too close to each other for an `l1` ball;
//! * lower bounds on the Banach-Mazur distance to `l1^n`.
//!
//! All arithmetic is exact over arbitrary-precision rationals.

pub mod bm;
pub mod error;
pub mod extremal;
pub mod free_space;
pub mod generate;
pub mod io;
pub mod lp;
pub mod metric;
pub mod rational;
pub mod report;
pub mod transport;
pub mod tree;

pub use error::{BoundError, CommandError, ExtremalError, FormatError, MetricError, TreeError};
pub use free_space::{FreeVector, LipFunction};
pub use metric::{validate_metric, FiniteMetricSpace, FourPoint, Ultrametric};
pub use rational::Rational;
pub use tree::{realize, RealizedTree, TreePoint};
