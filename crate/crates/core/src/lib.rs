//! Certified verification of blow-up bounds for line transversals of unit
//! disks: planar geometry primitives, the John-position criteria for points
//! on a circle, region outer approximations, the angle-cube branch-and-bound
//! engine and the final bound assembly.

pub mod certify;
pub mod error;
pub mod geom;
pub mod john;
pub mod region;
pub mod search;

pub use error::{CertificateError, CertifyError, GeomError, JohnError, RegionError, SearchError};
pub use geom::{Ellipse, Point2, PointSet, DELTA_FP};
pub use john::{AngleTuple, TriState};
pub use search::{AngleCube, CampaignConfig, Certificate, Mode, PruneReason, Verdict, TAU};
