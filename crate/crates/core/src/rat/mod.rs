//! User-centric radio access: virtual-cell configurations, EDF eligibility
//! and priorities, pRB matching and the exhaustive configuration search.

pub mod hungarian;
pub mod partitions;
pub mod scheduling;
pub mod wsr;

pub use hungarian::{hungarian, Assignment};
pub use partitions::{enumerate_partitions, stirling2, PartitionCache, VcConfiguration};
pub use scheduling::{eligible_cvs, priorities, schedule, soi, vc_count, EligibilityResult};
pub use wsr::{optimal_vc_and_prb, weighted_rate_matrix, VcDecision};
