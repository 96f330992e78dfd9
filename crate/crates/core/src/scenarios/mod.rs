//! Input generators and information-theoretic baselines.

pub mod collinear;
pub mod converse;
pub mod dms;
pub mod gf;
pub mod region;

pub use collinear::{collinear_profile, sample_collinear_triple, CollinearSummary};
pub use converse::{converse_bound_check, ConverseVerdict, DecoderTable, EncoderTable};
pub use dms::{entropy_profile, sample_dms, SourceDistribution};
pub use gf::{gf_mul, Field, FieldElement};
pub use region::{validate_rate_region, validate_rate_region_entropy, RegionCheck};
