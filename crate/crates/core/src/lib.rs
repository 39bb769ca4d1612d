//! Skew Brownian motion and its local time at the interface.
//!
//! * [`density`]: closed-form joint law of `(B_t, ℓ_t)`, its marginals and
//!   total-mass quadrature.
//! * [`samplers`]: exact draws from the joint law.
//! * [`path_sim`]: skew random walk with drift, an independent path-level
//!   approximation.
//! * [`stats`] and [`verify`]: goodness-of-fit machinery and the check runner
//!   that ties the three together.

pub mod density;
pub mod error;
pub mod path_sim;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod verify;

pub use density::{
    atom_weight, density, gauss_kernel, joint_density_averaged, joint_density_continuous,
    joint_density_sided, local_time_cdf, local_time_marginal_density, normalization_mass,
    skew_marginal_cdf, skew_marginal_density, skew_marginal_density_sided, survival_probability,
    DensityValue, InterfacePolicy, MassBreakdown, QueryPoint, Side, SkewParams,
};
pub use error::{Error, Result};
pub use path_sim::{simulate_batch, simulate_path, DriftSpec, PathRecord, TieRule, WalkConfig};
pub use quadrature::QuadratureSpec;
pub use rng::RngStream;
pub use samplers::{sample_joint, sample_joint_many, sample_u_given_hit, JointSample};

/// The guide's chapters, compiled so that their snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/joint-law.md")]
    mod joint_law {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/random-walk.md")]
    mod random_walk {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/glossary.md")]
    mod glossary {}
}
