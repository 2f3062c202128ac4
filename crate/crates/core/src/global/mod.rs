//! Group-level structure: bundle automorphisms and the semi-linear maps
//! they induce, first-order families of automorphisms, finitely presented
//! groups acting by automorphisms, and action groupoids on fibered charts.

mod automorphism;
mod family;
mod group;
mod groupoid;

pub use automorphism::{
    automorphism_from_semilinear, check_semilinear, check_semilinear_rep, ActionGroupoid, BundleAutomorphism,
    GroupoidElement, SemiLinearIso, SemiLinearRepresentation,
};
pub use family::{differentiate_family, infinitesimal_action, DualAutomorphismFamily};
pub use group::{FPGroup, Letter, Word};
pub use groupoid::{
    bisection_semilinear, check_bisections, check_groupoid_action, check_groupoid_rep, BisectionMap, FiberedMap,
    GroupoidActionModel, GroupoidRepModel,
};
