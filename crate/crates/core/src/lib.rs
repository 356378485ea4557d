//! Symbolic kernel for Z2^n-graded geometry: truncated graded-commutative
//! algebra over charts, graded calculus, morphisms and their pullbacks,
//! graded matrices, group laws, and bundle gluing from atlas data.

pub mod bundle;
pub mod calculus;
pub mod chart;
pub mod coeff;
pub mod degree;
pub mod error;
pub mod group;
pub mod matrix;
pub mod morphism;
pub mod randgen;
pub mod report;
pub mod series;

pub use bundle::{
    coboundary_cocycle, fibre_weight_check, frame_bundle, tangent_bundle, tangent_chart,
    tangent_fibre_ids, Atlas, Overlap, PrincipalBundle, TangentBundle, Triple, VectorBundle,
};
pub use calculus::{is_linear_function, partial_derivative, weight_of, Derivation, Weight};
pub use chart::{Chart, ChartRef, CoordId, FormalVariable, RealPoint, DEFAULT_TRUNCATION};
pub use coeff::{Coeff, EqOptions, FnRegistry, OpExpr, OpaqueFn, Poly, Rat};
pub use degree::{enumerate_degrees, Degree, Parity};
pub use error::{Error, Result};
pub use group::{
    action_chart, builtin_gl, builtin_susy_z22, entry_name, morphisms_agree, GroupAction,
    GroupLaw, InverseRule,
};
pub use matrix::{invert_rat_matrix, rank_f64, GradedMatrix};
pub use morphism::{projection, Morphism};
pub use randgen::{
    monomials_of_degree, random_point_in_domain, random_series_of_degree, rng_from_seed, RandCfg,
};
pub use report::{CheckRecord, Report};
pub use series::{DegreeClass, Monomial, Series};
