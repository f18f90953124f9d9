//! Regression fitting and the designs built on network output.

pub mod design;
pub mod dist;
pub mod linalg;
pub mod regression;

pub use design::{
    cluster_membership_fits, dyadic_design, monadic_design, monadic_fits, node_design, significance_table, ClusterFits,
    DyadicCoding, DyadicColumn, DyadicFeatureTable, DyadicKind, DyadicOptions, MembershipModel, MembershipOptions,
    MonadicDesign, NodeDesign, SignificanceRow, SignificanceTable, SkipReason, DYADIC_VARIABLES, MONADIC_RESPONSES,
};
pub use regression::{logistic_fit, logistic_fit_traced, ols_fit, ColumnMeta, Design, Model, RegressionFit};
