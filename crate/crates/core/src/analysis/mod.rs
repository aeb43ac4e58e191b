//! Estimators and verifiers over recorded trajectories: empirical
//! distributions and KS distances, the forward/reverse duality check,
//! cluster-size scaling, the pathwise step-distribution identity,
//! Laplace-transform convergence, pipeline comparison, and joint
//! (copula) diagnostics.

pub mod clusters;
pub mod copula;
pub mod duality;
pub mod ecdf;
pub mod laplace;
pub mod lemma;
pub mod pipelines;

pub use clusters::{cluster_scaling_diagnostic, CauchyRow, ClusterScalingReport};
pub use copula::{copula_distance, corollary2_report, Corollary2Report};
pub use duality::{duality_check, inner_product, DualityReport};
pub use ecdf::{energy_distance, ks_critical_value, ks_distance, EmpiricalDistribution};
pub use laplace::{h_split, laplace_convergence, LaplaceReport};
pub use lemma::{lemma_identity_check, linear_grid, LemmaResidual};
pub use pipelines::{pipeline_comparison, PipelineComparison};
