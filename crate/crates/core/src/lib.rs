//! Recovering the implicit loss weights of black-box decision agents.
//!
//! * [`roc`]: empirical and binormal ROC curves and their slopes.
//! * [`binary`]: false-positive/false-negative loss-ratio recovery and the
//!   two-dimensional embedding `[dTPR/dtau, dFPR/dtau]` of a thresholding agent.
//! * [`continuous`]: per-step risk-derivative vectors of a control law and
//!   the criterion weight ratio they imply.
//! * [`sim`]: ground-truth experiment generators and brute-force oracles.

pub mod binary;
pub mod continuous;
pub mod error;
pub mod normal;
pub mod roc;
pub mod sim;

pub use binary::{
    audit_binary_agent, ethics_vector_binary, expected_loss, optimal_threshold, recover_loss_ratio,
    recover_threshold, AuditConfig, AuditMethod, BinaryAudit, EthicsVector2D, LossMatrix, ThresholdEstimate,
};
pub use continuous::{
    aggregate_ethics_vector, ethics_trace, risk_derivative, simulate_trajectory, weight_ratio, ControlLaw,
    DerivativeSettings, EthicsTrace, RiskModel, SimulationSettings, Trajectory, TrajectoryStep, WeightRatio,
    WeightRatioMethod,
};
pub use error::{Error, Result};
pub use roc::{
    build_empirical_roc, estimate_priors, fit_binormal, parametric_derivatives, roc_slope_nonparametric,
    roc_slope_parametric, BinormalFit, ClassPriors, DecisionLog, Record, RocCurve, RocPoint, SlopeForm,
    ThresholdDerivatives,
};
