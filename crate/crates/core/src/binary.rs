//! Loss-ratio recovery for binary thresholding agents.
//!
//! A thresholding agent whose threshold minimizes
//! `L(tau) = l_fp * FPR(tau) * p_n + l_fn * (1 - TPR(tau)) * p_p`
//! operates where the ROC slope equals `(l_fp / l_fn) * (p_n / p_p)`.
//! Reading the slope off observed behavior therefore reveals the loss ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::roc::{
    build_empirical_roc, default_bandwidth, estimate_priors, fit_binormal, local_derivatives,
    BinormalFit, ClassPriors, DecisionLog, SlopeForm, ThresholdDerivatives,
};

/// False-positive and false-negative losses; correct actions cost nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossMatrix {
    l_fp: f64,
    l_fn: f64,
}

impl LossMatrix {
    pub fn new(l_fp: f64, l_fn: f64) -> Result<Self> {
        if !(l_fp.is_finite() && l_fn.is_finite() && l_fp > 0.0 && l_fn > 0.0) {
            return Err(Error::InvalidLosses { l_fp, l_fn });
        }
        Ok(Self { l_fp, l_fn })
    }

    /// Unit false-negative loss and `l_fp = ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0)
    }

    pub fn l_fp(&self) -> f64 {
        self.l_fp
    }

    pub fn l_fn(&self) -> f64 {
        self.l_fn
    }

    pub fn ratio(&self) -> f64 {
        self.l_fp / self.l_fn
    }
}

/// Threshold derivatives of both rates at the agent's operating threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EthicsVector2D {
    pub d_tpr_d_tau: f64,
    pub d_fpr_d_tau: f64,
    pub tau_star: f64,
}

impl EthicsVector2D {
    /// ROC slope `dTPR/dFPR` implied by the two components.
    pub fn slope(&self) -> f64 {
        self.d_tpr_d_tau / self.d_fpr_d_tau
    }
}

/// Average loss of thresholding at `tau` under the binormal model.
pub fn expected_loss(tau: f64, fit: &BinormalFit, priors: &ClassPriors, losses: &LossMatrix) -> f64 {
    // 1 - TPR computed directly so the upper tail keeps its precision
    let fnr = normal::cdf((tau - fit.mu1) / fit.sigma1);
    losses.l_fp * fit.fpr(tau) * priors.p_n() + losses.l_fn * fnr * priors.p_p()
}

/// `ln(l_fp p_n / (l_fn p_p))`, the log of the slope the optimum must reach.
fn log_target_slope(priors: &ClassPriors, losses: &LossMatrix) -> f64 {
    (losses.l_fp * priors.p_n()).ln() - (losses.l_fn * priors.p_p()).ln()
}

/// Bisects a sign change of `g` on `[lo, hi]` down to adjacent floats.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g_lo = g(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Walks from `start` in `direction` with doubling steps until `g` changes
/// sign, returning the bracket.
fn expand_bracket(g: &impl Fn(f64) -> f64, start: f64, direction: f64) -> Option<(f64, f64)> {
    let g_start = g(start);
    if g_start == 0.0 {
        return Some((start, start));
    }
    let mut step = 1.0_f64.max(start.abs() * 1e-3);
    let mut prev = start;
    for _ in 0..80 {
        let next = start + direction * step;
        if !next.is_finite() {
            return None;
        }
        let g_next = g(next);
        if g_next == 0.0 || (g_next < 0.0) != (g_start < 0.0) {
            return Some(if direction > 0.0 { (prev, next) } else { (next, prev) });
        }
        prev = next;
        step *= 2.0;
    }
    None
}

/// Threshold minimizing the expected loss.
///
/// The log-slope mismatch `g(tau) = ln slope(tau) - ln target` is a quadratic
/// in `tau`, and `dL/dtau` has the sign of `g`. A local minimum of the loss is
/// a root where `g` crosses from negative to positive. There is at most one
/// such root; it is located by bracketing on the monotone branch of `g` and
/// bisection, then compared against the loss of the two constant policies.
pub fn optimal_threshold(fit: &BinormalFit, priors: &ClassPriors, losses: &LossMatrix) -> Result<f64> {
    let log_target = log_target_slope(priors, losses);
    let g = |tau: f64| fit.log_slope(tau, SlopeForm::Exact) - log_target;

    let a0 = 1.0 / (fit.sigma0 * fit.sigma0);
    let a1 = 1.0 / (fit.sigma1 * fit.sigma1);
    let quad = 0.5 * (a0 - a1);
    let lin = a1 * fit.mu1 - a0 * fit.mu0;

    let bracket = if quad == 0.0 {
        if lin <= 0.0 {
            return Err(Error::NoInteriorOptimum(
                "positive-class scores do not exceed negative-class scores; the loss has no interior minimum".into(),
            ));
        }
        let centre = 0.5 * (fit.mu0 + fit.mu1);
        if g(centre) < 0.0 {
            expand_bracket(&g, centre, 1.0)
        } else {
            expand_bracket(&g, centre, -1.0)
        }
    } else {
        let vertex = -lin / (2.0 * quad);
        let g_vertex = g(vertex);
        // increasing branch: right of the vertex when g is convex, left when concave
        if quad > 0.0 && g_vertex < 0.0 {
            expand_bracket(&g, vertex, 1.0)
        } else if quad < 0.0 && g_vertex > 0.0 {
            expand_bracket(&g, vertex, -1.0)
        } else {
            None
        }
    };

    let (lo, hi) = bracket.ok_or_else(|| {
        Error::NoInteriorOptimum("the slope never reaches the loss-implied value from below".into())
    })?;
    let tau = if lo == hi { lo } else { bisect(g, lo, hi) };

    let interior = expected_loss(tau, fit, priors, losses);
    let all_negative = losses.l_fn * priors.p_p();
    let all_positive = losses.l_fp * priors.p_n();
    if all_negative < interior || all_positive < interior {
        return Err(Error::NoInteriorOptimum(format!(
            "a constant policy (loss {:.6e}) beats the best interior threshold (loss {interior:.6e})",
            all_negative.min(all_positive)
        )));
    }
    Ok(tau)
}

/// `l_fp / l_fn = slope * p_p / p_n`.
pub fn recover_loss_ratio(slope_at_tau_star: f64, priors: &ClassPriors) -> Result<f64> {
    if !(slope_at_tau_star.is_finite() && slope_at_tau_star > 0.0) {
        return Err(Error::NonPositiveSlope(slope_at_tau_star));
    }
    Ok(slope_at_tau_star * priors.p_p() / priors.p_n())
}

pub fn ethics_vector_binary(fit: &BinormalFit, tau_star: f64) -> EthicsVector2D {
    let ThresholdDerivatives { d_tpr_d_tau, d_fpr_d_tau } = fit.derivatives(tau_star);
    EthicsVector2D { d_tpr_d_tau, d_fpr_d_tau, tau_star }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditMethod {
    #[default]
    Parametric,
    Nonparametric,
}

impl std::fmt::Display for AuditMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AuditMethod::Parametric => "parametric",
            AuditMethod::Nonparametric => "nonparametric",
        })
    }
}

impl std::str::FromStr for AuditMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "parametric" => Ok(Self::Parametric),
            "nonparametric" => Ok(Self::Nonparametric),
            other => Err(format!("unknown method `{other}` (expected parametric or nonparametric)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub method: AuditMethod,
    pub slope_form: SlopeForm,
    /// Window half-width for the nonparametric slope; `None` uses a quarter
    /// of the pooled score standard deviation.
    pub bandwidth: Option<f64>,
    /// Largest tolerated fraction of actions contradicting the best
    /// threshold split.
    pub max_violation_fraction: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            method: AuditMethod::Parametric,
            slope_form: SlopeForm::Exact,
            bandwidth: None,
            max_violation_fraction: 1e-3,
        }
    }
}

/// Decision boundary implied by the agent's actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub tau: f64,
    /// Records whose action contradicts the recovered threshold.
    pub violations: usize,
}

/// Finds the split of the score axis that best explains the actions as
/// `action = score >= tau`, and places `tau` midway between the largest
/// consistent negative action and the smallest consistent positive one.
pub fn recover_threshold(log: &DecisionLog, max_violation_fraction: f64) -> Result<ThresholdEstimate> {
    let mut sorted: Vec<(f64, bool)> = log.records().iter().map(|r| (r.score, r.action)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let total_zeros = sorted.iter().filter(|r| !r.1).count();

    // violations(k) = positive actions below the split + negative actions above it
    let mut best: Option<(usize, usize)> = None;
    let mut ones_before = 0;
    let mut zeros_before = 0;
    for k in 0..=n {
        if k > 0 {
            if sorted[k - 1].1 {
                ones_before += 1;
            } else {
                zeros_before += 1;
            }
        }
        let splittable = k == 0 || k == n || sorted[k - 1].0 < sorted[k].0;
        if !splittable {
            continue;
        }
        let violations = ones_before + (total_zeros - zeros_before);
        if best.is_none_or(|(_, v)| violations < v) {
            best = Some((k, violations));
        }
    }
    let (k, violations) = best.expect("split at 0 is always available");

    if violations as f64 > max_violation_fraction * n as f64 {
        return Err(Error::InconsistentActions { violations, total: n });
    }
    if k == 0 || k == n {
        return Err(Error::NoInteriorOptimum(
            "the agent takes the same action on every observed score; its threshold lies outside the data".into(),
        ));
    }
    let lower = sorted[..k]
        .iter()
        .rev()
        .find(|r| !r.1)
        .map_or(sorted[k - 1].0, |r| r.0);
    let upper = sorted[k..].iter().find(|r| r.1).map_or(sorted[k].0, |r| r.0);
    Ok(ThresholdEstimate { tau: 0.5 * (lower + upper), violations })
}

/// Outcome of auditing one binary agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryAudit {
    pub method: AuditMethod,
    pub recovered_ratio: f64,
    pub slope: f64,
    pub ethics: EthicsVector2D,
    pub threshold: ThresholdEstimate,
    pub priors: ClassPriors,
    /// Empirical `(FPR, TPR)` at the recovered threshold.
    pub operating_point: (f64, f64),
    pub fit: Option<BinormalFit>,
    pub bandwidth: Option<f64>,
}

/// Recovers `l_fp / l_fn` and the binary embedding from an action log.
pub fn audit_binary_agent(log: &DecisionLog, config: &AuditConfig) -> Result<BinaryAudit> {
    log.require_both_classes()?;
    let priors = estimate_priors(log)?;
    let threshold = recover_threshold(log, config.max_violation_fraction)?;
    let tau = threshold.tau;

    let (n0, n1) = log.class_counts();
    let false_pos = log.records().iter().filter(|r| !r.truth && r.score >= tau).count();
    let true_pos = log.records().iter().filter(|r| r.truth && r.score >= tau).count();
    let operating_point = (false_pos as f64 / n0 as f64, true_pos as f64 / n1 as f64);
    if false_pos == 0 && true_pos == n1 {
        return Err(Error::NoInteriorOptimum(
            "classes are perfectly separated at the operating threshold; any loss ratio is consistent".into(),
        ));
    }

    match config.method {
        AuditMethod::Parametric => {
            let fit = fit_binormal(log)?;
            let slope = fit.slope(tau, config.slope_form);
            Ok(BinaryAudit {
                method: config.method,
                recovered_ratio: recover_loss_ratio(slope, &priors)?,
                slope,
                ethics: ethics_vector_binary(&fit, tau),
                threshold,
                priors,
                operating_point,
                fit: Some(fit),
                bandwidth: None,
            })
        }
        AuditMethod::Nonparametric => {
            let bandwidth = config.bandwidth.unwrap_or_else(|| default_bandwidth(log));
            let roc = build_empirical_roc(log, None)?;
            let derivs = local_derivatives(&roc, tau, bandwidth)?;
            let slope = derivs.slope().ok_or(Error::FlatFprWindow { tau })?;
            Ok(BinaryAudit {
                method: config.method,
                recovered_ratio: recover_loss_ratio(slope, &priors)?,
                slope,
                ethics: EthicsVector2D {
                    d_tpr_d_tau: derivs.d_tpr_d_tau,
                    d_fpr_d_tau: derivs.d_fpr_d_tau,
                    tau_star: tau,
                },
                threshold,
                priors,
                operating_point,
                fit: fit_binormal(log).ok(),
                bandwidth: Some(bandwidth),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roc::Record;
    use approx::assert_relative_eq;

    fn standard_fit() -> BinormalFit {
        BinormalFit::new(0.0, 1.0, 1.0, 1.0).unwrap()
    }

    /// Brute-force minimizer used to check the root finder.
    fn grid_argmin(fit: &BinormalFit, priors: &ClassPriors, losses: &LossMatrix, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n)
            .map(|k| lo + k as f64 * step)
            .min_by(|a, b| {
                expected_loss(*a, fit, priors, losses).total_cmp(&expected_loss(*b, fit, priors, losses))
            })
            .unwrap()
    }

    #[test]
    fn loss_limits_and_value() {
        let fit = standard_fit();
        let priors = ClassPriors::balanced();
        let losses = LossMatrix::new(3.0, 2.0).unwrap();
        assert_relative_eq!(expected_loss(60.0, &fit, &priors, &losses), 2.0 * 0.5, max_relative = 1e-12);
        assert_relative_eq!(expected_loss(-60.0, &fit, &priors, &losses), 3.0 * 0.5, max_relative = 1e-12);
        let unit = LossMatrix::new(1.0, 1.0).unwrap();
        assert_relative_eq!(
            expected_loss(0.5, &fit, &priors, &unit),
            0.308_537_538_725_986_9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn symmetric_optimum() {
        let tau = optimal_threshold(&standard_fit(), &ClassPriors::balanced(), &LossMatrix::new(1.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(tau, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_optima_agree_with_grid_search() {
        let fit = standard_fit();
        let priors = ClassPriors::balanced();
        for ratio in [2.0, 0.1] {
            let losses = LossMatrix::from_ratio(ratio).unwrap();
            let tau = optimal_threshold(&fit, &priors, &losses).unwrap();
            assert_relative_eq!(tau, 0.5 + f64::ln(ratio), epsilon = 1e-12);
            let grid = grid_argmin(&fit, &priors, &losses, -5.0, 6.0, 1e-4);
            assert!((grid - tau).abs() <= 1e-4, "grid {grid} vs {tau}");
        }
        assert_relative_eq!(
            optimal_threshold(&fit, &priors, &LossMatrix::from_ratio(2.0).unwrap()).unwrap(),
            1.193_147_180_559_945,
            epsilon = 1e-12
        );
    }

    #[test]
    fn unequal_variance_optimum_is_the_global_minimum() {
        let fit = BinormalFit::new(0.0, 1.0, 1.5, 1.6).unwrap();
        let priors = ClassPriors::from_positive(0.3).unwrap();
        let losses = LossMatrix::new(1.0, 1.7).unwrap();
        let tau = optimal_threshold(&fit, &priors, &losses).unwrap();
        let grid = grid_argmin(&fit, &priors, &losses, -10.0, 10.0, 1e-3);
        assert!((grid - tau).abs() <= 1e-3, "grid {grid} vs {tau}");
        let slope = fit.slope(tau, SlopeForm::Exact);
        let target = losses.ratio() * priors.p_n() / priors.p_p();
        assert!((slope - target).abs() / target < 1e-9);
    }

    #[test]
    fn reversed_classes_have_no_interior_optimum() {
        let fit = BinormalFit::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let err = optimal_threshold(&fit, &ClassPriors::balanced(), &LossMatrix::new(1.0, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoInteriorOptimum(_)));
    }

    #[test]
    fn dominated_loss_prefers_a_constant_policy() {
        // positives are much wider: at extreme false-positive cost, never acting wins
        let fit = BinormalFit::new(0.0, 1.0, 0.2, 3.0).unwrap();
        let err = optimal_threshold(&fit, &ClassPriors::balanced(), &LossMatrix::new(1.0, 50.0).unwrap());
        assert!(matches!(err, Err(Error::NoInteriorOptimum(_))), "{err:?}");
    }

    #[test]
    fn loss_ratio_recovery() {
        let balanced = ClassPriors::balanced();
        assert_eq!(recover_loss_ratio(1.0, &balanced).unwrap(), 1.0);
        assert_eq!(recover_loss_ratio(2.0, &balanced).unwrap(), 2.0);
        let skewed = ClassPriors::new(0.9, 0.1).unwrap();
        assert_relative_eq!(recover_loss_ratio(1.0, &skewed).unwrap(), 1.0 / 9.0, max_relative = 1e-12);
        assert!(matches!(recover_loss_ratio(0.0, &balanced), Err(Error::NonPositiveSlope(_))));
        assert!(matches!(recover_loss_ratio(-1.0, &balanced), Err(Error::NonPositiveSlope(_))));
    }

    #[test]
    fn imbalanced_agent_round_trip() {
        // an agent optimal under skewed priors has slope 1 exactly when l_fp/l_fn = p_p/p_n
        let fit = standard_fit();
        let skewed = ClassPriors::new(0.9, 0.1).unwrap();
        let losses = LossMatrix::from_ratio(1.0 / 9.0).unwrap();
        let tau = optimal_threshold(&fit, &skewed, &losses).unwrap();
        let grid = grid_argmin(&fit, &skewed, &losses, -5.0, 6.0, 1e-4);
        assert!((grid - tau).abs() <= 1e-4);
        let ratio = recover_loss_ratio(fit.slope(tau, SlopeForm::Exact), &skewed).unwrap();
        assert_relative_eq!(ratio, 1.0 / 9.0, max_relative = 1e-9);
    }

    #[test]
    fn binary_embedding_components() {
        let fit = standard_fit();
        let e = ethics_vector_binary(&fit, 0.5);
        assert_relative_eq!(e.d_tpr_d_tau, -0.352_065_326_764_299_47, max_relative = 1e-14);
        assert_eq!(e.d_tpr_d_tau, e.d_fpr_d_tau);
        let tau = 0.5 + f64::ln(2.0);
        let e = ethics_vector_binary(&fit, tau);
        assert_relative_eq!(e.d_tpr_d_tau, -0.391_569_816_025_208_63, max_relative = 1e-12);
        assert_relative_eq!(e.d_fpr_d_tau, -0.195_784_908_012_604_3, max_relative = 1e-12);
        assert_relative_eq!(e.slope(), 2.0, max_relative = 1e-12);
        assert_eq!(e.tau_star, tau);
    }

    fn threshold_log(scores: &[(f64, bool)], tau: f64) -> DecisionLog {
        DecisionLog::new(scores.iter().map(|&(s, y)| Record::new(s, s >= tau, y)).collect()).unwrap()
    }

    #[test]
    fn threshold_midpoint() {
        let log = threshold_log(&[(0.0, false), (1.0, true), (2.0, false), (3.0, true)], 1.5);
        let est = recover_threshold(&log, 0.0).unwrap();
        assert_eq!(est, ThresholdEstimate { tau: 1.5, violations: 0 });
    }

    #[test]
    fn tolerated_violations_are_counted() {
        let mut records: Vec<Record> = (0..2000).map(|i| {
            let s = i as f64 / 100.0;
            Record::new(s, s >= 10.0, i % 2 == 0)
        }).collect();
        records[100].action = true;
        let log = DecisionLog::new(records).unwrap();
        let est = recover_threshold(&log, 1e-3).unwrap();
        assert_eq!(est.violations, 1);
        assert_relative_eq!(est.tau, 9.995, epsilon = 1e-12);
    }

    #[test]
    fn shuffled_actions_are_inconsistent() {
        let records: Vec<Record> = (0..1000)
            .map(|i| Record::new(i as f64, (i * 7919) % 3 == 0, i % 2 == 0))
            .collect();
        let log = DecisionLog::new(records).unwrap();
        let err = audit_binary_agent(&log, &AuditConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InconsistentActions { .. }), "{err:?}");
    }

    #[test]
    fn separable_log_is_not_a_silent_number() {
        let scores: Vec<(f64, bool)> = (0..20).map(|i| (i as f64, i >= 10)).collect();
        let log = threshold_log(&scores, 9.5);
        for method in [AuditMethod::Parametric, AuditMethod::Nonparametric] {
            let config = AuditConfig { method, ..AuditConfig::default() };
            let err = audit_binary_agent(&log, &config).unwrap_err();
            assert!(matches!(err, Error::NoInteriorOptimum(_) | Error::FlatFprWindow { .. }), "{err:?}");
        }
    }

    #[test]
    fn constant_actions_have_no_threshold() {
        let log = threshold_log(&[(0.0, false), (1.0, true), (2.0, false), (3.0, true)], 10.0);
        assert!(matches!(recover_threshold(&log, 0.0), Err(Error::NoInteriorOptimum(_))));
    }
}
