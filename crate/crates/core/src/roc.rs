//! Empirical and binormal operating characteristics of a thresholding agent.
//!
//! An agent acts positively whenever its score reaches the threshold
//! (`score >= tau`), so both rates are survival functions of the
//! class-conditional score distributions:
//!
//! ```text
//! FPR(tau) = P(s >= tau | y = 0)      TPR(tau) = P(s >= tau | y = 1)
//! ```
//!
//! The slope of the ROC curve at an operating point is the ratio of the two
//! threshold derivatives, `dTPR/dFPR = (dTPR/dtau) / (dFPR/dtau)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// Absolute floor under which a slope denominator counts as zero.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// One observed interaction with the agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub score: f64,
    /// `true` when the agent took the positive action.
    pub action: bool,
    /// `true` when the positive action was the correct one.
    pub truth: bool,
}

impl Record {
    pub fn new(score: f64, action: bool, truth: bool) -> Self {
        Self { score, action, truth }
    }
}

/// A nonempty collection of interactions with finite scores.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLog {
    records: Vec<Record>,
}

impl DecisionLog {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyLog);
        }
        if let Some(index) = records.iter().position(|r| !r.score.is_finite()) {
            return Err(Error::NonFiniteScore { index });
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(negatives, positives)` counts by true state.
    pub fn class_counts(&self) -> (usize, usize) {
        let positives = self.records.iter().filter(|r| r.truth).count();
        (self.records.len() - positives, positives)
    }

    /// Scores of one class, sorted ascending.
    pub fn sorted_class_scores(&self, truth: bool) -> Vec<f64> {
        let mut scores: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.truth == truth)
            .map(|r| r.score)
            .collect();
        scores.sort_by(f64::total_cmp);
        scores
    }

    /// Refuses logs with fewer than two records in either class.
    pub fn require_both_classes(&self) -> Result<(usize, usize)> {
        let (negatives, positives) = self.class_counts();
        if negatives < 2 || positives < 2 {
            return Err(Error::SingleClassLog { negatives, positives });
        }
        Ok((negatives, positives))
    }

    /// Sample standard deviation of all scores (0 for a single record).
    pub fn score_std(&self) -> f64 {
        let scores: Vec<f64> = self.records.iter().map(|r| r.score).collect();
        let (_, sd) = mean_and_std(&scores);
        sd
    }
}

/// Class frequencies `P(y=0)` and `P(y=1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPriors {
    p_n: f64,
    p_p: f64,
}

impl ClassPriors {
    pub fn new(p_n: f64, p_p: f64) -> Result<Self> {
        let valid = p_n.is_finite()
            && p_p.is_finite()
            && p_n > 0.0
            && p_p > 0.0
            && (p_n + p_p - 1.0).abs() <= 1e-12;
        if !valid {
            return Err(Error::InvalidPriors { p_n, p_p });
        }
        Ok(Self { p_n, p_p })
    }

    /// Priors with the given positive-class probability.
    pub fn from_positive(p_p: f64) -> Result<Self> {
        Self::new(1.0 - p_p, p_p)
    }

    pub fn balanced() -> Self {
        Self { p_n: 0.5, p_p: 0.5 }
    }

    pub fn p_n(&self) -> f64 {
        self.p_n
    }

    pub fn p_p(&self) -> f64 {
        self.p_p
    }
}

/// Frequency estimate of the class priors.
pub fn estimate_priors(log: &DecisionLog) -> Result<ClassPriors> {
    let (negatives, positives) = log.class_counts();
    if negatives == 0 || positives == 0 {
        return Err(Error::SingleClassLog { negatives, positives });
    }
    let p_p = positives as f64 / log.len() as f64;
    ClassPriors::new(1.0 - p_p, p_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub tau: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Operating points sorted by ascending threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    /// Validates ordering, range and survival monotonicity.
    pub fn from_points(points: Vec<RocPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidRoc("no points".into()));
        }
        for p in &points {
            if !p.tau.is_finite() {
                return Err(Error::NonFiniteThreshold(p.tau));
            }
            if !(0.0..=1.0).contains(&p.fpr) || !(0.0..=1.0).contains(&p.tpr) {
                return Err(Error::InvalidRoc(format!("rates out of [0,1] at tau={}", p.tau)));
            }
        }
        for w in points.windows(2) {
            if w[1].tau < w[0].tau {
                return Err(Error::InvalidRoc("thresholds not ascending".into()));
            }
            if w[1].fpr > w[0].fpr || w[1].tpr > w[0].tpr {
                return Err(Error::InvalidRoc(format!(
                    "rates increase between tau={} and tau={}",
                    w[0].tau, w[1].tau
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.points[0].tau, self.points[self.points.len() - 1].tau)
    }
}

/// Number of sorted values that are `>= tau`.
fn count_at_or_above(sorted: &[f64], tau: f64) -> usize {
    sorted.len() - sorted.partition_point(|&s| s < tau)
}

/// Traces the empirical ROC curve of a log.
///
/// Without explicit thresholds the grid is every distinct score plus one
/// sentinel a unit below the minimum and one a unit above the maximum, which
/// reproduces the step curve exactly.
pub fn build_empirical_roc(log: &DecisionLog, thresholds: Option<&[f64]>) -> Result<RocCurve> {
    log.require_both_classes()?;
    let negatives = log.sorted_class_scores(false);
    let positives = log.sorted_class_scores(true);

    let mut grid: Vec<f64> = match thresholds {
        Some(taus) => {
            if let Some(&bad) = taus.iter().find(|t| !t.is_finite()) {
                return Err(Error::NonFiniteThreshold(bad));
            }
            taus.to_vec()
        }
        None => {
            let mut scores: Vec<f64> = log.records().iter().map(|r| r.score).collect();
            scores.sort_by(f64::total_cmp);
            scores.dedup();
            let lo = scores[0] - 1.0;
            let hi = scores[scores.len() - 1] + 1.0;
            let mut grid = Vec::with_capacity(scores.len() + 2);
            grid.push(lo);
            grid.extend(scores);
            grid.push(hi);
            grid
        }
    };
    grid.sort_by(f64::total_cmp);

    let n0 = negatives.len() as f64;
    let n1 = positives.len() as f64;
    let points = grid
        .into_iter()
        .map(|tau| RocPoint {
            tau,
            fpr: count_at_or_above(&negatives, tau) as f64 / n0,
            tpr: count_at_or_above(&positives, tau) as f64 / n1,
        })
        .collect();
    RocCurve::from_points(points)
}

/// Class-conditional normal score model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinormalFit {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu1: f64,
    pub sigma1: f64,
}

/// Derivatives of the two rates with respect to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDerivatives {
    pub d_tpr_d_tau: f64,
    pub d_fpr_d_tau: f64,
}

impl ThresholdDerivatives {
    /// `dTPR/dFPR`, guarded against a vanishing denominator.
    pub fn slope(&self) -> Option<f64> {
        (self.d_fpr_d_tau.abs() >= DENOMINATOR_GUARD).then(|| self.d_tpr_d_tau / self.d_fpr_d_tau)
    }
}

/// Which formula turns the binormal model into an ROC slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeForm {
    /// Ratio of the exact threshold derivatives, including the `1/sigma`
    /// chain-rule factors.
    #[default]
    Exact,
    /// Ratio of the standard normal densities at the two standardized
    /// thresholds, without the `1/sigma` factors. Equal to `Exact` when
    /// `sigma0 == sigma1`.
    DensityRatio,
}

impl BinormalFit {
    pub fn new(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64) -> Result<Self> {
        if ![mu0, sigma0, mu1, sigma1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidFit("parameters must be finite".into()));
        }
        if sigma0 <= 0.0 || sigma1 <= 0.0 {
            return Err(Error::InvalidFit(format!(
                "standard deviations must be positive (sigma0={sigma0}, sigma1={sigma1})"
            )));
        }
        Ok(Self { mu0, sigma0, mu1, sigma1 })
    }

    fn z0(&self, tau: f64) -> f64 {
        (self.mu0 - tau) / self.sigma0
    }

    fn z1(&self, tau: f64) -> f64 {
        (self.mu1 - tau) / self.sigma1
    }

    pub fn fpr(&self, tau: f64) -> f64 {
        normal::cdf(self.z0(tau))
    }

    pub fn tpr(&self, tau: f64) -> f64 {
        normal::cdf(self.z1(tau))
    }

    pub fn derivatives(&self, tau: f64) -> ThresholdDerivatives {
        ThresholdDerivatives {
            d_tpr_d_tau: -normal::pdf(self.z1(tau)) / self.sigma1,
            d_fpr_d_tau: -normal::pdf(self.z0(tau)) / self.sigma0,
        }
    }

    pub fn slope(&self, tau: f64, form: SlopeForm) -> f64 {
        self.log_slope(tau, form).exp()
    }

    /// Natural log of the ROC slope. Evaluated in log space so it stays
    /// finite far into the tails where both densities underflow.
    pub fn log_slope(&self, tau: f64, form: SlopeForm) -> f64 {
        let z0 = self.z0(tau);
        let z1 = self.z1(tau);
        let density = 0.5 * (z0 * z0 - z1 * z1);
        match form {
            SlopeForm::Exact => density + (self.sigma0 / self.sigma1).ln(),
            SlopeForm::DensityRatio => density,
        }
    }

    /// Samples the analytic curve on the given thresholds.
    pub fn analytic_roc(&self, thresholds: &[f64]) -> Result<RocCurve> {
        let mut taus = thresholds.to_vec();
        taus.sort_by(f64::total_cmp);
        RocCurve::from_points(
            taus.into_iter()
                .map(|tau| RocPoint { tau, fpr: self.fpr(tau), tpr: self.tpr(tau) })
                .collect(),
        )
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-class sample mean and standard deviation (denominator `n - 1`).
pub fn fit_binormal(log: &DecisionLog) -> Result<BinormalFit> {
    log.require_both_classes()?;
    let mut params = [(0.0, 0.0); 2];
    for (class, truth) in [(0u8, false), (1u8, true)] {
        let scores = log.sorted_class_scores(truth);
        if scores[0] == scores[scores.len() - 1] {
            return Err(Error::ZeroVariance { class });
        }
        params[class as usize] = mean_and_std(&scores);
    }
    BinormalFit::new(params[0].0, params[0].1, params[1].0, params[1].1)
}

pub fn parametric_derivatives(fit: &BinormalFit, tau: f64) -> ThresholdDerivatives {
    fit.derivatives(tau)
}

pub fn roc_slope_parametric(fit: &BinormalFit, tau: f64, form: SlopeForm) -> f64 {
    fit.slope(tau, form)
}

/// Local-linear estimates of both threshold derivatives.
///
/// Fits a least-squares line to `tpr(tau)` and `fpr(tau)` over all curve
/// points within `bandwidth` of `tau`; the two slopes are the estimates.
pub fn local_derivatives(roc: &RocCurve, tau: f64, bandwidth: f64) -> Result<ThresholdDerivatives> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    if !tau.is_finite() {
        return Err(Error::NonFiniteThreshold(tau));
    }
    let (min, max) = roc.tau_range();
    if tau < min || tau > max {
        return Err(Error::TauOutOfRange { tau, min, max });
    }
    // grid points that sit on the window edge up to rounding still count
    let reach = bandwidth * (1.0 + 1e-9);
    let window: Vec<&RocPoint> = roc
        .points()
        .iter()
        .filter(|p| (p.tau - tau).abs() <= reach)
        .collect();
    if window.len() < 3 {
        return Err(Error::InsufficientPoints { tau, found: window.len() });
    }

    let n = window.len() as f64;
    let mean_tau = window.iter().map(|p| p.tau).sum::<f64>() / n;
    let mean_fpr = window.iter().map(|p| p.fpr).sum::<f64>() / n;
    let mean_tpr = window.iter().map(|p| p.tpr).sum::<f64>() / n;
    let (mut sxx, mut sxf, mut sxt) = (0.0, 0.0, 0.0);
    for p in &window {
        let dx = p.tau - mean_tau;
        sxx += dx * dx;
        sxf += dx * (p.fpr - mean_fpr);
        sxt += dx * (p.tpr - mean_tpr);
    }
    if sxx <= 0.0 {
        return Err(Error::InsufficientPoints { tau, found: 1 });
    }
    Ok(ThresholdDerivatives { d_tpr_d_tau: sxt / sxx, d_fpr_d_tau: sxf / sxx })
}

/// Nonparametric `dTPR/dFPR` at `tau` from a traced curve.
pub fn roc_slope_nonparametric(roc: &RocCurve, tau: f64, bandwidth: f64) -> Result<f64> {
    local_derivatives(roc, tau, bandwidth)?
        .slope()
        .ok_or(Error::FlatFprWindow { tau })
}

/// Quarter of the pooled score standard deviation.
pub fn default_bandwidth(log: &DecisionLog) -> f64 {
    0.25 * log.score_std()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn log_of(scored: &[(f64, bool)]) -> DecisionLog {
        DecisionLog::new(scored.iter().map(|&(s, y)| Record::new(s, y, y)).collect()).unwrap()
    }

    fn standard_fit() -> BinormalFit {
        BinormalFit::new(0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn priors_by_counting() {
        let p = estimate_priors(&log_of(&[(0.0, false), (1.0, false), (2.0, true), (3.0, true)])).unwrap();
        assert_eq!((p.p_n(), p.p_p()), (0.5, 0.5));
        let p = estimate_priors(&log_of(&[(0.0, true), (1.0, true), (2.0, true), (3.0, false)])).unwrap();
        assert_eq!((p.p_n(), p.p_p()), (0.25, 0.75));
    }

    #[test]
    fn priors_refuse_single_class() {
        let err = estimate_priors(&log_of(&[(0.0, true), (1.0, true)])).unwrap_err();
        assert!(matches!(err, Error::SingleClassLog { negatives: 0, positives: 2 }));
    }

    #[test]
    fn log_validation() {
        assert_eq!(DecisionLog::new(vec![]).unwrap_err(), Error::EmptyLog);
        let err = DecisionLog::new(vec![Record::new(0.0, true, true), Record::new(f64::NAN, true, true)]);
        assert_eq!(err.unwrap_err(), Error::NonFiniteScore { index: 1 });
        assert!(ClassPriors::new(0.3, 0.6).is_err());
        assert!(ClassPriors::new(0.0, 1.0).is_err());
    }

    #[test]
    fn perfect_separation_point() {
        let log = log_of(&[(-1.0, false), (-1.0, false), (1.0, true), (1.0, true)]);
        let roc = build_empirical_roc(&log, Some(&[0.0])).unwrap();
        assert_eq!(roc.points()[0], RocPoint { tau: 0.0, fpr: 0.0, tpr: 1.0 });
    }

    #[test]
    fn ties_count_as_positive_predictions() {
        let log = log_of(&[(0.0, false), (0.0, false), (0.0, true), (0.0, true)]);
        let roc = build_empirical_roc(&log, Some(&[0.5, 0.0])).unwrap();
        assert_eq!(roc.points()[0], RocPoint { tau: 0.0, fpr: 1.0, tpr: 1.0 });
        assert_eq!(roc.points()[1], RocPoint { tau: 0.5, fpr: 0.0, tpr: 0.0 });
    }

    #[test]
    fn default_grid_has_sentinels() {
        let log = log_of(&[(0.2, false), (0.7, false), (0.5, true), (0.9, true)]);
        let roc = build_empirical_roc(&log, None).unwrap();
        let pts = roc.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].fpr, pts[0].tpr), (1.0, 1.0));
        assert_eq!((pts[5].fpr, pts[5].tpr), (0.0, 0.0));
        assert!(pts[0].tau < 0.2 && pts[5].tau > 0.9);
    }

    #[test]
    fn empirical_roc_rejects_bad_thresholds() {
        let log = log_of(&[(0.2, false), (0.7, false), (0.5, true), (0.9, true)]);
        assert!(matches!(
            build_empirical_roc(&log, Some(&[0.0, f64::INFINITY])),
            Err(Error::NonFiniteThreshold(_))
        ));
        let single = log_of(&[(0.2, false), (0.7, false), (0.5, true)]);
        assert!(matches!(build_empirical_roc(&single, None), Err(Error::SingleClassLog { .. })));
    }

    #[test]
    fn two_point_moments() {
        let fit = fit_binormal(&log_of(&[(0.0, false), (2.0, false), (3.0, true), (5.0, true)])).unwrap();
        assert_relative_eq!(fit.mu0, 1.0);
        assert_relative_eq!(fit.sigma0, 2f64.sqrt());
        assert_relative_eq!(fit.mu1, 4.0);
        assert_relative_eq!(fit.sigma1, 2f64.sqrt());
    }

    #[test]
    fn zero_variance_is_refused() {
        let err = fit_binormal(&log_of(&[(1.0, false), (1.0, false), (3.0, true), (5.0, true)])).unwrap_err();
        assert_eq!(err, Error::ZeroVariance { class: 0 });
    }

    #[test]
    fn derivatives_at_table_points() {
        let d = parametric_derivatives(&standard_fit(), 0.5);
        assert_relative_eq!(d.d_tpr_d_tau, -0.352_065_326_764_299_47, max_relative = 1e-14);
        assert_eq!(d.d_tpr_d_tau, d.d_fpr_d_tau);
        let d = parametric_derivatives(&standard_fit(), 0.0);
        assert_relative_eq!(d.d_fpr_d_tau, -0.398_942_280_401_432_7, max_relative = 1e-14);
        assert_relative_eq!(d.d_tpr_d_tau, -0.241_970_724_519_143_37, max_relative = 1e-14);
    }

    #[test]
    fn unequal_variance_derivatives_match_finite_differences() {
        let fit = BinormalFit::new(0.0, 2.0, 1.0, 1.0).unwrap();
        let d = parametric_derivatives(&fit, 1.0);
        assert_relative_eq!(d.d_tpr_d_tau, -normal::pdf(0.0), max_relative = 1e-14);
        assert_relative_eq!(d.d_fpr_d_tau, -normal::pdf(0.5) / 2.0, max_relative = 1e-14);
        let h = 1e-5;
        let fd_tpr = (fit.tpr(1.0 + h) - fit.tpr(1.0 - h)) / (2.0 * h);
        let fd_fpr = (fit.fpr(1.0 + h) - fit.fpr(1.0 - h)) / (2.0 * h);
        assert_relative_eq!(d.d_tpr_d_tau, fd_tpr, max_relative = 1e-6);
        assert_relative_eq!(d.d_fpr_d_tau, fd_fpr, max_relative = 1e-6);
    }

    #[test]
    fn parametric_slopes() {
        let fit = standard_fit();
        assert_relative_eq!(roc_slope_parametric(&fit, 0.5, SlopeForm::Exact), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            roc_slope_parametric(&fit, 1.5, SlopeForm::Exact),
            std::f64::consts::E,
            max_relative = 1e-14
        );
        let wide = BinormalFit::new(0.0, 2.0, 1.0, 1.0).unwrap();
        let exact = roc_slope_parametric(&wide, 1.0, SlopeForm::Exact);
        let density = roc_slope_parametric(&wide, 1.0, SlopeForm::DensityRatio);
        assert_relative_eq!(exact / density, 2.0, max_relative = 1e-14);
        let d = wide.derivatives(1.0);
        assert_relative_eq!(exact, d.d_tpr_d_tau / d.d_fpr_d_tau, max_relative = 1e-14);
    }

    fn analytic_grid_curve() -> RocCurve {
        let taus: Vec<f64> = (-400..=500).map(|k| k as f64 * 0.01).collect();
        standard_fit().analytic_roc(&taus).unwrap()
    }

    #[test]
    fn nonparametric_slope_on_analytic_curve() {
        let roc = analytic_grid_curve();
        let s = roc_slope_nonparametric(&roc, 0.5, 0.05).unwrap();
        assert!((s - 1.0).abs() < 0.02, "{s}");
        let s = roc_slope_nonparametric(&roc, 1.5, 0.05).unwrap();
        assert!((s - std::f64::consts::E).abs() < 0.1, "{s}");
    }

    #[test]
    fn nonparametric_slope_errors() {
        let roc = RocCurve::from_points(vec![
            RocPoint { tau: 0.0, fpr: 1.0, tpr: 1.0 },
            RocPoint { tau: 1.0, fpr: 0.5, tpr: 0.8 },
            RocPoint { tau: 2.0, fpr: 0.0, tpr: 0.0 },
        ])
        .unwrap();
        assert!(matches!(roc_slope_nonparametric(&roc, 3.0, 1.0), Err(Error::TauOutOfRange { .. })));
        assert!(matches!(roc_slope_nonparametric(&roc, 1.0, 0.5), Err(Error::InsufficientPoints { .. })));
        assert!(matches!(roc_slope_nonparametric(&roc, 1.0, -1.0), Err(Error::InvalidBandwidth(_))));
        assert!(roc_slope_nonparametric(&roc, 1.0, 1.0).is_ok());

        let flat = RocCurve::from_points(vec![
            RocPoint { tau: 0.0, fpr: 0.0, tpr: 1.0 },
            RocPoint { tau: 1.0, fpr: 0.0, tpr: 0.5 },
            RocPoint { tau: 2.0, fpr: 0.0, tpr: 0.0 },
        ])
        .unwrap();
        assert!(matches!(roc_slope_nonparametric(&flat, 1.0, 1.0), Err(Error::FlatFprWindow { .. })));
    }

    #[test]
    fn curve_validation() {
        let rising = vec![
            RocPoint { tau: 0.0, fpr: 0.5, tpr: 0.5 },
            RocPoint { tau: 1.0, fpr: 0.6, tpr: 0.4 },
        ];
        assert!(RocCurve::from_points(rising).is_err());
        assert!(RocCurve::from_points(vec![RocPoint { tau: 0.0, fpr: 1.2, tpr: 0.0 }]).is_err());
    }

    fn arb_log() -> impl Strategy<Value = DecisionLog> {
        prop::collection::vec((-5.0f64..5.0, any::<bool>(), any::<bool>()), 4..80).prop_map(|raw| {
            let mut records: Vec<Record> = raw.into_iter().map(|(s, a, y)| Record::new(s, a, y)).collect();
            // guarantee two of each class
            records[0].truth = false;
            records[1].truth = false;
            records[2].truth = true;
            records[3].truth = true;
            DecisionLog::new(records).unwrap()
        })
    }

    proptest! {
        #[test]
        fn empirical_roc_is_monotone(log in arb_log()) {
            let roc = build_empirical_roc(&log, None).unwrap();
            let pts = roc.points();
            prop_assert_eq!((pts[0].fpr, pts[0].tpr), (1.0, 1.0));
            prop_assert_eq!((pts[pts.len() - 1].fpr, pts[pts.len() - 1].tpr), (0.0, 0.0));
            for w in pts.windows(2) {
                prop_assert!(w[1].tau > w[0].tau);
                prop_assert!(w[1].fpr <= w[0].fpr && w[1].tpr <= w[0].tpr);
            }
        }

        #[test]
        fn parametric_slope_is_positive(
            mu0 in -5.0f64..5.0, s0 in 0.5f64..5.0, mu1 in -5.0f64..5.0, s1 in 0.5f64..5.0, tau in -8.0f64..8.0
        ) {
            let fit = BinormalFit::new(mu0, s0, mu1, s1).unwrap();
            prop_assert!(fit.slope(tau, SlopeForm::Exact) > 0.0);
            prop_assert!(fit.slope(tau, SlopeForm::DensityRatio) > 0.0);
            let d = fit.derivatives(tau);
            prop_assert!(d.d_tpr_d_tau <= 0.0 && d.d_fpr_d_tau <= 0.0);
        }
    }
}
