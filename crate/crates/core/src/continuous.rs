//! Risk-derivative profiles of continuous-action agents.
//!
//! For a control law `u = K(x)` and risks `r_i(x, u, t)`, the per-step vector
//! `E(t) = [d r_1/du, ..., d r_R/du]` evaluated at the deployed action
//! describes how the law trades one risk against another. If the law is
//! stationary for a weighted-sum loss `sum_t sum_i w_i r_i`, the weights
//! satisfy `sum_t W . E(t) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roc::DENOMINATOR_GUARD;

/// Maps an observed position to a commanded speed.
pub trait ControlLaw: Send + Sync {
    fn action(&self, position: f64) -> f64;
}

impl<F> ControlLaw for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn action(&self, position: f64) -> f64 {
        self(position)
    }
}

/// Probability of an adverse event given state, action and time.
///
/// Implementations must be reentrant; `eval` is called concurrently.
pub trait RiskModel: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: f64, u: f64, t: f64) -> f64;

    /// Closed-form `d eval / du`, when the model has one.
    fn analytic_derivative(&self, _x: f64, _u: f64, _t: f64) -> Option<Result<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// Kinematic history on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub dt: f64,
    pub destination: f64,
}

impl Trajectory {
    pub fn final_position(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.x)
    }

    /// First time the destination was reached, if it was.
    pub fn arrival_time(&self) -> Option<f64> {
        self.steps.iter().find(|s| s.x >= self.destination).map(|s| s.t)
    }

    /// Checks grid spacing, start, monotonicity and the Euler update
    /// `x(k+1) = min(destination, x(k) + u(k) dt)`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSimulation(msg));
        let Some(first) = self.steps.first() else {
            return bad("trajectory has no steps".into());
        };
        if first.x != 0.0 {
            return bad(format!("trajectory starts at x={} instead of 0", first.x));
        }
        for (k, w) in self.steps.windows(2).enumerate() {
            if ((w[1].t - w[0].t) - self.dt).abs() > 1e-9 {
                return bad(format!("non-uniform time step after step {k}"));
            }
            if w[1].x < w[0].x {
                return bad(format!("position decreases after step {k}"));
            }
            let expected = (w[0].x + w[0].u * self.dt).min(self.destination);
            if (w[1].x - expected).abs() > 1e-9 {
                return bad(format!("position update inconsistent after step {k}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSettings {
    /// Hours.
    pub horizon: f64,
    /// Hours.
    pub dt: f64,
    /// Kilometres.
    pub destination: f64,
    /// Largest admissible speed, km/h.
    pub u_max: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self { horizon: 4.0, dt: 0.01, destination: 250.0, u_max: 200.0 }
    }
}

/// Number of Euler steps in the horizon.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0 && horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidHorizon { horizon, dt });
    }
    let steps = (horizon / dt).round();
    if steps < 1.0 || (steps * dt - horizon).abs() > 1e-9 {
        return Err(Error::InvalidHorizon { horizon, dt });
    }
    Ok(steps as usize)
}

/// Forward-Euler rollout from `x = 0` over `[0, horizon]`.
///
/// Returns `horizon / dt + 1` samples including both ends. Once the
/// destination is reached the position is held there and the speed is 0.
pub fn simulate_trajectory(law: &dyn ControlLaw, settings: &SimulationSettings) -> Result<Trajectory> {
    let n = step_count(settings.horizon, settings.dt)?;
    if !(settings.destination.is_finite() && settings.destination > 0.0) {
        return Err(Error::InvalidSimulation(format!("destination {} must be positive", settings.destination)));
    }
    let dest = settings.destination;
    let mut steps = Vec::with_capacity(n + 1);
    let mut x = 0.0;
    for k in 0..=n {
        let t = k as f64 * settings.dt;
        let u = if x >= dest {
            0.0
        } else {
            let u = law.action(x);
            if !(u.is_finite() && (0.0..=settings.u_max).contains(&u)) {
                return Err(Error::ActionOutOfRange { x, u, u_max: settings.u_max });
            }
            u
        };
        steps.push(TrajectoryStep { t, x, u });
        x += u * settings.dt;
        if x >= dest - 1e-9 {
            x = dest;
        }
    }
    Ok(Trajectory { steps, dt: settings.dt, destination: dest })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeSettings {
    /// Central-difference half-step, km/h.
    pub step: f64,
    /// Upper end of the action range the stencil must stay within.
    pub u_max: f64,
}

impl Default for DerivativeSettings {
    fn default() -> Self {
        Self { step: 1e-3, u_max: 200.0 }
    }
}

/// Central difference of a risk in the action.
pub fn central_difference(model: &dyn RiskModel, x: f64, u: f64, t: f64, h: f64) -> f64 {
    (model.eval(x, u + h, t) - model.eval(x, u - h, t)) / (2.0 * h)
}

/// `d r / du` at `(x, u, t)`: the analytic form when available, otherwise a
/// central difference with half-step `settings.step`.
pub fn risk_derivative(model: &dyn RiskModel, x: f64, u: f64, t: f64, settings: &DerivativeSettings) -> Result<f64> {
    let h = settings.step;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSimulation(format!("derivative step {h} must be positive")));
    }
    let (lo, hi) = (u - h, u + h);
    if lo < 0.0 || hi > settings.u_max {
        return Err(Error::RangeViolation { lo, hi, u_max: settings.u_max });
    }
    match model.analytic_derivative(x, u, t) {
        Some(d) => d,
        None => Ok(central_difference(model, x, u, t, h)),
    }
}

/// Per-step risk-derivative vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EthicsTrace {
    pub risk_names: Vec<String>,
    pub times: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EthicsTrace {
    pub fn new(risk_names: Vec<String>, times: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let r = risk_names.len();
        let well_formed = times.len() == vectors.len()
            && vectors.iter().all(|v| v.len() == r && v.iter().all(|e| e.is_finite()));
        if !well_formed {
            return Err(Error::MalformedTrace);
        }
        Ok(Self { risk_names, times, vectors })
    }

    pub fn risk_count(&self) -> usize {
        self.risk_names.len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Componentwise sum over steps: the coefficients of the aggregate
    /// stationarity constraint `sum_i w_i S_i = 0`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.risk_count()];
        for v in &self.vectors {
            for (s, e) in sums.iter_mut().zip(v) {
                *s += e;
            }
        }
        sums
    }

    /// `sum_t sum_i |E_i(t)|`.
    pub fn absolute_mass(&self) -> f64 {
        self.vectors.iter().flatten().map(|e| e.abs()).sum()
    }

    /// Steps sampled at whole multiples of `period` (e.g. every hour),
    /// excluding `t = 0`.
    pub fn sampled_every(&self, period: f64) -> EthicsTrace {
        let keep: Vec<usize> = self
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| {
                let m = (t / period).round();
                m >= 1.0 && (t - m * period).abs() < 1e-9
            })
            .map(|(i, _)| i)
            .collect();
        EthicsTrace {
            risk_names: self.risk_names.clone(),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            vectors: keep.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }
}

/// Evaluates `E(t)` along a trajectory. Steps at or past the destination
/// carry no action and contribute a zero vector.
pub fn ethics_trace(
    trajectory: &Trajectory,
    risks: &[&dyn RiskModel],
    settings: &DerivativeSettings,
) -> Result<EthicsTrace> {
    let mut vectors = Vec::with_capacity(trajectory.steps.len());
    for step in &trajectory.steps {
        if step.x >= trajectory.destination {
            vectors.push(vec![0.0; risks.len()]);
            continue;
        }
        let v = risks
            .iter()
            .map(|r| risk_derivative(*r, step.x, step.u, step.t, settings))
            .collect::<Result<Vec<f64>>>()?;
        vectors.push(v);
    }
    EthicsTrace::new(
        risks.iter().map(|r| r.name().to_string()).collect(),
        trajectory.steps.iter().map(|s| s.t).collect(),
        vectors,
    )
}

/// Time-average of the trace.
pub fn aggregate_ethics_vector(trace: &EthicsTrace) -> Result<Vec<f64>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = trace.len() as f64;
    Ok(trace.column_sums().into_iter().map(|s| s / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRatioMethod {
    /// `-(sum_t E_2) / (sum_t E_1)`, the exact solution of the aggregate
    /// stationarity condition.
    #[default]
    RatioOfSums,
    /// `-sum_t (E_2 / E_1)` over the steps where an action was taken.
    SumOfRatios,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRatio {
    /// `w_1 / w_2`.
    pub value: f64,
    pub method: WeightRatioMethod,
}

/// Relative weight `w_1 / w_2` of a two-risk trace.
pub fn weight_ratio(trace: &EthicsTrace, method: WeightRatioMethod) -> Result<WeightRatio> {
    if trace.risk_count() != 2 {
        return Err(Error::NotTwoRisks(trace.risk_count()));
    }
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let value = match method {
        WeightRatioMethod::RatioOfSums => {
            let sums = trace.column_sums();
            if sums[0].abs() < DENOMINATOR_GUARD {
                return Err(Error::DegenerateDenominator(sums[0]));
            }
            -sums[1] / sums[0]
        }
        WeightRatioMethod::SumOfRatios => {
            let mut total = 0.0;
            let mut active = 0;
            // all-zero rows are steps without an action
            for v in trace.vectors.iter().filter(|v| v.iter().any(|e| *e != 0.0)) {
                if v[0].abs() < DENOMINATOR_GUARD {
                    return Err(Error::DegenerateDenominator(v[0]));
                }
                total -= v[1] / v[0];
                active += 1;
            }
            if active == 0 {
                return Err(Error::DegenerateDenominator(0.0));
            }
            total
        }
    };
    if !value.is_finite() {
        return Err(Error::DegenerateDenominator(f64::NAN));
    }
    Ok(WeightRatio { value, method })
}

/// `sum_t W . E(t)` for the given weights.
pub fn stationarity_residual(trace: &EthicsTrace, weights: &[f64]) -> f64 {
    trace
        .vectors
        .iter()
        .map(|v| v.iter().zip(weights).map(|(e, w)| e * w).sum::<f64>())
        .sum()
}

/// Per-step `W . E(t)`; zero everywhere only if every step is stationary
/// on its own.
pub fn per_step_residuals(trace: &EthicsTrace, weights: &[f64]) -> Vec<f64> {
    trace
        .vectors
        .iter()
        .map(|v| v.iter().zip(weights).map(|(e, w)| e * w).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Constant(f64);

    impl RiskModel for Constant {
        fn name(&self) -> &str {
            "constant"
        }

        fn eval(&self, _x: f64, _u: f64, _t: f64) -> f64 {
            self.0
        }
    }

    fn trace_of(rows: &[[f64; 2]]) -> EthicsTrace {
        EthicsTrace::new(
            vec!["a".into(), "b".into()],
            (0..rows.len()).map(|i| i as f64).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_speed_arrives_on_time() {
        let law = |_x: f64| 62.5;
        let traj = simulate_trajectory(&law, &SimulationSettings::default()).unwrap();
        let last = traj.steps.last().unwrap();
        assert_eq!(last.t, 4.0);
        assert_eq!(last.x, 250.0);
        traj.validate().unwrap();
    }

    #[test]
    fn fast_car_parks_at_destination() {
        let law = |_x: f64| 100.0;
        let traj = simulate_trajectory(&law, &SimulationSettings::default()).unwrap();
        let arrival = traj.arrival_time().unwrap();
        assert_relative_eq!(arrival, 2.5, epsilon = 1e-9);
        for s in traj.steps.iter().filter(|s| s.t >= 2.5 - 1e-9) {
            assert_eq!((s.x, s.u), (250.0, 0.0));
        }
        traj.validate().unwrap();
    }

    #[test]
    fn horizon_must_be_a_multiple_of_dt() {
        let law = |_x: f64| 50.0;
        let settings = SimulationSettings { dt: 0.3, ..SimulationSettings::default() };
        assert!(matches!(simulate_trajectory(&law, &settings), Err(Error::InvalidHorizon { .. })));
        let settings = SimulationSettings { dt: 0.0, ..SimulationSettings::default() };
        assert!(matches!(simulate_trajectory(&law, &settings), Err(Error::InvalidHorizon { .. })));
    }

    #[test]
    fn out_of_range_action_is_rejected() {
        let law = |_x: f64| 250.0;
        assert!(matches!(
            simulate_trajectory(&law, &SimulationSettings::default()),
            Err(Error::ActionOutOfRange { .. })
        ));
    }

    #[test]
    fn constant_risk_has_zero_derivative() {
        let d = risk_derivative(&Constant(0.3), 10.0, 90.0, 1.0, &DerivativeSettings::default()).unwrap();
        assert_eq!(d, 0.0);
        let traj = simulate_trajectory(&|_x: f64| 50.0, &SimulationSettings::default()).unwrap();
        let trace = ethics_trace(&traj, &[&Constant(0.3)], &DerivativeSettings::default()).unwrap();
        assert!(trace.vectors.iter().all(|v| v == &[0.0]));
    }

    #[test]
    fn stencil_must_stay_in_range() {
        let s = DerivativeSettings::default();
        assert!(matches!(risk_derivative(&Constant(0.1), 0.0, 0.0, 0.0, &s), Err(Error::RangeViolation { .. })));
        assert!(matches!(risk_derivative(&Constant(0.1), 0.0, 200.0, 0.0, &s), Err(Error::RangeViolation { .. })));
    }

    #[test]
    fn aggregate_is_the_mean() {
        assert_eq!(aggregate_ethics_vector(&trace_of(&[[1.0, -1.0], [3.0, -3.0]])).unwrap(), vec![2.0, -2.0]);
        assert_eq!(aggregate_ethics_vector(&trace_of(&[[0.5, -0.25]; 8])).unwrap(), vec![0.5, -0.25]);
        assert_eq!(aggregate_ethics_vector(&trace_of(&[])).unwrap_err(), Error::EmptyTrace);
    }

    #[test]
    fn balanced_derivatives() {
        let trace = trace_of(&[[0.7, -0.7]; 4]);
        assert_eq!(weight_ratio(&trace, WeightRatioMethod::RatioOfSums).unwrap().value, 1.0);
        // sum over steps, so it scales with the number of active steps
        assert_eq!(weight_ratio(&trace, WeightRatioMethod::SumOfRatios).unwrap().value, 4.0);
        assert_eq!(weight_ratio(&trace_of(&[[2.0, -1.0]]), WeightRatioMethod::RatioOfSums).unwrap().value, 0.5);
    }

    #[test]
    fn weight_ratio_errors() {
        let three = EthicsTrace::new(vec!["a".into(), "b".into(), "c".into()], vec![0.0], vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(weight_ratio(&three, WeightRatioMethod::RatioOfSums).unwrap_err(), Error::NotTwoRisks(3));
        let flat = trace_of(&[[0.0, -1.0], [0.0, -2.0]]);
        assert!(matches!(weight_ratio(&flat, WeightRatioMethod::RatioOfSums), Err(Error::DegenerateDenominator(_))));
        assert!(matches!(weight_ratio(&flat, WeightRatioMethod::SumOfRatios), Err(Error::DegenerateDenominator(_))));
    }

    #[test]
    fn idle_steps_are_skipped_by_sum_of_ratios() {
        let trace = trace_of(&[[1.0, -2.0], [0.0, 0.0], [2.0, -1.0]]);
        assert_eq!(weight_ratio(&trace, WeightRatioMethod::SumOfRatios).unwrap().value, 2.5);
    }

    #[test]
    fn malformed_trace_is_rejected() {
        assert_eq!(
            EthicsTrace::new(vec!["a".into()], vec![0.0], vec![vec![f64::NAN]]).unwrap_err(),
            Error::MalformedTrace
        );
        assert_eq!(
            EthicsTrace::new(vec!["a".into()], vec![0.0], vec![vec![1.0, 2.0]]).unwrap_err(),
            Error::MalformedTrace
        );
    }

    #[test]
    fn hourly_sampling() {
        let trace = EthicsTrace::new(
            vec!["a".into()],
            (0..=400).map(|k| k as f64 * 0.01).collect(),
            (0..=400).map(|k| vec![k as f64]).collect(),
        )
        .unwrap();
        let coarse = trace.sampled_every(1.0);
        assert_eq!(coarse.vectors, vec![vec![100.0], vec![200.0], vec![300.0], vec![400.0]]);
    }

    proptest! {
        #[test]
        fn ratio_of_sums_zeroes_the_stationarity_sum(
            rows in prop::collection::vec((0.001f64..10.0, -10.0f64..10.0), 1..60),
            scale in 0.1f64..10.0,
        ) {
            let rows: Vec<[f64; 2]> = rows.into_iter().map(|(a, b)| [a, b]).collect();
            let trace = trace_of(&rows);
            let ratio = weight_ratio(&trace, WeightRatioMethod::RatioOfSums).unwrap().value;
            let residual = stationarity_residual(&trace, &[ratio * scale, scale]);
            prop_assert!(residual.abs() <= 1e-9 * trace.absolute_mass() * scale);
        }

        #[test]
        fn methods_agree_for_proportional_traces(
            e1 in prop::collection::vec(0.001f64..10.0, 1..40),
            k in -5.0f64..5.0,
        ) {
            let rows: Vec<[f64; 2]> = e1.iter().map(|&a| [a, k * a]).collect();
            let trace = trace_of(&rows);
            let n = rows.len() as f64;
            let sums = weight_ratio(&trace, WeightRatioMethod::RatioOfSums).unwrap().value;
            let literal = weight_ratio(&trace, WeightRatioMethod::SumOfRatios).unwrap().value;
            prop_assert!((sums - (-k)).abs() <= 1e-9 * (1.0 + k.abs()));
            prop_assert!((literal / n - sums).abs() <= 1e-9 * (1.0 + k.abs()));
        }
    }
}
