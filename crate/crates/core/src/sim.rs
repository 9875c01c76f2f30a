//! Ground-truth generators for the binary and car experiments, plus the
//! brute-force threshold oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::binary::{
    audit_binary_agent, expected_loss, optimal_threshold, AuditConfig, BinaryAudit, LossMatrix,
};
use crate::continuous::{
    aggregate_ethics_vector, ethics_trace, simulate_trajectory, stationarity_residual, weight_ratio,
    ControlLaw, DerivativeSettings, EthicsTrace, RiskModel, SimulationSettings, Trajectory,
    WeightRatioMethod,
};
use crate::error::{Error, Result};
use crate::roc::{BinormalFit, ClassPriors, DecisionLog, Record};

/// Identifies the pseudo-random stream so other implementations can tell
/// where their draws may diverge.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng::seed_from_u64(splitmix64(seed + index * 0x9E3779B97F4A7C15)); \
     truth = uniform f64 < p_p; score = mu + sigma * StandardNormal (rand_distr 0.4 ziggurat)";

/// Loss ratios `l_fp / l_fn` of the twenty reference agents.
pub fn default_ratios() -> Vec<f64> {
    vec![
        0.10, 0.14, 0.19, 0.23, 0.28, 0.32, 0.37, 0.41, 0.46, 0.50, //
        2.00, 2.33, 2.67, 3.00, 3.33, 3.67, 4.00, 4.33, 4.67, 5.00,
    ]
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for the `index`-th agent of an experiment.
pub fn agent_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinaryExperimentConfig {
    pub ratios: Vec<f64>,
    pub n_per_agent: usize,
    pub fit: BinormalFit,
    pub priors: ClassPriors,
    pub seed: u64,
}

impl Default for BinaryExperimentConfig {
    fn default() -> Self {
        Self {
            ratios: default_ratios(),
            n_per_agent: 100_000,
            fit: BinormalFit { mu0: 0.0, sigma0: 1.0, mu1: 1.0, sigma1: 1.0 },
            priors: ClassPriors::balanced(),
            seed: 20_240_901,
        }
    }
}

impl BinaryExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() {
            return Err(Error::InvalidConfig("ratios must not be empty".into()));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidConfig(format!("ratio {r} must be positive")));
        }
        if self.n_per_agent < 100 {
            return Err(Error::InvalidConfig(format!("n_per_agent={} is below 100", self.n_per_agent)));
        }
        BinormalFit::new(self.fit.mu0, self.fit.sigma0, self.fit.mu1, self.fit.sigma1)?;
        ClassPriors::new(self.priors.p_n(), self.priors.p_p())?;
        Ok(())
    }
}

/// Samples a log from an agent that thresholds optimally for `ratio`,
/// drawing from `config.seed`.
pub fn generate_binary_agent_log(ratio: f64, config: &BinaryExperimentConfig) -> Result<(DecisionLog, f64)> {
    let losses = LossMatrix::from_ratio(ratio)?;
    let tau_star = optimal_threshold(&config.fit, &config.priors, &losses)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fit = &config.fit;
    let records = (0..config.n_per_agent)
        .map(|_| {
            let truth = rng.gen::<f64>() < config.priors.p_p();
            let z: f64 = rng.sample(StandardNormal);
            let score = if truth { fit.mu1 + fit.sigma1 * z } else { fit.mu0 + fit.sigma0 * z };
            Record::new(score, score >= tau_star, truth)
        })
        .collect();
    Ok((DecisionLog::new(records)?, tau_star))
}

/// One row of the binary recovery experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryAgentResult {
    pub index: usize,
    pub true_ratio: f64,
    pub true_tau_star: f64,
    pub seed: u64,
    pub audit: BinaryAudit,
}

/// Generates and audits the `index`-th agent of the experiment.
pub fn run_binary_agent(config: &BinaryExperimentConfig, audit: &AuditConfig, index: usize) -> Result<BinaryAgentResult> {
    let true_ratio = *config
        .ratios
        .get(index)
        .ok_or_else(|| Error::InvalidConfig(format!("no agent with index {index}")))?;
    let seed = agent_seed(config.seed, index);
    let agent_config = BinaryExperimentConfig { seed, ..config.clone() };
    let (log, true_tau_star) = generate_binary_agent_log(true_ratio, &agent_config)?;
    Ok(BinaryAgentResult { index, true_ratio, true_tau_star, seed, audit: audit_binary_agent(&log, audit)? })
}

/// Exhaustive minimizer of the expected loss over `lo, lo + step, ..., hi`.
pub fn grid_search_threshold_oracle(
    fit: &BinormalFit,
    priors: &ClassPriors,
    losses: &LossMatrix,
    range: (f64, f64),
    step: f64,
) -> f64 {
    let (lo, hi) = range;
    let n = ((hi - lo) / step).floor() as usize;
    let mut best = (lo, expected_loss(lo, fit, priors, losses));
    for k in 1..=n {
        let tau = lo + k as f64 * step;
        let loss = expected_loss(tau, fit, priors, losses);
        if loss < best.1 {
            best = (tau, loss);
        }
    }
    best.0
}

/// Speed falling linearly from `u_start` at the origin to `u_end` at the
/// destination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSlowdownLaw {
    pub id: usize,
    pub u_start: f64,
    pub u_end: f64,
    pub destination: f64,
}

impl ControlLaw for LinearSlowdownLaw {
    fn action(&self, position: f64) -> f64 {
        self.u_end + (self.u_start - self.u_end) * (1.0 - position / self.destination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LawFamilyParams {
    /// Speed of every law at the destination, km/h.
    pub u_min: f64,
    /// Starting speed of law 1, km/h.
    pub u_start_first: f64,
    /// Reduction of the starting speed per law index, km/h.
    pub u_start_step: f64,
}

impl Default for LawFamilyParams {
    fn default() -> Self {
        Self { u_min: 40.0, u_start_first: 130.0, u_start_step: 6.0 }
    }
}

/// Laws `1..=n_laws`; lower ids drive faster everywhere.
pub fn default_control_laws(params: &LawFamilyParams, n_laws: usize, destination: f64) -> Vec<LinearSlowdownLaw> {
    (1..=n_laws)
        .map(|id| LinearSlowdownLaw {
            id,
            u_start: params.u_start_first - params.u_start_step * (id - 1) as f64,
            u_end: params.u_min,
            destination,
        })
        .collect()
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccidentParams {
    /// Logistic steepness per km/h.
    pub k: f64,
    /// Speed at which the accident probability is one half, km/h.
    pub u0: f64,
}

impl Default for AccidentParams {
    fn default() -> Self {
        Self { k: 0.08, u0: 110.0 }
    }
}

/// Accident probability as a logistic function of speed alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccidentRisk {
    pub params: AccidentParams,
}

impl RiskModel for AccidentRisk {
    fn name(&self) -> &str {
        "accident"
    }

    fn eval(&self, _x: f64, u: f64, _t: f64) -> f64 {
        logistic(self.params.k * (u - self.params.u0))
    }

    fn analytic_derivative(&self, x: f64, u: f64, t: f64) -> Option<Result<f64>> {
        let r = self.eval(x, u, t);
        Some(Ok(self.params.k * r * (1.0 - r)))
    }
}

pub fn accident_risk_model(params: AccidentParams) -> AccidentRisk {
    AccidentRisk { params }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatenessParams {
    /// Logistic steepness per hour of projected delay.
    pub a: f64,
}

impl Default for LatenessParams {
    fn default() -> Self {
        Self { a: 3.0 }
    }
}

/// Probability of missing the deadline, driven by the projected delay
/// `(destination - x) / u - (horizon - t)` at the current speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatenessRisk {
    pub params: LatenessParams,
    pub destination: f64,
    pub horizon: f64,
}

impl LatenessRisk {
    fn projected_delay(&self, x: f64, u: f64, t: f64) -> f64 {
        (self.destination - x) / u - (self.horizon - t)
    }
}

impl RiskModel for LatenessRisk {
    fn name(&self) -> &str {
        "lateness"
    }

    fn eval(&self, x: f64, u: f64, t: f64) -> f64 {
        if x >= self.destination {
            return 0.0;
        }
        if u <= 0.0 {
            // stalled before arrival
            return 1.0;
        }
        logistic(self.params.a * self.projected_delay(x, u, t))
    }

    fn analytic_derivative(&self, x: f64, u: f64, t: f64) -> Option<Result<f64>> {
        if x >= self.destination {
            return Some(Ok(0.0));
        }
        if u <= 0.0 {
            return Some(Err(Error::DivisionByZeroSpeed { x }));
        }
        let r = self.eval(x, u, t);
        let d_delay_du = -(self.destination - x) / (u * u);
        Some(Ok(self.params.a * r * (1.0 - r) * d_delay_du))
    }
}

pub fn lateness_risk_model(params: LatenessParams, destination: f64, horizon: f64) -> LatenessRisk {
    LatenessRisk { params, destination, horizon }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarExperimentConfig {
    pub destination: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_laws: usize,
    pub u_max: f64,
    pub derivative_step: f64,
    pub laws: LawFamilyParams,
    pub accident: AccidentParams,
    pub lateness: LatenessParams,
    /// Recorded for reproducibility; the car experiment itself draws no
    /// random numbers.
    pub seed: u64,
}

impl Default for CarExperimentConfig {
    fn default() -> Self {
        Self {
            destination: 250.0,
            horizon: 4.0,
            dt: 0.01,
            n_laws: 10,
            u_max: 200.0,
            derivative_step: 1e-3,
            laws: LawFamilyParams::default(),
            accident: AccidentParams::default(),
            lateness: LatenessParams::default(),
            seed: 20_240_901,
        }
    }
}

impl CarExperimentConfig {
    pub fn simulation(&self) -> SimulationSettings {
        SimulationSettings { horizon: self.horizon, dt: self.dt, destination: self.destination, u_max: self.u_max }
    }

    pub fn derivatives(&self) -> DerivativeSettings {
        DerivativeSettings { step: self.derivative_step, u_max: self.u_max }
    }

    pub fn control_laws(&self) -> Vec<LinearSlowdownLaw> {
        default_control_laws(&self.laws, self.n_laws, self.destination)
    }

    pub fn risks(&self) -> (AccidentRisk, LatenessRisk) {
        (
            accident_risk_model(self.accident),
            lateness_risk_model(self.lateness, self.destination, self.horizon),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_laws == 0 {
            return Err(Error::InvalidConfig("n_laws must be at least 1".into()));
        }
        if !(self.derivative_step.is_finite() && self.derivative_step > 0.0) {
            return Err(Error::InvalidConfig("derivative_step must be positive".into()));
        }
        crate::continuous::step_count(self.horizon, self.dt)?;
        Ok(())
    }
}

/// Everything the car experiment reports for one control law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawResult {
    pub id: usize,
    pub law: LinearSlowdownLaw,
    pub aggregate: Vec<f64>,
    /// Average over the whole-hour samples only.
    pub hourly_aggregate: Vec<f64>,
    pub ratio_of_sums: f64,
    pub sum_of_ratios: f64,
    /// `|sum_t W . E(t)|` at the recovered weights `(ratio, 1)`.
    pub stationarity_residual: f64,
    pub absolute_mass: f64,
    /// Largest per-step `|W . E(t)|` at the same weights.
    pub max_step_residual: f64,
    pub arrival_time: Option<f64>,
    pub final_position: f64,
}

/// Simulates one law and profiles its risk derivatives.
pub fn run_car_law(config: &CarExperimentConfig, law: &LinearSlowdownLaw) -> Result<(LawResult, Trajectory, EthicsTrace)> {
    let trajectory = simulate_trajectory(law, &config.simulation())?;
    let (accident, lateness) = config.risks();
    let risks: [&dyn RiskModel; 2] = [&accident, &lateness];
    let trace = ethics_trace(&trajectory, &risks, &config.derivatives())?;
    let aggregate = aggregate_ethics_vector(&trace)?;
    let hourly = trace.sampled_every(1.0);
    let hourly_aggregate = aggregate_ethics_vector(&hourly)?;
    let ratio_of_sums = weight_ratio(&trace, WeightRatioMethod::RatioOfSums)?.value;
    let sum_of_ratios = weight_ratio(&trace, WeightRatioMethod::SumOfRatios)?.value;
    let weights = [ratio_of_sums, 1.0];
    let max_step_residual = crate::continuous::per_step_residuals(&trace, &weights)
        .into_iter()
        .fold(0.0, |m: f64, r| m.max(r.abs()));
    let result = LawResult {
        id: law.id,
        law: *law,
        aggregate,
        hourly_aggregate,
        ratio_of_sums,
        sum_of_ratios,
        stationarity_residual: stationarity_residual(&trace, &weights).abs(),
        absolute_mass: trace.absolute_mass(),
        max_step_residual,
        arrival_time: trajectory.arrival_time(),
        final_position: trajectory.final_position(),
    };
    Ok((result, trajectory, trace))
}
