//! Browser bindings for the interactive demo in `www/`.
//!
//! Each exported function takes plain numbers and returns a JS object built
//! with `serde-wasm-bindgen`. The computations live in ordinary functions so
//! they can be tested natively.

use ethics2vec::sim::{run_car_law, BinaryExperimentConfig, CarExperimentConfig};
use ethics2vec::{
    audit_binary_agent, build_empirical_roc, ethics_vector_binary, expected_loss, optimal_threshold, AuditConfig,
    AuditMethod, BinormalFit, ClassPriors, LossMatrix, SlopeForm,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const CURVE_POINTS: usize = 200;

#[derive(Debug, Serialize)]
pub struct ThresholdView {
    pub tau_star: f64,
    pub fpr: f64,
    pub tpr: f64,
    pub d_tpr_d_tau: f64,
    pub d_fpr_d_tau: f64,
    pub slope: f64,
    /// `(fpr, tpr)` along the binormal curve.
    pub roc: Vec<(f64, f64)>,
    /// `(tau, expected loss)` around the optimum.
    pub loss: Vec<(f64, f64)>,
}

pub fn threshold_view(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64, ratio: f64, p_pos: f64) -> Result<ThresholdView, String> {
    let fit = BinormalFit::new(mu0, sigma0, mu1, sigma1).map_err(|e| e.to_string())?;
    let priors = ClassPriors::from_positive(p_pos).map_err(|e| e.to_string())?;
    let losses = LossMatrix::from_ratio(ratio).map_err(|e| e.to_string())?;
    let tau_star = optimal_threshold(&fit, &priors, &losses).map_err(|e| e.to_string())?;
    let e = ethics_vector_binary(&fit, tau_star);

    let lo = (mu0 - 4.0 * sigma0).min(mu1 - 4.0 * sigma1);
    let hi = (mu0 + 4.0 * sigma0).max(mu1 + 4.0 * sigma1);
    let taus: Vec<f64> = (0..=CURVE_POINTS).map(|k| lo + (hi - lo) * k as f64 / CURVE_POINTS as f64).collect();
    Ok(ThresholdView {
        tau_star,
        fpr: fit.fpr(tau_star),
        tpr: fit.tpr(tau_star),
        d_tpr_d_tau: e.d_tpr_d_tau,
        d_fpr_d_tau: e.d_fpr_d_tau,
        slope: fit.slope(tau_star, SlopeForm::Exact),
        roc: taus.iter().map(|&t| (fit.fpr(t), fit.tpr(t))).collect(),
        loss: taus.iter().map(|&t| (t, expected_loss(t, &fit, &priors, &losses))).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct RecoveryView {
    pub true_ratio: f64,
    pub true_tau_star: f64,
    pub recovered_ratio: f64,
    pub recovered_tau: f64,
    pub slope: f64,
    pub operating_point: (f64, f64),
    /// Empirical `(fpr, tpr)`, thinned for plotting.
    pub roc: Vec<(f64, f64)>,
}

pub fn recovery_view(ratio: f64, n: usize, seed: u64, nonparametric: bool) -> Result<RecoveryView, String> {
    let config = BinaryExperimentConfig { ratios: vec![ratio], n_per_agent: n, seed, ..Default::default() };
    config.validate().map_err(|e| e.to_string())?;
    let (log, true_tau_star) = ethics2vec::sim::generate_binary_agent_log(ratio, &config).map_err(|e| e.to_string())?;
    let method = if nonparametric { AuditMethod::Nonparametric } else { AuditMethod::Parametric };
    let audit = audit_binary_agent(&log, &AuditConfig { method, ..Default::default() }).map_err(|e| e.to_string())?;
    let roc = build_empirical_roc(&log, None).map_err(|e| e.to_string())?;
    let stride = (roc.points().len() / 400).max(1);
    Ok(RecoveryView {
        true_ratio: ratio,
        true_tau_star,
        recovered_ratio: audit.recovered_ratio,
        recovered_tau: audit.threshold.tau,
        slope: audit.slope,
        operating_point: audit.operating_point,
        roc: roc.points().iter().step_by(stride).map(|p| (p.fpr, p.tpr)).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct LawView {
    pub id: usize,
    pub u_start: f64,
    pub e1: f64,
    pub e2: f64,
    pub ratio_of_sums: f64,
    pub sum_of_ratios: f64,
    pub arrival_time: Option<f64>,
    /// `(t, x, u)` samples of the simulated trajectory.
    pub trajectory: Vec<(f64, f64, f64)>,
}

pub fn car_view(k: f64, u0: f64, a: f64, dt: f64) -> Result<Vec<LawView>, String> {
    let mut config = CarExperimentConfig { dt, ..Default::default() };
    config.accident.k = k;
    config.accident.u0 = u0;
    config.lateness.a = a;
    config.validate().map_err(|e| e.to_string())?;
    config
        .control_laws()
        .iter()
        .map(|law| {
            let (r, trajectory, _) = run_car_law(&config, law).map_err(|e| e.to_string())?;
            let stride = (trajectory.steps.len() / 100).max(1);
            Ok(LawView {
                id: r.id,
                u_start: law.u_start,
                e1: r.aggregate[0],
                e2: r.aggregate[1],
                ratio_of_sums: r.ratio_of_sums,
                sum_of_ratios: r.sum_of_ratios,
                arrival_time: r.arrival_time,
                trajectory: trajectory.steps.iter().step_by(stride).map(|s| (s.t, s.x, s.u)).collect(),
            })
        })
        .collect()
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<JsValue, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_wasm_bindgen::to_value(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Optimal threshold, operating point and embedding of a binormal agent.
#[wasm_bindgen(js_name = exploreThreshold)]
pub fn explore_threshold(
    mu0: f64,
    sigma0: f64,
    mu1: f64,
    sigma1: f64,
    ratio: f64,
    p_pos: f64,
) -> Result<JsValue, JsError> {
    to_js(threshold_view(mu0, sigma0, mu1, sigma1, ratio, p_pos))
}

/// Simulates an agent with a known loss ratio and audits its action log.
#[wasm_bindgen(js_name = recoverAgent)]
pub fn recover_agent(ratio: f64, n: u32, seed: u32, nonparametric: bool) -> Result<JsValue, JsError> {
    to_js(recovery_view(ratio, n as usize, u64::from(seed), nonparametric))
}

/// Profiles the ten car control laws under the given risk parameters.
#[wasm_bindgen(js_name = carExperiment)]
pub fn car_experiment(k: f64, u0: f64, a: f64, dt: f64) -> Result<JsValue, JsError> {
    to_js(car_view(k, u0, a, dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_view_closed_form() {
        let v = threshold_view(0.0, 1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((v.tau_star - (0.5 + 2f64.ln())).abs() < 1e-9);
        assert!((v.slope - 2.0).abs() < 1e-9);
        assert_eq!(v.roc.len(), CURVE_POINTS + 1);
        let min_loss = v.loss.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let fit = BinormalFit::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let at_star = expected_loss(v.tau_star, &fit, &ClassPriors::balanced(), &LossMatrix::from_ratio(2.0).unwrap());
        assert!(at_star <= min_loss + 1e-12);
    }

    #[test]
    fn threshold_view_reports_bad_input() {
        assert!(threshold_view(0.0, -1.0, 1.0, 1.0, 2.0, 0.5).is_err());
        assert!(threshold_view(0.0, 1.0, 1.0, 1.0, 2.0, 1.5).is_err());
    }

    #[test]
    fn recovery_view_is_close() {
        let v = recovery_view(3.0, 20_000, 1, false).unwrap();
        assert!((v.recovered_ratio - 3.0).abs() / 3.0 < 0.15);
        assert!(v.roc.len() <= 801);
    }

    #[test]
    fn car_view_default_parameters() {
        let laws = car_view(0.08, 110.0, 3.0, 0.01).unwrap();
        assert_eq!(laws.len(), 10);
        assert!(laws.windows(2).all(|w| w[1].ratio_of_sums > w[0].ratio_of_sums));
        assert!(car_view(0.08, 110.0, 3.0, 0.03).is_err());
    }
}
