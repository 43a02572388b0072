use serde::{Deserialize, Serialize};

use super::{ActivationVector, Fcm, Trajectory};
use crate::error::Result;

/// Outcome of running the same map from two initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub baseline: Trajectory,
    pub perturbed: Trajectory,
    /// `perturbed_final - baseline_final`, per concept.
    pub deltas: Vec<f64>,
    /// Both runs reached a fixed point; deltas are only meaningful if so.
    pub converged: bool,
}

pub fn scenario_compare(fcm: &Fcm, baseline: &ActivationVector, perturbed: &ActivationVector) -> Result<ScenarioComparison> {
    let base_run = fcm.run(baseline)?;
    let pert_run = fcm.run(perturbed)?;
    let deltas = pert_run
        .final_state()
        .values()
        .iter()
        .zip(base_run.final_state().values())
        .map(|(p, b)| p - b)
        .collect();
    let converged = base_run.verdict.is_fixed_point() && pert_run.verdict.is_fixed_point();
    Ok(ScenarioComparison {
        baseline: base_run,
        perturbed: pert_run,
        deltas,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcm::{Concept, FcmConfig};

    fn zero_map(n: usize) -> Fcm {
        let c = (0..n).map(|i| Concept::new(i, format!("c{i}"))).collect();
        Fcm::build(c, &vec![vec![0.0; n]; n], FcmConfig::default()).unwrap()
    }

    #[test]
    fn identical_inputs_give_zero_deltas() {
        let m = zero_map(3);
        let s = ActivationVector::new(vec![0.2, 0.4, 0.9]).unwrap();
        let r = scenario_compare(&m, &s, &s).unwrap();
        assert!(r.deltas.iter().all(|&d| d == 0.0));
        assert!(r.converged);
    }

    #[test]
    fn zero_map_forgets_initial_state() {
        let m = zero_map(3);
        let a = ActivationVector::new(vec![0.0, 0.0, 0.0]).unwrap();
        let b = ActivationVector::new(vec![1.0, 0.3, 0.7]).unwrap();
        let r = scenario_compare(&m, &a, &b).unwrap();
        assert_eq!(r.deltas, vec![0.0; 3]);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let cfg = FcmConfig { max_iters: 1, ..FcmConfig::default() };
        let m = zero_map(2).with_config(cfg).unwrap();
        let a = ActivationVector::new(vec![0.0, 1.0]).unwrap();
        let r = scenario_compare(&m, &a, &a).unwrap();
        assert!(!r.converged);
    }
}
