use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// `‖w − w̃‖₂ / ‖w̃‖₂` over the concatenation of all node vectors.
pub fn relative_error(estimate: &[DVector<f64>], truth: &[DVector<f64>]) -> Result<f64> {
    check_dim(truth.len(), estimate.len())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, t) in estimate.iter().zip(truth) {
        check_dim(t.len(), w.len())?;
        num += (w - t).norm_squared();
        den += t.norm_squared();
    }
    if den == 0.0 {
        return Err(Error::ZeroTruth);
    }
    Ok((num / den).sqrt())
}

/// Per-node `‖w_n − w̃_n‖₂ / ‖w̃_n‖₂`.
pub fn per_node_relative_errors(estimate: &[DVector<f64>], truth: &[DVector<f64>]) -> Result<Vec<f64>> {
    check_dim(truth.len(), estimate.len())?;
    estimate
        .iter()
        .zip(truth)
        .map(|(w, t)| relative_error(std::slice::from_ref(w), std::slice::from_ref(t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessCriterion {
    pub window: usize,
    pub factor: f64,
    pub deadline: usize,
}

impl Default for SuccessCriterion {
    fn default() -> Self {
        Self {
            window: 20,
            factor: 1.1,
            deadline: 1000,
        }
    }
}

/// First window `[t, t + window − 1]` ending no later than the deadline whose
/// mean error is below `factor · benchmark`; returns its midpoint rounded down.
///
/// `curve[0]` is the error at `t = 1`.
pub fn detect_success(curve: &[f64], benchmark: f64, criterion: &SuccessCriterion) -> Option<usize> {
    let len = criterion.window;
    if len == 0 {
        return None;
    }
    let last = criterion.deadline.min(curve.len());
    if last < len {
        return None;
    }
    let threshold = criterion.factor * benchmark;
    for start in 0..=(last - len) {
        let mean = curve[start..start + len].iter().sum::<f64>() / len as f64;
        if mean < threshold {
            let t = start + 1;
            return Some(t + (len - 1) / 2);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Vec<DVector<f64>> {
        vec![DVector::from_vec(vec![1.0, -2.0]), DVector::from_vec(vec![0.0, 3.0])]
    }

    #[test]
    fn relative_error_cases() {
        let t = truth();
        assert_eq!(relative_error(&t, &t).unwrap(), 0.0);
        let zero = vec![DVector::zeros(2); 2];
        assert_eq!(relative_error(&zero, &t).unwrap(), 1.0);
        let double: Vec<_> = t.iter().map(|w| 2.0 * w).collect();
        assert!((relative_error(&double, &t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_truth_is_an_error() {
        let zero = vec![DVector::zeros(2); 2];
        assert!(matches!(relative_error(&truth(), &zero), Err(Error::ZeroTruth)));
    }

    #[test]
    fn per_node_errors() {
        let t = truth();
        let est = vec![t[0].clone(), DVector::zeros(2)];
        assert_eq!(per_node_relative_errors(&est, &t).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn success_immediately() {
        let c = SuccessCriterion::default();
        assert_eq!(detect_success(&vec![0.05; 1000], 0.1, &c), Some(10));
    }

    #[test]
    fn never_successful() {
        let c = SuccessCriterion::default();
        assert_eq!(detect_success(&vec![0.2; 1000], 0.1, &c), None);
    }

    #[test]
    fn step_down_uses_window_mean() {
        // Errors 2ě before t = 100, 0.9ě from t = 100 on. The window starting
        // at t = 97 holds three 2ě values: mean 0.9 + 3·1.1/20 = 1.065 < 1.1.
        let c = SuccessCriterion::default();
        let curve: Vec<f64> = (1..=1000).map(|t| if t < 100 { 2.0 } else { 0.9 }).collect();
        assert_eq!(detect_success(&curve, 1.0, &c), Some(106));
    }

    #[test]
    fn window_must_close_before_deadline() {
        let c = SuccessCriterion::default();
        let mut curve = vec![1.0; 1000];
        for e in curve.iter_mut().skip(985) {
            *e = 0.0;
        }
        assert_eq!(detect_success(&curve, 0.01, &c), None);
        let c_late = SuccessCriterion { deadline: 1005, ..c };
        curve.extend(vec![0.0; 5]);
        assert_eq!(detect_success(&curve, 0.01, &c_late), Some(995));
    }
}
