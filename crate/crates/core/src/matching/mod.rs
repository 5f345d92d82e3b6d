//! Set matching between ground-truth and predicted rotated boxes.
//!
//! The pair cost rewards the predicted text probability and penalises box
//! L1 distance, generalized-IoU deficit and orientation error. Ground truth
//! is padded with "no object" entries to the prediction count, so the
//! optimal matching is a full permutation found by [`hungarian`].

mod hungarian;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{giou, RotatedBox};

pub use hungarian::{assign_rectangular, hungarian};

/// Lower clamp for probabilities fed to a logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchingError {
    #[error("cost matrix is empty")]
    EmptyMatrix,
    #[error("cost matrix is not square: {rows} rows but row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("non-finite cost at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },
    #[error("{gts} ground-truth entries vs {preds} predictions; pad with no-object entries first")]
    SizeMismatch { gts: usize, preds: usize },
    #[error("class probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("cost weight {name} = {value} must be finite and non-negative")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("assignment pair ({0}, {1}) is out of range")]
    InvalidAssignment(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedInstance {
    class_prob: f64,
    pub bbox: RotatedBox,
}

impl PredictedInstance {
    pub fn new(class_prob: f64, bbox: RotatedBox) -> Result<Self, MatchingError> {
        if !(0.0..=1.0).contains(&class_prob) {
            return Err(MatchingError::InvalidProbability(class_prob));
        }
        Ok(Self { class_prob, bbox })
    }

    pub fn class_prob(&self) -> f64 {
        self.class_prob
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundTruthInstance {
    Object(RotatedBox),
    /// Padding entry; contributes nothing to the matching cost.
    NoObject,
}

impl GroundTruthInstance {
    pub fn is_object(&self) -> bool {
        matches!(self, Self::Object(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub cls: f64,
    pub l1: f64,
    pub giou: f64,
    pub angle: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { cls: 1.0, l1: 5.0, giou: 2.0, angle: 2.0 }
    }
}

impl CostWeights {
    pub fn new(cls: f64, l1: f64, giou: f64, angle: f64) -> Result<Self, MatchingError> {
        for (name, value) in [("cls", cls), ("l1", l1), ("giou", giou), ("angle", angle)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(MatchingError::InvalidWeight { name, value });
            }
        }
        Ok(Self { cls, l1, giou, angle })
    }

    pub fn unit() -> Self {
        Self { cls: 1.0, l1: 1.0, giou: 1.0, angle: 1.0 }
    }
}

/// Matched `(gt_index, pred_index)` pairs and their summed cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// `1 − cos(pred − gt)` on the raw difference, in `[0, 2]`.
pub fn angle_loss(a_gt: f64, a_pred: f64) -> f64 {
    1.0 - (a_pred - a_gt).cos()
}

/// L1 distance over `(cx, cy, w, h)`.
pub fn box_l1(a: &RotatedBox, b: &RotatedBox) -> f64 {
    (a.cx() - b.cx()).abs() + (a.cy() - b.cy()).abs() + (a.w() - b.w()).abs() + (a.h() - b.h()).abs()
}

pub fn pair_cost(gt: &GroundTruthInstance, pred: &PredictedInstance, w: &CostWeights) -> f64 {
    match gt {
        GroundTruthInstance::NoObject => 0.0,
        GroundTruthInstance::Object(b) => {
            -w.cls * pred.class_prob
                + w.l1 * box_l1(b, &pred.bbox)
                + w.giou * (1.0 - giou(b, &pred.bbox))
                + w.angle * angle_loss(b.angle(), pred.bbox.angle())
        }
    }
}

pub fn cost_matrix(
    gts: &[GroundTruthInstance],
    preds: &[PredictedInstance],
    w: &CostWeights,
) -> Vec<Vec<f64>> {
    gts.iter().map(|g| preds.iter().map(|p| pair_cost(g, p, w)).collect()).collect()
}

/// Optimal one-to-one matching of equally sized (padded) sets.
pub fn match_sets(
    gts: &[GroundTruthInstance],
    preds: &[PredictedInstance],
    w: &CostWeights,
) -> Result<Assignment, MatchingError> {
    if gts.len() != preds.len() {
        return Err(MatchingError::SizeMismatch { gts: gts.len(), preds: preds.len() });
    }
    hungarian(&cost_matrix(gts, preds, w))
}

/// Per-term breakdown of the set loss. Every term already carries its
/// weight, so a zero weight gives an exactly zero column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub cls: f64,
    pub l1: f64,
    pub giou: f64,
    pub angle: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.cls + self.l1 + self.giou + self.angle
    }
}

impl std::ops::AddAssign for LossTerms {
    fn add_assign(&mut self, o: Self) {
        self.cls += o.cls;
        self.l1 += o.l1;
        self.giou += o.giou;
        self.angle += o.angle;
    }
}

/// Loss of one matched pair. The class term is the negative log-likelihood
/// of the pair's target: the text probability for objects, its complement
/// for padding entries.
pub fn pair_loss(gt: &GroundTruthInstance, pred: &PredictedInstance, w: &CostWeights) -> LossTerms {
    let nll = |p: f64| -p.max(PROB_FLOOR).ln();
    match gt {
        GroundTruthInstance::NoObject => {
            LossTerms { cls: w.cls * nll(1.0 - pred.class_prob), ..Default::default() }
        }
        GroundTruthInstance::Object(b) => LossTerms {
            cls: w.cls * nll(pred.class_prob),
            l1: w.l1 * box_l1(b, &pred.bbox),
            giou: w.giou * (1.0 - giou(b, &pred.bbox)),
            angle: w.angle * angle_loss(b.angle(), pred.bbox.angle()),
        },
    }
}

pub fn set_loss_terms(
    gts: &[GroundTruthInstance],
    preds: &[PredictedInstance],
    assignment: &Assignment,
    w: &CostWeights,
) -> Result<LossTerms, MatchingError> {
    if gts.len() != preds.len() {
        return Err(MatchingError::SizeMismatch { gts: gts.len(), preds: preds.len() });
    }
    let mut terms = LossTerms::default();
    for &(g, p) in &assignment.pairs {
        let (Some(gt), Some(pred)) = (gts.get(g), preds.get(p)) else {
            return Err(MatchingError::InvalidAssignment(g, p));
        };
        terms += pair_loss(gt, pred, w);
    }
    Ok(terms)
}

pub fn set_loss(
    gts: &[GroundTruthInstance],
    preds: &[PredictedInstance],
    assignment: &Assignment,
    w: &CostWeights,
) -> Result<f64, MatchingError> {
    set_loss_terms(gts, preds, assignment, w).map(|t| t.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rb(cx: f64, cy: f64, w: f64, h: f64, a: f64) -> RotatedBox {
        RotatedBox::new(cx, cy, w, h, a).unwrap()
    }

    #[test]
    fn angle_loss_table() {
        assert_eq!(angle_loss(0.7, 0.7), 0.0);
        assert_eq!(angle_loss(0.0, PI), 2.0);
        assert!((angle_loss(0.0, PI / 3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn perfect_prediction_costs_minus_one() {
        let b = rb(0.5, 0.5, 0.2, 0.1, 0.3);
        let p = PredictedInstance::new(1.0, b).unwrap();
        assert_eq!(pair_cost(&GroundTruthInstance::Object(b), &p, &CostWeights::unit()), -1.0);
        assert_eq!(pair_cost(&GroundTruthInstance::NoObject, &p, &CostWeights::unit()), 0.0);
    }

    #[test]
    fn shifted_prediction_cost() {
        let g = rb(0.5, 0.5, 0.2, 0.1, 0.0);
        let p = rb(0.6, 0.5, 0.2, 0.1, 0.0);
        // Axis-aligned: intersection 0.1×0.1, union 0.03, enclosing 0.3×0.1.
        let giou_expect = 0.01 / 0.03 - (0.03 - 0.03) / 0.03;
        let c = pair_cost(
            &GroundTruthInstance::Object(g),
            &PredictedInstance::new(0.8, p).unwrap(),
            &CostWeights::unit(),
        );
        assert!((c - (-0.8 + 0.1 + (1.0 - giou_expect))).abs() < 1e-12);
    }

    #[test]
    fn no_object_pair_with_zero_prob_is_free() {
        let p = PredictedInstance::new(0.0, rb(0.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        let a = Assignment { pairs: vec![(0, 0)], total_cost: 0.0 };
        let loss =
            set_loss(&[GroundTruthInstance::NoObject], &[p], &a, &CostWeights::default()).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn saturated_probabilities_stay_finite() {
        let b = rb(0.0, 0.0, 1.0, 1.0, 0.0);
        let p = PredictedInstance::new(0.0, b).unwrap();
        let t = pair_loss(&GroundTruthInstance::Object(b), &p, &CostWeights::default());
        assert!((t.cls - (-PROB_FLOOR.ln())).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        let b = rb(0.0, 0.0, 1.0, 1.0, 0.0);
        assert!(PredictedInstance::new(1.5, b).is_err());
        assert!(CostWeights::new(1.0, -1.0, 0.0, 0.0).is_err());
        let p = PredictedInstance::new(0.5, b).unwrap();
        assert!(matches!(
            match_sets(&[], &[p], &CostWeights::default()),
            Err(MatchingError::SizeMismatch { gts: 0, preds: 1 })
        ));
    }

    #[test]
    fn zero_weight_zeroes_column() {
        let g = rb(0.5, 0.5, 0.2, 0.1, 0.0);
        let p = PredictedInstance::new(0.6, rb(0.55, 0.52, 0.25, 0.1, 0.2)).unwrap();
        let w = CostWeights::new(1.0, 0.0, 2.0, 0.0).unwrap();
        let t = pair_loss(&GroundTruthInstance::Object(g), &p, &w);
        assert_eq!(t.l1, 0.0);
        assert_eq!(t.angle, 0.0);
        assert!(t.giou > 0.0);
    }
}
