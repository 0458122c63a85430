//! IoU, proposal label assignment and box voting. Ties always go to the lowest index.

use crate::error::{Error, Result};
use crate::geometry::BBox;

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x2().min(b.x2()) - a.x().max(b.x())).max(0.0);
    let ih = (a.y2().min(b.y2()) - a.y().max(b.y())).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Index and IoU of the best-overlapping box in `candidates`.
pub fn best_match(target: &BBox, candidates: &[BBox]) -> Option<(usize, f64)> {
    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, iou(target, c)))
        .fold(None, |best, (i, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
}

/// Training label of one proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalLabel {
    /// `p* = 1`, matched to this ground-truth box.
    Positive { gt_index: usize },
    /// `p* = 0`.
    Negative,
    /// IoU between the two thresholds; contributes no loss.
    Ignored,
}

impl ProposalLabel {
    pub fn p_star(&self) -> u8 {
        matches!(self, ProposalLabel::Positive { .. }) as u8
    }

    pub fn matched(&self) -> Option<usize> {
        match self {
            ProposalLabel::Positive { gt_index } => Some(*gt_index),
            _ => None,
        }
    }
}

pub const DEFAULT_POS_THRESH: f64 = 0.5;
pub const DEFAULT_NEG_THRESH: f64 = 0.5;

/// Match each proposal to its max-IoU ground-truth box. Positive when that IoU is at
/// least `pos_thresh`, negative below `neg_thresh`, ignored in between.
pub fn assign_labels(
    proposals: &[BBox],
    gt_boxes: &[BBox],
    pos_thresh: f64,
    neg_thresh: f64,
) -> Result<Vec<ProposalLabel>> {
    let valid = |t: f64| (0.0..=1.0).contains(&t);
    if !valid(pos_thresh) || !valid(neg_thresh) || pos_thresh < neg_thresh {
        return Err(Error::InvalidInput(format!(
            "thresholds must satisfy 0 <= neg ({neg_thresh}) <= pos ({pos_thresh}) <= 1"
        )));
    }
    Ok(proposals
        .iter()
        .map(|p| match best_match(p, gt_boxes) {
            Some((gt_index, v)) if v >= pos_thresh => ProposalLabel::Positive { gt_index },
            Some((_, v)) if v >= neg_thresh => ProposalLabel::Ignored,
            _ => ProposalLabel::Negative,
        })
        .collect())
}

/// A box with its face probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub bbox: BBox,
    pub score: f64,
}

impl ScoredBox {
    pub fn new(bbox: BBox, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidInput(format!("score must lie in [0, 1], got {score}")));
        }
        Ok(ScoredBox { bbox, score })
    }
}

/// Greedy box voting: take boxes in descending score order; each kept box is
/// replaced by the score-weighted mean of every input box overlapping it by at
/// least `iou_thresh`, and the overlapping boxes not yet taken are dropped.
pub fn box_vote(boxes: &[ScoredBox], iou_thresh: f64) -> Vec<ScoredBox> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[b].score.total_cmp(&boxes[a].score).then(a.cmp(&b)));

    let mut suppressed = vec![false; boxes.len()];
    let mut out = Vec::new();
    for &i in &order {
        if suppressed[i] {
            continue;
        }
        let anchor = boxes[i];
        let group: Vec<usize> = (0..boxes.len())
            .filter(|&j| iou(&anchor.bbox, &boxes[j].bbox) >= iou_thresh)
            .collect();
        for &j in &group {
            suppressed[j] = true;
        }
        suppressed[i] = true;
        let weight: f64 = group.iter().map(|&j| boxes[j].score).sum();
        let voted = if weight > 0.0 {
            let mut acc = [0.0; 4];
            for &j in &group {
                let wj = boxes[j].score / weight;
                for (a, v) in acc.iter_mut().zip(boxes[j].bbox.to_array()) {
                    *a += wj * v;
                }
            }
            BBox::new(acc[0], acc[1], acc[2], acc[3]).unwrap_or(anchor.bbox)
        } else {
            anchor.bbox
        };
        out.push(ScoredBox { bbox: voted, score: anchor.score });
    }
    out
}
