use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 counts with "impact present" as the positive class.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

impl Add for BinaryConfusion {
    type Output = BinaryConfusion;

    fn add(self, o: BinaryConfusion) -> BinaryConfusion {
        BinaryConfusion { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tn: self.tn + o.tn }
    }
}

pub fn binary_confusion(y_true: &[bool], y_pred: &[bool]) -> Result<BinaryConfusion> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    let mut c = BinaryConfusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        c.record(t, p);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        let c = binary_confusion(&[true, false, true], &[true, true, false]).unwrap();
        assert_eq!(c, BinaryConfusion { tp: 1, fp: 1, fn_: 1, tn: 0 });
        let c = binary_confusion(&[true, true, false], &[true, true, false]).unwrap();
        assert_eq!(c, BinaryConfusion { tp: 2, fp: 0, fn_: 0, tn: 1 });
        assert_eq!(binary_confusion(&[], &[]).unwrap(), BinaryConfusion::default());
        assert!(binary_confusion(&[true], &[]).is_err());
    }

    #[test]
    fn json_uses_fn() {
        let json = serde_json::to_string(&BinaryConfusion { tp: 1, fp: 2, fn_: 3, tn: 4 }).unwrap();
        assert_eq!(json, r#"{"tp":1,"fp":2,"fn":3,"tn":4}"#);
    }
}
