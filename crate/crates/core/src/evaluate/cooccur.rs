use num_rational::Ratio;
use serde::Serialize;

use crate::corpus::{Category, LabelVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Directional co-occurrence: entry (i, j) is P(label j | label i).
///
/// Entries are kept as integer counts; rows whose label never occurs are
/// undefined rather than zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CooccurrenceMatrix {
    /// Documents with both label i and label j.
    pub joint: Vec<Vec<u64>>,
    /// Documents with label i.
    pub support: Vec<u64>,
    pub documents: usize,
}

impl CooccurrenceMatrix {
    pub fn width(&self) -> usize {
        self.support.len()
    }

    /// Exact conditional probability, `None` when row `i` has no support.
    pub fn ratio(&self, i: usize, j: usize) -> Option<Ratio<u64>> {
        (self.support[i] > 0).then(|| Ratio::new(self.joint[i][j], self.support[i]))
    }

    pub fn value<T: Scalar>(&self, i: usize, j: usize) -> Option<T> {
        self.ratio(i, j).map(|r| T::from_u64(*r.numer()).expect("count") / T::from_u64(*r.denom()).expect("count"))
    }

    /// The most frequent companion of label `i` (ties go to the lower index).
    pub fn most_associated(&self, i: usize) -> Option<(usize, Ratio<u64>)> {
        (0..self.width()).filter(|&j| j != i).filter_map(|j| self.ratio(i, j).map(|r| (j, r))).fold(
            None,
            |best: Option<(usize, Ratio<u64>)>, (j, r)| match best {
                Some((_, b)) if b >= r => best,
                _ => Some((j, r)),
            },
        )
    }

    /// JSON with category names and `null` for undefined rows.
    pub fn to_json(&self) -> serde_json::Value {
        let names: Vec<&str> =
            if self.width() == Category::COUNT { Category::ALL.iter().map(|c| c.name()).collect() } else { Vec::new() };
        let conditional: Vec<Vec<Option<f64>>> =
            (0..self.width()).map(|i| (0..self.width()).map(|j| self.value::<f64>(i, j)).collect()).collect();
        serde_json::json!({
            "categories": names,
            "documents": self.documents,
            "support": self.support,
            "joint": self.joint,
            "conditional": conditional,
        })
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let label = |i: usize| {
            if self.width() == Category::COUNT {
                Category::ALL[i].name().to_string()
            } else {
                format!("label{i}")
            }
        };
        out.push_str(&format!("{:<30}", "P(col | row)"));
        for j in 0..self.width() {
            out.push_str(&format!(" {:>6}", format!("c{j}")));
        }
        out.push('\n');
        for i in 0..self.width() {
            out.push_str(&format!("{:<30}", format!("c{i} {}", label(i))));
            for j in 0..self.width() {
                match self.value::<f64>(i, j) {
                    Some(v) => out.push_str(&format!(" {:>5.0}%", v * 100.0)),
                    None => out.push_str(&format!(" {:>6}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Co-occurrence over rows of binary labels of equal width.
pub fn cooccurrence<R: AsRef<[bool]>>(rows: &[R]) -> Result<CooccurrenceMatrix> {
    let Some(first) = rows.first() else {
        return Err(Error::EmptyCorpus);
    };
    let width = first.as_ref().len();
    let mut joint = vec![vec![0u64; width]; width];
    let mut support = vec![0u64; width];
    for row in rows {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::DimensionMismatch { expected: width, found: row.len() });
        }
        for i in (0..width).filter(|&i| row[i]) {
            support[i] += 1;
            for j in (0..width).filter(|&j| row[j]) {
                joint[i][j] += 1;
            }
        }
    }
    Ok(CooccurrenceMatrix { joint, support, documents: rows.len() })
}

pub fn cooccurrence_labels(labels: &[LabelVector]) -> Result<CooccurrenceMatrix> {
    let rows: Vec<[bool; 7]> = labels.iter().map(|l| l.0).collect();
    cooccurrence(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_category_example() {
        let m = cooccurrence(&[[true, true], [true, false]]).unwrap();
        assert_eq!(m.ratio(0, 1), Some(Ratio::new(1, 2)));
        assert_eq!(m.ratio(1, 0), Some(Ratio::new(1, 1)));
        assert_eq!(m.value::<f64>(0, 1), Some(0.5));
        assert_eq!(m.most_associated(0), Some((1, Ratio::new(1, 2))));
    }

    #[test]
    fn degenerate_rows() {
        let m = cooccurrence(&[[true, true, true]]).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| m.ratio(i, j) == Some(Ratio::from_integer(1)))));
        let m = cooccurrence(&[[true, false], [true, false]]).unwrap();
        assert_eq!(m.ratio(1, 0), None);
        assert_eq!(m.ratio(0, 0), Some(Ratio::from_integer(1)));
        assert!(cooccurrence::<[bool; 2]>(&[]).is_err());
        assert!(cooccurrence(&[vec![true], vec![true, false]]).is_err());
    }

    #[test]
    fn json_marks_undefined_rows() {
        let m = cooccurrence_labels(&[LabelVector::from_categories([Category::Fire])]).unwrap();
        let json = m.to_json();
        assert_eq!(json["conditional"][0][0], serde_json::Value::Null);
        assert_eq!(json["conditional"][2][2], 1.0);
        assert_eq!(json["categories"][2], "fire");
        assert!(m.render_table().contains("fire"));
    }
}
