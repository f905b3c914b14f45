use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::confusion::BinaryConfusion;
use crate::corpus::{Category, LabelVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which metrics fell back to the 0/0 = 0 convention.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undefined {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Undefined {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }

    fn is_clear(&self) -> bool {
        !self.any()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<T> {
    pub recall: T,
    pub precision: T,
    pub f1: T,
    #[serde(default, skip_serializing_if = "Undefined::is_clear")]
    pub undefined: Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport<T> {
    pub category: Category,
    pub metrics: ClassMetrics<T>,
    pub confusion: BinaryConfusion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overall<T> {
    pub micro: ClassMetrics<T>,
    #[serde(rename = "macro")]
    pub macro_avg: ClassMetrics<T>,
}

/// Per-category rows followed by the micro/macro summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    pub documents: usize,
    pub categories: Vec<CategoryReport<T>>,
    pub overall: Overall<T>,
}

fn ratio<T: Scalar>(num: u64, den: u64) -> (T, bool) {
    if den == 0 {
        (T::zero(), true)
    } else {
        (T::from_u64(num).expect("count") / T::from_u64(den).expect("count"), false)
    }
}

fn f1_of<T: Scalar>(p: T, r: T) -> (T, bool) {
    if p + r > T::zero() {
        (T::lit(2.0) * p * r / (p + r), false)
    } else {
        (T::zero(), true)
    }
}

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); any 0/0 is 0.
pub fn per_class_metrics<T: Scalar>(c: &BinaryConfusion) -> ClassMetrics<T> {
    let (precision, p_undef) = ratio(c.tp, c.tp + c.fp);
    let (recall, r_undef) = ratio(c.tp, c.tp + c.fn_);
    let (f1, f_undef) = f1_of(precision, recall);
    ClassMetrics { recall, precision, f1, undefined: Undefined { precision: p_undef, recall: r_undef, f1: f_undef } }
}

/// Micro metrics from the summed counts; macro metrics as the unweighted
/// mean of the per-class values.
pub fn micro_macro_metrics<T: Scalar>(confusions: &[BinaryConfusion]) -> (ClassMetrics<T>, ClassMetrics<T>) {
    let summed = confusions.iter().copied().fold(BinaryConfusion::default(), |a, b| a + b);
    let micro = per_class_metrics(&summed);
    let per: Vec<ClassMetrics<T>> = confusions.iter().map(per_class_metrics).collect();
    (micro, macro_mean(&per))
}

/// Unweighted mean of per-class metrics; a flag is set if any class had it set.
pub fn macro_mean<T: Scalar>(per: &[ClassMetrics<T>]) -> ClassMetrics<T> {
    if per.is_empty() {
        let u = Undefined { precision: true, recall: true, f1: true };
        return ClassMetrics { recall: T::zero(), precision: T::zero(), f1: T::zero(), undefined: u };
    }
    let n = T::from_usize(per.len()).expect("count");
    let mean = |f: fn(&ClassMetrics<T>) -> T| per.iter().fold(T::zero(), |acc, m| acc + f(m)) / n;
    ClassMetrics {
        recall: mean(|m| m.recall),
        precision: mean(|m| m.precision),
        f1: mean(|m| m.f1),
        undefined: Undefined {
            precision: per.iter().any(|m| m.undefined.precision),
            recall: per.iter().any(|m| m.undefined.recall),
            f1: per.iter().any(|m| m.undefined.f1),
        },
    }
}

/// Full report for aligned truth/prediction rows in canonical order.
pub fn evaluate_predictions<T: Scalar>(y_true: &[LabelVector], y_pred: &[LabelVector]) -> Result<MetricsReport<T>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    let mut confusions = [BinaryConfusion::default(); 7];
    for (t, p) in y_true.iter().zip(y_pred) {
        for c in Category::ALL {
            confusions[c.index()].record(t[c], p[c]);
        }
    }
    let (micro, macro_avg) = micro_macro_metrics(&confusions);
    let categories = Category::ALL
        .into_iter()
        .map(|c| CategoryReport {
            category: c,
            metrics: per_class_metrics(&confusions[c.index()]),
            confusion: confusions[c.index()],
        })
        .collect();
    Ok(MetricsReport { documents: y_true.len(), categories, overall: Overall { micro, macro_avg } })
}

impl<T: Scalar> MetricsReport<T> {
    pub fn category(&self, c: Category) -> &CategoryReport<T> {
        self.categories.iter().find(|r| r.category == c).expect("every category reported")
    }

    pub fn micro(&self) -> &ClassMetrics<T> {
        &self.overall.micro
    }

    pub fn macro_avg(&self) -> &ClassMetrics<T> {
        &self.overall.macro_avg
    }

    /// Macro average over all categories except `excluded`.
    pub fn macro_excluding(&self, excluded: &[Category]) -> ClassMetrics<T> {
        let kept: Vec<ClassMetrics<T>> =
            self.categories.iter().filter(|r| !excluded.contains(&r.category)).map(|r| r.metrics).collect();
        macro_mean(&kept)
    }

    /// Aligned text table: Recall, Precision, F1 per category with an
    /// "Overall (micro/macro)" first row. Cells computed from 0/0 carry `*`.
    pub fn render_table(&self) -> String {
        let cell = |v: T, undef: bool| format!("{:.2}{}", v.to_f64().unwrap_or(f64::NAN), if undef { "*" } else { "" });
        let mut rows: Vec<[String; 4]> =
            vec![["Category of Drought Impacts".into(), "Recall".into(), "Precision".into(), "F1".into()]];
        let (mi, ma) = (&self.overall.micro, &self.overall.macro_avg);
        rows.push([
            "Overall (micro/macro)".into(),
            format!("{}/{}", cell(mi.recall, mi.undefined.recall), cell(ma.recall, ma.undefined.recall)),
            format!("{}/{}", cell(mi.precision, mi.undefined.precision), cell(ma.precision, ma.undefined.precision)),
            format!("{}/{}", cell(mi.f1, mi.undefined.f1), cell(ma.f1, ma.undefined.f1)),
        ]);
        for r in &self.categories {
            let m = &r.metrics;
            rows.push([
                r.category.title().into(),
                cell(m.recall, m.undefined.recall),
                cell(m.precision, m.undefined.precision),
                cell(m.f1, m.undefined.f1),
            ]);
        }
        let widths: Vec<usize> = (0..4).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (n, r) in rows.iter().enumerate() {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if n == 0 || n == 1 {
                let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 6));
            }
        }
        if self.categories.iter().any(|r| r.metrics.undefined.any()) {
            out.push_str("* undefined (0/0), reported as 0\n");
        }
        out
    }

    /// One line per category: `category,tp,fp,fn,tn`.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("category,tp,fp,fn,tn\n");
        for r in &self.categories {
            let c = r.confusion;
            let _ = writeln!(out, "{},{},{},{},{}", r.category, c.tp, c.fp, c.fn_, c.tn);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn per_class_examples() {
        let m: ClassMetrics<f64> = per_class_metrics(&BinaryConfusion { tp: 1, fp: 1, fn_: 1, tn: 0 });
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        let z: ClassMetrics<f64> = per_class_metrics(&BinaryConfusion::default());
        assert_eq!((z.precision, z.recall, z.f1), (0.0, 0.0, 0.0));
        assert!(z.undefined.precision && z.undefined.recall && z.undefined.f1);
        let (f1, _) = f1_of(0.98f64, 0.93);
        assert_abs_diff_eq!(f1, 0.954, epsilon = 5e-4);
    }

    #[test]
    fn identical_confusions() {
        let c = BinaryConfusion { tp: 3, fp: 1, fn_: 2, tn: 9 };
        let (micro, macro_avg) = micro_macro_metrics::<f64>(&[c; 7]);
        let single: ClassMetrics<f64> = per_class_metrics(&c);
        assert_abs_diff_eq!(micro.f1, single.f1, epsilon = 1e-15);
        assert_abs_diff_eq!(macro_avg.f1, single.f1, epsilon = 1e-15);
        assert_abs_diff_eq!(macro_avg.recall, single.recall, epsilon = 1e-15);
    }

    #[test]
    fn perfect_and_inverted() {
        let truth: Vec<LabelVector> =
            (0..10u8).map(|i| LabelVector(std::array::from_fn(|k| (i as usize + k).is_multiple_of(3)))).collect();
        let r: MetricsReport<f64> = evaluate_predictions(&truth, &truth).unwrap();
        assert!(r.categories.iter().all(|c| c.metrics.f1 == 1.0));
        let inv: Vec<LabelVector> = truth.iter().map(|l| LabelVector(l.0.map(|b| !b))).collect();
        let r: MetricsReport<f64> = evaluate_predictions(&truth, &inv).unwrap();
        assert!(r
            .categories
            .iter()
            .all(|c| c.metrics.f1 == 0.0 && c.metrics.precision == 0.0 && c.metrics.recall == 0.0));
        assert!(evaluate_predictions::<f64>(&truth, &inv[1..]).is_err());
    }

    #[test]
    fn renders_and_round_trips() {
        let truth = vec![LabelVector::from_categories([Category::Fire]), LabelVector::EMPTY];
        let pred = vec![LabelVector::from_categories([Category::Fire, Category::Economy]), LabelVector::EMPTY];
        let r: MetricsReport<f64> = evaluate_predictions(&truth, &pred).unwrap();
        let table = r.render_table();
        assert!(table.starts_with("Category of Drought Impacts"));
        assert!(table.contains("Overall (micro/macro)"));
        assert!(table.contains("Fire"));
        assert!(table.contains("0.00*"));
        let json = serde_json::to_string(&r).unwrap();
        let back: MetricsReport<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(r.confusion_csv().contains("fire,1,0,0,1"));
    }

    proptest! {
        #[test]
        fn f1_between_precision_and_recall(tp in 1u64..50, fp in 0u64..50, fn_ in 0u64..50) {
            let m: ClassMetrics<f64> = per_class_metrics(&BinaryConfusion { tp, fp, fn_, tn: 0 });
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        }

        #[test]
        fn permutation_invariant(counts in prop::collection::vec((0u64..20, 0u64..20, 0u64..20, 0u64..20), 7), rot in 0usize..7) {
            let cs: Vec<BinaryConfusion> = counts.iter().map(|&(tp, fp, fn_, tn)| BinaryConfusion { tp, fp, fn_, tn }).collect();
            let mut rotated = cs.clone();
            rotated.rotate_left(rot);
            let (a_mi, a_ma) = micro_macro_metrics::<f64>(&cs);
            let (b_mi, b_ma) = micro_macro_metrics::<f64>(&rotated);
            prop_assert_eq!(a_mi, b_mi);
            prop_assert!((a_ma.f1 - b_ma.f1).abs() < 1e-12);
            prop_assert!((a_ma.recall - b_ma.recall).abs() < 1e-12);
        }

        #[test]
        fn single_category_micro_equals_macro(tp in 0u64..20, fp in 0u64..20, fn_ in 0u64..20) {
            let c = BinaryConfusion { tp, fp, fn_, tn: 1 };
            let (mi, ma) = micro_macro_metrics::<f64>(&[c]);
            prop_assert_eq!(mi, ma);
        }
    }
}
