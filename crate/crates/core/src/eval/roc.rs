use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::data::ClassLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    /// Score threshold of each point; the first is +inf.
    pub thresholds: Vec<f64>,
    pub auc: f64,
    pub positive_class: ClassLabel,
}

/// Threshold sweep over distinct scores, highest first. Scores rank
/// Defective, so they are negated when NonDefective is the positive class.
pub fn roc(scored: &[(f64, ClassLabel)], positive_class: ClassLabel) -> Result<RocCurve, EvalError> {
    let sign = if positive_class.is_defective() { 1.0 } else { -1.0 };
    let mut items: Vec<(f64, bool)> = scored.iter().map(|&(s, a)| (sign * s, a == positive_class)).collect();
    let pos = items.iter().filter(|i| i.1).count();
    let neg = items.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClassActuals);
    }
    items.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < items.len() {
        let s = items[i].0;
        let (tp0, fp0) = (tp, fp);
        while i < items.len() && items[i].0 == s {
            if items[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // trapezoid in count units, normalized at the end
        auc += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(sign * s);
    }
    Ok(RocCurve {
        points,
        thresholds,
        auc: auc / (pos as f64 * neg as f64),
        positive_class,
    })
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for (t, (f, p)) in self.thresholds.iter().zip(&self.points) {
            let _ = writeln!(out, "{t},{f},{p}");
        }
        out
    }

    /// Standalone SVG with axes, the chance diagonal and the AUC.
    pub fn to_svg(&self, title: &str) -> String {
        const SIZE: f64 = 400.0;
        const PAD: f64 = 50.0;
        let x = |v: f64| PAD + v * SIZE;
        let y = |v: f64| PAD + (1.0 - v) * SIZE;
        let mut s = String::new();
        let full = SIZE + 2.0 * PAD;
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        );
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{t}</text>"#,
                x(t),
                PAD + SIZE + 16.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{t}</text>"#,
                PAD - 6.0,
                y(t) + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
            x(0.0),
            y(0.0),
            x(1.0),
            y(1.0)
        );
        let path: Vec<String> = self
            .points
            .iter()
            .map(|&(f, t)| format!("{:.2},{:.2}", x(f), y(t)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
            PAD + SIZE / 2.0,
            PAD - 20.0,
            escape(title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="end">AUC = {:.4}</text>"#,
            PAD + SIZE - 10.0,
            PAD + SIZE - 12.0,
            self.auc
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">False positive rate</text>"#,
            PAD + SIZE / 2.0,
            full - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">True positive rate</text>"#,
            PAD + SIZE / 2.0,
            PAD + SIZE / 2.0
        );
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    /// Brute-force pair count: ties count one half.
    fn mann_whitney(scored: &[(f64, ClassLabel)]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(sp, ap) in scored {
            for &(sn, an) in scored {
                if ap == Defective && an == NonDefective {
                    den += 1.0;
                    if sp > sn {
                        num += 1.0;
                    } else if sp == sn {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_separation() {
        let r = roc(&[(0.9, Defective), (0.8, Defective), (0.2, NonDefective)], Defective).unwrap();
        assert_eq!(r.auc, 1.0);
    }

    #[test]
    fn single_tie_group() {
        let r = roc(
            &[(0.3, Defective), (0.3, NonDefective), (0.3, NonDefective)],
            Defective,
        )
        .unwrap();
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn four_point_example() {
        let s = [(0.9, Defective), (0.8, NonDefective), (0.7, Defective), (0.1, NonDefective)];
        let r = roc(&s, Defective).unwrap();
        assert_eq!(r.auc, 0.75);
        assert_eq!(mann_whitney(&s), 0.75);
        // NonDefective as positive mirrors the ranking.
        assert_eq!(roc(&s, NonDefective).unwrap().auc, 0.75);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            roc(&[(0.1, Defective), (0.2, Defective)], Defective),
            Err(EvalError::SingleClassActuals)
        ));
    }

    #[test]
    fn outputs() {
        let r = roc(&[(0.9, Defective), (0.1, NonDefective)], Defective).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("threshold,fpr,tpr\ninf,0,0\n"));
        let svg = r.to_svg("a < b");
        assert!(svg.contains("AUC = 1.0000") && svg.contains("a &lt; b"));
    }

    fn scored_strategy() -> impl Strategy<Value = Vec<(f64, ClassLabel)>> {
        prop::collection::vec(
            ((0u8..20).prop_map(|v| v as f64 / 10.0), any::<bool>())
                .prop_map(|(s, d)| (s, if d { Defective } else { NonDefective })),
            2..300,
        )
        .prop_filter("both classes", |v| {
            v.iter().any(|x| x.1 == Defective) && v.iter().any(|x| x.1 == NonDefective)
        })
    }

    proptest! {
        #[test]
        fn auc_matches_pair_count(s in scored_strategy()) {
            let r = roc(&s, Defective).unwrap();
            prop_assert!((r.auc - mann_whitney(&s)).abs() < 1e-9);
            prop_assert_eq!(*r.points.first().unwrap(), (0.0, 0.0));
            prop_assert_eq!(*r.points.last().unwrap(), (1.0, 1.0));
            for w in r.points.windows(2) {
                prop_assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            }
        }

        #[test]
        fn monotone_transform_invariance(s in scored_strategy()) {
            let t: Vec<_> = s.iter().map(|&(v, a)| ((3.0 * v).exp() - 7.0, a)).collect();
            let (a, b) = (roc(&s, Defective).unwrap(), roc(&t, Defective).unwrap());
            prop_assert_eq!(a.points, b.points);
            prop_assert_eq!(a.auc, b.auc);
        }
    }
}
