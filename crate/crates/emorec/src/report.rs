//! Confusion-matrix rendering: aligned text tables for people, CSV for
//! machines. Both carry row-normalized percentages; the CSV adds raw counts.

use std::fmt::Write as _;

use emorec_core::eval::{ConfusionMatrix, NO_DECISION_COLUMN};
use emorec_core::functionals::EmotionClass;

use crate::FORMAT_VERSION_LINE;

/// One evaluated dataset: the four per-classifier matrices plus the voted one.
pub struct EvalReport {
    /// Dataset tag used in headings (feature-file stem).
    pub dataset: String,
    pub per_classifier: Vec<(&'static str, ConfusionMatrix)>,
    pub ensemble: ConfusionMatrix,
}

fn table(title: &str, cm: &ConfusionMatrix, with_no_decision: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== {title} ==");
    let _ = write!(out, "{:<12}", "true\\pred");
    for class in EmotionClass::ALL {
        let _ = write!(out, "{:>12}", format!("{class}(%)"));
    }
    if with_no_decision {
        let _ = write!(out, "{:>16}", "cant-decide(%)");
    }
    out.push('\n');
    for truth in EmotionClass::ALL {
        let _ = write!(out, "{:<12}", truth.name());
        for predicted in EmotionClass::ALL {
            let _ = write!(out, "{:>12.2}", cm.percentage(truth, predicted.index()));
        }
        if with_no_decision {
            let _ = write!(out, "{:>16.2}", cm.percentage(truth, NO_DECISION_COLUMN));
        }
        let _ = writeln!(out, "   ({} rows)", cm.row_total(truth));
    }
    let _ = writeln!(out, "average accuracy: {:.2}%", cm.average_accuracy());
    if with_no_decision {
        let _ = writeln!(
            out,
            "overall can't-decide rate: {:.2}%",
            cm.overall_cant_decide_rate()
        );
    }
    out
}

/// All five tables for one dataset.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "### dataset: {} ###", report.dataset);
    for (name, cm) in &report.per_classifier {
        out.push_str(&table(name, cm, false));
        out.push('\n');
    }
    out.push_str(&table("ensemble (majority vote)", &report.ensemble, true));
    out
}

fn csv_rows(out: &mut String, dataset: &str, classifier: &str, cm: &ConfusionMatrix) {
    for truth in EmotionClass::ALL {
        let _ = write!(
            out,
            "{dataset},{classifier},{},{}",
            truth.name(),
            cm.row_total(truth)
        );
        for col in 0..EmotionClass::COUNT {
            let _ = write!(out, ",{}", cm.count(truth, col));
        }
        let _ = write!(out, ",{}", cm.count(truth, NO_DECISION_COLUMN));
        for col in 0..EmotionClass::COUNT {
            let _ = write!(out, ",{:.4}", cm.percentage(truth, col));
        }
        let _ = writeln!(
            out,
            ",{:.4},{:.4}",
            cm.percentage(truth, NO_DECISION_COLUMN),
            cm.per_class_accuracy(truth)
        );
    }
    let _ = writeln!(
        out,
        "{dataset},{classifier},average,{},,,,,,,,,,,{:.4}",
        cm.total(),
        cm.average_accuracy()
    );
}

/// Machine-readable report covering every classifier of every dataset.
pub fn render_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(FORMAT_VERSION_LINE);
    out.push('\n');
    out.push_str(
        "dataset,classifier,true_class,rows,angry_count,happy_count,neutral_count,sad_count,\
         cant_decide_count,angry_pct,happy_pct,neutral_pct,sad_pct,cant_decide_pct,accuracy_pct\n",
    );
    for report in reports {
        for (name, cm) in &report.per_classifier {
            csv_rows(&mut out, &report.dataset, name, cm);
        }
        csv_rows(&mut out, &report.dataset, "ensemble", &report.ensemble);
    }
    if reports.len() > 1 {
        let mean = cross_dataset_average(reports);
        let _ = writeln!(
            out,
            "all,ensemble,cross_dataset_average,,,,,,,,,,,,{mean:.4}"
        );
    }
    out
}

/// Unweighted mean of the per-dataset ensemble average accuracies.
pub fn cross_dataset_average(reports: &[EvalReport]) -> f64 {
    reports
        .iter()
        .map(|r| r.ensemble.average_accuracy())
        .sum::<f64>()
        / reports.len() as f64
}
