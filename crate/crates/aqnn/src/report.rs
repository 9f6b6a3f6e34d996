//! Machine-readable renderings of evaluation results.

use aqnn_core::data::ActivityClass;
use aqnn_core::metrics::{ClassificationReport, ConfusionMatrix};
use serde_json::{json, Map, Value};

fn class_name(i: usize) -> String {
    ActivityClass::from_index(i).map_or_else(|| format!("class {i}"), |c| c.name().to_string())
}

/// Rows are true classes, columns predicted classes, both labelled.
pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let n = cm.n_classes();
    let mut out = String::from("true\\predicted");
    for p in 0..n {
        out.push(',');
        out.push_str(&class_name(p));
    }
    out.push('\n');
    for t in 0..n {
        out.push_str(&class_name(t));
        for p in 0..n {
            out.push(',');
            out.push_str(&cm.get(t, p).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn report_json(report: &ClassificationReport, mean_loss: f64) -> Value {
    let mut classes = Map::new();
    for (i, m) in report.per_class.iter().enumerate() {
        classes.insert(
            class_name(i),
            json!({
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
                "precision_undefined": m.precision_undefined,
                "recall_undefined": m.recall_undefined,
            }),
        );
    }
    let avg = |a: aqnn_core::metrics::Averages| json!({"precision": a.precision, "recall": a.recall, "f1": a.f1});
    json!({
        "accuracy": report.accuracy,
        "mean_loss": mean_loss,
        "total": report.total,
        "classes": classes,
        "macro_avg": avg(report.macro_avg),
        "weighted_avg": avg(report.weighted_avg),
    })
}
