use std::fmt::Write as _;

use bookmaker::fmt::g17;
use bookmaker::metrics::MetricReport;
use bookmaker::Error;
use serde::Serialize;

/// A measure value, or why it is undefined. Serializes as a number, or as
/// `null` with the reason listed under `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Defined(f64),
    Undefined(String),
    MixedSign,
}

impl Value {
    fn from_result(r: &bookmaker::Result<f64>, class_names: &[String]) -> Self {
        match r {
            Ok(v) => Value::Defined(*v),
            Err(Error::MixedSign { .. }) => Value::MixedSign,
            Err(Error::Degenerate { class, marginal, value }) => Value::Undefined(format!(
                "class {} has degenerate {marginal} {value}",
                class_names.get(*class).map_or_else(|| class.to_string(), |n| format!("{n:?}"))
            )),
            Err(e) => Value::Undefined(e.to_string()),
        }
    }

    pub fn get(&self) -> Option<f64> {
        match self {
            Value::Defined(v) => Some(*v),
            _ => None,
        }
    }

    fn text(&self) -> String {
        match self {
            Value::Defined(v) => g17(*v),
            Value::Undefined(_) => String::new(),
            Value::MixedSign => "mixed_sign".into(),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Defined(v) => s.serialize_f64(*v),
            Value::Undefined(_) => s.serialize_none(),
            Value::MixedSign => s.serialize_str("mixed_sign"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub prevalence: f64,
    pub bias: f64,
    pub delta_p: Option<f64>,
    pub delta_p_prime: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Undefined {
    pub measure: &'static str,
    pub reason: String,
}

/// Serialized form of a [`MetricReport`] with class names attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: f64,
    pub k: usize,
    pub accuracy: f64,
    pub informedness: Value,
    pub markedness: Value,
    pub kappa: Value,
    pub correlation: Value,
    pub per_class: Vec<ClassRow>,
    pub undefined: Vec<Undefined>,
}

impl MetricsReport {
    pub fn new(report: &MetricReport, class_names: &[String]) -> Self {
        let informedness = Value::from_result(&report.informedness, class_names);
        let markedness = Value::from_result(&report.markedness, class_names);
        let kappa = Value::from_result(&report.kappa, class_names);
        let correlation = Value::from_result(&report.correlation, class_names);
        let mut undefined = Vec::new();
        for (measure, v) in [
            ("informedness", &informedness),
            ("markedness", &markedness),
            ("kappa", &kappa),
            ("correlation", &correlation),
        ] {
            match v {
                Value::Undefined(reason) => undefined.push(Undefined {
                    measure,
                    reason: reason.clone(),
                }),
                Value::MixedSign => undefined.push(Undefined {
                    measure,
                    reason: "informedness and markedness differ in sign".into(),
                }),
                Value::Defined(_) => {}
            }
        }
        let per_class = report
            .per_class
            .iter()
            .map(|c| ClassRow {
                class: class_names[c.class].clone(),
                prevalence: c.prevalence,
                bias: c.bias,
                delta_p: c.delta_p,
                delta_p_prime: c.delta_p_prime,
                precision: c.precision,
                recall: c.recall,
            })
            .collect();
        Self {
            n: report.n,
            k: report.k,
            accuracy: report.accuracy,
            informedness,
            markedness,
            kappa,
            correlation,
            per_class,
            undefined,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.undefined.is_empty()
    }

    /// Long format `metric,class,value`; overall measures have an empty
    /// class and undefined values an empty value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,class,value\n");
        let _ = writeln!(out, "n,,{}", g17(self.n));
        let _ = writeln!(out, "k,,{}", self.k);
        let _ = writeln!(out, "accuracy,,{}", g17(self.accuracy));
        for (name, v) in self.overall() {
            let _ = writeln!(out, "{name},,{}", v.text());
        }
        for row in &self.per_class {
            for (name, v) in row.fields() {
                let _ = writeln!(out, "{name},{},{}", row.class, v.map(g17).unwrap_or_default());
            }
        }
        out
    }

    /// Aligned human-readable summary. Not byte-stable.
    pub fn to_table(&self) -> String {
        let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "n = {}, k = {}", self.n, self.k);
        let _ = writeln!(out, "{:<14}{:>10.4}", "accuracy", self.accuracy);
        for (name, v) in self.overall() {
            let shown = match v {
                Value::MixedSign => "mixed sign".to_string(),
                other => show(other.get()),
            };
            let _ = writeln!(out, "{name:<14}{shown:>10}");
        }
        let _ = writeln!(
            out,
            "\n{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}",
            "class", "prev", "bias", "dP", "dP'", "prec", "recall"
        );
        for r in &self.per_class {
            let _ = writeln!(
                out,
                "{:<10}{:>10.4}{:>10.4}{:>10}{:>10}{:>10}{:>10}",
                r.class,
                r.prevalence,
                r.bias,
                show(r.delta_p),
                show(r.delta_p_prime),
                show(r.precision),
                show(r.recall)
            );
        }
        for u in &self.undefined {
            let _ = writeln!(out, "note: {} undefined ({})", u.measure, u.reason);
        }
        out
    }

    fn overall(&self) -> [(&'static str, &Value); 4] {
        [
            ("informedness", &self.informedness),
            ("markedness", &self.markedness),
            ("kappa", &self.kappa),
            ("correlation", &self.correlation),
        ]
    }
}

impl ClassRow {
    fn fields(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("prevalence", Some(self.prevalence)),
            ("bias", Some(self.bias)),
            ("delta_p", self.delta_p),
            ("delta_p_prime", self.delta_p_prime),
            ("precision", self.precision),
            ("recall", self.recall),
        ]
    }
}
