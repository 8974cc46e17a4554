//! Report assembly and number formatting for JSON and CSV output.

use bellkey::filtering::{normal_form, EntanglementReport, FilterOutcome, NormalFormKind, StateSummary, XFormParams};
use bellkey::linalg::CMatrix2;
use bellkey::metrics::{optimal_chsh_settings, qber, CorrelationSpectrum, KeyMetrics, Region};
use bellkey::states::{TwoQubitState, ValidityReport};
use bellkey::sweep::SweepRow;
use nalgebra::{Matrix4, Vector3};
use serde::Serialize;
use serde_json::Value;

pub const JSON_DIGITS: usize = 9;
pub const CSV_DIGITS: usize = 6;

/// Magnitudes below this print as zero.
pub const ZERO_SNAP: f64 = 1e-15;

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x.abs() < ZERO_SNAP {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or_default(), JSON_DIGITS);
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to nine significant digits.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialise to JSON");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("values print")
}

fn rows4(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn complex_rows(m: &CMatrix2) -> [[[f64; 2]; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| [m[(i, j)].re, m[(i, j)].im]))
}

fn triple(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Debug, Serialize)]
pub struct Spectrum {
    pub lambdas: [f64; 3],
    pub alice_dirs: [[f64; 3]; 3],
    pub bob_dirs: [[f64; 3]; 3],
    pub signs: [f64; 3],
}

impl From<&CorrelationSpectrum> for Spectrum {
    fn from(s: &CorrelationSpectrum) -> Self {
        Self {
            lambdas: s.lambdas,
            alice_dirs: s.alice_dirs.each_ref().map(triple),
            bob_dirs: s.bob_dirs.each_ref().map(triple),
            signs: s.signs,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Settings {
    pub a0: [f64; 3],
    pub a1: [f64; 3],
    pub b0: [f64; 3],
    pub b1: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub spectrum: Spectrum,
    pub lam_sq_sum: f64,
    pub lam_sum: f64,
    pub s_max: f64,
    /// `None` when the two leading singular values vanish.
    pub settings: Option<Settings>,
    #[serde(rename = "q_L2")]
    pub q_l2: f64,
    #[serde(rename = "q_L3")]
    pub q_l3: f64,
    pub r_min: f64,
    pub distillable: bool,
    pub region: Region,
    pub concurrence: f64,
    pub eof: f64,
    pub validity: ValidityReport,
}

impl AnalysisReport {
    pub fn of(state: &TwoQubitState) -> Self {
        let summary = StateSummary::of(state);
        let spec = &summary.spectrum;
        let settings = optimal_chsh_settings(spec)
            .ok()
            .map(|s| Settings { a0: triple(&s.a0), a1: triple(&s.a1), b0: triple(&s.b0), b1: triple(&s.b1) });
        let ent = EntanglementReport::of(state);
        Self {
            spectrum: spec.into(),
            lam_sq_sum: summary.lam_sq_sum,
            lam_sum: summary.lam_sum,
            s_max: summary.s_max,
            settings,
            q_l2: summary.key.q,
            q_l3: qber(spec, 3).expect("three bases supported"),
            r_min: summary.key.r_min,
            distillable: summary.key.distillable,
            region: summary.region,
            concurrence: ent.concurrence,
            eof: ent.eof,
            validity: state.validate(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub spectrum: Spectrum,
    pub lam_sq_sum: f64,
    pub lam_sum: f64,
    pub s_max: f64,
    pub region: Region,
    pub key: KeyMetrics,
}

impl From<&StateSummary> for Summary {
    fn from(s: &StateSummary) -> Self {
        Self {
            spectrum: (&s.spectrum).into(),
            lam_sq_sum: s.lam_sq_sum,
            lam_sum: s.lam_sum,
            s_max: s.s_max,
            region: s.region,
            key: s.key,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Filters {
    pub m1: [[[f64; 2]; 2]; 2],
    pub n1: [[[f64; 2]; 2]; 2],
    pub identity: bool,
}

#[derive(Debug, Serialize)]
pub struct NormalFormReport {
    pub kind: NormalFormKind,
    pub l1: [[f64; 4]; 4],
    pub l2: [[f64; 4]; 4],
    pub sigma: [[f64; 4]; 4],
}

#[derive(Debug, Serialize)]
pub struct FilterReport {
    pub p_succ: f64,
    pub r_filtered: f64,
    pub filters: Filters,
    pub before: Summary,
    pub after: Summary,
    /// Absent when the Mueller matrix has no nontrivial normal form.
    pub normal_form: Option<NormalFormReport>,
}

impl FilterReport {
    pub fn of(state: &TwoQubitState, out: &FilterOutcome) -> Self {
        let normal_form = normal_form(&state.to_mueller()).ok().map(|nf| NormalFormReport {
            kind: nf.kind,
            l1: rows4(nf.l1.matrix()),
            l2: rows4(nf.l2.matrix()),
            sigma: rows4(&nf.sigma),
        });
        Self {
            p_succ: out.p_succ,
            r_filtered: out.r_filtered,
            filters: Filters {
                m1: complex_rows(out.filters.m1()),
                n1: complex_rows(out.filters.n1()),
                identity: out.filters.is_identity(),
            },
            before: (&out.before).into(),
            after: (&out.after).into(),
            normal_form,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct XFormReport {
    pub kind: &'static str,
    pub params: XFormParams,
    pub note: String,
}

impl XFormReport {
    pub fn new(params: XFormParams) -> Self {
        Self {
            kind: "x_form",
            params,
            note: "only the X-form is reachable; d=0 corresponds to a separable initial state".into(),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "alpha",
    "mu",
    "lam_sq_sum",
    "lam_sum",
    "region",
    "filterable",
    "p_succ",
    "lam_sq_sum_after",
    "lam_sum_after",
    "r_filtered",
];

fn csv_float(x: f64) -> String {
    round_sig(x, CSV_DIGITS).to_string()
}

pub fn csv_record(row: &SweepRow) -> [String; 10] {
    [
        csv_float(row.alpha),
        csv_float(row.mu),
        csv_float(row.lam_sq_sum),
        csv_float(row.lam_sum),
        row.region.to_string(),
        row.filterable.to_string(),
        csv_float(row.p_succ),
        csv_float(row.lam_sq_sum_after),
        csv_float(row.lam_sum_after),
        csv_float(row.r_filtered),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellkey::filtering::filtered_key_rate;
    use bellkey::states::gisin;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1234567891234, 9), 0.123456789);
        assert_eq!(round_sig(-1234.56789, 6), -1234.57);
        assert_eq!(round_sig(0.0, 6), 0.0);
        assert!(round_sig(f64::NAN, 6).is_nan());
    }

    #[test]
    fn analysis_field_order() {
        let json = to_json(&AnalysisReport::of(&TwoQubitState::singlet()));
        let v: Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "spectrum", "lam_sq_sum", "lam_sum", "s_max", "settings", "q_L2", "q_L3", "r_min",
                "distillable", "region", "concurrence", "eof", "validity"
            ]
        );
        assert_eq!(v["s_max"], 2.82842712);
        assert_eq!(v["region"], "ViolatingUsable");
    }

    #[test]
    fn maximally_mixed_has_no_settings() {
        let r = AnalysisReport::of(&TwoQubitState::maximally_mixed());
        assert!(r.settings.is_none());
        assert_eq!(r.region, Region::NonviolatingUnusable);
    }

    #[test]
    fn filter_report_carries_normal_form() {
        let state = gisin(0.9, 0.85).unwrap();
        let out = filtered_key_rate(&state).unwrap();
        let r = FilterReport::of(&state, &out);
        assert_eq!(r.normal_form.unwrap().kind, NormalFormKind::Diagonal);
        assert!(!r.filters.identity);
    }

    #[test]
    fn csv_digits() {
        let row = bellkey::sweep::gisin_row(0.9, 0.85).unwrap();
        let rec = csv_record(&row);
        assert_eq!(rec[2], "0.934771");
        assert_eq!(rec[4], "NonviolatingUnusable");
        assert_eq!(rec[5], "true");
    }
}
