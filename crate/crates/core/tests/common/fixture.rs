//! The frozen three-frame metric fixture and its oracle report.

use std::path::PathBuf;

use lift3d::eval::MetricsReport;
use serde_json::Value;

const TOL: f64 = 1e-12;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eval").join(name)
}

fn expected() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture("expected_report.json")).unwrap()).unwrap()
}

fn close(name: &str, got: f64, want: &Value) {
    let want = want.as_f64().unwrap_or_else(|| panic!("{name}: missing"));
    assert!((got - want).abs() <= TOL, "{name}: got {got}, want {want}");
}

pub fn check_against_oracle(report: &MetricsReport) {
    let want = expected();
    for key in ["mean_ap", "mate", "mase", "maoe", "mave", "maae", "mar", "nds"] {
        let got = serde_json::to_value(report).unwrap()[key].as_f64().unwrap();
        close(key, got, &want[key]);
    }
    let classes = want["per_class"].as_object().unwrap();
    assert_eq!(report.per_class.len(), classes.len());
    for (name, w) in classes {
        let c = &report.per_class[name];
        for (k, ap) in c.ap.iter().enumerate() {
            close(&format!("{name} ap[{k}]"), *ap, &w["ap"][k]);
        }
        for (k, r) in c.recall.iter().enumerate() {
            close(&format!("{name} recall[{k}]"), *r, &w["recall"][k]);
        }
        close(&format!("{name} mean_ap"), c.mean_ap, &w["mean_ap"]);
        let e = &w["tp_errors"];
        close(&format!("{name} ate"), c.tp_errors.trans_err, &e["trans_err"]);
        close(&format!("{name} ase"), c.tp_errors.scale_err, &e["scale_err"]);
        close(&format!("{name} aoe"), c.tp_errors.orient_err, &e["orient_err"]);
        close(&format!("{name} ave"), c.tp_errors.vel_err, &e["vel_err"]);
        close(&format!("{name} aae"), c.tp_errors.attr_err, &e["attr_err"]);
    }
}
