//! `report`: a Markdown summary of whatever results already exist in the
//! output directory.

use crate::error::CliError;
use crate::output::OutputDir;
use serde_json::Value;
use std::fmt::Write;

const SOURCES: [&str; 5] = ["spectrum.json", "sweep.json", "rate_fit.json", "verify_forms.json", "verify_lemma.json"];

fn load(out: &OutputDir, name: &str) -> Result<Option<Value>, CliError> {
    let path = out.path(name);
    let Ok(text) = std::fs::read_to_string(&path) else {
        return Ok(None);
    };
    serde_json::from_str(&text).map(Some).map_err(|e| CliError::Input(path.display().to_string(), e.to_string()))
}

fn number(value: &Value) -> String {
    match value.as_f64() {
        Some(v) if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) => format!("{v:.4e}"),
        Some(v) => format!("{v:.6}"),
        None if value.is_null() => "n/a".into(),
        None => value.to_string(),
    }
}

fn checks_table(doc: &Value, md: &mut String) {
    let _ = writeln!(md, "| check | result | value | tolerance |\n|---|---|---|---|");
    for c in doc["checks"].as_array().into_iter().flatten() {
        let result = if c["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" };
        let _ = writeln!(
            md,
            "| {} | {result} | {} | {} |",
            c["name"].as_str().unwrap_or("?"),
            number(&c["value"]),
            number(&c["tolerance"])
        );
    }
}

fn spectrum_section(doc: &Value, md: &mut String) {
    let _ = writeln!(md, "## Spectrum\n\nSmallest |E| of the infinite-mass operator: {}\n", number(&doc["min_abs_energy"]));
    for set in doc["oracle"].as_array().into_iter().flatten() {
        let positive: Vec<String> = set["roots"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|r| r["energy"].as_f64())
            .filter(|e| *e > 0.0)
            .take(6)
            .map(|e| format!("{e:.8}"))
            .collect();
        let _ = writeln!(
            md,
            "- disk_oracle, {} (mass {}): lowest positive energies {}",
            set["operator"].as_str().unwrap_or("?"),
            number(&set["mass"]),
            positive.join(", ")
        );
    }
    for set in doc["galerkin"].as_array().into_iter().flatten() {
        let magnitudes: Vec<String> =
            set["magnitudes"].as_array().into_iter().flatten().filter_map(Value::as_f64).map(|e| format!("{e:.8}")).collect();
        let _ = writeln!(
            md,
            "- galerkin, {} (mass {}): |E| {} with {} unknowns",
            set["operator"].as_str().unwrap_or("?"),
            number(&set["mass"]),
            magnitudes.join(", "),
            set["unknowns"]
        );
    }
    md.push('\n');
}

fn sweep_section(doc: &Value, rate: Option<&Value>, md: &mut String) {
    let _ = writeln!(md, "## Sweep\n\nSource: {}, window ±{}\n", doc["source"], number(&doc["window"]));
    let _ = writeln!(md, "| M | levels | reference | ground error | distance | M·ext mass | M·minus trace |\n|---|---|---|---|---|---|---|");
    for r in doc["records"].as_array().into_iter().flatten() {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r["mass"],
            r["window_count"],
            r["reference_count"],
            number(&r["ground_error"]),
            number(&r["ground_distance"]),
            number(&r["decay"]["scaled_exterior_mass"]),
            number(&r["decay"]["scaled_minus_trace"])
        );
    }
    if let Some(fit) = rate.map(|r| &r["fit"]).filter(|f| !f.is_null()) {
        let _ = writeln!(md, "\nFitted slope of the ground error: {}", number(&fit["slope"]));
    }
    md.push('\n');
}

pub fn run(out: &mut OutputDir) -> Result<String, CliError> {
    let mut docs = Vec::new();
    for name in SOURCES {
        docs.push((name, load(out, name)?));
    }
    if docs.iter().all(|(_, d)| d.is_none()) {
        return Err(CliError::Input(
            out.path("").display().to_string(),
            "no results to report; run spectrum, sweep or a verify command first".into(),
        ));
    }
    let mut md = format!("# infmass results\n\nConfiguration hash: `{}`\n\n", out.config_hash());
    let _ = writeln!(md, "| file | config hash | matches |\n|---|---|---|");
    let mut stale = 0;
    for (name, doc) in &docs {
        match doc {
            None => {
                let _ = writeln!(md, "| {name} | missing | |");
            }
            Some(doc) => {
                let hash = doc["config_hash"].as_str().unwrap_or("?");
                let matches = hash == out.config_hash();
                stale += usize::from(!matches);
                let _ = writeln!(md, "| {name} | `{}` | {} |", &hash[..hash.len().min(12)], if matches { "yes" } else { "no" });
            }
        }
    }
    md.push('\n');
    let doc = |name: &str| docs.iter().find(|(n, _)| *n == name).and_then(|(_, d)| d.as_ref());
    if let Some(spectrum) = doc("spectrum.json") {
        spectrum_section(spectrum, &mut md);
    }
    if let Some(sweep) = doc("sweep.json") {
        sweep_section(sweep, doc("rate_fit.json"), &mut md);
    }
    for (name, title) in [("verify_forms.json", "Form identities"), ("verify_lemma.json", "Variational lemma")] {
        if let Some(checks) = doc(name) {
            let _ = writeln!(md, "## {title}\n");
            checks_table(checks, &mut md);
            md.push('\n');
        }
    }
    out.write_all(vec![("report.md".into(), md.into_bytes())])?;
    let mut summary = format!("wrote {}\n", out.path("report.md").display());
    if stale > 0 {
        let _ = writeln!(summary, "{stale} result file(s) were produced with a different configuration");
    }
    Ok(summary)
}
