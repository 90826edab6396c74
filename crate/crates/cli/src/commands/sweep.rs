//! `sweep`: finite-mass spectra over the mass list, compared against the
//! infinite-mass reference inside a fixed window.

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::plot::convergence_svg;
use infmass::convergence::{sweep, RateFit, SweepSettings};
use serde::Serialize;
use std::fmt::Write;

#[derive(Serialize)]
struct RateBody<'a> {
    /// The fit uses the upper half of the mass list.
    fitted_points: usize,
    fit: Option<&'a RateFit>,
}

pub fn settings(config: &RunConfig) -> Result<SweepSettings, CliError> {
    let settings = SweepSettings {
        curve: config.curve()?,
        masses: config.sweep.masses.clone(),
        window: config.sweep.window,
        edge_margin: config.sweep.edge_margin,
        interior_rings: config.mesh.interior_rings(),
        exterior_rings: config.mesh.exterior_rings(),
        padding: config.mesh.padding,
        source: config.sweep.source,
        solver: config.solver.options(),
    };
    settings.validate()?;
    Ok(settings)
}

fn optional(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6e}")).unwrap_or_default()
}

pub fn run(config: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let report = sweep(&settings(config)?)?;

    let mut csv = String::from(
        "mass,window_count,reference_count,counts_match,gaps_clear,ground_error,ground_distance,\
         scaled_exterior_mass,scaled_minus_trace,gradient_ratio\n",
    );
    for r in &report.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.6e},{},{:.6e},{:.6e},{:.6e}",
            r.mass,
            r.window_count,
            r.reference_count,
            r.counts_match,
            r.gaps_clear,
            r.ground_error,
            optional(r.ground_distance),
            r.decay.scaled_exterior_mass,
            r.decay.scaled_minus_trace,
            r.decay.gradient_ratio
        );
    }
    let points: Vec<(f64, f64)> = report.records.iter().map(|r| (r.mass, r.ground_error)).collect();
    let rate = RateBody { fitted_points: report.rate.as_ref().map_or(0, |f| f.masses.len()), fit: report.rate.as_ref() };
    let svg = convergence_svg(&points, report.rate.as_ref(), out.config_hash());

    out.write_all(vec![
        ("sweep.csv".into(), out.csv(csv.into_bytes())),
        ("sweep.json".into(), out.json("sweep", &report)),
        ("rate_fit.json".into(), out.json("rate_fit", &rate)),
        ("sweep.svg".into(), svg.into_bytes()),
    ])?;

    let mut summary = String::new();
    for r in &report.records {
        let _ = writeln!(
            summary,
            "M = {:>8}: {} levels (reference {}), ground error {:.3e}, distance {}",
            r.mass,
            r.window_count,
            r.reference_count,
            r.ground_error,
            r.ground_distance.map_or("n/a".into(), |d| format!("{d:.4}"))
        );
    }
    match &report.rate {
        Some(fit) => {
            let _ = writeln!(summary, "fitted slope {:.4} over M = {:?}", fit.slope, fit.masses);
        }
        None => summary.push_str("too few masses for a rate fit\n"),
    }
    Ok(summary)
}
