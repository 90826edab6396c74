//! `spectrum`: infinite-mass (and optionally finite-mass) eigenvalues from the
//! disk oracle and/or the Galerkin solver.

use crate::config::{RunConfig, SourceChoice};
use crate::error::CliError;
use crate::output::OutputDir;
use infmass::disk::{oracle_spectrum, OracleRoot};
use infmass::galerkin::{
    assemble_infinity, assemble_massive, lowest_eigenpairs, recover_signs, FormSystem, Provenance, SignedLevel,
    SpectrumResult,
};
use infmass::mesh::{ExteriorLayer, PolarMesh};
use infmass::spinor::{OperatorKind, C64};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write;
use std::sync::Arc;

#[derive(Serialize)]
struct OracleSet {
    provenance: Provenance,
    operator: OperatorKind,
    mass: Option<f64>,
    window: f64,
    roots: Vec<OracleRoot>,
}

#[derive(Serialize)]
struct GalerkinSet {
    #[serde(flatten)]
    result: SpectrumResult,
    levels: Vec<SignedLevel>,
    angular: usize,
    interior_rings: usize,
    exterior_rings: usize,
}

#[derive(Serialize)]
struct SpectrumBody {
    oracle: Vec<OracleSet>,
    galerkin: Vec<GalerkinSet>,
    /// Smallest `|E|` of the infinite-mass operator over all sources.
    min_abs_energy: Option<f64>,
}

struct GalerkinRun {
    set: GalerkinSet,
    eigenvectors: Vec<(String, Vec<u8>)>,
}

fn operator_tag(kind: OperatorKind) -> &'static str {
    match kind {
        OperatorKind::Infinity => "infinity",
        OperatorKind::Massive => "massive",
    }
}

fn build_system(config: &RunConfig, mass: Option<f64>) -> Result<FormSystem, CliError> {
    let curve = config.curve()?;
    let rings = config.mesh.interior_rings();
    Ok(match mass {
        None => assemble_infinity(Arc::new(PolarMesh::interior(curve, rings)?))?,
        Some(m) => {
            let layer =
                ExteriorLayer::for_mass(m, config.spectrum.window, config.mesh.padding, config.mesh.exterior_rings())?;
            assemble_massive(Arc::new(PolarMesh::with_exterior(curve, rings, layer)?), m)?
        }
    })
}

/// Residual of the squared-operator pair whose value is closest to `E²`.
fn matching_residual(result: &SpectrumResult, energy: f64) -> f64 {
    let target = energy * energy;
    result
        .squared
        .iter()
        .zip(&result.residuals)
        .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
        .map_or(f64::NAN, |(_, r)| *r)
}

fn solve_galerkin(config: &RunConfig, mass: Option<f64>, keep: usize) -> Result<GalerkinRun, CliError> {
    let system = build_system(config, mass)?;
    let pairs = lowest_eigenpairs(&system.form, &system.gram, config.spectrum.count, &config.solver.options())?;
    let (levels, vectors) = recover_signs(&system, &pairs)?;
    let result = SpectrumResult::from_pairs(&system, &pairs, Some(&levels));

    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].energy.abs().total_cmp(&levels[b].energy.abs()).then(a.cmp(&b)));
    let mut eigenvectors = Vec::new();
    for (rank, &column) in order.iter().take(keep).enumerate() {
        let coefficients: Vec<C64> = (0..vectors.nrows()).map(|i| vectors[(i, column)]).collect();
        let mut field = system.expand(&coefficients)?;
        field.normalize()?;
        let mut csv = Vec::new();
        field.write_csv(&mut csv).expect("writing to memory");
        let name = format!("eigenvector_{}_{}.csv", operator_tag(system.kind), rank + 1);
        eigenvectors.push((name, csv));
    }
    let set = GalerkinSet {
        result,
        levels,
        angular: config.mesh.angular(),
        interior_rings: config.mesh.interior_rings(),
        exterior_rings: if mass.is_some() { config.mesh.exterior_rings() } else { 0 },
    };
    Ok(GalerkinRun { set, eigenvectors })
}

fn fmt_mass(mass: Option<f64>) -> String {
    mass.map(|m| format!("{m}")).unwrap_or_default()
}

pub fn run(config: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let settings = &config.spectrum;
    let radius = config.disk_radius();
    let use_oracle = match (settings.source, radius) {
        (SourceChoice::DiskOracle, None) => {
            return Err(CliError::Config("spectrum.source = \"disk_oracle\" needs a disk domain".into()))
        }
        (SourceChoice::Galerkin, _) | (SourceChoice::Both, None) => false,
        _ => true,
    };
    let use_galerkin = settings.source != SourceChoice::DiskOracle;
    let masses: Vec<Option<f64>> = std::iter::once(None).chain(settings.mass.map(Some)).collect();

    let mut oracle = Vec::new();
    if let (true, Some(radius)) = (use_oracle, radius) {
        for &mass in &masses {
            let mut roots = oracle_spectrum(radius, mass, -settings.window, settings.window)?;
            if !settings.sectors.is_empty() {
                roots.retain(|r| settings.sectors.contains(&r.sector));
            }
            let operator = if mass.is_some() { OperatorKind::Massive } else { OperatorKind::Infinity };
            oracle.push(OracleSet { provenance: Provenance::DiskOracle, operator, mass, window: settings.window, roots });
        }
    }

    let runs: Vec<GalerkinRun> = if use_galerkin {
        masses.par_iter().map(|&m| solve_galerkin(config, m, settings.eigenvectors)).collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let infinity_energies = oracle
        .iter()
        .filter(|s| s.mass.is_none())
        .flat_map(|s| s.roots.iter().map(|r| r.energy))
        .chain(runs.iter().filter(|r| r.set.result.mass.is_none()).flat_map(|r| r.set.levels.iter().map(|l| l.energy)));
    let min_abs_energy = infinity_energies.map(f64::abs).reduce(f64::min);

    let mut files = Vec::new();
    let mut table = String::from("provenance,operator,mass,sector,index,energy,residual\n");
    for set in &oracle {
        let mut csv = String::from("m,root_index,E,residual\n");
        for r in &set.roots {
            let _ = writeln!(csv, "{},{},{:.15e},{:.3e}", r.sector, r.index, r.energy, r.residual);
            let _ = writeln!(
                table,
                "disk_oracle,{},{},{},{},{:.15e},{:.3e}",
                operator_tag(set.operator),
                fmt_mass(set.mass),
                r.sector,
                r.index,
                r.energy,
                r.residual
            );
        }
        let name = if set.mass.is_some() { "oracle_massive.csv" } else { "oracle.csv" };
        files.push((name.to_string(), out.csv(csv.into_bytes())));
    }
    for run in &runs {
        let result = &run.set.result;
        for (i, level) in run.set.levels.iter().enumerate() {
            let _ = writeln!(
                table,
                "galerkin,{},{},,{},{:.15e},{:.3e}",
                operator_tag(result.operator),
                fmt_mass(result.mass),
                i + 1,
                level.energy,
                matching_residual(result, level.energy)
            );
        }
    }
    let mut curve_csv = Vec::new();
    config.curve()?.write_csv(&mut curve_csv).expect("writing to memory");

    let mut eigenvector_files = Vec::new();
    let mut galerkin = Vec::new();
    for run in runs {
        eigenvector_files.extend(run.eigenvectors);
        galerkin.push(run.set);
    }
    let body = SpectrumBody { oracle, galerkin, min_abs_energy };
    files.push(("spectrum.json".into(), out.json("spectrum", &body)));
    files.push(("spectrum.csv".into(), out.csv(table.into_bytes())));
    files.push(("curve.csv".into(), out.csv(curve_csv)));
    for (name, csv) in eigenvector_files {
        files.push((name, out.csv(csv)));
    }
    out.write_all(files)?;

    let mut summary = String::new();
    for set in &body.oracle {
        let lowest = set.roots.iter().map(|r| r.energy.abs()).reduce(f64::min);
        let _ = writeln!(
            summary,
            "disk_oracle {} mass={}: {} roots in (-{w}, {w}), min |E| = {}",
            operator_tag(set.operator),
            fmt_mass(set.mass),
            set.roots.len(),
            lowest.map_or("none".into(), |e| format!("{e:.10}")),
            w = set.window
        );
    }
    for set in &body.galerkin {
        let r = &set.result;
        let _ = writeln!(
            summary,
            "galerkin {} mass={}: |E| = {:.8?} ({} unknowns, {} iterations)",
            operator_tag(r.operator),
            fmt_mass(r.mass),
            r.magnitudes,
            r.unknowns,
            r.iterations
        );
    }
    Ok(summary)
}
