//! `verify-forms` and `verify-lemma`: named pass/fail checks with their
//! measured values, written as JSON. Any failing check yields exit code 4.

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use infmass::convergence::{variational_check, VariationalProblem, VariationalReport};
use infmass::forms::{dirac_norm_sqr, infinity_form, massive_form, FormBreakdown};
use infmass::geometry::BoundaryCurve;
use infmass::mesh::{ExteriorLayer, PolarMesh};
use infmass::sample_fields::{boundary_field, FieldCoefficients};
use infmass::spinor::{
    boundary_phase, charge_conjugate, current_density, BoundaryProjector, Mat2, OperatorKind, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write;
use std::sync::Arc;

/// Tolerance of checks that hold to rounding error.
const ROUNDING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance }
    }
}

fn finish(checks: &[Check], title: &str) -> Result<String, CliError> {
    let mut summary = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(summary, "{title} {:<28} {status}  value {:.3e}  tolerance {:.1e}", c.name, c.value, c.tolerance);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    if failed.is_empty() {
        Ok(summary)
    } else {
        eprint!("{summary}");
        Err(CliError::ChecksFailed(failed))
    }
}

struct BoundaryAlgebra {
    projectors: f64,
    flux: f64,
    conjugation: f64,
}

/// Projector identities on every curve sample, and the current and charge
/// conjugation checks on traces `(u, e^{i offset} a(s) u)`.
fn boundary_algebra(curve: &BoundaryCurve, phase_offset: f64, seed: u64) -> BoundaryAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = BoundaryAlgebra { projectors: 0.0, flux: 0.0, conjugation: 0.0 };
    for p in curve.samples() {
        let proj = BoundaryProjector::at_angle(p.angle);
        let [lo, hi] = proj.reflection.hermitian_eigenvalues();
        worst.projectors = worst
            .projectors
            .max((proj.plus * proj.plus).max_abs_diff(&proj.plus))
            .max((proj.minus * proj.minus).max_abs_diff(&proj.minus))
            .max((proj.plus + proj.minus).max_abs_diff(&Mat2::IDENTITY))
            .max((lo + 1.0).abs())
            .max((hi - 1.0).abs());

        let upper = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let trace = [upper, boundary_phase(p.angle + phase_offset) * upper];
        let size = upper.norm_sqr();
        let j = current_density(&trace);
        worst.flux = worst.flux.max((j[0] * p.normal[0] + j[1] * p.normal[1]).abs() / size);
        let conjugate = charge_conjugate(&trace, OperatorKind::Infinity);
        worst.conjugation = worst.conjugation.max((proj.minus_norm_sqr(&conjugate) / size).sqrt());
    }
    worst
}

#[derive(Serialize)]
struct FieldGaps {
    infinity: f64,
    massive: f64,
    boundary_terms: f64,
}

fn field_gaps(config: &RunConfig, curve: &Arc<BoundaryCurve>, coefficients: FieldCoefficients) -> Result<(FieldGaps, FormBreakdown), CliError> {
    let mass = config.forms.mass;
    let rings = config.mesh.interior_rings();
    let inner = Arc::new(PolarMesh::interior(curve.clone(), rings)?);
    let phi = boundary_field(inner, coefficients, mass);
    let direct = dirac_norm_sqr(&phi, None);
    let infinity = (direct - infinity_form(&phi, 1e-10)?.total).abs() / direct;

    let layer = ExteriorLayer::for_mass(mass, 0.0, config.forms.padding, config.mesh.exterior_rings())?;
    let outer = Arc::new(PolarMesh::with_exterior(curve.clone(), rings, layer)?);
    let psi = boundary_field(outer, coefficients, mass);
    let direct = dirac_norm_sqr(&psi, Some(mass));
    let form = massive_form(&psi, mass)?;
    let scale = form.boundary_signed.abs().max(form.trace * mass);
    let gaps = FieldGaps {
        infinity,
        massive: (direct - form.total).abs() / direct,
        boundary_terms: (form.boundary_signed - form.boundary_signed_imaginary).abs() / scale,
    };
    Ok((gaps, form))
}

#[derive(Serialize)]
struct FormsBody {
    checks: Vec<Check>,
    phase_offset: f64,
    mass: f64,
    fields: Vec<FieldGaps>,
    /// Breakdown of the finite-mass form for the first field.
    sample_breakdown: FormBreakdown,
}

pub fn run_forms(config: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let forms = &config.forms;
    let curve = config.curve()?;
    let algebra = boundary_algebra(&curve, forms.phase_offset, forms.seed);
    let coefficients = FieldCoefficients::seeded(forms.fields, forms.seed);
    let results: Vec<(FieldGaps, FormBreakdown)> =
        coefficients.par_iter().map(|&c| field_gaps(config, &curve, c)).collect::<Result<_, _>>()?;
    let worst = |f: fn(&FieldGaps) -> f64| results.iter().map(|(g, _)| f(g)).fold(0.0, f64::max);

    let checks = vec![
        Check::at_most("projector_algebra", algebra.projectors, ROUNDING_TOLERANCE),
        Check::at_most("current_density", algebra.flux, ROUNDING_TOLERANCE),
        Check::at_most("charge_conjugation", algebra.conjugation, ROUNDING_TOLERANCE),
        Check::at_most("infinity_form_identity", worst(|g| g.infinity), forms.tolerance),
        Check::at_most("massive_form_identity", worst(|g| g.massive), forms.tolerance),
        Check::at_most("boundary_term_identity", worst(|g| g.boundary_terms), ROUNDING_TOLERANCE),
    ];
    let sample_breakdown = results[0].1;
    let body = FormsBody {
        checks: checks.clone(),
        phase_offset: forms.phase_offset,
        mass: forms.mass,
        fields: results.into_iter().map(|(g, _)| g).collect(),
        sample_breakdown,
    };
    out.write_all(vec![("verify_forms.json".into(), out.json("verify_forms", &body))])?;
    finish(&checks, "verify-forms")
}

#[derive(Serialize)]
struct LemmaBody {
    checks: Vec<Check>,
    reports: Vec<VariationalReport>,
}

pub fn run_lemma(config: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let lemma = &config.lemma;
    let reports: Vec<VariationalReport> = lemma
        .betas
        .iter()
        .map(|&beta| Ok(variational_check(VariationalProblem::new(lemma.k, beta, lemma.delta, lemma.intervals)?)))
        .collect::<Result<_, CliError>>()?;

    let mut checks = Vec::new();
    for r in &reports {
        let beta = r.problem.beta;
        checks.push(Check {
            name: format!("bound_beta_{beta}"),
            passed: r.slack >= -lemma.slack,
            value: r.slack,
            tolerance: -lemma.slack,
        });
        if let Some(exact) = r.exact_minimum {
            checks.push(Check::at_most(
                &format!("closed_form_beta_{beta}"),
                (r.minimum - exact).abs() / exact,
                lemma.tolerance,
            ));
        }
        let holds = r.penalty_cases.iter().all(|c| c.regime_holds);
        let worst_excess = r.penalty_cases.iter().map(|c| c.excess - c.penalty / 2.0).fold(f64::INFINITY, f64::min);
        checks.push(Check {
            name: format!("penalty_regime_beta_{beta}"),
            passed: holds && !r.penalty_cases.is_empty(),
            value: worst_excess,
            tolerance: 0.0,
        });
    }
    out.write_all(vec![("verify_lemma.json".into(), out.json("verify_lemma", &LemmaBody { checks: checks.clone(), reports }))])?;
    let mut summary = finish(&checks, "verify-lemma")?;
    summary.push_str("(bound checks report minimum - (k + beta/2); the tolerance column is the allowed shortfall)\n");
    Ok(summary)
}
