//! Quadratic forms of the infinite-mass and finite-mass Dirac operators
//! evaluated on sampled fields, together with the boundary identities that
//! relate them to direct evaluations of `‖Hψ‖²`.

use crate::error::{Error, Result};
use crate::field::{dirac_at, SpinorField};
use crate::mesh::Patch;
use crate::spinor::{boundary_quadratic_via_imaginary_part, norm_sqr, BoundaryProjector};
use serde::Serialize;

/// Default tolerance on the relative `P₋` defect of the boundary trace.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Ratio of the largest value on the outer ring to the global maximum above
/// which a field is considered truncated.
pub const TRUNCATION_RATIO: f64 = 1e-8;

/// Individual terms of a quadratic form.
///
/// For the infinite-mass form only `dirichlet_inside` and `curvature` enter
/// the total. For the finite-mass form the total is
/// `dirichlet_inside + dirichlet_outside + exterior_mass - boundary_signed`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FormBreakdown {
    pub mass: f64,
    pub dirichlet_inside: f64,
    pub dirichlet_outside: f64,
    /// `M² ∫_{Ωᶜ} |ψ|²`.
    pub exterior_mass: f64,
    /// `½ ∫ α' |ψ|² ds`.
    pub curvature: f64,
    /// `M ∫ (|P₊ψ|² - |P₋ψ|²) ds`.
    pub boundary_signed: f64,
    /// The same boundary term evaluated through `2M ∫ Im(conj(ψ₁) ψ₂ e^{-iα}) ds`.
    pub boundary_signed_imaginary: f64,
    /// `∫ |P₋ψ|² ds`.
    pub minus_trace: f64,
    /// `∫ |ψ|² ds`.
    pub trace: f64,
    pub total: f64,
}

fn dirichlet(field: &SpinorField) -> (f64, f64) {
    let mesh = field.mesh();
    let n_ang = mesh.angular();
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (grad, p) in field.gradients().iter().zip(mesh.patches()) {
        let mut acc = 0.0;
        for row in 0..p.rows {
            for j in 0..n_ang {
                let k = row * n_ang + j;
                acc += p.weight(row, j) * (norm_sqr(&grad.dx[k]) + norm_sqr(&grad.dy[k]));
            }
        }
        match p.patch {
            Patch::Interior => inside = acc,
            Patch::Exterior => outside = acc,
        }
    }
    (inside, outside)
}

struct BoundaryTerms {
    curvature: f64,
    signed: f64,
    signed_imaginary: f64,
    minus: f64,
    trace: f64,
}

fn boundary_terms(field: &SpinorField) -> BoundaryTerms {
    let curve = field.mesh().curve().clone();
    let ds = curve.spacing();
    let mut t = BoundaryTerms { curvature: 0.0, signed: 0.0, signed_imaginary: 0.0, minus: 0.0, trace: 0.0 };
    for (v, p) in field.boundary_trace().iter().zip(curve.samples()) {
        let proj = BoundaryProjector::at_angle(p.angle);
        let n2 = norm_sqr(v);
        t.curvature += 0.5 * p.curvature * n2 * ds;
        t.signed += proj.boundary_quadratic(v) * ds;
        t.signed_imaginary += boundary_quadratic_via_imaginary_part(v, p.angle) * ds;
        t.minus += proj.minus_norm_sqr(v) * ds;
        t.trace += n2 * ds;
    }
    t
}

fn check_boundary_condition(terms: &BoundaryTerms, tol: f64) -> Result<()> {
    if terms.trace > 0.0 {
        let defect = (terms.minus / terms.trace).sqrt();
        if defect > tol {
            return Err(Error::BoundaryCondition { defect, tol });
        }
    }
    Ok(())
}

fn check_truncation(field: &SpinorField) -> Result<()> {
    let mesh = field.mesh();
    let Some(p) = mesh.patch(Patch::Exterior) else {
        return Err(Error::MeshMismatch("the finite-mass form needs an exterior layer".into()));
    };
    let peak = field.values().iter().map(norm_sqr).fold(0.0, f64::max).sqrt();
    if peak == 0.0 {
        return Err(Error::ZeroVector);
    }
    let edge = (0..mesh.angular())
        .map(|j| norm_sqr(&field.values()[p.node(p.rows - 1, j)]))
        .fold(0.0, f64::max)
        .sqrt();
    let ratio = edge / peak;
    if ratio > TRUNCATION_RATIO {
        return Err(Error::Truncation { ratio });
    }
    Ok(())
}

/// `‖H∞ φ‖² = ∫_Ω |∇φ|² + ½ ∫ α' |φ|² ds` for a field obeying the
/// infinite-mass boundary condition within `tol`.
pub fn infinity_form(field: &SpinorField, tol: f64) -> Result<FormBreakdown> {
    let terms = boundary_terms(field);
    check_boundary_condition(&terms, tol)?;
    let (inside, _) = dirichlet(field);
    Ok(FormBreakdown {
        dirichlet_inside: inside,
        curvature: terms.curvature,
        minus_trace: terms.minus,
        trace: terms.trace,
        total: inside + terms.curvature,
        ..FormBreakdown::default()
    })
}

/// `‖H_M ψ‖²` written as
/// `∫|∇ψ|² + M² ∫_{Ωᶜ}|ψ|² - M ∫ (|P₊ψ|² - |P₋ψ|²) ds`.
pub fn massive_form(field: &SpinorField, mass: f64) -> Result<FormBreakdown> {
    check_truncation(field)?;
    let terms = boundary_terms(field);
    let (inside, outside) = dirichlet(field);
    let exterior_mass = mass * mass * field.norm_sqr_outside();
    let boundary_signed = mass * terms.signed;
    Ok(FormBreakdown {
        mass,
        dirichlet_inside: inside,
        dirichlet_outside: outside,
        exterior_mass,
        curvature: terms.curvature,
        boundary_signed,
        boundary_signed_imaginary: mass * terms.signed_imaginary,
        minus_trace: terms.minus,
        trace: terms.trace,
        total: inside + outside + exterior_mass - boundary_signed,
    })
}

/// Direct quadrature of `∫ |(T + σ₃ M 1_{Ωᶜ}) ψ|²`.
///
/// With `mass = None` only the domain is integrated, which is `‖H∞ φ‖²` for
/// fields in the operator domain.
pub fn dirac_norm_sqr(field: &SpinorField, mass: Option<f64>) -> f64 {
    let mesh = field.mesh();
    let n_ang = mesh.angular();
    let mut acc = 0.0;
    for (grad, p) in field.gradients().iter().zip(mesh.patches()) {
        let exterior = p.patch == Patch::Exterior;
        if exterior && mass.is_none() {
            continue;
        }
        let m = mass.unwrap_or(0.0);
        for row in 0..p.rows {
            for j in 0..n_ang {
                let k = row * n_ang + j;
                let mut t = dirac_at(&grad.dx[k], &grad.dy[k]);
                if exterior {
                    let v = field.values()[p.node(row, j)];
                    t[0] += v[0] * m;
                    t[1] -= v[1] * m;
                }
                acc += p.weight(row, j) * norm_sqr(&t);
            }
        }
    }
    acc
}

/// Terms of the lower bound
/// `‖H_M ψ‖² ≥ ∫_Ω |∇ψ|² + ½ ∫ α'|ψ|² + M ∫ |P₋ψ|² - (C/M) ∫ |ψ|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub mass: f64,
    /// Directly integrated `‖H_M ψ‖²`.
    pub lhs: f64,
    pub dirichlet_inside: f64,
    pub curvature: f64,
    /// `M ∫ |P₋ψ|² ds`.
    pub minus_penalty: f64,
    pub trace: f64,
    /// `lhs - (dirichlet_inside + curvature + minus_penalty)`.
    pub gap: f64,
    /// `gap · M / trace`: the bound holds with any `C ≥ -scaled_gap`.
    pub scaled_gap: f64,
}

impl LowerBoundReport {
    /// Smallest non-negative constant `C` for which the bound holds on this field.
    pub fn empirical_constant(&self) -> f64 {
        (-self.scaled_gap).max(0.0)
    }
}

pub fn lower_bound(field: &SpinorField, mass: f64) -> Result<LowerBoundReport> {
    let form = massive_form(field, mass)?;
    let lhs = dirac_norm_sqr(field, Some(mass));
    let minus_penalty = mass * form.minus_trace;
    let gap = lhs - (form.dirichlet_inside + form.curvature + minus_penalty);
    let scaled_gap = if form.trace > 0.0 { gap * mass / form.trace } else { 0.0 };
    Ok(LowerBoundReport {
        mass,
        lhs,
        dirichlet_inside: form.dirichlet_inside,
        curvature: form.curvature,
        minus_penalty,
        trace: form.trace,
        gap,
        scaled_gap,
    })
}
