//! Trial fields for the finite-mass problem built from an infinite-mass
//! eigenfunction, and the diagnostics evaluated on them.

use crate::error::{invalid, Error, Result};
use crate::field::SpinorField;
use crate::forms::{massive_form, BOUNDARY_TOLERANCE};
use crate::mesh::{Patch, PolarMesh};
use crate::spinor::{boundary_defect, norm_sqr, BoundaryProjector, C64};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Quintic smoothstep cutoff: 1 on `[0, δ/2]`, 0 from `δ` on, `C²` in between.
pub fn cutoff(r: f64, width: f64) -> f64 {
    let t = (2.0 * r / width - 1.0).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// `ψ_M = φ` inside, `φ(γ(s)) e^{-Mr} ζ(r)` at normal offset `r` outside.
#[derive(Clone, Debug)]
pub struct TrialFunction {
    pub mass: f64,
    pub cutoff_width: f64,
    pub field: SpinorField,
}

/// Extends `base` (an infinite-mass field on the interior mesh) onto `mesh`.
pub fn build_trial(base: &SpinorField, mass: f64, mesh: Arc<PolarMesh>) -> Result<TrialFunction> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid("mass", "must be positive and finite"));
    }
    if !base.mesh().same_interior(&mesh) {
        return Err(Error::MeshMismatch("trial base and target mesh differ inside the domain".into()));
    }
    let layer = mesh
        .exterior_layer()
        .ok_or_else(|| Error::MeshMismatch("the trial field needs an exterior layer".into()))?;
    let width = mesh.curve().tube_half_width();
    if layer.extent < width {
        return Err(invalid(
            "exterior.extent",
            format!("layer of depth {} does not contain the cutoff tube of width {width}", layer.extent),
        ));
    }
    let samples = mesh.curve().samples();
    let trace = base.boundary_trace();
    for (v, p) in trace.iter().zip(samples) {
        let defect = boundary_defect(v, p.angle);
        if defect > BOUNDARY_TOLERANCE {
            return Err(Error::BoundaryCondition { defect, tol: BOUNDARY_TOLERANCE });
        }
    }
    let n_in = mesh.interior_rings();
    let base_values = base.values();
    let mesh_ref = mesh.clone();
    let field = SpinorField::from_nodes(mesh, |node| {
        let ring = mesh_ref.ring_of(node);
        if ring <= n_in {
            return base_values[node];
        }
        let r = mesh_ref.ring_offset(ring);
        let factor = C64::new((-mass * r).exp() * cutoff(r, width), 0.0);
        let v = trace[mesh_ref.column_of(node)];
        [v[0] * factor, v[1] * factor]
    });
    Ok(TrialFunction { mass, cutoff_width: width, field })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    pub mass: f64,
    /// `‖H_M ψ_M‖² / ‖ψ_M‖²`.
    pub quotient: f64,
    /// The squared infinite-mass eigenvalue the quotient is compared with.
    pub reference_squared: f64,
    /// `quotient - reference_squared`.
    pub gap: f64,
    /// `gap · M`.
    pub scaled_gap: f64,
    /// `‖ψ_M‖² / ‖φ‖²_Ω - 1`.
    pub norm_excess: f64,
}

/// Rayleigh quotient of the finite-mass form on a trial field.
pub fn rayleigh_check(trial: &TrialFunction, reference_energy: f64) -> Result<RayleighReport> {
    let form = massive_form(&trial.field, trial.mass)?;
    let norm = trial.field.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroVector);
    }
    let quotient = form.total / norm;
    let reference_squared = reference_energy * reference_energy;
    let gap = quotient - reference_squared;
    Ok(RayleighReport {
        mass: trial.mass,
        quotient,
        reference_squared,
        gap,
        scaled_gap: gap * trial.mass,
        norm_excess: norm / trial.field.norm_sqr_inside() - 1.0,
    })
}

/// Ratios of consecutive `scaled_gap` values.
pub fn consecutive_ratios(reports: &[RayleighReport]) -> Vec<f64> {
    reports.windows(2).map(|w| w[1].scaled_gap / w[0].scaled_gap).collect()
}

/// Localisation of a finite-mass field near the domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub mass: f64,
    /// `‖ψ‖²_{Ωᶜ} / ‖ψ‖²`.
    pub exterior_mass: f64,
    /// `‖P₋ψ‖²_{∂Ω} / ‖ψ‖²`.
    pub minus_trace: f64,
    pub scaled_exterior_mass: f64,
    pub scaled_minus_trace: f64,
    /// `∫_Ω |∇ψ|² / ‖ψ‖²_Ω`.
    pub gradient_ratio: f64,
}

pub fn decay_diagnostics(field: &SpinorField, mass: f64) -> Result<DecayReport> {
    let total = field.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::ZeroVector);
    }
    let curve = field.mesh().curve().clone();
    let ds = curve.spacing();
    let minus: f64 = field
        .boundary_trace()
        .iter()
        .zip(curve.samples())
        .map(|(v, p)| BoundaryProjector::at_angle(p.angle).minus_norm_sqr(v) * ds)
        .sum();
    let gradients = field.gradients();
    let mesh = field.mesh();
    let mut dirichlet = 0.0;
    if let (Some(grad), Some(p)) = (gradients.first(), mesh.patch(Patch::Interior)) {
        for row in 0..p.rows {
            for j in 0..mesh.angular() {
                let k = row * mesh.angular() + j;
                dirichlet += p.weight(row, j) * (norm_sqr(&grad.dx[k]) + norm_sqr(&grad.dy[k]));
            }
        }
    }
    let exterior_mass = field.norm_sqr_outside() / total;
    let minus_trace = minus / total;
    let inside = field.norm_sqr_inside();
    Ok(DecayReport {
        mass,
        exterior_mass,
        minus_trace,
        scaled_exterior_mass: mass * exterior_mass,
        scaled_minus_trace: mass * minus_trace,
        gradient_ratio: if inside > 0.0 { dirichlet / inside } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.0, 1.0), 1.0);
        assert_eq!(cutoff(0.5, 1.0), 1.0);
        assert_eq!(cutoff(1.0, 1.0), 0.0);
        assert_eq!(cutoff(2.0, 1.0), 0.0);
        assert!((cutoff(0.75, 1.0) - 0.5).abs() < 1e-15);
        let h = 1e-4;
        let slope = (cutoff(0.5 + h, 1.0) - cutoff(0.5, 1.0)) / h;
        assert!(slope.abs() < 1e-6);
    }
}
