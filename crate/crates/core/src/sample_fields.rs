//! Smooth random fields that satisfy the infinite-mass boundary condition,
//! used to exercise the quadratic-form identities.

use crate::convergence::cutoff;
use crate::field::SpinorField;
use crate::mesh::PolarMesh;
use crate::spinor::{boundary_phase, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Coefficients of one smooth random field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldCoefficients([f64; 8]);

impl FieldCoefficients {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut c = [0.0; 8];
        for v in &mut c {
            *v = rng.random_range(-1.5..1.5);
        }
        Self(c)
    }

    /// `count` coefficient sets drawn from a ChaCha8 stream seeded with `seed`.
    pub fn seeded(count: usize, seed: u64) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::random(&mut rng)).collect()
    }

    fn upper(&self, x: [f64; 2]) -> C64 {
        let c = &self.0;
        C64::new((c[0] * x[0] + c[1] * x[1]).sin() + 1.0 + c[6] * x[0], (c[2] * x[0] * x[1]).cos() + c[7] * x[1])
    }

    fn free(&self, x: [f64; 2]) -> C64 {
        let c = &self.0;
        C64::new(c[3] * x[0] * x[0] + c[5], c[4] * x[1] + c[5] * x[0] * x[1])
    }
}

/// Smooth field obeying `φ₂ = a φ₁` on the boundary ring.
///
/// Inside, `φ₂ = χ(ρ) a(s) φ₁ + (1 - ρ²) h` with `χ` vanishing near the centre.
/// Outside (when the mesh has a layer) both components carry `e^{-decay · r}`.
pub fn boundary_field(mesh: Arc<PolarMesh>, coefficients: FieldCoefficients, decay: f64) -> SpinorField {
    let m = mesh.clone();
    let samples = mesh.curve().samples().to_vec();
    let n_in = mesh.interior_rings();
    SpinorField::from_nodes(mesh, move |node| {
        let x = m.position(node);
        let ring = m.ring_of(node);
        let a = boundary_phase(samples[m.column_of(node)].angle);
        let f = coefficients.upper(x);
        if ring <= n_in {
            let rho = ring as f64 / n_in as f64;
            let chi = 1.0 - cutoff(rho, 0.6);
            [f, a * f * chi + coefficients.free(x) * (1.0 - rho * rho)]
        } else {
            let r = m.ring_offset(ring);
            let e = (-decay * r).exp();
            [f * e, a * f * e * (1.0 + r)]
        }
    })
}
