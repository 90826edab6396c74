mod common;

use faer::Mat;
use infmass::disk::{lowest_magnitudes, oracle_spectrum};
use infmass::galerkin::{
    assemble_infinity, assemble_massive, lowest_eigenpairs, recover_signs, CsrMatrix, EigenPairs, SolverOptions,
};
use infmass::geometry::disk;
use infmass::mesh::{ExteriorLayer, PolarMesh};
use infmass::spinor::{boundary_phase, C64};
use infmass::Error;
use std::sync::Arc;

const GROUND: f64 = 1.434_695_650_819_563;

fn disk_mesh(angular: usize, rings: usize) -> Arc<PolarMesh> {
    Arc::new(PolarMesh::interior(Arc::new(disk(1.0, angular).unwrap()), rings).unwrap())
}

fn rayleigh(matrix: &CsrMatrix, gram: &CsrMatrix, v: &[C64]) -> f64 {
    matrix.quadratic(v).re / gram.quadratic(v).re
}

#[test]
fn equal_matrices_give_unit_values() {
    let system = assemble_infinity(disk_mesh(16, 4)).unwrap();
    let pairs = lowest_eigenpairs(&system.gram, &system.gram, 3, &SolverOptions::default()).unwrap();
    for v in pairs.values {
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }
}

#[test]
fn matrices_are_hermitian_and_form_is_nonnegative() {
    let system = assemble_infinity(disk_mesh(32, 8)).unwrap();
    assert!(system.form.hermitian_defect() < 1e-12);
    assert!(system.gram.hermitian_defect() < 1e-14);
    let pairs = lowest_eigenpairs(&system.form, &system.gram, 1, &SolverOptions::default()).unwrap();
    assert!(pairs.values[0] > 0.0);
}

#[test]
fn linear_field_energy_on_the_disk() {
    // φ = (1, i z) obeys the boundary condition on the unit disk. Its form is
    // ∫|∇ z|² + ½ ∫ |φ|² ds = 2π + 2π.
    let mesh = disk_mesh(128, 32);
    let system = assemble_infinity(mesh.clone()).unwrap();
    let field = infmass::field::SpinorField::from_fn(mesh, |x, _| {
        let theta = x[1].atan2(x[0]);
        [C64::new(1.0, 0.0), boundary_phase(theta) * x[0].hypot(x[1])]
    });
    let v = system.restrict(&field).unwrap();
    let value = system.form.quadratic(&v).re;
    assert!((value / (4.0 * std::f64::consts::PI) - 1.0).abs() < 1e-3, "{value}");
}

#[test]
fn infinity_disk_spectrum_matches_the_sector_union() {
    let system = assemble_infinity(disk_mesh(128, 64)).unwrap();
    let pairs = lowest_eigenpairs(&system.form, &system.gram, 6, &SolverOptions::default()).unwrap();
    let mut oracle: Vec<f64> = oracle_spectrum(1.0, None, -4.0, 4.0).unwrap().iter().map(|r| r.energy.abs()).collect();
    oracle.sort_by(f64::total_cmp);
    for (v, e) in pairs.values.iter().zip(&oracle) {
        let rel = (v.sqrt() - e).abs() / e;
        assert!(rel < 1e-3, "{} vs {e}", v.sqrt());
    }
    assert!((pairs.values[0].sqrt() - GROUND).abs() / GROUND < 1e-3);
}

#[test]
fn refinement_approaches_the_oracle_monotonically() {
    let mut last = f64::INFINITY;
    for (angular, rings) in [(64, 32), (128, 64), (256, 128)] {
        let system = assemble_infinity(disk_mesh(angular, rings)).unwrap();
        let pairs = lowest_eigenpairs(&system.form, &system.gram, 2, &SolverOptions::default()).unwrap();
        let error = (pairs.values[0] - GROUND * GROUND).abs();
        assert!(error < last, "{rings}: {error} after {last}");
        last = error;
    }
}

#[test]
fn nested_massive_refinement_lowers_ritz_values() {
    let mass = 20.0;
    let layer = |rings| ExteriorLayer { rings, extent: 1.0, decay_rate: mass };
    let mut last = vec![f64::INFINITY; 4];
    for (angular, rings) in [(32, 8), (64, 16), (128, 32)] {
        let mesh = Arc::new(PolarMesh::with_exterior(Arc::new(disk(1.0, angular).unwrap()), rings, layer(rings)).unwrap());
        let system = assemble_massive(mesh, mass).unwrap();
        let pairs = lowest_eigenpairs(&system.form, &system.gram, 4, &SolverOptions::default()).unwrap();
        for (v, l) in pairs.values.iter().zip(&last) {
            assert!(v < l, "{rings}: {v} not below {l}");
        }
        last = pairs.values;
    }
    let oracle = lowest_magnitudes(1.0, Some(mass), 1).unwrap()[0];
    assert!(last[0].sqrt() >= oracle * (1.0 - 1e-6));
}

#[test]
fn repeated_solves_are_bit_identical() {
    let system = assemble_infinity(disk_mesh(32, 8)).unwrap();
    let options = SolverOptions { seed: 7, ..SolverOptions::default() };
    let a = lowest_eigenpairs(&system.form, &system.gram, 4, &options).unwrap();
    let b = lowest_eigenpairs(&system.form, &system.gram, 4, &options).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.residuals, b.residuals);
    assert!(a.vectors.col_iter().zip(b.vectors.col_iter()).all(|(x, y)| x.iter().eq(y.iter())));
}

#[test]
fn signs_of_the_ground_cluster() {
    let system = assemble_infinity(disk_mesh(64, 32)).unwrap();
    let pairs = lowest_eigenpairs(&system.form, &system.gram, 2, &SolverOptions::default()).unwrap();
    let (levels, vectors) = recover_signs(&system, &pairs).unwrap();
    assert_eq!(levels.len(), 2);
    assert!((levels[0].energy + GROUND).abs() < 2e-3);
    assert!((levels[1].energy - GROUND).abs() < 2e-3);

    let positive: Vec<C64> = vectors.col(1).iter().copied().collect();
    let mirrored = system.conjugate_coefficients(&positive).unwrap();
    let q_plus = rayleigh(&system.first_order, &system.gram, &positive);
    let q_minus = rayleigh(&system.first_order, &system.gram, &mirrored);
    assert!(q_plus > 1.0);
    assert!((q_plus + q_minus).abs() < 1e-10, "{q_plus} {q_minus}");
}

#[test]
fn zero_vectors_are_rejected() {
    let system = assemble_infinity(disk_mesh(16, 4)).unwrap();
    let pairs = EigenPairs {
        values: vec![1.0],
        vectors: Mat::zeros(system.dof_count(), 1),
        residuals: vec![0.0],
        iterations: 0,
    };
    assert!(matches!(recover_signs(&system, &pairs), Err(Error::ZeroVector)));
}

#[test]
fn star_domain_spectrum_is_symmetric() {
    let curve = common::curve(&common::star_shape(), 64);
    let system = assemble_infinity(Arc::new(PolarMesh::interior(curve, 16).unwrap())).unwrap();
    let pairs = lowest_eigenpairs(&system.form, &system.gram, 6, &SolverOptions::default()).unwrap();
    let (levels, _) = recover_signs(&system, &pairs).unwrap();
    let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    for (a, b) in energies.iter().zip(energies.iter().rev()) {
        assert!((a + b).abs() < 1e-8 * scale);
    }
}

#[test]
fn invalid_mass_rejected() {
    let mesh = Arc::new(
        PolarMesh::with_exterior(Arc::new(disk(1.0, 16).unwrap()), 4, ExteriorLayer { rings: 4, extent: 1.0, decay_rate: 1.0 })
            .unwrap(),
    );
    assert!(assemble_massive(mesh.clone(), 0.0).is_err());
    assert!(assemble_massive(mesh, f64::NAN).is_err());
    assert!(matches!(assemble_massive(disk_mesh(16, 4), 10.0), Err(Error::MeshMismatch(_))));
}
