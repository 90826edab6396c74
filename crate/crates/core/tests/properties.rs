mod common;

use common::{boundary_field, curve, star_shape, FieldCoefficients};
use infmass::convergence::{cutoff, group_levels, variational_check, VariationalProblem};
use infmass::disk::SecularProblem;
use infmass::forms::{dirac_norm_sqr, infinity_form, massive_form};
use infmass::geometry::{disk, CurveShape};
use infmass::mesh::{ExteriorLayer, PolarMesh};
use infmass::spinor::{
    boundary_quadratic_via_imaginary_part, charge_conjugate, current_density, mass_reversal, norm_sqr, sigma3,
    BoundaryProjector, Mat2, OperatorKind, Spinor, C64,
};
use proptest::prelude::*;
use std::sync::Arc;

fn spinor() -> impl Strategy<Value = Spinor> {
    prop::array::uniform4(-5.0f64..5.0).prop_map(|v| [C64::new(v[0], v[1]), C64::new(v[2], v[3])])
}

fn angle() -> impl Strategy<Value = f64> {
    -20.0f64..20.0
}

proptest! {
    #[test]
    fn projectors_are_complementary_idempotents(alpha in angle()) {
        let p = BoundaryProjector::at_angle(alpha);
        prop_assert!((p.plus * p.plus).max_abs_diff(&p.plus) < 1e-14);
        prop_assert!((p.minus * p.minus).max_abs_diff(&p.minus) < 1e-14);
        prop_assert!((p.plus + p.minus).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        prop_assert!((p.plus * p.minus).max_abs_diff(&Mat2::ZERO) < 1e-14);
        let [lo, hi] = p.reflection.hermitian_eigenvalues();
        prop_assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_traces_carry_no_normal_current(alpha in angle(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let p = BoundaryProjector::at_angle(alpha);
        let v = p.trace_from_upper(C64::new(re, im));
        let j = current_density(&v);
        let flux = j[0] * alpha.cos() + j[1] * alpha.sin();
        prop_assert!(flux.abs() < 1e-12 * norm_sqr(&v).max(1.0));
        prop_assert!(p.minus_norm_sqr(&v) < 1e-24 * norm_sqr(&v).max(1.0));
    }

    #[test]
    fn signed_boundary_term_has_two_expressions(v in spinor(), alpha in angle()) {
        let p = BoundaryProjector::at_angle(alpha);
        let a = p.boundary_quadratic(&v);
        let b = boundary_quadratic_via_imaginary_part(&v, alpha);
        prop_assert!((a - b).abs() < 1e-12 * norm_sqr(&v).max(1.0));
    }

    #[test]
    fn charge_conjugation_preserves_the_boundary_condition(alpha in angle(), re in -5.0f64..5.0, im in -5.0f64..5.0) {
        let p = BoundaryProjector::at_angle(alpha);
        let v = p.trace_from_upper(C64::new(re, im));
        let u = charge_conjugate(&v, OperatorKind::Infinity);
        prop_assert!(p.minus_norm_sqr(&u) < 1e-24 * norm_sqr(&u).max(1.0));
        prop_assert!((norm_sqr(&u) - norm_sqr(&v)).abs() < 1e-12 * norm_sqr(&v).max(1.0));
    }

    #[test]
    fn conjugations_square_to_plus_or_minus_one(v in spinor()) {
        for kind in [OperatorKind::Infinity, OperatorKind::Massive] {
            let back = charge_conjugate(&charge_conjugate(&v, kind), kind);
            prop_assert!((back[0] - v[0]).norm() + (back[1] - v[1]).norm() < 1e-14);
        }
        // (σ₂C)² = -1.
        let mr = mass_reversal(&mass_reversal(&v));
        prop_assert!((mr[0] + v[0]).norm() + (mr[1] + v[1]).norm() < 1e-14);
    }

    #[test]
    fn charge_conjugation_flips_the_mass_term(v in spinor()) {
        // ⟨Uv, σ₃ Uv⟩ = -⟨v, σ₃ v⟩ for U = σ₁C.
        let u = charge_conjugate(&v, OperatorKind::Massive);
        let s = sigma3();
        let q = |w: &Spinor| {
            let sw = s.apply(w);
            (w[0].conj() * sw[0] + w[1].conj() * sw[1]).re
        };
        prop_assert!((q(&u) + q(&v)).abs() < 1e-12 * norm_sqr(&v).max(1.0));
    }

    #[test]
    fn curve_evaluation_is_periodic(s in -10.0f64..10.0) {
        let c = curve(&star_shape(), 128);
        let a = c.eval(s);
        let b = c.eval(s + c.length());
        prop_assert!((a.position[0] - b.position[0]).abs() < 1e-12);
        prop_assert!((a.position[1] - b.position[1]).abs() < 1e-12);
        prop_assert!((b.angle - a.angle - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn tube_projection_round_trips(s in 0.0f64..6.0, fraction in -0.9f64..0.9) {
        let c = curve(&star_shape(), 128);
        let s = s % c.length();
        let offset = fraction * c.tube_half_width();
        let x = c.tube_map(offset, s).unwrap();
        let (r, t) = c.project(x).unwrap();
        prop_assert!((r - offset).abs() < 1e-9);
        let ds = (t - s).rem_euclid(c.length());
        prop_assert!(ds.min(c.length() - ds) < 1e-9);
    }

    #[test]
    fn cutoff_stays_in_unit_interval_and_decreases(r in 0.0f64..2.0, dr in 0.0f64..0.5, width in 0.1f64..2.0) {
        let a = cutoff(r, width);
        let b = cutoff(r + dr, width);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn level_groups_partition_the_list(mut values in prop::collection::vec(-10.0f64..10.0, 0..20)) {
        values.sort_by(f64::total_cmp);
        let groups = group_levels(&values);
        let covered: usize = groups.iter().map(|g| g.len()).sum();
        prop_assert_eq!(covered, values.len());
        for w in groups.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
    }

    #[test]
    fn secular_roots_have_small_residuals(sector in -4i32..4, mass in prop::option::of(20.0f64..200.0)) {
        let problem = match mass {
            None => SecularProblem::infinite(sector, 1.0).unwrap(),
            Some(m) => SecularProblem::massive(sector, 1.0, m).unwrap(),
        };
        for root in problem.roots(-6.0, 6.0).unwrap() {
            prop_assert!(root.residual.abs() < 1e-10);
            prop_assert!(root.energy.abs() > 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variational_minimum_respects_the_bound(k in 5.0f64..60.0, beta in -0.9f64..0.9, delta in 0.1f64..0.27) {
        let problem = VariationalProblem::new(k, beta, delta, 2000).unwrap();
        let report = variational_check(problem);
        let tol = (1e-2f64).max(5.0 * (-k * delta).exp());
        prop_assert!(report.minimum >= report.bound - tol, "{report:?}");
    }

    #[test]
    fn forms_are_gauge_invariant(seed in 0u64..1000, phase in 0.0f64..6.3) {
        let coefficients = FieldCoefficients::seeded(1, seed)[0];
        let mass = 8.0;
        let layer = ExteriorLayer::for_mass(mass, 0.0, 25.0, 8).unwrap();
        let mesh = Arc::new(PolarMesh::with_exterior(Arc::new(disk(1.0, 32).unwrap()), 8, layer).unwrap());
        let field = boundary_field(mesh, coefficients, mass);
        let mut rotated = field.clone();
        rotated.scale(C64::from_polar(1.0, phase));
        let a = massive_form(&field, mass).unwrap();
        let b = massive_form(&rotated, mass).unwrap();
        prop_assert!((a.total - b.total).abs() < 1e-12 * a.total.abs());
        let c = infinity_form(&field, 1e-10).unwrap();
        let d = infinity_form(&rotated, 1e-10).unwrap();
        prop_assert!((c.total - d.total).abs() < 1e-12 * c.total.abs());
        let (e, f) = (dirac_norm_sqr(&field, Some(mass)), dirac_norm_sqr(&rotated, Some(mass)));
        prop_assert!((e - f).abs() < 1e-12 * e);
    }
}

#[test]
fn disk_and_unperturbed_star_agree() {
    let a = curve(&CurveShape::Disk { radius: 1.0 }, 64);
    let b = curve(&common::star_shape(), 64);
    assert!((a.length() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!(b.length() > a.length());
}
