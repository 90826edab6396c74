//! Two-component spinor algebra: Pauli matrices, boundary projectors, the
//! current density and the antiunitary symmetries of the Dirac operators.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// A value in `C²`.
pub type Spinor = [C64; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Complex 2×2 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Self = Self([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, c: C64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]])
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian matrix in increasing order.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let m = &self.0;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let half_gap = (0.25 * (m[0][0].re - m[1][1].re).powi(2) + m[0][1].norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-ONE)
    }
}

pub fn sigma1() -> Mat2 {
    Mat2([[ZERO, ONE], [ONE, ZERO]])
}

pub fn sigma2() -> Mat2 {
    Mat2([[ZERO, -I], [I, ZERO]])
}

/// `σ₃ = i σ₂ σ₁ = diag(1, -1)`.
pub fn sigma3() -> Mat2 {
    (sigma2() * sigma1()).scale(I)
}

/// Boundary phase `a(s) = i e^{iα(s)}`.
pub fn boundary_phase(angle: f64) -> C64 {
    I * C64::from_polar(1.0, angle)
}

/// The boundary reflection `A = [[0, ā], [a, 0]]` and its spectral projectors
/// `P± = (1 ± A)/2` at one boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryProjector {
    pub phase: C64,
    pub reflection: Mat2,
    pub plus: Mat2,
    pub minus: Mat2,
}

impl BoundaryProjector {
    pub fn at_angle(angle: f64) -> Self {
        let phase = boundary_phase(angle);
        let reflection = Mat2([[ZERO, phase.conj()], [phase, ZERO]]);
        let half = C64::new(0.5, 0.0);
        Self {
            phase,
            reflection,
            plus: (Mat2::IDENTITY + reflection).scale(half),
            minus: (Mat2::IDENTITY - reflection).scale(half),
        }
    }

    /// `v^H A v = |P₊v|² - |P₋v|²`.
    pub fn boundary_quadratic(&self, v: &Spinor) -> f64 {
        2.0 * (v[0].conj() * self.phase.conj() * v[1]).re
    }

    /// `|P₋ v|²`.
    pub fn minus_norm_sqr(&self, v: &Spinor) -> f64 {
        norm_sqr(&self.minus.apply(v))
    }

    /// The boundary spinor `(u, a u)` annihilated by `P₋`.
    pub fn trace_from_upper(&self, upper: C64) -> Spinor {
        [upper, self.phase * upper]
    }
}

/// `|P₊v|² - |P₋v|²` written through the imaginary part,
/// `2 Im(conj(v₁) v₂ e^{-iα}) = -2 Im(conj(v₂) v₁ e^{iα})`.
pub fn boundary_quadratic_via_imaginary_part(v: &Spinor, angle: f64) -> f64 {
    -2.0 * (v[1].conj() * v[0] * C64::from_polar(1.0, angle)).im
}

/// Relative size of `P₋ v`, zero exactly when `v` satisfies the boundary condition.
pub fn boundary_defect(v: &Spinor, angle: f64) -> f64 {
    let total = norm_sqr(v);
    if total == 0.0 {
        return 0.0;
    }
    (BoundaryProjector::at_angle(angle).minus_norm_sqr(v) / total).sqrt()
}

pub fn norm_sqr(v: &Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Current density `J = ((v, σ₁ v), (v, σ₂ v))`.
pub fn current_density(v: &Spinor) -> [f64; 2] {
    let w = v[0].conj() * v[1];
    [2.0 * w.re, 2.0 * w.im]
}

/// Which Dirac operator a symmetry is requested for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// The infinite-mass operator on the domain.
    Infinity,
    /// The finite-mass operator on the plane.
    Massive,
}

/// Charge conjugation `σ₁ C`, which anticommutes with both operators.
///
/// The same map serves both tags: it anticommutes with the kinetic part and with
/// the `σ₃` mass term, and it preserves the infinite-mass boundary condition.
pub fn charge_conjugate(v: &Spinor, _kind: OperatorKind) -> Spinor {
    [v[1].conj(), v[0].conj()]
}

/// `σ₂ C`, which commutes with the kinetic part and flips the sign of the mass term.
pub fn mass_reversal(v: &Spinor) -> Spinor {
    [-I * v[1].conj(), I * v[0].conj()]
}

/// Rejects a spinor with a non-finite or all-zero entry set.
pub fn require_nonzero(v: &Spinor) -> Result<()> {
    if norm_sqr(v) == 0.0 || !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::ZeroVector);
    }
    Ok(())
}
