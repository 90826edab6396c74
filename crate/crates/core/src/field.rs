//! Spinor fields sampled on the nodes of a [`PolarMesh`].
//!
//! Derivatives use fourth-order finite differences in the patch parameters
//! (one-sided at patch ends, periodic along the boundary direction) mapped to
//! Cartesian gradients through the exact patch metric. Integrals use the
//! composite-Simpson weights of the mesh patches, so a node on the boundary ring
//! contributes once to each patch with that patch's one-sided derivative.

use crate::error::{Error, Result};
use crate::mesh::{Patch, PatchGeometry, PolarMesh, Region};
use crate::spinor::{sigma3, Spinor, C64};
use std::io::Write;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A `C²`-valued field on the nodes of a mesh.
#[derive(Clone, Debug)]
pub struct SpinorField {
    mesh: Arc<PolarMesh>,
    values: Vec<Spinor>,
}

/// Cartesian gradients of both components on the rows of one patch.
#[derive(Clone, Debug)]
pub struct PatchGradient {
    pub patch: Patch,
    pub dx: Vec<Spinor>,
    pub dy: Vec<Spinor>,
}

impl SpinorField {
    pub fn zeros(mesh: Arc<PolarMesh>) -> Self {
        let n = mesh.node_count();
        Self { mesh, values: vec![[ZERO; 2]; n] }
    }

    /// Samples `f(position, region)` at every node.
    pub fn from_fn<F: FnMut([f64; 2], Region) -> Spinor>(mesh: Arc<PolarMesh>, mut f: F) -> Self {
        let values = (0..mesh.node_count()).map(|n| f(mesh.position(n), mesh.region(n))).collect();
        Self { mesh, values }
    }

    /// Samples `f(node)` at every node, for fields defined through mesh coordinates.
    pub fn from_nodes<F: FnMut(usize) -> Spinor>(mesh: Arc<PolarMesh>, f: F) -> Self {
        let values = (0..mesh.node_count()).map(f).collect();
        Self { mesh, values }
    }

    pub fn from_values(mesh: Arc<PolarMesh>, values: Vec<Spinor>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::Dimension(format!(
                "{} values for a mesh with {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<PolarMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Spinor] {
        &mut self.values
    }

    pub fn scale(&mut self, c: C64) {
        for v in &mut self.values {
            v[0] *= c;
            v[1] *= c;
        }
    }

    /// Values on the boundary ring, aligned with the curve samples.
    pub fn boundary_trace(&self) -> &[Spinor] {
        let ring = self.mesh.interior_rings();
        let start = self.mesh.node(ring, 0);
        &self.values[start..start + self.mesh.angular()]
    }

    /// `Σ w f(value)` over one patch.
    pub fn integrate<F: Fn(&Spinor) -> f64>(&self, patch: Patch, f: F) -> f64 {
        let Some(p) = self.mesh.patch(patch) else { return 0.0 };
        let mut acc = 0.0;
        for row in 0..p.rows {
            for j in 0..self.mesh.angular() {
                acc += p.weight(row, j) * f(&self.values[p.node(row, j)]);
            }
        }
        acc
    }

    /// `∫ |ψ|²` over the domain.
    pub fn norm_sqr_inside(&self) -> f64 {
        self.integrate(Patch::Interior, |v| v[0].norm_sqr() + v[1].norm_sqr())
    }

    /// `∫ |ψ|²` over the exterior layer.
    pub fn norm_sqr_outside(&self) -> f64 {
        self.integrate(Patch::Exterior, |v| v[0].norm_sqr() + v[1].norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr_inside() + self.norm_sqr_outside()
    }

    /// Rescales to unit `L²` norm over the whole mesh.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ZeroVector);
        }
        self.scale(C64::new(1.0 / n.sqrt(), 0.0));
        Ok(())
    }

    /// `⟨self, other⟩ = ∫ self^H other` over the whole mesh.
    pub fn inner(&self, other: &SpinorField) -> Result<C64> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) && self.mesh.node_count() != other.mesh.node_count() {
            return Err(Error::MeshMismatch("fields live on different meshes".into()));
        }
        Ok(self.inner_on_patches(other, self.mesh.patches()))
    }

    /// `∫_Ω self^H other`; the two meshes only need to share the interior patch,
    /// so a finite-mass field can be compared with an infinite-mass one.
    pub fn inner_inside(&self, other: &SpinorField) -> Result<C64> {
        if !self.mesh.same_interior(&other.mesh) {
            return Err(Error::MeshMismatch("fields have different interior discretisations".into()));
        }
        Ok(self.inner_on_patches(other, self.mesh.patch(Patch::Interior).into_iter()))
    }

    fn inner_on_patches<'a>(&self, other: &SpinorField, patches: impl Iterator<Item = &'a PatchGeometry>) -> C64 {
        let mut acc = ZERO;
        for p in patches {
            for row in 0..p.rows {
                for j in 0..self.mesh.angular() {
                    let n = p.node(row, j);
                    let (a, b) = (&self.values[n], &other.values[n]);
                    acc += (a[0].conj() * b[0] + a[1].conj() * b[1]) * p.weight(row, j);
                }
            }
        }
        acc
    }

    /// Cartesian gradients on each patch.
    pub fn gradients(&self) -> Vec<PatchGradient> {
        self.mesh.patches().map(|p| self.patch_gradient(p)).collect()
    }

    fn patch_gradient(&self, p: &PatchGeometry) -> PatchGradient {
        let n_ang = self.mesh.angular();
        let ds = self.mesh.curve().spacing();
        let size = p.rows * n_ang;
        let mut dq = vec![[ZERO; 2]; size];
        let mut column = vec![[ZERO; 2]; p.rows];
        let mut deriv = vec![[ZERO; 2]; p.rows];
        for j in 0..n_ang {
            for (row, c) in column.iter_mut().enumerate() {
                *c = self.values[p.node(row, j)];
            }
            differentiate_column(&column, p.step, &mut deriv);
            for row in 0..p.rows {
                dq[row * n_ang + j] = deriv[row];
            }
        }
        let mut dx = vec![[ZERO; 2]; size];
        let mut dy = vec![[ZERO; 2]; size];
        let first = if p.has_center() { 1 } else { 0 };
        for row in first..p.rows {
            for j in 0..n_ang {
                let at = |k: isize| self.values[p.node(row, (j as isize + k).rem_euclid(n_ang as isize) as usize)];
                let (m2, m1, p1, p2) = (at(-2), at(-1), at(1), at(2));
                let g = p.grad_map(row, j);
                let q = dq[row * n_ang + j];
                for c in 0..2 {
                    let fs = (m2[c] - m1[c] * 8.0 + p1[c] * 8.0 - p2[c]) / (12.0 * ds);
                    dx[row * n_ang + j][c] = q[c] * g[0][0] + fs * g[0][1];
                    dy[row * n_ang + j][c] = q[c] * g[1][0] + fs * g[1][1];
                }
            }
        }
        if p.has_center() {
            // Least-squares fit of the centre gradient to the radial derivatives
            // along every ray.
            let samples = self.mesh.curve().samples();
            let mut normal = [[0.0; 2]; 2];
            let mut rhs = [[ZERO; 2]; 2];
            for (j, s) in samples.iter().enumerate() {
                let len = s.position[0].hypot(s.position[1]);
                let e = [s.position[0] / len, s.position[1] / len];
                let q = dq[j];
                for a in 0..2 {
                    for b in 0..2 {
                        normal[a][b] += e[a] * e[b];
                    }
                    for c in 0..2 {
                        rhs[a][c] += q[c] * (e[a] / len);
                    }
                }
            }
            let det = normal[0][0] * normal[1][1] - normal[0][1] * normal[1][0];
            let mut gx = [ZERO; 2];
            let mut gy = [ZERO; 2];
            for c in 0..2 {
                gx[c] = (rhs[0][c] * normal[1][1] - rhs[1][c] * normal[0][1]) / det;
                gy[c] = (rhs[1][c] * normal[0][0] - rhs[0][c] * normal[1][0]) / det;
            }
            for j in 0..n_ang {
                dx[j] = gx;
                dy[j] = gy;
            }
        }
        PatchGradient { patch: p.patch, dx, dy }
    }

    /// `(T + σ₃ M 1_{exterior}) ψ` at every node, with `T = -i σ·∇`.
    ///
    /// Boundary nodes use derivatives from inside the domain.
    pub fn apply_dirac(&self, mass: f64) -> SpinorField {
        let mut out = vec![[ZERO; 2]; self.values.len()];
        let n_ang = self.mesh.angular();
        for (grad, p) in self.gradients().iter().zip(self.mesh.patches()) {
            let first = if p.patch == Patch::Exterior { 1 } else { 0 };
            for row in first..p.rows {
                for j in 0..n_ang {
                    let k = row * n_ang + j;
                    out[p.node(row, j)] = dirac_at(&grad.dx[k], &grad.dy[k]);
                }
            }
        }
        if mass != 0.0 {
            let s3 = sigma3();
            for (n, o) in out.iter_mut().enumerate() {
                if self.mesh.region(n) == Region::Exterior {
                    let m = s3.apply(&self.values[n]);
                    o[0] += m[0] * mass;
                    o[1] += m[1] * mass;
                }
            }
        }
        SpinorField { mesh: self.mesh.clone(), values: out }
    }

    /// Writes `x,y,region,re1,im1,re2,im2` rows, one per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,region,re_upper,im_upper,re_lower,im_lower")?;
        for (n, v) in self.values.iter().enumerate() {
            let [x, y] = self.mesh.position(n);
            let region = match self.mesh.region(n) {
                Region::Inside => "inside",
                Region::Boundary => "boundary",
                Region::Exterior => "exterior",
            };
            writeln!(
                out,
                "{x:.12e},{y:.12e},{region},{:.12e},{:.12e},{:.12e},{:.12e}",
                v[0].re, v[0].im, v[1].re, v[1].im
            )?;
        }
        Ok(())
    }
}

/// `T ψ` from Cartesian derivatives: `(T ψ)₁ = -i ∂ₓψ₂ - ∂ᵧψ₂`, `(T ψ)₂ = -i ∂ₓψ₁ + ∂ᵧψ₁`.
pub(crate) fn dirac_at(dx: &Spinor, dy: &Spinor) -> Spinor {
    let i = C64::new(0.0, 1.0);
    [-i * dx[1] - dy[1], -i * dx[0] + dy[0]]
}

/// Fourth-order derivative of samples with spacing `h`; needs at least five samples.
#[allow(clippy::needless_range_loop)]
fn differentiate_column(f: &[Spinor], h: f64, out: &mut [Spinor]) {
    let n = f.len() - 1;
    let s = 1.0 / (12.0 * h);
    for c in 0..2 {
        let v = |i: usize| f[i][c];
        out[0][c] = (v(0) * -25.0 + v(1) * 48.0 - v(2) * 36.0 + v(3) * 16.0 - v(4) * 3.0) * s;
        out[1][c] = (v(0) * -3.0 - v(1) * 10.0 + v(2) * 18.0 - v(3) * 6.0 + v(4)) * s;
        for i in 2..n - 1 {
            out[i][c] = (v(i - 2) - v(i - 1) * 8.0 + v(i + 1) * 8.0 - v(i + 2)) * s;
        }
        out[n - 1][c] = (v(n) * 3.0 + v(n - 1) * 10.0 - v(n - 2) * 18.0 + v(n - 3) * 6.0 - v(n - 4)) * s;
        out[n][c] = (v(n) * 25.0 - v(n - 1) * 48.0 + v(n - 2) * 36.0 - v(n - 3) * 16.0 + v(n - 4) * 3.0) * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{disk, BoundaryCurve, CurveShape, RadialFourier};
    use crate::mesh::ExteriorLayer;

    fn star_mesh(rings: usize, samples: usize) -> Arc<PolarMesh> {
        let curve = BoundaryCurve::new(
            CurveShape::Fourier(RadialFourier { mean_radius: 1.0, cos: vec![0.0, 0.1], sin: vec![0.0, 0.0, 0.05] }),
            samples,
        )
        .unwrap();
        Arc::new(PolarMesh::interior(Arc::new(curve), rings).unwrap())
    }

    fn poly(x: [f64; 2]) -> Spinor {
        [C64::new(x[0] * x[0] * x[1], x[1]), C64::new(x[0] - 2.0 * x[1] * x[1], 0.5 * x[0] * x[1])]
    }

    fn max_gradient_error(rings: usize, samples: usize) -> f64 {
        let mesh = star_mesh(rings, samples);
        let f = SpinorField::from_fn(mesh.clone(), |x, _| poly(x));
        let grads = f.gradients();
        let p = mesh.patch(Patch::Interior).unwrap();
        let mut worst: f64 = 0.0;
        for row in 0..p.rows {
            for j in 0..mesh.angular() {
                let [x, y] = mesh.position(p.node(row, j));
                let exact_dx = [C64::new(2.0 * x * y, 0.0), C64::new(1.0, 0.5 * y)];
                let exact_dy = [C64::new(x * x, 1.0), C64::new(-4.0 * y, 0.5 * x)];
                let k = row * mesh.angular() + j;
                for c in 0..2 {
                    worst = worst.max((grads[0].dx[k][c] - exact_dx[c]).norm());
                    worst = worst.max((grads[0].dy[k][c] - exact_dy[c]).norm());
                }
            }
        }
        worst
    }

    #[test]
    fn gradients_converge_at_fourth_order() {
        let coarse = max_gradient_error(16, 64);
        let fine = max_gradient_error(32, 128);
        assert!(fine < 2e-4, "max gradient error {fine}");
        assert!(coarse / fine > 12.0, "observed ratio {}", coarse / fine);
    }

    #[test]
    fn interior_norm_integrates_constant() {
        let mesh = Arc::new(PolarMesh::interior(Arc::new(disk(1.0, 64).unwrap()), 8).unwrap());
        let f = SpinorField::from_fn(mesh, |_, _| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!((f.norm_sqr_inside() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn dirac_of_plane_wave() {
        // T e^{ik·x}(1, a) with |k| = E is an eigenfunction when a matches.
        let layer = ExteriorLayer { rings: 16, extent: 0.5, decay_rate: 1.0 };
        let mesh = Arc::new(PolarMesh::with_exterior(Arc::new(disk(1.0, 128).unwrap()), 32, layer).unwrap());
        let k = [0.6, 0.8];
        let a = C64::new(k[0], k[1]);
        let wave = |x: [f64; 2]| C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
        let f = SpinorField::from_fn(mesh, |x, _| [wave(x), wave(x) * a]);
        let t = f.apply_dirac(0.0);
        let worst = t
            .values()
            .iter()
            .zip(f.values())
            .map(|(tv, v)| (tv[0] - v[0]).norm().max((tv[1] - v[1]).norm()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn dimension_checked() {
        let mesh = star_mesh(8, 32);
        assert!(SpinorField::from_values(mesh, vec![[ZERO; 2]; 3]).is_err());
    }
}
