//! Galerkin discretisation of the squared Dirac forms.
//!
//! Both components are approximated by bilinear elements on the patches of a
//! [`PolarMesh`], integrated with 3×3 Gauss rules through the exact patch maps.
//! The infinite-mass boundary condition is imposed at the boundary nodes by
//! eliminating the lower component, `φ₂ = a(s_j) φ₁`. The finite-mass problem
//! uses the full exterior layer with zero values on its outer ring.

mod lobpcg;
mod signs;
pub mod sparse;

pub use lobpcg::{lowest_eigenpairs, EigenPairs, PreconditionerKind, SolverOptions};
pub use signs::{recover_signs, SignedLevel};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::geometry::CurvePoint;
use crate::mesh::{exterior_metric, interior_metric, PolarMesh, Region};
use crate::spinor::{boundary_phase, charge_conjugate, OperatorKind, Spinor, C64};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const GAUSS3_NODES: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Maps the two components of every node to a reduced unknown and coefficient.
#[derive(Clone, Debug)]
struct DofMap {
    entries: Vec<Option<(usize, C64)>>,
    count: usize,
}

impl DofMap {
    fn get(&self, node: usize, component: usize) -> Option<(usize, C64)> {
        self.entries[2 * node + component]
    }
}

/// Assembled matrices of one operator on one mesh.
///
/// `form` discretises `‖Hψ‖²`, `gram` the `L²` inner product and
/// `first_order` the (not exactly Hermitian) form `⟨ψ, Hψ⟩`.
#[derive(Clone, Debug)]
pub struct FormSystem {
    pub kind: OperatorKind,
    pub mass: Option<f64>,
    pub form: CsrMatrix,
    pub gram: CsrMatrix,
    pub first_order: CsrMatrix,
    mesh: Arc<PolarMesh>,
    dofs: DofMap,
}

struct Builder {
    dofs: DofMap,
    form: Vec<(usize, usize, C64)>,
    gram: Vec<(usize, usize, C64)>,
    first_order: Vec<(usize, usize, C64)>,
}

impl Builder {
    fn push(target: &mut Vec<(usize, usize, C64)>, dofs: &DofMap, p: (usize, usize), q: (usize, usize), v: C64) {
        if let (Some((rp, cp)), Some((rq, cq))) = (dofs.get(p.0, p.1), dofs.get(q.0, q.1)) {
            target.push((rp, rq, cp.conj() * v * cq));
        }
    }
}

/// Local shape data at a quadrature point: values and Cartesian gradients.
struct LocalBasis {
    len: usize,
    value: [f64; 4],
    grad: [[f64; 2]; 4],
}

fn gauss_points(curve_cache: &[CurvePoint], j: usize) -> &[CurvePoint] {
    &curve_cache[3 * j..3 * j + 3]
}

fn assemble(mesh: Arc<PolarMesh>, kind: OperatorKind, mass: Option<f64>) -> Result<FormSystem> {
    let curve = mesh.curve().clone();
    let n_ang = mesh.angular();
    let n_in = mesh.interior_rings();
    let ds = curve.spacing();
    let rings = match kind {
        OperatorKind::Infinity => n_in,
        OperatorKind::Massive => {
            if mesh.exterior_rings() == 0 {
                return Err(Error::MeshMismatch("the finite-mass problem needs an exterior layer".into()));
            }
            mesh.ring_count()
        }
    };
    let samples = curve.samples();

    // Unknowns, node-major.
    let mut entries = vec![None; 2 * mesh.node_count()];
    let mut count = 0;
    for node in 0..mesh.node_count() {
        let ring = mesh.ring_of(node);
        let constrained = kind == OperatorKind::Infinity && ring == n_in;
        let active = ring < rings || (kind == OperatorKind::Infinity && ring == n_in);
        if !active {
            continue;
        }
        entries[2 * node] = Some((count, C64::new(1.0, 0.0)));
        if constrained {
            let phase = boundary_phase(samples[mesh.column_of(node)].angle);
            entries[2 * node + 1] = Some((count, phase));
            count += 1;
        } else {
            entries[2 * node + 1] = Some((count + 1, C64::new(1.0, 0.0)));
            count += 2;
        }
    }
    let dofs = DofMap { entries, count };

    let cache: Vec<CurvePoint> = (0..n_ang)
        .flat_map(|j| GAUSS3_NODES.iter().map(move |xi| (j, *xi)))
        .map(|(j, xi)| curve.eval((j as f64 + xi) * ds))
        .collect();

    let mut b = Builder { dofs, form: Vec::new(), gram: Vec::new(), first_order: Vec::new() };
    let i_unit = C64::new(0.0, 1.0);
    let mass_value = mass.unwrap_or(0.0);

    for ring in 1..=rings {
        let exterior = ring > n_in;
        let (q0, dq) = if exterior {
            let n_out = mesh.exterior_rings();
            ((ring - n_in - 1) as f64 / n_out as f64, 1.0 / n_out as f64)
        } else {
            ((ring - 1) as f64 / n_in as f64, 1.0 / n_in as f64)
        };
        let grading = mesh.grading().copied();
        for j in 0..n_ang {
            let inner = |jj: usize| if ring == 1 { 0 } else { mesh.node(ring - 1, jj) };
            let corners = [inner(j), inner(j + 1), mesh.node(ring, j), mesh.node(ring, j + 1)];
            let mut k_loc = [[0.0f64; 4]; 4];
            let mut m_loc = [[0.0f64; 4]; 4];
            let mut dx_loc = [[0.0f64; 4]; 4];
            let mut dy_loc = [[0.0f64; 4]; 4];
            let mut len = 4;
            let gps = gauss_points(&cache, j);
            for (a_idx, eta) in GAUSS3_NODES.iter().enumerate() {
                let q = q0 + eta * dq;
                for (b_idx, xi) in GAUSS3_NODES.iter().enumerate() {
                    let p = &gps[b_idx];
                    let (jac, g) = if exterior {
                        let (r, dr) = grading.expect("exterior rings need a grading").offset(q);
                        exterior_metric(r, dr, p)
                    } else {
                        interior_metric(q, p)
                    };
                    let w = GAUSS3_WEIGHTS[a_idx] * GAUSS3_WEIGHTS[b_idx] * dq * ds * jac;
                    let basis = local_basis(ring == 1, *xi, *eta, dq, ds, &g);
                    len = basis.len;
                    for x in 0..basis.len {
                        for y in 0..basis.len {
                            let gx = basis.grad[x];
                            let gy = basis.grad[y];
                            k_loc[x][y] += w * (gx[0] * gy[0] + gx[1] * gy[1]);
                            m_loc[x][y] += w * basis.value[x] * basis.value[y];
                            dx_loc[x][y] += w * basis.value[x] * gy[0];
                            dy_loc[x][y] += w * basis.value[x] * gy[1];
                        }
                    }
                }
            }
            let nodes = merged_nodes(corners, ring == 1);
            for x in 0..len {
                for y in 0..len {
                    let (nx, ny) = (nodes[x], nodes[y]);
                    let kval = C64::new(k_loc[x][y], 0.0);
                    let mval = C64::new(m_loc[x][y], 0.0);
                    let ext = if exterior { mass_value } else { 0.0 };
                    for c in 0..2 {
                        Builder::push(&mut b.form, &b.dofs, (nx, c), (ny, c), kval + mval * (ext * ext));
                        Builder::push(&mut b.gram, &b.dofs, (nx, c), (ny, c), mval);
                    }
                    let upper = -i_unit * dx_loc[x][y] - dy_loc[x][y];
                    let lower = -i_unit * dx_loc[x][y] + dy_loc[x][y];
                    Builder::push(&mut b.first_order, &b.dofs, (nx, 0), (ny, 1), upper);
                    Builder::push(&mut b.first_order, &b.dofs, (nx, 1), (ny, 0), lower);
                    if exterior {
                        Builder::push(&mut b.first_order, &b.dofs, (nx, 0), (ny, 0), mval * ext);
                        Builder::push(&mut b.first_order, &b.dofs, (nx, 1), (ny, 1), -mval * ext);
                    }
                }
            }
        }
    }

    // Boundary line integrals on the ring ρ = 1.
    for j in 0..n_ang {
        let nodes = [mesh.node(n_in, j), mesh.node(n_in, j + 1)];
        let gps = gauss_points(&cache, j);
        for (g_idx, xi) in GAUSS3_NODES.iter().enumerate() {
            let p = &gps[g_idx];
            let w = GAUSS3_WEIGHTS[g_idx] * ds;
            let hats = [1.0 - xi, *xi];
            for x in 0..2 {
                for y in 0..2 {
                    let nn = w * hats[x] * hats[y];
                    match kind {
                        OperatorKind::Infinity => {
                            let v = C64::new(0.5 * p.curvature * nn, 0.0);
                            for c in 0..2 {
                                Builder::push(&mut b.form, &b.dofs, (nodes[x], c), (nodes[y], c), v);
                            }
                        }
                        OperatorKind::Massive => {
                            let a = boundary_phase(p.angle);
                            let m = mass_value * nn;
                            Builder::push(&mut b.form, &b.dofs, (nodes[x], 0), (nodes[y], 1), -a.conj() * m);
                            Builder::push(&mut b.form, &b.dofs, (nodes[x], 1), (nodes[y], 0), -a * m);
                        }
                    }
                }
            }
        }
    }

    let n = b.dofs.count;
    Ok(FormSystem {
        kind,
        mass,
        form: CsrMatrix::from_triplets(n, b.form),
        gram: CsrMatrix::from_triplets(n, b.gram),
        first_order: CsrMatrix::from_triplets(n, b.first_order),
        mesh,
        dofs: b.dofs,
    })
}

fn merged_nodes(corners: [usize; 4], center: bool) -> [usize; 4] {
    if center {
        [corners[0], corners[2], corners[3], usize::MAX]
    } else {
        corners
    }
}

/// Bilinear shape functions on the parameter cell; at the centre the two
/// collapsed corners are merged into one function.
fn local_basis(center: bool, xi: f64, eta: f64, dq: f64, ds: f64, g: &[[f64; 2]; 2]) -> LocalBasis {
    let value = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta];
    let d_q = [-(1.0 - xi) / dq, -xi / dq, (1.0 - xi) / dq, xi / dq];
    let d_s = [-(1.0 - eta) / ds, (1.0 - eta) / ds, -eta / ds, eta / ds];
    let cart = |k: usize| [g[0][0] * d_q[k] + g[0][1] * d_s[k], g[1][0] * d_q[k] + g[1][1] * d_s[k]];
    if center {
        let merged_q = -1.0 / dq;
        LocalBasis {
            len: 3,
            value: [1.0 - eta, value[2], value[3], 0.0],
            grad: [[g[0][0] * merged_q, g[1][0] * merged_q], cart(2), cart(3), [0.0; 2]],
        }
    } else {
        LocalBasis { len: 4, value, grad: [cart(0), cart(1), cart(2), cart(3)] }
    }
}

/// Assembles the infinite-mass problem on the domain part of `mesh`.
pub fn assemble_infinity(mesh: Arc<PolarMesh>) -> Result<FormSystem> {
    assemble(mesh, OperatorKind::Infinity, None)
}

/// Assembles the finite-mass problem with mass `mass` on the whole mesh.
pub fn assemble_massive(mesh: Arc<PolarMesh>, mass: f64) -> Result<FormSystem> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(crate::error::invalid("mass", "must be positive and finite"));
    }
    assemble(mesh, OperatorKind::Massive, Some(mass))
}

impl FormSystem {
    pub fn mesh(&self) -> &Arc<PolarMesh> {
        &self.mesh
    }

    pub fn dof_count(&self) -> usize {
        self.dofs.count
    }

    /// Nodal field of a coefficient vector; unknowns outside the problem are zero.
    pub fn expand(&self, coefficients: &[C64]) -> Result<SpinorField> {
        if coefficients.len() != self.dofs.count {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} unknowns",
                coefficients.len(),
                self.dofs.count
            )));
        }
        let zero = C64::new(0.0, 0.0);
        let values = (0..self.mesh.node_count())
            .map(|node| {
                let mut v: Spinor = [zero; 2];
                for (c, slot) in v.iter_mut().enumerate() {
                    if let Some((idx, coef)) = self.dofs.get(node, c) {
                        *slot = coefficients[idx] * coef;
                    }
                }
                v
            })
            .collect();
        SpinorField::from_values(self.mesh.clone(), values)
    }

    /// Coefficients of a nodal field; at constrained nodes the upper component is used.
    pub fn restrict(&self, field: &SpinorField) -> Result<Vec<C64>> {
        if field.values().len() != self.mesh.node_count() {
            return Err(Error::MeshMismatch("field and system use different meshes".into()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dofs.count];
        for (node, v) in field.values().iter().enumerate() {
            for c in (0..2).rev() {
                if let Some((idx, coef)) = self.dofs.get(node, c) {
                    if c == 0 || coef == C64::new(1.0, 0.0) {
                        out[idx] = v[c] / coef;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Coefficients of `U ψ` for the charge conjugation `U = σ₁C`.
    pub fn conjugate_coefficients(&self, coefficients: &[C64]) -> Result<Vec<C64>> {
        let mut field = self.expand(coefficients)?;
        for v in field.values_mut() {
            *v = charge_conjugate(v, self.kind);
        }
        self.restrict(&field)
    }

    /// Region of each unknown's node, for diagnostics.
    pub fn unknown_regions(&self) -> Vec<Region> {
        let mut out = vec![Region::Inside; self.dofs.count];
        for node in 0..self.mesh.node_count() {
            for c in 0..2 {
                if let Some((idx, _)) = self.dofs.get(node, c) {
                    out[idx] = self.mesh.region(node);
                }
            }
        }
        out
    }
}

/// Where a spectrum came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DiskOracle,
    Galerkin,
}

/// Eigenvalues of one operator, with solver diagnostics when computed numerically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub provenance: Provenance,
    pub operator: OperatorKind,
    pub mass: Option<f64>,
    /// Eigenvalues of the squared operator, ascending.
    pub squared: Vec<f64>,
    /// `|E|`, ascending.
    pub magnitudes: Vec<f64>,
    /// Signed eigenvalues, ascending, when signs were recovered.
    pub signed: Option<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub unknowns: usize,
}

impl SpectrumResult {
    pub fn from_pairs(system: &FormSystem, pairs: &EigenPairs, signed: Option<&[SignedLevel]>) -> Self {
        Self {
            provenance: Provenance::Galerkin,
            operator: system.kind,
            mass: system.mass,
            squared: pairs.values.clone(),
            magnitudes: pairs.values.iter().map(|v| v.max(0.0).sqrt()).collect(),
            signed: signed.map(|levels| levels.iter().map(|l| l.energy).collect()),
            residuals: pairs.residuals.clone(),
            iterations: pairs.iterations,
            unknowns: system.dof_count(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::lowest_magnitudes;
    use crate::geometry::disk;
    use crate::mesh::ExteriorLayer;

    fn disk_mesh(angular: usize, rings: usize) -> Arc<PolarMesh> {
        Arc::new(PolarMesh::interior(Arc::new(disk(1.0, angular).unwrap()), rings).unwrap())
    }

    #[test]
    fn infinity_disk_matches_oracle() {
        let system = assemble_infinity(disk_mesh(64, 32)).unwrap();
        let pairs = lowest_eigenpairs(&system.form, &system.gram, 12, &SolverOptions::default()).unwrap();
        let oracle = lowest_magnitudes(1.0, None, 6).unwrap();
        // Every magnitude is shared by a mirror pair of sectors.
        for (v, e) in pairs.values.iter().step_by(2).zip(&oracle) {
            let rel = (v.sqrt() - e).abs() / e;
            eprintln!("{} {} {rel:e}", v.sqrt(), e);
            assert!(rel < 2e-2);
        }
    }

    #[test]
    fn signed_spectrum_is_symmetric() {
        let system = assemble_infinity(disk_mesh(32, 16)).unwrap();
        let pairs = lowest_eigenpairs(&system.form, &system.gram, 4, &SolverOptions::default()).unwrap();
        let (levels, _) = recover_signs(&system, &pairs).unwrap();
        let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        eprintln!("{energies:?}");
        for (a, b) in energies.iter().zip(energies.iter().rev()) {
            assert!((a + b).abs() < 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn massive_disk_approaches_oracle() {
        let mass = 20.0;
        let layer = ExteriorLayer::for_mass(mass, 3.0, 25.0, 32).unwrap();
        let mesh = Arc::new(PolarMesh::with_exterior(Arc::new(disk(1.0, 64).unwrap()), 32, layer).unwrap());
        let system = assemble_massive(mesh, mass).unwrap();
        let pairs = lowest_eigenpairs(&system.form, &system.gram, 8, &SolverOptions::default()).unwrap();
        let oracle = lowest_magnitudes(1.0, Some(mass), 4).unwrap();
        for (v, e) in pairs.values.iter().step_by(2).zip(&oracle) {
            let rel = (v.sqrt() - e).abs() / e;
            eprintln!("{} {} {rel:e}", v.sqrt(), e);
            assert!(rel < 2e-2);
        }
    }
}
