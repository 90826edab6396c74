//! Boundary-fitted structured meshes.
//!
//! The interior patch maps `(ρ, s) ∈ [0,1] × [0,L)` to `ρ γ(s)`, which covers a
//! domain star-shaped about the origin and places the boundary on the ring
//! `ρ = 1`. An optional exterior patch uses tubular coordinates
//! `γ(s) + r(u) n(s)` with `u ∈ [0,1]` and a logarithmic grading `r(u)` that
//! concentrates rings where a field decaying like `e^{-κ r}` varies. The
//! outermost ring carries a homogeneous Dirichlet condition in the solvers.
//!
//! Node 0 is the centre. Ring `i ≥ 1` holds the nodes `1 + (i-1) N + j`,
//! `j = 0..N`, where `N` is the number of curve samples; ring `n_in` is the
//! boundary.

use crate::error::{invalid, Result};
use crate::geometry::{BoundaryCurve, CurvePoint};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Where a node sits relative to the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Inside,
    Boundary,
    Exterior,
}

/// The two structured patches of a mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Patch {
    Interior,
    Exterior,
}

/// Graded tube-offset map `u ↦ r(u) = -ln(1 - c u) / β` with `r(1) = extent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrading {
    pub extent: f64,
    rate: f64,
    /// `e^{-β · extent}`, so that `1 - c u = (1 - u) + u · floor`.
    floor: f64,
}

impl RadialGrading {
    /// Grading adapted to fields decaying like `e^{-decay_rate · r}`.
    pub fn new(extent: f64, decay_rate: f64) -> Self {
        let rate = 2.0 * decay_rate / 3.0;
        Self { extent, rate, floor: (-rate * extent).exp() }
    }

    /// `(r(u), r'(u))`.
    pub fn offset(&self, u: f64) -> (f64, f64) {
        if self.rate * self.extent < 1e-8 {
            return (u * self.extent, self.extent);
        }
        let remaining = (1.0 - u) + u * self.floor;
        let r = if u == 1.0 { self.extent } else { -remaining.ln() / self.rate };
        let dr = (1.0 - self.floor) / (self.rate * remaining);
        (r, dr)
    }
}

/// Parameters of the exterior tube patch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorLayer {
    /// Number of radial intervals; must be even and at least 4.
    pub rings: usize,
    /// Normal distance from the boundary to the outer Dirichlet ring.
    pub extent: f64,
    /// Expected exponential decay rate of the fields outside the domain.
    pub decay_rate: f64,
}

impl ExteriorLayer {
    /// Layer for mass `mass` resolving eigenfunctions with `|E| < window`:
    /// such fields decay at least like `e^{-κ r}` with `κ = sqrt(M² - Λ²)`,
    /// and the layer extends `padding / κ`.
    pub fn for_mass(mass: f64, window: f64, padding: f64, rings: usize) -> Result<Self> {
        if !(mass > window.abs()) {
            return Err(invalid("mass", format!("mass {mass} must exceed the spectral window {window}")));
        }
        if !(padding > 0.0) {
            return Err(invalid("padding", "must be positive"));
        }
        let kappa = (mass * mass - window * window).sqrt();
        Ok(Self { rings, extent: padding / kappa, decay_rate: kappa })
    }
}

/// Quadrature weights and gradient maps of one patch, on its node rows.
#[derive(Clone, Debug)]
pub struct PatchGeometry {
    pub patch: Patch,
    /// Number of node rows (intervals + 1).
    pub rows: usize,
    /// Spacing of the radial parameter.
    pub step: f64,
    first_ring: usize,
    angular: usize,
    weights: Vec<f64>,
    grad_maps: Vec<[[f64; 2]; 2]>,
}

impl PatchGeometry {
    /// Global node index at patch row `row`, column `j`.
    pub fn node(&self, row: usize, j: usize) -> usize {
        let ring = self.first_ring + row;
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * self.angular + j
        }
    }

    /// Whether row 0 is the collapsed centre.
    pub fn has_center(&self) -> bool {
        self.first_ring == 0
    }

    /// Composite-Simpson × periodic-trapezoid weight including the area factor.
    pub fn weight(&self, row: usize, j: usize) -> f64 {
        self.weights[row * self.angular + j]
    }

    /// Matrix mapping parameter derivatives `(∂_q f, ∂_s f)` to `(∂_x f, ∂_y f)`.
    pub fn grad_map(&self, row: usize, j: usize) -> [[f64; 2]; 2] {
        self.grad_maps[row * self.angular + j]
    }
}

/// Area factor and gradient map of the interior map at `(ρ, s)`.
pub(crate) fn interior_metric(rho: f64, p: &CurvePoint) -> (f64, [[f64; 2]; 2]) {
    let [px, py] = p.position;
    let [tx, ty] = p.tangent;
    let cross = px * ty - py * tx;
    let det = rho * cross;
    if det == 0.0 {
        return (0.0, [[0.0; 2]; 2]);
    }
    (det, [[rho * ty / det, -py / det], [-rho * tx / det, px / det]])
}

/// Area factor and gradient map of the tube map at offset `r` with `r'(u) = dr`.
pub(crate) fn exterior_metric(r: f64, dr: f64, p: &CurvePoint) -> (f64, [[f64; 2]; 2]) {
    let stretch = 1.0 + r * p.curvature;
    let [nx, ny] = p.normal;
    let [tx, ty] = p.tangent;
    (dr * stretch, [[nx / dr, tx / stretch], [ny / dr, ty / stretch]])
}

fn simpson_weights(intervals: usize, step: f64) -> Vec<f64> {
    (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * step / 3.0
        })
        .collect()
}

/// Structured mesh of the domain, optionally surrounded by an exterior tube layer.
#[derive(Clone, Debug)]
pub struct PolarMesh {
    curve: Arc<BoundaryCurve>,
    interior_rings: usize,
    exterior: Option<(ExteriorLayer, RadialGrading)>,
    positions: Vec<[f64; 2]>,
    interior: PatchGeometry,
    exterior_patch: Option<PatchGeometry>,
}

impl PolarMesh {
    /// Mesh of the closed domain with `rings` radial intervals.
    pub fn interior(curve: Arc<BoundaryCurve>, rings: usize) -> Result<Self> {
        Self::build(curve, rings, None)
    }

    /// Mesh of the domain plus an exterior layer.
    pub fn with_exterior(curve: Arc<BoundaryCurve>, rings: usize, layer: ExteriorLayer) -> Result<Self> {
        Self::build(curve, rings, Some(layer))
    }

    fn build(curve: Arc<BoundaryCurve>, rings: usize, layer: Option<ExteriorLayer>) -> Result<Self> {
        if rings < 4 || !rings.is_multiple_of(2) {
            return Err(invalid("rings", "interior radial intervals must be even and at least 4"));
        }
        let exterior = match layer {
            None => None,
            Some(layer) => {
                if layer.rings < 4 || layer.rings % 2 != 0 {
                    return Err(invalid("exterior.rings", "must be even and at least 4"));
                }
                if !(layer.extent > 0.0 && layer.extent.is_finite()) {
                    return Err(invalid("exterior.extent", "must be positive and finite"));
                }
                if !(layer.decay_rate >= 0.0 && layer.decay_rate.is_finite()) {
                    return Err(invalid("exterior.decay_rate", "must be non-negative and finite"));
                }
                let concave = curve.samples().iter().map(|p| -p.curvature).fold(0.0, f64::max);
                if layer.extent * concave >= 1.0 {
                    return Err(invalid(
                        "exterior.extent",
                        format!(
                            "normal lines cross before distance {:.3e} on the concave part of the boundary",
                            1.0 / concave
                        ),
                    ));
                }
                Some((layer, RadialGrading::new(layer.extent, layer.decay_rate)))
            }
        };
        let samples = curve.samples();
        let angular = samples.len();
        let ds = curve.spacing();
        let outer_rings = exterior.map_or(0, |(l, _)| l.rings);
        let mut positions = Vec::with_capacity(1 + (rings + outer_rings) * angular);
        positions.push([0.0, 0.0]);
        for i in 1..=rings {
            let rho = i as f64 / rings as f64;
            positions.extend(samples.iter().map(|p| [rho * p.position[0], rho * p.position[1]]));
        }
        if let Some((layer, grading)) = exterior {
            for k in 1..=layer.rings {
                let (r, _) = grading.offset(k as f64 / layer.rings as f64);
                positions.extend(
                    samples
                        .iter()
                        .map(|p| [p.position[0] + r * p.normal[0], p.position[1] + r * p.normal[1]]),
                );
            }
        }

        let step = 1.0 / rings as f64;
        let qw = simpson_weights(rings, step);
        let mut weights = Vec::with_capacity((rings + 1) * angular);
        let mut grad_maps = Vec::with_capacity((rings + 1) * angular);
        for (i, w) in qw.iter().enumerate() {
            let rho = i as f64 * step;
            for p in samples {
                let (jac, g) = interior_metric(rho, p);
                weights.push(w * ds * jac);
                grad_maps.push(g);
            }
        }
        let interior = PatchGeometry {
            patch: Patch::Interior,
            rows: rings + 1,
            step,
            first_ring: 0,
            angular,
            weights,
            grad_maps,
        };

        let exterior_patch = exterior.map(|(layer, grading)| {
            let step = 1.0 / layer.rings as f64;
            let qw = simpson_weights(layer.rings, step);
            let mut weights = Vec::with_capacity((layer.rings + 1) * angular);
            let mut grad_maps = Vec::with_capacity((layer.rings + 1) * angular);
            for (k, w) in qw.iter().enumerate() {
                let (r, dr) = grading.offset(k as f64 * step);
                for p in samples {
                    let (jac, g) = exterior_metric(r, dr, p);
                    weights.push(w * ds * jac);
                    grad_maps.push(g);
                }
            }
            PatchGeometry {
                patch: Patch::Exterior,
                rows: layer.rings + 1,
                step,
                first_ring: rings,
                angular,
                weights,
                grad_maps,
            }
        });

        Ok(Self { curve, interior_rings: rings, exterior, positions, interior, exterior_patch })
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    /// Number of nodes per ring, equal to the number of curve samples.
    pub fn angular(&self) -> usize {
        self.curve.sample_count()
    }

    pub fn interior_rings(&self) -> usize {
        self.interior_rings
    }

    pub fn exterior_rings(&self) -> usize {
        self.exterior.map_or(0, |(l, _)| l.rings)
    }

    pub fn exterior_layer(&self) -> Option<&ExteriorLayer> {
        self.exterior.as_ref().map(|(l, _)| l)
    }

    pub fn grading(&self) -> Option<&RadialGrading> {
        self.exterior.as_ref().map(|(_, g)| g)
    }

    /// Rings beyond the centre.
    pub fn ring_count(&self) -> usize {
        self.interior_rings + self.exterior_rings()
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    /// Node on ring `ring ≥ 1`, column `j` (taken modulo the ring size).
    pub fn node(&self, ring: usize, j: usize) -> usize {
        debug_assert!(ring >= 1);
        1 + (ring - 1) * self.angular() + j % self.angular()
    }

    /// Ring of a node, 0 for the centre.
    pub fn ring_of(&self, node: usize) -> usize {
        if node == 0 {
            0
        } else {
            1 + (node - 1) / self.angular()
        }
    }

    pub fn column_of(&self, node: usize) -> usize {
        if node == 0 {
            0
        } else {
            (node - 1) % self.angular()
        }
    }

    pub fn position(&self, node: usize) -> [f64; 2] {
        self.positions[node]
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn region(&self, node: usize) -> Region {
        let ring = self.ring_of(node);
        match ring.cmp(&self.interior_rings) {
            std::cmp::Ordering::Less => Region::Inside,
            std::cmp::Ordering::Equal => Region::Boundary,
            std::cmp::Ordering::Greater => Region::Exterior,
        }
    }

    /// Radial parameter value of a ring: `ρ` inside, the tube offset `r` outside.
    pub fn ring_offset(&self, ring: usize) -> f64 {
        if ring <= self.interior_rings {
            ring as f64 / self.interior_rings as f64
        } else {
            let (layer, grading) = self.exterior.expect("ring beyond the boundary needs a layer");
            grading.offset((ring - self.interior_rings) as f64 / layer.rings as f64).0
        }
    }

    pub fn patch(&self, patch: Patch) -> Option<&PatchGeometry> {
        match patch {
            Patch::Interior => Some(&self.interior),
            Patch::Exterior => self.exterior_patch.as_ref(),
        }
    }

    pub fn patches(&self) -> impl Iterator<Item = &PatchGeometry> {
        std::iter::once(&self.interior).chain(self.exterior_patch.as_ref())
    }

    /// Whether two meshes share the same interior discretisation.
    pub fn same_interior(&self, other: &PolarMesh) -> bool {
        self.interior_rings == other.interior_rings
            && self.angular() == other.angular()
            && (Arc::ptr_eq(&self.curve, &other.curve)
                || (self.curve.shape() == other.curve.shape()
                    && self.curve.sample_count() == other.curve.sample_count()))
    }
}
