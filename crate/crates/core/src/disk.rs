//! Exact spectra on a disk from angular-momentum separation.
//!
//! In the sector `m`, eigenfunctions inside the disk are multiples of
//! `(J_m(Er) e^{imθ}, i J_{m+1}(Er) e^{i(m+1)θ})`. The infinite-mass boundary
//! condition turns into `J_m(ER) = J_{m+1}(ER)`. For a finite mass `M` the
//! exterior solution is built from `K_m(κr)`, `K_{m+1}(κr)` with `κ = sqrt(M² - E²)`
//! and continuity at `r = R` gives
//! `J_m(ER) · κ/(M+E) · K_{m+1}(κR)/K_m(κR) = J_{m+1}(ER)`.
//!
//! Negative energies are roots of the same equations at negative `E`. They
//! mirror the positive ones through `m ↔ -m-1`.

use crate::bessel::{bessel_j, bessel_j_zeros, bessel_k_ratio, bessel_k_scaled};
use crate::error::{invalid, Error, Result};
use crate::field::SpinorField;
use crate::geometry::CurveShape;
use crate::mesh::PolarMesh;
use crate::roots::refine_bracket;
use crate::spinor::C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Secular equation of one angular-momentum sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularProblem {
    pub sector: i32,
    pub radius: f64,
    /// `None` for the infinite-mass problem.
    pub mass: Option<f64>,
}

/// One eigenvalue of the disk problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRoot {
    pub sector: i32,
    /// 1-based position among the roots of this sector with the same sign, by `|E|`.
    pub index: usize,
    pub energy: f64,
    pub residual: f64,
}

/// Relative spacing below which scan points are treated as coincident.
const SCAN_SUBDIVISIONS: usize = 8;

impl SecularProblem {
    pub fn infinite(sector: i32, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", "must be positive and finite"));
        }
        Ok(Self { sector, radius, mass: None })
    }

    pub fn massive(sector: i32, radius: f64, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", "must be positive and finite"));
        }
        Ok(Self { mass: Some(mass), ..Self::infinite(sector, radius)? })
    }

    /// Residual of the secular equation at signed energy `energy`.
    ///
    /// The finite-mass residual is normalised by `K_m(κR)`, so both residuals
    /// are `O(1)` away from their roots.
    pub fn residual(&self, energy: f64) -> Result<f64> {
        let m = self.sector;
        let x = energy * self.radius;
        let jm = bessel_j(m, x);
        let jm1 = bessel_j(m + 1, x);
        match self.mass {
            None => Ok(jm - jm1),
            Some(mass) => {
                if energy.abs() >= mass {
                    return Err(invalid("energy", format!("|E| = {} must be below the mass {mass}", energy.abs())));
                }
                let kappa = ((mass - energy) * (mass + energy)).sqrt();
                Ok(jm * kappa / (mass + energy) * k_ratio(m, kappa * self.radius) - jm1)
            }
        }
    }

    /// All roots with energy in the open interval `(lo, hi)`, in increasing order.
    pub fn roots(&self, lo: f64, hi: f64) -> Result<Vec<OracleRoot>> {
        if !(lo < hi) {
            return Err(invalid("window", "lower end must be below upper end"));
        }
        let (lo, hi) = match self.mass {
            Some(mass) => (lo.max(-mass * (1.0 - 1e-12)), hi.min(mass * (1.0 - 1e-12))),
            None => (lo, hi),
        };
        let reach = lo.abs().max(hi.abs()) * self.radius;
        let mut marks: Vec<f64> = Vec::new();
        for order in [self.sector.unsigned_abs(), (self.sector + 1).unsigned_abs()] {
            if reach > 0.0 {
                marks.extend(bessel_j_zeros(order as usize, reach)?);
            }
        }
        marks.push(reach);
        marks.sort_by(f64::total_cmp);
        marks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs().max(1.0));

        // Positive scan points in units of energy, refined between Bessel zeros.
        let eps = 1e-7 / self.radius;
        let mut positive = vec![eps];
        let mut prev = 0.0;
        for &mark in &marks {
            for k in 1..=SCAN_SUBDIVISIONS {
                let x = prev + (mark - prev) * k as f64 / SCAN_SUBDIVISIONS as f64;
                positive.push(x / self.radius);
            }
            prev = mark;
        }
        let mut points: Vec<f64> = positive.iter().map(|e| -e).chain(positive.iter().copied()).collect();
        points.push(lo);
        points.push(hi);
        points.retain(|e| *e >= lo && *e <= hi);
        points.sort_by(f64::total_cmp);
        points.dedup();

        let mut energies = Vec::new();
        let mut values = Vec::with_capacity(points.len());
        for &e in &points {
            values.push(self.residual(e)?);
        }
        for w in 0..points.len().saturating_sub(1) {
            let (a, b) = (points[w], points[w + 1]);
            if a < 0.0 && b > 0.0 {
                continue;
            }
            let (fa, fb) = (values[w], values[w + 1]);
            if fa == 0.0 && a > lo {
                energies.push(a);
            } else if fa * fb < 0.0 {
                let root = refine_bracket(|e| self.residual(e).unwrap_or(f64::NAN), a, b);
                if root > lo && root < hi {
                    energies.push(root);
                }
            }
        }
        let mut out = Vec::with_capacity(energies.len());
        for e in energies {
            out.push(OracleRoot { sector: self.sector, index: 0, energy: e, residual: self.residual(e)? });
        }
        let mut neg = 0;
        for r in out.iter_mut().filter(|r| r.energy < 0.0).rev() {
            neg += 1;
            r.index = neg;
        }
        let mut pos = 0;
        for r in out.iter_mut().filter(|r| r.energy > 0.0) {
            pos += 1;
            r.index = pos;
        }
        Ok(out)
    }
}

/// `K_{|m+1|}(z) / K_{|m|}(z)` for any integer `m`.
fn k_ratio(m: i32, z: f64) -> f64 {
    if m >= 0 {
        bessel_k_ratio(m as usize, z)
    } else {
        1.0 / bessel_k_ratio((-m - 1) as usize, z)
    }
}

/// Every disk eigenvalue in `(lo, hi)` across all sectors, sorted by energy.
///
/// Sectors are scanned outward in mirror pairs `m`, `-m-1` until no sector can
/// contribute: roots in sector `m` exceed `|m| / R`.
pub fn oracle_spectrum(radius: f64, mass: Option<f64>, lo: f64, hi: f64) -> Result<Vec<OracleRoot>> {
    let reach = lo.abs().max(hi.abs()) * radius;
    let mut all = Vec::new();
    let mut k: i32 = 0;
    loop {
        let mut found = false;
        for sector in [k, -k - 1] {
            let problem = match mass {
                None => SecularProblem::infinite(sector, radius)?,
                Some(m) => SecularProblem::massive(sector, radius, m)?,
            };
            let roots = problem.roots(lo, hi)?;
            found |= !roots.is_empty();
            all.extend(roots);
        }
        if !found && k as f64 > reach + 2.0 {
            break;
        }
        k += 1;
    }
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.sector.cmp(&b.sector)));
    Ok(all)
}

/// Eigenvalues of one sign with multiplicity, sorted by `|E|`: the first `count`
/// values of the union over sectors.
pub fn lowest_magnitudes(radius: f64, mass: Option<f64>, count: usize) -> Result<Vec<f64>> {
    let mut window = 2.0 / radius;
    loop {
        let roots = oracle_spectrum(radius, mass, 1e-9, window)?;
        if roots.len() > count || mass.is_some_and(|m| window >= m) {
            let mut e: Vec<f64> = roots.iter().map(|r| r.energy).collect();
            e.truncate(count);
            if e.len() < count {
                return Err(Error::Bracketing(format!("only {} eigenvalues below the mass", e.len())));
            }
            return Ok(e);
        }
        window *= 1.5;
        if let Some(m) = mass {
            window = window.min(m);
        }
    }
}

/// Materialises the eigenfunction of `problem` at the root `energy` on a disk mesh,
/// normalised to unit `L²` norm over the mesh.
pub fn radial_eigenfunction(problem: &SecularProblem, energy: f64, mesh: Arc<PolarMesh>) -> Result<SpinorField> {
    let residual = problem.residual(energy)?;
    if residual.abs() > 1e-10 {
        return Err(invalid("energy", format!("not a root: residual {residual:.3e}")));
    }
    match mesh.curve().shape() {
        CurveShape::Disk { radius } if (radius - problem.radius).abs() <= 1e-14 * radius => {}
        _ => return Err(Error::MeshMismatch(format!("mesh is not the disk of radius {}", problem.radius))),
    }
    let m = problem.sector;
    let big_r = problem.radius;
    let i = C64::new(0.0, 1.0);
    let at_boundary = (bessel_j(m, energy * big_r), bessel_j(m + 1, energy * big_r));
    let kappa = problem.mass.map(|mass| ((mass - energy) * (mass + energy)).sqrt());
    let (um, um1) = (m.unsigned_abs() as usize, (m + 1).unsigned_abs() as usize);
    let k_edge = kappa.map(|k| (bessel_k_scaled(um, k * big_r), bessel_k_scaled(um1, k * big_r)));
    let mesh_ref = mesh.clone();
    let mut field = SpinorField::from_nodes(mesh, |node| {
        let [x, y] = mesh_ref.position(node);
        let r = x.hypot(y);
        let theta = y.atan2(x);
        let phase = |k: i32| C64::from_polar(1.0, k as f64 * theta);
        let ring = mesh_ref.ring_of(node);
        if ring <= mesh_ref.interior_rings() {
            let (a, b) = (bessel_j(m, energy * r), bessel_j(m + 1, energy * r));
            [phase(m) * a, i * phase(m + 1) * b]
        } else {
            match (kappa, k_edge) {
                (Some(k), Some((km_edge, km1_edge))) => {
                    let decay = (-k * (r - big_r)).exp();
                    let a = at_boundary.0 * bessel_k_scaled(um, k * r) / km_edge * decay;
                    let b = at_boundary.1 * bessel_k_scaled(um1, k * r) / km1_edge * decay;
                    [phase(m) * a, i * phase(m + 1) * b]
                }
                _ => [C64::new(0.0, 0.0); 2],
            }
        }
    });
    field.normalize()?;
    Ok(field)
}
