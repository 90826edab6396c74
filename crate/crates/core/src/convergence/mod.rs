//! Convergence of the finite-mass spectra towards the infinite-mass ones as
//! the exterior mass grows.

mod subspace;
mod trial;
mod variational;

pub use subspace::projection_distance;
pub use trial::{
    build_trial, consecutive_ratios, cutoff, decay_diagnostics, rayleigh_check, DecayReport, RayleighReport,
    TrialFunction,
};
pub use variational::{variational_check, PenaltyCase, VariationalProblem, VariationalReport};

use crate::disk::{oracle_spectrum, radial_eigenfunction, SecularProblem};
use crate::error::{invalid, Error, Result};
use crate::field::SpinorField;
use crate::galerkin::{assemble_infinity, assemble_massive, lowest_eigenpairs, recover_signs, FormSystem, SolverOptions};
use crate::geometry::{BoundaryCurve, CurveShape};
use crate::mesh::{ExteriorLayer, PolarMesh};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::sync::Arc;

/// Relative tolerance for treating two eigenvalues as one multiplicity group.
pub const GROUP_TOLERANCE: f64 = 1e-6;

/// Where window spectra and eigenfields come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Secular equations on a disk, eigenfields sampled from Bessel functions.
    DiskOracle,
    /// Finite elements on any star-shaped domain.
    Galerkin,
}

#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub curve: Arc<BoundaryCurve>,
    /// Strictly increasing masses.
    pub masses: Vec<f64>,
    /// Half-width `Λ` of the window `(-Λ, Λ)`.
    pub window: f64,
    /// Minimum distance between `±Λ` and any infinite-mass eigenvalue.
    pub edge_margin: f64,
    pub interior_rings: usize,
    pub exterior_rings: usize,
    /// Exterior layer depth in decay lengths `1/κ`.
    pub padding: f64,
    pub source: SpectrumSource,
    pub solver: SolverOptions,
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.masses.is_empty() {
            return Err(invalid("masses", "the mass list is empty"));
        }
        if self.masses.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("masses", "must be strictly increasing"));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(invalid("window", "must be positive and finite"));
        }
        if let Some(&m) = self.masses.iter().find(|&&m| !(m > self.window)) {
            return Err(invalid("masses", format!("mass {m} does not exceed the window {}", self.window)));
        }
        if !(self.edge_margin > 0.0) {
            return Err(invalid("edge_margin", "must be positive"));
        }
        if !(self.padding >= 12.0) {
            return Err(invalid("padding", "the exterior layer must span at least 12 decay lengths"));
        }
        if self.source == SpectrumSource::DiskOracle && disk_radius(&self.curve).is_none() {
            return Err(invalid("source", "the disk oracle needs a disk domain"));
        }
        Ok(())
    }

    fn interior_mesh(&self) -> Result<Arc<PolarMesh>> {
        Ok(Arc::new(PolarMesh::interior(self.curve.clone(), self.interior_rings)?))
    }

    fn massive_mesh(&self, mass: f64) -> Result<Arc<PolarMesh>> {
        let layer = ExteriorLayer::for_mass(mass, self.window, self.padding, self.exterior_rings)?;
        Ok(Arc::new(PolarMesh::with_exterior(self.curve.clone(), self.interior_rings, layer)?))
    }
}

fn disk_radius(curve: &BoundaryCurve) -> Option<f64> {
    match curve.shape() {
        CurveShape::Disk { radius } => Some(*radius),
        CurveShape::Fourier(_) => None,
    }
}

/// Signed window eigenvalues, ascending, with one eigenfield each.
pub struct WindowSpectrum {
    pub energies: Vec<f64>,
    pub fields: Vec<SpinorField>,
}

fn oracle_window(radius: f64, mass: Option<f64>, window: f64, mesh: &Arc<PolarMesh>) -> Result<WindowSpectrum> {
    let roots = oracle_spectrum(radius, mass, -window, window)?;
    let mut energies = Vec::with_capacity(roots.len());
    let mut fields = Vec::with_capacity(roots.len());
    for root in roots {
        let problem = match mass {
            None => SecularProblem::infinite(root.sector, radius)?,
            Some(m) => SecularProblem::massive(root.sector, radius, m)?,
        };
        energies.push(root.energy);
        fields.push(radial_eigenfunction(&problem, root.energy, mesh.clone())?);
    }
    Ok(WindowSpectrum { energies, fields })
}

/// Window spectrum of an assembled system, growing the block until it reaches past `Λ`.
pub fn galerkin_window(system: &FormSystem, window: f64, solver: &SolverOptions, initial: usize) -> Result<WindowSpectrum> {
    let mut count = initial.max(2);
    loop {
        let pairs = lowest_eigenpairs(&system.form, &system.gram, count, solver)?;
        let top = pairs.values.last().copied().unwrap_or(0.0);
        if top > window * window || count >= system.dof_count() / 4 {
            let (levels, vectors) = recover_signs(system, &pairs)?;
            let mut energies = Vec::new();
            let mut fields = Vec::new();
            for (k, level) in levels.iter().enumerate() {
                if level.energy.abs() < window {
                    energies.push(level.energy);
                    let column: Vec<_> = vectors.col(k).iter().copied().collect();
                    fields.push(system.expand(&column)?);
                }
            }
            return Ok(WindowSpectrum { energies, fields });
        }
        count += count.div_ceil(2) + 2;
    }
}

/// Consecutive index ranges of eigenvalues within [`GROUP_TOLERANCE`] of each other.
pub fn group_levels(energies: &[f64]) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=energies.len() {
        let split = i == energies.len()
            || (energies[i] - energies[i - 1]).abs() > GROUP_TOLERANCE * energies[i].abs().max(1.0);
        if split {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Projection distance of one reference multiplicity group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDistance {
    pub energy: f64,
    pub dimension: usize,
    /// `None` when the finite-mass window holds a different number of levels.
    pub distance: Option<f64>,
}

/// Everything measured at one mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub mass: f64,
    pub energies: Vec<f64>,
    pub reference: Vec<f64>,
    /// `|E_M,i - E∞,i|` over the aligned prefix of both sorted lists.
    pub errors: Vec<f64>,
    pub window_count: usize,
    pub reference_count: usize,
    pub counts_match: bool,
    /// No finite-mass level lies strictly between two reference groups, away from them by the edge margin.
    pub gaps_clear: bool,
    /// Largest error over the levels of smallest `|E|`.
    pub ground_error: f64,
    pub ground_distance: Option<f64>,
    pub groups: Vec<GroupDistance>,
    /// Decay diagnostics of the ground levels, largest values over the ground group.
    pub decay: DecayReport,
}

/// Least-squares fit of `log error = slope · log M + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub masses: Vec<f64>,
    pub errors: Vec<f64>,
}

pub fn fit_rate(masses: &[f64], errors: &[f64]) -> Result<RateFit> {
    if masses.len() != errors.len() || masses.len() < 2 {
        return Err(invalid("masses", "a rate fit needs at least two points"));
    }
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(invalid("errors", "log-log fit needs positive errors"));
    }
    let xs: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(RateFit { slope, intercept: my - slope * mx, masses: masses.to_vec(), errors: errors.to_vec() })
}

/// Rate fit of the ground-level error over the upper half of the mass list.
pub fn fit_upper_half(records: &[ConvergenceRecord]) -> Result<RateFit> {
    let upper = &records[records.len() / 2..];
    let masses: Vec<f64> = upper.iter().map(|r| r.mass).collect();
    let errors: Vec<f64> = upper.iter().map(|r| r.ground_error).collect();
    fit_rate(&masses, &errors)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub source: SpectrumSource,
    pub window: f64,
    pub reference: Vec<f64>,
    pub records: Vec<ConvergenceRecord>,
    pub rate: Option<RateFit>,
}

fn ground_indices(energies: &[f64]) -> Vec<usize> {
    let smallest = energies.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    (0..energies.len())
        .filter(|&i| energies[i].abs() - smallest <= GROUP_TOLERANCE * smallest.max(1.0))
        .collect()
}

fn record(mass: f64, reference: &WindowSpectrum, massive: &WindowSpectrum, margin: f64) -> Result<ConvergenceRecord> {
    let errors: Vec<f64> =
        reference.energies.iter().zip(&massive.energies).map(|(a, b)| (a - b).abs()).collect();
    let counts_match = reference.energies.len() == massive.energies.len();
    let ref_groups = group_levels(&reference.energies);
    let groups = ref_groups
        .iter()
        .map(|g| {
            let distance = if counts_match {
                Some(projection_distance(&reference.fields[g.clone()], &massive.fields[g.clone()])?)
            } else {
                None
            };
            Ok(GroupDistance { energy: reference.energies[g.start], dimension: g.len(), distance })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps_clear = ref_groups.windows(2).all(|w| {
        let (lo, hi) = (reference.energies[w[0].start] + margin, reference.energies[w[1].start] - margin);
        !massive.energies.iter().any(|&e| e > lo && e < hi)
    });
    let ground = ground_indices(&reference.energies);
    let ground_error = ground.iter().filter_map(|&i| errors.get(i)).cloned().fold(0.0, f64::max);
    let ground_distance = if counts_match {
        ref_groups
            .iter()
            .zip(&groups)
            .filter(|(g, _)| ground.contains(&g.start))
            .filter_map(|(_, d)| d.distance)
            .reduce(f64::max)
    } else {
        None
    };
    let mut decay = DecayReport { mass, ..DecayReport::default() };
    for i in ground_indices(&massive.energies) {
        let d = decay_diagnostics(&massive.fields[i], mass)?;
        decay.exterior_mass = decay.exterior_mass.max(d.exterior_mass);
        decay.minus_trace = decay.minus_trace.max(d.minus_trace);
        decay.scaled_exterior_mass = decay.scaled_exterior_mass.max(d.scaled_exterior_mass);
        decay.scaled_minus_trace = decay.scaled_minus_trace.max(d.scaled_minus_trace);
        decay.gradient_ratio = decay.gradient_ratio.max(d.gradient_ratio);
    }
    Ok(ConvergenceRecord {
        mass,
        energies: massive.energies.clone(),
        reference: reference.energies.clone(),
        errors,
        window_count: massive.energies.len(),
        reference_count: reference.energies.len(),
        counts_match,
        gaps_clear,
        ground_error,
        ground_distance,
        groups,
        decay,
    })
}

/// Infinite-mass window spectrum on the interior mesh of the sweep.
pub fn reference_spectrum(settings: &SweepSettings) -> Result<WindowSpectrum> {
    let mesh = settings.interior_mesh()?;
    let spectrum = match settings.source {
        SpectrumSource::DiskOracle => {
            let radius = disk_radius(&settings.curve).ok_or_else(|| invalid("source", "not a disk"))?;
            oracle_window(radius, None, settings.window, &mesh)?
        }
        SpectrumSource::Galerkin => {
            let system = assemble_infinity(mesh)?;
            galerkin_window(&system, settings.window, &settings.solver, 8)?
        }
    };
    if let Some(&value) = spectrum
        .energies
        .iter()
        .find(|e| (e.abs() - settings.window).abs() < settings.edge_margin)
    {
        return Err(Error::WindowEdge { edge: settings.window, value, margin: settings.edge_margin });
    }
    Ok(spectrum)
}

fn massive_window(settings: &SweepSettings, mass: f64, expected: usize) -> Result<WindowSpectrum> {
    let mesh = settings.massive_mesh(mass)?;
    match settings.source {
        SpectrumSource::DiskOracle => {
            let radius = disk_radius(&settings.curve).ok_or_else(|| invalid("source", "not a disk"))?;
            oracle_window(radius, Some(mass), settings.window, &mesh)
        }
        SpectrumSource::Galerkin => {
            let system = assemble_massive(mesh, mass)?;
            galerkin_window(&system, settings.window, &settings.solver, expected + 4)
        }
    }
}

/// Runs the sweep; masses are processed in parallel on the current rayon pool
/// and records are returned in mass order.
pub fn sweep(settings: &SweepSettings) -> Result<SweepReport> {
    settings.validate()?;
    let reference = reference_spectrum(settings)?;
    let records = settings
        .masses
        .par_iter()
        .map(|&mass| {
            let massive = massive_window(settings, mass, reference.energies.len())?;
            record(mass, &reference, &massive, settings.edge_margin)
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = if records.len() >= 4 { fit_upper_half(&records).ok() } else { None };
    Ok(SweepReport { source: settings.source, window: settings.window, reference: reference.energies, records, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_respects_tolerance() {
        let groups = group_levels(&[-1.0, 1.0, 1.0 + 1e-9, 2.0]);
        assert_eq!(groups, vec![0..1, 1..3, 3..4]);
        assert!(group_levels(&[]).is_empty());
    }

    #[test]
    fn exact_power_law_recovers_slope() {
        let masses = [10.0, 20.0, 40.0];
        let errors: Vec<f64> = masses.iter().map(|m| 3.0 / m).collect();
        let fit = fit_rate(&masses, &errors).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }
}
