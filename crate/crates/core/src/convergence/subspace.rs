//! Distance between eigenspaces of the infinite-mass and finite-mass problems.

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::spinor::C64;
use faer::{Mat, Side};

fn gram<F>(rows: usize, cols: usize, entry: F) -> Result<Mat<C64>>
where
    F: Fn(usize, usize) -> Result<C64>,
{
    let mut g = Mat::<C64>::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            g[(i, j)] = entry(i, j)?;
        }
    }
    Ok(g)
}

fn inverse_sqrt(g: &Mat<C64>) -> Result<Mat<C64>> {
    let evd = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("frame Gram matrix: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|v| v.re).collect();
    let top = values.iter().cloned().fold(0.0, f64::max);
    if values.iter().any(|&v| !(v > 1e-12 * top)) {
        return Err(Error::ZeroVector);
    }
    let u = evd.U();
    let scaled = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] / values[j].sqrt());
    Ok(&scaled * u.adjoint())
}

/// Largest principal-angle sine between `span(reference)` extended by zero
/// outside the domain and `span(candidates)`.
///
/// Both frames are orthonormalised in `L²`: the reference over the domain,
/// the candidates over their whole mesh.
pub fn projection_distance(reference: &[SpinorField], candidates: &[SpinorField]) -> Result<f64> {
    if reference.len() != candidates.len() {
        return Err(Error::Dimension(format!(
            "subspaces of dimension {} and {} cannot be compared",
            reference.len(),
            candidates.len()
        )));
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let d = reference.len();
    let g_ref = gram(d, d, |i, j| reference[i].inner_inside(&reference[j]))?;
    let g_cand = gram(d, d, |i, j| candidates[i].inner(&candidates[j]))?;
    let cross = gram(d, d, |i, j| reference[i].inner_inside(&candidates[j]))?;
    let overlap = &(&inverse_sqrt(&g_ref)? * &cross) * &inverse_sqrt(&g_cand)?;
    let cosines = (overlap.adjoint() * &overlap)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("overlap matrix: {e:?}")))?;
    let smallest = cosines.S().column_vector().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    Ok((1.0 - smallest.clamp(0.0, 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disk;
    use crate::mesh::PolarMesh;
    use std::sync::Arc;

    #[test]
    fn identical_and_orthogonal_subspaces() {
        let mesh = Arc::new(PolarMesh::interior(Arc::new(disk(1.0, 32).unwrap()), 8).unwrap());
        let up = SpinorField::from_fn(mesh.clone(), |_, _| [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let down = SpinorField::from_fn(mesh.clone(), |_, _| [C64::new(0.0, 0.0), C64::new(0.0, 2.0)]);
        let d = projection_distance(std::slice::from_ref(&up), std::slice::from_ref(&up)).unwrap();
        assert!(d < 1e-7, "{d}");
        assert!((projection_distance(std::slice::from_ref(&up), std::slice::from_ref(&down)).unwrap() - 1.0).abs() < 1e-12);
        let mixed = SpinorField::from_fn(mesh, |_, _| [C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let swapped = projection_distance(&[up.clone(), down.clone()], &[mixed, up]).unwrap();
        assert!(swapped < 1e-7);
        assert!(projection_distance(&[down], &[]).is_err());
    }
}
