//! Signed energies from eigenvectors of the squared operator.
//!
//! The squared form only yields `|E|`. Signs are recovered by diagonalising
//! the first-order form on the span of the computed vectors together with
//! their charge conjugates, which closes the span under `E ↦ -E`.

use super::lobpcg::{gram_of, orthonormalize, small_eigen};
use super::{EigenPairs, FormSystem};
use crate::error::{Error, Result};
use crate::spinor::C64;
use faer::Mat;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedLevel {
    /// `sign(first_order) · sqrt(squared)`.
    pub energy: f64,
    /// Rayleigh quotient of the first-order form.
    pub first_order: f64,
    /// Rayleigh quotient of the squared form.
    pub squared: f64,
}

/// Signed levels on `span[V, UV]`, ascending, with their coefficient vectors.
pub fn recover_signs(system: &FormSystem, pairs: &EigenPairs) -> Result<(Vec<SignedLevel>, Mat<C64>)> {
    let n = system.dof_count();
    let k = pairs.vectors.ncols();
    let mut block = Mat::<C64>::zeros(n, 2 * k);
    for col in 0..k {
        let v: Vec<C64> = pairs.vectors.col(col).iter().copied().collect();
        let u = system.conjugate_coefficients(&v)?;
        for i in 0..n {
            block[(i, col)] = v[i];
            block[(i, k + col)] = u[i];
        }
    }
    let b_block = system.gram.mul_mat(block.as_ref());
    for col in 0..k {
        let norm: f64 = block.col(col).iter().zip(b_block.col(col).iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if !(norm > 0.0) {
            return Err(Error::ZeroVector);
        }
    }
    let (w, _) = orthonormalize(block, b_block)?;
    let dw = gram_of(w.as_ref(), system.first_order.mul_mat(w.as_ref()).as_ref());
    let fw = gram_of(w.as_ref(), system.form.mul_mat(w.as_ref()).as_ref());
    let (first, y) = small_eigen(&dw)?;
    let mut levels: Vec<(SignedLevel, usize)> = first
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            let col = y.col(j);
            let fy = &fw * col;
            let squared: f64 = col.iter().zip(fy.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            let magnitude = squared.max(0.0).sqrt();
            (SignedLevel { energy: magnitude.copysign(e), first_order: e, squared }, j)
        })
        .collect();
    levels.sort_by(|a, b| a.0.energy.total_cmp(&b.0.energy));
    let order: Vec<usize> = levels.iter().map(|l| l.1).collect();
    let ordered = Mat::from_fn(y.nrows(), order.len(), |i, c| y[(i, order[c])]);
    let vectors = &w * &ordered;
    Ok((levels.into_iter().map(|l| l.0).collect(), vectors))
}
