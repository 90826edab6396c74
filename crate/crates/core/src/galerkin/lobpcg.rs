//! Block LOBPCG for the lowest eigenpairs of `F x = λ B x`.

use super::sparse::CsrMatrix;
use crate::error::{invalid, Error, Result};
use crate::spinor::C64;
use faer::linalg::solvers::SolveCore;
use faer::{Conj, Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How search directions are preconditioned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreconditionerKind {
    /// Exact solves with the sparse Cholesky factor of `F + shift·B`.
    Cholesky { shift: f64 },
    /// Diagonal scaling by `diag(F + shift·B)`.
    Jacobi { shift: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative residual `‖Fx - λBx‖ / (‖Fx‖ + |λ| ‖Bx‖)` required of every wanted pair.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra block vectors carried along to speed up convergence of the last wanted pair.
    pub guard_vectors: usize,
    pub seed: u64,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 400,
            guard_vectors: 4,
            seed: 0,
            preconditioner: PreconditionerKind::Cholesky { shift: 1.0 },
        }
    }
}

/// Converged eigenpairs, ascending, with `B`-orthonormal vectors in the columns.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

enum Preconditioner {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, C64>),
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    fn build(form: &CsrMatrix, gram: &CsrMatrix, kind: PreconditionerKind) -> Result<Self> {
        match kind {
            PreconditionerKind::Cholesky { shift } => {
                let mut shift = shift;
                let mut last_error = String::new();
                for _ in 0..6 {
                    let shifted = form.add_scaled(gram, shift).to_faer();
                    match shifted.sp_cholesky(Side::Lower) {
                        Ok(factor) => return Ok(Self::Cholesky(factor)),
                        Err(e) => last_error = format!("{e:?}"),
                    }
                    shift *= 10.0;
                }
                Err(Error::Factorization(last_error))
            }
            PreconditionerKind::Jacobi { shift } => {
                let diag = form
                    .add_scaled(gram, shift)
                    .diagonal()
                    .iter()
                    .map(|d| if d.re > 0.0 { 1.0 / d.re } else { 1.0 })
                    .collect();
                Ok(Self::Jacobi(diag))
            }
        }
    }

    fn apply(&self, r: &mut Mat<C64>) {
        match self {
            Self::Cholesky(factor) => factor.solve_in_place_with_conj(Conj::No, r.as_mut()),
            Self::Jacobi(diag) => {
                for k in 0..r.ncols() {
                    for (i, d) in diag.iter().enumerate() {
                        r[(i, k)] *= *d;
                    }
                }
            }
        }
    }
}

fn mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    a * b
}

pub(super) fn gram_of(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut g = a.adjoint() * b;
    hermitianize(&mut g);
    g
}

fn hermitianize(g: &mut Mat<C64>) {
    for i in 0..g.nrows() {
        for j in 0..i {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
        g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
    }
}

/// Eigen-decomposition of a small Hermitian matrix, ascending.
pub(super) fn small_eigen(h: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("dense eigensolver: {e:?}")))?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Replaces the block `z` (with `bz = B z`) by a `B`-orthonormal basis of its
/// numerically independent part.
pub(super) fn orthonormalize(z: Mat<C64>, bz: Mat<C64>) -> Result<(Mat<C64>, Mat<C64>)> {
    let (mut z, mut bz) = (z, bz);
    for _ in 0..2 {
        if z.ncols() == 0 {
            break;
        }
        let g = gram_of(z.as_ref(), bz.as_ref());
        let scale: Vec<f64> = (0..g.nrows())
            .map(|i| if g[(i, i)].re > 0.0 { 1.0 / g[(i, i)].re.sqrt() } else { 0.0 })
            .collect();
        let scaled = Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * (scale[i] * scale[j]));
        let (mu, u) = small_eigen(&scaled)?;
        let top = mu.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..mu.len()).filter(|&j| mu[j] > 1e-11 * top && top > 0.0).collect();
        let t = Mat::from_fn(g.nrows(), keep.len(), |i, c| u[(i, keep[c])] * (scale[i] / mu[keep[c]].sqrt()));
        z = mul(z.as_ref(), t.as_ref());
        bz = mul(bz.as_ref(), t.as_ref());
    }
    Ok((z, bz))
}

fn hstack(blocks: &[&Mat<C64>]) -> Mat<C64> {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::<C64>::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        for k in 0..b.ncols() {
            out.col_mut(offset + k).copy_from(b.col(k));
        }
        offset += b.ncols();
    }
    out
}

fn columns(m: &Mat<C64>, range: std::ops::Range<usize>) -> Mat<C64> {
    m.as_ref().subcols(range.start, range.len()).to_owned()
}

fn column_norm(m: &Mat<C64>, k: usize) -> f64 {
    m.col(k).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn random_block(rows: usize, cols: usize, seed: u64) -> Mat<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat::<C64>::zeros(rows, cols);
    for k in 0..cols {
        for i in 0..rows {
            m[(i, k)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    m
}

/// Lowest `count` eigenpairs of the Hermitian pencil `(form, gram)`, with
/// `gram` positive definite.
pub fn lowest_eigenpairs(form: &CsrMatrix, gram: &CsrMatrix, count: usize, options: &SolverOptions) -> Result<EigenPairs> {
    let n = form.dim();
    if gram.dim() != n {
        return Err(Error::Dimension(format!("form is {n}×{n}, gram is {0}×{0}", gram.dim())));
    }
    if count == 0 {
        return Err(invalid("count", "must be positive"));
    }
    if !(options.tolerance > 0.0) {
        return Err(invalid("tolerance", "must be positive"));
    }
    let block = (count + options.guard_vectors).min(n / 3).max(count);
    if block > n {
        return Err(invalid("count", format!("{count} eigenpairs requested from {n} unknowns")));
    }
    let preconditioner = Preconditioner::build(form, gram, options.preconditioner)?;

    let x0 = random_block(n, block, options.seed);
    let bx0 = gram.mul_mat(x0.as_ref());
    let (mut x, mut bx) = orthonormalize(x0, bx0)?;
    if x.ncols() < block {
        return Err(Error::ZeroVector);
    }
    let mut fx = form.mul_mat(x.as_ref());
    let (mut lambda, c) = small_eigen(&gram_of(x.as_ref(), fx.as_ref()))?;
    x = mul(x.as_ref(), c.as_ref());
    bx = mul(bx.as_ref(), c.as_ref());
    fx = mul(fx.as_ref(), c.as_ref());

    let mut p: Option<(Mat<C64>, Mat<C64>, Mat<C64>)> = None;
    let mut residuals = vec![f64::INFINITY; count];
    for iteration in 0..=options.max_iterations {
        let mut r = Mat::from_fn(n, block, |i, k| fx[(i, k)] - bx[(i, k)] * lambda[k]);
        for (k, res) in residuals.iter_mut().enumerate() {
            let denom = column_norm(&fx, k) + lambda[k].abs() * column_norm(&bx, k);
            *res = if denom > 0.0 { column_norm(&r, k) / denom } else { 0.0 };
        }
        if residuals.iter().all(|&res| res < options.tolerance) {
            return Ok(EigenPairs {
                values: lambda[..count].to_vec(),
                vectors: columns(&x, 0..count),
                residuals,
                iterations: iteration,
            });
        }
        if iteration == options.max_iterations {
            break;
        }

        preconditioner.apply(&mut r);
        let mut z = match &p {
            Some((pz, _, _)) => hstack(&[&r, pz]),
            None => r,
        };
        // Two rounds of B-orthogonalisation against the current Ritz block.
        let mut bz = gram.mul_mat(z.as_ref());
        for _ in 0..2 {
            let coef = x.adjoint() * &bz;
            z -= mul(x.as_ref(), coef.as_ref());
            bz -= mul(bx.as_ref(), coef.as_ref());
        }
        let (z, bz) = orthonormalize(z, bz)?;
        let fz = form.mul_mat(z.as_ref());

        let s = hstack(&[&x, &z]);
        let bs = hstack(&[&bx, &bz]);
        let fs = hstack(&[&fx, &fz]);
        let (values, c) = small_eigen(&gram_of(s.as_ref(), fs.as_ref()))?;
        let c = columns(&c, 0..block);
        lambda = values[..block].to_vec();
        x = mul(s.as_ref(), c.as_ref());
        bx = mul(bs.as_ref(), c.as_ref());
        fx = mul(fs.as_ref(), c.as_ref());

        let cz = c.as_ref().subrows(block, z.ncols()).to_owned();
        p = Some((mul(z.as_ref(), cz.as_ref()), mul(bz.as_ref(), cz.as_ref()), mul(fz.as_ref(), cz.as_ref())));
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    Err(Error::NotConverged { iterations: options.max_iterations, residual: worst, tol: options.tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> (CsrMatrix, CsrMatrix) {
        let mut f = Vec::new();
        let mut b = Vec::new();
        for i in 0..n {
            f.push((i, i, C64::new(2.0, 0.0)));
            b.push((i, i, C64::new(1.0, 0.0)));
            if i + 1 < n {
                f.push((i, i + 1, C64::new(-1.0, 0.0)));
                f.push((i + 1, i, C64::new(-1.0, 0.0)));
            }
        }
        (CsrMatrix::from_triplets(n, f), CsrMatrix::from_triplets(n, b))
    }

    #[test]
    fn finds_lowest_laplacian_modes() {
        let n = 200;
        let (f, b) = laplacian_1d(n);
        let pairs = lowest_eigenpairs(&f, &b, 5, &SolverOptions::default()).unwrap();
        for (k, v) in pairs.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-10 * exact.max(1.0), "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn jacobi_preconditioner_also_converges() {
        let (f, b) = laplacian_1d(60);
        let options = SolverOptions {
            preconditioner: PreconditionerKind::Jacobi { shift: 0.0 },
            max_iterations: 2000,
            tolerance: 1e-8,
            ..SolverOptions::default()
        };
        let pairs = lowest_eigenpairs(&f, &b, 2, &options).unwrap();
        assert!(pairs.values[0] > 0.0 && pairs.values[0] < pairs.values[1]);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (f, b) = laplacian_1d(80);
        let a = lowest_eigenpairs(&f, &b, 3, &SolverOptions::default()).unwrap();
        let c = lowest_eigenpairs(&f, &b, 3, &SolverOptions::default()).unwrap();
        assert_eq!(a.values, c.values);
    }
}
