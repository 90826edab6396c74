//! One-dimensional variational bound for the weighted functional
//! `L[f] = ∫₀^δ (f'² + k² f²)(1 + βt) dt` over `f(0) = 1`, `f(δ) = 0`.
//!
//! The minimum is computed with piecewise-linear elements, which reduces to a
//! tridiagonal solve of the discrete Euler-Lagrange system. Conforming elements
//! approach the continuous minimum from above.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the functional and its discretisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalProblem {
    pub k: f64,
    pub beta: f64,
    pub delta: f64,
    /// Number of elements on `[0, δ]`.
    pub intervals: usize,
}

/// `L` and `‖f‖²` of one test function, with the penalty `R = (k²/16)‖f‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCase {
    pub label: String,
    pub norm_sqr: f64,
    pub value: f64,
    pub penalty: f64,
    /// `L - (k + β/2)`.
    pub excess: f64,
    /// `‖f‖² > 2/k` and `excess ≥ R/2`.
    pub regime_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub problem: VariationalProblem,
    pub minimum: f64,
    /// `k + β/2`.
    pub bound: f64,
    /// `minimum - bound`.
    pub slack: f64,
    /// `k coth(kδ)`, the exact minimum when `β = 0`.
    pub exact_minimum: Option<f64>,
    /// `L` evaluated on `g(kt)` with `g(y) = c₁e^{-y} + c₂e^{y}`, `g(0) = 1`, `g(kδ) = 0`.
    pub reference_value: f64,
    pub penalty_cases: Vec<PenaltyCase>,
}

impl VariationalProblem {
    pub fn new(k: f64, beta: f64, delta: f64, intervals: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid("k", "must be positive and finite"));
        }
        if !(beta.abs() < 1.0) {
            return Err(invalid("beta", "|β| must be below 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be positive and finite"));
        }
        if !(delta * beta.abs() < 0.25) {
            return Err(invalid("delta", "δ|β| must be below 1/4"));
        }
        if intervals < 2 {
            return Err(invalid("intervals", "need at least two elements"));
        }
        Ok(Self { k, beta, delta, intervals })
    }

    fn step(&self) -> f64 {
        self.delta / self.intervals as f64
    }

    fn weight(&self, t: f64) -> f64 {
        1.0 + self.beta * t
    }

    /// Element matrices of `L` on `[t_a, t_a + h]`, exact for linear weights.
    fn element(&self, a: usize) -> [[f64; 2]; 2] {
        let h = self.step();
        let (wa, wb) = (self.weight(a as f64 * h), self.weight((a + 1) as f64 * h));
        let stiff = 0.5 * (wa + wb) / h;
        let k2 = self.k * self.k;
        let m_aa = h * (3.0 * wa + wb) / 12.0;
        let m_ab = h * (wa + wb) / 12.0;
        let m_bb = h * (wa + 3.0 * wb) / 12.0;
        [[stiff + k2 * m_aa, -stiff + k2 * m_ab], [-stiff + k2 * m_ab, stiff + k2 * m_bb]]
    }

    /// Discrete `L` of nodal values `f`.
    pub fn functional(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.intervals + 1);
        (0..self.intervals)
            .map(|a| {
                let e = self.element(a);
                let (x, y) = (f[a], f[a + 1]);
                e[0][0] * x * x + 2.0 * e[0][1] * x * y + e[1][1] * y * y
            })
            .sum()
    }

    /// `∫₀^δ f²` of the piecewise-linear interpolant.
    pub fn norm_sqr(&self, f: &[f64]) -> f64 {
        let h = self.step();
        f.windows(2).map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..=self.intervals).map(move |i| i as f64 * h)
    }

    /// Minimiser with `f(0) = 1`, `f(δ) = 0`.
    pub fn minimizer(&self) -> Vec<f64> {
        let n = self.intervals;
        // Interior unknowns 1..n-1; tridiagonal system K_II f = -K_I0.
        let inner = n - 1;
        let mut diag = vec![0.0; inner];
        let mut off = vec![0.0; inner.saturating_sub(1)];
        let mut rhs = vec![0.0; inner];
        for a in 0..n {
            let e = self.element(a);
            for (la, node) in [(0, a), (1, a + 1)] {
                if node == 0 || node == n {
                    continue;
                }
                diag[node - 1] += e[la][la];
            }
            if a >= 1 && a + 1 < n {
                off[a - 1] += e[0][1];
            }
            if a == 0 && n > 1 {
                rhs[0] -= e[1][0];
            }
        }
        let interior = solve_tridiagonal(&diag, &off, rhs);
        let mut f = Vec::with_capacity(n + 1);
        f.push(1.0);
        f.extend(interior);
        f.push(0.0);
        f
    }
}

/// Symmetric tridiagonal solve by forward elimination.
fn solve_tridiagonal(diag: &[f64], off: &[f64], mut rhs: Vec<f64>) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    for i in 1..n {
        let factor = off[i - 1] / d[i - 1];
        d[i] -= factor * off[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let upper = if i + 1 < n { off[i] * x[i + 1] } else { 0.0 };
        x[i] = (rhs[i] - upper) / d[i];
    }
    x
}

fn penalty_case(problem: &VariationalProblem, label: &'static str, f: &[f64]) -> PenaltyCase {
    let k = problem.k;
    let norm_sqr = problem.norm_sqr(f);
    let value = problem.functional(f);
    let penalty = k * k / 16.0 * norm_sqr;
    let excess = value - (k + problem.beta / 2.0);
    PenaltyCase { label: label.to_string(), norm_sqr, value, penalty, excess, regime_holds: norm_sqr > 2.0 / k && excess >= penalty / 2.0 }
}

/// Minimum of `L`, comparison with `k + β/2` and the large-norm penalty regime.
///
/// The penalty regime is probed with two functions of norm `‖f‖² ≈ 4/k`:
/// a power `(1 - t/δ)^p` and an exponential `e^{-kt/8}` cut linearly to zero
/// on the last element.
pub fn variational_check(problem: VariationalProblem) -> VariationalReport {
    let (k, beta, delta) = (problem.k, problem.beta, problem.delta);
    let minimizer = problem.minimizer();
    let minimum = problem.functional(&minimizer);
    let bound = k + beta / 2.0;

    let kd = k * delta;
    let c1 = 1.0 / (-(-2.0 * kd).exp_m1());
    let c2 = -c1 * (-2.0 * kd).exp();
    let reference: Vec<f64> = problem.nodes().map(|t| c1 * (-k * t).exp() + c2 * (k * t).exp()).collect();
    let reference_value = problem.functional(&reference);

    let mut penalty_cases = Vec::new();
    // ‖(1 - t/δ)^p‖² = δ/(2p+1) = 4/k.
    let p = (kd / 4.0 - 1.0) / 2.0;
    if p > 0.0 {
        let f: Vec<f64> = problem.nodes().map(|t| (1.0 - t / delta).max(0.0).powf(p)).collect();
        penalty_cases.push(penalty_case(&problem, "power", &f));
    }
    let q = k / 8.0;
    let n = problem.intervals;
    let f: Vec<f64> = problem.nodes().enumerate().map(|(i, t)| if i == n { 0.0 } else { (-q * t).exp() }).collect();
    penalty_cases.push(penalty_case(&problem, "exponential", &f));

    VariationalReport {
        problem,
        minimum,
        bound,
        slack: minimum - bound,
        exact_minimum: (beta == 0.0).then(|| k / kd.tanh()),
        reference_value,
        penalty_cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unweighted_minimum_matches_hyperbolic_cotangent() {
        let report = variational_check(VariationalProblem::new(3.0, 0.0, 1.0, 2000).unwrap());
        let exact = report.exact_minimum.unwrap();
        assert!(report.minimum >= exact);
        assert!(report.minimum - exact < 1e-5, "{} vs {exact}", report.minimum);
    }

    #[test]
    fn refinement_decreases_minimum() {
        let coarse = variational_check(VariationalProblem::new(20.0, 0.3, 0.5, 100).unwrap()).minimum;
        let fine = variational_check(VariationalProblem::new(20.0, 0.3, 0.5, 200).unwrap()).minimum;
        assert!(fine <= coarse);
    }

    #[test]
    fn constraints_rejected() {
        assert!(VariationalProblem::new(1.0, 1.0, 0.1, 10).is_err());
        assert!(VariationalProblem::new(1.0, 0.9, 0.3, 10).is_err());
        assert!(VariationalProblem::new(-1.0, 0.0, 0.3, 10).is_err());
        assert!(VariationalProblem::new(1.0, 0.0, 0.3, 1).is_err());
    }
}
