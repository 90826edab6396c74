//! Closed boundary curves parametrised by arclength.
//!
//! A curve carries its turning angle `α(s)`: the outward unit normal is
//! `(cos α, sin α)` and the unit tangent is `(-sin α, cos α)`, so the curve is
//! traversed counter-clockwise and `α' = dα/ds` is the signed curvature.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;

/// Radius of a star-shaped curve as a truncated Fourier series in the polar angle:
/// `r(θ) = mean_radius + Σ_k (cos[k-1] cos kθ + sin[k-1] sin kθ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialFourier {
    pub mean_radius: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl RadialFourier {
    /// `(r, r', r'')` at polar angle `theta`.
    pub fn radius(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.mean_radius;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        let modes = self.cos.len().max(self.sin.len());
        for k in 1..=modes {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (sn, cs) = (kf * theta).sin_cos();
            r += a * cs + b * sn;
            dr += kf * (-a * sn + b * cs);
            ddr -= kf * kf * (a * cs + b * sn);
        }
        (r, dr, ddr)
    }

    fn speed(&self, theta: f64) -> f64 {
        let (r, dr, _) = self.radius(theta);
        r.hypot(dr)
    }
}

/// Supported boundary shapes. Both are star-shaped about the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Disk { radius: f64 },
    Fourier(RadialFourier),
}

/// Geometric data of the curve at one arclength position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    pub position: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    /// Turning angle, continuous in `s` with total increment `2π`.
    pub angle: f64,
    /// Signed curvature `dα/ds`.
    pub curvature: f64,
}

const GAUSS8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Tabulated arclength `S(θ)` of a Fourier curve, used to invert `θ(s)`.
#[derive(Clone, Debug)]
struct ArclengthTable {
    thetas: Vec<f64>,
    arcs: Vec<f64>,
}

impl ArclengthTable {
    fn build(radius: &RadialFourier, panels: usize) -> Self {
        let h = TAU / panels as f64;
        let mut thetas = Vec::with_capacity(panels + 1);
        let mut arcs = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        for k in 0..=panels {
            let t = k as f64 * h;
            thetas.push(t);
            arcs.push(acc);
            acc += gauss_arc(radius, t, t + h);
        }
        Self { thetas, arcs }
    }

    fn length(&self) -> f64 {
        *self.arcs.last().unwrap()
    }

    /// Polar angle with arclength `s ∈ [0, L]`.
    fn theta_at(&self, radius: &RadialFourier, s: f64) -> f64 {
        let k = match self.arcs.binary_search_by(|a| a.total_cmp(&s)) {
            Ok(i) => return self.thetas[i],
            Err(i) => i.clamp(1, self.arcs.len() - 1) - 1,
        };
        let (t0, t1) = (self.thetas[k], self.thetas[k + 1]);
        let (s0, s1) = (self.arcs[k], self.arcs[k + 1]);
        // Cubic Hermite guess using the exact slopes dθ/dS = 1/|P'(θ)|.
        let ds = s1 - s0;
        let u = (s - s0) / ds;
        let m0 = ds / radius.speed(t0);
        let m1 = ds / radius.speed(t1);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let mut theta = h00 * t0 + h10 * m0 + h01 * t1 + h11 * m1;
        for _ in 0..4 {
            let arc = s0 + gauss_arc(radius, t0, theta);
            let step = (arc - s) / radius.speed(theta);
            theta -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        theta
    }
}

fn gauss_arc(radius: &RadialFourier, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS8_NODES
        .iter()
        .zip(GAUSS8_WEIGHTS)
        .map(|(x, w)| w * radius.speed(mid + half * x))
        .sum::<f64>()
        * half
}

/// A closed, simple, counter-clockwise curve sampled at equispaced arclength.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    shape: CurveShape,
    length: f64,
    points: Vec<CurvePoint>,
    max_curvature: f64,
    tube_half_width: f64,
    table: Option<ArclengthTable>,
}

impl BoundaryCurve {
    /// Builds the curve and `samples` equispaced arclength samples.
    ///
    /// The tube half-width defaults to `0.5 / max|α'|`.
    pub fn new(shape: CurveShape, samples: usize) -> Result<Self> {
        if samples < 8 {
            return Err(invalid("samples", "need at least 8 boundary samples"));
        }
        let (length, table, max_curvature) = match &shape {
            CurveShape::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("radius", "must be positive and finite"));
                }
                (TAU * radius, None, 1.0 / radius)
            }
            CurveShape::Fourier(fourier) => {
                if !fourier.mean_radius.is_finite()
                    || fourier.cos.iter().chain(&fourier.sin).any(|c| !c.is_finite())
                {
                    return Err(invalid("coefficients", "must be finite"));
                }
                let probe = 64 * samples.max(64);
                let mut min_r = f64::INFINITY;
                let mut max_k: f64 = 0.0;
                for k in 0..probe {
                    let t = TAU * k as f64 / probe as f64;
                    let (r, dr, ddr) = fourier.radius(t);
                    min_r = min_r.min(r);
                    let q = r * r + dr * dr;
                    max_k = max_k.max(((q + dr * dr - r * ddr) / q.powf(1.5)).abs());
                }
                if min_r <= 0.0 {
                    return Err(Error::NonSimpleCurve(format!(
                        "radius function reaches {min_r:.3e}; a star-shaped curve needs r(θ) > 0"
                    )));
                }
                let table = ArclengthTable::build(fourier, 4 * samples.max(256));
                (table.length(), Some(table), max_k)
            }
        };
        let mut curve = Self {
            shape,
            length,
            points: Vec::new(),
            max_curvature,
            tube_half_width: 0.5 / max_curvature,
            table,
        };
        let ds = length / samples as f64;
        curve.points = (0..samples).map(|j| curve.eval(j as f64 * ds)).collect();
        for p in &curve.points {
            curve.max_curvature = curve.max_curvature.max(p.curvature.abs());
        }
        curve.tube_half_width = 0.5 / curve.max_curvature;
        Ok(curve)
    }

    /// Replaces the tube half-width `δ`, which must satisfy `δ · max|α'| < 1`.
    pub fn with_tube_half_width(mut self, half_width: f64) -> Result<Self> {
        let bound = 1.0 / self.max_curvature;
        if !(half_width > 0.0 && half_width < bound) {
            return Err(Error::TubeTooWide { half_width, bound });
        }
        self.tube_half_width = half_width;
        Ok(self)
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn samples(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn sample_count(&self) -> usize {
        self.points.len()
    }

    /// Arclength spacing between consecutive samples.
    pub fn spacing(&self) -> f64 {
        self.length / self.points.len() as f64
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    pub fn tube_half_width(&self) -> f64 {
        self.tube_half_width
    }

    /// Evaluates the curve at any arclength; `s` is taken modulo the length and
    /// the turning angle is continued by `2π` per period.
    pub fn eval(&self, s: f64) -> CurvePoint {
        let turns = (s / self.length).floor();
        let local = s - turns * self.length;
        let (position, angle, curvature) = match &self.shape {
            CurveShape::Disk { radius } => {
                let a = local / radius;
                let (sn, cs) = a.sin_cos();
                ([radius * cs, radius * sn], a, 1.0 / radius)
            }
            CurveShape::Fourier(fourier) => {
                let table = self.table.as_ref().expect("Fourier curves carry a table");
                let theta = table.theta_at(fourier, local.min(self.length));
                let (r, dr, ddr) = fourier.radius(theta);
                let q = r * r + dr * dr;
                let (sn, cs) = theta.sin_cos();
                let angle = theta - (dr / r).atan();
                let curvature = (q + dr * dr - r * ddr) / q.powf(1.5);
                ([r * cs, r * sn], angle, curvature)
            }
        };
        let angle = angle + TAU * turns;
        let (sa, ca) = angle.sin_cos();
        CurvePoint {
            s,
            position,
            tangent: [-sa, ca],
            normal: [ca, sa],
            angle,
            curvature,
        }
    }

    fn check_tube(&self, offset: f64) -> Result<()> {
        if offset.abs() >= self.tube_half_width {
            return Err(Error::OutsideTube { offset, half_width: self.tube_half_width });
        }
        Ok(())
    }

    /// Tubular coordinates `(r, s) ↦ γ(s) + r n(s)` for `|r| < δ`.
    pub fn tube_map(&self, offset: f64, s: f64) -> Result<[f64; 2]> {
        self.check_tube(offset)?;
        let p = self.eval(s);
        Ok([
            p.position[0] + offset * p.normal[0],
            p.position[1] + offset * p.normal[1],
        ])
    }

    /// Area factor `1 + r α'(s)` of the tubular coordinates.
    pub fn tube_jacobian(&self, offset: f64, s: f64) -> Result<f64> {
        self.check_tube(offset)?;
        Ok(1.0 + offset * self.eval(s).curvature)
    }

    /// Nearest-point projection `x ↦ (r, s)` inside the tube, with `s ∈ [0, L)`.
    pub fn project(&self, x: [f64; 2]) -> Result<(f64, f64)> {
        let dist2 = |p: &CurvePoint| {
            (p.position[0] - x[0]).powi(2) + (p.position[1] - x[1]).powi(2)
        };
        let nearest = self
            .points
            .iter()
            .min_by(|a, b| dist2(a).total_cmp(&dist2(b)))
            .expect("curve has samples");
        let mut s = nearest.s;
        let mut converged = false;
        for _ in 0..50 {
            let p = self.eval(s);
            let d = [p.position[0] - x[0], p.position[1] - x[1]];
            let g = d[0] * p.tangent[0] + d[1] * p.tangent[1];
            let dg = 1.0 - p.curvature * (d[0] * p.normal[0] + d[1] * p.normal[1]);
            if dg <= 0.0 {
                break;
            }
            let step = g / dg;
            let step = step.clamp(-self.spacing() * 4.0, self.spacing() * 4.0);
            s -= step;
            if step.abs() < 1e-14 * self.length {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ProjectionFailed);
        }
        s = s.rem_euclid(self.length);
        let p = self.eval(s);
        let offset = (x[0] - p.position[0]) * p.normal[0] + (x[1] - p.position[1]) * p.normal[1];
        self.check_tube(offset)?;
        Ok((offset, s))
    }

    /// Winding number of the sampled polygon around `x`.
    pub fn winding_number(&self, x: [f64; 2]) -> i32 {
        let n = self.points.len();
        let mut winding = 0;
        for j in 0..n {
            let a = self.points[j].position;
            let b = self.points[(j + 1) % n].position;
            let cross = (b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1]);
            if a[1] <= x[1] {
                if b[1] > x[1] && cross > 0.0 {
                    winding += 1;
                }
            } else if b[1] <= x[1] && cross < 0.0 {
                winding -= 1;
            }
        }
        winding
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.winding_number(x) != 0
    }

    /// Trapezoidal `∫ α' ds`, equal to `2π` for a simple counter-clockwise curve.
    pub fn total_turning(&self) -> f64 {
        self.points.iter().map(|p| p.curvature).sum::<f64>() * self.spacing()
    }

    /// Writes the samples as CSV with columns `s,x,y,alpha,alpha_prime`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,x,y,alpha,alpha_prime")?;
        for p in &self.points {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                p.s, p.position[0], p.position[1], p.angle, p.curvature
            )?;
        }
        Ok(())
    }
}

/// Convenience constructor for a disk of the given radius centred at the origin.
pub fn disk(radius: f64, samples: usize) -> Result<BoundaryCurve> {
    BoundaryCurve::new(CurveShape::Disk { radius }, samples)
}

/// Area enclosed by the sampled polygon (shoelace formula).
pub fn polygon_area(curve: &BoundaryCurve) -> f64 {
    let pts = curve.samples();
    let n = pts.len();
    0.5 * (0..n)
        .map(|j| {
            let a = pts[j].position;
            let b = pts[(j + 1) % n].position;
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}
