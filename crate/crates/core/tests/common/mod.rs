#![allow(dead_code)]

use infmass::geometry::{BoundaryCurve, CurveShape, RadialFourier};
use std::sync::Arc;

#[allow(unused_imports)]
pub use infmass::sample_fields::{boundary_field, FieldCoefficients};

pub fn star_shape() -> CurveShape {
    CurveShape::Fourier(RadialFourier { mean_radius: 1.0, cos: vec![0.0, 0.1, 0.05], sin: vec![0.0, 0.03] })
}

pub fn curve(shape: &CurveShape, samples: usize) -> Arc<BoundaryCurve> {
    Arc::new(BoundaryCurve::new(shape.clone(), samples).unwrap())
}
