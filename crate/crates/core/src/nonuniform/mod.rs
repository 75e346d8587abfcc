//! Evaluation of a truncated series at scattered points.
//!
//! [`eval_direct`] sums every mode at every point, `O(M N1 N2 N3)`. It is
//! exact up to rounding and serves as the reference for [`eval_nufft`],
//! which maps the points onto the torus `[-1/2, 1/2)^3`, rescales the
//! coefficients, and runs a Kaiser–Bessel type-2 NUFFT.

mod nufft;

use std::f64::consts::PI;

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::fourier::{wavenumber, DomainBox, SpectralField};

pub use nufft::{eval_nufft, Accuracy, NufftOutput, NufftParams, NufftPlan};

/// Scattered evaluation points in physical coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet(Vec<[f64; 3]>);

impl PointSet {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        Self(points)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_inside(&self, domain: &DomainBox) -> Result<()> {
        self.0.iter().try_for_each(|&p| domain.check_point(p))
    }
}

impl From<Vec<[f64; 3]>> for PointSet {
    fn from(points: Vec<[f64; 3]>) -> Self {
        Self(points)
    }
}

/// Points on the torus; every coordinate in `[-1/2, 1/2)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TorusPointSet(Vec<[f64; 3]>);

impl TorusPointSet {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.0
    }
}

fn torus_coordinate(xi: f64, a: f64, b: f64) -> f64 {
    let ratio = (xi - a) / (a - b);
    let zeta = (ratio - ratio.floor()) - 0.5;
    // 1 - tiny rounds to 1.
    if zeta >= 0.5 {
        -0.5
    } else {
        zeta
    }
}

/// `ζ_d = mod((ξ_d - a_d) / (a_d - b_d), 1) - 1/2` with `mod(x, y) = x - y floor(x / y)`.
pub fn map_to_torus(points: &PointSet, domain: &DomainBox) -> Result<TorusPointSet> {
    points.check_inside(domain)?;
    let (a, b) = (domain.lower(), domain.upper());
    Ok(TorusPointSet(
        points
            .points()
            .iter()
            .map(|p| std::array::from_fn(|d| torus_coordinate(p[d], a[d], b[d])))
            .collect(),
    ))
}

/// `f_k = ψ_k (-1)^(k'_1 + k'_2 + k'_3) / Π_d sqrt(b_d - a_d)`: the coefficients
/// for which `Σ_k f_k exp(-2πi k'·ζ)` reproduces the series at the mapped points.
pub fn rescale_coeffs(spec: &SpectralField) -> Array3<Complex64> {
    let n = spec.size().dims();
    let scale = spec.domain().basis_scale();
    let mut out = spec.coeffs().clone();
    for ((i, j, k), c) in out.indexed_iter_mut() {
        let parity = wavenumber(i, n[0]) + wavenumber(j, n[1]) + wavenumber(k, n[2]);
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *c *= sign * scale;
    }
    out
}

/// Basis values `exp(2πi k' (x - a) / (b - a))` along one axis, without the
/// `1/sqrt(b - a)` factor.
fn phase_row(x: f64, a: f64, len: f64, n: usize) -> Vec<Complex64> {
    let t = (x - a) / len;
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * (wavenumber(k, n) as f64 * t).fract()))
        .collect()
}

/// Exact evaluation of the series at each point by direct summation.
pub fn eval_direct(spec: &SpectralField, points: &PointSet) -> Result<Vec<Complex64>> {
    let domain = spec.domain();
    points.check_inside(domain)?;
    let n = spec.size().dims();
    let (a, scale) = (domain.lower(), domain.basis_scale());
    let len = [domain.length(0), domain.length(1), domain.length(2)];
    let coeffs = spec.coeffs();
    Ok(points
        .points()
        .par_iter()
        .map(|p| {
            let e: [Vec<Complex64>; 3] = std::array::from_fn(|d| phase_row(p[d], a[d], len[d], n[d]));
            let mut total = Complex64::default();
            for (k1, plane) in coeffs.axis_iter(Axis(0)).enumerate() {
                let mut partial = Complex64::default();
                for (k2, row) in plane.axis_iter(Axis(0)).enumerate() {
                    let inner: Complex64 = row.iter().zip(&e[2]).map(|(c, w)| c * w).sum();
                    partial += e[1][k2] * inner;
                }
                total += e[0][k1] * partial;
            }
            total * scale
        })
        .collect())
}
