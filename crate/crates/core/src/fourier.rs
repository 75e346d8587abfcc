//! Domains, regular grids and the truncated Fourier series on a box.
//!
//! A series on `Ω = [a1,b1) x [a2,b2) x [a3,b3)` with even sizes `N` is
//!
//! ```text
//! ψ(x) = Σ_k ψ_k Π_d exp(2πi k'_d (x_d - a_d) / (b_d - a_d)) / sqrt(b_d - a_d)
//! ```
//!
//! where the centered wavenumber of array index `k_d` (0-based) is
//! `k'_d = k_d - N_d / 2`. Coefficient arrays are always stored in this
//! centered order. With the `1/sqrt(b_d - a_d)` normalization the basis is
//! orthonormal on `Ω`, so the coefficient sum of squares is the L² norm.

use std::f64::consts::PI;

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{half_shift, Fft3};

/// The half-open computational box `[a_d, b_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    a: [f64; 3],
    b: [f64; 3],
}

impl DomainBox {
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Result<Self> {
        for axis in 0..3 {
            // Also rejects NaN.
            if !(a[axis] < b[axis]) || !a[axis].is_finite() || !b[axis].is_finite() {
                return Err(Error::InvalidDomain {
                    axis,
                    a: a[axis],
                    b: b[axis],
                });
            }
        }
        Ok(Self { a, b })
    }

    /// The cube `[lo, hi)^3`.
    pub fn cube(lo: f64, hi: f64) -> Result<Self> {
        Self::new([lo; 3], [hi; 3])
    }

    pub fn unit() -> Self {
        Self {
            a: [0.0; 3],
            b: [1.0; 3],
        }
    }

    pub fn lower(&self) -> [f64; 3] {
        self.a
    }

    pub fn upper(&self) -> [f64; 3] {
        self.b
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.b[axis] - self.a[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|d| self.length(d)).product()
    }

    /// `Π_d 1/sqrt(b_d - a_d)`, the value of every basis function at `a`.
    pub fn basis_scale(&self) -> f64 {
        1.0 / self.volume().sqrt()
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        (0..3).all(|d| x[d] >= self.a[d] && x[d] < self.b[d])
    }

    /// Checks that `value` lies in `[a_axis, b_axis)`.
    pub fn check_coordinate(&self, axis: usize, value: f64) -> Result<()> {
        if value >= self.a[axis] && value < self.b[axis] {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                axis,
                value,
                a: self.a[axis],
                b: self.b[axis],
            })
        }
    }

    pub fn check_point(&self, x: [f64; 3]) -> Result<()> {
        (0..3).try_for_each(|d| self.check_coordinate(d, x[d]))
    }

    /// Maps `x` into `Ω` using the box periodicity.
    pub fn wrap(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = x;
        for d in 0..3 {
            let len = self.length(d);
            let mut y = self.a[d] + (x[d] - self.a[d]).rem_euclid(len);
            // rem_euclid can round up to exactly `len`.
            if y >= self.b[d] {
                y = self.a[d];
            }
            out[d] = y;
        }
        out
    }
}

/// Per-axis sample counts. Every entry is positive and even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSize([usize; 3]);

impl GridSize {
    pub fn new(n: [usize; 3]) -> Result<Self> {
        for (axis, &n_d) in n.iter().enumerate() {
            if n_d == 0 || n_d % 2 != 0 {
                return Err(Error::InvalidGridSize { axis, n: n_d });
            }
        }
        Ok(Self(n))
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.0
    }

    pub fn get(&self, axis: usize) -> usize {
        self.0[axis]
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub(crate) fn shape(&self) -> (usize, usize, usize) {
        (self.0[0], self.0[1], self.0[2])
    }
}

/// Centered wavenumber `k - N/2` of 0-based array index `k`.
#[inline]
pub fn wavenumber(index: usize, n: usize) -> i64 {
    index as i64 - (n / 2) as i64
}

fn array_dims<T>(a: &Array3<T>) -> [usize; 3] {
    [a.shape()[0], a.shape()[1], a.shape()[2]]
}

/// Samples of a function on the regular grid `X_N` of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    domain: DomainBox,
    size: GridSize,
    values: Array3<Complex64>,
}

impl PhysicalField {
    pub fn new(domain: DomainBox, values: Array3<Complex64>) -> Result<Self> {
        let size = GridSize::new(array_dims(&values))?;
        Ok(Self {
            domain,
            size,
            values,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(domain: DomainBox, size: GridSize, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let [x1, x2, x3] = regular_grid(&domain, &size);
        let values = Array3::from_shape_fn(size.shape(), |(i, j, k)| f([x1[i], x2[j], x3[k]]));
        Self {
            domain,
            size,
            values,
        }
    }

    pub fn constant(domain: DomainBox, size: GridSize, value: Complex64) -> Self {
        Self {
            domain,
            size,
            values: Array3::from_elem(size.shape(), value),
        }
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn size(&self) -> GridSize {
        self.size
    }

    pub fn values(&self) -> &Array3<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array3<Complex64> {
        self.values
    }

    /// Grid steps `h_d = (b_d - a_d) / N_d`.
    pub fn steps(&self) -> [f64; 3] {
        grid_steps(&self.domain, &self.size)
    }

    /// Trapezoidal approximation of `∫ |ψ|²`, i.e. `h1 h2 h3 Σ |ψ_n|²`.
    pub fn discrete_mass(&self) -> f64 {
        let cell: f64 = self.steps().iter().product();
        cell * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// Centered Fourier coefficients of a truncated series on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    domain: DomainBox,
    size: GridSize,
    coeffs: Array3<Complex64>,
}

impl SpectralField {
    pub fn new(domain: DomainBox, coeffs: Array3<Complex64>) -> Result<Self> {
        let size = GridSize::new(array_dims(&coeffs))?;
        Ok(Self {
            domain,
            size,
            coeffs,
        })
    }

    pub fn zeros(domain: DomainBox, size: GridSize) -> Self {
        Self {
            domain,
            size,
            coeffs: Array3::zeros(size.shape()),
        }
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn size(&self) -> GridSize {
        self.size
    }

    pub fn coeffs(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array3<Complex64> {
        self.coeffs
    }

    /// Array index holding wavenumber `(0, 0, 0)`.
    pub fn zero_mode_index(&self) -> [usize; 3] {
        self.size.dims().map(|n| n / 2)
    }

    /// Mutable access to the coefficient of centered wavenumber `k`.
    pub fn mode_mut(&mut self, k: [i64; 3]) -> &mut Complex64 {
        let idx = self.mode_index(k);
        &mut self.coeffs[idx]
    }

    pub fn mode(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.mode_index(k)]
    }

    fn mode_index(&self, k: [i64; 3]) -> [usize; 3] {
        let n = self.size.dims();
        let mut idx = [0; 3];
        for d in 0..3 {
            let i = k[d] + (n[d] / 2) as i64;
            assert!(
                (0..n[d] as i64).contains(&i),
                "wavenumber {} out of range for N = {}",
                k[d],
                n[d]
            );
            idx[d] = i as usize;
        }
        idx
    }

    /// `Σ_k |ψ_k|`, the scale used by the NUFFT error contract.
    pub fn coefficient_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

pub fn grid_steps(domain: &DomainBox, size: &GridSize) -> [f64; 3] {
    let mut h = [0.0; 3];
    for (d, h_d) in h.iter_mut().enumerate() {
        *h_d = domain.length(d) / size.get(d) as f64;
    }
    h
}

/// Coordinates `x_{d,n} = a_d + n h_d`, `n = 0..N_d`; the right end `b_d` is excluded.
pub fn regular_grid(domain: &DomainBox, size: &GridSize) -> [Vec<f64>; 3] {
    let h = grid_steps(domain, size);
    std::array::from_fn(|d| {
        (0..size.get(d))
            .map(|n| domain.a[d] + n as f64 * h[d])
            .collect()
    })
}

/// Trapezoidal-rule Fourier coefficients of the samples.
///
/// Equivalent to `fftshift(fftn(psi)) * prod(sqrt(b - a) ./ N)`.
pub fn decompose(field: &PhysicalField) -> SpectralField {
    let size = field.size;
    let mut data = field.values.clone();
    Fft3::new(size.dims()).forward(&mut data);
    let scale: f64 = (0..3)
        .map(|d| field.domain.length(d).sqrt() / size.get(d) as f64)
        .product();
    data.mapv_inplace(|v| v * scale);
    SpectralField {
        domain: field.domain,
        size,
        coeffs: half_shift(&data),
    }
}

/// Evaluates the series on its own regular grid with one inverse FFT.
pub fn synthesize_regular(spec: &SpectralField) -> PhysicalField {
    let mut data = half_shift(&spec.coeffs);
    Fft3::new(spec.size.dims()).inverse(&mut data);
    let scale = spec.domain.basis_scale();
    data.mapv_inplace(|v| v * scale);
    PhysicalField {
        domain: spec.domain,
        size: spec.size,
        values: data,
    }
}

/// Derivative multipliers `Λ_{k,d} = 2πi k'_d / (b_d - a_d)` along `axis` (0-based).
///
/// Panics if `axis > 2`.
pub fn lambda(size: &GridSize, domain: &DomainBox, axis: usize) -> Vec<Complex64> {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    let n = size.get(axis);
    let len = domain.length(axis);
    (0..n)
        .map(|k| Complex64::new(0.0, 2.0 * PI * wavenumber(k, n) as f64 / len))
        .collect()
}

/// Real symbol `Σ_d Λ²_{k,d}` of the Laplacian, one vector per axis.
pub(crate) fn laplacian_symbol(size: &GridSize, domain: &DomainBox) -> [Vec<f64>; 3] {
    std::array::from_fn(|d| lambda(size, domain, d).iter().map(|l| -l.im * l.im).collect())
}

/// Multiplies the coefficients by `Λ_{·,axis}`: the spectral partial derivative.
pub fn differentiate(spec: &SpectralField, axis: usize) -> SpectralField {
    let lam = lambda(&spec.size, &spec.domain, axis);
    let mut out = spec.clone();
    for ((i, j, k), c) in out.coeffs.indexed_iter_mut() {
        *c *= lam[[i, j, k][axis]];
    }
    out
}

/// `Σ_k |ψ_k|²`, which equals `∫_Ω |ψ|²` and the trapezoidal grid sum.
pub fn spectral_mass(spec: &SpectralField) -> f64 {
    spec.coeffs.iter().map(|c| c.norm_sqr()).sum()
}

/// `∫_Ω |∇ψ|² = Σ_k (|Λ_{k,1}|² + |Λ_{k,2}|² + |Λ_{k,3}|²) |ψ_k|²`.
pub fn gradient_energy(spec: &SpectralField) -> f64 {
    let [s1, s2, s3] = laplacian_symbol(&spec.size, &spec.domain);
    spec.coeffs
        .indexed_iter()
        .map(|((i, j, k), c)| -(s1[i] + s2[j] + s3[k]) * c.norm_sqr())
        .sum()
}
