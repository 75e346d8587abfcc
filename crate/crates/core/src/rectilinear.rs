//! Evaluation of a truncated series on a rectilinear (tensor-product) grid.
//!
//! With per-axis basis matrices `E^d` (`M_d x N_d`), the value at grid point
//! `(m1, m2, m3)` is the mode-wise contraction
//!
//! ```text
//! ψ(y_m) = Σ_{k1} E¹[m1,k1] Σ_{k2} E²[m2,k2] Σ_{k3} E³[m3,k3] ψ[k1,k2,k3]
//! ```
//!
//! For each `k1` the two inner sums are two matrix products,
//! `T_{k1} = E² ψ[k1,:,:] (E³)ᵀ`, costing `O(N1 (N2 N3 M2 + N3 M2 M3))` in
//! total. The outer sum is one product of `E¹` with the stacked `T`, costing
//! `O(N1 M1 M2 M3)`. The output is produced in slabs of constant `m1`, so
//! large grids can be streamed without holding the full complex result.

use std::f64::consts::PI;

use ndarray::{s, Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::{wavenumber, DomainBox, GridSize, SpectralField};

/// Three coordinate vectors; need not be sorted or equispaced.
#[derive(Debug, Clone, PartialEq)]
pub struct RectilinearGrid {
    axes: [Vec<f64>; 3],
}

impl RectilinearGrid {
    pub fn new(axes: [Vec<f64>; 3]) -> Self {
        Self { axes }
    }

    /// `m` equispaced points on `[lo, hi]`, endpoints included.
    pub fn linspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        match m {
            0 => Vec::new(),
            1 => vec![lo],
            _ => {
                let step = (hi - lo) / (m - 1) as f64;
                (0..m)
                    .map(|i| if i == m - 1 { hi } else { lo + i as f64 * step })
                    .collect()
            }
        }
    }

    /// `m` points on `[lo, hi]`, endpoints included, packed towards the
    /// midpoint by `y = mid + c sinh(u asinh(half / c))` for equispaced
    /// `u ∈ [-1, 1]`. Smaller `c` clusters harder; the spacing at the ends is
    /// about `sqrt(1 + (half / c)²)` times the spacing at the midpoint.
    pub fn clustered(lo: f64, hi: f64, m: usize, c: f64) -> Vec<f64> {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let s = (half / c).asinh();
        let mut y: Vec<f64> = Self::linspace(-1.0, 1.0, m)
            .into_iter()
            .map(|u| mid + c * (u * s).sinh())
            .collect();
        if m > 1 {
            y[0] = lo;
            y[m - 1] = hi;
        }
        y
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.axes[d]
    }

    pub fn axes(&self) -> &[Vec<f64>; 3] {
        &self.axes
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    pub fn check_inside(&self, domain: &DomainBox) -> Result<()> {
        for d in 0..3 {
            for &y in &self.axes[d] {
                domain.check_coordinate(d, y)?;
            }
        }
        Ok(())
    }
}

/// `M_d x N_d` matrix of basis values along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix(Array2<Complex64>);

impl BasisMatrix {
    pub fn entries(&self) -> &Array2<Complex64> {
        &self.0
    }
}

/// `e_{m,k} = exp(2πi k' (y_m - a) / (b - a)) / sqrt(b - a)`, `k' = k - N/2`.
pub fn basis_matrix(domain: &DomainBox, size: &GridSize, y: &[f64], axis: usize) -> Result<BasisMatrix> {
    for &v in y {
        domain.check_coordinate(axis, v)?;
    }
    Ok(BasisMatrix(basis_unchecked(domain, size, y, axis)))
}

pub(crate) fn basis_unchecked(domain: &DomainBox, size: &GridSize, y: &[f64], axis: usize) -> Array2<Complex64> {
    let a = domain.lower()[axis];
    let len = domain.length(axis);
    let n = size.get(axis);
    let norm = 1.0 / len.sqrt();
    Array2::from_shape_fn((y.len(), n), |(m, k)| {
        let t = (y[m] - a) / len;
        // Reduce the integer part of k' t so the phase stays small.
        let phase = (wavenumber(k, n) as f64 * t).fract();
        Complex64::from_polar(norm, 2.0 * PI * phase)
    })
}

/// Evaluates the series at every point of `grid`.
pub fn eval_rectilinear(spec: &SpectralField, grid: &RectilinearGrid) -> Result<Array3<Complex64>> {
    let [m1, m2, m3] = grid.dims();
    let mut out = Array3::zeros((m1, m2, m3));
    eval_rectilinear_slabs(spec, grid, |i, slab| {
        out.index_axis_mut(Axis(0), i).assign(&slab);
        Ok(())
    })?;
    Ok(out)
}

/// Streams the grid values to `sink` one `M2 x M3` slab at a time, in
/// increasing `m1` order.
pub fn eval_rectilinear_slabs<F>(spec: &SpectralField, grid: &RectilinearGrid, mut sink: F) -> Result<()>
where
    F: FnMut(usize, ArrayView2<'_, Complex64>) -> Result<()>,
{
    grid.check_inside(spec.domain())?;
    let domain = spec.domain();
    let size = spec.size();
    let [n1, _, _] = size.dims();
    let [m1, m2, m3] = grid.dims();
    if m1 * m2 * m3 == 0 {
        return Ok(());
    }
    let e1 = basis_unchecked(domain, &size, grid.axis(0), 0);
    let e2 = basis_unchecked(domain, &size, grid.axis(1), 1);
    let e3t = basis_unchecked(domain, &size, grid.axis(2), 2).reversed_axes();

    // Inner contractions over k3 and k2, stacked as an N1 x (M2 M3) matrix.
    let mut stacked = Array2::<Complex64>::zeros((n1, m2 * m3));
    for (k1, mut row) in stacked.axis_iter_mut(Axis(0)).enumerate() {
        let plane = spec.coeffs().index_axis(Axis(0), k1);
        let t = e2.dot(&plane).dot(&e3t);
        row.assign(&t.into_shape_with_order(m2 * m3).expect("standard layout"));
    }

    // Outer contraction over k1 in row chunks of E¹.
    const CHUNK_BYTES: usize = 64 << 20;
    let rows = (CHUNK_BYTES / (16 * m2 * m3)).clamp(1, m1);
    let mut start = 0;
    while start < m1 {
        let end = (start + rows).min(m1);
        let block = e1.slice(s![start..end, ..]).dot(&stacked);
        for (offset, row) in block.axis_iter(Axis(0)).enumerate() {
            let slab = row.into_shape_with_order((m2, m3)).expect("contiguous row");
            sink(start + offset, slab)?;
        }
        start = end;
    }
    Ok(())
}

/// Straight quadruple loop over `(k, m)`; reference for tests.
#[doc(hidden)]
pub fn eval_rectilinear_naive(spec: &SpectralField, grid: &RectilinearGrid) -> Array3<Complex64> {
    let domain = spec.domain();
    let size = spec.size();
    let [m1, m2, m3] = grid.dims();
    let n = size.dims();
    Array3::from_shape_fn((m1, m2, m3), |(i, j, l)| {
        let y = [grid.axis(0)[i], grid.axis(1)[j], grid.axis(2)[l]];
        let mut acc = Complex64::default();
        for ((k1, k2, k3), c) in spec.coeffs().indexed_iter() {
            let mut phase = 0.0;
            for (d, k) in [k1, k2, k3].into_iter().enumerate() {
                phase += wavenumber(k, n[d]) as f64 * (y[d] - domain.lower()[d]) / domain.length(d);
            }
            acc += c * Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
        acc * domain.basis_scale()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fourier::{regular_grid, synthesize_regular};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clustered_axis_is_symmetric_and_increasing() {
        let y = RectilinearGrid::clustered(-20.0, 20.0, 281, 2.0);
        assert_eq!((y[0], y[140], y[280]), (-20.0, 0.0, 20.0));
        assert!(y.windows(2).all(|w| w[1] > w[0]));
        for i in 0..281 {
            assert!((y[i] + y[280 - i]).abs() < 1e-12);
        }
        let off = RectilinearGrid::clustered(0.0, 4.0, 5, 1.0);
        assert!((off[2] - 2.0).abs() < 1e-15);
    }

    fn random_spec(domain: DomainBox, n: [usize; 3], seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = Array3::from_shape_simple_fn((n[0], n[1], n[2]), || {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        SpectralField::new(domain, coeffs).unwrap()
    }

    #[test]
    fn left_endpoint_row_is_all_ones() {
        let size = GridSize::cube(6).unwrap();
        let e = basis_matrix(&DomainBox::unit(), &size, &[0.0], 1).unwrap();
        assert!(e.entries().iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn entries_have_constant_modulus() {
        let domain = DomainBox::cube(-20.0, 60.0).unwrap();
        let size = GridSize::cube(8).unwrap();
        let y = [-20.0, -3.3, 0.0, 17.25, 59.9];
        let e = basis_matrix(&domain, &size, &y, 2).unwrap();
        let expected = 1.0 / 80f64.sqrt();
        assert!(e.entries().iter().all(|v| (v.norm() - expected).abs() < 1e-15));
    }

    #[test]
    fn rejects_points_outside_half_open_box() {
        let size = GridSize::cube(4).unwrap();
        assert!(matches!(
            basis_matrix(&DomainBox::unit(), &size, &[0.5, 1.0], 0),
            Err(Error::OutsideDomain { axis: 0, .. })
        ));
        let spec = SpectralField::zeros(DomainBox::unit(), size);
        let grid = RectilinearGrid::new([vec![0.1], vec![-0.1], vec![0.2]]);
        assert!(eval_rectilinear(&spec, &grid).is_err());
    }

    #[test]
    fn single_point_at_lower_corner() {
        let domain = DomainBox::new([-1.0, 0.0, 2.0], [1.0, 3.0, 7.0]).unwrap();
        let spec = random_spec(domain, [4, 6, 2], 3);
        let grid = RectilinearGrid::new([vec![-1.0], vec![0.0], vec![2.0]]);
        let v = eval_rectilinear(&spec, &grid).unwrap()[[0, 0, 0]];
        let expected: Complex64 = spec.coeffs().iter().sum::<Complex64>() * domain.basis_scale();
        assert!((v - expected).norm() < 1e-13);
    }

    #[test]
    fn matches_naive_loop() {
        let domain = DomainBox::new([-2.0, 0.0, 1.0], [3.0, 1.0, 4.0]).unwrap();
        let spec = random_spec(domain, [6, 4, 8], 5);
        let grid = RectilinearGrid::new([
            vec![-2.0, 0.3, 2.9],
            vec![0.99, 0.01, 0.5, 0.25],
            vec![1.0, 3.5],
        ]);
        let fast = eval_rectilinear(&spec, &grid).unwrap();
        let slow = eval_rectilinear_naive(&spec, &grid);
        let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn regular_grid_matches_fft() {
        let domain = DomainBox::cube(-20.0, 60.0).unwrap();
        let spec = random_spec(domain, [16, 8, 12], 9);
        let grid = RectilinearGrid::new(regular_grid(&domain, &spec.size()));
        let values = eval_rectilinear(&spec, &grid).unwrap();
        let fft = synthesize_regular(&spec);
        for (a, b) in values.iter().zip(fft.values().iter()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(RectilinearGrid::linspace(-20.0, 20.0, 321).last(), Some(&20.0));
        assert_eq!(RectilinearGrid::linspace(-20.0, 20.0, 321)[160], 0.0);
        assert_eq!(RectilinearGrid::linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
