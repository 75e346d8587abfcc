//! Type-2 NUFFT with a Kaiser–Bessel window.
//!
//! For torus points `ζ` the target is `f(ζ) = Σ_k f_k exp(-2πi k·ζ)`. With an
//! oversampled grid of `n_d = σ N_d` cells and a window `φ` truncated to
//! `m` cells on either side, the pipeline is
//!
//! 1. divide `f_k` by the window transform `Π_d φ̂_d(k_d)` (deconvolution),
//! 2. zero-pad to `n1 x n2 x n3` and take one forward FFT to get `g_l`,
//! 3. at each point gather `Σ_l g_l Π_d φ_d(ζ_d - l_d / n_d)` over the
//!    `(2m + 1)^3` nearest cells.
//!
//! Window (shape parameter `β = π (2 - 1/σ)`, `u` measured in cells):
//!
//! ```text
//! φ(u) = sinh(β sqrt(m² - u²)) / (π sqrt(m² - u²)),   |u| <= m
//! φ̂(k) = I₀(m sqrt(β² - (2πk/n)²)) / n
//! ```
//!
//! Steps 1–2 depend only on the coefficients and are kept in a
//! [`NufftPlan`], which can be reused for any number of point sets.

use std::f64::consts::PI;

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{map_to_torus, PointSet};
use crate::error::{Error, Result};
use crate::fft::{self, Fft3};
use crate::fourier::{wavenumber, DomainBox, GridSize, SpectralField};

const MAX_CUTOFF: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NufftParams {
    /// Ratio of the oversampled grid to `N` along each axis.
    pub oversampling: f64,
    /// Window half-width in oversampled grid cells.
    pub cutoff: usize,
    /// Requested accuracy relative to `Σ_k |ψ_k|`.
    pub target_accuracy: f64,
}

impl Default for NufftParams {
    fn default() -> Self {
        Self {
            oversampling: 2.0,
            cutoff: 8,
            target_accuracy: 1e-12,
        }
    }
}

impl NufftParams {
    /// Smallest cutoff whose error estimate meets `epsilon` at oversampling 2.
    /// Requests beyond what the estimate can promise keep the largest cutoff;
    /// the plan then reports [`Accuracy::Degraded`].
    pub fn for_accuracy(epsilon: f64) -> Self {
        let oversampling = 2.0;
        let cutoff = (1..=MAX_CUTOFF)
            .find(|&m| error_estimate(oversampling, m) <= epsilon)
            .unwrap_or(MAX_CUTOFF);
        Self {
            oversampling,
            cutoff,
            target_accuracy: epsilon,
        }
    }

    /// A priori error estimate of the window, relative to `Σ_k |f_k|`.
    pub fn error_estimate(&self) -> f64 {
        error_estimate(self.oversampling, self.cutoff)
    }

    fn oversampled_sizes(&self, size: &GridSize) -> Result<[usize; 3]> {
        if !(self.oversampling >= 1.0) || !self.oversampling.is_finite() {
            return Err(Error::InvalidNufftParams(format!(
                "oversampling {} must be a finite number >= 1",
                self.oversampling
            )));
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidNufftParams("cutoff must be at least 1".into()));
        }
        if !(self.target_accuracy > 0.0) {
            return Err(Error::InvalidNufftParams(format!(
                "target accuracy {} must be positive",
                self.target_accuracy
            )));
        }
        let mut n = [0; 3];
        for d in 0..3 {
            let exact = self.oversampling * size.get(d) as f64;
            let rounded = exact.round();
            if (exact - rounded).abs() > 1e-9 || rounded as usize % 2 != 0 {
                return Err(Error::InvalidNufftParams(format!(
                    "oversampled size {exact} on axis {d} is not an even integer"
                )));
            }
            n[d] = rounded as usize;
        }
        Ok(n)
    }
}

fn error_estimate(oversampling: f64, cutoff: usize) -> f64 {
    let m = cutoff as f64;
    let r = (1.0 - 1.0 / oversampling).max(0.0);
    4.0 * PI * (m.sqrt() + m) * r.powf(0.25) * (-2.0 * PI * m * r.sqrt()).exp()
}

/// Whether the parameters can be expected to meet the requested accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accuracy {
    Nominal { estimate: f64 },
    Degraded { estimate: f64, target: f64 },
}

impl Accuracy {
    pub fn is_degraded(&self) -> bool {
        matches!(self, Accuracy::Degraded { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NufftOutput {
    pub values: Vec<Complex64>,
    pub accuracy: Accuracy,
}

/// Modified Bessel function of the first kind, order zero, by its power series.
/// All terms are positive, so the sum is accurate for the arguments used here.
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

#[derive(Debug, Clone, Copy)]
struct Window {
    n: usize,
    cutoff: f64,
    shape: f64,
}

impl Window {
    fn new(n: usize, big_n: usize, cutoff: usize) -> Self {
        let sigma = n as f64 / big_n as f64;
        Self {
            n,
            cutoff: cutoff as f64,
            shape: PI * (2.0 - 1.0 / sigma),
        }
    }

    /// Window at distance `u` cells, `|u| <= cutoff`.
    fn eval(&self, u: f64) -> f64 {
        let arg = self.cutoff * self.cutoff - u * u;
        if arg > 0.0 {
            let s = arg.sqrt();
            (self.shape * s).sinh() / (PI * s)
        } else if arg == 0.0 {
            self.shape / PI
        } else {
            let s = (-arg).sqrt();
            (self.shape * s).sin() / (PI * s)
        }
    }

    fn transform(&self, k: i64) -> f64 {
        let w = 2.0 * PI * k as f64 / self.n as f64;
        bessel_i0(self.cutoff * (self.shape * self.shape - w * w).sqrt()) / self.n as f64
    }
}

/// Oversampled, deconvolved grid for one coefficient set.
pub struct NufftPlan {
    domain: DomainBox,
    params: NufftParams,
    windows: [Window; 3],
    grid: Array3<Complex64>,
    accuracy: Accuracy,
}

impl NufftPlan {
    pub fn new(spec: &SpectralField, params: NufftParams) -> Result<Self> {
        let size = spec.size();
        let n = params.oversampled_sizes(&size)?;
        let big_n = size.dims();
        let windows: [Window; 3] = std::array::from_fn(|d| Window::new(n[d], big_n[d], params.cutoff));

        let estimate = params.error_estimate();
        let accuracy = if params.cutoff < 2 || estimate > params.target_accuracy {
            log::warn!(
                "NUFFT cutoff {} gives estimated error {estimate:.2e}, above the requested {:.2e}",
                params.cutoff,
                params.target_accuracy
            );
            Accuracy::Degraded {
                estimate,
                target: params.target_accuracy,
            }
        } else {
            Accuracy::Nominal { estimate }
        };

        let deconv: [Vec<f64>; 3] = std::array::from_fn(|d| {
            (0..big_n[d])
                .map(|k| 1.0 / windows[d].transform(wavenumber(k, big_n[d])))
                .collect()
        });
        // Rescaled, deconvolved coefficients placed at natural FFT positions.
        let norm = spec.domain().basis_scale() / (n[0] * n[1] * n[2]) as f64;
        let sign = |k: usize, big: usize| if (k + big / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let factor: [Vec<f64>; 3] = std::array::from_fn(|d| {
            (0..big_n[d]).map(|k| sign(k, big_n[d]) * deconv[d][k]).collect()
        });
        let natural = |k: usize, d: usize| wavenumber(k, big_n[d]).rem_euclid(n[d] as i64) as usize;
        let mut grid = fft::zeroed(n);
        {
            let out = grid.as_slice_mut().expect("standard layout");
            let half = big_n[2] / 2;
            for ((i, j), row) in spec.coeffs().rows().into_iter().enumerate().map(|(r, row)| ((r / big_n[1], r % big_n[1]), row)) {
                let w = factor[0][i] * factor[1][j] * norm;
                let base = (natural(i, 0) * n[1] + natural(j, 1)) * n[2];
                // Negative wavenumbers go to the end of the row, the rest to the front.
                for (k, c) in row.iter().enumerate() {
                    let pos = if k < half { n[2] - half + k } else { k - half };
                    out[base + pos] = c * (w * factor[2][k]);
                }
            }
        }
        Fft3::new(n).forward_banded(&mut grid, big_n);

        Ok(Self {
            domain: *spec.domain(),
            params,
            windows,
            grid,
            accuracy,
        })
    }

    pub fn params(&self) -> &NufftParams {
        &self.params
    }

    pub fn accuracy(&self) -> Accuracy {
        self.accuracy
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// Approximates the series at every point.
    pub fn eval(&self, points: &PointSet) -> Result<Vec<Complex64>> {
        let torus = map_to_torus(points, &self.domain)?;
        let zeta = torus.points();
        // Sorting by first window plane lets each block walk the grid plane
        // by plane, so a plane is fetched once and then served from cache
        // to every point whose window covers it.
        let mut order: Vec<(usize, usize)> = zeta.iter().enumerate().map(|(p, z)| (self.lowest_cell(0, z[0]).1, p)).collect();
        order.sort_unstable();
        let block = zeta.len().div_ceil(rayon::current_num_threads()).clamp(64, 4096);
        let sorted: Vec<Complex64> = order
            .par_chunks(block)
            .flat_map_iter(|chunk| {
                let stencils: Vec<Stencil> = chunk.iter().map(|&(_, p)| self.stencil(&zeta[p])).collect();
                self.gather_block(&stencils)
            })
            .collect();
        let mut out = vec![Complex64::default(); zeta.len()];
        for (&(_, p), v) in order.iter().zip(sorted) {
            out[p] = v;
        }
        Ok(out)
    }

    /// Lowest integer cell `l` with `|u - l| <= m` along axis `d`, as an
    /// unwrapped value and reduced into the grid.
    fn lowest_cell(&self, d: usize, zeta: f64) -> (i64, usize) {
        let n = self.windows[d].n;
        let lo = (zeta * n as f64 - self.params.cutoff as f64).ceil() as i64;
        (lo, lo.rem_euclid(n as i64) as usize)
    }

    fn stencil(&self, zeta: &[f64; 3]) -> Stencil {
        let m = self.params.cutoff as f64;
        let taps = 2 * self.params.cutoff + 1;
        let mut st = Stencil {
            start: [0; 3],
            weights: [[0.0; WIDTH]; 3],
        };
        for d in 0..3 {
            let win = &self.windows[d];
            let u = zeta[d] * win.n as f64;
            // Exactly 2m + 1 cells lie within m of u unless u is itself an
            // integer, when the two end weights vanish.
            let (lo, start) = self.lowest_cell(d, zeta[d]);
            st.start[d] = start;
            for (t, w) in st.weights[d][..taps].iter_mut().enumerate() {
                let l = (lo + t as i64) as f64;
                *w = if (l - u).abs() <= m { win.eval(u - l) } else { 0.0 };
            }
        }
        st
    }

    /// Values at points whose stencils are sorted by first window plane.
    /// Each point still sums its planes in increasing order, so the result
    /// does not depend on how points are blocked.
    fn gather_block(&self, stencils: &[Stencil]) -> Vec<Complex64> {
        let taps = 2 * self.params.cutoff + 1;
        let grid = self.grid.as_slice().expect("standard layout");
        let [n0, n1, n2] = self.windows.each_ref().map(|w| w.n);
        let mut sums = vec![Complex64::default(); stencils.len()];
        let (Some(first), Some(last)) = (stencils.first(), stencils.last()) else {
            return sums;
        };
        // Planes are numbered without wrapping; a point covers
        // start[0] ..= start[0] + taps - 1.
        let mut begin = 0;
        for plane in first.start[0]..last.start[0] + taps {
            while stencils[begin].start[0] + taps <= plane {
                begin += 1;
            }
            let i = plane % n0;
            for (st, sum) in stencils[begin..].iter().zip(&mut sums[begin..]) {
                if st.start[0] > plane {
                    break;
                }
                let mut acc = Complex64::default();
                for (b, &wj) in st.weights[1][..taps].iter().enumerate() {
                    let j = (st.start[1] + b) % n1;
                    let row = &grid[(i * n1 + j) * n2..(i * n1 + j + 1) * n2];
                    acc += line_sum(row, st.start[2], &st.weights[2][..taps]) * wj;
                }
                *sum += acc * st.weights[0][plane - st.start[0]];
            }
        }
        sums
    }
}

const WIDTH: usize = 2 * MAX_CUTOFF + 1;

/// First cell and window weights of one point along each axis.
struct Stencil {
    start: [usize; 3],
    weights: [[f64; WIDTH]; 3],
}

/// `Σ_t row[(start + t) mod n] w[t]`, split into contiguous runs.
fn line_sum(row: &[Complex64], start: usize, w: &[f64]) -> Complex64 {
    let mut acc = Complex64::default();
    let mut pos = start;
    let mut done = 0;
    // On grids narrower than the window the row wraps more than once.
    while done < w.len() {
        let run = (row.len() - pos).min(w.len() - done);
        acc += dot(&row[pos..pos + run], &w[done..done + run]);
        done += run;
        pos = 0;
    }
    acc
}

/// `Σ_t c[t] w[t]` with four independent partial sums, so consecutive
/// additions do not wait on each other.
fn dot(c: &[Complex64], w: &[f64]) -> Complex64 {
    let mut acc = [Complex64::default(); 4];
    let (cs, ct) = c.split_at(c.len() / 4 * 4);
    let (ws, wt) = w.split_at(cs.len());
    for (c4, w4) in cs.chunks_exact(4).zip(ws.chunks_exact(4)) {
        for l in 0..4 {
            acc[l] += c4[l] * w4[l];
        }
    }
    for (c, &wk) in ct.iter().zip(wt) {
        acc[0] += c * wk;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Fast approximate evaluation of the series at scattered points.
pub fn eval_nufft(spec: &SpectralField, points: &PointSet, params: NufftParams) -> Result<NufftOutput> {
    // Validate points before paying for the plan.
    points.check_inside(spec.domain())?;
    let plan = NufftPlan::new(spec, params)?;
    let values = plan.eval(points)?;
    Ok(NufftOutput {
        values,
        accuracy: plan.accuracy(),
    })
}
