//! Planned 3D FFTs over `Array3<Complex64>` in row-major (axis 2 fastest) layout.

use std::ops::Range;
use std::sync::Arc;

use ndarray::Array3;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    shape: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub(crate) fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.map(|n| planner.plan_fft_forward(n));
        let inverse = shape.map(|n| planner.plan_fft_inverse(n));
        Self {
            shape,
            forward,
            inverse,
        }
    }

    /// Unnormalized forward transform, `exp(-2 pi i j k / n)` kernel.
    pub(crate) fn forward(&self, data: &mut Array3<Complex64>) {
        self.run(data, &self.forward, None);
    }

    /// Unnormalized inverse transform, `exp(+2 pi i j k / n)` kernel.
    pub(crate) fn inverse(&self, data: &mut Array3<Complex64>) {
        self.run(data, &self.inverse, None);
    }

    /// Forward transform of an array whose only nonzero entries lie in the
    /// first `band[d] / 2` and last `band[d] / 2` indices along every axis.
    /// Lanes that are entirely zero are skipped.
    pub(crate) fn forward_banded(&self, data: &mut Array3<Complex64>, band: [usize; 3]) {
        self.run(data, &self.forward, Some(band));
    }

    fn run(&self, data: &mut Array3<Complex64>, plans: &[Arc<dyn Fft<f64>>; 3], band: Option<[usize; 3]>) {
        assert_eq!(data.shape(), &self.shape[..], "FFT plan shape mismatch");
        let shape = self.shape;
        // Index ranges along each axis that may hold nonzero input.
        let runs: [Vec<Range<usize>>; 3] = std::array::from_fn(|d| {
            let n = shape[d];
            match band {
                Some(b) if b[d] / 2 < n - b[d] / 2 => vec![0..b[d] / 2, n - b[d] / 2..n],
                _ => vec![0..n],
            }
        });
        let in_band = |d: usize, i: usize| runs[d].iter().any(|r| r.contains(&i));
        let slice = data.as_slice_mut().expect("standard layout");
        let plane = shape[1] * shape[2];

        // Axis 0 first, on the columns that can be nonzero. Its stride is a
        // whole plane, so keeping this pass small matters most.
        for i1 in runs[1].iter().flat_map(|r| r.clone()) {
            for r in &runs[2] {
                let cols = i1 * shape[2] + r.start..i1 * shape[2] + r.end;
                strided_pass(slice, shape[0], plane, cols, &*plans[0], &|i0| in_band(0, i0));
            }
        }

        // Then axes 1 and 2 plane by plane, while the plane is in cache.
        // Axis 1 goes first so that only the columns that can be nonzero
        // take the strided path; axis 2 then runs on contiguous lanes.
        let mut scratch = vec![Complex64::default(); plans[2].get_inplace_scratch_len()];
        for chunk in slice.chunks_exact_mut(plane) {
            for r in &runs[2] {
                strided_pass(chunk, shape[1], shape[2], r.clone(), &*plans[1], &|i1| in_band(1, i1));
            }
            plans[2].process_with_scratch(chunk, &mut scratch);
        }
    }
}

/// Transforms columns `cols` of a row-major `len x width` block. Columns are
/// copied in groups so that each read is a contiguous run of the row. Rows
/// for which `stored` is false are known to be zero and are not read.
fn strided_pass(
    block: &mut [Complex64],
    len: usize,
    width: usize,
    cols: Range<usize>,
    plan: &dyn Fft<f64>,
    stored: &dyn Fn(usize) -> bool,
) {
    const GROUP: usize = 16;
    // Rows are far apart, which hardware prefetchers do not follow.
    const AHEAD: usize = 8;
    let mut buf = vec![Complex64::default(); GROUP * len];
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    let mut start = cols.start;
    while start < cols.end {
        let cols = GROUP.min(cols.end - start);
        for i in 0..len {
            if i + AHEAD < len && stored(i + AHEAD) {
                prefetch_run(&block[(i + AHEAD) * width + start..(i + AHEAD) * width + start + cols]);
            }
            if !stored(i) {
                for c in 0..cols {
                    buf[c * len + i] = Complex64::default();
                }
                continue;
            }
            let row = &block[i * width + start..i * width + start + cols];
            for (c, v) in row.iter().enumerate() {
                buf[c * len + i] = *v;
            }
        }
        plan.process_with_scratch(&mut buf[..cols * len], &mut scratch);
        for i in 0..len {
            if i + AHEAD < len {
                prefetch_run(&block[(i + AHEAD) * width + start..(i + AHEAD) * width + start + cols]);
            }
            let row = &mut block[i * width + start..i * width + start + cols];
            for (c, v) in row.iter_mut().enumerate() {
                *v = buf[c * len + i];
            }
        }
        start += cols;
    }
}

fn prefetch_run(run: &[Complex64]) {
    #[cfg(target_arch = "x86_64")]
    for c in run.iter().step_by(4) {
        // SAFETY: a prefetch has no architectural effect.
        unsafe {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            _mm_prefetch::<_MM_HINT_T0>((c as *const Complex64).cast());
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = run;
}

/// Zero-filled array for a large FFT grid.
///
/// The pages are touched in order right after the huge-page advice.
/// Faulting them in later from scattered writes leaves the buffer on small
/// pages, and the TLB misses then dominate the gather.
pub(crate) fn zeroed(shape: [usize; 3]) -> Array3<Complex64> {
    let mut data = bytemuck::zeroed_vec::<Complex64>(shape[0] * shape[1] * shape[2]);
    advise_huge_pages(&data);
    // One write per small page is enough to fault everything in, in order.
    for v in data.iter_mut().step_by(4096 / std::mem::size_of::<Complex64>()) {
        *v = Complex64::default();
    }
    Array3::from_shape_vec((shape[0], shape[1], shape[2]), data).expect("length matches shape")
}

/// Asks the kernel to back large buffers with huge pages, which cuts the
/// first-touch page fault cost of big FFT grids.
#[cfg(target_os = "linux")]
fn advise_huge_pages(data: &[Complex64]) {
    const HUGE: usize = 2 << 20;
    let start = data.as_ptr() as usize;
    let end = start + std::mem::size_of_val(data);
    let first = start.next_multiple_of(HUGE);
    let last = end / HUGE * HUGE;
    if last > first {
        // SAFETY: the range lies inside a live allocation owned by `data`;
        // MADV_HUGEPAGE only changes how the kernel backs it.
        unsafe {
            libc::madvise(first as *mut libc::c_void, last - first, libc::MADV_HUGEPAGE);
        }
    }
}

#[cfg(not(target_os = "linux"))]
fn advise_huge_pages(_: &[Complex64]) {}

/// Swaps the two halves of every axis. For even sizes this is both
/// `fftshift` and `ifftshift`.
pub(crate) fn half_shift(data: &Array3<Complex64>) -> Array3<Complex64> {
    let [n0, n1, n2] = [data.shape()[0], data.shape()[1], data.shape()[2]];
    Array3::from_shape_fn((n0, n1, n2), |(i, j, k)| {
        data[[(i + n0 / 2) % n0, (j + n1 / 2) % n1, (k + n2 / 2) % n2]]
    })
}
