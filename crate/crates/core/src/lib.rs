//! Truncated three-dimensional Fourier series on a box, and what they are
//! used for here: Gross-Pitaevskii vortex dynamics and fast evaluation of
//! the resulting fields.
//!
//! * [`fourier`]: centered coefficient storage, sampling, derivatives.
//! * [`rectilinear`]: evaluation on tensor-product grids, streamed by slab.
//! * [`nonuniform`]: evaluation at scattered points, direct or by NUFFT.
//! * [`gpe`]: Strang-split time stepping with mirrored walls.
//! * [`vortex`]: Padé vortex profiles and straight-line initial data.
//! * [`tube`]: point clouds around vortex cores by local refinement.
//! * [`snapshot`]: saved states and the `SFS1` file format.
//!
//! ```
//! use fourier3::fourier::{decompose, DomainBox, GridSize, PhysicalField};
//! use fourier3::nonuniform::{eval_nufft, NufftParams, PointSet};
//! use num_complex::Complex64;
//!
//! let domain = DomainBox::cube(0.0, 1.0)?;
//! let field = PhysicalField::from_fn(domain, GridSize::cube(8)?, |x| {
//!     Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[1])
//! });
//! let out = eval_nufft(&decompose(&field), &PointSet::new(vec![[0.3, 0.25, 0.7]]), NufftParams::default())?;
//! assert!((out.values[0] - Complex64::i()).norm() < 1e-10);
//! # Ok::<(), fourier3::Error>(())
//! ```

pub mod error;
mod fft;
pub mod fourier;
pub mod gpe;
pub mod nonuniform;
pub mod rectilinear;
pub mod snapshot;
pub mod tube;
pub mod vortex;

pub use error::{Error, Result};

// `mdbook test` cannot link against this crate, so the book's chapters are
// run as doctests instead, one module per chapter to tell failures apart.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/rectilinear.md")]
    mod rectilinear {}
    #[doc = include_str!("../../../book/src/scattered.md")]
    mod scattered {}
    #[doc = include_str!("../../../book/src/gpe.md")]
    mod gpe {}
    #[doc = include_str!("../../../book/src/vortices.md")]
    mod vortices {}
    #[doc = include_str!("../../../book/src/tubes.md")]
    mod tubes {}
    #[doc = include_str!("../../../book/src/snapshots.md")]
    mod snapshots {}
}
