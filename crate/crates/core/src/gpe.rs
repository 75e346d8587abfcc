//! Strang-split pseudospectral integration of the Gross–Pitaevskii equation
//!
//! ```text
//! ∂ψ/∂t = (i/2) ∇²ψ + (i/2) (1 - |ψ|²) ψ
//! ```
//!
//! on a periodic box. Both parts have exact flows: the potential part keeps
//! `|ψ|` fixed pointwise, so `exp(i τ/2 (1 - |ψ|²))` is its flow over `τ`, and
//! the kinetic part is diagonal in Fourier space with multipliers
//! `exp(i τ/2 Σ_d Λ²_{k,d})`. One step is potential half-step, full kinetic
//! step, potential half-step.
//!
//! Non-periodic directions are handled by mirroring the physical samples
//! onto a box of twice the length; snapshots store the physical half only.

use ndarray::{s, Array3, ArrayViewMut3, Axis, Slice, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{half_shift, Fft3};
use crate::fourier::{decompose, gradient_energy, laplacian_symbol, synthesize_regular, DomainBox, GridSize, PhysicalField};
use crate::snapshot::Snapshot;

/// Doubles the box along every mirrored direction and fills the new half
/// with the index-reversed samples: `(v1, .., vN) -> (v1, .., vN, vN, .., v1)`.
pub fn mirror_extend(field: &PhysicalField, mirror: [bool; 3]) -> PhysicalField {
    let mut values = field.values().clone();
    let (a, mut b) = (field.domain().lower(), field.domain().upper());
    for (d, &on) in mirror.iter().enumerate() {
        if !on {
            continue;
        }
        let n = values.shape()[d];
        let mut shape = [values.shape()[0], values.shape()[1], values.shape()[2]];
        shape[d] *= 2;
        let mut out = Array3::zeros(shape);
        out.slice_axis_mut(Axis(d), Slice::from(0..n)).assign(&values);
        let mut reversed = values.view();
        reversed.invert_axis(Axis(d));
        out.slice_axis_mut(Axis(d), Slice::from(n..2 * n)).assign(&reversed);
        values = out;
        b[d] = a[d] + 2.0 * (b[d] - a[d]);
    }
    let domain = DomainBox::new(a, b).expect("doubling keeps a < b");
    PhysicalField::new(domain, values).expect("doubling keeps sizes even")
}

/// The first `size[d]` samples along each axis: the physical part of a
/// mirrored computational field.
pub fn restrict(values: &Array3<Complex64>, size: GridSize) -> Array3<Complex64> {
    let [n1, n2, n3] = size.dims();
    values.slice(s![..n1, ..n2, ..n3]).to_owned()
}

/// Exact potential flow over `dt / 2`: `v <- exp(i dt/2 (1 - |v|²)) v`.
pub fn potential_halfstep(mut values: ArrayViewMut3<'_, Complex64>, dt: f64) {
    let update = |v: &mut Complex64| {
        let phase = 0.5 * dt * (1.0 - v.norm_sqr());
        *v *= Complex64::from_polar(1.0, phase);
    };
    match values.as_slice_mut() {
        Some(slice) => slice.par_iter_mut().for_each(update),
        None => values.iter_mut().for_each(update),
    }
}

/// Per-mode real symbol `Σ_d Λ²_{k,d} = -Σ_d (2π k'_d / L_d)²`, in centered order.
pub fn kinetic_multipliers(size: &GridSize, domain: &DomainBox) -> Array3<f64> {
    let [s1, s2, s3] = laplacian_symbol(size, domain);
    let [n1, n2, n3] = size.dims();
    Array3::from_shape_fn((n1, n2, n3), |(i, j, k)| s1[i] + s2[j] + s3[k])
}

/// Exact kinetic flow over `dt`: `ψ_k <- exp(i dt/2 Σ_d Λ²_{k,d}) ψ_k`.
pub fn kinetic_step(mut coeffs: ArrayViewMut3<'_, Complex64>, dt: f64, multipliers: &Array3<f64>) {
    Zip::from(&mut coeffs)
        .and(multipliers)
        .for_each(|c, &m| *c *= Complex64::from_polar(1.0, 0.5 * dt * m));
}

/// One Strang step through `decompose` and `synthesize_regular`.
///
/// [`Stepper`] performs the same step with cached transforms.
pub fn strang_step(field: &PhysicalField, dt: f64) -> PhysicalField {
    let mut values = field.values().clone();
    potential_halfstep(values.view_mut(), 0.5 * dt);
    let half = PhysicalField::new(*field.domain(), values).expect("same shape");
    let mut spec = decompose(&half);
    let multipliers = kinetic_multipliers(&spec.size(), spec.domain());
    kinetic_step(spec.coeffs_mut().view_mut(), dt, &multipliers);
    let mut out = synthesize_regular(&spec);
    potential_halfstep(out.values_mut().view_mut(), 0.5 * dt);
    out
}

/// Repeated Strang steps of a fixed size on one grid.
///
/// The kinetic phases are stored in natural FFT order and include the
/// `1 / (N1 N2 N3)` normalization, so a step is two pointwise passes and two
/// unnormalized FFTs.
pub struct Stepper {
    fft: Fft3,
    phases: Array3<Complex64>,
    dt: f64,
}

impl Stepper {
    pub fn new(size: GridSize, domain: &DomainBox, dt: f64) -> Self {
        let norm = 1.0 / size.total() as f64;
        let centered = kinetic_multipliers(&size, domain).mapv(|m| Complex64::from_polar(norm, 0.5 * dt * m));
        Self {
            fft: Fft3::new(size.dims()),
            phases: half_shift(&centered),
            dt,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `values` by one step in place.
    pub fn step(&self, values: &mut Array3<Complex64>) {
        potential_halfstep(values.view_mut(), 0.5 * self.dt);
        self.fft.forward(values);
        Zip::from(&mut *values).and(&self.phases).for_each(|v, p| *v *= p);
        self.fft.inverse(values);
        potential_halfstep(values.view_mut(), 0.5 * self.dt);
    }
}

/// Mass and energy of a field on its (periodic) computational box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    /// `h1 h2 h3 Σ |ψ_n|²`.
    pub mass: f64,
    /// `½ ∫ |∇ψ|²`, spectral.
    pub kinetic: f64,
    /// `¼ h1 h2 h3 Σ (1 - |ψ_n|²)²`.
    pub quartic: f64,
}

impl Diagnostics {
    pub fn of(field: &PhysicalField, t: f64) -> Self {
        let cell: f64 = field.steps().iter().product();
        let quartic = 0.25 * cell * field.values().iter().map(|v| (1.0 - v.norm_sqr()).powi(2)).sum::<f64>();
        Self {
            t,
            mass: field.discrete_mass(),
            kinetic: 0.5 * gradient_energy(&decompose(field)),
            quartic,
        }
    }

    pub fn energy(&self) -> f64 {
        self.kinetic + self.quartic
    }
}

/// `E = ½ ∫ |∇ψ|² + ¼ ∫ (1 - |ψ|²)²` on the field's box.
pub fn energy(field: &PhysicalField) -> f64 {
    Diagnostics::of(field, 0.0).energy()
}

/// Run parameters. `grid` holds the physical sizes; mirrored directions are
/// doubled for the computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub physical_domain: DomainBox,
    pub grid: GridSize,
    pub mirror: [bool; 3],
    pub final_time: f64,
    pub steps: usize,
    /// Number of equal intervals between saves; `snapshot_count + 1`
    /// snapshots are written, at `t = 0` and `t = T` included.
    pub snapshot_count: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.snapshot_count == 0 || self.steps % self.snapshot_count != 0 {
            return Err(Error::InvalidConfig(format!(
                "snapshot count {} must be positive and divide steps {}",
                self.snapshot_count, self.steps
            )));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidConfig(format!("final time {} must be finite and nonnegative", self.final_time)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn computational_domain(&self) -> DomainBox {
        let (a, mut b) = (self.physical_domain.lower(), self.physical_domain.upper());
        for d in 0..3 {
            if self.mirror[d] {
                b[d] = a[d] + 2.0 * (b[d] - a[d]);
            }
        }
        DomainBox::new(a, b).expect("doubling keeps a < b")
    }

    pub fn computational_size(&self) -> GridSize {
        let n = self.grid.dims();
        GridSize::new(std::array::from_fn(|d| if self.mirror[d] { 2 * n[d] } else { n[d] })).expect("doubling keeps sizes even")
    }
}

/// Initial and final diagnostics of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunReport {
    pub initial: Diagnostics,
    pub last: Diagnostics,
}

/// Integrates from `initial` (on the physical grid) to `final_time`, handing
/// each snapshot to `sink` as soon as it is taken.
pub fn simulate_with<F>(config: &SimConfig, initial: &PhysicalField, mut sink: F) -> Result<RunReport>
where
    F: FnMut(Snapshot) -> Result<()>,
{
    config.validate()?;
    if initial.size() != config.grid || initial.domain() != &config.physical_domain {
        return Err(Error::ShapeMismatch {
            expected: config.grid.dims(),
            found: initial.size().dims(),
        });
    }
    let mut field = mirror_extend(initial, config.mirror);
    let domain = *field.domain();
    let stepper = Stepper::new(field.size(), &domain, config.dt());
    let every = config.steps / config.snapshot_count;
    let snapshot = |values: &Array3<Complex64>, t: f64| {
        Snapshot::new(config.physical_domain, restrict(values, config.grid), config.mirror, t)
    };

    let initial_diag = Diagnostics::of(&field, 0.0);
    log::info!(
        "t = 0: mass {:.15e}, energy {:.15e}",
        initial_diag.mass,
        initial_diag.energy()
    );
    sink(snapshot(field.values(), 0.0)?)?;
    for n in 1..=config.steps {
        stepper.step(field.values_mut());
        if n % every == 0 {
            // Exact at the last step, so the final snapshot is at t = T.
            let t = if n == config.steps { config.final_time } else { n as f64 * config.dt() };
            log::debug!("step {n}/{}: t = {t}", config.steps);
            sink(snapshot(field.values(), t)?)?;
        }
    }
    let last = Diagnostics::of(&field, config.final_time);
    log::info!(
        "t = {}: mass {:.15e}, energy {:.15e}",
        config.final_time,
        last.mass,
        last.energy()
    );
    Ok(RunReport {
        initial: initial_diag,
        last,
    })
}

/// [`simulate_with`] collecting all snapshots in memory.
pub fn simulate(config: &SimConfig, initial: &PhysicalField) -> Result<(Vec<Snapshot>, RunReport)> {
    let mut snaps = Vec::with_capacity(config.snapshot_count + 1);
    let report = simulate_with(config, initial, |s| {
        snaps.push(s);
        Ok(())
    })?;
    Ok((snaps, report))
}
