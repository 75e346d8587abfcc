//! Adaptive sampling of the low-density tubes around vortex lines.
//!
//! Start from the grid points whose stored density is at most `rhobar[0]`.
//! At level `ℓ = 1..L` every current point with `ρ ≤ rhobar[ℓ-1]` spawns the
//! 27 points of a cube of step `h/3^ℓ` centred on it, and the new points are
//! evaluated with one reusable [`NufftPlan`]. By default the result is every
//! point produced at any level with `ρ ≤ rhobar[L-1]`; [`Keep::FinalLevel`]
//! instead returns the whole working set of the last level, thresholded or
//! not.
//!
//! All points sit on the lattice of step `h/3^L` anchored at the lower
//! corner of the box, so they are tracked by integer lattice coordinates
//! taken modulo the periodic box. Coincident points therefore merge exactly
//! and wrapping is integer arithmetic.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::grid_steps;
use crate::nonuniform::{NufftParams, NufftPlan, PointSet};
use crate::snapshot::{sf2psihat, Snapshot};

/// Points near vortex cores, with their density and the level that
/// produced them (0 for original grid points).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TubePointCloud {
    pub points: Vec<[f64; 3]>,
    pub rho: Vec<f64>,
    pub level: Vec<u32>,
}

impl TubePointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points with `ρ ≤ max_rho`.
    pub fn filtered(&self, max_rho: f64) -> Self {
        let mut out = Self::default();
        for i in (0..self.len()).filter(|&i| self.rho[i] <= max_rho) {
            out.points.push(self.points[i]);
            out.rho.push(self.rho[i]);
            out.level.push(self.level[i]);
        }
        out
    }
}

/// Which points [`tube_eval_with`] returns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Keep {
    /// Points from every level with `ρ ≤ rhobar[L-1]`.
    #[default]
    BelowThreshold,
    /// Every point of the 27-point stencils generated at the last level,
    /// whatever its density.
    FinalLevel,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TubeOptions {
    pub params: NufftParams,
    pub keep: Keep,
}

/// [`tube_eval_with`] with default options.
pub fn tube_eval(snap: &Snapshot, rhobar: &[f64], final_filter: Option<f64>) -> Result<TubePointCloud> {
    tube_eval_with(snap, rhobar, final_filter, TubeOptions::default())
}

/// Points near the vortex cores of `snap`, refined once per entry of
/// `rhobar` and optionally restricted to `ρ ≤ final_filter`.
pub fn tube_eval_with(
    snap: &Snapshot,
    rhobar: &[f64],
    final_filter: Option<f64>,
    options: TubeOptions,
) -> Result<TubePointCloud> {
    check_thresholds(rhobar, final_filter)?;
    let levels = rhobar.len() as u32;
    let fine = 3i64.pow(levels);

    let spec = sf2psihat(snap);
    let domain = *spec.domain();
    let h = grid_steps(&domain, &spec.size());
    let period: [i64; 3] = std::array::from_fn(|d| spec.size().get(d) as i64 * fine);
    let lower = domain.lower();
    let position = |k: [i64; 3]| -> [f64; 3] { std::array::from_fn(|d| lower[d] + k[d] as f64 * h[d] / fine as f64) };

    // Lattice point -> (ρ, level).
    let mut seen: HashMap<[i64; 3], (f64, u32)> = HashMap::new();
    let mut current: Vec<[i64; 3]> = Vec::new();
    for ((i, j, k), v) in snap.values().indexed_iter() {
        let rho = v.norm_sqr();
        if rho <= rhobar[0] {
            let key = [i as i64 * fine, j as i64 * fine, k as i64 * fine];
            seen.insert(key, (rho, 0));
            current.push(key);
        }
    }
    if current.is_empty() {
        log::warn!("no grid point has density at or below {}; the tube is empty", rhobar[0]);
        return Ok(TubePointCloud::default());
    }

    let mut plan: Option<NufftPlan> = None;
    for level in 1..=levels {
        let threshold = rhobar[level as usize - 1];
        let step = fine / 3i64.pow(level);
        let mut next = Vec::new();
        let mut fresh = Vec::new();
        let active: Vec<[i64; 3]> = current.into_iter().filter(|c| seen[c].0 <= threshold).collect();
        for c in active {
            for off in STENCIL {
                let key: [i64; 3] = std::array::from_fn(|d| (c[d] + off[d] * step).rem_euclid(period[d]));
                if !seen.contains_key(&key) {
                    seen.insert(key, (f64::NAN, level));
                    fresh.push(key);
                }
                next.push(key);
            }
        }
        if !fresh.is_empty() {
            let plan = match &mut plan {
                Some(p) => p,
                None => plan.insert(NufftPlan::new(&spec, options.params)?),
            };
            let points = PointSet::new(fresh.iter().map(|&k| position(k)).collect());
            let values = plan.eval(&points)?;
            for (key, v) in fresh.iter().zip(values) {
                seen.get_mut(key).expect("inserted above").0 = density(v);
            }
        }
        next.sort_unstable();
        next.dedup();
        log::debug!("tube level {level}: {} new points, {} in the working set", fresh.len(), next.len());
        current = next;
    }

    let last = rhobar[rhobar.len() - 1];
    let mut kept: Vec<([i64; 3], f64, u32)> = match options.keep {
        Keep::BelowThreshold => seen
            .into_iter()
            .filter(|(_, (rho, _))| *rho <= last)
            .map(|(k, (rho, l))| (k, rho, l))
            .collect(),
        Keep::FinalLevel => current
            .into_iter()
            .map(|k| {
                let (rho, l) = seen[&k];
                (k, rho, l)
            })
            .collect(),
    };
    if let Some(f) = final_filter {
        kept.retain(|&(_, rho, _)| rho <= f);
    }
    kept.sort_unstable_by_key(|&(k, _, l)| (l, k));
    let mut out = TubePointCloud::default();
    for (k, rho, l) in kept {
        out.points.push(domain.wrap(position(k)));
        out.rho.push(rho);
        out.level.push(l);
    }
    Ok(out)
}

const STENCIL: [[i64; 3]; 27] = {
    let mut s = [[0i64; 3]; 27];
    let mut i = 0;
    while i < 27 {
        s[i] = [(i / 9) as i64 - 1, ((i / 3) % 3) as i64 - 1, (i % 3) as i64 - 1];
        i += 1;
    }
    s
};

fn density(v: Complex64) -> f64 {
    v.norm_sqr()
}

fn check_thresholds(rhobar: &[f64], final_filter: Option<f64>) -> Result<()> {
    if rhobar.is_empty() {
        return Err(Error::InvalidThreshold("rhobar is empty".into()));
    }
    if let Some(bad) = rhobar.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidThreshold(format!("rhobar entry {bad} is not positive")));
    }
    if rhobar.len() > 12 {
        return Err(Error::InvalidThreshold(format!("{} levels is more than the 12 supported", rhobar.len())));
    }
    if let Some(f) = final_filter {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidThreshold(format!("final filter {f} is not positive")));
        }
    }
    if rhobar.windows(2).any(|w| w[1] > w[0]) {
        log::warn!("rhobar {rhobar:?} is not decreasing");
    }
    Ok(())
}
