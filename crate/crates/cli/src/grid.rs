//! Target grids for `eval-grid`.
//!
//! | spec                                        | grid                                   |
//! |---------------------------------------------|----------------------------------------|
//! | `equispaced M1 M2 M3 a1 b1 a2 b2 a3 b3`     | `M_d` points on `[a_d, b_d]`, ends included |
//! | `clustered M1 M2 M3 a1 b1 a2 b2 a3 b3 [c]`  | sinh-stretched towards each midpoint, `c = 2` by default |
//! | `computational`                             | the periodic computational sample grid |
//! | `physical`                                  | the stored samples                     |
//! | `file PATH`                                 | three lines of coordinates, one per axis |
//!
//! Tokens may be separated by spaces or commas.

use std::path::Path;

use fourier3::fourier::regular_grid;
use fourier3::rectilinear::RectilinearGrid;
use fourier3::snapshot::{sf2psihat, Snapshot};

use crate::error::{CliError, Result};

pub const DEFAULT_CLUSTERING: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Equispaced { dims: [usize; 3], bounds: [[f64; 2]; 3] },
    Clustered { dims: [usize; 3], bounds: [[f64; 2]; 3], c: f64 },
    Computational,
    Physical,
    Lists([Vec<f64>; 3]),
}

impl GridSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let tokens: Vec<&str> = spec.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        let Some((&kind, rest)) = tokens.split_first() else {
            return Err(CliError::Grid("empty grid spec".into()));
        };
        match kind {
            "equispaced" | "clustered" => {
                let max = if kind == "clustered" { 10 } else { 9 };
                if rest.len() != 9 && rest.len() != max {
                    return Err(CliError::Grid(format!("`{kind}` takes {max} values, found {}", rest.len())));
                }
                let mut dims = [0usize; 3];
                for (d, t) in dims.iter_mut().zip(rest) {
                    *d = t.parse().map_err(|_| CliError::Grid(format!("bad point count `{t}`")))?;
                }
                let v = rest[3..]
                    .iter()
                    .map(|t| t.parse::<f64>().map_err(|_| CliError::Grid(format!("bad number `{t}`"))))
                    .collect::<Result<Vec<f64>>>()?;
                let bounds = [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]];
                if bounds.iter().any(|b| !(b[0] <= b[1])) {
                    return Err(CliError::Grid(format!("bounds {bounds:?} must satisfy lo <= hi")));
                }
                if kind == "equispaced" {
                    Ok(GridSpec::Equispaced { dims, bounds })
                } else {
                    let c = v.get(6).copied().unwrap_or(DEFAULT_CLUSTERING);
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(CliError::Grid(format!("clustering parameter {c} must be positive")));
                    }
                    Ok(GridSpec::Clustered { dims, bounds, c })
                }
            }
            "computational" | "physical" if rest.is_empty() => Ok(if kind == "computational" {
                GridSpec::Computational
            } else {
                GridSpec::Physical
            }),
            "file" if rest.len() == 1 => read_lists(Path::new(rest[0])),
            _ => Err(CliError::Grid(format!("unrecognized grid spec `{spec}`"))),
        }
    }

    /// Coordinates for a given snapshot. Whether they lie inside the
    /// computational box is checked by the evaluator.
    pub fn resolve(&self, snap: &Snapshot) -> RectilinearGrid {
        match self {
            GridSpec::Equispaced { dims, bounds } => {
                RectilinearGrid::new(std::array::from_fn(|d| RectilinearGrid::linspace(bounds[d][0], bounds[d][1], dims[d])))
            }
            GridSpec::Clustered { dims, bounds, c } => RectilinearGrid::new(std::array::from_fn(|d| {
                RectilinearGrid::clustered(bounds[d][0], bounds[d][1], dims[d], *c)
            })),
            GridSpec::Computational => {
                let spec = sf2psihat(snap);
                RectilinearGrid::new(regular_grid(spec.domain(), &spec.size()))
            }
            GridSpec::Physical => RectilinearGrid::new(regular_grid(snap.domain(), &snap.size())),
            GridSpec::Lists(axes) => RectilinearGrid::new(axes.clone()),
        }
    }
}

fn read_lists(path: &Path) -> Result<GridSpec> {
    let text = std::fs::read_to_string(path).map_err(CliError::file(path))?;
    let lines: Vec<&str> = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).collect();
    if lines.len() != 3 {
        return Err(CliError::Grid(format!("{}: expected 3 coordinate lines, found {}", path.display(), lines.len())));
    }
    let mut axes: [Vec<f64>; 3] = Default::default();
    for (axis, line) in axes.iter_mut().zip(lines) {
        *axis = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| CliError::Grid(format!("{}: bad number `{t}`", path.display()))))
            .collect::<Result<_>>()?;
    }
    Ok(GridSpec::Lists(axes))
}

/// Whether `y` is equispaced to within roundoff, as needed for structured
/// VTK output.
pub fn is_equispaced(y: &[f64]) -> bool {
    if y.len() < 3 {
        return true;
    }
    let n = y.len() - 1;
    let (lo, hi) = (y[0], y[n]);
    let tol = 1e-12 * (hi - lo).abs().max(f64::MIN_POSITIVE);
    y.iter().enumerate().all(|(i, &v)| (v - (lo + (hi - lo) * i as f64 / n as f64)).abs() <= tol)
}
