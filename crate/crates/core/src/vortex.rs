//! Vortex initial conditions.
//!
//! The density `ρ(r)` of a straight vortex solves
//!
//! ```text
//! ρ'' + ρ'/r - (ρ')²/(2ρ) - 2ρ/r² + 2(1 - ρ)ρ = 0,   ρ(0) = 0, ρ(∞) = 1
//! ```
//!
//! and is approximated by the diagonal Padé form in `s = r²`
//!
//! ```text
//! ρ_4(r) = (a1 s + a2 s² + a3 s³ + a4 s⁴) / (1 + b1 s + b2 s² + b3 s³ + b4 s⁴).
//! ```
//!
//! Writing the equation in `s` and multiplying by `sρ/2` gives
//!
//! ```text
//! 2sρρ_s + 2s²ρρ_ss - s²ρ_s² - ρ² + sρ² - sρ³ = 0,
//! ```
//!
//! whose power series solution `ρ = Σ_{n≥1} c_n s^n` is fixed by `c1`. The
//! Padé form matching `c1..c8` nullifies the leading residual coefficients;
//! `c1 = a1` is then chosen so that `a4 = b4`, which makes `ρ_4(∞) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fourier::{DomainBox, GridSize, PhysicalField};

const ORDER: usize = 4;

/// Coefficients of `ρ_4`; `a[i]` multiplies `r^(2i + 2)`, as does `b[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PadeProfile {
    a: [f64; ORDER],
    b: [f64; ORDER],
}

impl PadeProfile {
    pub fn a(&self) -> [f64; ORDER] {
        self.a
    }

    pub fn b(&self) -> [f64; ORDER] {
        self.b
    }

    pub fn order(&self) -> usize {
        ORDER
    }

    /// `ρ_4(r)`. For `r > 1` numerator and denominator are divided by `r^8`.
    pub fn eval(&self, r: f64) -> f64 {
        let s = r * r;
        if r <= 1.0 {
            let num = s * (self.a[0] + s * (self.a[1] + s * (self.a[2] + s * self.a[3])));
            let den = 1.0 + s * (self.b[0] + s * (self.b[1] + s * (self.b[2] + s * self.b[3])));
            num / den
        } else {
            let t = 1.0 / s;
            let num = self.a[3] + t * (self.a[2] + t * (self.a[1] + t * self.a[0]));
            let den = self.b[3] + t * (self.b[2] + t * (self.b[1] + t * (self.b[0] + t)));
            num / den
        }
    }
}

/// Taylor coefficients `c_1..c_{len}` of the series solution with `c_1` given.
fn series(c1: f64, len: usize) -> Vec<f64> {
    // c[0] is the (zero) constant term.
    let mut c = vec![0.0; len + 1];
    c[1] = c1;
    for m in 2..=len {
        let n = m + 1;
        let mut rest = 0.0;
        for i in 2..m {
            let j = n - i;
            let (fi, fj) = (i as f64, j as f64);
            rest += c[i] * c[j] * (fi * fi + fj * fj - fi * fj - 1.0);
        }
        for i in 1..n - 1 {
            rest += c[i] * c[n - 1 - i];
        }
        for i in 1..n - 1 {
            for j in 1..n - 1 - i {
                rest -= c[i] * c[j] * c[n - 1 - i - j];
            }
        }
        c[m] = -rest / (2.0 * c1 * (m * (m - 1)) as f64);
    }
    c
}

/// Solves the 4x4 system by Gaussian elimination with partial pivoting;
/// also returns the determinant.
fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> Option<([f64; 4], f64)> {
    let mut det = 1.0;
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col] == 0.0 {
            return None;
        }
        if pivot != col {
            det = -det;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        det *= m[col][col];
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some((x, det))
}

/// The Padé form matching the series through `s^8`, for a given `a1`, and
/// the determinant of the Hankel system for `b`.
fn pade_for(a1: f64) -> Option<(PadeProfile, f64)> {
    let c = series(a1, 2 * ORDER);
    // Σ_{i=1..4} b_i c_{n-i} = -c_n for n = 5..8.
    let mut m = [[0.0; 4]; 4];
    let mut rhs = [0.0; 4];
    for (row, n) in (ORDER + 1..=2 * ORDER).enumerate() {
        for i in 1..=ORDER {
            m[row][i - 1] = c[n - i];
        }
        rhs[row] = -c[n];
    }
    let (b, det) = solve4(m, rhs)?;
    let mut a = [0.0; ORDER];
    for n in 1..=ORDER {
        a[n - 1] = c[n] + (1..n).map(|i| b[i - 1] * c[n - i]).sum::<f64>();
    }
    Some((PadeProfile { a, b }, det))
}

/// The same construction in exact rational arithmetic at the binary value
/// of `a1`, rounded to double at the end. The Hankel system is badly
/// conditioned next to the root, so the double-precision solve loses about
/// six digits; this one loses none.
fn exact_pade(a1: f64) -> Option<PadeProfile> {
    let q = |k: i64| BigRational::from_i64(k).expect("integer");
    let x = BigRational::from_float(a1)?;
    let mut c = vec![BigRational::zero(); 2 * ORDER + 1];
    c[1] = x.clone();
    for m in 2..=2 * ORDER {
        let n = m + 1;
        let mut rest = BigRational::zero();
        for i in 2..m {
            let j = n - i;
            let w = q((i * i + j * j) as i64 - (i * j) as i64 - 1);
            rest += &c[i] * &c[j] * w;
        }
        for i in 1..n - 1 {
            rest += &c[i] * &c[n - 1 - i];
        }
        for i in 1..n - 1 {
            for j in 1..n - 1 - i {
                rest -= &c[i] * &c[j] * &c[n - 1 - i - j];
            }
        }
        c[m] = -rest / (&x * q((2 * m * (m - 1)) as i64));
    }
    let mut m: Vec<Vec<BigRational>> = (ORDER + 1..=2 * ORDER)
        .map(|n| (1..=ORDER).map(|i| c[n - i].clone()).collect())
        .collect();
    let mut rhs: Vec<BigRational> = (ORDER + 1..=2 * ORDER).map(|n| -c[n].clone()).collect();
    for col in 0..ORDER {
        let pivot = (col..ORDER).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..ORDER {
            let f = &m[row][col] / &m[col][col];
            for k in col..ORDER {
                let v = &f * &m[col][k];
                m[row][k] -= v;
            }
            let v = &f * &rhs[col];
            rhs[row] -= v;
        }
    }
    let mut b = vec![BigRational::zero(); ORDER];
    for row in (0..ORDER).rev() {
        let tail = (row + 1..ORDER).fold(BigRational::zero(), |acc, k| acc + &m[row][k] * &b[k]);
        b[row] = (&rhs[row] - tail) / &m[row][row];
    }
    let mut out = PadeProfile { a: [0.0; ORDER], b: [0.0; ORDER] };
    for n in 1..=ORDER {
        let a_n = (1..n).fold(c[n].clone(), |acc, i| acc + &b[i - 1] * &c[n - i]);
        out.a[n - 1] = a_n.to_f64()?;
        out.b[n - 1] = b[n - 1].to_f64()?;
    }
    Some(out)
}

/// `(a4 - b4) det`: the determinant clears the poles of `a4 - b4`, so a
/// root lying next to a pole still shows up as a sign change.
fn cleared_mismatch(a1: f64) -> f64 {
    pade_for(a1).map_or(f64::NAN, |(p, det)| (p.a[3] - p.b[3]) * det)
}

/// Monotone increasing on `(0, 20]`, bounded in `(0, 1)`, with a positive
/// denominator.
fn is_physical(p: &PadeProfile) -> bool {
    let mut prev = 0.0;
    for i in 1..=10_000 {
        let r = 20.0 * i as f64 / 10_000.0;
        let s = r * r;
        let den = 1.0 + s * (p.b[0] + s * (p.b[1] + s * (p.b[2] + s * p.b[3])));
        let v = p.eval(r);
        if den <= 0.0 || !(v > prev && v < 1.0) {
            return false;
        }
        prev = v;
    }
    true
}

/// Coefficients of the diagonal Padé profile of order `q`; only `q = 4`.
///
/// `a1` is found by scanning `(0, 1]` for sign changes of `a4 - b4` (with
/// its poles cleared), refining each by bisection and keeping the roots
/// whose profile is physical. Exactly one such root must exist. At the root
/// `a4` and `b4` agree to rounding; `a4` is then set to `b4` so that
/// `ρ_4(∞) = 1` holds exactly.
pub fn pade_coefficients(q: usize) -> Result<PadeProfile> {
    if q != ORDER {
        return Err(Error::UnsupportedPadeOrder(q));
    }
    const SCAN: usize = 4000;
    let mut candidates = Vec::new();
    let mut roots = Vec::new();
    let mut prev = (1e-3, cleared_mismatch(1e-3));
    for i in 1..=SCAN {
        let x = 1e-3 + (1.0 - 1e-3) * i as f64 / SCAN as f64;
        let cur = (x, cleared_mismatch(x));
        if prev.1.is_finite() && cur.1.is_finite() && prev.1.signum() != cur.1.signum() {
            let (mut lo, mut hi) = (prev.0, cur.0);
            let lo_sign = prev.1.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if cleared_mismatch(mid).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = if cleared_mismatch(lo).abs() <= cleared_mismatch(hi).abs() { lo } else { hi };
            if let Some(mut p) = exact_pade(root) {
                if (p.a[3] - p.b[3]).abs() <= 1e-10 * p.b[3].abs() {
                    candidates.push(root);
                    p.a[3] = p.b[3];
                    if is_physical(&p) {
                        roots.push(p);
                    }
                }
            }
        }
        prev = cur;
    }
    match roots.as_slice() {
        [p] => Ok(*p),
        _ => Err(Error::PadeRoot(format!(
            "{} physical roots among candidates a1 = {candidates:?}",
            roots.len()
        ))),
    }
}

/// `ρ_4(r)`.
pub fn pade_eval(profile: &PadeProfile, r: f64) -> f64 {
    profile.eval(r)
}

/// `sqrt(ρ(r)) exp(i charge atan2(s2, s1))`, zero at the core.
pub fn vortex2d(s1: f64, s2: f64, profile: &PadeProfile, charge: i32) -> Complex64 {
    let r = s1.hypot(s2);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // Adding 0.0 turns -0.0 into +0.0, so the cut of atan2 does not depend
    // on the sign of a zero coordinate.
    Complex64::from_polar(profile.eval(r).sqrt(), charge as f64 * (s2 + 0.0).atan2(s1))
}

/// A straight vortex line: a point on it, its unit direction and its
/// circulation sign (circulation `2π charge`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexSpec {
    point: [f64; 3],
    direction: [f64; 3],
    charge: i32,
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn normalized(u: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(u, u).sqrt();
    (n > 0.0 && n.is_finite()).then(|| u.map(|x| x / n))
}

impl VortexSpec {
    /// Normalizes `direction`; `charge` must be `1` or `-1`.
    pub fn new(point: [f64; 3], direction: [f64; 3], charge: i32) -> Result<Self> {
        let direction = normalized(direction).ok_or(Error::ZeroDirection)?;
        if charge != 1 && charge != -1 {
            return Err(Error::InvalidConfig(format!("vortex charge {charge} must be 1 or -1")));
        }
        Ok(Self {
            point,
            direction,
            charge,
        })
    }

    pub fn point(&self) -> [f64; 3] {
        self.point
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn charge(&self) -> i32 {
        self.charge
    }

    /// Transverse frame `(u1, u2)`: `u1 = direction × e` normalized, with `e`
    /// the coordinate axis least aligned with the direction (lowest index on
    /// ties), and `u2 = direction × u1`.
    pub fn frame(&self) -> ([f64; 3], [f64; 3]) {
        let d = self.direction;
        let axis = (0..3)
            .min_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()))
            .expect("three axes");
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let u1 = normalized(cross(d, e)).expect("e is not parallel to the direction");
        (u1, cross(d, u1))
    }

    /// Wave function of this vortex alone at `x`.
    pub fn value(&self, x: [f64; 3], profile: &PadeProfile) -> Complex64 {
        let (u1, u2) = self.frame();
        let w = [0, 1, 2].map(|i| x[i] - self.point[i]);
        vortex2d(dot(w, u1), dot(w, u2), profile, self.charge)
    }
}

/// The extruded two-dimensional vortex sampled on the regular grid of a box.
pub fn straight_vortex(domain: &DomainBox, size: GridSize, vortex: &VortexSpec, profile: &PadeProfile) -> PhysicalField {
    PhysicalField::from_fn(*domain, size, |x| vortex.value(x, profile))
}

/// Pointwise product of fields on one grid.
pub fn superimpose(fields: &[PhysicalField]) -> Result<PhysicalField> {
    let (first, rest) = fields
        .split_first()
        .ok_or_else(|| Error::InvalidConfig("nothing to superimpose".into()))?;
    let mut out = first.clone();
    for f in rest {
        if f.size() != first.size() || f.domain() != first.domain() {
            return Err(Error::ShapeMismatch {
                expected: first.size().dims(),
                found: f.size().dims(),
            });
        }
        *out.values_mut() *= f.values();
    }
    Ok(out)
}

/// Product of straight vortices on the grid, or `ψ ≡ 1` for an empty list.
pub fn initial_condition(domain: &DomainBox, size: GridSize, vortices: &[VortexSpec], profile: &PadeProfile) -> PhysicalField {
    PhysicalField::from_fn(*domain, size, |x| {
        vortices
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, v| acc * v.value(x, profile))
    })
}

/// Phase winding of `f` around a circle, in units of `2π`.
#[doc(hidden)]
pub fn winding_number(f: impl Fn(f64, f64) -> Complex64, radius: f64, samples: usize) -> f64 {
    let mut total = 0.0;
    let mut prev = f(radius, 0.0).arg();
    for i in 1..=samples {
        let th = 2.0 * PI * i as f64 / samples as f64;
        let cur = f(radius * th.cos(), radius * th.sin()).arg();
        let mut d = cur - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        total += d;
        prev = cur;
    }
    total / (2.0 * PI)
}
