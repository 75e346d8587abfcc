//! Oracles shared by several test targets.

#![allow(dead_code)]

use fourier3::vortex::PadeProfile;

// Dense polynomials in s, lowest degree first.
fn mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn add(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len().max(q.len())];
    for (i, a) in p.iter().enumerate() {
        out[i] += a;
    }
    for (i, b) in q.iter().enumerate() {
        out[i] += b;
    }
    out
}

fn scale(p: &[f64], k: f64) -> Vec<f64> {
    p.iter().map(|a| a * k).collect()
}

fn deriv(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
}

fn shift(p: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    out.extend_from_slice(p);
    out
}

/// Coefficients in `s = r²` of the ODE residual of `ρ = P/Q`, cleared of
/// denominators: the equation in `s` times `s ρ / 2`, times `Q⁴`.
///
/// With `magnitude` set, every coefficient and every sign is taken positive,
/// giving the scale against which rounding in each coefficient is judged.
pub fn residual_series(p: &PadeProfile, magnitude: bool) -> Vec<f64> {
    let m = |k: f64| if magnitude { k.abs() } else { k };
    let mut num = vec![0.0];
    num.extend(p.a().map(m));
    let mut den = vec![1.0];
    den.extend(p.b().map(m));
    let (np, dp) = (deriv(&num), deriv(&den));
    let (npp, dpp) = (deriv(&np), deriv(&dp));
    // W = P'Q - PQ'.
    let w = add(&mul(&np, &den), &scale(&mul(&num, &dp), m(-1.0)));
    // ρ_ss Q³ = (P''Q - PQ'')Q - 2Q'W.
    let second = add(
        &mul(&add(&mul(&npp, &den), &scale(&mul(&num, &dpp), m(-1.0))), &den),
        &scale(&mul(&dp, &w), m(-2.0)),
    );
    let pq = mul(&num, &den);
    let p2q2 = mul(&pq, &pq);
    let terms = [
        scale(&shift(&mul(&pq, &w), 1), 2.0),
        scale(&shift(&mul(&num, &second), 2), 2.0),
        scale(&shift(&mul(&w, &w), 2), m(-1.0)),
        scale(&p2q2, m(-1.0)),
        shift(&p2q2, 1),
        scale(&shift(&mul(&mul(&num, &num), &mul(&num, &den)), 1), m(-1.0)),
    ];
    terms.iter().fold(vec![0.0], |acc, t| add(&acc, t))
}

/// Finite-difference Newton solution of `f'' + f'/r - f/r² + (1 - f²) f = 0`
/// with `f(0) = 0` and the far-field expansion `f(R) = 1 - 1/(2R²) - 9/(8R⁴)`.
pub fn bvp_amplitude(r_max: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = (r_max / h).round() as usize;
    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let far = 1.0 - 0.5 / (r_max * r_max) - 9.0 / (8.0 * r_max.powi(4));
    let mut f: Vec<f64> = r.iter().map(|&x| x / (2.0 + x * x).sqrt()).collect();
    f[n] = far;
    for _ in 0..50 {
        // Tridiagonal Jacobian on interior points 1..n-1.
        let m = n - 1;
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for k in 0..m {
            let i = k + 1;
            let ri = r[i];
            let g = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h) + (f[i + 1] - f[i - 1]) / (2.0 * h * ri) - f[i] / (ri * ri)
                + (1.0 - f[i] * f[i]) * f[i];
            rhs[k] = -g;
            lo[k] = 1.0 / (h * h) - 1.0 / (2.0 * h * ri);
            up[k] = 1.0 / (h * h) + 1.0 / (2.0 * h * ri);
            di[k] = -2.0 / (h * h) - 1.0 / (ri * ri) + 1.0 - 3.0 * f[i] * f[i];
        }
        // Thomas algorithm.
        for k in 1..m {
            let w = lo[k] / di[k - 1];
            di[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        let mut delta = vec![0.0; m];
        delta[m - 1] = rhs[m - 1] / di[m - 1];
        for k in (0..m - 1).rev() {
            delta[k] = (rhs[k] - up[k] * delta[k + 1]) / di[k];
        }
        let step = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        for k in 0..m {
            f[k + 1] += delta[k];
        }
        if step < 1e-13 {
            break;
        }
    }
    (r, f)
}
