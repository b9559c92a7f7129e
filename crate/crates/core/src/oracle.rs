//! Reference computations that avoid the closed forms used elsewhere:
//! numerical quadrature and digit-level simulation. Used by tests and by
//! `verify-lemmas` to cross-check the exact paths.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::approxfn::{chi_eval, Approximant, TrapezoidSpec};
use crate::error::{LabError, Result};
use crate::lattice::DEFAULT_ENUMERATION_CAP;

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// `(∫f, ∫|f|)` on one panel.
fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (x, w) = gl16();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let (mut v, mut abs) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let fx = f(c + h * xi);
        v += wi * fx;
        abs += wi * fx.abs();
    }
    (v * h, abs * h)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, left_abs) = gl_panel(f, a, m);
    let (right, right_abs) = gl_panel(f, m, b);
    let refined = left + right;
    // never ask for more than rounding allows
    let floor = 16.0 * f64::EPSILON * (left_abs + right_abs);
    if depth == 0 || (refined - whole).abs() <= tol.max(floor) {
        return refined;
    }
    adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive 16-point Gauss–Legendre over consecutive breakpoints.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], tol: f64) -> f64 {
    breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive(f, w[0], w[1], gl_panel(f, w[0], w[1]).0, tol, 40))
        .sum()
}

/// `∫ X±(x) e(−kx) dx` by adaptive quadrature over the kinks of `X±`.
pub fn trapezoid_fourier_quadrature(spec: &TrapezoidSpec, k: f64) -> f64 {
    let (p, s) = (spec.plateau(), spec.support());
    // the imaginary part vanishes by symmetry; integrate the cosine part
    let f = |x: f64| chi_eval(spec, x) * (2.0 * PI * k * x).cos();
    // split so each panel holds at most half an oscillation; bisection on
    // long oscillatory panels otherwise chases argument rounding
    let mut cuts = vec![-s];
    for (a, b) in [(-s, -p), (-p, p), (p, s)] {
        let n = ((b - a) * (2.0 * k.abs() + 1.0)).ceil().max(1.0) as usize;
        cuts.extend((1..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }));
    }
    integrate_adaptive(&f, &cuts, 1e-15)
}

/// Tensor quadrature of `∫_{[0,1)ᵈ} h±(x) w(x) dx` for a `Zᵈ`-periodic
/// weight `w`, via `u = Ax − y − m`:
///
/// `∫ h w = |det A|⁻¹ Σ_{p ∈ 𝒫} ∫ X(u) w(A⁻¹(u + y + p)) du`.
///
/// `panels` Gauss–Legendre panels are used on each linear piece of `X`.
pub fn pairing_quadrature(
    h: &Approximant,
    weight: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    panels: usize,
) -> Result<Complex64> {
    let d = h.dim();
    if d > 3 {
        return Err(LabError::UnsupportedDimension(d));
    }
    let a = h.lattice().generator();
    let inv = a.inverse_rational()?.to_f64();
    let reps = h.lattice().coset_reps(DEFAULT_ENUMERATION_CAP)?;
    let y = h.center().to_f64();
    let shifts: Vec<Vec<f64>> = reps
        .reps
        .iter()
        .map(|p| {
            let v: Vec<f64> = (0..d).map(|i| y[i] + p[i].to_f64().unwrap()).collect();
            (0..d).map(|i| (0..d).map(|j| inv[i * d + j] * v[j]).sum()).collect()
        })
        .collect();
    let (gx, gw) = gl16();
    // 1D rules per coordinate with X folded into the weights
    let rules: Vec<Vec<(f64, f64)>> = h
        .specs()
        .iter()
        .map(|spec| {
            let (p, s) = (spec.plateau(), spec.support());
            let mut out = Vec::new();
            for w in [-s, -p, p, s].windows(2).filter(|w| w[1] > w[0]) {
                let len = (w[1] - w[0]) / panels as f64;
                for j in 0..panels {
                    let (lo, hi) = (w[0] + j as f64 * len, w[0] + (j + 1) as f64 * len);
                    let (c, hh) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                    for (xi, wi) in gx.iter().zip(gw) {
                        let u = c + hh * xi;
                        out.push((u, wi * hh * chi_eval(spec, u)));
                    }
                }
            }
            out
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut total = Complex64::new(0.0, 0.0);
    let mut x = vec![0.0; d];
    loop {
        let mut wprod = 1.0;
        let mut u = [0.0f64; 3];
        for i in 0..d {
            let (ui, wi) = rules[i][idx[i]];
            u[i] = ui;
            wprod *= wi;
        }
        if wprod != 0.0 {
            let base: Vec<f64> = (0..d).map(|i| (0..d).map(|j| inv[i * d + j] * u[j]).sum()).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for sh in &shifts {
                for i in 0..d {
                    x[i] = base[i] + sh[i];
                }
                acc += weight(&x);
            }
            total += acc * wprod;
        }
        let mut i = 0;
        loop {
            if i == d {
                let det = a.determinant().to_f64().unwrap().abs();
                return Ok(total / det);
            }
            idx[i] += 1;
            if idx[i] < rules[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `ĥ±(k)` by quadrature against `e(−⟨k,x⟩)`.
pub fn h_fourier_quadrature(h: &Approximant, k: &[BigInt], panels: usize) -> Result<Complex64> {
    let kf: Vec<f64> = k.iter().map(|v| v.to_f64().unwrap()).collect();
    let w = move |x: &[f64]| {
        let phase: f64 = kf.iter().zip(x).map(|(a, b)| a * b).sum();
        Complex64::from_polar(1.0, -2.0 * PI * phase)
    };
    pairing_quadrature(h, &w, panels)
}

/// `(1/N) Σ_{n=1}^{N} e(−3ⁿx)` computed from the ternary digits of `x`
/// (`digits[0]` is the first digit after the point): `3ⁿx mod 1` is the
/// digit string shifted by `n`, truncated after 40 digits.
pub fn ternary_shift_weyl(digits: &[u8], terms: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=terms {
        let mut v = 0.0;
        for &dg in digits.iter().skip(n).take(40).rev() {
            v = (v + dg as f64) / 3.0;
        }
        acc += Complex64::from_polar(1.0, -2.0 * PI * v);
    }
    acc / terms as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(16);
        for p in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "p={p}");
        }
        let (_, w5) = gauss_legendre(5);
        assert!((w5.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = integrate_adaptive(&|x: f64| (40.0 * x).cos(), &[0.0, 3.0], 1e-14);
        assert!((v - (120.0f64).sin() / 40.0).abs() < 1e-13);
    }
}
