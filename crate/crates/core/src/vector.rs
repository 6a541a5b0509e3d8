//! Dense complex vector helpers. Real problems embed with zero imaginary parts.

use num_complex::Complex64;

pub fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

pub fn from_real(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn real_parts(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|z| z.re).collect()
}

/// Real inner product `Re⟨x, y⟩ = Re Σ conj(xᵢ) yᵢ`.
pub fn dot_re(x: &[Complex64], y: &[Complex64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

pub fn norm2_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    norm2_sqr(x).sqrt()
}

/// `|z|` without the overflow guard of `hypot`, which is several times
/// slower. Exact for real inputs away from under- and overflow.
#[inline]
pub fn abs(z: Complex64) -> f64 {
    z.norm_sqr().sqrt()
}

pub fn norm1(x: &[Complex64]) -> f64 {
    x.iter().map(|&z| abs(z)).sum()
}

pub fn dist2(x: &[Complex64], y: &[Complex64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn scale(alpha: f64, x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|z| z * alpha).collect()
}

/// `y ← y + alpha·x`
pub fn axpy(alpha: f64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}

/// `alpha·x + beta·y`
pub fn combine(alpha: f64, x: &[Complex64], beta: f64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a * alpha + b * beta).collect()
}

pub fn all_finite(x: &[Complex64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
