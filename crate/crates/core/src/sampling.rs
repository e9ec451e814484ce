//! Deterministic sampling helpers.

use crate::scalar::{Real, Vector};

pub fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Point `i` of the Halton sequence in `[0,1)^dim`, skipping the origin.
pub fn halton(i: usize, dim: usize) -> Vec<f64> {
    (0..dim).map(|d| radical_inverse(i + 1, PRIMES[d % PRIMES.len()])).collect()
}

/// `count` points in the Euclidean ball of radius `radius` about `center`,
/// the center first.
pub fn ball_points<T: Real>(center: &[T], radius: T, count: usize) -> Vec<Vector<T>> {
    let n = center.len();
    let mut out = vec![center.iter().copied().collect::<Vector<T>>()];
    let mut i = 0;
    while out.len() < count.max(1) {
        let h = halton(i, n);
        i += 1;
        let p: Vec<f64> = h.iter().map(|v| 2.0 * v - 1.0).collect();
        if p.iter().map(|v| v * v).sum::<f64>() > 1.0 {
            continue;
        }
        out.push(
            center
                .iter()
                .zip(&p)
                .map(|(&c, &v)| c + radius * T::lit(v))
                .collect(),
        );
    }
    out
}

/// Unit directions: equally spaced angles for `n = 2`, normalised Halton
/// points otherwise.
pub fn directions<T: Real>(n: usize, count: usize) -> Vec<Vector<T>> {
    if n == 2 {
        return (0..count)
            .map(|j| {
                let t = T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(count);
                smallvec::smallvec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let h = halton(i, n);
        i += 1;
        let p: Vec<f64> = h.iter().map(|v| 2.0 * v - 1.0).collect();
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(0.05..=1.0).contains(&r) {
            continue;
        }
        out.push(p.iter().map(|v| T::lit(v / r)).collect());
    }
    out
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|t: f64| -(t - 0.3) * (t - 0.3), -1.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-7 && v.abs() < 1e-12);
    }

    #[test]
    fn ball_points_stay_inside() {
        let pts = ball_points(&[1.0_f64, 2.0], 0.5, 20);
        assert_eq!(pts.len(), 20);
        for p in pts {
            assert!(((p[0] - 1.0).powi(2) + (p[1] - 2.0).powi(2)).sqrt() <= 0.5 + 1e-12);
        }
    }
}
