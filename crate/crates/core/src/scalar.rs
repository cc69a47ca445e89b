//! One-dimensional search: grid-seeded golden section and bisection.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`, stopping
/// once the bracket is narrower than `tol`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Maximum {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        // ties move right-to-left so the smaller argument survives
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    Maximum { x, value: f(x) }
}

/// Global maximization on `[lo, hi]`: scan a uniform grid with spacing at
/// most `resolution`, then refine around the best grid point. Ties go to the
/// smaller argument.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, resolution: f64, tol: f64) -> Maximum {
    let cells = ((hi - lo) / resolution).ceil().max(1.0) as usize;
    let h = (hi - lo) / cells as f64;
    let mut best = Maximum { x: lo, value: f(lo) };
    for i in 1..=cells {
        let x = if i == cells { hi } else { lo + i as f64 * h };
        let v = f(x);
        if v > best.value {
            best = Maximum { x, value: v };
        }
    }
    let a = (best.x - h).max(lo);
    let b = (best.x + h).min(hi);
    let refined = golden_max(&f, a, b, tol);
    if refined.value > best.value {
        refined
    } else {
        best
    }
}

/// Bisection for a root of `f` on `[lo, hi]`. Stops when `|f| < ftol` or
/// the bracket collapses to adjacent floats.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, ftol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::Bracket {
            lo,
            hi,
            gap_lo: flo,
            gap_hi: fhi,
        });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < ftol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert_relative_eq!(m.x, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn grid_escapes_local_maximum() {
        // local max near 0.2, global max near 0.9
        let f = |x: f64| (-(x - 0.2).powi(2) / 0.002).exp() + 1.5 * (-(x - 0.9).powi(2) / 0.001).exp();
        let m = grid_golden_max(f, 0.0, 1.0, 1e-3, 1e-10);
        assert_relative_eq!(m.x, 0.9, epsilon = 1e-6);
    }

    #[test]
    fn grid_tie_prefers_smaller_argument() {
        let m = grid_golden_max(|_| 1.0, 0.0, 1.0, 0.1, 1e-9);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn bisect_root_and_bracket_error() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::Bracket { .. })
        ));
    }
}
