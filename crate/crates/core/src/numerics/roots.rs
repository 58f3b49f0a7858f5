use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method: inverse quadratic / secant steps safeguarded by bisection.
///
/// Requires `f(lo)` and `f(hi)` of opposite sign (an exact zero at either end
/// is returned as is). The returned point always lies inside `[lo, hi]`, and
/// the final bracket has width at most `tol` (plus a few ulps of the root).
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = eval(&mut f, a)?;
    let mut fb = eval(&mut f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(&mut f, b)?;
    }
    Err(Error::Numerical(format!("root finder did not converge near {b}")))
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("f({x}) = {v} is not finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_two() {
        let x = find_root_bracketed(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn odd_power_root() {
        let x = find_root_bracketed(|x| x * x * x, -1.0, 2.0, 1e-10).unwrap();
        assert!(x.abs() < 1e-3, "x = {x}");
        let fx = x * x * x;
        assert!(fx.abs() < 1e-9);
    }

    #[test]
    fn no_sign_change() {
        let err = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn non_finite_is_domain_error() {
        let err = find_root_bracketed(|x: f64| (x - 0.3).ln(), 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn reversed_bracket_ok() {
        let x = find_root_bracketed(|x| x - 0.25, 1.0, 0.0, 1e-14).unwrap();
        assert!((x - 0.25).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn stays_inside_bracket(shift in -5.0f64..5.0, lo in -10.0f64..-6.0, hi in 6.0f64..10.0) {
            let x = find_root_bracketed(|x| (x - shift).powi(3) + 0.1 * (x - shift), lo, hi, 1e-12).unwrap();
            prop_assert!(x >= lo && x <= hi);
            prop_assert!((x - shift).abs() < 1e-9);
        }
    }
}
