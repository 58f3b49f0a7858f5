//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything is parametrized by the modulus `k` (not the parameter `m = k²`).
//! K and E come from the arithmetic–geometric mean, Π from Carlson's
//! symmetric integrals, and sn/cn/dn from the descending Landen (AGM) scheme.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest modulus accepted; closer to 1 the integrals blow up logarithmically.
pub const MAX_MODULUS: f64 = 1.0 - 1e-10;

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 40;

/// Elliptic modulus `k ∈ [0, 1)` together with `k_c = √(1 − k²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticModulus {
    k: f64,
    kc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(domain(format!("elliptic modulus must lie in [0, 1), got {k}")));
        }
        if k >= 1.0 {
            return Err(domain(format!("K(k) diverges at k = {k} >= 1")));
        }
        if k > MAX_MODULUS {
            return Err(domain(format!("modulus {k} too close to 1 (limit {MAX_MODULUS})")));
        }
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, kc })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kc(&self) -> f64 {
        self.kc
    }

    pub fn complete_k(&self) -> f64 {
        FRAC_PI_2 / agm(1.0, self.kc)
    }

    pub fn complete_e(&self) -> f64 {
        let (mut a, mut b) = (1.0_f64, self.kc);
        let mut c = self.k;
        let mut pow = 0.5; // 2^{n-1}
        let mut sum = pow * c * c;
        for _ in 0..AGM_MAX_ITER {
            if (a - b).abs() <= AGM_TOL * a {
                break;
            }
            c = 0.5 * (a - b);
            let a_next = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = a_next;
            pow *= 2.0;
            sum += pow * c * c;
        }
        FRAC_PI_2 / a * (1.0 - sum)
    }

    /// `Π(α, k) = ∫₀^{π/2} dθ / ((1 − α sin²θ) √(1 − k² sin²θ))` for `α < 1`.
    pub fn complete_pi(&self, alpha: f64) -> Result<f64> {
        if !(alpha.is_finite() && alpha < 1.0) {
            return Err(domain(format!("Π(α, k) needs α < 1, got α = {alpha}")));
        }
        let y = self.kc * self.kc;
        Ok(carlson_rf(0.0, y, 1.0) + alpha / 3.0 * carlson_rj(0.0, y, 1.0, 1.0 - alpha))
    }

    pub fn dk_dk(&self) -> f64 {
        let k = self.k;
        if k == 0.0 {
            return 0.0;
        }
        let k2c = self.kc * self.kc;
        if k < 1e-4 {
            // K = π/2 (1 + k²/4 + 9k⁴/64 + …)
            return FRAC_PI_2 * (0.5 * k + 9.0 / 16.0 * k.powi(3));
        }
        (self.complete_e() - k2c * self.complete_k()) / (k * k2c)
    }

    pub fn de_dk(&self) -> f64 {
        let k = self.k;
        if k == 0.0 {
            return 0.0;
        }
        if k < 1e-4 {
            // E = π/2 (1 − k²/4 − 3k⁴/64 − …)
            return -FRAC_PI_2 * (0.5 * k + 3.0 / 16.0 * k.powi(3));
        }
        (self.complete_e() - self.complete_k()) / k
    }

    /// `(sn, cn, dn)(u, k)`.
    pub fn jacobi(&self, u: f64) -> Jacobi {
        if self.k == 0.0 {
            return Jacobi { sn: u.sin(), cn: u.cos(), dn: 1.0 };
        }
        // sn, cn have period 4K
        let period = 4.0 * self.complete_k();
        let u = u - period * (u / period).round();

        let mut a = [0.0_f64; AGM_MAX_ITER + 1];
        let mut c = [0.0_f64; AGM_MAX_ITER + 1];
        a[0] = 1.0;
        c[0] = self.k;
        let mut b = self.kc;
        let mut n = 0;
        while n < AGM_MAX_ITER && (c[n]).abs() > AGM_TOL * a[n] {
            a[n + 1] = 0.5 * (a[n] + b);
            c[n + 1] = 0.5 * (a[n] - b);
            b = (a[n] * b).sqrt();
            n += 1;
        }
        let mut phi = (1u64 << n) as f64 * a[n] * u;
        for j in (1..=n).rev() {
            phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
        }
        let (sn, cn) = phi.sin_cos();
        // k_c² + k²cn² avoids the 0/0 of the Landen quotient near u = K
        let dn = (self.kc * self.kc + self.k * self.k * cn * cn).sqrt();
        Jacobi { sn, cn, dn }
    }
}

pub fn complete_k(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.complete_k())
}

pub fn complete_e(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.complete_e())
}

pub fn complete_pi(alpha: f64, k: f64) -> Result<f64> {
    EllipticModulus::new(k)?.complete_pi(alpha)
}

pub fn dk_dk(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.dk_dk())
}

pub fn de_dk(k: f64) -> Result<f64> {
    Ok(EllipticModulus::new(k)?.de_dk())
}

pub fn jacobi(u: f64, k: f64) -> Result<Jacobi> {
    Ok(EllipticModulus::new(k)?.jacobi(u))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// Carlson's `R_F(x, y, z)` by the duplication theorem; at most one argument may vanish.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (x0, y0) = (x, y);
    let a0 = (x + y + z) / 3.0;
    let q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let (mut x, mut y, mut z, mut a) = (x, y, z, a0);
    let mut pow4 = 1.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xs = (a0 - x0) * pow4 / a;
    let ys = (a0 - y0) * pow4 / a;
    let zs = -xs - ys;
    let e2 = xs * ys - zs * zs;
    let e3 = xs * ys * zs;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// Carlson's `R_J(x, y, z, p)` for `p > 0`.
pub fn carlson_rj(x: f64, y: f64, z: f64, p: f64) -> f64 {
    let a0 = (x + y + z + 2.0 * p) / 5.0;
    let delta = (p - x) * (p - y) * (p - z);
    let q = (0.25 * f64::EPSILON).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs()).max((a0 - p).abs());
    let (mut xm, mut ym, mut zm, mut pm, mut a) = (x, y, z, p, a0);
    let mut pow4 = 1.0;
    let mut sum = 0.0;
    while pow4 * q >= a.abs() {
        let (sx, sy, sz, sp) = (xm.sqrt(), ym.sqrt(), zm.sqrt(), pm.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        let d = (sp + sx) * (sp + sy) * (sp + sz);
        let e = pow4.powi(3) * delta / (d * d);
        sum += pow4 * rc_one_plus(e) / d;
        xm = 0.25 * (xm + lambda);
        ym = 0.25 * (ym + lambda);
        zm = 0.25 * (zm + lambda);
        pm = 0.25 * (pm + lambda);
        a = 0.25 * (a + lambda);
        pow4 *= 0.25;
    }
    let xs = (a0 - x) * pow4 / a;
    let ys = (a0 - y) * pow4 / a;
    let zs = (a0 - z) * pow4 / a;
    let ps = -0.5 * (xs + ys + zs);
    let e2 = xs * ys + xs * zs + ys * zs - 3.0 * ps * ps;
    let e3 = xs * ys * zs + 2.0 * e2 * ps + 4.0 * ps.powi(3);
    let e4 = (2.0 * xs * ys * zs + e2 * ps + 3.0 * ps.powi(3)) * ps;
    let e5 = xs * ys * zs * ps * ps;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    pow4 * series / (a * a.sqrt()) + 6.0 * sum
}

/// `R_C(1, 1 + e)` for `e > −1`, stable as `e → 0`.
fn rc_one_plus(e: f64) -> f64 {
    if e.abs() < 1e-12 {
        1.0 - e / 3.0
    } else if e > 0.0 {
        let s = e.sqrt();
        s.atan() / s
    } else {
        let s = (-e).sqrt();
        s.atanh() / s
    }
}
