//! Special functions not covered by `puruspe`: complete elliptic integrals
//! in complementary-parameter form, the cosine integral, and the cylindrical
//! Bessel products that appear in the spectral Green function.

use std::f64::consts::PI;

use num_complex::Complex64;
use puruspe::{In, Jn, Kn, Yn};

/// Complete elliptic integrals K(m) and E(m) by the arithmetic–geometric
/// mean. The complementary parameter `p1 = 1 − m` is passed separately so
/// that the logarithmic blow-up near m = 1 keeps full relative accuracy.
pub fn ellip_ke(m: f64, p1: f64) -> (f64, f64) {
    debug_assert!((0.0..=1.0).contains(&m) && p1 > 0.0);
    let mut a = 1.0_f64;
    let mut b = p1.sqrt();
    let mut c = m.sqrt();
    let mut c2_sum = 0.5 * m;
    let mut pow2 = 0.5;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        // c_{n+1} = c_n² / 4a_{n+1} avoids the cancellation in (a − b)/2.
        c = 0.25 * c * c / an;
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        c2_sum += pow2 * c * c;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - c2_sum))
}

/// Cosine and sine integrals `(Ci(x), Si(x))` for `x > 0`.
///
/// Power series below 2, Lentz continued fraction for E₁(ix) above.
pub fn cisi(x: f64) -> (f64, f64) {
    const EULER: f64 = 0.577_215_664_901_532_9;
    assert!(x > 0.0, "cisi needs a positive argument");
    if x > 2.0 {
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / f64::MIN_POSITIVE.sqrt(), 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..200 {
            let a = -((i - 1) * (i - 1)) as f64;
            b += 2.0;
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (-h.re, 0.5 * PI + h.im)
    } else {
        let x2 = x * x;
        let mut sum_c = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            let n = 2 * k;
            term *= -x2 / ((n - 1) * n) as f64;
            let t = term / n as f64;
            sum_c += t;
            if t.abs() < 1e-18 {
                break;
            }
        }
        let mut sum_s = x;
        let mut term = x;
        for k in 1..40 {
            let n = 2 * k + 1;
            term *= -x2 / ((n - 1) * n) as f64;
            let t = term / n as f64;
            sum_s += t;
            if t.abs() < 1e-18 {
                break;
            }
        }
        (EULER + x.ln() + sum_c, sum_s)
    }
}

/// Cosine integral Ci(x), x > 0.
pub fn ci(x: f64) -> f64 {
    cisi(x).0
}

/// Product `H₀⁽¹⁾(κ r) J₀(κ R)` with κ = √(k² − h²) on the branch Im κ ≥ 0.
///
/// Above the light line κ = iγ and the product equals
/// −(2i/π)·K₀(γ r)·I₀(γ R).
pub fn h0j0(k: f64, h: f64, r: f64, big_r: f64) -> Complex64 {
    let q = k * k - h * h;
    if q > 0.0 {
        let kap = q.sqrt();
        let j_r = Jn(0, kap * r);
        let y_r = Yn(0, kap * r);
        let j_big = if r == big_r { j_r } else { Jn(0, kap * big_r) };
        Complex64::new(j_r, y_r) * j_big
    } else {
        let gam = (-q).sqrt();
        Complex64::new(0.0, -2.0 / PI) * k0i0(gam * r, gam * big_r)
    }
}

/// K₀(x)·I₀(y) for y ≤ x, switching to the asymptotic product series when
/// both arguments are large and equal.
fn k0i0(x: f64, y: f64) -> f64 {
    if x == y && x > 25.0 {
        let t = 1.0 / (x * x);
        0.5 / x * (1.0 + t * (0.125 + t * (27.0 / 128.0 + t * (3375.0 / 3072.0))))
    } else if x > 600.0 || y > 600.0 {
        // Exponentially small tails of the r > R case.
        let ex = (-(x - y)).exp();
        ex / (2.0 * (x * y).sqrt())
    } else {
        Kn(0, x) * In(0, y)
    }
}
