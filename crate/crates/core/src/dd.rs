//! Double-double arithmetic: an unevaluated sum `hi + lo` with
//! `|lo| <= ulp(hi)/2`, giving about 32 significant digits.
//!
//! Only what the lemma functions need: field operations, `exp`, `ln`,
//! `expm1`, `ln_1p` and real powers of positive arguments.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DD = DD {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

const EPS: f64 = 4.93e-32;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn new(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        DD {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = DD::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            n >>= 1;
        }
        acc
    }

    /// `e^x - 1`, accurate in relative terms for small `x`.
    pub fn exp_m1(self) -> Self {
        if self.hi.abs() > 0.5 {
            return self.exp() - DD::ONE;
        }
        if self.hi == 0.0 {
            return DD::ZERO;
        }
        // Scale down, sum the series, then undo with e ← e(2 + e).
        let m = 8;
        let r = self.mul_pow2(-m);
        let mut e = taylor_expm1(r);
        for _ in 0..m {
            e = e * (e + 2.0);
        }
        e
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DD::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * k;
        let e = r.exp_m1_reduced();
        (e + 1.0).mul_pow2(k as i32)
    }

    fn exp_m1_reduced(self) -> Self {
        let m = 8;
        let r = self.mul_pow2(-m);
        let mut e = taylor_expm1(r);
        for _ in 0..m {
            e = e * (e + 2.0);
        }
        e
    }

    /// Natural logarithm by two Newton steps on `exp(y) = x`.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                DD::new(f64::NEG_INFINITY)
            } else {
                DD::new(f64::NAN)
            };
        }
        let mut y = DD::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    /// `ln(1 + x)`, accurate in relative terms for small `x`.
    pub fn ln_1p(self) -> Self {
        if self.hi.abs() >= 0.01 {
            return (self + 1.0).ln();
        }
        // 2 atanh(z) with z = x / (2 + x)
        let z = self / (self + 2.0);
        let z2 = z.sqr();
        let mut term = z;
        let mut sum = z;
        let mut k = 1.0;
        loop {
            term = term * z2;
            k += 2.0;
            let add = term / k;
            sum = sum + add;
            if add.hi.abs() <= EPS * sum.hi.abs() {
                break;
            }
        }
        sum.mul_pow2(1)
    }

    /// `x^p` for `x > 0`.
    pub fn powf(self, p: DD) -> Self {
        if self.hi == 0.0 {
            return if p.hi > 0.0 { DD::ZERO } else { DD::new(f64::INFINITY) };
        }
        (self.ln() * p).exp()
    }
}

fn taylor_expm1(r: DD) -> DD {
    let mut term = r;
    let mut sum = r;
    let mut k = 1.0;
    loop {
        k += 1.0;
        term = term * r / k;
        sum = sum + term;
        if term.hi.abs() <= EPS * sum.hi.abs() {
            break;
        }
    }
    sum
}

impl From<f64> for DD {
    fn from(x: f64) -> Self {
        DD::new(x)
    }
}

impl fmt::Debug for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DD { hi, lo }
    }
}

impl Add<f64> for DD {
    type Output = DD;
    fn add(self, b: f64) -> DD {
        let (s1, s2) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        DD { hi, lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Sub<f64> for DD {
    type Output = DD;
    fn sub(self, b: f64) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        DD { hi, lo }
    }
}

impl Mul<f64> for DD {
    type Output = DD;
    fn mul(self, b: f64) -> DD {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DD { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for DD {
    type Output = DD;
    fn div(self, b: f64) -> DD {
        self / DD::new(b)
    }
}
