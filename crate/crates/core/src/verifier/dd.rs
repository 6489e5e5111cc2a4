//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
//! about 32 significant digits.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 { -self } else { self }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Dd::ONE, |acc, _| acc * self)
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let corr = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, corr);
        Dd { hi, lo }
    }

    fn scale(self, f: f64) -> Self {
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    /// Taylor series, valid for `|x| <= 1`.
    fn sin_cos_small(x: Dd) -> (Dd, Dd) {
        let x2 = x.sqr();
        let (mut s, mut term) = (x, x);
        let mut n = 1.0;
        while term.hi.abs() > 1e-34 * s.hi.abs().max(1e-300) {
            term = -(term * x2) / Dd::new((n + 1.0) * (n + 2.0));
            s = s + term;
            n += 2.0;
        }
        let (mut c, mut term) = (Dd::ONE, Dd::ONE);
        let mut n = 0.0;
        while term.hi.abs() > 1e-34 {
            term = -(term * x2) / Dd::new((n + 1.0) * (n + 2.0));
            c = c + term;
            n += 2.0;
        }
        (s, c)
    }

    /// `(sin x, cos x)` by halving to `|x| <= 1` and doubling back.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let mut k = 0;
        let mut y = self;
        while y.hi.abs() > 1.0 {
            y = y.scale(0.5);
            k += 1;
        }
        let (mut s, mut c) = Dd::sin_cos_small(y);
        for _ in 0..k {
            let s2 = (s * c).scale(2.0);
            c = c.sqr() - s.sqr();
            s = s2;
        }
        (s, c)
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    /// One Newton step on `sin a - x cos a` from the f64 arctangent.
    pub fn atan(self) -> Dd {
        let a = Dd::new(self.hi.atan());
        let (s, c) = a.sin_cos();
        a - (s - self * c) / (c + self * s)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

macro_rules! mixed {
    ($tr:ident, $f:ident) => {
        impl $tr<f64> for Dd {
            type Output = Dd;
            fn $f(self, b: f64) -> Dd {
                $tr::$f(self, Dd::new(b))
            }
        }
        impl $tr<Dd> for f64 {
            type Output = Dd;
            fn $f(self, b: Dd) -> Dd {
                $tr::$f(Dd::new(self), b)
            }
        }
    };
}
mixed!(Add, add);
mixed!(Sub, sub);
mixed!(Mul, mul);
mixed!(Div, div);
