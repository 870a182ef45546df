//! Software binary floating point with a configurable mantissa width.
//!
//! A value is `(-1)^neg * mant * 2^exp` where `mant` has exactly `prec` bits
//! (or is zero). Addition, subtraction, multiplication, division and square
//! root are correctly rounded to nearest, ties to even. `ln` and `exp` are
//! evaluated with guard bits and are accurate to a few units in the last place.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct ExtFloat {
    neg: bool,
    mant: BigUint,
    exp: i64,
    prec: u32,
}

fn round_to(neg: bool, mant: BigUint, exp: i64, prec: u32, sticky: bool) -> ExtFloat {
    if mant.is_zero() {
        return ExtFloat::zero(prec);
    }
    let bits = mant.bits() as i64;
    let p = prec as i64;
    if bits <= p {
        debug_assert!(!sticky, "inexact operation produced too few bits");
        let sh = p - bits;
        return ExtFloat { neg, mant: mant << sh as usize, exp: exp - sh, prec };
    }
    let sh = (bits - p) as u64;
    let mut q = &mant >> sh as usize;
    let half = mant.bit(sh - 1);
    let below = sticky || mant.trailing_zeros().is_some_and(|tz| tz < sh - 1);
    let mut e = exp + sh as i64;
    if half && (below || q.bit(0)) {
        q += 1u32;
        if q.bits() as i64 > p {
            q >>= 1usize;
            e += 1;
        }
    }
    ExtFloat { neg, mant: q, exp: e, prec }
}

thread_local! {
    static LN2_CACHE: RefCell<HashMap<u32, ExtFloat>> = RefCell::new(HashMap::new());
}

impl ExtFloat {
    pub fn zero(prec: u32) -> Self {
        ExtFloat { neg: false, mant: BigUint::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_u64(1, prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        round_to(false, BigUint::from(v), 0, prec, false)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        round_to(v < 0, BigUint::from(v.unsigned_abs()), 0, prec, false)
    }

    /// Exact conversion (requires `prec >= 53`). Panics on non-finite input.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "ExtFloat::from_f64 on non-finite value");
        assert!(prec >= 53);
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
        round_to(neg, BigUint::from(m), e, prec, false)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.is_zero()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        if self.is_zero() {
            return Self::zero(prec);
        }
        round_to(self.neg, self.mant.clone(), self.exp, prec, false)
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        r.neg = false;
        r
    }

    /// Multiply by `2^k` exactly.
    pub fn ldexp(&self, k: i64) -> Self {
        let mut r = self.clone();
        if !r.is_zero() {
            r.exp += k;
        }
        r
    }

    /// Correctly rounded conversion to the nearest double (normal range).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = round_to(self.neg, self.mant.clone(), self.exp, 53, false);
        let m = r.mant.to_u64().expect("53-bit mantissa") as f64;
        let v = ldexp_f64(m, r.exp);
        if r.neg {
            -v
        } else {
            v
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "ExtFloat::sqrt of a negative value");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec;
        let bits = self.mant.bits() as i64;
        let mut k = (2 * prec as i64 + 4 - bits).max(0);
        if (self.exp - k).rem_euclid(2) != 0 {
            k += 1;
        }
        let n = &self.mant << k as usize;
        let s = n.sqrt();
        let sticky = &s * &s != n;
        round_to(false, s, (self.exp - k) / 2, prec, sticky)
    }

    pub fn powi(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Smallest integer not below the value. Panics if it does not fit in i64.
    pub fn ceil_i64(&self) -> i64 {
        if self.is_zero() {
            return 0;
        }
        let (q, exact) = if self.exp >= 0 {
            (&self.mant << self.exp as usize, true)
        } else {
            let sh = (-self.exp) as usize;
            let q = &self.mant >> sh;
            let exact = self.mant.trailing_zeros().is_none_or(|tz| tz as usize >= sh);
            (q, exact)
        };
        let q = q.to_i64().expect("ceil out of range");
        if self.neg {
            -q
        } else if exact {
            q
        } else {
            q + 1
        }
    }

    fn negligible(term: &ExtFloat, sum: &ExtFloat, wp: u32) -> bool {
        term.is_zero() || (!sum.is_zero() && term.top() < sum.top() - wp as i64 - 2)
    }

    /// ln 2 at precision `prec`, cached per precision.
    pub fn ln2(prec: u32) -> Self {
        if let Some(v) = LN2_CACHE.with(|c| c.borrow().get(&prec).cloned()) {
            return v;
        }
        let wp = prec + 32;
        let third = Self::one(wp) / Self::from_u64(3, wp);
        let v = (atanh_series(&third, wp).ldexp(1)).with_prec(prec);
        LN2_CACHE.with(|c| c.borrow_mut().insert(prec, v.clone()));
        v
    }

    /// Natural logarithm. Panics for non-positive input.
    pub fn ln(&self) -> Self {
        assert!(!self.is_negative() && !self.is_zero(), "ExtFloat::ln of a non-positive value");
        let prec = self.prec;
        let wp = prec + 40;
        let t = self.mant.bits() as i64;
        let mut e = self.exp + t;
        let mut f = ExtFloat { neg: false, mant: self.mant.clone(), exp: -t, prec }.with_prec(wp);
        if f.to_f64() < std::f64::consts::FRAC_1_SQRT_2 {
            f = f.ldexp(1);
            e -= 1;
        }
        let one = Self::one(wp);
        let z = (&f - &one) / (&f + &one);
        let lnf = atanh_series(&z, wp).ldexp(1);
        let r = &(&Self::from_i64(e, wp) * &Self::ln2(wp)) + &lnf;
        r.with_prec(prec)
    }

    /// Exponential. Panics when the result exponent would not fit.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return Self::one(prec);
        }
        let wp = prec + 64;
        let x = self.with_prec(wp);
        let ln2 = Self::ln2(wp);
        let approx = self.to_f64() / std::f64::consts::LN_2;
        assert!(approx.abs() < 1e15, "ExtFloat::exp argument too large");
        let k = approx.round() as i64;
        let r = &x - &(&Self::from_i64(k, wp) * &ln2);
        const HALVINGS: i64 = 16;
        let r = r.ldexp(-HALVINGS);
        let mut sum = Self::one(wp);
        let mut term = Self::one(wp);
        let mut i = 1u64;
        loop {
            term = &(&term * &r) / &Self::from_u64(i, wp);
            if Self::negligible(&term, &sum, wp) {
                break;
            }
            sum = &sum + &term;
            i += 1;
        }
        for _ in 0..HALVINGS {
            sum = &sum * &sum;
        }
        sum.ldexp(k).with_prec(prec)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

fn atanh_series(z: &ExtFloat, wp: u32) -> ExtFloat {
    let z2 = z * z;
    let mut sum = z.clone();
    let mut pow = z.clone();
    let mut k = 1u64;
    loop {
        pow = &pow * &z2;
        let term = &pow / &ExtFloat::from_u64(2 * k + 1, wp);
        if ExtFloat::negligible(&term, &sum, wp) {
            break;
        }
        sum = &sum + &term;
        k += 1;
    }
    sum
}

fn ldexp_f64(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

fn add_signed(a: &ExtFloat, b: &ExtFloat, negate_b: bool) -> ExtFloat {
    let prec = a.prec.max(b.prec);
    let bneg = b.neg ^ negate_b;
    if b.is_zero() {
        return a.with_prec(prec);
    }
    if a.is_zero() {
        let mut r = b.with_prec(prec);
        r.neg = bneg;
        return r;
    }
    let gap = prec as i64 + 3;
    if a.top() - b.top() > gap {
        return a.with_prec(prec);
    }
    if b.top() - a.top() > gap {
        let mut r = b.with_prec(prec);
        r.neg = bneg;
        return r;
    }
    let e = a.exp.min(b.exp);
    let ma = &a.mant << (a.exp - e) as usize;
    let mb = &b.mant << (b.exp - e) as usize;
    if a.neg == bneg {
        round_to(a.neg, ma + mb, e, prec, false)
    } else {
        match ma.cmp(&mb) {
            Ordering::Equal => ExtFloat::zero(prec),
            Ordering::Greater => round_to(a.neg, ma - mb, e, prec, false),
            Ordering::Less => round_to(bneg, mb - ma, e, prec, false),
        }
    }
}

fn mul_impl(a: &ExtFloat, b: &ExtFloat) -> ExtFloat {
    let prec = a.prec.max(b.prec);
    if a.is_zero() || b.is_zero() {
        return ExtFloat::zero(prec);
    }
    round_to(a.neg ^ b.neg, &a.mant * &b.mant, a.exp + b.exp, prec, false)
}

fn div_impl(a: &ExtFloat, b: &ExtFloat) -> ExtFloat {
    let prec = a.prec.max(b.prec);
    assert!(!b.is_zero(), "ExtFloat division by zero");
    if a.is_zero() {
        return ExtFloat::zero(prec);
    }
    let k = (prec as i64 + 2 + b.mant.bits() as i64 - a.mant.bits() as i64).max(0);
    let num = &a.mant << k as usize;
    let (q, r) = num.div_rem(&b.mant);
    round_to(a.neg ^ b.neg, q, a.exp - k - b.exp, prec, !r.is_zero())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $f:expr) => {
        impl<'a, 'b> $tr<&'b ExtFloat> for &'a ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: &'b ExtFloat) -> ExtFloat {
                $f(self, rhs)
            }
        }
        impl $tr<ExtFloat> for ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: ExtFloat) -> ExtFloat {
                $f(&self, &rhs)
            }
        }
        impl<'b> $tr<&'b ExtFloat> for ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: &'b ExtFloat) -> ExtFloat {
                $f(&self, rhs)
            }
        }
        impl<'a> $tr<ExtFloat> for &'a ExtFloat {
            type Output = ExtFloat;
            fn $method(self, rhs: ExtFloat) -> ExtFloat {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| add_signed(a, b, false));
binop!(Sub, sub, |a, b| add_signed(a, b, true));
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(mut self) -> ExtFloat {
        if !self.is_zero() {
            self.neg = !self.neg;
        }
        self
    }
}

impl Neg for &ExtFloat {
    type Output = ExtFloat;
    fn neg(self) -> ExtFloat {
        -(self.clone())
    }
}

impl PartialEq for ExtFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl ExtFloat {
    fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return if other.neg { Ordering::Greater } else { Ordering::Less },
            (false, true) => return if self.neg { Ordering::Less } else { Ordering::Greater },
            _ => {}
        }
        if self.neg != other.neg {
            return if self.neg { Ordering::Less } else { Ordering::Greater };
        }
        let mag = match self.top().cmp(&other.top()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let a = &self.mant << (self.exp - e) as usize;
                let b = &other.mant << (other.exp - e) as usize;
                a.cmp(&b)
            }
            o => o,
        };
        if self.neg {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Complex number with [`ExtFloat`] parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtComplex {
    pub re: ExtFloat,
    pub im: ExtFloat,
}

impl ExtComplex {
    pub fn new(re: ExtFloat, im: ExtFloat) -> Self {
        ExtComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        ExtComplex { re: ExtFloat::zero(prec), im: ExtFloat::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        ExtComplex { re: ExtFloat::one(prec), im: ExtFloat::zero(prec) }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        ExtComplex { re: ExtFloat::from_f64(z.re, prec), im: ExtFloat::from_f64(z.im, prec) }
    }

    pub fn from_real(x: ExtFloat) -> Self {
        let prec = x.prec();
        ExtComplex { re: x, im: ExtFloat::zero(prec) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExtComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> ExtFloat {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> ExtFloat {
        self.norm_sqr().sqrt()
    }

    /// Cheap magnitude proxy `|re| + |im|` in double, for pivoting.
    pub fn abs1_f64(&self) -> f64 {
        self.re.to_f64().abs() + self.im.to_f64().abs()
    }

    pub fn scale(&self, s: &ExtFloat) -> Self {
        ExtComplex { re: &self.re * s, im: &self.im * s }
    }
}

impl<'b> Add<&'b ExtComplex> for &ExtComplex {
    type Output = ExtComplex;
    fn add(self, o: &'b ExtComplex) -> ExtComplex {
        ExtComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'b> Sub<&'b ExtComplex> for &ExtComplex {
    type Output = ExtComplex;
    fn sub(self, o: &'b ExtComplex) -> ExtComplex {
        ExtComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'b> Mul<&'b ExtComplex> for &ExtComplex {
    type Output = ExtComplex;
    fn mul(self, o: &'b ExtComplex) -> ExtComplex {
        ExtComplex { re: &(&self.re * &o.re) - &(&self.im * &o.im), im: &(&self.re * &o.im) + &(&self.im * &o.re) }
    }
}

impl<'b> Div<&'b ExtComplex> for &ExtComplex {
    type Output = ExtComplex;
    fn div(self, o: &'b ExtComplex) -> ExtComplex {
        let d = o.norm_sqr();
        let num = self * &o.conj();
        ExtComplex { re: &num.re / &d, im: &num.im / &d }
    }
}

impl Neg for &ExtComplex {
    type Output = ExtComplex;
    fn neg(self) -> ExtComplex {
        ExtComplex { re: -&self.re, im: -&self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn f(x: f64) -> ExtFloat {
        ExtFloat::from_f64(x, P)
    }

    #[test]
    fn roundtrip_doubles() {
        for &x in &[1.0, -2.5, 1e-300, std::f64::consts::PI, 5e-324, 1.7976931348623157e308] {
            assert_eq!(f(x).to_f64(), x);
        }
    }

    #[test]
    fn basic_ops_agree_with_double_when_exact() {
        assert_eq!((f(1.5) + f(2.25)).to_f64(), 3.75);
        assert_eq!((f(1.5) - f(2.25)).to_f64(), -0.75);
        assert_eq!((f(1.5) * f(-2.0)).to_f64(), -3.0);
        assert_eq!((f(1.0) / f(8.0)).to_f64(), 0.125);
        assert_eq!(f(6.25).sqrt().to_f64(), 2.5);
        assert!((f(2.0) - f(2.0)).is_zero());
    }

    #[test]
    fn correctly_rounded_to_double_for_one_op() {
        let pairs = [(1.0, 3.0), (2.0, 7.0), (1e10, 3.3), (-5.5, 1.1e-7)];
        for &(a, b) in &pairs {
            assert_eq!((f(a) / f(b)).to_f64(), a / b);
            assert_eq!((f(a) * f(b)).to_f64(), a * b);
            assert_eq!((f(a) + f(b)).to_f64(), a + b);
        }
        assert_eq!(f(2.0).sqrt().to_f64(), 2f64.sqrt());
    }

    #[test]
    fn tiny_addend_is_absorbed_with_ties_to_even() {
        let big = f(1.0);
        let tiny = f(1e-200);
        assert_eq!(&big + &tiny, big);
        assert_eq!((&big - &tiny).to_f64(), 1.0);
        let half_ulp = ExtFloat::one(64).ldexp(-64);
        assert_eq!(&ExtFloat::one(64) + &half_ulp, ExtFloat::one(64));
    }

    #[test]
    fn ln2_digits() {
        let ln2 = ExtFloat::ln2(P);
        let s = ln2.clone() * ExtFloat::from_f64(1e30, P);
        let expect = f(std::f64::consts::LN_2);
        assert_eq!(ln2.to_f64(), std::f64::consts::LN_2);
        assert!((&ln2 - &expect).abs().to_f64() < 1e-16);
        assert!(s.to_f64() > 6.93e29);
    }

    #[test]
    fn ln_exp_inverse_at_high_precision() {
        for &x in &[0.001, 0.5, 1.0, 2.0, 10.0, 12345.678] {
            let v = f(x);
            let back = v.ln().exp();
            let rel = (&(&back - &v) / &v).abs();
            assert!(rel < ExtFloat::one(P).ldexp(-240), "x = {x}: {rel}");
        }
    }

    #[test]
    fn ln_and_exp_match_double() {
        for &x in &[0.3, 1.7, 100.0, 1e-12] {
            assert!((f(x).ln().to_f64() - x.ln()).abs() <= 2.0 * f64::EPSILON * x.ln().abs().max(1.0));
        }
        for &x in &[-3.0, 0.25, 5.0, 40.0] {
            let e = f(x).exp().to_f64();
            assert!((e - x.exp()).abs() <= 2.0 * f64::EPSILON * x.exp());
        }
        assert_eq!(f(1.0).exp().to_f64(), std::f64::consts::E);
    }

    #[test]
    fn ordering_and_ceil() {
        assert!(f(-1.0) < f(0.0));
        assert!(f(2.0) > f(1.9999));
        assert!(f(-3.0) < f(-2.0));
        assert_eq!(f(2.1).ceil_i64(), 3);
        assert_eq!(f(2.0).ceil_i64(), 2);
        assert_eq!(f(-2.5).ceil_i64(), -2);
        assert_eq!(f(0.25).ceil_i64(), 1);
    }

    #[test]
    fn complex_division() {
        let a = ExtComplex::from_c64(Complex64::new(1.0, 2.0), P);
        let b = ExtComplex::from_c64(Complex64::new(3.0, -4.0), P);
        let q = (&a / &b).to_c64();
        let expect = Complex64::new(1.0, 2.0) / Complex64::new(3.0, -4.0);
        assert!((q - expect).norm() < 1e-16);
        assert_eq!(b.abs().to_f64(), 5.0);
    }
}
