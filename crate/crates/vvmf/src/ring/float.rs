use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::Zero;

use super::{Coeff, Q};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary float carrying its working precision in bits.
#[derive(Clone, Debug)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

impl PartialEq for Real {
    fn eq(&self, o: &Self) -> bool {
        self.v.cmp(&o.v) == Some(0)
    }
}

impl Real {
    pub fn from_q_prec(q: &Q, prec: usize) -> Self {
        let n = big_to_float(q.numer(), prec + 64);
        let d = big_to_float(q.denom(), prec + 64);
        Real { v: n.div(&d, prec, RM), prec }
    }
    pub fn from_i64_prec(n: i64, prec: usize) -> Self {
        Real { v: BigFloat::from_i64(n, prec.max(64)), prec }
    }
    pub fn from_f64(x: f64, prec: usize) -> Self {
        Real { v: BigFloat::from_f64(x, prec), prec }
    }
    pub fn precision(&self) -> usize {
        self.prec
    }
    pub fn with_precision(&self, prec: usize) -> Self {
        let mut v = self.v.clone();
        let _ = v.set_precision(prec, RM);
        Real { v, prec }
    }
    fn p(&self, o: &Self) -> usize {
        self.prec.max(o.prec)
    }
    fn wrap(&self, v: BigFloat) -> Result<Self> {
        if v.is_nan() || v.is_inf() {
            return Err(Error::Numeric("non-finite result".into()));
        }
        Ok(Real { v, prec: self.prec })
    }
    pub fn pi(prec: usize) -> Self {
        Real { v: with_cc(|cc| cc.pi(prec, RM)), prec }
    }
    pub fn sin(&self) -> Self {
        Real { v: with_cc(|cc| self.v.sin(self.prec, RM, cc)), prec: self.prec }
    }
    pub fn cos(&self) -> Self {
        Real { v: with_cc(|cc| self.v.cos(self.prec, RM, cc)), prec: self.prec }
    }
    pub fn exp(&self) -> Result<Self> {
        self.wrap(with_cc(|cc| self.v.exp(self.prec, RM, cc)))
    }
    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::Numeric("log of nonpositive value".into()));
        }
        self.wrap(with_cc(|cc| self.v.ln(self.prec, RM, cc)))
    }
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Numeric("square root of negative value".into()));
        }
        if self.v.is_zero() {
            return Ok(self.clone());
        }
        self.wrap(self.v.sqrt(self.prec, RM))
    }
    /// `self^e` for positive `self`.
    pub fn powr(&self, e: &Real) -> Result<Self> {
        self.ln()?.mul_ref(e).exp()
    }
    pub fn abs(&self) -> Self {
        Real { v: self.v.abs(), prec: self.prec }
    }
    pub fn is_positive(&self) -> bool {
        self.v.is_positive() && !self.v.is_zero()
    }
    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }
    pub fn cmp_real(&self, o: &Self) -> Ordering {
        match self.v.cmp(&o.v) {
            Some(x) if x < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
    pub fn lt_f64(&self, x: f64) -> bool {
        self.cmp_real(&Real::from_f64(x, self.prec)) == Ordering::Less
    }
    /// Nearest integer (ties to even).
    pub fn round_int(&self) -> BigInt {
        let r = self.v.round(0, RM);
        float_to_bigint(&r)
    }
    /// Distance to the nearest integer.
    pub fn dist_to_int(&self) -> Self {
        let n = big_to_float(&self.round_int(), self.prec + 64);
        Real { v: self.v.sub(&n, self.prec, RM).abs(), prec: self.prec }
    }
    pub fn to_f64(&self) -> f64 {
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }
    /// Decimal rendering with `digits` significant digits, scientific form.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.v.is_zero() {
            return "0".into();
        }
        let (s, m, e) = match with_cc(|cc| self.v.convert_to_radix(Radix::Dec, RM, cc)) {
            Ok(x) => x,
            Err(_) => return "NaN".into(),
        };
        let mut ds: Vec<u8> = m.into_iter().take(digits.max(1)).collect();
        while ds.len() > 1 && *ds.last().unwrap() == 0 {
            ds.pop();
        }
        let head = ds[0];
        let tail: String = ds[1..].iter().map(|d| char::from(b'0' + d)).collect();
        let sign = if s == Sign::Neg { "-" } else { "" };
        let exp = e as i64 - 1;
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
    /// Fixed-point rendering with `frac` digits after the point.
    pub fn to_fixed(&self, frac: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), frac);
        let scaled = self.mul_ref(&Real { v: big_to_float(&scale, self.prec + 64), prec: self.prec });
        let n = scaled.round_int();
        let neg = n < BigInt::zero();
        let s = n.magnitude().to_string();
        let s = if s.len() <= frac { format!("{}{}", "0".repeat(frac + 1 - s.len()), s) } else { s };
        let (ip, fp) = s.split_at(s.len() - frac);
        let sign = if neg { "-" } else { "" };
        if frac == 0 {
            format!("{sign}{ip}")
        } else {
            format!("{sign}{ip}.{fp}")
        }
    }
}

fn big_to_float(n: &BigInt, prec: usize) -> BigFloat {
    with_cc(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, prec.max(64), RM, cc))
}

fn float_to_bigint(v: &BigFloat) -> BigInt {
    if v.is_zero() {
        return BigInt::zero();
    }
    let (s, m, e) = with_cc(|cc| v.convert_to_radix(Radix::Dec, RoundingMode::None, cc)).expect("finite");
    let e = e as i64;
    let mut digits = String::new();
    for i in 0..e.max(0) as usize {
        digits.push(char::from(b'0' + m.get(i).copied().unwrap_or(0)));
    }
    if digits.is_empty() {
        return BigInt::zero();
    }
    let n: BigInt = digits.parse().expect("decimal digits");
    if s == Sign::Neg {
        -n
    } else {
        n
    }
}

impl Coeff for Real {
    fn nil() -> Self {
        Real::from_i64_prec(0, DEFAULT_PRECISION)
    }
    fn unit() -> Self {
        Real::from_i64_prec(1, DEFAULT_PRECISION)
    }
    fn from_q(q: &Q) -> Self {
        Real::from_q_prec(q, DEFAULT_PRECISION)
    }
    fn is_nil(&self) -> bool {
        self.v.is_zero()
    }
    fn add_ref(&self, o: &Self) -> Self {
        let p = self.p(o);
        Real { v: self.v.add(&o.v, p, RM), prec: p }
    }
    fn sub_ref(&self, o: &Self) -> Self {
        let p = self.p(o);
        Real { v: self.v.sub(&o.v, p, RM), prec: p }
    }
    fn mul_ref(&self, o: &Self) -> Self {
        let p = self.p(o);
        Real { v: self.v.mul(&o.v, p, RM), prec: p }
    }
    fn neg_ref(&self) -> Self {
        Real { v: self.v.neg(), prec: self.prec }
    }
    fn div_ref(&self, o: &Self) -> Result<Self> {
        if o.v.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p(o);
        Ok(Real { v: self.v.div(&o.v, p, RM), prec: p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::q_new;

    #[test]
    fn decimal_roundtrip() {
        let x = Real::from_q_prec(&q_new(-1234567, 1000), 256);
        assert_eq!(x.to_decimal(7), "-1.234567e3");
        assert_eq!(x.round_int(), BigInt::from(-1235));
        assert_eq!(x.to_fixed(2), "-1234.57");
        assert_eq!(Real::from_q_prec(&q_new(1, 8), 128).to_fixed(3), "0.125");
        assert!((x.to_f64() + 1234.567).abs() < 1e-9);
    }

    #[test]
    fn transcendental_basics() {
        let p = 256;
        let pi = Real::pi(p);
        let half = Real::from_q_prec(&q_new(1, 2), p);
        let s = pi.mul_ref(&half).sin();
        assert!(s.sub_ref(&Real::from_i64_prec(1, p)).abs().lt_f64(1e-70));
        let two = Real::from_i64_prec(2, p);
        let r = two.sqrt().unwrap();
        assert!(r.mul_ref(&r).sub_ref(&two).abs().lt_f64(1e-70));
        assert!(two.powr(&Real::from_i64_prec(10, p)).unwrap().dist_to_int().lt_f64(1e-60));
    }
}
