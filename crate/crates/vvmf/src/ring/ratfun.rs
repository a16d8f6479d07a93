use num_traits::Zero;

use super::{Coeff, Poly, Q};
use crate::error::{Error, Result};

/// Element of Q(λ): numerator over monic denominator, coprime.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFun {
    num: Poly<Q>,
    den: Poly<Q>,
}

impl RatFun {
    pub fn new(num: Poly<Q>, den: Poly<Q>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly<Q>, den: Poly<Q>) -> Self {
        if num.is_zero() {
            return RatFun { num, den: Poly::constant(Q::one_()) };
        }
        let (num, den) = if den.degree() == Some(0) {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.degree() == Some(0) {
                (num, den)
            } else {
                (num.div_rem(&g).unwrap().0, den.div_rem(&g).unwrap().0)
            }
        };
        let l = den.lead();
        let inv = Q::one_() / l;
        RatFun { num: num.scale(&inv), den: den.scale(&inv) }
    }

    /// The formal parameter λ.
    pub fn param() -> Self {
        RatFun { num: Poly::x(), den: Poly::constant(Q::one_()) }
    }

    pub fn from_poly(p: Poly<Q>) -> Self {
        RatFun { num: p, den: Poly::constant(Q::one_()) }
    }

    pub fn numer(&self) -> &Poly<Q> {
        &self.num
    }
    pub fn denom(&self) -> &Poly<Q> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// Evaluate at λ = x; errors when the denominator vanishes there.
    pub fn specialize(&self, x: &Q) -> Result<Q> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval(x) / d)
    }
}

trait OneQ {
    fn one_() -> Self;
}
impl OneQ for Q {
    fn one_() -> Self {
        Q::from_integer(1.into())
    }
}

impl Coeff for RatFun {
    fn nil() -> Self {
        RatFun { num: Poly::zero(), den: Poly::constant(Q::one_()) }
    }
    fn unit() -> Self {
        RatFun { num: Poly::constant(Q::one_()), den: Poly::constant(Q::one_()) }
    }
    fn from_q(q: &Q) -> Self {
        RatFun { num: Poly::constant(q.clone()), den: Poly::constant(Q::one_()) }
    }
    fn is_nil(&self) -> bool {
        self.num.is_zero()
    }
    fn add_ref(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::reduce(self.num.add(&o.num), self.den.clone());
        }
        Self::reduce(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }
    fn mul_ref(&self, o: &Self) -> Self {
        if self.is_nil() || o.is_nil() {
            return Self::nil();
        }
        Self::reduce(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg_ref(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }
    fn div_ref(&self, o: &Self) -> Result<Self> {
        if o.is_nil() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(self.num.mul(&o.den), self.den.mul(&o.num)))
    }
}
