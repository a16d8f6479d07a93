use super::{Coeff, Q};
use crate::error::Result;

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    c: Vec<C>,
}

impl<C: Coeff> Poly<C> {
    pub fn new(mut c: Vec<C>) -> Self {
        while c.last().is_some_and(|x| x.is_nil()) {
            c.pop();
        }
        Poly { c }
    }
    pub fn zero() -> Self {
        Poly { c: vec![] }
    }
    pub fn constant(x: C) -> Self {
        Self::new(vec![x])
    }
    /// The polynomial `X`.
    pub fn x() -> Self {
        Self::new(vec![C::nil(), C::unit()])
    }
    /// `X - r`
    pub fn linear_root(r: &C) -> Self {
        Self::new(vec![r.neg_ref(), C::unit()])
    }
    pub fn from_q(c: &[Q]) -> Self {
        Self::new(c.iter().map(C::from_q).collect())
    }
    pub fn coeffs(&self) -> &[C] {
        &self.c
    }
    pub fn coeff(&self, k: usize) -> C {
        self.c.get(k).cloned().unwrap_or_else(C::nil)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn lead(&self) -> C {
        self.c.last().cloned().unwrap_or_else(C::nil)
    }
    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::nil();
        for a in self.c.iter().rev() {
            acc = acc.mul_ref(x).add_ref(a);
        }
        acc
    }
    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|i| self.coeff(i).add_ref(&o.coeff(i))).collect())
    }
    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|i| self.coeff(i).sub_ref(&o.coeff(i))).collect())
    }
    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|x| x.neg_ref()).collect() }
    }
    pub fn scale(&self, s: &C) -> Self {
        Self::new(self.c.iter().map(|x| x.mul_ref(s)).collect())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::nil(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_nil() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Self::new(out)
    }
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(C::unit());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
    /// Product of `X - r` over the given roots.
    pub fn from_roots(roots: &[C]) -> Self {
        roots.iter().fold(Self::constant(C::unit()), |acc, r| acc.mul(&Self::linear_root(r)))
    }
    /// Euclidean division; the divisor must be nonzero with invertible lead.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dl = d.lead();
        let dd = match d.degree() {
            Some(x) => x,
            None => return Err(crate::error::Error::DivisionByZero),
        };
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![C::nil(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = r[k + dd].div_ref(&dl)?;
            if !t.is_nil() {
                for (i, b) in d.c.iter().enumerate() {
                    r[k + i] = r[k + i].sub_ref(&t.mul_ref(b));
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        Ok((Self::new(q), Self::new(r)))
    }
    /// Compose `self(p(X))`.
    pub fn compose(&self, p: &Self) -> Self {
        let mut acc = Self::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(p).add(&Self::constant(a.clone()));
        }
        acc
    }
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.c.iter().map(f).collect())
    }
}

impl Poly<Q> {
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        self.scale(&(Q::from_integer(1.into()) / l))
    }
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a.monic()
    }
    pub fn derivative(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(i, a)| a * Q::from_integer((i as i64).into())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::q_int;

    fn p(v: &[i64]) -> Poly<Q> {
        Poly::new(v.iter().map(|&x| q_int(x)).collect())
    }

    #[test]
    fn arithmetic_and_eval() {
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!(a.mul(&b), p(&[-1, 0, 1]));
        assert_eq!(a.mul(&b).eval(&q_int(3)), q_int(8));
        let (q, r) = p(&[-1, 0, 1]).div_rem(&a).unwrap();
        assert_eq!(q, b);
        assert!(r.is_zero());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = p(&[2, 3, 1]); // (x+1)(x+2)
        let b = p(&[3, 4, 1]); // (x+1)(x+3)
        assert_eq!(a.gcd(&b), p(&[1, 1]));
    }

    #[test]
    fn roots_expand() {
        let f = Poly::<Q>::from_roots(&[q_int(1), q_int(2)]);
        assert_eq!(f, p(&[2, -3, 1]));
        assert_eq!(p(&[0, 1]).compose(&p(&[1, 1])), p(&[1, 1]));
    }
}
