//! Truncated Puiseux series in q (or K) over a pluggable coefficient ring.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{fmt_q, q_div_exact, q_gcd, q_int, Coeff, Q};

pub mod forms;

pub use forms::{delta, eisenstein, eta_quotient, j_and_kappa, kappa_unit, mod_derivative, FormTag, WeightedForm};

/// Out-of-band factor `base^exp` multiplying every stored coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Prefactor {
    pub base: u64,
    pub exp: Q,
}

/// `prefactor * Σ_{n < trunc} coeffs[n] q^{lead_exp + n*step} + O(q^{lead_exp + trunc*step})`.
///
/// A zero series has no stored terms and `lead_exp` equal to its precision bound.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries<C> {
    lead_exp: Q,
    step: Q,
    coeffs: Vec<C>,
    prefactor: Option<Prefactor>,
}

fn merge_prefactors(a: &Option<Prefactor>, b: &Option<Prefactor>) -> Result<Option<Prefactor>> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x.clone()),
        (Some(a), Some(b)) if a.base == b.base => {
            let e = &a.exp + &b.exp;
            Ok(if e.is_zero() { None } else { Some(Prefactor { base: a.base, exp: e }) })
        }
        (Some(a), Some(b)) => Err(Error::Prefactor(format!("bases {} and {}", a.base, b.base))),
    }
}

fn q_to_usize(x: &BigInt) -> usize {
    x.to_usize().expect("index fits in usize")
}

impl<C: Coeff> PuiseuxSeries<C> {
    /// Builds a series, dropping leading zeros into the exponent.
    pub fn new(lead_exp: Q, step: Q, coeffs: Vec<C>) -> Self {
        assert!(step.is_positive(), "series step must be positive");
        let mut s = PuiseuxSeries { lead_exp, step, coeffs, prefactor: None };
        s.canonicalize();
        s
    }

    /// Integer-step power series `Σ c_n q^n` with `c.len()` valid terms.
    pub fn power_series(coeffs: Vec<C>) -> Self {
        Self::new(Q::zero(), Q::one(), coeffs)
    }

    /// The zero series valid below `q^bound`.
    pub fn zero_to(bound: Q, step: Q) -> Self {
        PuiseuxSeries { lead_exp: bound, step, coeffs: vec![], prefactor: None }
    }

    /// `c * q^e` known to `trunc` terms of the given step.
    pub fn monomial(c: C, e: Q, step: Q, trunc: usize) -> Self {
        let mut v = vec![C::nil(); trunc];
        if trunc > 0 {
            v[0] = c;
        }
        Self::new(e, step, v)
    }

    fn canonicalize(&mut self) {
        let k = self.coeffs.iter().take_while(|c| c.is_nil()).count();
        if k > 0 {
            self.lead_exp = &self.lead_exp + &self.step * q_int(k as i64);
            self.coeffs.drain(..k);
        }
    }

    pub fn with_prefactor(mut self, p: Option<Prefactor>) -> Self {
        self.prefactor = p.filter(|p| !p.exp.is_zero());
        self
    }

    pub fn lead_exp(&self) -> &Q {
        &self.lead_exp
    }
    pub fn step(&self) -> &Q {
        &self.step
    }
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }
    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }
    pub fn prefactor(&self) -> Option<&Prefactor> {
        self.prefactor.as_ref()
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Exponent below which the series is known.
    pub fn bound(&self) -> Q {
        &self.lead_exp + &self.step * q_int(self.coeffs.len() as i64)
    }
    pub fn lead_coeff(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Coefficient of `q^e` (excluding the prefactor); errors past validity.
    pub fn coeff_at(&self, e: &Q) -> Result<C> {
        let b = self.bound();
        if *e >= b {
            return Err(Error::PastTruncation { requested: fmt_q(e), bound: fmt_q(&b) });
        }
        if *e < self.lead_exp {
            return Ok(C::nil());
        }
        match q_div_exact(&(e - &self.lead_exp), &self.step) {
            Some(n) => Ok(self.coeffs[q_to_usize(&n)].clone()),
            None => Ok(C::nil()),
        }
    }

    /// Stored coefficients re-read on a finer step `s` (which must divide the current step).
    pub fn refine(&self, s: &Q) -> Self {
        let r = q_div_exact(&self.step, s).expect("refinement must divide the step");
        let r = q_to_usize(&r);
        if r == 1 {
            return self.clone();
        }
        let mut v = vec![C::nil(); self.coeffs.len() * r];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * r] = c.clone();
        }
        PuiseuxSeries { lead_exp: self.lead_exp.clone(), step: s.clone(), coeffs: v, prefactor: self.prefactor.clone() }
    }

    /// Keep only the first `n` terms.
    pub fn truncate(&self, n: usize) -> Self {
        let mut s = self.clone();
        if n < s.coeffs.len() {
            s.coeffs.truncate(n);
        }
        s
    }

    /// Truncate so that nothing at or above `q^bound` is kept.
    pub fn truncate_below(&self, bound: &Q) -> Self {
        if *bound >= self.bound() {
            return self.clone();
        }
        if *bound <= self.lead_exp {
            return Self::zero_to(bound.clone(), self.step.clone()).with_prefactor(self.prefactor.clone());
        }
        let n = ((bound - &self.lead_exp) / &self.step).ceil().to_integer();
        self.truncate(q_to_usize(&n))
    }

    fn prefactor_for_sum(&self, o: &Self) -> Result<Option<Prefactor>> {
        if self.is_zero() {
            return Ok(o.prefactor.clone());
        }
        if o.is_zero() || self.prefactor == o.prefactor {
            return Ok(self.prefactor.clone());
        }
        Err(Error::Prefactor(format!("{:?} vs {:?}", self.prefactor, o.prefactor)))
    }

    fn prefactor_for_product(&self, o: &Self) -> Result<Option<Prefactor>> {
        merge_prefactors(&self.prefactor, &o.prefactor)
    }

    /// Add with step refinement and minimal valid truncation.
    pub fn try_add(&self, o: &Self) -> Result<Self> {
        let pf = self.prefactor_for_sum(o)?;
        let diff = (&self.lead_exp - &o.lead_exp).abs();
        let g = q_gcd(&q_gcd(&self.step, &o.step), &diff);
        let lead = self.lead_exp.clone().min(o.lead_exp.clone());
        let bound = self.bound().min(o.bound());
        if bound <= lead {
            return Ok(Self::zero_to(bound, g).with_prefactor(pf));
        }
        let n = q_to_usize(&q_div_exact(&(&bound - &lead), &g).expect("bounds on lattice"));
        let mut v = vec![C::nil(); n];
        for s in [self, o] {
            let off = q_to_usize(&q_div_exact(&(&s.lead_exp - &lead), &g).unwrap());
            let r = q_to_usize(&q_div_exact(&s.step, &g).unwrap());
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = off + i * r;
                if k >= n {
                    break;
                }
                v[k] = v[k].add_ref(c);
            }
        }
        Ok(Self::new(lead, g, v).with_prefactor(pf))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("compatible prefactors")
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect(),
            prefactor: self.prefactor.clone(),
        }
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("compatible prefactors")
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut s = PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: self.coeffs.iter().map(|x| x.mul_ref(c)).collect(),
            prefactor: self.prefactor.clone(),
        };
        if c.is_nil() {
            s.lead_exp = s.bound();
            s.coeffs.clear();
        }
        s
    }

    /// Multiply by `q^e`.
    pub fn shift(&self, e: &Q) -> Self {
        let mut s = self.clone();
        s.lead_exp = &s.lead_exp + e;
        s
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        let pf = self.prefactor_for_product(o)?;
        let g = q_gcd(&self.step, &o.step);
        let lead = &self.lead_exp + &o.lead_exp;
        let rel = (&self.step * q_int(self.trunc() as i64)).min(&o.step * q_int(o.trunc() as i64));
        let n = q_to_usize(&(&rel / &g).floor().to_integer());
        if n == 0 {
            return Ok(Self::zero_to(&lead + rel, g).with_prefactor(pf));
        }
        let a = self.refine(&g);
        let b = o.refine(&g);
        let mut v = vec![C::nil(); n];
        for (i, x) in a.coeffs.iter().enumerate().take(n) {
            if x.is_nil() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate().take(n - i) {
                if y.is_nil() {
                    continue;
                }
                v[i + j] = v[i + j].add_ref(&x.mul_ref(y));
            }
        }
        let mut out = Self::new(lead, g, v).with_prefactor(pf);
        // the product is valid to the relative bound even if a step does not divide it
        out = out.truncate_below(&(&self.lead_exp + &o.lead_exp + rel));
        Ok(out)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("compatible prefactors")
    }

    /// Multiplicative inverse; the leading coefficient must be invertible.
    pub fn inverse(&self) -> Result<Self> {
        let a0 = self.coeffs.first().ok_or(Error::DivisionByZero)?;
        let n = self.trunc();
        let mut g: Vec<C> = Vec::with_capacity(n);
        g.push(C::unit().div_ref(a0)?);
        for k in 1..n {
            let mut acc = C::nil();
            for i in 1..=k {
                acc = acc.add_ref(&self.coeffs[i].mul_ref(&g[k - i]));
            }
            g.push(acc.neg_ref().div_ref(a0)?);
        }
        let pf = self.prefactor.as_ref().map(|p| Prefactor { base: p.base, exp: -p.exp.clone() });
        Ok(PuiseuxSeries { lead_exp: -self.lead_exp.clone(), step: self.step.clone(), coeffs: g, prefactor: pf })
    }

    pub fn try_div(&self, o: &Self) -> Result<Self> {
        self.try_mul(&o.inverse()?)
    }

    pub fn pow_u(&self, e: u32) -> Self {
        let mut acc = Self::monomial(C::unit(), Q::zero(), self.step.clone(), self.trunc().max(1));
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn pow_i(&self, e: i64) -> Result<Self> {
        let p = self.pow_u(e.unsigned_abs() as u32);
        if e < 0 {
            p.inverse()
        } else {
            Ok(p)
        }
    }

    /// `(1 + u)^e` for a series with `lead_exp = 0`, leading coefficient 1, no prefactor.
    /// The exponent may be any ring element (e.g. a symbolic λ).
    pub fn pow_unital(&self, e: &C) -> Result<Self> {
        if !self.lead_exp.is_zero() || self.coeffs.first().map_or(true, |c| !c.is_unit()) {
            return Err(Error::NonUnital);
        }
        let n = self.trunc();
        let f = &self.coeffs;
        let e1 = e.add_ref(&C::unit());
        let mut g: Vec<C> = Vec::with_capacity(n);
        g.push(C::unit());
        for m in 1..n {
            let mut acc = C::nil();
            for k in 1..=m {
                if f[k].is_nil() {
                    continue;
                }
                let w = e1.scale_i64(k as i64).sub_ref(&C::from_i64(m as i64));
                acc = acc.add_ref(&w.mul_ref(&f[k]).mul_ref(&g[m - k]));
            }
            g.push(acc.div_ref(&C::from_i64(m as i64))?);
        }
        Ok(PuiseuxSeries { lead_exp: Q::zero(), step: self.step.clone(), coeffs: g, prefactor: None })
    }

    /// `(p · q^a (1 + u))^e` with rational `e`; the leading stored coefficient must be 1.
    pub fn pow_frac(&self, e: &Q) -> Result<Self> {
        if self.coeffs.first().map_or(true, |c| !c.is_unit()) {
            return Err(Error::NonUnital);
        }
        let unit = PuiseuxSeries {
            lead_exp: Q::zero(),
            step: self.step.clone(),
            coeffs: self.coeffs.clone(),
            prefactor: None,
        };
        let mut r = unit.pow_unital(&C::from_q(e))?;
        r.lead_exp = &self.lead_exp * e;
        r.prefactor =
            self.prefactor.as_ref().map(|p| Prefactor { base: p.base, exp: &p.exp * e }).filter(|p| !p.exp.is_zero());
        Ok(r)
    }

    /// Split off the leading coefficient when it is a power of `base`, moving it to the prefactor.
    pub fn extract_base(&self, base: u64) -> Result<Self> {
        let c0 = self.coeffs.first().ok_or(Error::NonUnital)?;
        let b = C::from_i64(base as i64);
        let mut k = 0i64;
        let mut rest = c0.clone();
        while !rest.is_unit() {
            rest = rest.div_ref(&b)?;
            k += 1;
            if k > 64 {
                return Err(Error::NonUnital);
            }
        }
        let inv = C::unit().div_ref(c0)?;
        let mut s = self.scale(&inv);
        let extra = Some(Prefactor { base, exp: q_int(k) });
        s.prefactor = merge_prefactors(&s.prefactor, &extra)?;
        Ok(s)
    }

    /// `q d/dq`, acting termwise; the prefactor is a constant.
    pub fn theta(&self) -> Self {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.mul_ref(&C::from_q(&(&self.lead_exp + &self.step * q_int(n as i64)))))
            .collect();
        let mut s = PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: v,
            prefactor: self.prefactor.clone(),
        };
        let b = self.bound();
        s.canonicalize();
        if s.coeffs.is_empty() {
            s.lead_exp = b;
        }
        s
    }

    /// Terms whose exponent offset from `lead_exp` is `r (mod m)` steps.
    pub fn residue_class(&self, m: usize, r: usize) -> Self {
        let v: Vec<C> =
            self.coeffs.iter().enumerate().map(|(i, c)| if i % m == r { c.clone() } else { C::nil() }).collect();
        let b = self.bound();
        let mut s = PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: v,
            prefactor: self.prefactor.clone(),
        };
        s.canonicalize();
        if s.coeffs.is_empty() {
            s.lead_exp = b;
        }
        s
    }

    /// Coarsen the step to `s` (a multiple of the current step) when all skipped terms vanish.
    pub fn coarsen(&self, s: &Q) -> Result<Self> {
        let r = q_div_exact(s, &self.step).ok_or_else(|| Error::Parse("step is not a multiple".into()))?;
        let r = q_to_usize(&r);
        let mut v = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % r == 0 {
                v.push(c.clone());
            } else if !c.is_nil() {
                return Err(Error::Parse("nonzero term off the coarse lattice".into()));
            }
        }
        let n = self.coeffs.len() / r;
        v.truncate(n);
        Ok(PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: s.clone(),
            coeffs: v,
            prefactor: self.prefactor.clone(),
        })
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> PuiseuxSeries<D> {
        let mut s = PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
            prefactor: self.prefactor.clone(),
        };
        s.canonicalize();
        s
    }

    pub fn try_map<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<PuiseuxSeries<D>> {
        let v = self.coeffs.iter().map(f).collect::<Result<Vec<_>>>()?;
        let mut s = PuiseuxSeries {
            lead_exp: self.lead_exp.clone(),
            step: self.step.clone(),
            coeffs: v,
            prefactor: self.prefactor.clone(),
        };
        s.canonicalize();
        Ok(s)
    }

    /// Compose `outer(K)` with `K = inner(q)`, keeping `n_terms` terms.
    ///
    /// `outer` is `Σ a_n K^{e + n}` with integer step; its fractional power of the inner
    /// series is taken through `pow_frac` after moving the inner leading coefficient to
    /// a prefactor on `base`.
    pub fn substitute(&self, inner: &Self, base: u64, n_terms: usize) -> Result<Self> {
        if !inner.lead_exp.is_positive() || inner.is_zero() {
            return Err(Error::CompositionDiverges);
        }
        if !self.step.is_unit() {
            return Err(Error::Parse("outer series must have integer step".into()));
        }
        let e = self.lead_exp.clone();
        // power series part: Σ a_n K^n with Horner
        let mut acc = Self::zero_to(Q::zero(), inner.step.clone());
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            let c = Self::monomial(a.clone(), Q::zero(), inner.step.clone(), n_terms.max(1));
            acc = acc.add(&c);
        }
        let head = if e.is_zero() {
            Self::monomial(C::unit(), Q::zero(), inner.step.clone(), n_terms.max(1))
        } else if e.is_integer() {
            inner.pow_i(e.to_integer().to_i64().ok_or(Error::CompositionDiverges)?)?
        } else {
            inner.extract_base(base)?.pow_frac(&e)?
        };
        let mut out = head.try_mul(&acc)?;
        out = out.truncate(n_terms);
        Ok(out)
    }

    /// Serialize per the library's JSON schema, rendering coefficients with `f`.
    pub fn to_json_with(&self, f: impl Fn(&C) -> String) -> Value {
        let pf = match &self.prefactor {
            Some(p) => json!({"base": p.base, "exp": fmt_q(&p.exp)}),
            None => Value::Null,
        };
        json!({
            "lead_exp": fmt_q(&self.lead_exp),
            "step": fmt_q(&self.step),
            "prefactor": pf,
            "coeffs": self.coeffs.iter().map(f).collect::<Vec<_>>(),
        })
    }
}

impl PuiseuxSeries<Q> {
    pub fn to_json(&self) -> Value {
        self.to_json_with(fmt_q)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("series json: {m}"));
        let get = |k: &str| v.get(k).and_then(|x| x.as_str()).ok_or_else(|| bad(k));
        let lead = crate::ring::parse_q(get("lead_exp")?)?;
        let step = crate::ring::parse_q(get("step")?)?;
        if !step.is_positive() {
            return Err(bad("step must be positive"));
        }
        let coeffs = v
            .get("coeffs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("coeffs"))?
            .iter()
            .map(|c| match c {
                Value::String(s) => crate::ring::parse_q(s),
                Value::Number(n) => crate::ring::parse_q(&n.to_string()),
                _ => Err(bad("coefficient")),
            })
            .collect::<Result<Vec<_>>>()?;
        let pf = match v.get("prefactor") {
            None | Some(Value::Null) => None,
            Some(p) => {
                let base = p.get("base").and_then(|b| b.as_u64()).ok_or_else(|| bad("prefactor base"))?;
                let exp = match p.get("exp") {
                    Some(Value::String(s)) => crate::ring::parse_q(s)?,
                    Some(Value::Number(n)) => crate::ring::parse_q(&n.to_string())?,
                    _ => return Err(bad("prefactor exp")),
                };
                Some(Prefactor { base, exp })
            }
        };
        Ok(Self::new(lead, step, coeffs).with_prefactor(pf))
    }

    /// Absorb a prefactor `base^exp` with integer `exp` into the coefficients.
    pub fn absorb_integral_prefactor(&self) -> Self {
        match &self.prefactor {
            Some(p) if p.exp.is_integer() => {
                let k = p.exp.to_integer();
                let b = Q::from_integer(BigInt::from(p.base));
                let f = num_traits::pow(b, k.abs().to_usize().unwrap());
                let f = if k.is_negative() { f.recip() } else { f };
                let mut s = self.scale(&f);
                s.prefactor = None;
                s
            }
            _ => self.clone(),
        }
    }

    /// Common denominator of the stored coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}
