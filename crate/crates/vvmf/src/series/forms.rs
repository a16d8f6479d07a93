//! Eisenstein series, eta quotients, j, K = 1728/j and the modular derivative.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PuiseuxSeries;
use crate::error::{Error, Result};
use crate::ring::{fmt_q, q_int, q_new, Coeff, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum FormTag {
    E2,
    E4,
    E6,
    Delta,
    J,
    K,
    EtaQuotient(String),
    Other(String),
}

/// A q-series with its modular weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedForm<C = Q> {
    pub weight: i64,
    pub series: PuiseuxSeries<C>,
    pub tag: Option<FormTag>,
}

impl<C: Coeff> WeightedForm<C> {
    pub fn new(weight: i64, series: PuiseuxSeries<C>) -> Self {
        WeightedForm { weight, series, tag: None }
    }
    pub fn tagged(mut self, t: FormTag) -> Self {
        self.tag = Some(t);
        self
    }
    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(WeightedForm::new(self.weight + o.weight, self.series.try_mul(&o.series)?))
    }
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.weight != o.weight {
            return Err(Error::Dimension(format!("weights {} and {} differ", self.weight, o.weight)));
        }
        Ok(WeightedForm::new(self.weight, self.series.try_add(&o.series)?))
    }
    pub fn scale(&self, c: &C) -> Self {
        WeightedForm::new(self.weight, self.series.scale(c))
    }
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> WeightedForm<D> {
        WeightedForm { weight: self.weight, series: self.series.map(f), tag: self.tag.clone() }
    }
}

/// Divisor power sum σ_k(n).
pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// Bernoulli numbers B_k for k in {2, 4, 6}.
fn bernoulli_even(k: i64) -> Option<Q> {
    match k {
        2 => Some(q_new(1, 6)),
        4 => Some(q_new(-1, 30)),
        6 => Some(q_new(1, 42)),
        _ => None,
    }
}

/// Normalized Eisenstein series `E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) q^n` to `n_terms` terms.
pub fn eisenstein(k: i64, n_terms: usize) -> Result<WeightedForm> {
    let b = bernoulli_even(k).ok_or(Error::UnsupportedWeight(k))?;
    let n_terms = n_terms.max(1);
    let factor = -(q_int(2 * k) / b);
    let mut v = Vec::with_capacity(n_terms);
    v.push(q_int(1));
    for n in 1..n_terms {
        v.push(&factor * Q::from_integer(sigma((k - 1) as u32, n as u64)));
    }
    let tag = match k {
        2 => FormTag::E2,
        4 => FormTag::E4,
        _ => FormTag::E6,
    };
    Ok(WeightedForm::new(k, PuiseuxSeries::power_series(v)).tagged(tag))
}

/// `Π η(q^m)^p` over `(m, p)` factors, to `n_terms` terms of the natural step.
pub fn eta_quotient(factors: &[(Q, i64)], n_terms: usize) -> Result<PuiseuxSeries<Q>> {
    let mut den = BigInt::one();
    let mut lead = Q::zero();
    for (m, p) in factors {
        if !m.is_positive() {
            return Err(Error::BadScale(fmt_q(m)));
        }
        den = den.lcm(m.denom());
        lead += m * q_int(*p) / q_int(24);
    }
    let step = Q::new(BigInt::one(), den);
    let mut v = vec![Q::zero(); n_terms];
    if n_terms > 0 {
        v[0] = q_int(1);
    }
    for (m, p) in factors {
        let mm = (m / &step).to_integer().to_usize().expect("small scale");
        let mut k = mm;
        while k < n_terms && k > 0 {
            mul_one_minus_power(&mut v, k, *p);
            k += mm;
        }
    }
    Ok(PuiseuxSeries::new(lead, step, v))
}

/// In place: v *= (1 - y^k)^p for integer p.
fn mul_one_minus_power(v: &mut [Q], k: usize, p: i64) {
    let n = v.len();
    if p >= 0 {
        for _ in 0..p {
            for i in (k..n).rev() {
                let t = v[i - k].clone();
                v[i] -= t;
            }
        }
    } else {
        for _ in 0..(-p) {
            for i in k..n {
                let t = v[i - k].clone();
                v[i] += t;
            }
        }
    }
}

/// Δ = η^24 = q Π (1 - q^n)^24.
pub fn delta(n_terms: usize) -> WeightedForm {
    let s = eta_quotient(&[(q_int(1), 24)], n_terms).expect("valid scale");
    WeightedForm::new(12, s).tagged(FormTag::Delta)
}

/// `(j, K)` with `j = E4³/Δ` and `K = 1728/j`, each to `n_terms` terms.
pub fn j_and_kappa(n_terms: usize) -> (WeightedForm, WeightedForm) {
    let n = n_terms.max(1);
    let e4 = eisenstein(4, n).unwrap().series;
    let d = delta(n).series;
    let e43 = e4.pow_u(3);
    let j = e43.try_div(&d).expect("Δ has unit lead");
    let k = d.scale(&q_int(1728)).try_div(&e43).expect("E4 has unit lead");
    (WeightedForm::new(0, j).tagged(FormTag::J), WeightedForm::new(0, k).tagged(FormTag::K))
}

/// `K / (1728 q)`, the unital part of K.
pub fn kappa_unit(n_terms: usize) -> PuiseuxSeries<Q> {
    let (_, k) = j_and_kappa(n_terms);
    k.series.scale(&q_new(1, 1728)).shift(&q_int(-1))
}

/// `D_k f = q df/dq - (k/12) E2 f`, raising the weight by 2.
pub fn mod_derivative<C: Coeff>(f: &WeightedForm<C>) -> WeightedForm<C> {
    let s = &f.series;
    let rel = s.step() * q_int(s.trunc() as i64);
    let n = rel.ceil().to_integer().to_usize().unwrap_or(0).max(1);
    let e2: PuiseuxSeries<C> = eisenstein(2, n).unwrap().series.map(C::from_q);
    let corr = e2.mul(s).scale(&C::from_q(&q_new(f.weight, 12)));
    let d = s.theta().sub(&corr);
    WeightedForm::new(f.weight + 2, d)
}

/// Apply `mod_derivative` `times` times.
pub fn mod_derivative_n<C: Coeff>(f: &WeightedForm<C>, times: usize) -> WeightedForm<C> {
    let mut g = f.clone();
    for _ in 0..times {
        g = mod_derivative(&g);
    }
    g
}
