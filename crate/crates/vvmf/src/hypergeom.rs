//! Rank-2 closed forms: ₂F₁, Γ, the scalar X, the symmetric S-matrix and dim M₀.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::conformal::{Complex, SMatrix};
use crate::error::{Error, Result};
use crate::frobenius::{to_q_expansion, CharacterVectorExpansion, FrobeniusSolution};
use crate::ring::{fmt_q, q_int, q_new, q_to_i64, Coeff, Real, Q};
use crate::series::{eisenstein, eta_quotient, PuiseuxSeries};

pub use crate::frobenius::rising as pochhammer;

/// `Σ (a)_n (b)_n / ((c)_n n!) K^n`, exact.
pub fn hyp2f1(a: &Q, b: &Q, c: &Q, n_terms: usize) -> Result<PuiseuxSeries<Q>> {
    Ok(PuiseuxSeries::power_series(hyp2f1_coeffs(a, b, c, n_terms)?))
}

pub fn hyp2f1_coeffs(a: &Q, b: &Q, c: &Q, n_terms: usize) -> Result<Vec<Q>> {
    let mut v = Vec::with_capacity(n_terms);
    let mut t = Q::one();
    for n in 0..n_terms {
        v.push(t.clone());
        let k = q_int(n as i64);
        let den = (c + &k) * (&k + q_int(1));
        if den.is_zero() {
            return Err(Error::PochhammerPole(n + 1));
        }
        t = t * (a + &k) * (b + &k) / den;
    }
    Ok(v)
}

fn bernoulli_cache() -> &'static Mutex<Vec<Q>> {
    static B: OnceLock<Mutex<Vec<Q>>> = OnceLock::new();
    B.get_or_init(|| Mutex::new(vec![Q::one()]))
}

/// Bernoulli number `B_m` (with `B_1 = -1/2`), computed exactly and cached.
pub fn bernoulli(m: usize) -> Q {
    let mut b = bernoulli_cache().lock().expect("bernoulli cache");
    while b.len() <= m {
        let n = b.len();
        if n > 1 && n % 2 == 1 {
            b.push(Q::zero());
            continue;
        }
        // Σ_{j<n} C(n+1, j) B_j = -(n+1) B_n
        let mut acc = Q::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                acc += bj * Q::from_integer(binom.clone());
            }
            binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / q_int(n as i64 + 1));
    }
    b[m].clone()
}

fn real_q(q: &Q, prec: usize) -> Real {
    Real::from_q_prec(q, prec)
}

fn two_pow_neg(bits: usize, prec: usize) -> Real {
    Real::from_i64_prec(2, prec).powr(&Real::from_i64_prec(-(bits as i64), prec)).expect("positive base")
}

/// `ln Γ(y)` by Stirling's series; `y` must be large.
fn ln_gamma_stirling(y: &Real, prec: usize) -> Result<Real> {
    let half = real_q(&q_new(1, 2), prec);
    let two_pi = Real::pi(prec).scale_i64(2);
    let mut s = y.sub_ref(&half).mul_ref(&y.ln()?).sub_ref(y).add_ref(&two_pi.ln()?.mul_ref(&half));
    let tol = two_pow_neg(prec + 8, prec);
    let y2 = y.mul_ref(y);
    let mut ypow = y.clone();
    let mut prev: Option<Real> = None;
    for k in 1..2000usize {
        let b = real_q(&bernoulli(2 * k), prec);
        let d = Real::from_i64_prec((2 * k * (2 * k - 1)) as i64, prec).mul_ref(&ypow);
        let term = b.div_ref(&d)?;
        let mag = term.abs();
        if let Some(p) = &prev {
            if mag.cmp_real(p) == std::cmp::Ordering::Greater {
                break;
            }
        }
        s = s.add_ref(&term);
        if mag.cmp_real(&tol) == std::cmp::Ordering::Less {
            break;
        }
        prev = Some(mag);
        ypow = ypow.mul_ref(&y2);
    }
    Ok(s)
}

/// Γ(x) to `precision_bits` bits.
pub fn gamma_fn(x: &Real, precision_bits: usize) -> Result<Real> {
    let w = precision_bits + 64;
    let x = x.with_precision(w);
    if !x.is_positive()
        && x.dist_to_int().cmp_real(&two_pow_neg(precision_bits.saturating_sub(16), w)) != std::cmp::Ordering::Greater
    {
        return Err(Error::GammaPole(x.to_decimal(20)));
    }
    let half = real_q(&q_new(1, 2), w);
    if x.cmp_real(&half) == std::cmp::Ordering::Less {
        let pi = Real::pi(w);
        let s = pi.mul_ref(&x).sin();
        let g = gamma_fn(&Real::unit().with_precision(w).sub_ref(&x), w)?;
        return Ok(pi.div_ref(&s.mul_ref(&g))?.with_precision(precision_bits));
    }
    let x0 = (w as f64) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI) + 10.0;
    let xf = x.to_f64();
    let m = if xf < x0 { (x0 - xf).ceil() as i64 } else { 0 };
    let mut prod = Real::unit().with_precision(w);
    for i in 0..m {
        prod = prod.mul_ref(&x.add_ref(&Real::from_i64_prec(i, w)));
    }
    let y = x.add_ref(&Real::from_i64_prec(m, w));
    let lg = ln_gamma_stirling(&y, w)?;
    Ok(lg.exp()?.div_ref(&prod)?.with_precision(precision_bits))
}

/// Γ at a rational point; exact poles are reported by value.
pub fn gamma_q(x: &Q, precision_bits: usize) -> Result<Real> {
    if x.is_integer() && !x.is_positive() {
        return Err(Error::GammaPole(fmt_q(x)));
    }
    gamma_fn(&real_q(x, precision_bits + 64), precision_bits)
}

/// `sin(π x)` at a rational point.
pub fn sin_pi(x: &Q, prec: usize) -> Real {
    if x.is_integer() {
        return Real::from_i64_prec(0, prec);
    }
    Real::pi(prec + 32).mul_ref(&real_q(x, prec + 32)).sin().with_precision(prec)
}

/// `cos(π x)` at a rational point.
pub fn cos_pi(x: &Q, prec: usize) -> Real {
    Real::pi(prec + 32).mul_ref(&real_q(x, prec + 32)).cos().with_precision(prec)
}

/// Central charge and conformal weight of a rank-2 candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank2Params {
    pub c: Q,
    pub h: Q,
}

impl Rank2Params {
    pub fn new(c: Q, h: Q) -> Result<Self> {
        if h.is_integer() {
            return Err(Error::Degenerate(format!("h = {} is an integer", fmt_q(&h))));
        }
        Ok(Rank2Params { c, h })
    }
    pub fn e1(&self) -> Q {
        -(&self.c / q_int(24))
    }
    pub fn e2(&self) -> Q {
        &self.h - &self.c / q_int(24)
    }
    /// `6(e1 + e2) - 1 = 6h - c/2 - 1`.
    pub fn k1(&self) -> Q {
        q_int(6) * &self.h - &self.c / q_int(2) - q_int(1)
    }
    pub fn f1(&self) -> Q {
        q_new(1, 12) - &self.h / q_int(2)
    }
    pub fn f2(&self) -> Q {
        q_new(1, 12) + &self.h / q_int(2)
    }
    fn extremal_k1(&self) -> Result<i64> {
        match q_to_i64(&self.k1()) {
            Some(k) if k == 0 || k == -2 || k == -4 => Ok(k),
            _ => Err(Error::NotExtremal(fmt_q(&self.k1()))),
        }
    }
    pub fn to_json(&self) -> Value {
        json!({"c": fmt_q(&self.c), "h": fmt_q(&self.h), "k1": fmt_q(&self.k1())})
    }
}

fn radicand_sqrt(num: Real, den: Real, what: &str) -> Result<Real> {
    if den.is_nil() {
        return Err(Error::Degenerate(format!("{what}: vanishing denominator")));
    }
    let r = num.div_ref(&den)?;
    if !r.is_positive() {
        return Err(Error::Degenerate(format!("{what}: radicand {} is not positive", r.to_decimal(12))));
    }
    r.sqrt()
}

/// `√(sin π(h - 1/6) / sin π(h + 1/6))`.
fn x_root(h: &Q, prec: usize) -> Result<Real> {
    radicand_sqrt(sin_pi(&(h - q_new(1, 6)), prec), sin_pi(&(h + q_new(1, 6)), prec), &format!("h = {}", fmt_q(h)))
}

fn four_pow_neg(h: &Q, prec: usize) -> Result<Real> {
    Real::from_i64_prec(4, prec).powr(&real_q(&-h, prec))
}

/// X via the simplified Γ-ratio in h alone.
pub fn rank2_x_h_ratio(p: &Rank2Params, prec: usize) -> Result<Real> {
    let h = &p.h;
    let w = prec + 32;
    let g = gamma_q(&-h, w)?
        .mul_ref(&gamma_q(&(q_new(5, 6) + h), w)?)
        .div_ref(&gamma_q(h, w)?.mul_ref(&gamma_q(&(q_new(5, 6) - h), w)?))?;
    Ok(four_pow_neg(h, w)?.mul_ref(&g).mul_ref(&x_root(h, w)?).with_precision(prec))
}

/// X via the six-Γ expression in f1, f2.
pub fn rank2_x_six_gamma(p: &Rank2Params, prec: usize) -> Result<Real> {
    let (f1, f2) = (p.f1(), p.f2());
    let w = prec + 32;
    let two3 = q_new(2, 3);
    let one = q_int(1);
    let num = gamma_q(&(&f1 - &f2), w)?.mul_ref(&gamma_q(&(&one - &f1), w)?).mul_ref(&gamma_q(&(&two3 - &f1), w)?);
    let den = gamma_q(&(&f2 - &f1), w)?.mul_ref(&gamma_q(&(&one - &f2), w)?).mul_ref(&gamma_q(&(&two3 - &f2), w)?);
    let third = q_new(1, 3);
    let rn = sin_pi(&f1, w).mul_ref(&sin_pi(&(&f1 + &third), w)).neg_ref();
    let rd = sin_pi(&f2, w).mul_ref(&sin_pi(&(&f2 + &third), w));
    let root = radicand_sqrt(rn, rd, &format!("f1 = {}", fmt_q(&f1)))?;
    Ok(num.div_ref(&den)?.mul_ref(&root).with_precision(prec))
}

/// `₂F₁(a, b; c; 1)` by partial sums with Richardson extrapolation in `N^{-(c-a-b)-k}`.
pub fn hyp2f1_at_one(a: &Q, b: &Q, c: &Q, prec: usize) -> Result<Real> {
    let p = c - a - b;
    if !p.is_positive() {
        return Err(Error::Degenerate(format!("c - a - b = {} is not positive", fmt_q(&p))));
    }
    let w = prec + 64;
    let levels = 10usize;
    let n0 = 32usize;
    let (ar, br, cr) = (real_q(a, w), real_q(b, w), real_q(c, w));
    let mut sums = Vec::with_capacity(levels);
    let mut t = Real::unit().with_precision(w);
    let mut s = Real::from_i64_prec(0, w);
    let mut n = 0usize;
    for lvl in 0..levels {
        let target = n0 << lvl;
        while n < target {
            s = s.add_ref(&t);
            let k = Real::from_i64_prec(n as i64, w);
            let den = cr.add_ref(&k).mul_ref(&k.add_ref(&Real::unit()));
            if den.is_nil() {
                return Err(Error::PochhammerPole(n + 1));
            }
            t = t.mul_ref(&ar.add_ref(&k)).mul_ref(&br.add_ref(&k)).div_ref(&den)?;
            n += 1;
        }
        sums.push(s.clone());
    }
    let pr = real_q(&p, w);
    let two = Real::from_i64_prec(2, w);
    let mut row = sums;
    for k in 0..levels - 1 {
        let r = two.powr(&pr.add_ref(&Real::from_i64_prec(k as i64, w)))?;
        let denom = r.sub_ref(&Real::unit());
        row = (0..row.len() - 1)
            .map(|i| row[i + 1].mul_ref(&r).sub_ref(&row[i]).div_ref(&denom))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(row[0].with_precision(prec))
}

/// X through Gauss's value of `₂F₁(-2h, -5/6; -h; 1)`; valid for h > -5/6.
pub fn rank2_x_gauss(p: &Rank2Params, prec: usize) -> Result<Real> {
    let h = &p.h;
    let w = prec + 32;
    let f = hyp2f1_at_one(&(q_int(-2) * h), &q_new(-5, 6), &-h, w)?;
    Ok(four_pow_neg(h, w)?.mul_ref(&f).mul_ref(&x_root(h, w)?).with_precision(prec))
}

/// Signed X, after checking the two closed forms agree to `2^{-(prec - 40)}` relative.
pub fn rank2_x(p: &Rank2Params, sign: i8, prec: usize) -> Result<Real> {
    let a = rank2_x_h_ratio(p, prec)?;
    let b = rank2_x_six_gamma(p, prec)?;
    let tol = two_pow_neg(prec.saturating_sub(40), prec).mul_ref(&a.abs().add_ref(&Real::unit()));
    if a.sub_ref(&b).abs().cmp_real(&tol) == std::cmp::Ordering::Greater {
        return Err(Error::Numeric(format!("X forms disagree: {} vs {}", a.to_decimal(30), b.to_decimal(30))));
    }
    Ok(if sign < 0 { a.neg_ref() } else { a })
}

/// Numeric dim M₀ with an integrality verdict.
#[derive(Clone, Debug)]
pub struct DimM0 {
    pub params: Rank2Params,
    pub k1: i64,
    /// Absolute value.
    pub value: Real,
    pub integral: bool,
    pub rounded: BigInt,
}

impl DimM0 {
    pub fn to_json(&self) -> Value {
        json!({
            "c": fmt_q(&self.params.c),
            "h": fmt_q(&self.params.h),
            "k1": self.k1,
            "value": self.value.to_fixed(12),
            "integral": self.integral,
            "rounded": self.rounded.to_string(),
        })
    }
}

/// `1728^h X`, times `(1+6h)/(1-6h)` when `k1 = -2`, before taking absolute values.
pub fn dim_m0_signed(p: &Rank2Params, sign: i8, prec: usize) -> Result<Real> {
    let k1 = p.extremal_k1()?;
    let x = rank2_x(p, sign, prec)?;
    let mut v = Real::from_i64_prec(1728, prec).powr(&real_q(&p.h, prec))?.mul_ref(&x);
    if k1 == -2 {
        let six_h = q_int(6) * &p.h;
        v = v.mul_ref(&real_q(&((q_int(1) + &six_h) / (q_int(1) - &six_h)), prec));
    }
    Ok(v)
}

/// dim M₀ with verdict: integral when within 10⁻⁶ of an integer.
pub fn dim_m0(p: &Rank2Params, prec: usize) -> Result<DimM0> {
    let k1 = p.extremal_k1()?;
    let value = dim_m0_signed(p, 1, prec)?.abs();
    let integral = value.dist_to_int().lt_f64(1e-6);
    Ok(DimM0 { params: p.clone(), k1, rounded: value.round_int(), value, integral })
}

/// `ρ(T) = diag(e^{2πi e_j})`.
pub fn t_matrix(e: &[Q], prec: usize) -> Vec<Complex> {
    e.iter().map(|x| Complex::new(cos_pi(&(q_int(2) * x), prec), sin_pi(&(q_int(2) * x), prec))).collect()
}

/// Real symmetric ρ(S) for exponents `(e1, e2)`, with ρ(T) alongside.
pub fn rank2_s(e1: &Q, e2: &Q, sign: i8, prec: usize) -> Result<(SMatrix, Vec<Complex>)> {
    let d = e1 - e2;
    for (name, v) in [("e1", e1), ("e2", e2), ("e1 - e2", &d)] {
        if v.is_integer() {
            return Err(Error::Degenerate(format!("{name} = {} is an integer", fmt_q(v))));
        }
    }
    // the overall phase is i^{2φ} with φ = 3(e1+e2)/2 + 1/4 turns
    let phi2 = q_int(3) * (e1 + e2) + q_new(1, 2);
    let Some(k) = q_to_i64(&phi2) else {
        return Err(Error::Degenerate(format!("ρ(S) is not real for e1 + e2 = {}", fmt_q(&(e1 + e2)))));
    };
    let w = prec + 32;
    let phase = if k.rem_euclid(2) == 0 { 1 } else { -1 };
    let pref = Real::from_i64_prec(phase, w).div_ref(&sin_pi(&d, w).scale_i64(2))?;
    let rad = Real::unit().with_precision(w).sub_ref(&cos_pi(&(q_int(2) * &d), w).scale_i64(2));
    if rad.is_negative() {
        return Err(Error::Degenerate(format!("1 - 2cos 2π(e1 - e2) < 0 at e1 - e2 = {}", fmt_q(&d))));
    }
    let mut r = rad.sqrt()?;
    if sign < 0 {
        r = r.neg_ref();
    }
    let entries = vec![vec![pref.clone(), pref.mul_ref(&r)], vec![pref.mul_ref(&r), pref.neg_ref()]];
    let s = SMatrix::new(
        entries.into_iter().map(|row| row.into_iter().map(|x| x.with_precision(prec)).collect()).collect(),
    )?;
    Ok((s, t_matrix(&[e1.clone(), e2.clone()], prec)))
}

/// A rank-2 extremal row assembled from the ₂F₁ pair.
#[derive(Clone, Debug)]
pub struct Rank2Character {
    pub params: Rank2Params,
    pub dim: DimM0,
    /// Coordinate 1 has lead 1; coordinate 2 has lead 1, or `rounded` when integral.
    pub expansion: CharacterVectorExpansion,
}

impl Rank2Character {
    pub fn to_json(&self) -> Value {
        json!({"params": self.params.to_json(), "dim_m0": self.dim.to_json(), "expansion": self.expansion.to_json()})
    }
}

/// The pair `q^{f_i} U^{f_i} ₂F₁(f_i, f_i + 1/3; 1 + f_i - f_j; K)`, each normalized to lead 1.
pub fn hypergeometric_pair(f1: &Q, f2: &Q, n_terms: usize) -> Result<CharacterVectorExpansion> {
    let third = q_new(1, 3);
    let sols = [(f1, f2), (f2, f1)]
        .iter()
        .map(|(a, b)| {
            Ok(FrobeniusSolution {
                exponent: (*a).clone(),
                coeffs: hyp2f1_coeffs(a, &(*a + &third), &(q_int(1) + *a - *b), n_terms)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    to_q_expansion(&sols, n_terms, None)?.normalized()
}

/// The extremal character vector for `(c, h)`.
pub fn rank2_extremal_character(p: &Rank2Params, n_terms: usize, prec: usize) -> Result<Rank2Character> {
    let k1 = p.extremal_k1()?;
    if k1 == -2 && q_int(6) * &p.h == q_int(1) {
        return Err(Error::Degenerate("1 - 6h vanishes".into()));
    }
    let dim = dim_m0(p, prec)?;
    let pair = hypergeometric_pair(&p.f1(), &p.f2(), n_terms)?;
    let series: Vec<PuiseuxSeries<Q>> = match k1 {
        0 => pair.series.clone(),
        -2 => {
            let eta = eta_quotient(&[(q_int(1), -4)], n_terms)?;
            let c = q_int(12) / (q_int(1) - q_int(6) * &p.h);
            pair.series.iter().map(|s| s.theta().try_mul(&eta).map(|x| x.scale(&c))).collect::<Result<_>>()?
        }
        _ => {
            let eta = eta_quotient(&[(q_int(1), -8)], n_terms)?;
            let e4 = eisenstein(4, n_terms)?.series;
            pair.series.iter().map(|s| s.try_mul(&eta)?.try_mul(&e4)).collect::<Result<_>>()?
        }
    };
    let exponents = series.iter().map(|s| s.lead_exp().clone()).collect();
    let raw = CharacterVectorExpansion { exponents, series, rescale: None };
    let expansion = if dim.integral && !dim.rounded.is_zero() {
        raw.rescaled(&[q_int(1), Q::from_integer(dim.rounded.clone())])?
    } else {
        raw.normalized()?
    };
    Ok(Rank2Character { params: p.clone(), dim, expansion })
}

/// The reference integral and non-integral rank-2 parameter sets used by the CLI.
pub fn table1_cases() -> Vec<Rank2Params> {
    [(33, 1, 9, 4), (-6, 1, -1, 3), (-8, 1, -1, 2), (-10, 1, -2, 3)]
        .iter()
        .map(|&(cn, cd, hn, hd)| Rank2Params::new(q_new(cn, cd), q_new(hn, hd)).expect("non-integral h"))
        .collect()
}

/// Rounded value of a real as `i64` when it fits.
pub fn round_i64(x: &Real) -> Option<i64> {
    x.round_int().to_i64()
}
