//! S-matrices, Verlinde fusion and the (quasi-)conformal verdicts.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frobenius::{frobenius_solve, CharacterVectorExpansion};
use crate::mlde::{ExponentTuple, ThetaOde};
use crate::ring::{fmt_q, q_frac, q_gcd, q_int, q_new, Coeff, Real, Q};
use crate::series::{kappa_unit, PuiseuxSeries};

/// Minimal complex numbers over `Real`.
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }
    pub fn real(re: Real) -> Self {
        let p = re.precision();
        Complex { re, im: Real::from_i64_prec(0, p) }
    }
    pub fn zero(prec: usize) -> Self {
        Complex::real(Real::from_i64_prec(0, prec))
    }
    pub fn add(&self, o: &Self) -> Self {
        Complex { re: self.re.add_ref(&o.re), im: self.im.add_ref(&o.im) }
    }
    pub fn mul(&self, o: &Self) -> Self {
        Complex {
            re: self.re.mul_ref(&o.re).sub_ref(&self.im.mul_ref(&o.im)),
            im: self.re.mul_ref(&o.im).add_ref(&self.im.mul_ref(&o.re)),
        }
    }
}

/// A real d×d matrix representing ρ(S) in the character basis.
#[derive(Clone, Debug)]
pub struct SMatrix {
    entries: Vec<Vec<Real>>,
    /// Closed form, when the matrix came from a formula.
    pub descriptor: Option<String>,
}

fn tol_real(t: f64, prec: usize) -> Real {
    Real::from_f64(t, prec)
}

impl SMatrix {
    pub fn new(entries: Vec<Vec<Real>>) -> Result<Self> {
        let d = entries.len();
        if d == 0 || entries.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("S-matrix must be square and nonempty".into()));
        }
        Ok(SMatrix { entries, descriptor: None })
    }

    fn described(mut self, s: &str) -> Self {
        self.descriptor = Some(s.to_string());
        self
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }
    pub fn get(&self, i: usize, j: usize) -> &Real {
        &self.entries[i][j]
    }
    pub fn rows(&self) -> &[Vec<Real>] {
        &self.entries
    }
    fn prec(&self) -> usize {
        self.entries[0][0].precision()
    }

    pub fn scaled(&self, c: &Real) -> Self {
        SMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(|x| x.mul_ref(c)).collect()).collect(),
            descriptor: None,
        }
    }

    /// `diag(s) · S · diag(s)` for signs `s_i = ±1`.
    pub fn conjugate_signs(&self, s: &[i8]) -> Self {
        let d = self.d();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if s[i] * s[j] < 0 { self.entries[i][j].neg_ref() } else { self.entries[i][j].clone() })
                    .collect()
            })
            .collect();
        SMatrix { entries, descriptor: None }
    }

    /// Reorder the basis: new index `i` is old index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let entries = perm.iter().map(|&i| perm.iter().map(|&j| self.entries[i][j].clone()).collect()).collect();
        SMatrix { entries, descriptor: None }
    }

    pub fn max_asymmetry(&self) -> Real {
        let d = self.d();
        let mut m = Real::from_i64_prec(0, self.prec());
        for i in 0..d {
            for j in 0..i {
                let x = self.entries[i][j].sub_ref(&self.entries[j][i]).abs();
                if x.cmp_real(&m) == Ordering::Greater {
                    m = x;
                }
            }
        }
        m
    }

    /// Largest entry of `|S² - I|`.
    pub fn involution_defect(&self) -> Real {
        let d = self.d();
        let p = self.prec();
        let mut m = Real::from_i64_prec(0, p);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Real::from_i64_prec(if i == j { -1 } else { 0 }, p);
                for k in 0..d {
                    acc = acc.add_ref(&self.entries[i][k].mul_ref(&self.entries[k][j]));
                }
                let a = acc.abs();
                if a.cmp_real(&m) == Ordering::Greater {
                    m = a;
                }
            }
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry().cmp_real(&tol_real(tol, self.prec())) != Ordering::Greater
    }
    pub fn is_involution(&self, tol: f64) -> bool {
        self.involution_defect().cmp_real(&tol_real(tol, self.prec())) != Ordering::Greater
    }

    /// `S_{vj} / S_{vv}`.
    pub fn quantum_dimensions(&self, vacuum: usize) -> Result<Vec<Real>> {
        let r = &self.entries[vacuum];
        r.iter().map(|x| x.div_ref(&r[vacuum])).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d(),
            "entries": self.entries.iter().map(|r| r.iter().map(|x| x.to_decimal(40)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Parse `{"d": n, "entries": [["decimal", …], …]}`.
    pub fn from_json(v: &Value, prec: usize) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("S-matrix json: {m}"));
        let d = v.get("d").and_then(|x| x.as_u64()).ok_or_else(|| bad("d"))? as usize;
        let rows = v.get("entries").and_then(|x| x.as_array()).ok_or_else(|| bad("entries"))?;
        let entries = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("row"))?
                    .iter()
                    .map(|x| {
                        let s = match x {
                            Value::String(s) => s.clone(),
                            Value::Number(n) => n.to_string(),
                            _ => return Err(bad("entry")),
                        };
                        parse_decimal(&s, prec)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != d {
            return Err(bad("d does not match entries"));
        }
        SMatrix::new(entries)
    }
}

/// Parse a decimal like `-1.25e-3` exactly, then round to `prec` bits.
pub fn parse_decimal(s: &str, prec: usize) -> Result<Real> {
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?),
        None => (t, 0),
    };
    let q = crate::ring::parse_q(mant)?;
    let scale = Q::from_integer(num_traits::pow(BigInt::from(10), exp.unsigned_abs() as usize));
    let q = if exp >= 0 { q * scale } else { q / scale };
    Ok(Real::from_q_prec(&q, prec))
}

fn r(q: Q, prec: usize) -> Real {
    Real::from_q_prec(&q, prec)
}

fn sqrt_q(q: Q, prec: usize) -> Real {
    r(q, prec).sqrt().expect("nonnegative")
}

fn cos_frac_pi(n: i64, d: i64, prec: usize) -> Real {
    Real::pi(prec).mul_ref(&r(q_new(n, d), prec)).cos()
}

fn matrix(rows: Vec<Vec<Real>>, scale: &Real) -> SMatrix {
    SMatrix::new(rows.into_iter().map(|r| r.into_iter().map(|x| x.mul_ref(scale)).collect()).collect()).expect("square")
}

/// `k = ¼√(1 + 1/√5)` and `a = √5 - 1`.
fn golden_constants(prec: usize) -> (Real, Real, Real) {
    let s5 = sqrt_q(q_int(5), prec);
    let one = Real::from_i64_prec(1, prec);
    let k = one.add_ref(&one.div_ref(&s5).unwrap()).sqrt().unwrap().mul_ref(&r(q_new(1, 4), prec));
    (k, s5.sub_ref(&one), Real::from_i64_prec(2, prec))
}

/// ρ(S) for the hard hexagon character vector.
pub fn s_hard_hexagon(prec: usize) -> SMatrix {
    let (k, a, t) = golden_constants(prec);
    let (na, nt) = (a.neg_ref(), t.neg_ref());
    matrix(
        vec![
            vec![t.clone(), nt.clone(), a.clone(), na.clone()],
            vec![nt.clone(), nt.clone(), a.clone(), a.clone()],
            vec![a.clone(), a.clone(), t.clone(), t.clone()],
            vec![na, a, t, nt],
        ],
        &k,
    )
    .described("k[[2,-2,a,-a],[-2,-2,a,a],[a,a,2,2],[-a,a,2,-2]], k = sqrt(1+1/sqrt5)/4, a = sqrt5-1")
}

/// ρ(S) for the quasi-conformal rank-4 example.
pub fn s_rank4_quasi(prec: usize) -> SMatrix {
    let (k, a, t) = golden_constants(prec);
    let (na, nt) = (a.neg_ref(), t.neg_ref());
    matrix(
        vec![
            vec![t.clone(), t.clone(), a.clone(), a.clone()],
            vec![t.clone(), nt.clone(), a.clone(), na.clone()],
            vec![a.clone(), a.clone(), nt.clone(), nt.clone()],
            vec![a, na, nt, t],
        ],
        &k,
    )
    .described("k[[2,2,a,a],[2,-2,a,-a],[a,a,-2,-2],[a,-a,-2,2]]")
}

/// S₁ for the denominator-40 reference rows.
pub fn s_table3_s1(prec: usize) -> SMatrix {
    let (k, a, t) = golden_constants(prec);
    let (na, nt) = (a.neg_ref(), t.neg_ref());
    matrix(
        vec![
            vec![a.clone(), a.clone(), t.clone(), t.clone()],
            vec![a.clone(), na.clone(), t.clone(), nt.clone()],
            vec![t.clone(), t.clone(), na.clone(), na.clone()],
            vec![t, nt, na, a],
        ],
        &k,
    )
    .described("k[[a,a,2,2],[a,-a,2,-2],[2,2,-a,-a],[2,-2,-a,a]]")
}

/// S₂ for the denominator-36 reference rows.
pub fn s_table3_s2(prec: usize) -> SMatrix {
    let c5 = cos_frac_pi(5, 18, prec);
    let s5 = Real::pi(prec).mul_ref(&r(q_new(5, 18), prec)).sin();
    let r3 = sqrt_q(q_int(3), prec);
    let r3s5 = r3.mul_ref(&s5);
    let z = Real::from_i64_prec(0, prec);
    let c52 = c5.scale_i64(2);
    matrix(
        vec![
            vec![c5.neg_ref().add_ref(&r3s5), c5.add_ref(&r3s5), c52.clone(), r3.clone()],
            vec![c5.add_ref(&r3s5), c52.clone(), c5.sub_ref(&r3s5), r3.neg_ref()],
            vec![c52, c5.sub_ref(&r3s5), c5.neg_ref().sub_ref(&r3s5), r3.clone()],
            vec![r3.clone(), r3.neg_ref(), r3, z],
        ],
        &r(q_new(1, 3), prec),
    )
    .described("(1/3)[[-c+√3s, c+√3s, 2c, √3], [c+√3s, 2c, c-√3s, -√3], [2c, c-√3s, -c-√3s, √3], [√3, -√3, √3, 0]], c = cos 5π/18, s = sin 5π/18")
}

/// The S-matrix attached to the H vector.
pub fn s_h(prec: usize) -> SMatrix {
    let c = |x: i64| cos_frac_pi(x, 18, prec).scale_i64(2);
    let r3 = sqrt_q(q_int(3), prec);
    let z = Real::from_i64_prec(0, prec);
    matrix(
        vec![
            vec![c(5), c(7).neg_ref(), c(1).neg_ref(), r3.clone()],
            vec![c(7).neg_ref(), c(1).neg_ref(), c(5).neg_ref(), r3.neg_ref()],
            vec![c(1).neg_ref(), c(5).neg_ref(), c(7), r3.clone()],
            vec![r3.clone(), r3.neg_ref(), r3, z],
        ],
        &r(q_new(1, 3), prec),
    )
    .described("(1/3)[[2c5, -2c7, -2c1, √3], [-2c7, -2c1, -2c5, -√3], [-2c1, -2c5, 2c7, √3], [√3, -√3, √3, 0]], ck = cos kπ/18")
}

/// ρ′(S) of the Γ₀(3) induced family at λ.
pub fn s_gamma03_f(lambda: &Q, prec: usize) -> SMatrix {
    let ck = |k: i64| Real::pi(prec).mul_ref(&r((lambda + q_int(k)) * q_new(2, 3), prec)).cos().scale_i64(2);
    let (c0, c1, c2) = (ck(0), ck(1), ck(2));
    let r3 = sqrt_q(q_int(3), prec);
    let z = Real::from_i64_prec(0, prec);
    matrix(
        vec![
            vec![z, r3.clone(), r3.clone(), r3.clone()],
            vec![r3.clone(), c0.clone(), c2.clone(), c1.clone()],
            vec![r3.clone(), c2.clone(), c1.clone(), c0.clone()],
            vec![r3, c1, c0, c2],
        ],
        &r(q_new(1, 3), prec),
    )
    .described("(1/3)[[0,√3,√3,√3],[√3,c0,c2,c1],[√3,c2,c1,c0],[√3,c1,c0,c2]], ck = 2cos(2π(λ+k)/3)")
}

/// Verlinde numbers `N^ν_{λμ}`, indexed `[λ][μ][ν]`.
#[derive(Clone, Debug)]
pub struct Fusion {
    pub vacuum: usize,
    pub n: Vec<Vec<Vec<Real>>>,
}

/// First failing fusion entry.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionWitness {
    pub lambda: usize,
    pub mu: usize,
    pub nu: usize,
    pub value: String,
}

impl Fusion {
    pub fn d(&self) -> usize {
        self.n.len()
    }
    pub fn get(&self, l: usize, m: usize, n: usize) -> &Real {
        &self.n[l][m][n]
    }
    fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &Real)> {
        self.n.iter().enumerate().flat_map(|(l, a)| {
            a.iter().enumerate().flat_map(move |(m, b)| b.iter().enumerate().map(move |(n, x)| (l, m, n, x)))
        })
    }
    /// First entry farther than `tol` from an integer.
    pub fn non_integral(&self, tol: f64) -> Option<FusionWitness> {
        self.entries().find(|(_, _, _, x)| !x.dist_to_int().lt_f64(tol)).map(|(l, m, n, x)| FusionWitness {
            lambda: l,
            mu: m,
            nu: n,
            value: x.to_decimal(20),
        })
    }
    /// First entry below `-tol`.
    pub fn negative(&self, tol: f64) -> Option<FusionWitness> {
        self.entries().find(|(_, _, _, x)| x.lt_f64(-tol)).map(|(l, m, n, x)| FusionWitness {
            lambda: l,
            mu: m,
            nu: n,
            value: x.to_decimal(20),
        })
    }
    /// Whether some entry lies within `tol` of `v`.
    pub fn has_value_near(&self, v: i64, tol: f64) -> bool {
        let p = self.n[0][0][0].precision();
        let t = Real::from_i64_prec(v, p);
        self.entries().any(|(_, _, _, x)| x.sub_ref(&t).abs().lt_f64(tol))
    }
    pub fn rounded(&self) -> Vec<Vec<Vec<BigInt>>> {
        self.n.iter().map(|a| a.iter().map(|b| b.iter().map(|x| x.round_int()).collect()).collect()).collect()
    }
    pub fn to_json(&self) -> Value {
        json!({
            "vacuum": self.vacuum,
            "n": self.n.iter().map(|a| a.iter().map(|b| b.iter().map(|x| x.to_fixed(12)).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// `N^ν_{λμ} = Σ_σ S_{λσ} S_{μσ} S_{νσ} / S_{vσ}`.
pub fn fusion(s: &SMatrix, vacuum: usize) -> Result<Fusion> {
    let d = s.d();
    if vacuum >= d {
        return Err(Error::Dimension(format!("vacuum index {vacuum} for rank {d}")));
    }
    let tiny = tol_real(1e-30, s.prec());
    for sigma in 0..d {
        if s.get(vacuum, sigma).abs().cmp_real(&tiny) != Ordering::Greater {
            return Err(Error::VerlindeDenominator(sigma));
        }
    }
    let inv: Vec<Real> =
        (0..d).map(|sg| Real::from_i64_prec(1, s.prec()).div_ref(s.get(vacuum, sg))).collect::<Result<_>>()?;
    let n = (0..d)
        .map(|l| {
            (0..d)
                .map(|m| {
                    (0..d)
                        .map(|nu| {
                            (0..d).fold(Real::from_i64_prec(0, s.prec()), |acc, sg| {
                                acc.add_ref(
                                    &s.get(l, sg).mul_ref(s.get(m, sg)).mul_ref(s.get(nu, sg)).mul_ref(&inv[sg]),
                                )
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(Fusion { vacuum, n })
}

/// A failing Fourier coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffWitness {
    pub coordinate: usize,
    pub index: usize,
    pub value: String,
}

/// Verdicts for the five axioms and the fusion condition.
#[derive(Clone, Debug)]
pub struct ConformalReport {
    pub nonneg_integral: bool,
    pub coeff_witness: Option<CoeffWitness>,
    pub vacuum_normalized: bool,
    pub s_real_symmetric: bool,
    pub vacuum_row_nonzero: bool,
    pub t_finite_order: bool,
    pub quasi_conformal: bool,
    pub fusion: Option<Fusion>,
    pub fusion_integral: Option<bool>,
    pub fusion_nonnegative: Option<bool>,
    pub fusion_witness: Option<FusionWitness>,
    pub conformal: bool,
    pub diagnostics: Vec<String>,
}

impl ConformalReport {
    pub fn to_json(&self) -> Value {
        let cw = self
            .coeff_witness
            .as_ref()
            .map(|w| json!({"coordinate": w.coordinate, "index": w.index, "value": w.value}));
        let fw =
            self.fusion_witness.as_ref().map(|w| json!({"lambda": w.lambda, "mu": w.mu, "nu": w.nu, "value": w.value}));
        json!({
            "nonneg_integral": self.nonneg_integral,
            "coeff_witness": cw,
            "vacuum_normalized": self.vacuum_normalized,
            "s_real_symmetric": self.s_real_symmetric,
            "vacuum_row_nonzero": self.vacuum_row_nonzero,
            "t_finite_order": self.t_finite_order,
            "quasi_conformal": self.quasi_conformal,
            "fusion_integral": self.fusion_integral,
            "fusion_nonnegative": self.fusion_nonnegative,
            "fusion_witness": fw,
            "fusion": self.fusion.as_ref().map(|f| f.rounded().iter().map(|a| a.iter().map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>()),
            "conformal": self.conformal,
            "diagnostics": self.diagnostics,
        })
    }
}

/// Tolerance for fusion integrality.
pub const FUSION_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-20;

/// Axioms (1)-(5) on the stored coefficients, with `vacuum` the vacuum coordinate.
pub fn check_quasi_conformal(
    x: &CharacterVectorExpansion,
    t: &ExponentTuple,
    s: &SMatrix,
    vacuum: usize,
) -> Result<ConformalReport> {
    let d = s.d();
    if x.rank() != d || t.len() != d || vacuum >= d {
        return Err(Error::Dimension(format!("expansion rank {}, {} exponents, S of size {d}", x.rank(), t.len())));
    }
    let mut diagnostics = Vec::new();
    let mut coeff_witness = None;
    'outer: for (j, ser) in x.series.iter().enumerate() {
        if let Some(p) = ser.prefactor() {
            coeff_witness =
                Some(CoeffWitness { coordinate: j, index: 0, value: format!("{}^{}", p.base, fmt_q(&p.exp)) });
            diagnostics.push(format!("coordinate {j} carries an unresolved prefactor"));
            break;
        }
        for (i, c) in ser.coeffs().iter().enumerate() {
            if !(c.is_integer() && !c.is_negative()) {
                coeff_witness = Some(CoeffWitness { coordinate: j, index: i, value: fmt_q(c) });
                diagnostics.push(format!("coordinate {j} term {i} is {}", fmt_q(c)));
                break 'outer;
            }
        }
    }
    let nonneg_integral = coeff_witness.is_none();
    let vs = &x.series[vacuum];
    let vacuum_normalized = vs.prefactor().is_none() && vs.lead_coeff().is_some_and(|c| c.is_one());
    if !vacuum_normalized {
        diagnostics.push("vacuum coordinate does not start with 1".into());
    }
    let s_real_symmetric = s.is_symmetric(SYMMETRY_TOL);
    if !s_real_symmetric {
        diagnostics.push(format!("S asymmetry {}", s.max_asymmetry().to_decimal(6)));
    }
    let tiny = tol_real(1e-30, s.prec());
    let zero_at = (0..d).find(|&k| s.get(vacuum, k).abs().cmp_real(&tiny) != Ordering::Greater);
    let vacuum_row_nonzero = zero_at.is_none();
    if let Some(k) = zero_at {
        diagnostics.push(format!("S[{vacuum}][{k}] vanishes"));
    }
    let mismatch = (0..d).find(|&j| q_frac(&x.exponents[j]) != q_frac(&t.as_slice()[j]));
    let t_finite_order = mismatch.is_none();
    if let Some(j) = mismatch {
        diagnostics.push(format!("exponent {j} disagrees with ρ(T) mod 1"));
    }
    let quasi_conformal =
        nonneg_integral && vacuum_normalized && s_real_symmetric && vacuum_row_nonzero && t_finite_order;
    Ok(ConformalReport {
        nonneg_integral,
        coeff_witness,
        vacuum_normalized,
        s_real_symmetric,
        vacuum_row_nonzero,
        t_finite_order,
        quasi_conformal,
        fusion: None,
        fusion_integral: None,
        fusion_nonnegative: None,
        fusion_witness: None,
        conformal: false,
        diagnostics,
    })
}

/// The fusion part of the conformal verdict on its own.
pub fn fusion_verdict(s: &SMatrix, vacuum: usize) -> Result<(Fusion, bool, bool, Option<FusionWitness>)> {
    let f = fusion(s, vacuum)?;
    let ni = f.non_integral(FUSION_TOL);
    let neg = f.negative(FUSION_TOL);
    let (integral, nonneg) = (ni.is_none(), neg.is_none());
    let w = ni.or(neg);
    Ok((f, integral, nonneg, w))
}

/// Quasi-conformal checks plus fusion integrality and nonnegativity.
pub fn check_conformal(
    x: &CharacterVectorExpansion,
    t: &ExponentTuple,
    s: &SMatrix,
    vacuum: usize,
) -> Result<ConformalReport> {
    let mut rep = check_quasi_conformal(x, t, s, vacuum)?;
    if rep.vacuum_row_nonzero {
        let (f, integral, nonneg, w) = fusion_verdict(s, vacuum)?;
        if let Some(w) = &w {
            rep.diagnostics.push(format!("N^{}_{{{},{}}} = {}", w.nu, w.lambda, w.mu, w.value));
        }
        rep.fusion = Some(f);
        rep.fusion_integral = Some(integral);
        rep.fusion_nonnegative = Some(nonneg);
        rep.fusion_witness = w;
        rep.conformal = rep.quasi_conformal && integral && nonneg;
    }
    Ok(rep)
}

/// Smallest positive `s ≤ max_scale` making the first `n_terms` coefficients nonnegative integers.
pub fn integrality_scale(series: &PuiseuxSeries<Q>, n_terms: usize, max_scale: &BigInt) -> Option<(Q, Vec<BigInt>)> {
    let c: Vec<&Q> = series.coeffs().iter().take(n_terms).collect();
    if c.is_empty() || c.iter().any(|x| x.is_negative()) {
        return None;
    }
    let g = c.iter().fold(Q::zero(), |acc, x| q_gcd(&acc, x));
    if g.is_zero() {
        return None;
    }
    let s = Q::one() / g;
    if s > Q::from_integer(max_scale.clone()) {
        return None;
    }
    Some((s.clone(), c.iter().map(|x| (*x * &s).to_integer()).collect()))
}

/// Relative q¹, q² coefficients of one coordinate and whether they force mixed signs.
#[derive(Clone, Debug, PartialEq)]
pub struct SignConstraint {
    pub exponent: Q,
    pub a1: Q,
    pub q1: Q,
    pub q2: Q,
    pub mixed: bool,
}

impl SignConstraint {
    pub fn to_json(&self) -> Value {
        json!({"exponent": fmt_q(&self.exponent), "a1": fmt_q(&self.a1), "q1": fmt_q(&self.q1), "q2": fmt_q(&self.q2), "mixed": self.mixed})
    }
}

/// Relative coefficients of `K^e(1 + a1 K + a2 K²)` in q, with the lead scaled to 1.
pub fn relative_q_coeffs(e: &Q, a1: &Q, a2: &Q) -> Result<(Q, Q)> {
    let u = kappa_unit(3);
    let ue = u.pow_unital(e)?;
    let ue1 = u.pow_unital(&(e + q_int(1)))?;
    let k = q_int(1728);
    let q1 = ue.coeffs().get(1).cloned().unwrap_or_default() + &k * a1;
    let q2 = ue.coeffs().get(2).cloned().unwrap_or_default()
        + &k * a1 * ue1.coeffs().get(1).cloned().unwrap_or_default()
        + &k * &k * a2;
    Ok((q1, q2))
}

/// Evaluate the first two relative q-coefficients of each coordinate.
pub fn sign_prescreen(e: &ExponentTuple, ode: &ThetaOde<Q>) -> Result<Vec<SignConstraint>> {
    e.as_slice()
        .iter()
        .map(|x| {
            let s = frobenius_solve(ode, x, 3)?;
            let (q1, q2) = relative_q_coeffs(x, &s.coeffs[1], &s.coeffs[2])?;
            let mixed = q1.is_negative() || q2.is_negative();
            Ok(SignConstraint { exponent: x.clone(), a1: s.coeffs[1].clone(), q1, q2, mixed })
        })
        .collect()
}

/// `lcm` of denominators, used to report how far a row is from integral.
pub fn denominator_lcm(v: &[Q]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}
