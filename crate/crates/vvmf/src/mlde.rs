//! Monic weight-0 MLDEs and their Fuchsian θ_K-forms.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{fmt_q, parse_q, q_frac, q_int, q_new, Coeff, Poly, Q};
use crate::series::{eisenstein, mod_derivative, PuiseuxSeries, WeightedForm};

/// Local exponents at the cusp, pairwise distinct mod Z.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentTuple {
    e: Vec<Q>,
}

impl ExponentTuple {
    pub fn new(e: Vec<Q>) -> Result<Self> {
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                if (&e[i] - &e[j]).is_integer() {
                    return Err(Error::Logarithmic(fmt_q(&e[i]), fmt_q(&e[j])));
                }
            }
        }
        Ok(ExponentTuple { e })
    }

    /// Parse a comma separated list such as `1/40,31/40,-1/40,9/40`.
    pub fn parse(s: &str) -> Result<Self> {
        let v = s.split(',').filter(|t| !t.trim().is_empty()).map(parse_q).collect::<Result<Vec<_>>>()?;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[Q] {
        &self.e
    }
    pub fn len(&self) -> usize {
        self.e.len()
    }
    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
    /// Σ e_j, the trace of the exponent matrix.
    pub fn trace(&self) -> Q {
        self.e.iter().fold(Q::zero(), |a, b| a + b)
    }

    /// Sorted ascending, with `perm[i]` the original index of sorted entry `i`.
    pub fn sorted(&self) -> (ExponentTuple, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.e.len()).collect();
        idx.sort_by(|&a, &b| self.e[a].cmp(&self.e[b]));
        (ExponentTuple { e: idx.iter().map(|&i| self.e[i].clone()).collect() }, idx)
    }

    /// Reduced into [0, 1), the eigenvalue data of ρ(T).
    pub fn mod_one(&self) -> Vec<Q> {
        self.e.iter().map(q_frac).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.e.iter().map(|x| Value::String(fmt_q(x))).collect())
    }

    fn require_trace(&self, t: Q) -> Result<()> {
        let got = self.trace();
        if got != t {
            return Err(Error::TraceMismatch { expected: fmt_q(&t), got: fmt_q(&got) });
        }
        Ok(())
    }
}

/// Elementary symmetric polynomial σ_k.
pub fn elementary_symmetric(e: &[Q], k: usize) -> Q {
    let mut s = vec![Q::zero(); k + 1];
    s[0] = q_int(1);
    for x in e {
        for j in (1..=k).rev() {
            let t = &s[j - 1] * x;
            s[j] += t;
        }
    }
    s[k].clone()
}

/// One term `scalar · E4^e4 E6^e6 · D^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlTerm<C = Q> {
    pub order: usize,
    pub scalar: C,
    pub e4: u32,
    pub e6: u32,
}

/// `D^d + Σ_j c_j M_j D^j` acting on weight 0, with `M_j` a monomial in E4, E6 of weight 2(d-j).
#[derive(Clone, Debug, PartialEq)]
pub struct MonicMlde<C = Q> {
    degree: usize,
    terms: Vec<MlTerm<C>>,
}

impl<C: Coeff> MonicMlde<C> {
    pub fn new(degree: usize, terms: Vec<MlTerm<C>>) -> Result<Self> {
        for t in &terms {
            if t.order >= degree || 4 * t.e4 as usize + 6 * t.e6 as usize != 2 * (degree - t.order) {
                return Err(Error::Dimension(format!(
                    "term E4^{}*E6^{} D^{} has the wrong weight for degree {degree}",
                    t.e4, t.e6, t.order
                )));
            }
        }
        Ok(MonicMlde { degree, terms })
    }

    /// `D² + α E4`.
    pub fn rank2(alpha: C) -> Self {
        MonicMlde { degree: 2, terms: vec![MlTerm { order: 0, scalar: alpha, e4: 1, e6: 0 }] }
    }

    /// `D³ + a E4 D + b E6`.
    pub fn rank3(a: C, b: C) -> Self {
        MonicMlde {
            degree: 3,
            terms: vec![MlTerm { order: 1, scalar: a, e4: 1, e6: 0 }, MlTerm { order: 0, scalar: b, e4: 0, e6: 1 }],
        }
    }

    /// `D⁴ + a E4 D² + b E6 D + c E4²`.
    pub fn rank4(a: C, b: C, c: C) -> Self {
        MonicMlde {
            degree: 4,
            terms: vec![
                MlTerm { order: 2, scalar: a, e4: 1, e6: 0 },
                MlTerm { order: 1, scalar: b, e4: 0, e6: 1 },
                MlTerm { order: 0, scalar: c, e4: 2, e6: 0 },
            ],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn terms(&self) -> &[MlTerm<C>] {
        &self.terms
    }

    /// Scalar attached to `E4^e4 E6^e6 D^order`, zero when absent.
    pub fn scalar(&self, order: usize, e4: u32, e6: u32) -> C {
        self.terms
            .iter()
            .find(|t| t.order == order && t.e4 == e4 && t.e6 == e6)
            .map(|t| t.scalar.clone())
            .unwrap_or_else(C::nil)
    }

    /// Apply the operator to a weight-0 series. The result has weight `2d`.
    pub fn apply(&self, f: &PuiseuxSeries<C>) -> Result<WeightedForm<C>> {
        if f.trunc() <= self.degree {
            return Err(Error::InsufficientTruncation(format!(
                "{} terms for an operator of degree {}",
                f.trunc(),
                self.degree
            )));
        }
        let rel = f.step() * q_int(f.trunc() as i64);
        let n = rel.ceil().to_integer().try_into().unwrap_or(usize::MAX).max(1);
        let e4: PuiseuxSeries<C> = eisenstein(4, n)?.series.map(C::from_q);
        let e6: PuiseuxSeries<C> = eisenstein(6, n)?.series.map(C::from_q);
        let mut ders = vec![WeightedForm::new(0, f.clone())];
        for k in 0..self.degree {
            ders.push(mod_derivative(&ders[k]));
        }
        let mut acc = ders[self.degree].series.clone();
        for t in &self.terms {
            let mut m = ders[t.order].series.scale(&t.scalar);
            for _ in 0..t.e4 {
                m = m.try_mul(&e4)?;
            }
            for _ in 0..t.e6 {
                m = m.try_mul(&e6)?;
            }
            acc = acc.try_add(&m)?;
        }
        Ok(WeightedForm::new(2 * self.degree as i64, acc))
    }

    pub fn to_json_with(&self, f: impl Fn(&C) -> String) -> Value {
        let coeffs: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                json!({
                    "order": t.order,
                    "scalar": f(&t.scalar),
                    "monomial": monomial_name(t.e4, t.e6),
                })
            })
            .collect();
        json!({"degree": self.degree, "coeffs": coeffs})
    }
}

impl MonicMlde<Q> {
    pub fn to_json(&self) -> Value {
        self.to_json_with(fmt_q)
    }
}

fn monomial_name(e4: u32, e6: u32) -> String {
    match (e4, e6) {
        (0, 0) => "1".into(),
        (a, 0) => format!("E4^{a}"),
        (0, b) => format!("E6^{b}"),
        (a, b) => format!("E4^{a}*E6^{b}"),
    }
}

/// The residual of a monic MLDE applied to a weight-0 candidate.
pub fn mlde_residual<C: Coeff>(ode: &MonicMlde<C>, candidate: &PuiseuxSeries<C>) -> Result<PuiseuxSeries<C>> {
    Ok(ode.apply(candidate)?.series)
}

/// `Σ_j C_j(K) θ^j` with polynomial coefficients in K.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaOde<C = Q> {
    coeffs: Vec<Poly<C>>,
}

impl<C: Coeff> ThetaOde<C> {
    /// `coeffs[j]` multiplies `θ^j`; the top one must be nonzero.
    pub fn new(coeffs: Vec<Poly<C>>) -> Result<Self> {
        match coeffs.last() {
            Some(p) if !p.is_zero() => Ok(ThetaOde { coeffs }),
            _ => Err(Error::Dimension("leading θ coefficient vanishes".into())),
        }
    }

    /// `(6 - 6K)θ² - (2K + 1)θ + 6α`.
    pub fn rank2(alpha: &C) -> Self {
        let q = |n, d| C::from_q(&q_new(n, d));
        ThetaOde {
            coeffs: vec![
                Poly::constant(alpha.scale_i64(6)),
                Poly::new(vec![q(-1, 1), q(-2, 1)]),
                Poly::new(vec![q(6, 1), q(-6, 1)]),
            ],
        }
    }

    /// The θ-form of `D⁴ + a E4 D² + b E6 D + c E4²`, cleared of its `(1-K)²` denominator.
    pub fn rank4(a: &C, b: &C, c: &C) -> Self {
        let q = |n, d| C::from_q(&q_new(n, d));
        let lin = |x: &C, y: &C, k: &C| x.add_ref(y).add_ref(k);
        let p2 = vec![
            lin(&a.mul_ref(&q(36, 36)), &q(11, 36), &C::nil()),
            lin(&a.mul_ref(&q(-1, 1)), &q(-7, 9), &C::nil()),
            q(11, 9),
        ];
        let p1 = vec![
            lin(&a.mul_ref(&q(-1, 6)), &b.clone(), &q(-1, 36)),
            lin(&a.mul_ref(&q(-1, 3)), &b.mul_ref(&q(-1, 1)), &q(-1, 9)),
            q(2, 9),
        ];
        ThetaOde {
            coeffs: vec![
                Poly::constant(c.clone()),
                Poly::new(p1),
                Poly::new(p2),
                Poly::new(vec![q(-1, 1), q(-1, 1), q(2, 1)]),
                Poly::new(vec![q(1, 1), q(-2, 1), q(1, 1)]),
            ],
        }
    }

    /// θ-form of a rank-2 or rank-4 monic MLDE.
    pub fn from_monic(m: &MonicMlde<C>) -> Result<Self> {
        match m.degree() {
            2 => Ok(Self::rank2(&m.scalar(0, 1, 0))),
            4 => Ok(Self::rank4(&m.scalar(2, 1, 0), &m.scalar(1, 0, 1), &m.scalar(0, 2, 0))),
            d => Err(Error::UnsupportedRank(d)),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient polynomials, index j multiplying `θ^j`.
    pub fn coeffs(&self) -> &[Poly<C>] {
        &self.coeffs
    }

    /// `Q_k(X) = Σ_j [K^k]C_j · X^j` for `k = 0..=max(d, deg_K)`.
    pub fn q_polys(&self) -> Vec<Poly<C>> {
        let kmax = self.coeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0).max(self.degree());
        (0..=kmax).map(|k| Poly::new(self.coeffs.iter().map(|p| p.coeff(k)).collect())).collect()
    }

    /// Apply to a K-series with rational exponents.
    pub fn apply(&self, f: &PuiseuxSeries<C>) -> Result<PuiseuxSeries<C>> {
        let mut th = f.clone();
        let mut acc: Option<PuiseuxSeries<C>> = None;
        for p in &self.coeffs {
            let mut term: Option<PuiseuxSeries<C>> = None;
            for (k, c) in p.coeffs().iter().enumerate() {
                if c.is_nil() {
                    continue;
                }
                let t = th.scale(c).shift(&q_int(k as i64));
                term = Some(match term {
                    None => t,
                    Some(s) => s.try_add(&t)?,
                });
            }
            if let Some(t) = term {
                acc = Some(match acc {
                    None => t,
                    Some(s) => s.try_add(&t)?,
                });
            }
            th = th.theta();
        }
        acc.ok_or_else(|| Error::Dimension("empty operator".into()))
    }
}

impl ThetaOde<Q> {
    /// `{"degree": d, "P": [...]}` where `P[n]` multiplies `θ^{d-n}`.
    pub fn to_json(&self) -> Value {
        let p: Vec<Value> = self
            .coeffs
            .iter()
            .rev()
            .map(|p| Value::Array(p.coeffs().iter().map(|c| Value::String(fmt_q(c))).collect()))
            .collect();
        json!({"degree": self.degree(), "P": p})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("ode json: {m}"));
        let rows = v.get("P").and_then(|x| x.as_array()).ok_or_else(|| bad("P"))?;
        let mut coeffs = rows
            .iter()
            .map(|r| {
                let c = r
                    .as_array()
                    .ok_or_else(|| bad("row"))?
                    .iter()
                    .map(|c| c.as_str().map(parse_q).unwrap_or_else(|| parse_q(&c.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Poly::new(c))
            })
            .collect::<Result<Vec<_>>>()?;
        coeffs.reverse();
        Self::new(coeffs)
    }
}

/// `(a, b, c)` of `D⁴ + a E4 D² + b E6 D + c E4²` from exponents summing to 1.
pub fn rank4_abc(e: &ExponentTuple) -> Result<(Q, Q, Q)> {
    if e.len() != 4 {
        return Err(Error::Dimension(format!("rank 4 needs 4 exponents, got {}", e.len())));
    }
    e.require_trace(q_int(1))?;
    let s = e.as_slice();
    let a = elementary_symmetric(s, 2) - q_new(11, 36);
    let b = &a / q_int(6) + q_new(1, 36) - elementary_symmetric(s, 3);
    let c = elementary_symmetric(s, 4);
    Ok((a, b, c))
}

/// θ-form for rank 2 (exponents after η-stripping, summing to 1/6) or rank 4 (summing to 1).
pub fn theta_from_exponents(rank: usize, e: &ExponentTuple) -> Result<ThetaOde<Q>> {
    if e.len() != rank {
        return Err(Error::Dimension(format!("rank {rank} with {} exponents", e.len())));
    }
    match rank {
        2 => {
            e.require_trace(q_new(1, 6))?;
            let s = e.as_slice();
            Ok(ThetaOde::rank2(&(&s[0] * &s[1])))
        }
        4 => {
            let (a, b, c) = rank4_abc(e)?;
            Ok(ThetaOde::rank4(&a, &b, &c))
        }
        r => Err(Error::UnsupportedRank(r)),
    }
}

/// Monic MLDE whose indicial roots are the given exponents.
///
/// Rank 2 needs Σe = 1/6, rank 3 needs Σe = 1/2 (for `D³ + a E4 D + b E6`), rank 4 needs Σe = 1.
pub fn monic_from_symmetric(rank: usize, e: &ExponentTuple) -> Result<MonicMlde<Q>> {
    if e.len() != rank {
        return Err(Error::Dimension(format!("rank {rank} with {} exponents", e.len())));
    }
    let s = e.as_slice();
    match rank {
        2 => {
            e.require_trace(q_new(1, 6))?;
            Ok(MonicMlde::rank2(&s[0] * &s[1]))
        }
        3 => {
            e.require_trace(q_new(1, 2))?;
            let a = elementary_symmetric(s, 2) - q_new(1, 18);
            let b = -elementary_symmetric(s, 3);
            Ok(MonicMlde::rank3(a, b))
        }
        4 => {
            let (a, b, c) = rank4_abc(e)?;
            Ok(MonicMlde::rank4(a, b, c))
        }
        r => Err(Error::UnsupportedRank(r)),
    }
}

/// `Q_0, …, Q_k` of a θ-form.
pub fn indicial_data<C: Coeff>(ode: &ThetaOde<C>) -> Vec<Poly<C>> {
    ode.q_polys()
}

/// The indicial polynomial at the cusp of a monic MLDE: `Π_{k<d}(X - k/6) + Σ c_j Π_{k<j}(X - k/6)`.
pub fn cusp_indicial(m: &MonicMlde<Q>) -> Poly<Q> {
    let falling = |j: usize| Poly::from_roots(&(0..j).map(|k| q_new(k as i64, 6)).collect::<Vec<_>>());
    let mut p = falling(m.degree());
    for t in m.terms() {
        p = p.add(&falling(t.order).scale(&t.scalar));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tuple(v: &[(i64, i64)]) -> ExponentTuple {
        ExponentTuple::new(v.iter().map(|&(n, d)| q_new(n, d)).collect()).unwrap()
    }

    #[test]
    fn symmetric_map_hits_printed_coefficients() {
        let hh = tuple(&[(1, 40), (31, 40), (-1, 40), (9, 40)]);
        assert_eq!(rank4_abc(&hh).unwrap(), (q_new(-949, 7200), q_new(139, 21600), q_new(-279, 2560000)));
        let qc = tuple(&[(-41, 40), (9, 40), (31, 40), (41, 40)]);
        assert_eq!(rank4_abc(&qc).unwrap(), (q_new(-8509, 7200), q_new(19039, 21600), q_new(-468999, 2560000)));
    }

    #[test]
    fn collisions_and_traces_are_rejected() {
        assert!(matches!(ExponentTuple::new(vec![q_new(1, 12), q_new(1, 12)]), Err(Error::Logarithmic(_, _))));
        assert!(matches!(
            ExponentTuple::new(vec![q_new(1, 4), q_new(5, 4), q_int(0), q_int(-1)]),
            Err(Error::Logarithmic(_, _))
        ));
        let bad = tuple(&[(1, 40), (31, 40), (-1, 40), (11, 40)]);
        assert!(matches!(theta_from_exponents(4, &bad), Err(Error::TraceMismatch { .. })));
        assert!(matches!(theta_from_exponents(5, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn rank2_indicial_polynomials() {
        let e = tuple(&[(11, 60), (-1, 60)]);
        let ode = theta_from_exponents(2, &e).unwrap();
        let q = indicial_data(&ode);
        let alpha = q_new(11, 60) * q_new(-1, 60);
        assert_eq!(q[0], Poly::new(vec![alpha * q_int(6), q_int(-1), q_int(6)]));
        assert_eq!(q[1], Poly::new(vec![q_int(0), q_int(-2), q_int(-6)]));
        assert!(q[2].is_zero());
    }

    #[test]
    fn rank4_indicial_polynomials_match_closed_forms() {
        let e = tuple(&[(1, 40), (31, 40), (-1, 40), (9, 40)]);
        let (a, b, _) = rank4_abc(&e).unwrap();
        let q = indicial_data(&theta_from_exponents(4, &e).unwrap());
        assert_eq!(q[0], Poly::from_roots(e.as_slice()));
        // -X(2X³ + X² + (a + 7/9)X + (3a + 9b + 1)/9)
        let q1 = Poly::new(vec![
            q_int(0),
            -(q_int(3) * &a + q_int(9) * &b + q_int(1)) / q_int(9),
            -(&a + q_new(7, 9)),
            q_int(-1),
            q_int(-2),
        ]);
        assert_eq!(q[1], q1);
        let q2 = Poly::from_roots(&[q_int(0), q_int(-1), q_new(-1, 3), q_new(-2, 3)]);
        assert_eq!(q[2], q2);
        assert!(q[3].is_zero() && q[4].is_zero());
    }

    #[test]
    fn degree_one_operator() {
        let e = q_new(2, 7);
        let ode = ThetaOde::new(vec![Poly::constant(-e.clone()), Poly::constant(q_int(1))]).unwrap();
        let q = indicial_data(&ode);
        assert_eq!(q[0], Poly::linear_root(&e));
        assert!(q[1].is_zero());
    }

    #[test]
    fn random_tuples_satisfy_symmetric_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 50 {
            let d = rng.gen_range(2..60i64);
            let v: Vec<Q> = (0..3).map(|_| q_new(rng.gen_range(-2 * d..2 * d), d)).collect();
            let last = q_int(1) - v.iter().fold(Q::zero(), |a, b| a + b);
            let mut all = v.clone();
            all.push(last);
            let Ok(e) = ExponentTuple::new(all) else { continue };
            let ode = theta_from_exponents(4, &e).unwrap();
            assert_eq!(ode.q_polys()[0], Poly::from_roots(e.as_slice()));
            let m = monic_from_symmetric(4, &e).unwrap();
            assert_eq!(cusp_indicial(&m), Poly::from_roots(e.as_slice()));
            assert_eq!(ThetaOde::from_monic(&m).unwrap(), ode);
            done += 1;
        }
    }

    #[test]
    fn rank3_weight_consistent_form() {
        let e = tuple(&[(-1, 12), (1, 4), (1, 3)]);
        let m = monic_from_symmetric(3, &e).unwrap();
        assert_eq!(cusp_indicial(&m), Poly::from_roots(e.as_slice()));
        assert_eq!(m.terms()[0].e4, 1);
        assert_eq!(m.terms()[1].e6, 1);
        let wrong = tuple(&[(-1, 12), (1, 2), (1, 3)]);
        assert!(matches!(monic_from_symmetric(3, &wrong), Err(Error::TraceMismatch { .. })));
    }

    #[test]
    fn weights_are_validated() {
        let bad = MonicMlde::<Q>::new(4, vec![MlTerm { order: 2, scalar: q_int(1), e4: 0, e6: 1 }]);
        assert!(bad.is_err());
    }

    #[test]
    fn json_shapes() {
        let e = tuple(&[(1, 40), (31, 40), (-1, 40), (9, 40)]);
        let ode = theta_from_exponents(4, &e).unwrap();
        let v = ode.to_json();
        assert_eq!(v["degree"], 4);
        assert_eq!(v["P"][0], json!(["1", "-2", "1"]));
        assert_eq!(ThetaOde::from_json(&v).unwrap(), ode);
        let m = monic_from_symmetric(4, &e).unwrap().to_json();
        assert_eq!(m["coeffs"][0]["scalar"], "-949/7200");
        assert_eq!(m["coeffs"][2]["monomial"], "E4^2");
    }
}
