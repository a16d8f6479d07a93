//! The Γ₀(3) induced family and the vectors derived from it.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::conformal::{s_h, SMatrix};
use crate::error::{Error, Result};
use crate::frobenius::{family_solve, to_q_expansion, CharacterVectorExpansion};
use crate::mlde::{MonicMlde, ThetaOde};
use crate::ring::{fmt_q, q_int, q_new, Coeff, RatFun, Q};
use crate::series::{eisenstein, eta_quotient, j_and_kappa, mod_derivative, Prefactor, PuiseuxSeries, WeightedForm};

/// `(A, B, C)` with `D⁴ + A E4 D² + B E6 D + C E4²` annihilating `z^λ`.
pub fn gamma03_abc<C: Coeff>(l: &C) -> (C, C, C) {
    let q = |n, d| C::from_q(&q_new(n, d));
    let l2 = l.mul_ref(l);
    let l3 = l2.mul_ref(l);
    let a = l2.mul_ref(&q(-2, 3)).add_ref(&l.mul_ref(&q(-1, 3))).add_ref(&q(-1, 12));
    let b = l3.mul_ref(&q(8, 27)).add_ref(&l2.mul_ref(&q(4, 9))).add_ref(&l.mul_ref(&q(5, 54))).add_ref(&q(1, 72));
    let c = l2.mul_ref(&l.add_ref(&q(1, 1))).mul_ref(&l.add_ref(&q(2, 1))).mul_ref(&q(-1, 27));
    (a, b, c)
}

/// The closed forms as printed in the literature; kept for comparison only.
pub fn gamma03_abc_printed<C: Coeff>(l: &C) -> (C, C, C) {
    let q = |n, d| C::from_q(&q_new(n, d));
    let l2 = l.mul_ref(l);
    let l3 = l2.mul_ref(l);
    let a = l2.mul_ref(&q(2, 3)).add_ref(&l.mul_ref(&q(1, 3))).add_ref(&q(1, 12));
    let b = l3.mul_ref(&q(1, 9)).add_ref(&l2.mul_ref(&q(4, 9))).add_ref(&l.mul_ref(&q(5, 54))).add_ref(&q(1, 72));
    let quad = l2.add_ref(&l.mul_ref(&q(1, 2))).add_ref(&q(3, 4));
    let c = l.mul_ref(&l.sub_ref(&q(1, 2))).mul_ref(&quad).mul_ref(&q(-1, 27));
    (a, b, c)
}

/// `(−λ, λ/3, (λ+1)/3, (λ+2)/3)`.
pub fn gamma03_exponents(l: &Q) -> Vec<Q> {
    let three = q_int(3);
    vec![-l, l / &three, (l + q_int(1)) / &three, (l + q_int(2)) / &three]
}

/// Reducible monodromy: `12λ ≡ 0 (mod 3)`, i.e. `4λ ∈ ℤ`.
pub fn gamma03_reducible(l: &Q) -> bool {
    (l * q_int(4)).is_integer()
}

/// `z₁ = η(τ)¹²/η(3τ)¹² = q⁻¹ − 12 + 54q − …`.
pub fn z1_series(n_terms: usize) -> PuiseuxSeries<Q> {
    eta_quotient(&[(q_int(1), 12), (q_int(3), -12)], n_terms).expect("positive scales")
}

/// `z₂ = 729 η(τ)¹²/η(τ/3)¹²`, with the 729 kept as a base-3 prefactor; `n_terms` in steps of 1/3.
pub fn z2_series(n_terms: usize) -> PuiseuxSeries<Q> {
    eta_quotient(&[(q_int(1), 12), (q_new(1, 3), -12)], n_terms)
        .expect("positive scales")
        .with_prefactor(Some(Prefactor { base: 3, exp: q_int(6) }))
}

/// `(z₁^λ q^λ, (z₂/729)^λ q^{−λ/3})` with a symbolic λ, as series in `q` and `q^{1/3}`.
pub fn z_powers_symbolic(n_terms: usize) -> Result<(PuiseuxSeries<RatFun>, PuiseuxSeries<RatFun>)> {
    let l = RatFun::param();
    let u1 = z1_series(n_terms).shift(&q_int(1)).map(RatFun::from_q);
    let u2 = eta_quotient(&[(q_int(1), 12), (q_new(1, 3), -12)], 3 * n_terms)?.shift(&q_new(-1, 3)).map(RatFun::from_q);
    Ok((u1.pow_unital(&l)?, u2.pow_unital(&l)?))
}

/// `f₁ = −D(z₁)/z₁`, the weight-2 eigenform.
pub fn f1_series(n_terms: usize) -> Result<PuiseuxSeries<Q>> {
    let z = z1_series(n_terms + 1);
    Ok(z.theta().neg().try_div(&z)?.truncate(n_terms))
}

/// Residuals of `D(f₁) = −f₁²/4 + E4/12` and `f₁⁴ = (2/3)f₁²E4 + (1/27)E4² + (8/27)f₁E6`.
pub fn f1_identities(n_terms: usize) -> Result<(PuiseuxSeries<Q>, PuiseuxSeries<Q>)> {
    let f = f1_series(n_terms)?;
    let e4 = eisenstein(4, n_terms)?.series;
    let e6 = eisenstein(6, n_terms)?.series;
    let df = mod_derivative(&WeightedForm::new(2, f.clone())).series;
    let f2 = f.mul(&f);
    let r1 = df.add(&f2.scale(&q_new(1, 4))).sub(&e4.scale(&q_new(1, 12)));
    let rhs =
        f2.mul(&e4).scale(&q_new(2, 3)).add(&e4.mul(&e4).scale(&q_new(1, 27))).add(&f.mul(&e6).scale(&q_new(8, 27)));
    let r2 = f2.mul(&f2).sub(&rhs);
    Ok((r1, r2))
}

/// `j·z₁³ − (z₁+27)(z₁+243)³`; identically zero when the Belyi relation holds.
pub fn belyi_verify(n_terms: usize) -> Result<PuiseuxSeries<Q>> {
    if n_terms < 5 {
        return Err(Error::InsufficientTruncation(format!("{n_terms} terms, need at least 5")));
    }
    let z = z1_series(n_terms);
    let (j, _) = j_and_kappa(n_terms);
    let konst = |c: i64| PuiseuxSeries::monomial(q_int(c), Q::zero(), q_int(1), n_terms + 1);
    let lhs = j.series.try_mul(&z.pow_u(3))?;
    let a = z.try_add(&konst(27))?;
    let b = z.try_add(&konst(243))?;
    lhs.try_sub(&a.try_mul(&b.pow_u(3))?)
}

/// `z₁^λ` and the three residue classes of `(z₂/729)^λ`, each to `n_terms` terms.
pub fn gamma03_coordinates(l: &Q, n_terms: usize) -> Result<CharacterVectorExpansion> {
    let c1 = z1_series(n_terms).pow_frac(l)?;
    let w = eta_quotient(&[(q_int(1), 12), (q_new(1, 3), -12)], 3 * n_terms + 3)?.pow_frac(l)?;
    let pf = Prefactor { base: 3, exp: l * q_int(6) + q_new(1, 2) };
    let mut series = vec![c1];
    for r in 0..3 {
        let s = w.residue_class(3, r).coarsen(&q_int(1))?.truncate(n_terms).with_prefactor(Some(pf.clone()));
        series.push(s);
    }
    Ok(CharacterVectorExpansion { exponents: gamma03_exponents(l), series, rescale: None })
}

/// The same four coordinates from Frobenius solutions of the `(A, B, C)` equation.
pub fn gamma03_frobenius(l: &Q, n_terms: usize) -> Result<CharacterVectorExpansion> {
    let (a, b, c) = gamma03_abc(l);
    let ode = ThetaOde::rank4(&a, &b, &c);
    let sols = family_solve(&ode, &gamma03_exponents(l), n_terms)?;
    to_q_expansion(&sols, n_terms, None)
}

/// Whether two expansions agree coordinatewise after dividing by leads.
pub fn agree_normalized(x: &CharacterVectorExpansion, y: &CharacterVectorExpansion) -> Result<bool> {
    let (x, y) = (x.normalized()?, y.normalized()?);
    let n = x.n_terms().min(y.n_terms());
    Ok(x.rank() == y.rank()
        && (0..x.rank()).all(|j| x.series[j].lead_exp() == y.series[j].lead_exp() && x.row(j, n) == y.row(j, n)))
}

/// The induced family at a rational λ.
#[derive(Clone, Debug)]
pub struct Gamma03Family {
    pub lambda: Q,
    pub abc: (Q, Q, Q),
    pub exponents: Vec<Q>,
    pub z1: PuiseuxSeries<Q>,
    pub z2: PuiseuxSeries<Q>,
    /// Coordinates two to four carry `3^{6λ+1/2}` as a prefactor.
    pub coordinates: CharacterVectorExpansion,
    pub reducible: bool,
    /// `None` when the Frobenius route is unavailable (resonance or a vanishing coordinate).
    pub frobenius_agrees: Option<bool>,
}

impl Gamma03Family {
    pub fn mlde(&self) -> MonicMlde<Q> {
        MonicMlde::rank4(self.abc.0.clone(), self.abc.1.clone(), self.abc.2.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambda": fmt_q(&self.lambda),
            "abc": [fmt_q(&self.abc.0), fmt_q(&self.abc.1), fmt_q(&self.abc.2)],
            "exponents": self.exponents.iter().map(fmt_q).collect::<Vec<_>>(),
            "reducible": self.reducible,
            "frobenius_agrees": self.frobenius_agrees,
            "z1": self.z1.to_json(),
            "z2": self.z2.to_json(),
            "coordinates": self.coordinates.to_json(),
        })
    }
}

/// Build the family by the η-quotient route and cross-check against the MLDE.
pub fn gamma03_family(l: &Q, n_terms: usize) -> Result<Gamma03Family> {
    let coordinates = gamma03_coordinates(l, n_terms)?;
    let frobenius_agrees = gamma03_frobenius(l, n_terms).ok().and_then(|y| agree_normalized(&coordinates, &y).ok());
    Ok(Gamma03Family {
        lambda: l.clone(),
        abc: gamma03_abc(l),
        exponents: gamma03_exponents(l),
        z1: z1_series(n_terms),
        z2: z2_series(3 * n_terms),
        coordinates,
        reducible: gamma03_reducible(l),
        frobenius_agrees,
    })
}

/// `G = η⁻⁴ D(F)`; exponents shift by −1/6.
pub fn gamma03_g(l: &Q, n_terms: usize) -> Result<CharacterVectorExpansion> {
    let f = gamma03_coordinates(l, n_terms)?;
    let eta = eta_quotient(&[(q_int(1), -4)], n_terms)?;
    let series =
        f.series.iter().map(|s| s.theta().try_mul(&eta).map(|g| g.truncate(n_terms))).collect::<Result<Vec<_>>>()?;
    let exponents = f.exponents.iter().map(|e| e - q_new(1, 6)).collect();
    Ok(CharacterVectorExpansion { exponents, series, rescale: None })
}

/// `det(θ^i f_j)`, the Wronskian of a weight-0 vector.
pub fn wronskian(x: &CharacterVectorExpansion) -> Result<PuiseuxSeries<Q>> {
    let d = x.rank();
    let rows: Vec<Vec<PuiseuxSeries<Q>>> = x
        .series
        .iter()
        .map(|s| {
            let mut v = vec![s.clone().with_prefactor(None)];
            for i in 1..d {
                let t = v[i - 1].theta();
                v.push(t);
            }
            v
        })
        .collect();
    let mut acc: Option<PuiseuxSeries<Q>> = None;
    for (perm, sign) in permutations(d) {
        let mut term = rows[0][perm[0]].clone();
        for j in 1..d {
            term = term.try_mul(&rows[j][perm[j]])?;
        }
        if sign < 0 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.try_add(&term)?,
        });
    }
    acc.ok_or_else(|| Error::Dimension("empty vector".into()))
}

/// All permutations of `0..d` with their signs, in lexicographic order.
pub fn permutations(d: usize) -> Vec<(Vec<usize>, i8)> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i8)>) {
        if left.is_empty() {
            let inv = (0..prefix.len())
                .flat_map(|i| (i + 1..prefix.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| prefix[i] > prefix[j])
                .count();
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..left.len() {
            let x = left.remove(k);
            prefix.push(x);
            go(prefix, left, out);
            prefix.pop();
            left.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..d).collect(), &mut out);
    out
}

/// H coordinate `j` is `H_RESCALE[j] · G[H_PERMUTATION[j]]` at λ = −1/12.
pub const H_PERMUTATION: [usize; 4] = [3, 1, 2, 0];

pub fn h_rescale() -> Vec<Q> {
    vec![q_new(-36, 23), q_int(-36), q_new(-36, 11), q_int(12)]
}

pub fn h_exponents() -> Vec<Q> {
    vec![q_new(17, 36), q_new(-7, 36), q_new(5, 36), q_new(-1, 12)]
}

const H_ROWS: [&[i64]; 4] = [
    &[1, 0, 25, 133, 578, 1970, 6076, 16840],
    &[1, 13, 98, 471, 1780, 5765, 16856],
    &[1, 13, 73, 338, 1251, 4048, 11838],
    &[1, 17, 116, 496, 1817, 5742, 16535],
];

/// Offsets of the printed (nonzero-by-display) coefficients of each H row.
pub fn h_printed_positions(row: usize) -> Vec<usize> {
    (0..H_ROWS[row].len()).filter(|&i| !(row == 0 && i == 1)).collect()
}

/// The reference H vector as published.
pub fn h_printed() -> CharacterVectorExpansion {
    let series = h_exponents()
        .into_iter()
        .zip(H_ROWS.iter())
        .map(|(e, r)| PuiseuxSeries::new(e, q_int(1), r.iter().map(|&c| q_int(c)).collect()))
        .collect();
    CharacterVectorExpansion { exponents: h_exponents(), series, rescale: None }
}

/// One printed coefficient next to its derived value.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffComparison {
    pub coordinate: usize,
    pub index: usize,
    pub printed: BigInt,
    pub derived: Q,
}

impl CoeffComparison {
    pub fn matches(&self) -> bool {
        self.derived == Q::from_integer(self.printed.clone())
    }
}

/// Derived H next to the printed one.
#[derive(Clone, Debug)]
pub struct HReport {
    pub derived: CharacterVectorExpansion,
    pub printed: CharacterVectorExpansion,
    pub s: SMatrix,
    pub comparisons: Vec<CoeffComparison>,
}

impl HReport {
    pub fn matched(&self) -> usize {
        self.comparisons.iter().filter(|c| c.matches()).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "permutation": H_PERMUTATION,
            "rescale": h_rescale().iter().map(fmt_q).collect::<Vec<_>>(),
            "derived": self.derived.to_json(),
            "printed": self.printed.to_json(),
            "smatrix": self.s.to_json(),
            "matched": self.matched(),
            "compared": self.comparisons.len(),
            "mismatches": self.comparisons.iter().filter(|c| !c.matches()).map(|c| json!({
                "coordinate": c.coordinate, "index": c.index,
                "printed": c.printed.to_string(), "derived": fmt_q(&c.derived),
            })).collect::<Vec<_>>(),
        })
    }
}

/// The H vector from `G(−1/12)` under the frozen permutation and rescaling.
pub fn gamma03_h_derived(n_terms: usize) -> Result<CharacterVectorExpansion> {
    let g = gamma03_g(&q_new(-1, 12), n_terms)?;
    let r = h_rescale();
    let series = H_PERMUTATION.iter().zip(&r).map(|(&p, r)| g.series[p].absorb_integral_prefactor().scale(r)).collect();
    Ok(CharacterVectorExpansion {
        exponents: H_PERMUTATION.iter().map(|&p| g.exponents[p].clone()).collect(),
        series,
        rescale: Some(r),
    })
}

/// Compare the derived H with every printed coefficient.
pub fn gamma03_h(n_terms: usize, prec: usize) -> Result<HReport> {
    if n_terms < 8 {
        return Err(Error::InsufficientTruncation(format!("{n_terms} terms, need at least 8")));
    }
    let derived = gamma03_h_derived(n_terms)?;
    let printed = h_printed();
    let mut comparisons = Vec::new();
    for (j, row) in H_ROWS.iter().enumerate() {
        let s = &derived.series[j];
        for i in h_printed_positions(j) {
            let e = &printed.exponents[j] + q_int(i as i64);
            comparisons.push(CoeffComparison {
                coordinate: j,
                index: i,
                printed: BigInt::from(row[i]),
                derived: s.coeff_at(&e)?,
            });
        }
    }
    Ok(HReport { derived, printed, s: s_h(prec), comparisons })
}

/// Per-coordinate sign of the stored coefficients; `Err(j)` names the first mixed coordinate.
pub fn coordinate_signs(x: &CharacterVectorExpansion) -> std::result::Result<Vec<i8>, usize> {
    x.series
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let pos = s.coeffs().iter().any(|c| c.is_positive());
            let neg = s.coeffs().iter().any(|c| c.is_negative());
            match (pos, neg) {
                (true, true) => Err(j),
                (false, true) => Ok(-1),
                _ => Ok(1),
            }
        })
        .collect()
}

/// `q`-coefficients as plain rationals after absorbing integral prefactors.
pub fn absorbed(x: &CharacterVectorExpansion) -> CharacterVectorExpansion {
    CharacterVectorExpansion {
        exponents: x.exponents.clone(),
        series: x.series.iter().map(|s| s.absorb_integral_prefactor()).collect(),
        rescale: x.rescale.clone(),
    }
}
