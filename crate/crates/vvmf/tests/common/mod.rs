#![allow(dead_code)]

use vvmf::conformal::{fusion, s_h, s_hard_hexagon, s_rank4_quasi, s_table3_s1, s_table3_s2, SMatrix};
use vvmf::frobenius::{solve_exponents, to_q_expansion};
use vvmf::hypergeom::hypergeometric_pair;
use vvmf::mlde::{mlde_residual, ExponentTuple, MonicMlde};
use vvmf::ring::{fmt_q, q_int, q_new, Coeff, Real, Q};
use vvmf::series::{delta, eisenstein, mod_derivative, PuiseuxSeries, WeightedForm};

pub const PREC: usize = 256;

/// `E4^a E6^b Δ^c` to `n` terms.
pub fn monomial(a: u32, b: u32, c: u32, n: usize) -> WeightedForm {
    let e4 = eisenstein(4, n).unwrap();
    let e6 = eisenstein(6, n).unwrap();
    let d = delta(n);
    let mut f = WeightedForm::new(0, PuiseuxSeries::monomial(q_int(1), q_int(0), q_int(1), n));
    for _ in 0..a {
        f = f.mul(&e4).unwrap();
    }
    for _ in 0..b {
        f = f.mul(&e6).unwrap();
    }
    for _ in 0..c {
        f = f.mul(&d).unwrap();
    }
    f
}

/// `a - b` is zero through `O(q^n)`.
fn vanishes(a: &PuiseuxSeries<Q>, b: &PuiseuxSeries<Q>, n: usize) -> bool {
    let d = a.try_sub(b).unwrap();
    d.is_zero() && d.bound() >= q_int(n as i64)
}

/// `D(fg) = D(f)g + fD(g)` for `f = E4^a E6^b Δ^c`, `g = E4^x E6^y Δ^z`.
pub fn leibniz(f: (u32, u32, u32), g: (u32, u32, u32), n: usize) -> Result<(), String> {
    let (f, g) = (monomial(f.0, f.1, f.2, n), monomial(g.0, g.1, g.2, n));
    let lhs = mod_derivative(&f.mul(&g).unwrap());
    let rhs = mod_derivative(&f).mul(&g).unwrap().add(&f.mul(&mod_derivative(&g)).unwrap()).unwrap();
    if lhs.weight != rhs.weight || !vanishes(&lhs.series, &rhs.series, n) {
        return Err("Leibniz rule fails".into());
    }
    Ok(())
}

/// `D(E4^a E6^b Δ^c) = -(a/3) E4^{a-1} E6^{b+1} Δ^c - (b/2) E4^{a+2} E6^{b-1} Δ^c`.
pub fn ramanujan(a: u32, b: u32, c: u32, n: usize) -> Result<(), String> {
    let d = mod_derivative(&monomial(a, b, c, n));
    let w = 4 * a as i64 + 6 * b as i64 + 12 * c as i64 + 2;
    let mut want = WeightedForm::new(w, PuiseuxSeries::zero_to(q_int(n as i64), q_int(1)));
    if a > 0 {
        want = want.add(&monomial(a - 1, b + 1, c, n).scale(&q_new(-(a as i64), 3))).unwrap();
    }
    if b > 0 {
        want = want.add(&monomial(a + 2, b - 1, c, n).scale(&q_new(-(b as i64), 2))).unwrap();
    }
    if d.weight != w || !vanishes(&d.series, &want.series, n) {
        return Err(format!("Ramanujan identity fails for E4^{a} E6^{b} Δ^{c}"));
    }
    Ok(())
}

/// Hypergeometric pair against the Frobenius solution, plus a zero MLDE residual; `None` when inadmissible.
pub fn rank2_pair(f1: &Q, n: usize) -> Option<Result<(), String>> {
    let f2 = q_new(1, 6) - f1;
    if (f1 - &f2).is_integer() {
        return None;
    }
    let pair = hypergeometric_pair(f1, &f2, n).ok()?;
    let e = ExponentTuple::new(vec![f1.clone(), f2.clone()]).ok()?;
    let direct = to_q_expansion(&solve_exponents(2, &e, n).ok()?, n, None).ok()?.normalized().ok()?;
    if pair != direct {
        return Some(Err(format!("pair ({}, {}) disagrees", fmt_q(f1), fmt_q(&f2))));
    }
    let m = MonicMlde::rank2(f1 * &f2);
    for s in &direct.series {
        if !mlde_residual(&m, s).ok()?.is_zero() {
            return Some(Err(format!("residual at ({}, {})", fmt_q(f1), fmt_q(&f2))));
        }
    }
    Some(Ok(()))
}

pub fn named_smatrices() -> Vec<(&'static str, SMatrix)> {
    vec![
        ("hard-hexagon", s_hard_hexagon(PREC)),
        ("rank4-quasi", s_rank4_quasi(PREC)),
        ("table3-S1", s_table3_s1(PREC)),
        ("table3-S2", s_table3_s2(PREC)),
        ("H", s_h(PREC)),
    ]
}

/// `S² = I`, symmetry and `N^ν_{0μ} = δ` to `tol`.
pub fn smatrix_axioms(name: &str, s: &SMatrix, tol: f64) -> Result<(), String> {
    if !s.is_involution(tol) {
        return Err(format!("{name}: S² - I = {}", s.involution_defect().to_decimal(5)));
    }
    if !s.is_symmetric(tol) {
        return Err(format!("{name}: asymmetric"));
    }
    let f = fusion(s, 0).map_err(|e| e.to_string())?;
    for m in 0..s.d() {
        for n in 0..s.d() {
            let want = Real::from_i64_prec((m == n) as i64, PREC);
            if !f.get(0, m, n).sub_ref(&want).abs().lt_f64(tol) {
                return Err(format!("{name}: N^{n}_(0,{m}) = {}", f.get(0, m, n).to_decimal(10)));
            }
        }
    }
    Ok(())
}
