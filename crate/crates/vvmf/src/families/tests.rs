use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::conformal::{fusion, s_gamma03_f, FUSION_TOL};
use crate::mlde::{mlde_residual, rank4_abc, ExponentTuple, MonicMlde};
use crate::ring::{q_int, q_new, Coeff, Poly, RatFun, Q};
use crate::series::{eisenstein, eta_quotient, PuiseuxSeries};

const P: usize = 256;

fn ints(v: &[Q]) -> Vec<i64> {
    v.iter().map(|c| c.to_integer().to_i64().unwrap()).collect()
}

fn rf(c: &[(i64, i64)]) -> RatFun {
    RatFun::from_poly(Poly::new(c.iter().map(|&(n, d)| q_new(n, d)).collect()))
}

#[test]
fn abc_matches_symmetric_functions_of_the_exponents() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let l = q_new(rng.gen_range(-50..50), rng.gen_range(1..30));
        let e = ExponentTuple::new(gamma03_exponents(&l));
        let Ok(e) = e else { continue };
        assert_eq!(rank4_abc(&e).unwrap(), gamma03_abc(&l));
    }
    assert_eq!(gamma03_abc(&q_int(0)), (q_new(-1, 12), q_new(1, 72), q_int(0)));
    let (a, b, c) = gamma03_abc(&q_new(-1, 12));
    assert_eq!((a, b, c), (q_new(-13, 216), q_new(53, 5832), q_new(-253, 559872)));
}

/// Re-derive (A, B, C) from the D-power expansions of z^λ in the basis f²E4, E4², fE6.
#[test]
fn abc_from_d_power_expressions() {
    let l = RatFun::param();
    let q = |n, d| RatFun::from_q(&q_new(n, d));
    let lp = |c: &[(i64, i64)]| rf(c);
    // D²: (4λ²+λ)/4 f² − λ/12 E4 ; D: −λ f ; D⁴ reduced: coefficients of f²E4, E4², fE6
    let d2_f2 = lp(&[(0, 1), (1, 4), (1, 1)]);
    let d2_e4 = lp(&[(0, 1), (-1, 12)]);
    let d1_f = lp(&[(0, 1), (-1, 1)]);
    let d4 = [
        lp(&[(0, 1), (1, 48), (8, 48), (24, 48), (32, 48)]),
        lp(&[(0, 1), (-3, 432), (20, 432), (24, 432), (16, 432)]),
        lp(&[(0, 1), (3, 216), (20, 216), (96, 216), (64, 216)]),
    ];
    // f²E4: d4[0] + A d2_f2 = 0 ; fE6: d4[2] + B d1_f = 0 ; E4²: d4[1] + A d2_e4 + C = 0
    let a = d4[0].neg_ref().div_ref(&d2_f2).unwrap();
    let b = d4[2].neg_ref().div_ref(&d1_f).unwrap();
    let c = d4[1].neg_ref().sub_ref(&a.mul_ref(&d2_e4));
    let (ea, eb, ec) = gamma03_abc(&l);
    assert_eq!((a.clone(), b.clone(), c.clone()), (ea, eb, ec));
    let _ = q(1, 1);
    let at = |x: &RatFun| x.specialize(&q_new(-1, 12)).unwrap();
    assert_eq!(at(&a), q_new(-13, 216));
    assert_eq!(at(&b), q_new(53, 5832));
    assert_eq!(at(&c), q_new(-253, 559872));
}

#[test]
fn derived_abc_annihilates_z_power_and_printed_does_not() {
    for l in [q_new(-1, 12), q_new(2, 7), q_new(-7, 12)] {
        let z = z1_series(14).pow_frac(&l).unwrap();
        let (a, b, c) = gamma03_abc(&l);
        let r = mlde_residual(&MonicMlde::rank4(a, b, c), &z).unwrap();
        assert!(r.is_zero(), "λ = {l}");
        let (a, b, c) = gamma03_abc_printed(&l);
        let r = mlde_residual(&MonicMlde::rank4(a, b, c), &z).unwrap();
        assert!(!r.is_zero());
    }
}

#[test]
fn printed_abc_special_values() {
    assert_eq!(gamma03_abc_printed(&q_int(0)), (q_new(1, 12), q_new(1, 72), q_int(0)));
    assert_eq!(gamma03_abc_printed(&q_new(1, 2)).2, q_int(0));
    assert_eq!(gamma03_abc_printed(&q_new(-1, 12)).0, q_new(13, 216));
}

#[test]
fn hauptmodul_expansions() {
    let z1 = z1_series(9);
    assert_eq!(z1.lead_exp(), &q_int(-1));
    assert_eq!(ints(z1.coeffs()), vec![1, -12, 54, -76, -243, 1188, -1384, -2916, 11934]);
    let z2 = z2_series(7);
    assert_eq!(z2.lead_exp(), &q_new(1, 3));
    assert_eq!(z2.step(), &q_new(1, 3));
    assert_eq!(ints(z2.coeffs()), vec![1, 12, 90, 508, 2391, 9828, 36428]);
    assert_eq!(z2.prefactor().unwrap().exp, q_int(6));
}

/// Product expansion by brute-force multiplication of (1 - q^n) factors.
#[test]
fn z1_against_naive_product() {
    let n = 12;
    let mut num = vec![Q::zero(); n];
    num[0] = q_int(1);
    let mul = |v: &mut Vec<Q>, k: usize, sign: i64| {
        for i in (k..v.len()).rev() {
            let t = v[i - k].clone();
            v[i] = &v[i] + t * q_int(sign);
        }
    };
    for m in 1..n {
        for _ in 0..12 {
            mul(&mut num, m, -1);
        }
    }
    let mut den = vec![Q::zero(); n];
    den[0] = q_int(1);
    for m in 1..n {
        if 3 * m < n {
            for _ in 0..12 {
                mul(&mut den, 3 * m, -1);
            }
        }
    }
    let a = PuiseuxSeries::new(q_int(-1), q_int(1), num);
    let b = PuiseuxSeries::new(q_int(0), q_int(1), den);
    assert_eq!(a.try_div(&b).unwrap(), z1_series(n));
}

#[test]
fn symbolic_coordinate_corrections() {
    let (u1, u2) = z_powers_symbolic(4).unwrap();
    let l = |c: &[(i64, i64)]| rf(c);
    assert_eq!(u1.coeffs()[1], l(&[(0, 1), (-12, 1)]));
    // 72λ(λ − 1/4)
    assert_eq!(u1.coeffs()[2], l(&[(0, 1), (-18, 1), (72, 1)]));
    // −288λ(λ² − (3/4)λ + 1/72)
    assert_eq!(u1.coeffs()[3], l(&[(0, 1), (-4, 1), (216, 1), (-288, 1)]));
    // coordinate 2 first correction, at q^{1/3·3}: 288λ(λ² + (3/4)λ + 1/72)
    assert_eq!(u2.coeffs()[3], l(&[(0, 1), (4, 1), (216, 1), (288, 1)]));
}

#[test]
fn f1_and_its_identities() {
    let f = f1_series(10).unwrap();
    assert_eq!(ints(&f.coeffs()[..5]), vec![1, 12, 36, 12, 84]);
    let (r1, r2) = f1_identities(22).unwrap();
    assert!(r1.is_zero() && r2.is_zero());
    assert!(r1.bound() >= q_int(20) && r2.bound() >= q_int(20));
}

#[test]
fn belyi_relation_holds() {
    let r = belyi_verify(34).unwrap();
    assert!(r.is_zero());
    assert!(r.bound() >= q_int(30), "bound {}", r.bound());
    assert!(belyi_verify(4).is_err());
}

#[test]
fn two_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ls = vec![q_new(-1, 12), q_new(-7, 12), q_new(5, 12)];
    while ls.len() < 8 {
        let l = q_new(rng.gen_range(-40..40), rng.gen_range(2..25));
        if !gamma03_reducible(&l) && ExponentTuple::new(gamma03_exponents(&l)).is_ok() {
            ls.push(l);
        }
    }
    for l in ls {
        let fam = gamma03_family(&l, 20).unwrap();
        assert_eq!(fam.frobenius_agrees, Some(true), "λ = {l}");
        assert_eq!(fam.coordinates.n_terms(), 20);
        for (s, e) in fam.coordinates.series.iter().zip(&fam.exponents) {
            assert!((s.lead_exp() - e).is_integer());
        }
    }
}

#[test]
fn symbolic_frobenius_specializes() {
    let l = RatFun::param();
    let (a, b, c) = gamma03_abc(&l);
    let ode = crate::mlde::ThetaOde::rank4(&a, &b, &c);
    let s = crate::frobenius::frobenius_solve(&ode, &l.neg_ref(), 5).unwrap();
    for x in [q_new(-1, 12), q_new(3, 7)] {
        let (a, b, c) = gamma03_abc(&x);
        let odeq = crate::mlde::ThetaOde::rank4(&a, &b, &c);
        let sq = crate::frobenius::frobenius_solve(&odeq, &-x.clone(), 5).unwrap();
        let spec: Vec<Q> = s.coeffs.iter().map(|c| c.specialize(&x).unwrap()).collect();
        assert_eq!(spec, sq.coeffs);
    }
}

#[test]
fn reducibility_flag() {
    for (n, red) in [(-3, true), (-6, true), (-1, false), (-5, false), (9, true), (4, false)] {
        assert_eq!(gamma03_reducible(&q_new(n, 12)), red, "{n}/12");
    }
}

#[test]
fn coordinate_prefactors() {
    let x = gamma03_coordinates(&q_new(-7, 12), 6).unwrap();
    assert!(x.series[0].prefactor().is_none());
    for s in &x.series[1..] {
        assert_eq!(s.prefactor().unwrap().exp, q_int(-3));
    }
    assert!(gamma03_coordinates(&q_new(-1, 12), 6).unwrap().series[1].prefactor().is_none());
}

#[test]
fn s_prime_is_an_involution_for_random_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let l = q_new(rng.gen_range(-100..100), rng.gen_range(1..50));
        let s = s_gamma03_f(&l, P);
        assert!(s.is_involution(1e-20) && s.is_symmetric(1e-20));
    }
}

#[test]
fn g_first_coordinate_display() {
    for l in [q_new(-1, 12), q_new(2, 7), q_new(5, 3), q_new(-9, 4), q_new(1, 1)] {
        let g = gamma03_g(&l, 4).unwrap();
        let c = g.series[0].coeffs();
        assert_eq!(g.series[0].lead_exp(), &(-&l - q_new(1, 6)));
        assert_eq!(c[0], -l.clone());
        assert_eq!(c[1], q_int(12) * &l * (&l - q_new(4, 3)));
        assert_eq!(c[2], q_int(-72) * &l * (&l - q_new(7, 3)) * (&l - q_new(7, 12)));
    }
}

#[test]
fn g_exponents_shift() {
    let l = q_new(2, 7);
    let g = gamma03_g(&l, 4).unwrap();
    let f = gamma03_exponents(&l);
    for (a, b) in g.exponents.iter().zip(&f) {
        assert_eq!(a, &(b - q_new(1, 6)));
    }
}

#[test]
fn g_just_above_seven_twelfths_has_mixed_signs() {
    let l = q_new(7, 12) + q_new(1, 100);
    let g = absorbed(&gamma03_g(&l, 12).unwrap());
    assert!(coordinate_signs(&g).is_err());
}

#[test]
fn h_permutation_is_frozen() {
    let h = gamma03_h_derived(8).unwrap();
    assert_eq!(h.exponents, h_exponents());
    for s in &h.series {
        assert_eq!(s.lead_coeff(), Some(&q_int(1)));
        assert!(s.prefactor().is_none());
    }
    assert_eq!(ints(&h.row(3, 7)), vec![1, 17, 116, 496, 1817, 5742, 16535]);
}

#[test]
fn h_report_counts() {
    let r = gamma03_h(8, P).unwrap();
    assert_eq!(r.comparisons.len(), 28);
    // leading ones of all rows and the whole fourth row
    assert_eq!(r.matched(), 10);
    assert!(gamma03_h(7, P).is_err());
}

/// Any weight-0 rank-4 form with exponent sum 1/3 has Wronskian η⁸ times a weight-8 form, i.e. η⁸E4².
#[test]
fn wronskian_separates_derived_from_printed_h() {
    let n = 7;
    let target = eta_quotient(&[(q_int(1), 8)], n).unwrap().mul(&eisenstein(4, n).unwrap().series.pow_u(2));
    let norm = |s: PuiseuxSeries<Q>| {
        let c = s.lead_coeff().unwrap().clone();
        s.scale(&(q_int(1) / c))
    };
    let wd = norm(wronskian(&gamma03_h_derived(n).unwrap()).unwrap());
    assert_eq!(wd.truncate(n), target.truncate(n));
    let wp = norm(wronskian(&h_printed().clone()).unwrap());
    assert_ne!(wp.truncate(4), target.truncate(4));
}

#[test]
fn h_smatrix_fusion() {
    let r = gamma03_h(8, P).unwrap();
    let f = fusion(&r.s, 0).unwrap();
    assert!(f.non_integral(FUSION_TOL).is_none() && f.negative(FUSION_TOL).is_none());
}

#[test]
fn builtin_data() {
    let hh = builtin_instance("hard-hexagon", P).unwrap();
    assert_eq!(hh.exponents.as_slice(), &[q_new(1, 40), q_new(31, 40), q_new(-1, 40), q_new(9, 40)]);
    assert_eq!(rank4_abc(&hh.exponents).unwrap(), (q_new(-949, 7200), q_new(139, 21600), q_new(-279, 2560000)));
    let t1 = builtin_instance("table3-row-1", P).unwrap();
    assert_eq!(t1.rescale.unwrap(), vec![q_int(1), q_int(792), q_int(3366), q_int(14280)]);
    assert!(matches!(builtin_instance("nope", P), Err(crate::Error::UnknownInstance(_))));
    for n in BUILTIN_NAMES {
        let b = builtin_instance(n, P).unwrap();
        assert_eq!(b.reference.len(), 4);
    }
}

#[test]
fn builtins_reproduce_their_references() {
    for n in ["hard-hexagon", "rank4-quasi", "table3-row-1", "table3-row-2", "table3-row-3", "table3-row-4"] {
        let b = builtin_instance(n, P).unwrap();
        let x = b.solve(b.reference_len()).unwrap();
        assert_eq!(b.mismatches(&x).unwrap(), vec![], "{n}");
        let m = b.mlde.as_ref().unwrap();
        for s in &x.series {
            assert!(mlde_residual(m, s).unwrap().is_zero());
        }
    }
}

#[test]
fn f_line_scan() {
    let ls = line_lambdas(-8, -1, false);
    assert_eq!(ls, vec![q_new(-7, 12), q_new(-5, 12), q_new(-3, 12), q_new(-1, 12)]);
    let v = gamma03_line_scan(FamilyLine::F, &ls, 15, 0, P).unwrap();
    assert!(!v[2].irreducible);
    assert_eq!(quasi_conformal_survivors(&v), vec![q_new(-7, 12), q_new(-5, 12), q_new(-1, 12)]);
    assert_eq!(conformal_survivors(&v), vec![q_new(-7, 12), q_new(-1, 12)]);
    let five = &v[1];
    assert!(five.vacua.iter().any(|(_, r)| r.quasi_conformal && r.fusion_nonnegative == Some(false)));
}

#[test]
fn line_scan_is_worker_independent() {
    let ls = line_lambdas(-7, 7, true);
    let a = gamma03_line_scan(FamilyLine::G, &ls, 10, 1, P).unwrap();
    let b = gamma03_line_scan(FamilyLine::G, &ls, 10, 8, P).unwrap();
    let j = |v: &[LineVerdict]| v.iter().map(|x| x.to_json().to_string()).collect::<Vec<_>>();
    assert_eq!(j(&a), j(&b));
}

#[test]
fn enumeration_is_sorted_and_bounded() {
    let mut cfg = ScanConfig { domain: ScanDomain::Box { denominator: 12, lo: -12, hi: 12 }, ..Default::default() };
    let t = enumerate_tuples(&cfg).unwrap();
    assert!(!t.is_empty());
    for w in t.windows(2) {
        assert!(
            w[0].exponents < w[1].exponents
                || w[0].exponents.iter().map(|x| x.denom().clone()).max()
                    != w[1].exponents.iter().map(|x| x.denom().clone()).max()
        );
    }
    for s in &t {
        assert_eq!(s.exponents.iter().sum::<Q>(), q_int(1));
    }
    cfg.budget = 3;
    assert!(matches!(rank4_scan(&cfg), Err(crate::Error::Budget(3))));
}

#[test]
fn config_parsing() {
    let c = ScanConfig::from_kv(
        "n_terms = 12\n# comment\nneighborhood = -33/40,17/40,23/40,33/40;1;40\ntargets=S1\nworkers=2",
    )
    .unwrap();
    assert_eq!(c.n_terms, 12);
    assert_eq!(c.workers, 2);
    assert_eq!(c.targets.len(), 1);
    assert!(matches!(c.domain, ScanDomain::Neighborhoods(ref v) if v.len() == 1));
    assert!(ScanConfig::from_kv("bogus=1").is_err());
    assert!(ScanConfig::from_kv("n_terms=x").is_err());
    let bad = ScanConfig { n_terms: 0, ..Default::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn rational_recognition() {
    assert_eq!(recognize_rational(792.0000000001, 1000, 1e-9), Some(q_int(792)));
    assert_eq!(recognize_rational(-36.0 / 23.0, 1000, 1e-12), Some(q_new(-36, 23)));
    assert_eq!(recognize_rational(std::f64::consts::PI, 1000, 1e-12), None);
}

#[test]
fn neighborhood_scan_rediscovers_first_table_row() {
    let cfg = ScanConfig::from_kv("neighborhood=-33/40,17/40,23/40,33/40;1;40\ntargets=S1").unwrap();
    let out = rank4_scan(&cfg).unwrap();
    let row = vec![q_new(-33, 40), q_new(17, 40), q_new(23, 40), q_new(33, 40)];
    let hit = out.candidates.iter().find(|c| c.exponents == row).expect("row 1 found");
    assert_eq!(hit.rescale, vec![q_int(1), q_int(99), q_int(3366), q_int(1785)]);
    let v = &hit.verdicts[0];
    assert!(v.residual < S_MATCH_TOL, "{}", v.residual);
    assert_eq!(v.permutation, vec![0, 1, 2, 3]);
    assert_eq!(v.rescale.clone().unwrap(), vec![q_int(1), q_int(792), q_int(3366), q_int(14280)]);
    assert!(v.conformal());
    let other = named_target("S2", P).unwrap();
    let n = hit.expansion.normalized().unwrap();
    assert!(target_verdict(&n, &other, P).unwrap().residual > 1e-3);
}

#[test]
fn s_matrix_solve_on_hard_hexagon() {
    let b = builtin_instance("hard-hexagon", P).unwrap();
    let x = b.solve(14).unwrap();
    let (d, res) = modular_rescale(&x, &b.smatrix, 0, P).unwrap();
    assert!(res < 1e-10, "{res}");
    for v in d {
        assert!((v.to_f64() - 1.0).abs() < 1e-9);
    }
}

/// The second coordinate's first correction changes sign at -3/8 - √73/24 ≈ -0.7310, just above -3/4.
#[test]
fn second_coordinate_sign_boundary() {
    let sign_flip = |l: Q| {
        let x = gamma03_coordinates(&l, 3).unwrap();
        let c = x.series[1].coeffs();
        num_traits::Signed::is_positive(&c[0]) != num_traits::Signed::is_positive(&c[1])
    };
    assert!(!sign_flip(q_new(-73, 100)));
    assert!(sign_flip(q_new(-732, 1000)));
    assert!(sign_flip(q_new(-3, 4)));
    assert!(!sign_flip(q_new(-1, 12)));
}
