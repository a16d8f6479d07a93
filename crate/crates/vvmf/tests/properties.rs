mod common;

use proptest::prelude::*;

use common::*;
use vvmf::families::{gamma03_line_scan, line_lambdas, FamilyLine};
use vvmf::ring::q_new;

fn monomial_exps() -> impl Strategy<Value = (u32, u32, u32)> {
    (0u32..3, 0u32..3, 0u32..2).prop_filter("nonconstant", |t| *t != (0, 0, 0))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

    #[test]
    fn leibniz_rule(f in monomial_exps(), g in monomial_exps()) {
        prop_assert_eq!(leibniz(f, g, 20), Ok(()));
    }

    #[test]
    fn ramanujan_identities(m in monomial_exps()) {
        prop_assert_eq!(ramanujan(m.0, m.1, m.2, 20), Ok(()));
    }

    #[test]
    fn hypergeometric_matches_frobenius(d in 2i64..40, k in -120i64..120) {
        let f1 = q_new(k % (3 * d), d);
        if let Some(r) = rank2_pair(&f1, 15) {
            prop_assert_eq!(r, Ok(()));
        }
    }
}

#[test]
fn printed_smatrices_satisfy_axioms() {
    for (name, s) in named_smatrices() {
        assert_eq!(smatrix_axioms(name, &s, 1e-20), Ok(()));
    }
}

#[test]
fn line_scan_independent_of_workers() {
    let ls = line_lambdas(-8, -1, false);
    let j = |w| {
        gamma03_line_scan(FamilyLine::F, &ls, 12, w, PREC)
            .unwrap()
            .iter()
            .map(|x| x.to_json().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(j(1), j(8));
}
