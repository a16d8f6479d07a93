//! Named reference instances with their published coefficients.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::conformal::{s_h, s_hard_hexagon, s_rank4_quasi, s_table3_s1, s_table3_s2, SMatrix};
use crate::error::{Error, Result};
use crate::frobenius::{family_solve, to_q_expansion, CharacterVectorExpansion};
use crate::mlde::{monic_from_symmetric, ExponentTuple, MonicMlde, ThetaOde};
use crate::ring::{fmt_q, q_int, q_new, Q};

use super::gamma03::{gamma03_h_derived, h_exponents};

pub const BUILTIN_NAMES: [&str; 7] =
    ["hard-hexagon", "rank4-quasi", "table3-row-1", "table3-row-2", "table3-row-3", "table3-row-4", "H"];

/// Exponents, equation, normalization and the published coefficients of one instance.
#[derive(Clone, Debug)]
pub struct BuiltinInstance {
    pub name: String,
    pub exponents: ExponentTuple,
    /// Absent for H, which is not the minimal form of a monic level-one equation.
    pub mlde: Option<MonicMlde<Q>>,
    pub rescale: Option<Vec<Q>>,
    /// Published coefficients per coordinate, from the leading power on, with displayed gaps as zeros.
    pub reference: Vec<Vec<BigInt>>,
    pub smatrix: SMatrix,
    pub vacuum: usize,
}

fn rows(r: &[&[i64]]) -> Vec<Vec<BigInt>> {
    r.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn qs(v: &[(i64, i64)]) -> Vec<Q> {
    v.iter().map(|&(n, d)| q_new(n, d)).collect()
}

fn ints(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&n| q_int(n)).collect()
}

pub fn builtin_instance(name: &str, prec: usize) -> Result<BuiltinInstance> {
    let (exps, mlde, rescale, reference, smatrix) = match name {
        "hard-hexagon" => (
            qs(&[(1, 40), (31, 40), (-1, 40), (9, 40)]),
            Some(MonicMlde::rank4(q_new(-949, 7200), q_new(139, 21600), q_new(-279, 2560000))),
            None,
            rows(&[
                &[1, 0, 1, 1, 2, 2, 4, 4, 6, 7],
                &[1, 1, 1, 2, 2, 3, 4, 5, 7, 9],
                &[1, 1, 1, 2, 3, 4, 5, 7, 9, 12],
                &[1, 1, 2, 2, 3, 4, 6, 7, 10, 12],
            ]),
            s_hard_hexagon(prec),
        ),
        "rank4-quasi" => (
            qs(&[(-41, 40), (9, 40), (31, 40), (41, 40)]),
            Some(MonicMlde::rank4(q_new(-8509, 7200), q_new(19039, 21600), q_new(-468999, 2560000))),
            Some(ints(&[1, 492, 22591, 99180])),
            rows(&[
                &[1, 0, 120786, 14632531, 629268246, 15536981160],
                &[492, 466580, 40164912, 1462898532, 32571172112],
                &[22591, 3863061, 193342101, 5227692946, 95716064232],
                &[99180, 11114772, 461579312, 11153566692, 189039000612],
            ]),
            s_rank4_quasi(prec),
        ),
        "table3-row-1" => (
            qs(&[(-33, 40), (17, 40), (23, 40), (33, 40)]),
            None,
            Some(ints(&[1, 792, 3366, 14280])),
            rows(&[
                &[1, 99, 50787, 2794770, 70309800, 1134528021],
                &[792, 154088, 6610824, 145807200, 2162364600],
                &[3366, 466752, 17581212, 361184706, 5110157492],
                &[14280, 1252152, 39126384, 721364424, 9486909432],
            ]),
            s_table3_s1(prec),
        ),
        "table3-row-2" => (
            qs(&[(-37, 40), (13, 40), (27, 40), (37, 40)]),
            None,
            Some(ints(&[1, 592, 11063, 47840])),
            rows(&[
                &[1, 37, 65527, 5306096, 174479457, 3487679200],
                &[592, 223184, 13516544, 383202192, 6974809024],
                &[11063, 1716467, 75169681, 1783793680, 28874814615],
                &[47840, 4779216, 173590384, 3687784672, 55362274160],
            ]),
            s_table3_s1(prec),
        ),
        "table3-row-3" => (
            qs(&[(-29, 36), (31, 36), (19, 36), (5, 12)]),
            None,
            Some(ints(&[1, 16588, 1595, 1044])),
            rows(&[
                &[1, 58, 29319, 1492282, 35652194, 551508428],
                &[16588, 1295459, 37792162, 661694421, 8340292294],
                &[1595, 230318, 8596093, 173614474, 2409567457],
                &[1044, 195489, 8038422, 171114471, 2458828278],
            ]),
            s_table3_s2(prec),
        ),
        "table3-row-4" => (
            qs(&[(-29, 36), (-5, 36), (19, 36), (17, 12)]),
            None,
            Some(ints(&[1, 116, 1015, 190269])),
            rows(&[
                &[1, 638, 33959, 1509682, 35709150, 551665608],
                &[116, 18328, 1302999, 37817682, 661768081],
                &[1015, 228114, 8586233, 173587214, 2409491477],
                &[190269, 8017542, 171051831, 2458656018, 26971011288],
            ]),
            s_table3_s2(prec),
        ),
        "H" => (
            h_exponents(),
            None,
            None,
            rows(&[
                &[1, 0, 25, 133, 578, 1970, 6076, 16840],
                &[1, 13, 98, 471, 1780, 5765, 16856],
                &[1, 13, 73, 338, 1251, 4048, 11838],
                &[1, 17, 116, 496, 1817, 5742, 16535],
            ]),
            s_h(prec),
        ),
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    let exponents = ExponentTuple::new(exps)?;
    let mlde = match (mlde, name) {
        (Some(m), _) => Some(m),
        (None, "H") => None,
        (None, _) => Some(monic_from_symmetric(4, &exponents)?),
    };
    Ok(BuiltinInstance { name: name.to_string(), exponents, mlde, rescale, reference, smatrix, vacuum: 0 })
}

impl BuiltinInstance {
    /// The q-expansion: Frobenius solutions of the stored equation, or the Γ₀(3) route for H.
    pub fn solve(&self, n_terms: usize) -> Result<CharacterVectorExpansion> {
        match &self.mlde {
            Some(m) => {
                let ode = ThetaOde::from_monic(m)?;
                let sols = family_solve(&ode, self.exponents.as_slice(), n_terms)?;
                let x = to_q_expansion(&sols, n_terms, None)?;
                match &self.rescale {
                    Some(r) => x.rescaled(r),
                    None => x.normalized(),
                }
            }
            None => gamma03_h_derived(n_terms),
        }
    }

    /// Terms needed to reach every published coefficient.
    pub fn reference_len(&self) -> usize {
        self.reference.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// `(coordinate, index, published, computed)` for every disagreement.
    pub fn mismatches(&self, x: &CharacterVectorExpansion) -> Result<Vec<(usize, usize, BigInt, Q)>> {
        let mut out = Vec::new();
        for (j, row) in self.reference.iter().enumerate() {
            let s = &x.series[j];
            for (i, p) in row.iter().enumerate() {
                let e = &self.exponents.as_slice()[j] + q_int(i as i64);
                let got = s.coeff_at(&e)?;
                if got != Q::from_integer(p.clone()) {
                    out.push((j, i, p.clone(), got));
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "exponents": self.exponents.to_json(),
            "mlde": self.mlde.as_ref().map(|m| m.to_json()),
            "rescale": self.rescale.as_ref().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()),
            "reference": self.reference.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "smatrix": self.smatrix.to_json(),
            "vacuum": self.vacuum,
        })
    }
}
