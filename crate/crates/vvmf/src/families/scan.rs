//! Conformal scans: the Γ₀(3) λ-lines and the general rank-4 exponent search.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::conformal::{
    check_conformal, integrality_scale, s_gamma03_f, s_h, s_hard_hexagon, s_rank4_quasi, s_table3_s1, s_table3_s2,
    sign_prescreen, ConformalReport, SMatrix,
};
use crate::error::{Error, Result};
use crate::frobenius::{denominator_profile, family_solve, to_q_expansion, CharacterVectorExpansion};
use crate::mlde::{rank4_abc, ExponentTuple, ThetaOde};
use crate::ring::{fmt_q, parse_q, q_int, q_new, Coeff, Real, Q};

use super::gamma03::{absorbed, coordinate_signs, gamma03_coordinates, gamma03_g, gamma03_reducible, permutations};

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().map_err(|e| Error::Numeric(format!("worker pool: {e}")))
}

/// Which vector of the Γ₀(3) family a line scan walks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyLine {
    F,
    G,
}

impl FamilyLine {
    pub fn vector(self, l: &Q, n_terms: usize) -> Result<CharacterVectorExpansion> {
        match self {
            FamilyLine::F => gamma03_coordinates(l, n_terms),
            FamilyLine::G => gamma03_g(l, n_terms),
        }
    }
    /// ρ(S) in the coordinate basis: `S_F`, or `−S_F` for G.
    pub fn smatrix(self, l: &Q, prec: usize) -> SMatrix {
        let s = s_gamma03_f(l, prec);
        match self {
            FamilyLine::F => s,
            FamilyLine::G => s.scaled(&Real::from_i64_prec(-1, prec)),
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            FamilyLine::F => "F",
            FamilyLine::G => "G",
        }
    }
}

/// `n/12` for odd `n` in `[lo, hi]`, optionally dropping `3 | n`.
pub fn line_lambdas(lo: i64, hi: i64, coprime_to_3: bool) -> Vec<Q> {
    (lo..=hi).filter(|n| n % 2 != 0 && !(coprime_to_3 && n % 3 == 0)).map(|n| q_new(n, 12)).collect()
}

/// One λ on a line with the verdict for each vacuum choice.
#[derive(Clone, Debug)]
pub struct LineVerdict {
    pub lambda: Q,
    pub irreducible: bool,
    /// Sign of each coordinate when every coordinate has constant sign.
    pub signs: Option<Vec<i8>>,
    pub mixed_coordinate: Option<usize>,
    pub vacua: Vec<(usize, ConformalReport)>,
    pub quasi_conformal: bool,
    pub conformal: bool,
}

impl LineVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda": fmt_q(&self.lambda),
            "irreducible": self.irreducible,
            "signs": self.signs,
            "mixed_coordinate": self.mixed_coordinate,
            "vacua": self.vacua.iter().map(|(v, r)| json!({"vacuum": v, "report": r.to_json()})).collect::<Vec<_>>(),
            "quasi_conformal": self.quasi_conformal,
            "conformal": self.conformal,
        })
    }
}

/// Fix coordinate signs, normalize each admissible vacuum to 1 and run the conformal checks.
pub fn evaluate_line_point(kind: FamilyLine, l: &Q, n_terms: usize, prec: usize) -> Result<LineVerdict> {
    let mut out = LineVerdict {
        lambda: l.clone(),
        irreducible: !gamma03_reducible(l),
        signs: None,
        mixed_coordinate: None,
        vacua: Vec::new(),
        quasi_conformal: false,
        conformal: false,
    };
    if !out.irreducible {
        return Ok(out);
    }
    let x = absorbed(&kind.vector(l, n_terms)?);
    let signs = match coordinate_signs(&x) {
        Ok(s) => s,
        Err(j) => {
            out.mixed_coordinate = Some(j);
            return Ok(out);
        }
    };
    let s = kind.smatrix(l, prec).conjugate_signs(&signs);
    let t = ExponentTuple::new(x.exponents.clone())?;
    for v in 0..x.rank() {
        let lead = match x.series[v].lead_coeff() {
            Some(c) if x.series[v].prefactor().is_none() => c.abs(),
            _ => continue,
        };
        let series = x.series.iter().zip(&signs).map(|(ser, &sg)| ser.scale(&(q_int(sg as i64) / &lead))).collect();
        let y = CharacterVectorExpansion { exponents: x.exponents.clone(), series, rescale: None };
        let rep = check_conformal(&y, &t, &s, v)?;
        out.quasi_conformal |= rep.quasi_conformal;
        out.conformal |= rep.conformal;
        out.vacua.push((v, rep));
    }
    out.signs = Some(signs);
    Ok(out)
}

/// Evaluate every λ in parallel; output order follows `lambdas`.
pub fn gamma03_line_scan(
    kind: FamilyLine,
    lambdas: &[Q],
    n_terms: usize,
    workers: usize,
    prec: usize,
) -> Result<Vec<LineVerdict>> {
    pool(workers)?.install(|| lambdas.par_iter().map(|l| evaluate_line_point(kind, l, n_terms, prec)).collect())
}

pub fn conformal_survivors(v: &[LineVerdict]) -> Vec<Q> {
    v.iter().filter(|x| x.conformal).map(|x| x.lambda.clone()).collect()
}

pub fn quasi_conformal_survivors(v: &[LineVerdict]) -> Vec<Q> {
    v.iter().filter(|x| x.quasi_conformal).map(|x| x.lambda.clone()).collect()
}

/// Exponent tuples `c + k/N` with `|k_i| ≤ radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub centre: Vec<Q>,
    pub radius: i64,
    pub denominator: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScanDomain {
    /// Strictly increasing numerators in `[lo, hi]` over a common denominator.
    Box {
        denominator: u64,
        lo: i64,
        hi: i64,
    },
    Neighborhoods(Vec<Neighborhood>),
}

/// A named ρ(S) to test survivors against.
#[derive(Clone, Debug)]
pub struct ScanTarget {
    pub name: String,
    pub s: SMatrix,
}

pub fn named_target(name: &str, prec: usize) -> Result<ScanTarget> {
    let s = match name {
        "S1" | "s1" => s_table3_s1(prec),
        "S2" | "s2" => s_table3_s2(prec),
        "H" | "h" => s_h(prec),
        "hard-hexagon" => s_hard_hexagon(prec),
        "rank4-quasi" => s_rank4_quasi(prec),
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    Ok(ScanTarget { name: name.to_string(), s })
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub rank: usize,
    pub denominator_bound: u64,
    pub trace: Q,
    pub n_terms: usize,
    pub rescale_bound: BigInt,
    pub domain: ScanDomain,
    pub targets: Vec<ScanTarget>,
    pub sign_prescreen: bool,
    pub denominator_check: bool,
    pub window: usize,
    /// Maximum number of tuples to evaluate.
    pub budget: usize,
    /// 0 lets the pool choose.
    pub workers: usize,
    pub precision_bits: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            rank: 4,
            denominator_bound: 60,
            trace: q_int(1),
            n_terms: 25,
            rescale_bound: BigInt::from(10_000_000u64),
            domain: ScanDomain::Box { denominator: 40, lo: -40, hi: 40 },
            targets: Vec::new(),
            sign_prescreen: true,
            denominator_check: true,
            window: 5,
            budget: 200_000,
            workers: 0,
            precision_bits: 256,
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("expected a boolean, got {v}"))),
    }
}

fn parse_num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse(format!("bad value for {k}: {v}")))
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parse(format!("scan config: {m}")));
        if self.rank != 4 {
            return Err(Error::UnsupportedRank(self.rank));
        }
        if self.denominator_bound == 0 || self.n_terms < 3 || self.window == 0 || self.budget == 0 {
            return bad("bounds must be positive (n_terms at least 3)");
        }
        if !self.rescale_bound.is_positive() {
            return bad("rescale bound must be positive");
        }
        match &self.domain {
            ScanDomain::Box { denominator, lo, hi } => {
                if *denominator == 0 || *denominator > self.denominator_bound || lo > hi {
                    return bad("box denominator must be in 1..=denominator_bound and lo <= hi");
                }
            }
            ScanDomain::Neighborhoods(ns) => {
                for n in ns {
                    if n.denominator == 0
                        || n.denominator > self.denominator_bound
                        || n.radius < 0
                        || n.centre.len() != self.rank
                    {
                        return bad("neighborhood needs rank-many centre exponents, radius >= 0, denominator in range");
                    }
                    if n.centre.iter().any(|c| !(c * Q::from_integer(BigInt::from(n.denominator))).is_integer()) {
                        return bad("centre exponents must have the neighborhood denominator");
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "rank" => self.rank = parse_num(key, v)?,
            "denominator_bound" => self.denominator_bound = parse_num(key, v)?,
            "trace" => self.trace = parse_q(v)?,
            "n_terms" | "terms" => self.n_terms = parse_num(key, v)?,
            "rescale_bound" => self.rescale_bound = parse_num(key, v)?,
            "sign_prescreen" => self.sign_prescreen = parse_bool(v)?,
            "denominator_check" => self.denominator_check = parse_bool(v)?,
            "window" => self.window = parse_num(key, v)?,
            "budget" => self.budget = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            "precision_bits" => {
                self.precision_bits = parse_num(key, v)?;
                let names: Vec<String> = self.targets.iter().map(|t| t.name.clone()).collect();
                self.targets = names.iter().map(|n| named_target(n, self.precision_bits)).collect::<Result<_>>()?;
            }
            "targets" => {
                self.targets = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|n| named_target(n, self.precision_bits))
                    .collect::<Result<_>>()?
            }
            "box" => {
                let p: Vec<&str> = v.split(',').map(str::trim).collect();
                if p.len() != 3 {
                    return Err(Error::Parse("box = denominator,lo,hi".into()));
                }
                self.domain = ScanDomain::Box {
                    denominator: parse_num(key, p[0])?,
                    lo: parse_num(key, p[1])?,
                    hi: parse_num(key, p[2])?,
                };
            }
            "neighborhood" => {
                let (centre, rest) = v
                    .split_once(';')
                    .ok_or_else(|| Error::Parse("neighborhood = e1,e2,..;radius;denominator".into()))?;
                let (radius, den) = rest
                    .split_once(';')
                    .ok_or_else(|| Error::Parse("neighborhood = e1,e2,..;radius;denominator".into()))?;
                let centre = centre.split(',').map(|x| parse_q(x.trim())).collect::<Result<Vec<_>>>()?;
                let n = Neighborhood {
                    centre,
                    radius: parse_num(key, radius.trim())?,
                    denominator: parse_num(key, den.trim())?,
                };
                match &mut self.domain {
                    ScanDomain::Neighborhoods(v) => v.push(n),
                    d => *d = ScanDomain::Neighborhoods(vec![n]),
                }
            }
            other => return Err(Error::Parse(format!("unknown scan key {other}"))),
        }
        Ok(())
    }

    /// Parse flat `key=value` lines; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = ScanConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {line}")))?;
            c.set(k, v)?;
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Value {
        let domain = match &self.domain {
            ScanDomain::Box { denominator, lo, hi } => json!({"box": {"denominator": denominator, "lo": lo, "hi": hi}}),
            ScanDomain::Neighborhoods(ns) => json!({"neighborhoods": ns.iter().map(|n| json!({
                "centre": n.centre.iter().map(fmt_q).collect::<Vec<_>>(), "radius": n.radius, "denominator": n.denominator,
            })).collect::<Vec<_>>()}),
        };
        json!({
            "rank": self.rank, "denominator_bound": self.denominator_bound, "trace": fmt_q(&self.trace),
            "n_terms": self.n_terms, "rescale_bound": self.rescale_bound.to_string(), "domain": domain,
            "targets": self.targets.iter().map(|t| t.name.clone()).collect::<Vec<_>>(),
            "sign_prescreen": self.sign_prescreen, "denominator_check": self.denominator_check,
            "window": self.window, "budget": self.budget,
        })
    }
}

/// A sorted exponent tuple and, when it came from a neighborhood, the sorting permutation of that centre.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleSource {
    pub exponents: Vec<Q>,
    pub centre_permutation: Option<Vec<usize>>,
}

fn sort_key(e: &[Q]) -> (BigInt, Vec<BigInt>) {
    let d = e.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums = e.iter().map(|x| (x * Q::from_integer(d.clone())).to_integer()).collect();
    (d, nums)
}

fn distinct_mod_one(e: &[Q]) -> bool {
    (0..e.len()).all(|i| (i + 1..e.len()).all(|j| !(&e[i] - &e[j]).is_integer()))
}

/// Deterministic enumeration, ordered by (common denominator, numerators).
pub fn enumerate_tuples(cfg: &ScanConfig) -> Result<Vec<TupleSource>> {
    cfg.validate()?;
    let mut out: BTreeMap<(BigInt, Vec<BigInt>), TupleSource> = BTreeMap::new();
    let mut push = |e: Vec<Q>, perm: Option<Vec<usize>>| -> Result<()> {
        if out.len() > cfg.budget {
            return Err(Error::Budget(cfg.budget));
        }
        if e.iter().sum::<Q>() != cfg.trace || !distinct_mod_one(&e) {
            return Ok(());
        }
        if e.iter().any(|x| x.denom() > &BigInt::from(cfg.denominator_bound)) {
            return Ok(());
        }
        out.entry(sort_key(&e)).or_insert(TupleSource { exponents: e, centre_permutation: perm });
        Ok(())
    };
    match &cfg.domain {
        ScanDomain::Box { denominator, lo, hi } => {
            let n = *denominator as i64;
            let target = &cfg.trace * q_int(n);
            if !target.is_integer() {
                return Ok(Vec::new());
            }
            let t = target.to_integer().to_i64().ok_or_else(|| Error::Parse("trace too large".into()))?;
            for a in *lo..=*hi {
                for b in a + 1..=*hi {
                    for c in b + 1..=*hi {
                        let d = t - a - b - c;
                        if d > c && d <= *hi {
                            push([a, b, c, d].iter().map(|&k| q_new(k, n)).collect(), None)?;
                        }
                    }
                }
            }
        }
        ScanDomain::Neighborhoods(ns) => {
            for nb in ns {
                let n = q_int(nb.denominator as i64);
                let r = nb.radius;
                let mut offs = vec![-r; cfg.rank];
                loop {
                    if offs.iter().sum::<i64>() == 0 {
                        let e: Vec<Q> = nb.centre.iter().zip(&offs).map(|(c, &k)| c + q_int(k) / &n).collect();
                        let mut idx: Vec<usize> = (0..e.len()).collect();
                        idx.sort_by(|&i, &j| e[i].cmp(&e[j]));
                        let sorted = idx.iter().map(|&i| e[i].clone()).collect();
                        push(sorted, Some(idx))?;
                    }
                    let mut i = 0;
                    while i < offs.len() && offs[i] == r {
                        offs[i] = -r;
                        i += 1;
                    }
                    if i == offs.len() {
                        break;
                    }
                    offs[i] += 1;
                }
            }
        }
    }
    if out.len() > cfg.budget {
        return Err(Error::Budget(cfg.budget));
    }
    Ok(out.into_values().collect())
}

/// Best match of a survivor against one target S-matrix over vacuum-fixing coordinate orders.
#[derive(Clone, Debug)]
pub struct TargetVerdict {
    pub name: String,
    /// Candidate coordinate placed at each S index.
    pub permutation: Vec<usize>,
    /// Relative residual of `X(i/y) = D⁻¹ S D X(iy)` for the best order.
    pub residual: f64,
    /// The diagonal `D` (vacuum entry 1) when the residual is small and `D` is rational.
    pub rescale: Option<Vec<Q>>,
    /// Conformal checks on `D·X`, present when `rescale` is.
    pub report: Option<ConformalReport>,
}

impl TargetVerdict {
    pub fn conformal(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.conformal)
    }
    pub fn quasi_conformal(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.quasi_conformal)
    }
}

/// Relative residual accepted as a genuine S-transformation.
pub const S_MATCH_TOL: f64 = 1e-8;

fn eval_at(x: &CharacterVectorExpansion, y: &Q, prec: usize) -> Result<Vec<Real>> {
    let two_pi_y = Real::pi(prec).mul_ref(&Real::from_q_prec(&(y * q_int(2)), prec));
    x.series
        .iter()
        .map(|s| {
            let lead = two_pi_y.mul_ref(&Real::from_q_prec(s.lead_exp(), prec)).neg_ref().exp()?;
            let step = two_pi_y.mul_ref(&Real::from_q_prec(s.step(), prec)).neg_ref().exp()?;
            let mut acc = Real::from_i64_prec(0, prec);
            for c in s.coeffs().iter().rev() {
                acc = acc.mul_ref(&step).add_ref(&Real::from_q_prec(c, prec));
            }
            Ok(acc.mul_ref(&lead))
        })
        .collect()
}

fn solve_linear(mut a: Vec<Vec<Real>>, mut b: Vec<Real>) -> Result<Vec<Real>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().cmp_real(&a[j][col].abs())).ok_or(Error::DivisionByZero)?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col].div_ref(&a[col][col])?;
            for k in col..n {
                let t = f.mul_ref(&a[col][k]);
                a[r][k] = a[r][k].sub_ref(&t);
            }
            let t = f.mul_ref(&b[col]);
            b[r] = b[r].sub_ref(&t);
        }
    }
    let mut x = vec![Real::from_i64_prec(0, b[0].precision()); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for k in r + 1..n {
            acc = acc.sub_ref(&a[r][k].mul_ref(&x[k]));
        }
        x[r] = acc.div_ref(&a[r][r])?;
    }
    Ok(x)
}

/// Best rational `p/q` with `q ≤ max_den` within `rel_tol` of `x`.
pub fn recognize_rational(x: f64, max_den: i64, rel_tol: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= rel_tol * x.abs().max(1.0) {
            return Some(Q::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let f = r - a;
        if f.abs() < 1e-300 {
            break;
        }
        r = 1.0 / f;
    }
    None
}

/// Solve for the diagonal `D` (with `D[vacuum] = 1`) making `D X` transform by `s`, from values on the imaginary axis.
pub fn modular_rescale(
    x: &CharacterVectorExpansion,
    s: &SMatrix,
    vacuum: usize,
    prec: usize,
) -> Result<(Vec<Real>, f64)> {
    let d = x.rank();
    if s.d() != d || vacuum >= d {
        return Err(Error::Dimension(format!("S of size {} for rank {d}", s.d())));
    }
    let ys = [q_new(21, 20), q_new(11, 10), q_new(23, 20), q_new(6, 5), q_new(5, 4)];
    let mut rows: Vec<Vec<Real>> = Vec::new();
    let mut rhs: Vec<Real> = Vec::new();
    let zero = Real::from_i64_prec(0, prec);
    for y in &ys {
        let a = eval_at(x, y, prec)?;
        let b = eval_at(x, &(Q::one() / y), prec)?;
        for i in 0..d {
            // d_i B_i - Σ_j S_ij d_j A_j = 0
            let mut row = vec![zero.clone(); d];
            for j in 0..d {
                row[j] = row[j].sub_ref(&s.get(i, j).mul_ref(&a[j]));
            }
            row[i] = row[i].add_ref(&b[i]);
            rhs.push(row[vacuum].neg_ref());
            rows.push(row.into_iter().enumerate().filter(|(j, _)| *j != vacuum).map(|(_, v)| v).collect());
        }
    }
    let m = d - 1;
    let mut ata = vec![vec![zero.clone(); m]; m];
    let mut atb = vec![zero.clone(); m];
    for (r, b) in rows.iter().zip(&rhs) {
        for i in 0..m {
            atb[i] = atb[i].add_ref(&r[i].mul_ref(b));
            for j in 0..m {
                ata[i][j] = ata[i][j].add_ref(&r[i].mul_ref(&r[j]));
            }
        }
    }
    let sol = solve_linear(ata, atb)?;
    let mut dv = Vec::with_capacity(d);
    let mut it = sol.into_iter();
    for j in 0..d {
        dv.push(if j == vacuum { Real::from_i64_prec(1, prec) } else { it.next().expect("m unknowns") });
    }
    let mut worst = 0f64;
    let mut scale = 0f64;
    for (r, b) in rows.iter().zip(&rhs) {
        let mut acc = b.neg_ref();
        let mut mag = b.abs().to_f64();
        for (k, j) in (0..d).filter(|&j| j != vacuum).enumerate() {
            let t = r[k].mul_ref(&dv[j]);
            mag = mag.max(t.abs().to_f64());
            acc = acc.add_ref(&t);
        }
        worst = worst.max(acc.abs().to_f64());
        scale = scale.max(mag);
    }
    Ok((dv, if scale > 0.0 { worst / scale } else { f64::INFINITY }))
}

/// A scan survivor with its integral expansion.
#[derive(Clone, Debug)]
pub struct CharacterCandidate {
    pub exponents: Vec<Q>,
    pub centre_permutation: Option<Vec<usize>>,
    pub abc: (Q, Q, Q),
    pub rescale: Vec<Q>,
    pub expansion: CharacterVectorExpansion,
    pub verdicts: Vec<TargetVerdict>,
}

impl CharacterCandidate {
    pub fn to_json(&self) -> Value {
        json!({
            "exponents": self.exponents.iter().map(fmt_q).collect::<Vec<_>>(),
            "centre_permutation": self.centre_permutation,
            "abc": [fmt_q(&self.abc.0), fmt_q(&self.abc.1), fmt_q(&self.abc.2)],
            "rescale": self.rescale.iter().map(fmt_q).collect::<Vec<_>>(),
            "expansion": self.expansion.to_json(),
            "verdicts": self.verdicts.iter().map(|v| json!({
                "target": v.name, "permutation": v.permutation,
                "residual": format!("{:e}", v.residual),
                "rescale": v.rescale.as_ref().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()),
                "quasi_conformal": v.quasi_conformal(), "conformal": v.conformal(),
                "report": v.report.as_ref().map(|r| r.to_json()),
            })).collect::<Vec<_>>(),
        })
    }
}

fn permute(x: &CharacterVectorExpansion, p: &[usize]) -> CharacterVectorExpansion {
    CharacterVectorExpansion {
        exponents: p.iter().map(|&i| x.exponents[i].clone()).collect(),
        series: p.iter().map(|&i| x.series[i].clone()).collect(),
        rescale: x.rescale.as_ref().map(|r| p.iter().map(|&i| r[i].clone()).collect()),
    }
}

/// Match a normalized expansion (vacuum first) against `target`, trying every order that keeps the vacuum first.
pub fn target_verdict(x: &CharacterVectorExpansion, target: &ScanTarget, prec: usize) -> Result<TargetVerdict> {
    let mut best: Option<(Vec<usize>, Vec<Real>, f64)> = None;
    for (p, _) in permutations(x.rank()).into_iter().filter(|(p, _)| p[0] == 0) {
        let y = permute(x, &p);
        let (dv, res) = modular_rescale(&y, &target.s, 0, prec)?;
        if best.as_ref().map_or(true, |b| res < b.2) {
            best = Some((p, dv, res));
        }
    }
    let (permutation, dv, residual) = best.ok_or_else(|| Error::Dimension("empty candidate".into()))?;
    let mut verdict = TargetVerdict { name: target.name.clone(), permutation, residual, rescale: None, report: None };
    if residual > S_MATCH_TOL {
        return Ok(verdict);
    }
    let r: Option<Vec<Q>> = dv.iter().map(|v| recognize_rational(v.to_f64(), 100_000, 1e-9)).collect();
    if let Some(r) = r {
        let y = permute(x, &verdict.permutation);
        let scaled = CharacterVectorExpansion {
            exponents: y.exponents.clone(),
            series: y.series.iter().zip(&r).map(|(s, c)| s.scale(c)).collect(),
            rescale: Some(r.clone()),
        };
        let t = ExponentTuple::new(scaled.exponents.clone())?;
        verdict.report = Some(check_conformal(&scaled, &t, &target.s, 0)?);
        verdict.rescale = Some(r);
    }
    Ok(verdict)
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::Resonant(_) | Error::Logarithmic(_, _) | Error::NotARoot(_) | Error::PochhammerPole(_))
}

/// Full pipeline for one tuple; `Ok(None)` means pruned.
pub fn evaluate_tuple(cfg: &ScanConfig, src: &TupleSource) -> Result<Option<CharacterCandidate>> {
    let t = match ExponentTuple::new(src.exponents.clone()) {
        Ok(t) => t,
        Err(e) if skippable(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let abc = rank4_abc(&t)?;
    let ode = ThetaOde::rank4(&abc.0, &abc.1, &abc.2);
    if cfg.sign_prescreen {
        match sign_prescreen(&t, &ode) {
            Ok(sc) if sc.iter().any(|c| c.mixed) => return Ok(None),
            Ok(_) => {}
            Err(e) if skippable(&e) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let sols = match family_solve(&ode, t.as_slice(), cfg.n_terms) {
        Ok(s) => s,
        Err(e) if skippable(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let x = to_q_expansion(&sols, cfg.n_terms, None)?.normalized()?;
    let mut rescale = Vec::with_capacity(x.rank());
    for s in &x.series {
        match integrality_scale(s, cfg.n_terms, &cfg.rescale_bound) {
            Some((sc, _)) => rescale.push(sc),
            None => return Ok(None),
        }
    }
    if !rescale[0].is_one() {
        return Ok(None);
    }
    if cfg.denominator_check && x.series.iter().any(|s| !denominator_profile(s, cfg.window).stabilized) {
        return Ok(None);
    }
    let expansion = x.rescaled(&rescale)?;
    let verdicts =
        cfg.targets.iter().map(|tg| target_verdict(&x, tg, cfg.precision_bits)).collect::<Result<Vec<_>>>()?;
    Ok(Some(CharacterCandidate {
        exponents: src.exponents.clone(),
        centre_permutation: src.centre_permutation.clone(),
        abc,
        rescale,
        expansion,
        verdicts,
    }))
}

/// Survivors plus bookkeeping.
#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub evaluated: usize,
    pub candidates: Vec<CharacterCandidate>,
}

/// Enumerate, prune and verify in parallel; the merge keeps enumeration order.
pub fn rank4_scan(cfg: &ScanConfig) -> Result<ScanOutcome> {
    let tuples = enumerate_tuples(cfg)?;
    let results: Vec<Option<CharacterCandidate>> =
        pool(cfg.workers)?.install(|| tuples.par_iter().map(|t| evaluate_tuple(cfg, t)).collect::<Result<Vec<_>>>())?;
    Ok(ScanOutcome { evaluated: tuples.len(), candidates: results.into_iter().flatten().collect() })
}
