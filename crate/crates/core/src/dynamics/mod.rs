//! Shift dynamics on Mahavier products: transitivity and mixing checks,
//! explicit orbit constructions, and the collapse of the even integer
//! sequences to a single class.

mod mixing;

pub use mixing::{
    backward_trace, check_mixing, check_transitive, cylinder_family, forward_trace, pair_hits, verify, Detail,
    MixingReport, Mode, PairRecord, VerifyParams, DEFAULT_CYLINDER_CAP, MAX_LISTED_FAILURES,
};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::compacta::Value;
use crate::error::{domain, Error, Result};
use crate::rational::{to_pq, Pq, Q};
use crate::relations::{never_connect, relation_contains, BranchLabel, PLRelation};

/// Interleaves the `R`-orbit `x` with excursions through the higher
/// components: block `k` is `x_k, x_k+2, .., x_k+2k, .., x_k+2, x_k` and
/// the next block starts at `x_{k+1}`. Every step is a branch of `H_R`.
#[allow(non_snake_case)]
pub fn transitive_point_H(x: &[Q], r: &PLRelation, len: usize) -> Result<Vec<Q>> {
    for (i, w) in x.windows(2).enumerate() {
        if !relation_contains(r, &Value::Finite(w[0].clone()), &Value::Finite(w[1].clone())) {
            return Err(Error::Precondition(format!("(x_{}, x_{}) is not in R", i + 1, i + 2)));
        }
    }
    let mut out = Vec::with_capacity(len);
    let two = Q::from_integer(2.into());
    for (k, xk) in x.iter().enumerate() {
        let k = k as i64 + 1;
        let heights = (0..=k).chain((0..k).rev());
        for h in heights {
            if out.len() == len {
                return Ok(out);
            }
            out.push(xk + &two * Q::from_integer(h.into()));
        }
    }
    if out.len() < len {
        return domain(format!("{} terms of x give only {} of {len} coordinates", x.len(), out.len()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailLetter {
    TimesR,
    TimesRho,
}

impl From<TailLetter> for BranchLabel {
    fn from(l: TailLetter) -> Self {
        match l {
            TailLetter::TimesR => BranchLabel::TimesR,
            TailLetter::TimesRho => BranchLabel::TimesRho,
        }
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupTail {
    pub word: Vec<TailLetter>,
    /// Values visited, starting with the seed.
    #[serde_as(as = "Vec<Pq>")]
    pub trace: Vec<Q>,
    #[serde_as(as = "Pq")]
    pub sup: Q,
}

pub const DEFAULT_TAIL_BUDGET: usize = 10_000;

/// Greedy walk from `s` under `x -> r x` and `x -> rho x` staying in
/// `[0, 1]`: multiply by `rho` whenever that stays at most 1. Stops once the
/// running sup reaches `1 - tol`.
pub fn find_sup_one_tail(s: &Q, r: &Q, rho: &Q, tol: &Q, max_len: usize) -> Result<SupTail> {
    if *s <= Q::zero() || *s > Q::one() {
        return domain(format!("seed {} is outside (0, 1]", to_pq(s)));
    }
    if *tol <= Q::zero() {
        return domain("tolerance must be positive");
    }
    if !never_connect(r, rho)?.never_connect {
        return Err(Error::Precondition(format!("r = {} and rho = {} connect", to_pq(r), to_pq(rho))));
    }
    let target = Q::one() - tol;
    let mut t = s.clone();
    let mut sup = s.clone();
    let mut word = Vec::new();
    let mut trace = vec![s.clone()];
    while sup < target {
        if word.len() == max_len {
            return Err(Error::Budget { steps: max_len, best: to_pq(&sup) });
        }
        let up = &t * rho;
        let (next, letter) = if up <= Q::one() { (up, TailLetter::TimesRho) } else { (&t * r, TailLetter::TimesR) };
        if next > sup {
            sup = next.clone();
        }
        word.push(letter);
        trace.push(next.clone());
        t = next;
    }
    Ok(SupTail { word, trace, sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotientKind {
    /// One-sided product, shift drops the first coordinate.
    Sim1,
    /// Two-sided product, shift moves the window.
    Sim2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub kind: QuotientKind,
}

/// Coordinates `first_index..first_index + coords.len()` of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointPrefix {
    pub first_index: i64,
    pub coords: Vec<Value>,
}

impl PointPrefix {
    pub fn one_sided(coords: Vec<Value>) -> Self {
        PointPrefix { first_index: 1, coords }
    }
}

/// Class of a point: the collapsed even-integer class or a singleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum QClass {
    Top,
    Singleton(PointPrefix),
}

impl QClass {
    /// Equality up to the common part of two truncated windows.
    pub fn agrees_with(&self, other: &QClass) -> bool {
        match (self, other) {
            (QClass::Top, QClass::Top) => true,
            (QClass::Singleton(a), QClass::Singleton(b)) => {
                let lo = a.first_index.max(b.first_index);
                let hi = (a.first_index + a.coords.len() as i64).min(b.first_index + b.coords.len() as i64);
                (lo..hi).all(|i| a.coords[(i - a.first_index) as usize] == b.coords[(i - b.first_index) as usize])
            }
            _ => false,
        }
    }
}

fn is_even_integer(v: &Value) -> bool {
    match v {
        Value::Finite(x) => x.is_integer() && (x.to_integer() % 2u8).is_zero(),
        Value::Infinity => false,
    }
}

/// The class of a point judged on its known coordinates.
pub fn quotient_class(p: &PointPrefix, _spec: &QuotientSpec) -> QClass {
    if !p.coords.is_empty() && p.coords.iter().all(is_even_integer) {
        QClass::Top
    } else {
        QClass::Singleton(p.clone())
    }
}

pub fn shift_prefix(p: &PointPrefix, spec: &QuotientSpec) -> PointPrefix {
    match spec.kind {
        QuotientKind::Sim1 => PointPrefix { first_index: 1, coords: p.coords.iter().skip(1).cloned().collect() },
        QuotientKind::Sim2 => PointPrefix { first_index: p.first_index - 1, coords: p.coords.clone() },
    }
}

/// Shift on classes, through any representative.
pub fn induced_shift_star(c: &QClass, spec: &QuotientSpec) -> QClass {
    match c {
        QClass::Top => QClass::Top,
        QClass::Singleton(p) => quotient_class(&shift_prefix(p, spec), spec),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiconjugacyReport {
    pub samples: usize,
    pub holds: bool,
    pub failures: Vec<usize>,
}

/// Compares `classify(shift x)` with the induced shift of `classify(x)` on
/// every sample.
pub fn check_semiconjugacy<F>(samples: &[PointPrefix], spec: &QuotientSpec, classify: F) -> SemiconjugacyReport
where
    F: Fn(&PointPrefix, &QuotientSpec) -> QClass,
{
    let failures: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            let lhs = classify(&shift_prefix(x, spec), spec);
            let rhs = induced_shift_star(&classify(x, spec), spec);
            !lhs.agrees_with(&rhs)
        })
        .map(|(i, _)| i)
        .collect();
    SemiconjugacyReport { samples: samples.len(), holds: failures.is_empty(), failures }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegCheck {
    pub n: usize,
    pub samples: usize,
    /// Sample points whose class moved.
    #[serde_as(as = "Vec<Pq>")]
    pub moved: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedLegsReport {
    pub prefix_len: usize,
    pub all_fixed: bool,
    pub legs: Vec<LegCheck>,
}

pub const LEG_SAMPLES: i64 = 64;

/// Constant sequences `(t, t, ..)` for `t = 2n - 2 + j/64` are fixed by the
/// induced one-sided shift, for every component `n` in range.
pub fn fixed_legs_report(h: &PLRelation, ns: std::ops::RangeInclusive<usize>, prefix_len: usize) -> Result<FixedLegsReport> {
    let k_max = h.k_max().ok_or_else(|| Error::Domain("relation does not live on the component space".into()))?;
    if *ns.start() == 0 || *ns.end() > k_max {
        return domain(format!("components must lie in 1..={k_max}"));
    }
    if prefix_len < 2 {
        return domain("prefix length must be at least 2");
    }
    let spec = QuotientSpec { kind: QuotientKind::Sim1 };
    let mut legs = Vec::new();
    for n in ns {
        let mut moved = Vec::new();
        for j in 0..LEG_SAMPLES {
            let t = Q::from_integer((2 * n as i64 - 2).into()) + Q::new(j.into(), LEG_SAMPLES.into());
            let v = Value::Finite(t.clone());
            if !relation_contains(h, &v, &v) {
                return Err(Error::Precondition(format!("the constant sequence at {} is not admissible", to_pq(&t))));
            }
            let x = PointPrefix::one_sided(vec![v; prefix_len]);
            let c = quotient_class(&x, &spec);
            if !induced_shift_star(&c, &spec).agrees_with(&c) {
                moved.push(t);
            }
        }
        legs.push(LegCheck { n, samples: LEG_SAMPLES as usize, moved });
    }
    Ok(FixedLegsReport { prefix_len, all_fixed: legs.iter().all(|l| l.moved.is_empty()), legs })
}

/// `t - 2l` for `t` in the component `[2l, 2l+1]`.
fn reduce(t: &Q) -> Q {
    let l = (t / Q::from_integer(2.into())).floor();
    t - l * Q::from_integer(2.into())
}

/// Whether the reduced coordinates from position `n0` (0-based) on come
/// within `tol` of 1. The point at infinity carries no value.
pub fn endpoint_witness(prefix: &[Value], n0: usize, tol: &Q) -> Result<bool> {
    if prefix.len() <= n0 {
        return Err(Error::Precondition(format!("prefix has {} terms, need more than {n0}", prefix.len())));
    }
    let target = Q::one() - tol;
    Ok(prefix[n0..].iter().filter_map(Value::finite).any(|t| reduce(t) >= target))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonSearch {
    pub transitive: MixingReport,
    /// Mixing reports of `G ∪ Δ` at doubling horizons.
    pub attempts: Vec<MixingReport>,
    pub horizon: Option<usize>,
}

/// Checks `g` is transitive at the given scale, then looks for the least
/// horizon among `N, 2N, 4N, .. <= max_horizon` at which `g ∪ Δ` mixes.
pub fn diagonal_mixing_horizon(g: &PLRelation, params: &VerifyParams, max_horizon: usize) -> Result<HorizonSearch> {
    let transitive = check_transitive(g, params)?;
    let mut attempts = Vec::new();
    let mut found = None;
    if transitive.transitive {
        let gd = g.with_diagonal()?;
        let mut n = params.horizon;
        while n <= max_horizon {
            let r = check_mixing(&gd, &VerifyParams { horizon: n, ..params.clone() })?;
            let ok = r.mixing;
            attempts.push(r);
            if ok {
                found = Some(n);
                break;
            }
            n *= 2;
        }
    }
    Ok(HorizonSearch { transitive, attempts, horizon: found })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use crate::relations::{make_F_rrho, make_HR};
    use crate::mahavier::is_admissible;

    #[test]
    fn excursion_blocks() {
        let f = make_F_rrho(&q(1, 2), &qi(3)).unwrap();
        let x = vec![q(1, 2), q(1, 4), q(3, 4)];
        let p = transitive_point_H(&x, &f, 15).unwrap();
        let expect = [
            q(1, 2), q(5, 2), q(1, 2),
            q(1, 4), q(9, 4), q(17, 4), q(9, 4), q(1, 4),
            q(3, 4), q(11, 4), q(19, 4), q(27, 4), q(19, 4), q(11, 4), q(3, 4),
        ];
        assert_eq!(p, expect);
        let hr = make_HR(&f, 4).unwrap();
        let vals: Vec<Value> = p.into_iter().map(Value::Finite).collect();
        assert!(is_admissible(&hr, &vals));
        assert!(matches!(transitive_point_H(&x, &f, 16), Err(Error::Domain(_))));
        assert!(matches!(transitive_point_H(&[q(1, 2), q(1, 5)], &f, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn greedy_tail() {
        let t = find_sup_one_tail(&q(1, 2), &q(1, 2), &qi(3), &q(1, 16), 100).unwrap();
        assert_eq!(t.sup, q(243, 256));
        assert_eq!(t.trace.last().unwrap(), &q(243, 256));
        assert_eq!(t.word.len() + 1, t.trace.len());
        let one = find_sup_one_tail(&q(1, 3), &q(1, 2), &qi(3), &q(1, 100), 10).unwrap();
        assert_eq!(one.word, vec![TailLetter::TimesRho]);
        assert!(find_sup_one_tail(&qi(1), &q(1, 2), &qi(3), &q(1, 2), 0).unwrap().word.is_empty());
        assert!(matches!(find_sup_one_tail(&q(1, 2), &q(1, 2), &qi(3), &q(1, 10_000), 3), Err(Error::Budget { .. })));
        assert!(matches!(find_sup_one_tail(&q(1, 2), &q(1, 2), &qi(4), &q(1, 16), 10), Err(Error::Precondition(_))));
    }

    fn pre(v: &[i64]) -> PointPrefix {
        PointPrefix::one_sided(v.iter().map(|&x| Value::Finite(qi(x))).collect())
    }

    #[test]
    fn classes_and_shift() {
        let spec = QuotientSpec { kind: QuotientKind::Sim1 };
        assert_eq!(quotient_class(&pre(&[0, 2, 4]), &spec), QClass::Top);
        assert!(matches!(quotient_class(&pre(&[1, 2, 4]), &spec), QClass::Singleton(_)));
        assert_eq!(induced_shift_star(&quotient_class(&pre(&[1, 2, 4]), &spec), &spec), QClass::Top);
        let two = QuotientSpec { kind: QuotientKind::Sim2 };
        let s = shift_prefix(&PointPrefix { first_index: 0, coords: pre(&[1, 3]).coords }, &two);
        assert_eq!(s.first_index, -1);
    }

    #[test]
    fn corrupted_classifier_is_caught() {
        let spec = QuotientSpec { kind: QuotientKind::Sim1 };
        let samples = vec![pre(&[0, 2, 4]), pre(&[1, 2, 3]), pre(&[3, 1, 1])];
        assert!(check_semiconjugacy(&samples, &spec, quotient_class).holds);
        let bad = |p: &PointPrefix, s: &QuotientSpec| {
            if p.coords.first() == Some(&Value::Finite(qi(3))) {
                QClass::Top
            } else {
                quotient_class(p, s)
            }
        };
        assert_eq!(check_semiconjugacy(&samples, &spec, bad).failures, vec![2]);
    }

    #[test]
    fn reduced_witness() {
        let mut p: Vec<Value> = [q(1, 2), q(9, 2), q(31, 32)].into_iter().map(Value::Finite).collect();
        p.push(Value::Infinity);
        assert!(endpoint_witness(&p, 1, &q(1, 16)).unwrap());
        assert!(!endpoint_witness(&p, 1, &q(1, 64)).unwrap());
        assert!(matches!(endpoint_witness(&p, 4, &q(1, 16)), Err(Error::Precondition(_))));
    }
}
