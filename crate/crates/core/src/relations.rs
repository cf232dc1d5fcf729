//! Closed relations given as finite unions of affine branches.
//!
//! Each branch is the graph of `t -> slope * t + offset` over a closed
//! interval lying in one component of the ambient. On `X` the fixed point at
//! infinity is carried as a flag instead of a branch.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::serde_as;

use crate::compacta::{xspace_component, MetricSpace, Value};
use crate::error::{domain, Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::rational::{powi, q, qi, to_pq, Pq, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchLabel {
    TimesR,
    TimesRho,
    Identity,
    UpShift,
    DownShift,
    /// Any other affine piece; exempt from the one-per-component rule.
    Affine,
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BranchLabel::TimesR => "times-r",
            BranchLabel::TimesRho => "times-rho",
            BranchLabel::Identity => "identity",
            BranchLabel::UpShift => "up-shift",
            BranchLabel::DownShift => "down-shift",
            BranchLabel::Affine => "affine",
        };
        f.write_str(s)
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineBranch {
    #[serde(default)]
    pub id: usize,
    pub label: BranchLabel,
    #[serde_as(as = "(Pq, Pq)")]
    pub domain: (Q, Q),
    #[serde_as(as = "Pq")]
    pub slope: Q,
    #[serde_as(as = "Pq")]
    pub offset: Q,
}

impl AffineBranch {
    pub fn new(label: BranchLabel, lo: Q, hi: Q, slope: Q, offset: Q) -> Self {
        AffineBranch { id: 0, label, domain: (lo, hi), slope, offset }
    }

    pub fn apply(&self, x: &Q) -> Q {
        &self.slope * x + &self.offset
    }

    /// Inverse map; only meaningful for a nonzero slope.
    pub fn unapply(&self, y: &Q) -> Q {
        (y - &self.offset) / &self.slope
    }

    pub fn domain_interval(&self) -> Interval {
        Interval::closed(self.domain.0.clone(), self.domain.1.clone())
    }

    pub fn in_domain(&self, x: &Q) -> bool {
        &self.domain.0 <= x && x <= &self.domain.1
    }

    pub fn image_interval(&self) -> Interval {
        self.domain_interval().affine_image(&self.slope, &self.offset)
    }

    /// `{ x in domain : slope * x + offset in target }`.
    pub fn pullback(&self, target: &Interval) -> Interval {
        if self.slope.is_zero() {
            if target.contains(&self.offset) {
                return self.domain_interval();
            }
            return Interval::open(Q::zero(), Q::zero());
        }
        target.affine_preimage(&self.slope, &self.offset).intersect(&self.domain_interval())
    }

    fn sort_key(&self, ambient: &MetricSpace) -> (usize, BranchLabel, Q, Q, Q, Q) {
        (
            component_of(ambient, &self.domain.0).unwrap_or(usize::MAX),
            self.label,
            self.domain.0.clone(),
            self.domain.1.clone(),
            self.slope.clone(),
            self.offset.clone(),
        )
    }
}

/// Index of the ambient component holding `x` (1 for the unit interval).
pub fn component_of(ambient: &MetricSpace, x: &Q) -> Option<usize> {
    match ambient {
        MetricSpace::UnitInterval => (!x.is_negative() && x <= &Q::one()).then_some(1),
        MetricSpace::XSpace { k_max } => xspace_component(x).filter(|k| k <= k_max),
        _ => None,
    }
}

/// The interval components of the ambient as a set.
pub fn ambient_components(ambient: &MetricSpace) -> IntervalSet {
    match ambient {
        MetricSpace::UnitInterval => IntervalSet::from_interval(Interval::closed(qi(0), qi(1))),
        MetricSpace::XSpace { k_max } => IntervalSet::from_intervals(
            (1..=*k_max as i64).map(|k| Interval::closed(qi(2 * k - 2), qi(2 * k - 1))).collect(),
        ),
        _ => IntervalSet::empty(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLRelation {
    pub ambient: MetricSpace,
    pub branches: Vec<AffineBranch>,
    #[serde(default)]
    pub infinity_fixed: bool,
}

impl PLRelation {
    /// Validates the branches, sorts them canonically and renumbers ids.
    pub fn new(ambient: MetricSpace, branches: Vec<AffineBranch>, infinity_fixed: bool) -> Result<Self> {
        match ambient {
            MetricSpace::UnitInterval => {
                if infinity_fixed {
                    return domain("the unit interval has no point at infinity");
                }
            }
            MetricSpace::XSpace { k_max } if k_max >= 1 => {}
            _ => return domain("relations live on the unit interval or on X"),
        }
        let mut branches = branches;
        let mut seen = BTreeSet::new();
        for b in &branches {
            if b.domain.0 > b.domain.1 {
                return domain(format!("{} branch has an empty domain", b.label));
            }
            let c = component_of(&ambient, &b.domain.0);
            if c.is_none() || c != component_of(&ambient, &b.domain.1) {
                return domain(format!(
                    "{} branch domain [{}, {}] is not inside one component",
                    b.label,
                    to_pq(&b.domain.0),
                    to_pq(&b.domain.1)
                ));
            }
            let img = b.image_interval();
            let ci = component_of(&ambient, &img.lo);
            if ci.is_none() || ci != component_of(&ambient, &img.hi) {
                return domain(format!("{} branch image {img} is not inside one component", b.label));
            }
            if b.label != BranchLabel::Affine && !seen.insert((b.label, c)) {
                return domain(format!("two {} branches on component {}", b.label, c.unwrap()));
            }
        }
        branches.sort_by_cached_key(|b| b.sort_key(&ambient));
        branches.dedup_by(|a, b| a.sort_key(&ambient) == b.sort_key(&ambient));
        for (i, b) in branches.iter_mut().enumerate() {
            b.id = i;
        }
        Ok(PLRelation { ambient, branches, infinity_fixed })
    }

    /// Re-runs validation and canonical ordering, e.g. after deserializing.
    pub fn validated(self) -> Result<Self> {
        PLRelation::new(self.ambient, self.branches, self.infinity_fixed)
    }

    /// Branches plus the point at infinity when present.
    pub fn branch_count(&self) -> usize {
        self.branches.len() + usize::from(self.infinity_fixed)
    }

    pub fn contains(&self, x: &Value, y: &Value) -> bool {
        relation_contains(self, x, y)
    }

    pub fn k_max(&self) -> Option<usize> {
        match self.ambient {
            MetricSpace::XSpace { k_max } => Some(k_max),
            _ => None,
        }
    }

    /// Union of the branch domains and union of the branch images.
    pub fn projections(&self) -> (IntervalSet, IntervalSet) {
        let p1 = IntervalSet::from_intervals(self.branches.iter().map(|b| b.domain_interval()).collect());
        let p2 = IntervalSet::from_intervals(self.branches.iter().map(|b| b.image_interval()).collect());
        (p1, p2)
    }

    /// Both projections cover every retained component.
    pub fn has_full_projections(&self) -> bool {
        let whole = ambient_components(&self.ambient);
        let (p1, p2) = self.projections();
        whole.is_subset_of(&p1) && whole.is_subset_of(&p2)
    }

    /// Union with the diagonal of the ambient.
    pub fn with_diagonal(&self) -> Result<PLRelation> {
        let mut branches = self.branches.clone();
        for part in ambient_components(&self.ambient).parts() {
            let dup = branches.iter().any(|b| {
                b.label == BranchLabel::Identity && b.domain == (part.lo.clone(), part.hi.clone())
            });
            if !dup {
                let label = if self.branches.iter().any(|b| {
                    b.label == BranchLabel::Identity
                        && component_of(&self.ambient, &b.domain.0) == component_of(&self.ambient, &part.lo)
                }) {
                    BranchLabel::Affine
                } else {
                    BranchLabel::Identity
                };
                branches.push(AffineBranch::new(label, part.lo.clone(), part.hi.clone(), qi(1), qi(0)));
            }
        }
        PLRelation::new(self.ambient.clone(), branches, self.infinity_fixed)
    }
}

pub fn relation_contains(rel: &PLRelation, x: &Value, y: &Value) -> bool {
    match (x, y) {
        (Value::Infinity, Value::Infinity) => rel.infinity_fixed,
        (Value::Finite(x), Value::Finite(y)) => {
            rel.branches.iter().any(|b| b.in_domain(x) && &b.apply(x) == y)
        }
        _ => false,
    }
}

/// Exact forward image of a finite union of intervals.
pub fn image_of_set(rel: &PLRelation, s: &IntervalSet) -> IntervalSet {
    let mut parts = Vec::new();
    for b in &rel.branches {
        for piece in s.intersect_interval(&b.domain_interval()).parts() {
            parts.push(piece.affine_image(&b.slope, &b.offset));
        }
    }
    IntervalSet::from_intervals(parts)
}

/// Exact preimage `{ x : (x, y) in rel for some y in s }`.
pub fn preimage_of_set(rel: &PLRelation, s: &IntervalSet) -> IntervalSet {
    let mut parts = Vec::new();
    for b in &rel.branches {
        for piece in s.parts() {
            let p = b.pullback(piece);
            if !p.is_empty() {
                parts.push(p);
            }
        }
    }
    IntervalSet::from_intervals(parts)
}

fn check_pair(r: &Q, rho: &Q) -> Result<()> {
    if !r.is_positive() || r >= &Q::one() {
        return domain(format!("r = {} must lie in (0, 1)", to_pq(r)));
    }
    if rho <= &Q::one() {
        return domain(format!("rho = {} must exceed 1", to_pq(rho)));
    }
    Ok(())
}

/// `{(t, r t)} ∪ {(t, rho t) : t <= 1/rho} ∪ {(t, t)}` on `[0, 1]`.
#[allow(non_snake_case)]
pub fn make_F_rrho(r: &Q, rho: &Q) -> Result<PLRelation> {
    check_pair(r, rho)?;
    let branches = vec![
        AffineBranch::new(BranchLabel::TimesR, qi(0), qi(1), r.clone(), qi(0)),
        AffineBranch::new(BranchLabel::TimesRho, qi(0), rho.recip(), rho.clone(), qi(0)),
        AffineBranch::new(BranchLabel::Identity, qi(0), qi(1), qi(1), qi(0)),
    ];
    PLRelation::new(MetricSpace::UnitInterval, branches, false)
}

fn shift_branches(k_max: usize, identity_from: usize) -> Vec<AffineBranch> {
    let mut out = Vec::new();
    for k in 1..=k_max as i64 {
        let (lo, hi) = (qi(2 * k - 2), qi(2 * k - 1));
        if k < k_max as i64 {
            out.push(AffineBranch::new(BranchLabel::UpShift, lo.clone(), hi.clone(), qi(1), qi(2)));
        }
        if k > 1 {
            out.push(AffineBranch::new(BranchLabel::DownShift, lo.clone(), hi.clone(), qi(1), qi(-2)));
        }
        if k >= identity_from as i64 {
            out.push(AffineBranch::new(BranchLabel::Identity, lo, hi, qi(1), qi(0)));
        }
    }
    out
}

/// The relation on `X` truncated to `I_1..I_{k_max}`.
#[allow(non_snake_case)]
pub fn make_H(r: &Q, rho: &Q, k_max: usize) -> Result<PLRelation> {
    check_pair(r, rho)?;
    if k_max < 2 {
        return domain("k_max must be at least 2");
    }
    let mut branches = vec![
        AffineBranch::new(BranchLabel::TimesR, qi(0), qi(1), r.clone(), qi(0)),
        AffineBranch::new(BranchLabel::TimesRho, qi(0), rho.recip(), rho.clone(), qi(0)),
    ];
    branches.extend(shift_branches(k_max, 1));
    PLRelation::new(MetricSpace::XSpace { k_max }, branches, true)
}

/// Embeds a relation on `[0, 1]` as the `I_1` part of a relation on `X`,
/// adding the shifts, the diagonal on `I_2..` and the point at infinity.
#[allow(non_snake_case)]
pub fn make_HR(rel: &PLRelation, k_max: usize) -> Result<PLRelation> {
    if rel.ambient != MetricSpace::UnitInterval {
        return domain("make_HR expects a relation on the unit interval");
    }
    if k_max < 2 {
        return domain("k_max must be at least 2");
    }
    let mut branches = rel.branches.clone();
    branches.extend(shift_branches(k_max, 2));
    PLRelation::new(MetricSpace::XSpace { k_max }, branches, true)
}

pub fn identity_relation() -> PLRelation {
    PLRelation::new(
        MetricSpace::UnitInterval,
        vec![AffineBranch::new(BranchLabel::Identity, qi(0), qi(1), qi(1), qi(0))],
        false,
    )
    .expect("valid relation")
}

/// Branches mapping each cell `[j/pieces, (j+1)/pieces]` increasingly onto
/// `[0, 1]`; the graph is within `1/pieces` of the full square.
pub fn full_relation(pieces: usize) -> Result<PLRelation> {
    if pieces == 0 {
        return domain("need at least one piece");
    }
    let k = pieces as i64;
    let branches = (0..k)
        .map(|j| AffineBranch::new(BranchLabel::Affine, q(j, k), q(j + 1, k), qi(k), qi(-j)))
        .collect();
    PLRelation::new(MetricSpace::UnitInterval, branches, false)
}

/// Prime factorization of a positive integer by trial division.
fn factor(n: &BigInt) -> BTreeMap<BigInt, i64> {
    let mut out = BTreeMap::new();
    let mut n = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        while (&n % &d).is_zero() {
            *out.entry(d.clone()).or_insert(0) += 1;
            n /= &d;
        }
        d += 1;
    }
    if n > BigInt::one() {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

/// Exponent of each prime in a positive rational.
pub fn prime_exponents(x: &Q) -> BTreeMap<BigInt, i64> {
    let mut out = factor(x.numer());
    for (p, e) in factor(x.denom()) {
        *out.entry(p).or_insert(0) -= e;
    }
    out.retain(|_, e| *e != 0);
    out
}

fn valuation(x: &Q, p: &BigInt) -> i64 {
    let count = |mut n: BigInt| {
        let mut c = 0;
        while (&n % p).is_zero() {
            n /= p;
            c += 1;
        }
        c
    };
    count(x.numer().abs()) - count(x.denom().clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NcCertificate {
    /// Exponent vectors of `r` and `rho` at primes `p`, `q` form a matrix of
    /// nonzero determinant.
    NonParallel { p: String, q: String, r_exponents: (i64, i64), rho_exponents: (i64, i64) },
    /// `r^k = rho^l` with `k > 0`.
    Connect { k: i64, l: i64 },
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcPair {
    #[serde_as(as = "Pq")]
    pub r: Q,
    #[serde_as(as = "Pq")]
    pub rho: Q,
    pub never_connect: bool,
    pub certificate: NcCertificate,
}

impl NcPair {
    /// Re-derives the verdict from the certificate alone.
    pub fn verify(&self) -> bool {
        match &self.certificate {
            NcCertificate::Connect { k, l } => {
                !self.never_connect && (*k, *l) != (0, 0) && powi(&self.r, *k) == powi(&self.rho, *l)
            }
            NcCertificate::NonParallel { p, q, r_exponents, rho_exponents } => {
                let (Ok(p), Ok(q)) = (p.parse::<BigInt>(), q.parse::<BigInt>()) else {
                    return false;
                };
                let ok = valuation(&self.r, &p) == r_exponents.0
                    && valuation(&self.r, &q) == r_exponents.1
                    && valuation(&self.rho, &p) == rho_exponents.0
                    && valuation(&self.rho, &q) == rho_exponents.1;
                let det = r_exponents.0 * rho_exponents.1 - r_exponents.1 * rho_exponents.0;
                self.never_connect && ok && det != 0
            }
        }
    }
}

/// Decides whether `r^k = rho^l` forces `k = l = 0`.
pub fn never_connect(r: &Q, rho: &Q) -> Result<NcPair> {
    check_pair(r, rho)?;
    let u = prime_exponents(r);
    let w = prime_exponents(rho);
    let primes: Vec<BigInt> = u.keys().chain(w.keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let get = |m: &BTreeMap<BigInt, i64>, p: &BigInt| m.get(p).copied().unwrap_or(0);
    for (i, p) in primes.iter().enumerate() {
        for q in &primes[i + 1..] {
            let (up, uq, wp, wq) = (get(&u, p), get(&u, q), get(&w, p), get(&w, q));
            if up * wq - uq * wp != 0 {
                return Ok(NcPair {
                    r: r.clone(),
                    rho: rho.clone(),
                    never_connect: true,
                    certificate: NcCertificate::NonParallel {
                        p: p.to_string(),
                        q: q.to_string(),
                        r_exponents: (up, uq),
                        rho_exponents: (wp, wq),
                    },
                });
            }
        }
    }
    // parallel vectors; both are nonzero because r != 1 != rho
    let p = primes
        .iter()
        .find(|p| get(&u, p) != 0)
        .ok_or_else(|| Error::Domain("r has no prime factors".into()))?;
    let (up, wp) = (get(&u, p), get(&w, p));
    if wp == 0 {
        // cannot happen for parallel nonzero vectors, but keep the search honest
        return domain("inconsistent exponent vectors");
    }
    let g = up.gcd(&wp);
    let (mut k, mut l) = (wp / g, up / g);
    if k < 0 {
        k = -k;
        l = -l;
    }
    Ok(NcPair { r: r.clone(), rho: rho.clone(), never_connect: false, certificate: NcCertificate::Connect { k, l } })
}
