//! Submonomial Kummer centers, the ideals `J^{(a)}`, explicit blow-up charts, controlled
//! and strict transforms, transforms of derivations and pushforward of centers.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::chartring::{ChartRing, Ideal, Relation, RelationTag, RingError, VarKind};
use crate::derivations::{Derivation, DerivationSet};
use crate::element::RingElement;
use crate::exactmath::Rational;
use crate::marked::MarkedIdeal;
use crate::monoid::{region_generators, LatticePoint, MonoidError, ToricMonoid};

/// Bound on the exceptional power searched for by strict transforms.
pub const STRICT_POWER_LIMIT: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlowupError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("empty center")]
    EmptyCenter,
    #[error("center denominator must be positive")]
    ZeroDenominator,
}

/// A submonomial Kummer center `(h_1..h_l, u^{q_1/d}..u^{q_k/d})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Center {
    pub t_part: Vec<RingElement>,
    pub mon_part: Vec<LatticePoint>,
    pub d: u64,
}

impl Center {
    pub fn new(
        t_part: Vec<RingElement>,
        mon_part: Vec<LatticePoint>,
        d: u64,
    ) -> Result<Self, BlowupError> {
        if d == 0 {
            return Err(BlowupError::ZeroDenominator);
        }
        if t_part.is_empty() && mon_part.is_empty() {
            return Err(BlowupError::EmptyCenter);
        }
        Ok(Center {
            t_part,
            mon_part,
            d,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.t_part.is_empty() && self.mon_part.is_empty()
    }

    /// Kummer exponents `q_j/d`.
    pub fn kummer_exponents(&self) -> Vec<LatticePoint> {
        let inv = Rational::new(BigInt::one(), BigInt::from(self.d));
        self.mon_part.iter().map(|q| q.scale(&inv)).collect()
    }
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.t_part.iter().map(|h| h.to_string()).collect();
        let m: Vec<String> = self.mon_part.iter().map(|q| q.to_string()).collect();
        write!(f, "({}; {}; {})", t.join(", "), m.join(", "), self.d)
    }
}

/// `contacts ++ inner.t_part`, same monomial part.
pub fn pushforward_center(contacts: &[RingElement], inner: &Center) -> Center {
    let mut t_part = contacts.to_vec();
    t_part.extend(inner.t_part.iter().cloned());
    Center {
        t_part,
        mon_part: inner.mon_part.clone(),
        d: inner.d,
    }
}

/// `(N^j)^sat ∩ L` for `N = (u^{q_k/d})`, as monomial generators.
pub fn kummer_power_saturation(
    monoid: &ToricMonoid,
    center: &Center,
    j: u64,
) -> Result<Vec<LatticePoint>, BlowupError> {
    if j == 0 || center.mon_part.is_empty() {
        return Ok(vec![LatticePoint::zero(monoid.rank())]);
    }
    let s = Rational::new(BigInt::from(j), BigInt::from(center.d));
    let verts: Vec<LatticePoint> = center.mon_part.iter().map(|q| q.scale(&s)).collect();
    Ok(region_generators(monoid, &verts)?)
}

/// `J^{(a)} = Σ_j (N^j)^sat · T^{a-j}`.
pub fn j_ideal(ring: &ChartRing, center: &Center, a: u64) -> Result<Ideal, BlowupError> {
    let (n, r) = (ring.nvars(), ring.rank());
    let t = Ideal::new(center.t_part.clone());
    let mut tpow = vec![Ideal::unit(n, r)];
    for _ in 0..a {
        let next = ring.reduce_ideal(&tpow.last().expect("nonempty").mul(&t))?;
        tpow.push(next);
    }
    let mut total = Ideal::zero();
    let jmax = if center.mon_part.is_empty() { 0 } else { a };
    for j in 0..=jmax {
        let mons = kummer_power_saturation(ring.monoid(), center, j)?;
        let mi = Ideal::new(mons.into_iter().map(|q| ring.monomial(q)).collect());
        total = total.add(&mi.mul(&tpow[(a - j) as usize]));
    }
    Ok(ring.reduce_ideal(&total)?)
}

/// Whether `I ⊆ J^{(a)}`.
pub fn admissible(ring: &ChartRing, center: &Center, m: &MarkedIdeal) -> Result<bool, BlowupError> {
    if m.weight == 0 {
        return Ok(true);
    }
    let j = j_ideal(ring, center, m.weight)?;
    Ok(ring.contains_ideal(&j, &m.ideal)?)
}

/// Canonical form of a center for comparisons: terms lying in the monomial part are dropped and
/// the t-part is replaced by its reduced Gröbner generators.
pub fn canonical_center(ring: &ChartRing, center: &Center) -> Result<Center, BlowupError> {
    let mons = if center.mon_part.is_empty() {
        Vec::new()
    } else {
        kummer_power_saturation(ring.monoid(), center, 1)?
    };
    let m = ring.monoid();
    let trimmed: Vec<RingElement> = center
        .t_part
        .iter()
        .map(|h| {
            RingElement::from_terms(
                h.nvars(),
                h.rank(),
                h.terms()
                    .filter(|(k, _)| !mons.iter().any(|p| m.divides(p, &k.q)))
                    .map(|(k, c)| (k.clone(), c.clone())),
            )
        })
        .collect();
    let t_part = ring.canonical_generators(&Ideal::new(trimmed))?;
    let mut mon_part = center.mon_part.clone();
    mon_part.sort_by(|a, b| b.cmp(a));
    mon_part.dedup();
    Ok(Center {
        t_part,
        mon_part,
        d: center.d,
    })
}

/// Which center generator a chart inverts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    T(usize),
    M(usize),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::T(i) => write!(f, "t{}", i + 1),
            Selector::M(j) => write!(f, "m{}", j + 1),
        }
    }
}

/// Where a chart variable comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarOrigin {
    /// An old variable kept in place.
    Old(usize),
    /// The quotient `h_k / y` of the `k`-th t-part element by the exceptional monomial.
    Fresh(usize),
}

/// One chart of a Kummer blow-up.
#[derive(Clone, Debug)]
pub struct BlowupChart {
    pub selector: Selector,
    pub ring: ChartRing,
    /// Image of each old variable.
    pub images: Vec<RingElement>,
    /// Origin of each new variable.
    pub origins: Vec<VarOrigin>,
    /// New variable standing for `h_k / y`, per t-part element.
    pub fresh_var: Vec<Option<usize>>,
    /// Exponent of the exceptional monomial `y`.
    pub exceptional: LatticePoint,
    /// Order of the inertia group and the new lattice generators.
    pub inertia: (u64, Vec<LatticePoint>),
    /// Old lattice rank (coordinates beyond it are new).
    pub old_rank: usize,
    /// Denominator of the center.
    pub d: u64,
}

impl BlowupChart {
    pub fn map_point(&self, q: &LatticePoint) -> LatticePoint {
        q.extend_to(self.ring.rank())
    }

    /// `σ(f)`.
    pub fn pullback(&self, f: &RingElement) -> RingElement {
        f.substitute(&self.images, self.ring.nvars(), self.ring.rank(), |q| {
            q.extend_to(self.ring.rank())
        })
    }

    pub fn pullback_ideal(&self, i: &Ideal) -> Ideal {
        i.map(|g| self.pullback(g))
    }

    pub fn exceptional_element(&self) -> RingElement {
        self.ring.monomial(self.exceptional.clone())
    }

    /// `σ(I)` divided by `y^a` generator by generator.
    pub fn controlled_transform(&self, m: &MarkedIdeal) -> Result<MarkedIdeal, RingError> {
        let q = self
            .exceptional
            .scale(&Rational::from_integer(BigInt::from(m.weight)));
        let mut gens = Vec::new();
        for g in m.ideal.gens() {
            let p = self.ring.normal_form(&self.pullback(g))?;
            gens.push(self.ring.divide_by_monomial(&p, &q)?);
        }
        Ok(MarkedIdeal::new(Ideal::new(gens), m.weight))
    }

    /// `σ(f)` divided by the largest power of `y` dividing it.
    pub fn strict_transform_element(&self, f: &RingElement) -> Result<RingElement, RingError> {
        let p = self.ring.normal_form(&self.pullback(f))?;
        let (_, q) = self
            .ring
            .max_monomial_power(&p, &self.exceptional, STRICT_POWER_LIMIT)?;
        Ok(q)
    }

    pub fn strict_transform(&self, hyp: &Ideal) -> Result<Ideal, RingError> {
        Ok(Ideal::new(
            hyp.gens()
                .iter()
                .map(|g| self.strict_transform_element(g))
                .collect::<Result<_, _>>()?,
        ))
    }

    /// Strict transform of a t-part element of the center: the fresh variable, or one on the selector chart.
    pub fn strict_transform_of_center_element(&self, k: usize) -> RingElement {
        match (self.selector, self.fresh_var.get(k).copied().flatten()) {
            (Selector::T(i), _) if i == k => self.ring.one(),
            (_, Some(v)) => self.ring.var(v),
            _ => self.ring.one(),
        }
    }
}

/// Splits `h = c·x_j + g` with `g` free of `x_j` and `c` a nonzero constant.
fn linear_in(h: &RingElement, j: usize) -> Option<(Rational, RingElement)> {
    let mut c = None;
    let mut rest = Vec::new();
    for (k, v) in h.terms() {
        if k.exps[j] == 0 {
            rest.push((k.clone(), v.clone()));
        } else if k.exps[j] == 1
            && k.q.is_zero()
            && k.exps.iter().enumerate().all(|(i, &e)| i == j || e == 0)
        {
            c = Some(v.clone());
        } else {
            return None;
        }
    }
    c.map(|c| (c, RingElement::from_terms(h.nvars(), h.rank(), rest)))
}

/// Chooses variables to eliminate for the t-part elements, greedily and without conflicts.
fn choose_solved(
    ring: &ChartRing,
    t_part: &[RingElement],
) -> Vec<Option<(usize, Rational, RingElement)>> {
    let mut out: Vec<Option<(usize, Rational, RingElement)>> = vec![None; t_part.len()];
    let mut solved_vars: Vec<usize> = Vec::new();
    for (k, h) in t_part.iter().enumerate() {
        for j in 0..ring.nvars() {
            if ring.kinds()[j] != VarKind::T || solved_vars.contains(&j) {
                continue;
            }
            let Some((c, g)) = linear_in(h, j) else {
                continue;
            };
            if solved_vars.iter().any(|&v| g.involves(v)) {
                continue;
            }
            let clash = out.iter().flatten().any(|(_, _, g2)| g2.involves(j));
            if clash {
                continue;
            }
            solved_vars.push(j);
            out[k] = Some((j, c, g));
            break;
        }
    }
    out
}

/// Builds the charts of the blow-up of `center` on `ring`.
pub fn make_charts(ring: &ChartRing, center: &Center) -> Result<Vec<BlowupChart>, BlowupError> {
    if center.is_empty() {
        return Err(BlowupError::EmptyCenter);
    }
    let mut out = Vec::new();
    for i in 0..center.t_part.len() {
        out.push(make_chart(ring, center, Selector::T(i))?);
    }
    for j in 0..center.mon_part.len() {
        let others: Vec<LatticePoint> = center.mon_part.clone();
        if !ring.monoid().is_newton_vertex(&center.mon_part[j], &others) {
            continue;
        }
        if center.mon_part[..j].contains(&center.mon_part[j]) {
            continue;
        }
        out.push(make_chart(ring, center, Selector::M(j))?);
    }
    Ok(out)
}

/// Chart monoid, exceptional exponent, and the inertia data `(order, generators)`.
type ChartMonoid = (ToricMonoid, LatticePoint, (u64, Vec<LatticePoint>));

fn chart_monoid(
    old: &ToricMonoid,
    center: &Center,
    sel: Selector,
) -> Result<ChartMonoid, BlowupError> {
    let r = old.rank();
    let d = Rational::from_integer(BigInt::from(center.d));
    match sel {
        Selector::T(_) => {
            let r2 = r + 1;
            let den = old.denom().clone();
            let mut rows: Vec<Vec<BigInt>> = old
                .basis()
                .rows()
                .iter()
                .map(|row| {
                    let mut x = row.clone();
                    x.push(BigInt::zero());
                    x
                })
                .collect();
            let mut last = vec![BigInt::zero(); r2];
            last[r] = den.clone();
            rows.push(last);
            let mut cone: Vec<LatticePoint> = old.rays().iter().map(|p| p.extend_to(r2)).collect();
            let e = LatticePoint::axis(r2, r);
            cone.push(e.clone());
            for q in &center.mon_part {
                let mut v = q.extend_to(r2);
                v.0[r] = -d.clone();
                cone.push(v);
            }
            let base = old.base().iter().map(|p| p.extend_to(r2)).collect();
            let m = ToricMonoid::new(r2, den, rows, cone, base, old.nonlog().to_vec())?;
            Ok((m, e, (1, Vec::new())))
        }
        Selector::M(j) => {
            let qj = &center.mon_part[j];
            let s = qj.scale(&d.recip());
            let mut cone: Vec<LatticePoint> = old.rays().to_vec();
            cone.push(s.clone());
            for (k, q) in center.mon_part.iter().enumerate() {
                if k != j {
                    cone.push(q.sub(qj));
                }
            }
            let m = old.with_lattice_and_cone(std::slice::from_ref(&s), cone)?;
            // order of the new generator modulo the old lattice
            let mut order = 1u64;
            while order < center.d
                && old
                    .lattice_coords(&s.scale(&Rational::from_integer(BigInt::from(order))))
                    .is_none()
            {
                order += 1;
            }
            Ok((m, s.clone(), (order, vec![s])))
        }
    }
}

fn make_chart(
    ring: &ChartRing,
    center: &Center,
    sel: Selector,
) -> Result<BlowupChart, BlowupError> {
    let (monoid, exc, inertia) = chart_monoid(ring.monoid(), center, sel)?;
    let monoid = Arc::new(monoid);
    let r2 = monoid.rank();
    let n_old = ring.nvars();
    let solved = choose_solved(ring, &center.t_part);
    let selector_t = match sel {
        Selector::T(i) => Some(i),
        Selector::M(_) => None,
    };
    // new variable layout
    let mut origins: Vec<VarOrigin> = Vec::new();
    let mut kinds: Vec<VarKind> = Vec::new();
    let mut new_index: Vec<Option<usize>> = vec![None; n_old];
    let mut fresh_var: Vec<Option<usize>> = vec![None; center.t_part.len()];
    let solved_for: Vec<Option<usize>> = (0..n_old)
        .map(|v| {
            solved
                .iter()
                .position(|s| matches!(s, Some((j, _, _)) if *j == v))
        })
        .collect();
    for v in 0..n_old {
        match solved_for[v] {
            Some(k) if Some(k) == selector_t => {}
            Some(k) => {
                new_index[v] = Some(origins.len());
                fresh_var[k] = Some(origins.len());
                origins.push(VarOrigin::Fresh(k));
                kinds.push(VarKind::T);
            }
            None => {
                new_index[v] = Some(origins.len());
                origins.push(VarOrigin::Old(v));
                kinds.push(ring.kinds()[v]);
            }
        }
    }
    for k in 0..center.t_part.len() {
        if solved[k].is_none() && Some(k) != selector_t {
            fresh_var[k] = Some(origins.len());
            origins.push(VarOrigin::Fresh(k));
            kinds.push(VarKind::T);
        }
    }
    let n2 = origins.len();
    let y = RingElement::monomial(exc.clone(), n2);
    let map_q = |q: &LatticePoint| q.extend_to(r2);
    // images of kept variables first, then solved ones
    let mut images: Vec<RingElement> = (0..n_old)
        .map(|v| match (solved_for[v], new_index[v]) {
            (None, Some(i)) => RingElement::var(i, n2, r2),
            _ => RingElement::zero(n2, r2),
        })
        .collect();
    let renamed = images.clone();
    for (k, s) in solved.iter().enumerate() {
        if let Some((j, c, g)) = s {
            let g2 = g.substitute(&renamed, n2, r2, map_q);
            let top = if Some(k) == selector_t {
                y.clone()
            } else {
                y.mul(&RingElement::var(fresh_var[k].expect("fresh var"), n2, r2))
            };
            images[*j] = top.sub(&g2).scale(&c.recip());
        }
    }
    let pull = |f: &RingElement| f.substitute(&images, n2, r2, map_q);
    let mut relations: Vec<Relation> = Vec::new();
    for rel in ring.relations() {
        let p = pull(&rel.element);
        let mut cur = p;
        // strict transform, termwise
        loop {
            if cur.is_zero() || !cur.terms().all(|(k, _)| monoid.divides(&exc, &k.q)) {
                break;
            }
            cur = cur.shift(&exc.scale(&-Rational::one()));
        }
        if !cur.is_zero() {
            relations.push(Relation {
                element: cur,
                tag: rel.tag,
            });
        }
    }
    for (k, h) in center.t_part.iter().enumerate() {
        if solved[k].is_some() {
            continue;
        }
        let ph = pull(h);
        if Some(k) == selector_t {
            relations.push(Relation {
                element: ph.sub(&y),
                tag: RelationTag::Tied { coord: r2 - 1 },
            });
        } else {
            let t = RingElement::var(fresh_var[k].expect("fresh var"), n2, r2);
            relations.push(Relation {
                element: ph.sub(&y.mul(&t)),
                tag: RelationTag::Fresh,
            });
        }
    }
    let inverted: Vec<(usize, RingElement)> = ring
        .inverted()
        .iter()
        .map(|(w, g)| (new_index[*w].expect("aux variables are kept"), pull(g)))
        .collect();
    let mut new_ring = ChartRing::from_parts(monoid.clone(), kinds, relations, inverted)?;
    if new_ring.has_relations() {
        new_ring = saturate_at_exceptional(&new_ring, &exc)?;
    }
    Ok(BlowupChart {
        selector: sel,
        ring: new_ring,
        images,
        origins,
        fresh_var,
        exceptional: exc,
        inertia,
        old_rank: ring.rank(),
        d: center.d,
    })
}

/// Adds relations so that the relation ideal becomes `R : y^∞`.
fn saturate_at_exceptional(ring: &ChartRing, exc: &LatticePoint) -> Result<ChartRing, RingError> {
    let pres = ring.presentation()?;
    let pr = pres.poly_ring();
    let y = ring.to_poly(&ring.monomial(exc.clone()))?;
    let spare = crate::chartring::Presentation::SPARE;
    let rel = pr.sub(&pr.mul(&pr.var(spare), &y), &pr.constant(Rational::one()));
    let gb = pr.buchberger_extend(pres.base_gb(), &[rel]);
    let base: Vec<&crate::poly::Poly> = pres.base_gb().iter().collect();
    let mut out = ring.clone();
    for g in gb {
        if g.involves(spare) {
            continue;
        }
        if pr.normal_form(&g, &base).is_zero() {
            continue;
        }
        let e = ring.from_poly(&g)?;
        out = out.with_relation(e, RelationTag::Fresh)?;
    }
    Ok(out)
}

/// `σ^c ∂ = y·σ*∂` on a chart.
pub fn transform_derivation(
    chart: &BlowupChart,
    center: &Center,
    d: &Derivation,
) -> Result<Derivation, RingError> {
    let ring = &chart.ring;
    let (n2, r2) = (ring.nvars(), ring.rank());
    let y = chart.exceptional_element();
    let dh: Vec<RingElement> = center
        .t_part
        .iter()
        .map(|h| chart.pullback(&d.apply(h)))
        .collect();
    let mut nd = Derivation::zero(n2, r2);
    for k in 0..r2 {
        nd.log_action[k] = if k < chart.old_rank {
            y.mul(&chart.pullback(&d.log_action[k]))
        } else {
            match chart.selector {
                Selector::T(i) => dh[i].clone(),
                Selector::M(_) => RingElement::zero(n2, r2),
            }
        };
    }
    for (v, origin) in chart.origins.iter().enumerate() {
        nd.var_action[v] = match origin {
            VarOrigin::Old(w) => y.mul(&chart.pullback(&d.var_action[*w])),
            VarOrigin::Fresh(k) => {
                let t = ring.var(v);
                match chart.selector {
                    Selector::T(i) => dh[*k].sub(&t.mul(&dh[i])),
                    Selector::M(j) => {
                        let dq = chart.pullback(&d.log_value(&center.mon_part[j]));
                        let s = Rational::new(BigInt::one(), BigInt::from(center.d));
                        dh[*k].sub(&t.mul(&y).mul(&dq).scale(&s))
                    }
                }
            }
        };
    }
    nd.normalize(ring)
}

/// `σ^c F` for a set of derivations.
pub fn transform_derivations(
    chart: &BlowupChart,
    center: &Center,
    f: &DerivationSet,
) -> Result<DerivationSet, RingError> {
    Ok(DerivationSet::new(
        f.gens()
            .iter()
            .map(|d| transform_derivation(chart, center, d))
            .collect::<Result<_, _>>()?,
    ))
}

/// Lifts of derivations preserving the center: `σ^c ∂ / y`. A derivation whose transform is
/// not divisible by `y` is kept as `σ^c ∂`.
pub fn lift_derivations(
    chart: &BlowupChart,
    center: &Center,
    f: &DerivationSet,
) -> Result<DerivationSet, RingError> {
    let mut out = Vec::new();
    for d in f.gens() {
        let t = transform_derivation(chart, center, d)?;
        let div = |a: &RingElement| chart.ring.divide_by_monomial(a, &chart.exceptional);
        let lifted: Result<Vec<RingElement>, RingError> = t.var_action.iter().map(div).collect();
        let lifted_log: Result<Vec<RingElement>, RingError> =
            t.log_action.iter().map(div).collect();
        match (lifted, lifted_log) {
            (Ok(var_action), Ok(log_action)) => out.push(Derivation {
                var_action,
                log_action,
            }),
            (Err(RingError::NotDivisible { .. }), _) | (_, Err(RingError::NotDivisible { .. })) => {
                out.push(t)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(DerivationSet::new(out))
}

/// `ring` with `d`-th roots of all monomials adjoined.
fn kummer_refined(ring: &ChartRing, d: u64) -> Result<ChartRing, BlowupError> {
    let refined = ring.monoid().refine(d)?;
    Ok(ChartRing::from_parts(
        Arc::new(refined),
        ring.kinds().to_vec(),
        ring.relations().to_vec(),
        ring.inverted().to_vec(),
    )?)
}

/// Whether every generator of the center pulls back into `(y)` and some generator generates it,
/// checked in the ring refined so that the Kummer monomials exist.
pub fn exceptional_is_invertible(
    chart: &BlowupChart,
    center: &Center,
) -> Result<bool, BlowupError> {
    let ring = kummer_refined(&chart.ring, center.d)?;
    let mut gens: Vec<RingElement> = center.t_part.iter().map(|h| chart.pullback(h)).collect();
    for q in center.kummer_exponents() {
        gens.push(ring.monomial(chart.map_point(&q)));
    }
    let pulled = Ideal::new(gens);
    let y = Ideal::new(vec![ring.monomial(chart.exceptional.clone())]);
    Ok(ring.ideal_equal(&pulled, &y)?)
}

/// Whether `σ^{-1} J^{(a)} = (y^a)` on the chart. `J^{(a)}` is the Kummer ideal, so both sides
/// live in the rings with `d`-th roots of monomials adjoined; intersecting with the unrefined ring
/// first would lose the equality whenever `d` does not divide `a`.
pub fn j_pullback_is_exceptional_power(
    old_ring: &ChartRing,
    chart: &BlowupChart,
    center: &Center,
    a: u64,
) -> Result<bool, BlowupError> {
    let old = kummer_refined(old_ring, center.d)?;
    let new = kummer_refined(&chart.ring, center.d)?;
    let j = j_ideal(&old, center, a)?;
    let pulled = chart.pullback_ideal(&j);
    let ya = Ideal::new(vec![new.monomial(
        chart
            .exceptional
            .scale(&Rational::from_integer(BigInt::from(a))),
    )]);
    Ok(new.ideal_equal(&pulled, &ya)?)
}
