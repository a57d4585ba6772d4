//! Marked ideals `(I, a)`: homogenized sums and products, coefficient ideals,
//! logarithmic order, weighted monomial saturation and balanced decomposition.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::chartring::{ChartRing, Ideal, RingError};
use crate::derivations::{derive_ideal, derive_once, DerivError, DerivationSet, SATURATION_LIMIT};
use crate::exactmath::{rank, Rational};
use crate::monoid::{
    is_principal_invertible, kummer_root, monomial_saturation, LatticePoint, MonoidError,
    MonomialIdeal,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkedError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Deriv(#[from] DerivError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("homogenized sums need positive weights")]
    ZeroWeight,
    #[error("the zero ideal has no weighted saturation")]
    ZeroIdeal,
    #[error("monomial part {0} is not invertible")]
    NotBalanced(String),
}

/// An ideal with a weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedIdeal {
    pub ideal: Ideal,
    pub weight: u64,
}

impl MarkedIdeal {
    pub fn new(ideal: Ideal, weight: u64) -> Self {
        MarkedIdeal { ideal, weight }
    }
}

impl fmt::Display for MarkedIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}), {})", self.ideal, self.weight)
    }
}

/// Logarithmic order: finite, or infinite with the saturated obstruction ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogOrder {
    Finite(u64),
    Infinite(Ideal),
}

impl LogOrder {
    pub fn finite(&self) -> Option<u64> {
        match self {
            LogOrder::Finite(a) => Some(*a),
            LogOrder::Infinite(_) => None,
        }
    }
}

/// Tuples `l` with `Σ l_i·w_i ≥ target` that are minimal for this property.
pub fn minimal_tuples(weights: &[u64], target: u64) -> Vec<Vec<u64>> {
    let bounds: Vec<u64> = weights.iter().map(|&w| target.div_ceil(w)).collect();
    let mut out = Vec::new();
    let mut l = vec![0u64; weights.len()];
    loop {
        let s: u64 = l.iter().zip(weights).map(|(x, w)| x * w).sum();
        if s >= target
            && l.iter()
                .zip(weights)
                .all(|(&x, &w)| x == 0 || s - w < target)
        {
            out.push(l.clone());
        }
        let mut i = 0;
        loop {
            if i == l.len() {
                return out;
            }
            if l[i] < bounds[i] {
                l[i] += 1;
                break;
            }
            l[i] = 0;
            i += 1;
        }
    }
}

/// Homogenized sum: weight `Π a_i`, ideal `Σ Π I_i^{l_i}` over minimal tuples.
pub fn hsum(ring: &ChartRing, items: &[MarkedIdeal]) -> Result<MarkedIdeal, MarkedError> {
    if items.iter().any(|m| m.weight == 0) {
        return Err(MarkedError::ZeroWeight);
    }
    if items.len() == 1 {
        return Ok(items[0].clone());
    }
    let weights: Vec<u64> = items.iter().map(|m| m.weight).collect();
    let a: u64 = weights.iter().product();
    let (n, r) = (ring.nvars(), ring.rank());
    let max_pow = minimal_tuples(&weights, a)
        .iter()
        .flat_map(|l| l.iter().copied())
        .max()
        .unwrap_or(0);
    // reduced powers of each summand
    let mut powers: Vec<Vec<Ideal>> = Vec::new();
    for m in items {
        let mut ps = vec![Ideal::unit(n, r)];
        for _ in 0..max_pow {
            let next = ring.reduce_ideal(&ps.last().expect("nonempty").mul(&m.ideal))?;
            ps.push(next);
        }
        powers.push(ps);
    }
    let mut total = Ideal::zero();
    for l in minimal_tuples(&weights, a) {
        let mut prod = Ideal::unit(n, r);
        for (i, &li) in l.iter().enumerate() {
            prod = ring.reduce_ideal(&prod.mul(&powers[i][li as usize]))?;
        }
        total = total.add(&prod);
    }
    Ok(MarkedIdeal::new(ring.reduce_ideal(&total)?, a))
}

/// Homogenized product: `(Π I_i, Σ a_i)`.
pub fn hproduct(ring: &ChartRing, items: &[MarkedIdeal]) -> Result<MarkedIdeal, MarkedError> {
    let mut ideal = Ideal::unit(ring.nvars(), ring.rank());
    let mut w = 0;
    for m in items {
        ideal = ring.reduce_ideal(&ideal.mul(&m.ideal))?;
        w += m.weight;
    }
    Ok(MarkedIdeal::new(ideal, w))
}

/// Coefficient ideal `C_F(I, a)`: homogenized sum of `(F^{(≤i)}I, a - i)` for `0 ≤ i < a`.
pub fn coefficient_ideal(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
) -> Result<MarkedIdeal, MarkedError> {
    if m.weight == 0 {
        return Err(MarkedError::ZeroWeight);
    }
    let mut items = Vec::new();
    let mut cur = m.ideal.clone();
    for i in 0..m.weight {
        if i > 0 {
            cur = derive_once(ring, f, &cur)?;
        }
        items.push(MarkedIdeal::new(cur.clone(), m.weight - i));
    }
    hsum(ring, &items)
}

/// `(Σ_i (F^{(≤i)}I)^{W/(a-i)}, W)` with `W = lcm(1..=a)`. Every valuation takes the same
/// normalized value on this and on [`coefficient_ideal`], so the two have the same integral
/// closure after raising to a common weight; this one avoids the minimal-tuple enumeration.
pub fn diagonal_coefficient_ideal(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
) -> Result<MarkedIdeal, MarkedError> {
    if m.weight == 0 {
        return Err(MarkedError::ZeroWeight);
    }
    let w = (1..=m.weight).fold(1u64, |acc, k| acc.lcm(&k));
    let mut total = Ideal::zero();
    let mut cur = m.ideal.clone();
    for i in 0..m.weight {
        if i > 0 {
            cur = derive_once(ring, f, &cur)?;
        }
        let mut p = Ideal::unit(ring.nvars(), ring.rank());
        for _ in 0..w / (m.weight - i) {
            p = ring.reduce_ideal(&p.mul(&cur))?;
        }
        total = total.add(&p);
    }
    Ok(MarkedIdeal::new(ring.reduce_ideal(&total)?, w))
}

/// Least `a` with `F^{(≤a)}(I)` the unit ideal, or infinity with the saturated ideal.
pub fn logord(ring: &ChartRing, f: &DerivationSet, ideal: &Ideal) -> Result<LogOrder, MarkedError> {
    let mut cur = ring.reduce_ideal(ideal)?;
    for a in 0..=SATURATION_LIMIT as u64 {
        if ring.is_unit(&cur)? {
            return Ok(LogOrder::Finite(a));
        }
        let next = derive_once(ring, f, &cur)?;
        if ring.contains_ideal(&cur, &next)? {
            return Ok(LogOrder::Infinite(cur));
        }
        cur = next;
    }
    Err(DerivError::NonTermination(SATURATION_LIMIT).into())
}

/// Generic point of the origin stratum over the base: the prime generated by the t-variables and
/// the Hilbert basis monomials outside the rational span of the base.
pub fn origin_stratum(ring: &ChartRing) -> Result<Ideal, MarkedError> {
    let monoid = ring.monoid();
    let base: Vec<Vec<Rational>> = monoid.base().iter().map(|p| p.0.clone()).collect();
    let r0 = rank(&base);
    let mut gens: Vec<_> = (0..ring.nvars()).map(|i| ring.var(i)).collect();
    for h in monoid.hilbert_basis()?.iter() {
        let mut rows = base.clone();
        rows.push(h.0.clone());
        if rank(&rows) > r0 {
            gens.push(ring.monomial(h.clone()));
        }
    }
    Ok(Ideal::new(gens))
}

/// Logarithmic order at the generic point of the origin stratum: least `a` with
/// `F^{(≤a)}(I)` not contained in [`origin_stratum`].
pub fn logord_at_origin(
    ring: &ChartRing,
    f: &DerivationSet,
    ideal: &Ideal,
) -> Result<LogOrder, MarkedError> {
    let prime = origin_stratum(ring)?;
    let mut cur = ring.reduce_ideal(ideal)?;
    for a in 0..=SATURATION_LIMIT as u64 {
        if !ring.contains_ideal(&prime, &cur)? {
            return Ok(LogOrder::Finite(a));
        }
        let next = derive_once(ring, f, &cur)?;
        if ring.contains_ideal(&cur, &next)? {
            return Ok(LogOrder::Infinite(cur));
        }
        cur = next;
    }
    Err(DerivError::NonTermination(SATURATION_LIMIT).into())
}

pub fn is_max_order(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
) -> Result<bool, MarkedError> {
    Ok(ring.is_unit(&derive_ideal(ring, f, &m.ideal, m.weight as usize)?)?)
}

/// Whether the support `{logord ≥ a}` is empty.
pub fn support_empty(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
) -> Result<bool, MarkedError> {
    if m.weight == 0 {
        return Ok(ring.is_unit(&m.ideal)?);
    }
    Ok(ring.is_unit(&derive_ideal(ring, f, &m.ideal, m.weight as usize - 1)?)?)
}

/// `W(I, a) = (M(I)^sat)^{1/a}`.
pub fn weighted_saturation(
    ring: &ChartRing,
    m: &MarkedIdeal,
) -> Result<MonomialIdeal, MarkedError> {
    let mp = ring.monomial_part(&m.ideal)?;
    if mp.is_zero() {
        return Err(MarkedError::ZeroIdeal);
    }
    let sat = monomial_saturation(&mp)?;
    Ok(kummer_root(&sat, m.weight.max(1))?)
}

/// `I = u^N · I_cln` with `N` invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Balanced {
    pub monomial: LatticePoint,
    pub clean: Ideal,
    pub order: LogOrder,
}

pub fn balanced_decomposition(
    ring: &ChartRing,
    f: &DerivationSet,
    ideal: &Ideal,
) -> Result<Balanced, MarkedError> {
    let mp = ring.monomial_part(ideal)?;
    if mp.is_zero() {
        return Err(MarkedError::ZeroIdeal);
    }
    let sat = monomial_saturation(&mp)?;
    let q = is_principal_invertible(&sat).ok_or_else(|| {
        let gs: Vec<String> = sat.gens().iter().map(|g| g.to_string()).collect();
        MarkedError::NotBalanced(gs.join(" "))
    })?;
    let gens = ring.reduced_generators(ideal)?;
    let clean = Ideal::new(
        gens.iter()
            .map(|g| ring.divide_by_monomial(g, &q))
            .collect::<Result<Vec<_>, _>>()?,
    );
    let order = logord(ring, f, &clean)?;
    Ok(Balanced {
        monomial: q,
        clean,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivations::standard_derivations;
    use crate::monoid::ToricMonoid;
    use std::sync::Arc;

    fn free(r: usize, n: usize) -> ChartRing {
        ChartRing::new(Arc::new(ToricMonoid::free(r, vec![]).unwrap()), n)
    }

    fn mi(r: &ChartRing, gens: &[&str], a: u64) -> MarkedIdeal {
        MarkedIdeal::new(
            Ideal::new(gens.iter().map(|g| r.parse(g).unwrap()).collect()),
            a,
        )
    }

    #[test]
    fn hsum_examples() {
        let r = free(0, 2);
        let x = mi(&r, &["t1"], 2);
        assert_eq!(hsum(&r, std::slice::from_ref(&x)).unwrap(), x);
        let s = hsum(&r, &[x, mi(&r, &["t2"], 1)]).unwrap();
        assert_eq!(s.weight, 2);
        assert!(r
            .ideal_equal(&s.ideal, &mi(&r, &["t1", "t2^2"], 2).ideal)
            .unwrap());
        let r1 = free(0, 1);
        let s = hsum(
            &r1,
            &[
                mi(&r1, &["t1^3"], 3),
                mi(&r1, &["t1^2"], 2),
                mi(&r1, &["t1"], 1),
            ],
        )
        .unwrap();
        assert_eq!(s.weight, 6);
        assert!(r1
            .ideal_equal(&s.ideal, &mi(&r1, &["t1^6"], 6).ideal)
            .unwrap());
        assert!(hsum(&r1, &[mi(&r1, &["t1"], 0), mi(&r1, &["t1"], 1)]).is_err());
    }

    #[test]
    fn hproduct_examples() {
        let r = free(0, 2);
        let p = hproduct(&r, &[mi(&r, &["t1"], 1), mi(&r, &["t1"], 1)]).unwrap();
        assert_eq!(p.weight, 2);
        assert!(r
            .ideal_equal(&p.ideal, &mi(&r, &["t1^2"], 2).ideal)
            .unwrap());
        let p = hproduct(&r, &[mi(&r, &["t1"], 1), mi(&r, &["t2"], 2)]).unwrap();
        assert_eq!(p.weight, 3);
        assert!(r
            .ideal_equal(&p.ideal, &mi(&r, &["t1 t2"], 3).ideal)
            .unwrap());
        let p = hproduct(&r, &[mi(&r, &["t1 + t2"], 2), mi(&r, &["1"], 0)]).unwrap();
        assert_eq!(p.weight, 2);
    }

    #[test]
    fn coefficient_examples() {
        let r = free(0, 2);
        let f = standard_derivations(&r).unwrap();
        let c = coefficient_ideal(&r, &f, &mi(&r, &["t1^2 - t2^3"], 2)).unwrap();
        assert_eq!(c.weight, 2);
        assert!(r
            .ideal_equal(&c.ideal, &mi(&r, &["t1^2", "t1 t2^2", "t2^3"], 2).ideal)
            .unwrap());
        let one = mi(&r, &["t1 t2"], 1);
        assert_eq!(coefficient_ideal(&r, &f, &one).unwrap(), one);
        let m = free(1, 0);
        let fm = standard_derivations(&m).unwrap();
        let u = mi(&m, &["u(1)"], 1);
        assert_eq!(coefficient_ideal(&m, &fm, &u).unwrap(), u);
    }

    #[test]
    fn logord_examples() {
        let r = free(0, 2);
        let f = standard_derivations(&r).unwrap();
        assert_eq!(
            logord(&r, &f, &mi(&r, &["1"], 1).ideal).unwrap(),
            LogOrder::Finite(0)
        );
        assert_eq!(
            logord(&r, &f, &mi(&r, &["t1^2 - t2^3"], 1).ideal).unwrap(),
            LogOrder::Finite(2)
        );
        assert!(is_max_order(&r, &f, &mi(&r, &["t1^2 - t2^3"], 2)).unwrap());
        assert!(!is_max_order(&r, &f, &mi(&r, &["t1^2 - t2^3"], 1)).unwrap());
        assert!(support_empty(&r, &f, &mi(&r, &["1"], 1)).unwrap());
        assert!(!support_empty(&r, &f, &mi(&r, &["t1"], 1)).unwrap());
        assert!(support_empty(&r, &f, &mi(&r, &["t1"], 2)).unwrap());
    }

    #[test]
    fn weighted_saturation_examples() {
        let r = free(0, 2);
        assert!(weighted_saturation(&r, &mi(&r, &["t1^2 - t2"], 3))
            .unwrap()
            .is_unit());
        let r2 = free(2, 1);
        let w = weighted_saturation(&r2, &mi(&r2, &["u(1,0)", "u(0,1) t1"], 1)).unwrap();
        assert_eq!(
            w.gens(),
            &[
                LatticePoint::from_i64(&[0, 1]),
                LatticePoint::from_i64(&[1, 0])
            ]
        );
        let r1 = free(1, 0);
        let w = weighted_saturation(&r1, &mi(&r1, &["u(2)"], 2)).unwrap();
        assert_eq!(w.gens(), &[LatticePoint::from_i64(&[1])]);
    }

    #[test]
    fn balanced_examples() {
        let r = free(0, 2);
        let f = standard_derivations(&r).unwrap();
        let b = balanced_decomposition(&r, &f, &mi(&r, &["t1^2 - t2^3"], 1).ideal).unwrap();
        assert!(b.monomial.is_zero());
        let r1 = free(1, 1);
        let f1 = standard_derivations(&r1).unwrap();
        let b = balanced_decomposition(&r1, &f1, &mi(&r1, &["u(1) t1^2", "u(1) t1^3"], 1).ideal)
            .unwrap();
        assert_eq!(b.monomial, LatticePoint::from_i64(&[1]));
        assert!(r1
            .ideal_equal(&b.clean, &mi(&r1, &["t1^2"], 1).ideal)
            .unwrap());
        assert_eq!(b.order, LogOrder::Finite(2));
        let b = balanced_decomposition(&r1, &f1, &mi(&r1, &["u(2)"], 1).ideal).unwrap();
        assert_eq!(b.order, LogOrder::Finite(0));
    }
}
