//! Relative logarithmic derivations: standard generators, application, the filtration
//! `F^{(≤i)}`, saturation `F^∞` and contraction along a hypersurface.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::chartring::{ChartRing, Ideal, RingError, VarKind};
use crate::element::{RingElement, TermKey};
use crate::exactmath::{nullspace, Rational};
use crate::monoid::LatticePoint;

/// Hard bound on the number of saturation steps.
pub const SATURATION_LIMIT: usize = 50;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("relation {0} is not preserved by the standard derivations")]
    UnderivableRelation(String),
    #[error("derivative saturation did not stabilize after {0} steps")]
    NonTermination(usize),
    #[error("derivative of the contact element is not a nonzero constant")]
    NotUnitConstant,
}

/// A derivation given by its value on every ring variable and on every lattice axis:
/// `∂(u^q) = u^q · Σ_k q_k · log_action[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub var_action: Vec<RingElement>,
    pub log_action: Vec<RingElement>,
}

impl Derivation {
    pub fn zero(nvars: usize, rank: usize) -> Self {
        Derivation {
            var_action: vec![RingElement::zero(nvars, rank); nvars],
            log_action: vec![RingElement::zero(nvars, rank); rank],
        }
    }

    pub fn nvars(&self) -> usize {
        self.var_action.len()
    }

    pub fn rank(&self) -> usize {
        self.log_action.len()
    }

    /// `∂(u^q)/u^q`.
    pub fn log_value(&self, q: &LatticePoint) -> RingElement {
        let mut acc = RingElement::zero(self.nvars(), self.rank());
        for (qk, d) in q.0.iter().zip(&self.log_action) {
            if !qk.is_zero() {
                acc = acc.add(&d.scale(qk));
            }
        }
        acc
    }

    /// Applies the derivation, following the Leibniz rule termwise.
    pub fn apply(&self, f: &RingElement) -> RingElement {
        let n = self.nvars();
        let r = self.rank();
        let mut out = RingElement::zero(n, r);
        for (k, c) in f.terms() {
            let mono = RingElement::term(c.clone(), k.q.clone(), k.exps.clone());
            let lv = self.log_value(&k.q);
            if !lv.is_zero() {
                out = out.add(&mono.mul(&lv));
            }
            for (j, &e) in k.exps.iter().enumerate() {
                if e == 0 || self.var_action[j].is_zero() {
                    continue;
                }
                let mut ex = k.exps.clone();
                ex[j] -= 1;
                let lower = RingElement::from_terms(
                    n,
                    r,
                    [(
                        TermKey {
                            exps: ex,
                            q: k.q.clone(),
                        },
                        c * Rational::from_integer(BigInt::from(e)),
                    )],
                );
                out = out.add(&lower.mul(&self.var_action[j]));
            }
        }
        out
    }

    pub fn add(&self, o: &Derivation) -> Derivation {
        Derivation {
            var_action: self
                .var_action
                .iter()
                .zip(&o.var_action)
                .map(|(a, b)| a.add(b))
                .collect(),
            log_action: self
                .log_action
                .iter()
                .zip(&o.log_action)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Derivation) -> Derivation {
        Derivation {
            var_action: self
                .var_action
                .iter()
                .zip(&o.var_action)
                .map(|(a, b)| a.sub(b))
                .collect(),
            log_action: self
                .log_action
                .iter()
                .zip(&o.log_action)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// `g·∂`.
    pub fn times(&self, g: &RingElement) -> Derivation {
        Derivation {
            var_action: self.var_action.iter().map(|a| a.mul(g)).collect(),
            log_action: self.log_action.iter().map(|a| a.mul(g)).collect(),
        }
    }

    /// Same derivation on a ring with more variables and lattice coordinates (acting by zero there).
    pub fn extend(&self, nvars: usize, rank: usize) -> Derivation {
        let mut var_action: Vec<RingElement> = self
            .var_action
            .iter()
            .map(|a| a.extend(nvars, rank))
            .collect();
        var_action.resize(nvars, RingElement::zero(nvars, rank));
        let mut log_action: Vec<RingElement> = self
            .log_action
            .iter()
            .map(|a| a.extend(nvars, rank))
            .collect();
        log_action.resize(rank, RingElement::zero(nvars, rank));
        Derivation {
            var_action,
            log_action,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.var_action.iter().all(|a| a.is_zero()) && self.log_action.iter().all(|a| a.is_zero())
    }

    /// Rewrites every action into normal form modulo the relations of `ring`.
    pub fn normalize(&self, ring: &ChartRing) -> Result<Derivation, RingError> {
        Ok(Derivation {
            var_action: self
                .var_action
                .iter()
                .map(|a| ring.normal_form(a))
                .collect::<Result<_, _>>()?,
            log_action: self
                .log_action
                .iter()
                .map(|a| ring.normal_form(a))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Whether `∂(g) ∈ R` for every relation `g` of the ring.
    pub fn preserves_relations(&self, ring: &ChartRing) -> Result<bool, RingError> {
        for g in ring.relation_elements() {
            if !ring.normal_form(&self.apply(&g))?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, a) in self.var_action.iter().enumerate() {
            if !a.is_zero() {
                parts.push(format!("t{} -> {}", i + 1, a));
            }
        }
        for (k, a) in self.log_action.iter().enumerate() {
            if !a.is_zero() {
                parts.push(format!("log{} -> {}", k + 1, a));
            }
        }
        write!(f, "[{}]", parts.join("; "))
    }
}

/// A finite generating set of a derivation module.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivationSet {
    gens: Vec<Derivation>,
}

impl DerivationSet {
    pub fn new(gens: Vec<Derivation>) -> Self {
        DerivationSet {
            gens: gens.into_iter().filter(|d| !d.is_zero()).collect(),
        }
    }

    pub fn empty() -> Self {
        DerivationSet { gens: Vec::new() }
    }

    pub fn gens(&self) -> &[Derivation] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }
}

/// Fills in the action on auxiliary variables by `∂(w) = -w²·∂(g)` for `w·g = 1`.
pub fn extend_to_aux(ring: &ChartRing, d: &mut Derivation) {
    for (w, g) in ring.inverted() {
        let wv = ring.var(*w);
        d.var_action[*w] = wv.mul(&wv).mul(&d.apply(g)).neg();
    }
}

/// `{∂_{t_i}}` for ordinary variables together with `δ_e` for a rational basis `e` of the
/// functionals vanishing on the base.
pub fn standard_derivations(ring: &ChartRing) -> Result<DerivationSet, DerivError> {
    let n = ring.nvars();
    let r = ring.rank();
    let mut gens = Vec::new();
    for i in 0..n {
        if ring.kinds()[i] != VarKind::T {
            continue;
        }
        let mut d = Derivation::zero(n, r);
        d.var_action[i] = RingElement::one(n, r);
        extend_to_aux(ring, &mut d);
        gens.push(d);
    }
    let base: Vec<Vec<Rational>> = ring.monoid().base().iter().map(|p| p.0.clone()).collect();
    for phi in nullspace(&base, r) {
        let mut d = Derivation::zero(n, r);
        for (k, x) in phi.iter().enumerate() {
            d.log_action[k] = RingElement::constant(x.clone(), n, r);
        }
        extend_to_aux(ring, &mut d);
        gens.push(d);
    }
    for d in &gens {
        for g in ring.relation_elements() {
            if !ring.normal_form(&d.apply(&g))?.is_zero() {
                return Err(DerivError::UnderivableRelation(g.to_string()));
            }
        }
    }
    Ok(DerivationSet::new(gens))
}

/// One step of the filtration: `I + F(I)`, reduced to Gröbner generators.
pub fn derive_once(ring: &ChartRing, f: &DerivationSet, ideal: &Ideal) -> Result<Ideal, RingError> {
    let mut gens: Vec<RingElement> = ideal.gens().to_vec();
    for g in ideal.gens() {
        for d in f.gens() {
            gens.push(d.apply(g));
        }
    }
    ring.reduce_ideal(&Ideal::new(gens))
}

/// `F^{(≤i)}(I)`.
pub fn derive_ideal(
    ring: &ChartRing,
    f: &DerivationSet,
    ideal: &Ideal,
    i: usize,
) -> Result<Ideal, RingError> {
    if i == 0 {
        return Ok(ideal.clone());
    }
    let mut cur = ring.reduce_ideal(ideal)?;
    for _ in 0..i {
        if ring.is_unit(&cur)? {
            break;
        }
        cur = derive_once(ring, f, &cur)?;
    }
    Ok(cur)
}

/// `F^∞(I)`: iterate the filtration until it stabilizes.
pub fn d_saturation(
    ring: &ChartRing,
    f: &DerivationSet,
    ideal: &Ideal,
) -> Result<Ideal, DerivError> {
    let mut cur = ring.reduce_ideal(ideal)?;
    for _ in 0..SATURATION_LIMIT {
        if ring.is_unit(&cur)? {
            return Ok(cur);
        }
        let next = derive_once(ring, f, &cur)?;
        if ring.contains_ideal(&cur, &next)? {
            return Ok(cur);
        }
        cur = next;
    }
    Err(DerivError::NonTermination(SATURATION_LIMIT))
}

/// `{∂ - c⁻¹·∂(h)·∂₀ : ∂ ∈ F}`, omitting generator `skip`.
pub fn contract(
    f: &DerivationSet,
    h: &RingElement,
    d0: &Derivation,
    c: &Rational,
    skip: Option<usize>,
) -> Result<DerivationSet, DerivError> {
    if c.is_zero() {
        return Err(DerivError::NotUnitConstant);
    }
    let inv = c.recip();
    let mut out = Vec::new();
    for (i, d) in f.gens().iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let dh = d.apply(h).scale(&inv);
        out.push(d.sub(&d0.times(&dh)));
    }
    Ok(DerivationSet::new(out))
}

/// Contraction for a derivation `∂₀` in `F` with `∂₀(h)` a nonzero constant.
pub fn contract_by_index(
    f: &DerivationSet,
    h: &RingElement,
    idx: usize,
) -> Result<DerivationSet, DerivError> {
    let d0 = f.gens()[idx].clone();
    let c = d0
        .apply(h)
        .as_constant()
        .filter(|c| !c.is_zero())
        .ok_or(DerivError::NotUnitConstant)?;
    contract(f, h, &d0, &c, Some(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;
    use crate::monoid::ToricMonoid;
    use std::sync::Arc;

    fn free(r: usize, n: usize, base: Vec<LatticePoint>) -> ChartRing {
        ChartRing::new(Arc::new(ToricMonoid::free(r, base).unwrap()), n)
    }

    #[test]
    fn standard_examples() {
        let r = free(0, 1, vec![]);
        assert_eq!(standard_derivations(&r).unwrap().len(), 1);
        let r = free(2, 0, vec![]);
        let f = standard_derivations(&r).unwrap();
        assert_eq!(f.len(), 2);
        let q = LatticePoint::from_i64(&[2, 3]);
        let m = r.monomial(q.clone());
        assert_eq!(f.gens()[0].apply(&m), m.scale(&rat(2)));
        let r = free(
            2,
            1,
            vec![
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
            ],
        );
        assert_eq!(standard_derivations(&r).unwrap().len(), 1);
    }

    #[test]
    fn apply_examples() {
        let r = free(1, 2, vec![]);
        let f = standard_derivations(&r).unwrap();
        let d1 = &f.gens()[0];
        assert_eq!(
            d1.apply(&r.parse("t1^2").unwrap()),
            r.parse("2 t1").unwrap()
        );
        assert_eq!(
            d1.apply(&r.parse("u(1) t1 t2").unwrap()),
            r.parse("u(1) t2").unwrap()
        );
    }

    #[test]
    fn filtration_examples() {
        let r = free(0, 2, vec![]);
        let f = standard_derivations(&r).unwrap();
        let i = Ideal::new(vec![r.parse("t1^2 - t2^3").unwrap()]);
        assert_eq!(derive_ideal(&r, &f, &i, 0).unwrap(), i);
        let d1 = derive_ideal(&r, &f, &i, 1).unwrap();
        let expect = Ideal::new(vec![r.parse("t1").unwrap(), r.parse("t2^2").unwrap()]);
        assert!(r.ideal_equal(&d1, &expect).unwrap());
        let sat = d_saturation(&r, &f, &i).unwrap();
        assert!(r.is_unit(&sat).unwrap());
        let m = free(1, 0, vec![]);
        let fm = standard_derivations(&m).unwrap();
        let mi = Ideal::new(vec![m.parse("u(3)").unwrap()]);
        assert!(m
            .ideal_equal(&derive_ideal(&m, &fm, &mi, 1).unwrap(), &mi)
            .unwrap());
        assert!(m
            .ideal_equal(&d_saturation(&m, &fm, &mi).unwrap(), &mi)
            .unwrap());
    }

    #[test]
    fn saturation_without_derivations() {
        // X = B = A^1: the coordinate is a non-logarithmic base axis
        let mon = ToricMonoid::new(
            1,
            BigInt::from(1),
            vec![vec![BigInt::from(1)]],
            vec![LatticePoint::from_i64(&[1])],
            vec![LatticePoint::from_i64(&[1])],
            vec![0],
        )
        .unwrap();
        let r = ChartRing::new(Arc::new(mon), 0);
        let f = standard_derivations(&r).unwrap();
        assert!(f.is_empty());
        let i = Ideal::new(vec![r.parse("u(1)").unwrap()]);
        assert!(r
            .ideal_equal(&d_saturation(&r, &f, &i).unwrap(), &i)
            .unwrap());
    }

    #[test]
    fn contraction_examples() {
        let r = free(0, 2, vec![]);
        let f = standard_derivations(&r).unwrap();
        let t1 = r.parse("t1").unwrap();
        let c = contract_by_index(&f, &t1, 0).unwrap();
        assert_eq!(c.gens(), &[f.gens()[1].clone()]);
        let h = r.parse("t1 + t2^2").unwrap();
        let c = contract_by_index(&f, &h, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.gens()[0].var_action[0], r.parse("-2 t2").unwrap());
        assert_eq!(c.gens()[0].var_action[1], r.one());
        assert!(c.gens()[0].apply(&h).is_zero());
        let m = free(1, 1, vec![]);
        let fm = standard_derivations(&m).unwrap();
        let c = contract_by_index(&fm, &m.parse("t1").unwrap(), 0).unwrap();
        assert_eq!(c.gens(), &[fm.gens()[1].clone()]);
    }

    #[test]
    fn localization_preserved() {
        let r = free(0, 2, vec![]);
        let (l, _) = r.localize(&r.parse("1 + t2").unwrap()).unwrap();
        let f = standard_derivations(&l).unwrap();
        assert_eq!(f.len(), 2);
        for d in f.gens() {
            assert!(d.preserves_relations(&l).unwrap());
        }
    }
}
