//! Presented chart rings `Q[M][t_1..t_n]/R`, their polynomial presentation over the
//! Hilbert basis of `M`, Gröbner-based ideal operations and the monomial part `M(I)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::element::{ElementParseError, RingElement, TermKey};
use crate::exactmath::{integer_left_kernel, IntMatrix, Rational};
use crate::monoid::{LatticePoint, MonoidError, MonomialIdeal, ToricMonoid};
use crate::poly::{MonomialOrder, Poly, PolyRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Parse(#[from] ElementParseError),
    #[error("element does not belong to the ring: {0}")]
    Foreign(String),
    #[error("exponent {0} is not in the monoid")]
    NotInMonoid(String),
    #[error("{element} is not divisible by u{divisor}")]
    NotDivisible { element: String, divisor: String },
}

/// Kind of a ring variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// An ordinary coordinate.
    T,
    /// An inverse adjoined by localization.
    Aux,
}

/// Origin of a relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationTag {
    /// Supplied with the problem.
    User,
    /// Introduced by a blow-up for a fresh variable.
    Fresh,
    /// `h - u^{e_coord}` tying a center element to the exceptional coordinate `coord`.
    Tied { coord: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub element: RingElement,
    pub tag: RelationTag,
}

/// An ideal given by generators; zero generators are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    gens: Vec<RingElement>,
}

impl Ideal {
    pub fn new(gens: Vec<RingElement>) -> Self {
        let mut out: Vec<RingElement> = Vec::with_capacity(gens.len());
        for g in gens {
            if !g.is_zero() && !out.contains(&g) {
                out.push(g);
            }
        }
        Ideal { gens: out }
    }

    pub fn zero() -> Self {
        Ideal { gens: Vec::new() }
    }

    pub fn unit(nvars: usize, rank: usize) -> Self {
        Ideal::new(vec![RingElement::one(nvars, rank)])
    }

    pub fn gens(&self) -> &[RingElement] {
        &self.gens
    }

    pub fn into_gens(self) -> Vec<RingElement> {
        self.gens
    }

    /// Whether the generator list is empty (the ideal may still be zero modulo relations otherwise).
    pub fn has_no_gens(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn add(&self, o: &Ideal) -> Ideal {
        let mut g = self.gens.clone();
        g.extend(o.gens.iter().cloned());
        Ideal::new(g)
    }

    pub fn mul(&self, o: &Ideal) -> Ideal {
        let mut g = Vec::new();
        for a in &self.gens {
            for b in &o.gens {
                g.push(a.mul(b));
            }
        }
        Ideal::new(g)
    }

    /// `self^k`; the zeroth power is the unit ideal of the given shape.
    pub fn pow(&self, k: u32, nvars: usize, rank: usize) -> Ideal {
        let mut acc = Ideal::unit(nvars, rank);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn map(&self, f: impl Fn(&RingElement) -> RingElement) -> Ideal {
        Ideal::new(self.gens.iter().map(f).collect())
    }
}

impl std::fmt::Display for Ideal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Polynomial presentation: one variable per Hilbert basis element of `M`, the ring
/// variables, and a spare top variable used for elimination.
#[derive(Debug)]
pub struct Presentation {
    hb: Arc<Vec<LatticePoint>>,
    ring: PolyRing,
    var_pos: Vec<usize>,
    z_pos: Vec<usize>,
    base_gb: Vec<Poly>,
    toric_gb: Vec<Poly>,
    words: Mutex<HashMap<LatticePoint, Vec<u32>>>,
    division: Mutex<HashMap<LatticePoint, Arc<Vec<Poly>>>>,
}

impl Presentation {
    pub const SPARE: usize = 0;

    pub fn poly_ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn hilbert_basis(&self) -> &[LatticePoint] {
        &self.hb
    }

    pub fn base_gb(&self) -> &[Poly] {
        &self.base_gb
    }

    pub fn toric_gb(&self) -> &[Poly] {
        &self.toric_gb
    }

    /// Poly index of ring variable `v`.
    pub fn var_index(&self, v: usize) -> usize {
        self.var_pos[v]
    }

    pub fn z_index(&self, i: usize) -> usize {
        self.z_pos[i]
    }
}

/// `Q[M][t_1..t_n]/R` with localizations recorded as auxiliary variables.
#[derive(Debug)]
pub struct ChartRing {
    monoid: Arc<ToricMonoid>,
    kinds: Vec<VarKind>,
    relations: Vec<Relation>,
    inverted: Vec<(usize, RingElement)>,
    cache: OnceLock<Result<Arc<Presentation>, RingError>>,
}

impl Clone for ChartRing {
    fn clone(&self) -> Self {
        ChartRing {
            monoid: self.monoid.clone(),
            kinds: self.kinds.clone(),
            relations: self.relations.clone(),
            inverted: self.inverted.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl PartialEq for ChartRing {
    fn eq(&self, o: &Self) -> bool {
        self.monoid == o.monoid
            && self.kinds == o.kinds
            && self.relations == o.relations
            && self.inverted == o.inverted
    }
}

impl ChartRing {
    pub fn new(monoid: Arc<ToricMonoid>, ntvars: usize) -> Self {
        ChartRing {
            monoid,
            kinds: vec![VarKind::T; ntvars],
            relations: Vec::new(),
            inverted: Vec::new(),
            cache: OnceLock::new(),
        }
    }

    /// A ring with explicit variable kinds, relations and inverted elements.
    pub fn from_parts(
        monoid: Arc<ToricMonoid>,
        kinds: Vec<VarKind>,
        relations: Vec<Relation>,
        inverted: Vec<(usize, RingElement)>,
    ) -> Result<Self, RingError> {
        let ring = ChartRing {
            monoid,
            kinds,
            relations,
            inverted,
            cache: OnceLock::new(),
        };
        for r in &ring.relations {
            ring.check(&r.element)?;
        }
        for (w, g) in &ring.inverted {
            ring.check(g)?;
            if ring.kinds.get(*w) != Some(&VarKind::Aux) {
                return Err(RingError::Foreign(format!(
                    "t{} is not an auxiliary variable",
                    w + 1
                )));
            }
        }
        Ok(ring)
    }

    pub fn monoid(&self) -> &Arc<ToricMonoid> {
        &self.monoid
    }

    pub fn nvars(&self) -> usize {
        self.kinds.len()
    }

    pub fn rank(&self) -> usize {
        self.monoid.rank()
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn inverted(&self) -> &[(usize, RingElement)] {
        &self.inverted
    }

    /// Relations together with the localization relations `w·g - 1`.
    pub fn relation_elements(&self) -> Vec<RingElement> {
        let mut out: Vec<RingElement> = self.relations.iter().map(|r| r.element.clone()).collect();
        for (w, g) in &self.inverted {
            out.push(self.var(*w).mul(g).sub(&self.one()));
        }
        out
    }

    pub fn has_relations(&self) -> bool {
        !self.relations.is_empty() || !self.inverted.is_empty()
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.nvars(), self.rank())
    }

    pub fn one(&self) -> RingElement {
        RingElement::one(self.nvars(), self.rank())
    }

    pub fn constant(&self, c: Rational) -> RingElement {
        RingElement::constant(c, self.nvars(), self.rank())
    }

    pub fn var(&self, i: usize) -> RingElement {
        RingElement::var(i, self.nvars(), self.rank())
    }

    pub fn monomial(&self, q: LatticePoint) -> RingElement {
        RingElement::monomial(q, self.nvars())
    }

    pub fn parse(&self, s: &str) -> Result<RingElement, RingError> {
        let f = RingElement::parse(s, self.nvars(), self.rank())?;
        self.check(&f)?;
        Ok(f)
    }

    /// Verifies shape and that every exponent lies in the monoid.
    pub fn check(&self, f: &RingElement) -> Result<(), RingError> {
        if f.nvars() != self.nvars() || f.rank() != self.rank() {
            return Err(RingError::Foreign(f.to_string()));
        }
        for (k, _) in f.terms() {
            if !self.monoid.contains(&k.q)? {
                return Err(RingError::NotInMonoid(k.q.to_string()));
            }
        }
        Ok(())
    }

    /// Same ring with one more variable of the given kind (appended last).
    pub fn with_var(&self, kind: VarKind) -> ChartRing {
        let n = self.nvars() + 1;
        let r = self.rank();
        ChartRing {
            monoid: self.monoid.clone(),
            kinds: self
                .kinds
                .iter()
                .copied()
                .chain(std::iter::once(kind))
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|x| Relation {
                    element: x.element.extend(n, r),
                    tag: x.tag,
                })
                .collect(),
            inverted: self
                .inverted
                .iter()
                .map(|(w, g)| (*w, g.extend(n, r)))
                .collect(),
            cache: OnceLock::new(),
        }
    }

    /// Same ring with an extra relation.
    pub fn with_relation(
        &self,
        element: RingElement,
        tag: RelationTag,
    ) -> Result<ChartRing, RingError> {
        self.check(&element)?;
        let mut rels = self.relations.clone();
        rels.push(Relation { element, tag });
        Ok(ChartRing {
            monoid: self.monoid.clone(),
            kinds: self.kinds.clone(),
            relations: rels,
            inverted: self.inverted.clone(),
            cache: OnceLock::new(),
        })
    }

    /// Localization at `g`: a new auxiliary variable `w` with `w·g = 1`. Returns the ring and `w`.
    pub fn localize(&self, g: &RingElement) -> Result<(ChartRing, usize), RingError> {
        self.check(g)?;
        let mut ring = self.with_var(VarKind::Aux);
        let w = ring.nvars() - 1;
        ring.inverted.push((w, g.extend(ring.nvars(), ring.rank())));
        Ok((ring, w))
    }

    /// Same ring with a different base for the monoid (same lattice and cone).
    pub fn with_monoid(&self, monoid: Arc<ToricMonoid>) -> ChartRing {
        ChartRing {
            monoid,
            kinds: self.kinds.clone(),
            relations: self.relations.clone(),
            inverted: self.inverted.clone(),
            cache: OnceLock::new(),
        }
    }

    pub fn presentation(&self) -> Result<Arc<Presentation>, RingError> {
        self.cache
            .get_or_init(|| self.build_presentation().map(Arc::new))
            .clone()
    }

    fn build_presentation(&self) -> Result<Presentation, RingError> {
        let hb = self.monoid.hilbert_basis()?;
        let tied: Vec<usize> = self
            .relations
            .iter()
            .filter_map(|r| match r.tag {
                RelationTag::Tied { coord } => Some(coord),
                _ => None,
            })
            .collect();
        let is_tied = |h: &LatticePoint| tied.iter().any(|&c| !h.0[c].is_zero());
        let aux: Vec<usize> = (0..self.nvars())
            .filter(|&v| self.kinds[v] == VarKind::Aux)
            .collect();
        // a user relation `c t_v + (terms free of t_v)` solves for t_v; such variables get a
        // block of their own so that normal forms eliminate them
        let mut solved: Vec<usize> = Vec::new();
        for r in self.relations.iter().filter(|r| r.tag == RelationTag::User) {
            let pick = (0..self.nvars()).find(|&v| {
                self.kinds[v] == VarKind::T && !solved.contains(&v) && {
                    let mut hits = r.element.terms().filter(|(k, _)| k.exps[v] > 0);
                    matches!((hits.next(), hits.next()), (Some((k, _)), None)
                        if k.q.is_zero() && k.exps.iter().enumerate().all(|(w, &e)| e == u32::from(w == v)))
                }
            });
            solved.extend(pick);
        }
        let ts: Vec<usize> = (0..self.nvars())
            .filter(|&v| self.kinds[v] == VarKind::T && !solved.contains(&v))
            .collect();
        let tz: Vec<usize> = (0..hb.len()).filter(|&i| is_tied(&hb[i])).collect();
        let oz: Vec<usize> = (0..hb.len()).filter(|&i| !is_tied(&hb[i])).collect();
        let mut var_pos = vec![0; self.nvars()];
        let mut z_pos = vec![0; hb.len()];
        let mut next = 1;
        for &v in aux.iter().chain(&solved).chain(&ts) {
            var_pos[v] = next;
            next += 1;
        }
        for &i in tz.iter().chain(&oz) {
            z_pos[i] = next;
            next += 1;
        }
        let order = MonomialOrder::new(&[1, aux.len(), solved.len(), ts.len(), tz.len(), oz.len()]);
        let ring = PolyRing::new(order);
        let mut pres = Presentation {
            hb: hb.clone(),
            ring,
            var_pos,
            z_pos,
            base_gb: Vec::new(),
            toric_gb: Vec::new(),
            words: Mutex::new(HashMap::new()),
            division: Mutex::new(HashMap::new()),
        };
        pres.toric_gb = self.toric_ideal(&pres)?;
        let rels: Vec<Poly> = self
            .relation_elements()
            .iter()
            .map(|f| self.to_poly_with(&pres, f))
            .collect::<Result<_, _>>()?;
        pres.base_gb = pres.ring.buchberger_extend(&pres.toric_gb, &rels);
        Ok(pres)
    }

    fn toric_ideal(&self, pres: &Presentation) -> Result<Vec<Poly>, RingError> {
        let hb = &pres.hb;
        if hb.len() <= self.rank() {
            // linearly independent Hilbert basis: free monoid
            return Ok(Vec::new());
        }
        let d = Rational::from_integer(self.monoid.denom().clone());
        let rows: Vec<Vec<BigInt>> = hb
            .iter()
            .map(|h| h.0.iter().map(|x| (x * &d).to_integer()).collect())
            .collect();
        let m = IntMatrix::new(rows, self.rank()).map_err(MonoidError::from)?;
        let kernel = integer_left_kernel(&m).map_err(MonoidError::from)?;
        let n = pres.ring.nvars();
        let mut gens = Vec::new();
        for v in kernel {
            let mut plus = vec![0u32; n];
            let mut minus = vec![0u32; n];
            for (i, x) in v.iter().enumerate() {
                let mag: u32 = num_traits::ToPrimitive::to_u32(&num_traits::Signed::abs(x))
                    .expect("small kernel entry");
                if x > &BigInt::zero() {
                    plus[pres.z_pos[i]] = mag;
                } else if x < &BigInt::zero() {
                    minus[pres.z_pos[i]] = mag;
                }
            }
            gens.push(
                pres.ring
                    .from_terms(vec![(plus, Rational::one()), (minus, -Rational::one())]),
            );
        }
        // saturate at the product of all z variables
        let mut sat = vec![0u32; n];
        sat[Presentation::SPARE] = 1;
        for &p in &pres.z_pos {
            sat[p] = 1;
        }
        gens.push(
            pres.ring
                .from_terms(vec![(sat, Rational::one()), (vec![0; n], -Rational::one())]),
        );
        let gb = pres.ring.groebner(&gens);
        Ok(gb
            .into_iter()
            .filter(|g| !g.involves(Presentation::SPARE))
            .collect())
    }

    fn word(&self, pres: &Presentation, q: &LatticePoint) -> Result<Vec<u32>, RingError> {
        if let Some(w) = pres.words.lock().expect("word cache").get(q) {
            return Ok(w.clone());
        }
        let w = self.monoid.decompose(q)?;
        pres.words
            .lock()
            .expect("word cache")
            .insert(q.clone(), w.clone());
        Ok(w)
    }

    fn to_poly_with(&self, pres: &Presentation, f: &RingElement) -> Result<Poly, RingError> {
        if f.nvars() != self.nvars() || f.rank() != self.rank() {
            return Err(RingError::Foreign(f.to_string()));
        }
        let n = pres.ring.nvars();
        let mut terms = Vec::with_capacity(f.len());
        for (k, c) in f.terms() {
            let mut e = vec![0u32; n];
            for (v, &x) in k.exps.iter().enumerate() {
                e[pres.var_pos[v]] = x;
            }
            for (i, x) in self.word(pres, &k.q)?.into_iter().enumerate() {
                e[pres.z_pos[i]] += x;
            }
            terms.push((e, c.clone()));
        }
        Ok(pres.ring.from_terms(terms))
    }

    pub fn to_poly(&self, f: &RingElement) -> Result<Poly, RingError> {
        let pres = self.presentation()?;
        self.to_poly_with(&pres, f)
    }

    /// Converts back from the presentation; the spare variable must not occur.
    pub fn from_poly(&self, p: &Poly) -> Result<RingElement, RingError> {
        let pres = self.presentation()?;
        Ok(self.element_from_poly(&pres, p))
    }

    fn element_from_poly(&self, pres: &Presentation, p: &Poly) -> RingElement {
        let mut terms = Vec::with_capacity(p.terms().len());
        for (e, c) in p.terms() {
            debug_assert_eq!(e[Presentation::SPARE], 0);
            let exps: Vec<u32> = pres.var_pos.iter().map(|&i| e[i]).collect();
            let mut q = LatticePoint::zero(self.rank());
            for (i, &pos) in pres.z_pos.iter().enumerate() {
                if e[pos] > 0 {
                    q = q.add(&pres.hb[i].scale(&Rational::from_integer(BigInt::from(e[pos]))));
                }
            }
            terms.push((TermKey { exps, q }, c.clone()));
        }
        RingElement::from_terms(self.nvars(), self.rank(), terms)
    }

    /// Reduced Gröbner basis of `I + R` in the presentation.
    pub fn groebner(&self, ideal: &Ideal) -> Result<Vec<Poly>, RingError> {
        let pres = self.presentation()?;
        let gens: Vec<Poly> = ideal
            .gens()
            .iter()
            .map(|g| self.to_poly_with(&pres, g))
            .collect::<Result<_, _>>()?;
        Ok(pres.ring.buchberger_extend(&pres.base_gb, &gens))
    }

    /// Elements of the reduced Gröbner basis of `I + R` that do not lie in `R`.
    pub fn reduced_generators(&self, ideal: &Ideal) -> Result<Vec<RingElement>, RingError> {
        let pres = self.presentation()?;
        let gb = self.groebner(ideal)?;
        let base: Vec<&Poly> = pres.base_gb.iter().collect();
        Ok(gb
            .iter()
            .filter(|g| !pres.ring.normal_form(g, &base).is_zero())
            .map(|g| self.element_from_poly(&pres, g))
            .collect())
    }

    /// Reduced generators sorted by their terms, largest first.
    pub fn canonical_generators(&self, ideal: &Ideal) -> Result<Vec<RingElement>, RingError> {
        let mut gens = self.reduced_generators(ideal)?;
        gens.sort_by(|a, b| {
            b.terms()
                .rev()
                .map(|t| t.0)
                .cmp(a.terms().rev().map(|t| t.0))
        });
        Ok(gens)
    }

    /// Replaces a generating set by the reduced Gröbner generators outside `R`.
    pub fn reduce_ideal(&self, ideal: &Ideal) -> Result<Ideal, RingError> {
        Ok(Ideal::new(self.reduced_generators(ideal)?))
    }

    pub fn is_unit(&self, ideal: &Ideal) -> Result<bool, RingError> {
        let gb = self.groebner(ideal)?;
        Ok(gb.len() == 1 && gb[0].is_constant())
    }

    /// Whether `I ⊆ R`, i.e. the ideal is zero in the ring.
    pub fn is_zero_ideal(&self, ideal: &Ideal) -> Result<bool, RingError> {
        for g in ideal.gens() {
            if !self.normal_form(g)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn member(&self, f: &RingElement, ideal: &Ideal) -> Result<bool, RingError> {
        let pres = self.presentation()?;
        let gb = self.groebner(ideal)?;
        let p = self.to_poly_with(&pres, f)?;
        Ok(pres.ring.member(&p, &gb))
    }

    /// `b ⊆ a` modulo `R`.
    pub fn contains_ideal(&self, a: &Ideal, b: &Ideal) -> Result<bool, RingError> {
        let pres = self.presentation()?;
        let gb = self.groebner(a)?;
        for f in b.gens() {
            let p = self.to_poly_with(&pres, f)?;
            if !pres.ring.member(&p, &gb) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn ideal_equal(&self, a: &Ideal, b: &Ideal) -> Result<bool, RingError> {
        Ok(self.contains_ideal(a, b)? && self.contains_ideal(b, a)?)
    }

    /// Canonical representative of `f` modulo `R`.
    pub fn normal_form(&self, f: &RingElement) -> Result<RingElement, RingError> {
        let pres = self.presentation()?;
        let p = self.to_poly_with(&pres, f)?;
        let base: Vec<&Poly> = pres.base_gb.iter().collect();
        Ok(self.element_from_poly(&pres, &pres.ring.normal_form(&p, &base)))
    }

    /// Canonical representative of `f` modulo `I + R`.
    pub fn normal_form_mod(
        &self,
        f: &RingElement,
        ideal: &Ideal,
    ) -> Result<RingElement, RingError> {
        let pres = self.presentation()?;
        let p = self.to_poly_with(&pres, f)?;
        let gb = self.groebner(ideal)?;
        let refs: Vec<&Poly> = gb.iter().collect();
        Ok(self.element_from_poly(&pres, &pres.ring.normal_form(&p, &refs)))
    }

    /// An inverse of `g` modulo `R + extra`, if `g` is a unit there and `R + extra` is proper.
    pub fn inverse_mod(
        &self,
        g: &RingElement,
        extra: &Ideal,
    ) -> Result<Option<RingElement>, RingError> {
        if let Some(c) = g.as_constant() {
            return Ok((!c.is_zero()).then(|| self.constant(c.recip())));
        }
        // g a constant multiple of an inverted element
        for (v, _) in &self.inverted {
            let z = self.var(*v);
            if let Some(c) = self.normal_form_mod(&g.mul(&z), extra)?.as_constant() {
                if !c.is_zero() {
                    return Ok(Some(z.scale(&c.recip())));
                }
            }
        }
        let pres = self.presentation()?;
        let ring = &pres.ring;
        let n = ring.nvars();
        let mut gens: Vec<Poly> = extra
            .gens()
            .iter()
            .map(|f| self.to_poly_with(&pres, f))
            .collect::<Result<_, _>>()?;
        let s = ring.var(Presentation::SPARE);
        let gp = self.to_poly_with(&pres, g)?;
        gens.push(ring.sub(&ring.mul(&s, &gp), &ring.constant(Rational::one())));
        let gb = ring.buchberger_extend(&pres.base_gb, &gens);
        if gb.len() == 1 && gb[0].is_constant() {
            return Ok(None);
        }
        let mut s_exp = vec![0u32; n];
        s_exp[Presentation::SPARE] = 1;
        for p in &gb {
            if *p.lead_exp() == s_exp {
                let rest = ring.sub(&ring.var(Presentation::SPARE), p);
                if rest.involves(Presentation::SPARE) {
                    continue;
                }
                return Ok(Some(self.element_from_poly(&pres, &rest)));
            }
        }
        Ok(None)
    }

    /// `(I + R) : (u^q)^∞` as reduced generators (relations omitted).
    pub fn saturate_at_monomial(
        &self,
        ideal: &Ideal,
        q: &LatticePoint,
    ) -> Result<Ideal, RingError> {
        let pres = self.presentation()?;
        let ring = &pres.ring;
        let y = self.to_poly_with(&pres, &self.monomial(q.clone()))?;
        let mut gens: Vec<Poly> = ideal
            .gens()
            .iter()
            .map(|f| self.to_poly_with(&pres, f))
            .collect::<Result<_, _>>()?;
        gens.push(ring.sub(
            &ring.mul(&ring.var(Presentation::SPARE), &y),
            &ring.constant(Rational::one()),
        ));
        let gb = ring.buchberger_extend(&pres.base_gb, &gens);
        let base: Vec<&Poly> = pres.base_gb.iter().collect();
        let kept: Vec<RingElement> = gb
            .iter()
            .filter(|p| !p.involves(Presentation::SPARE) && !ring.normal_form(p, &base).is_zero())
            .map(|p| self.element_from_poly(&pres, p))
            .collect();
        self.reduce_ideal(&Ideal::new(kept))
    }

    /// Quotient `f / u^q`; exact division in the ring, failing with `NotDivisible`.
    pub fn divide_by_monomial(
        &self,
        f: &RingElement,
        q: &LatticePoint,
    ) -> Result<RingElement, RingError> {
        if q.is_zero() {
            return Ok(f.clone());
        }
        let not_div = || RingError::NotDivisible {
            element: f.to_string(),
            divisor: q.to_string(),
        };
        if !self.monoid.contains(q)? {
            return Err(not_div());
        }
        let termwise = f.terms().all(|(k, _)| self.monoid.divides(q, &k.q));
        if termwise {
            let neg = q.scale(&-Rational::one());
            return Ok(f.shift(&neg));
        }
        if !self.has_relations() {
            return Err(not_div());
        }
        let pres = self.presentation()?;
        let gb = self.division_gb(&pres, q)?;
        let ring = &pres.ring;
        let p = self.to_poly_with(&pres, f)?;
        let ps = ring.mul(&p, &ring.var(Presentation::SPARE));
        let refs: Vec<&Poly> = gb.iter().collect();
        let nf = ring.normal_form(&ps, &refs);
        if nf.involves(Presentation::SPARE) {
            return Err(not_div());
        }
        Ok(self.element_from_poly(&pres, &nf))
    }

    fn division_gb(
        &self,
        pres: &Presentation,
        q: &LatticePoint,
    ) -> Result<Arc<Vec<Poly>>, RingError> {
        if let Some(g) = pres.division.lock().expect("division cache").get(q) {
            return Ok(g.clone());
        }
        let ring = &pres.ring;
        let y = self.to_poly_with(pres, &self.monomial(q.clone()))?;
        let rel = ring.sub(
            &ring.mul(&ring.var(Presentation::SPARE), &y),
            &ring.constant(Rational::one()),
        );
        let gb = Arc::new(ring.buchberger_extend(&pres.base_gb, &[rel]));
        pres.division
            .lock()
            .expect("division cache")
            .insert(q.clone(), gb.clone());
        Ok(gb)
    }

    /// Largest `k` with `u^{k·q}` dividing `f` in the ring (bounded by `limit`), and the quotient.
    pub fn max_monomial_power(
        &self,
        f: &RingElement,
        q: &LatticePoint,
        limit: u32,
    ) -> Result<(u32, RingElement), RingError> {
        let mut k = 0;
        let mut cur = f.clone();
        while k < limit && !cur.is_zero() {
            match self.divide_by_monomial(&cur, q) {
                Ok(next) => {
                    cur = next;
                    k += 1;
                }
                Err(RingError::NotDivisible { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        Ok((k, cur))
    }

    /// The monomial part `M(I)`: the monomial ideal generated by the lattice exponents of the
    /// reduced Gröbner generators of `I + R` (log parts only). Zero ideals give the empty marker.
    pub fn monomial_part(&self, ideal: &Ideal) -> Result<MonomialIdeal, RingError> {
        let gens = self.reduced_generators(ideal)?;
        let from_gb = MonomialIdeal::new(self.monoid.clone(), self.monomial_content(gens)?)?;
        if !self.has_relations() || from_gb.is_zero() {
            return Ok(from_gb);
        }
        // with relations the content depends on representatives: also try the given generators
        let nf: Vec<RingElement> = ideal
            .gens()
            .iter()
            .map(|g| self.normal_form(g))
            .collect::<Result<_, _>>()?;
        let from_nf = MonomialIdeal::new(self.monoid.clone(), self.monomial_content(nf)?)?;
        if from_nf.gens().iter().all(|q| from_gb.contains(q)) {
            Ok(from_nf)
        } else {
            Ok(from_gb)
        }
    }

    /// Exponents of the terms of the given elements (log parts), after pulling out powers of
    /// tied coordinates.
    fn monomial_content(&self, gens: Vec<RingElement>) -> Result<Vec<LatticePoint>, RingError> {
        let tied: Vec<usize> = self
            .relations
            .iter()
            .filter_map(|r| match r.tag {
                RelationTag::Tied { coord } => Some(coord),
                _ => None,
            })
            .collect();
        let mut exps: Vec<LatticePoint> = Vec::new();
        for g in gens {
            let mut shift = LatticePoint::zero(self.rank());
            let mut cur = g;
            for &c in &tied {
                let axis = LatticePoint::axis(self.rank(), c);
                if !self.monoid.contains(&axis)? {
                    continue;
                }
                let limit = cur
                    .terms()
                    .map(|(k, _)| k.exps.iter().sum::<u32>())
                    .max()
                    .unwrap_or(0)
                    + 8;
                let (k, quot) = self.max_monomial_power(&cur, &axis, limit)?;
                if k > 0 {
                    shift = shift.add(&axis.scale(&Rational::from_integer(BigInt::from(k))));
                    cur = self.normal_form(&quot)?;
                }
            }
            for (k, _) in cur.terms() {
                exps.push(self.monoid.log_part(&k.q.add(&shift)));
            }
        }
        Ok(exps)
    }

    /// The ideal of `A` generated by the monomials of a monomial ideal.
    pub fn monomial_ideal(&self, n: &MonomialIdeal) -> Ideal {
        Ideal::new(n.gens().iter().map(|q| self.monomial(q.clone())).collect())
    }

    pub fn describe(&self) -> String {
        let rels: Vec<String> = self
            .relation_elements()
            .iter()
            .map(|r| r.to_string())
            .collect();
        format!(
            "{} vars, monoid {}, relations [{}]",
            self.nvars(),
            self.monoid.describe(),
            rels.join("; ")
        )
    }
}
