//! Sparse multivariate polynomials over the rationals with block-degrevlex orders
//! and a Buchberger kernel with Gebauer–Möller pair pruning.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::exactmath::Rational;

/// An exponent vector.
pub type Exponent = Vec<u32>;

/// Product of contiguous variable blocks, each ordered by degrevlex; earlier blocks dominate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    blocks: Vec<(usize, usize)>,
    nvars: usize,
}

impl MonomialOrder {
    /// Builds an order from block sizes, listed from highest priority to lowest.
    pub fn new(block_sizes: &[usize]) -> Self {
        let mut blocks = Vec::new();
        let mut start = 0;
        for &s in block_sizes {
            if s > 0 {
                blocks.push((start, start + s));
            }
            start += s;
        }
        MonomialOrder {
            blocks,
            nvars: start,
        }
    }

    pub fn degrevlex(n: usize) -> Self {
        Self::new(&[n])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        for &(s, e) in &self.blocks {
            let da: u64 = a[s..e].iter().map(|&x| x as u64).sum();
            let db: u64 = b[s..e].iter().map(|&x| x as u64).sum();
            match da.cmp(&db) {
                Ordering::Equal => {}
                o => return o,
            }
            for i in (s..e).rev() {
                if a[i] != b[i] {
                    return b[i].cmp(&a[i]);
                }
            }
        }
        Ordering::Equal
    }
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn lcm(a: &[u32], b: &[u32]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn sub_exp(a: &[u32], b: &[u32]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_exp(a: &[u32], b: &[u32]) -> Exponent {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// A polynomial whose terms are sorted strictly descending in some fixed order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: Vec<(Exponent, Rational)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(Exponent, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> Option<&(Exponent, Rational)> {
        self.terms.first()
    }

    pub fn lead_exp(&self) -> &Exponent {
        &self.terms[0].0
    }

    /// Whether the polynomial is a nonzero constant.
    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0)
    }

    /// Whether variable `v` occurs in some term.
    pub fn involves(&self, v: usize) -> bool {
        self.terms.iter().any(|(e, _)| e[v] > 0)
    }
}

/// Arithmetic context: number of variables and the monomial order.
#[derive(Clone, Debug)]
pub struct PolyRing {
    order: MonomialOrder,
}

impl PolyRing {
    pub fn new(order: MonomialOrder) -> Self {
        PolyRing { order }
    }

    pub fn nvars(&self) -> usize {
        self.order.nvars()
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// Builds a polynomial from arbitrary terms, combining duplicates.
    pub fn from_terms(&self, mut terms: Vec<(Exponent, Rational)>) -> Poly {
        terms.sort_by(|a, b| self.order.cmp(&b.0, &a.0));
        let mut out: Vec<(Exponent, Rational)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == e {
                    last.1 += c;
                    continue;
                }
            }
            out.push((e, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Poly { terms: out }
    }

    pub fn constant(&self, c: Rational) -> Poly {
        self.from_terms(vec![(vec![0; self.nvars()], c)])
    }

    pub fn var(&self, i: usize) -> Poly {
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        Poly {
            terms: vec![(e, Rational::one())],
        }
    }

    pub fn monomial(&self, e: Exponent, c: Rational) -> Poly {
        self.from_terms(vec![(e, c)])
    }

    /// `a + k * m * b` where `m` is a monomial.
    fn add_scaled(&self, a: &Poly, k: &Rational, m: &[u32], b: &Poly) -> Poly {
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let mut i = 0;
        let mut bt = b
            .terms
            .iter()
            .map(|(e, c)| (add_exp(e, m), c * k))
            .peekable();
        while i < a.terms.len() || bt.peek().is_some() {
            match (a.terms.get(i), bt.peek()) {
                (Some(x), Some(y)) => match self.order.cmp(&x.0, &y.0) {
                    Ordering::Greater => {
                        out.push(x.clone());
                        i += 1;
                    }
                    Ordering::Less => {
                        out.push(bt.next().expect("peeked"));
                    }
                    Ordering::Equal => {
                        let y = bt.next().expect("peeked");
                        let c = &x.1 + y.1;
                        if !c.is_zero() {
                            out.push((y.0, c));
                        }
                        i += 1;
                    }
                },
                (Some(x), None) => {
                    out.push(x.clone());
                    i += 1;
                }
                (None, Some(_)) => out.push(bt.next().expect("peeked")),
                (None, None) => break,
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        self.add_scaled(a, &Rational::one(), &vec![0; self.nvars()], b)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.add_scaled(a, &-Rational::one(), &vec![0; self.nvars()], b)
    }

    pub fn scale(&self, a: &Poly, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: a.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in &a.terms {
            acc = self.add_scaled(&acc, c, e, b);
        }
        acc
    }

    pub fn pow(&self, a: &Poly, k: u32) -> Poly {
        let mut acc = self.constant(Rational::one());
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn monic(&self, a: &Poly) -> Poly {
        match a.lead() {
            None => Poly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(a, &inv)
            }
        }
    }

    /// Full normal form of `f` modulo `g` (a list of polynomials, used as divisors in order).
    pub fn normal_form(&self, f: &Poly, g: &[&Poly]) -> Poly {
        let mut p = f.clone();
        let mut rem: Vec<(Exponent, Rational)> = Vec::new();
        while let Some((le, lc)) = p.terms.first().cloned() {
            let div = g
                .iter()
                .find(|h| !h.is_zero() && divides(h.lead_exp(), &le));
            match div {
                Some(h) => {
                    let (he, hc) = h.lead().expect("nonzero");
                    let k = -(&lc / hc);
                    let m = sub_exp(&le, he);
                    p = self.add_scaled(&p, &k, &m, h);
                }
                None => {
                    rem.push((le, lc));
                    p.terms.remove(0);
                }
            }
        }
        Poly { terms: rem }
    }

    pub fn spoly(&self, a: &Poly, b: &Poly) -> Poly {
        let (ae, ac) = a.lead().expect("nonzero");
        let (be, bc) = b.lead().expect("nonzero");
        let l = lcm(ae, be);
        let left = self.add_scaled(&Poly::zero(), &ac.recip(), &sub_exp(&l, ae), a);
        self.add_scaled(&left, &-bc.recip(), &sub_exp(&l, be), b)
    }

    /// Reduced Gröbner basis of the ideal generated by `gens`.
    pub fn groebner(&self, gens: &[Poly]) -> Vec<Poly> {
        self.buchberger_extend(&[], gens)
    }

    /// Reduced Gröbner basis of `(base) + (new)`, where `base` is already a Gröbner basis.
    pub fn buchberger_extend(&self, base: &[Poly], new: &[Poly]) -> Vec<Poly> {
        let mut st = GbState {
            ring: self,
            polys: Vec::new(),
            active: Vec::new(),
            pairs: Vec::new(),
        };
        for b in base {
            if !b.is_zero() {
                // base is a Gröbner basis: insert without pairs among base elements
                st.polys.push(self.monic(b));
                st.active.push(true);
            }
        }
        // drop base elements made redundant by others
        for i in 0..st.polys.len() {
            for j in 0..st.polys.len() {
                if i != j
                    && st.active[i]
                    && st.active[j]
                    && divides(st.polys[j].lead_exp(), st.polys[i].lead_exp())
                    && (st.polys[j].lead_exp() != st.polys[i].lead_exp() || j < i)
                {
                    st.active[i] = false;
                }
            }
        }
        for f in new {
            let r = st.reduce(f);
            if !r.is_zero() {
                if r.is_constant() {
                    return vec![self.constant(Rational::one())];
                }
                st.insert(self.monic(&r));
            }
        }
        while let Some((i, j)) = st.pop_pair() {
            let s = self.spoly(&st.polys[i], &st.polys[j]);
            let r = st.reduce(&s);
            if !r.is_zero() {
                if r.is_constant() {
                    return vec![self.constant(Rational::one())];
                }
                st.insert(self.monic(&r));
            }
        }
        st.reduced()
    }

    /// Whether `f` reduces to zero modulo the Gröbner basis `gb`.
    pub fn member(&self, f: &Poly, gb: &[Poly]) -> bool {
        let refs: Vec<&Poly> = gb.iter().collect();
        self.normal_form(f, &refs).is_zero()
    }
}

struct GbState<'a> {
    ring: &'a PolyRing,
    polys: Vec<Poly>,
    active: Vec<bool>,
    pairs: Vec<(usize, usize, Exponent)>,
}

impl GbState<'_> {
    fn reduce(&self, f: &Poly) -> Poly {
        let refs: Vec<&Poly> = self
            .polys
            .iter()
            .zip(&self.active)
            .filter(|(_, a)| **a)
            .map(|(p, _)| p)
            .collect();
        self.ring.normal_form(f, &refs)
    }

    fn insert(&mut self, h: Poly) {
        let hn = self.polys.len();
        let hl = h.lead_exp().clone();
        // candidate new pairs with their lcms
        let cands: Vec<(usize, Exponent, bool)> = (0..hn)
            .filter(|&g| self.active[g])
            .map(|g| {
                let gl = self.polys[g].lead_exp();
                (g, lcm(gl, &hl), coprime(gl, &hl))
            })
            .collect();
        // chain criterion among the new pairs
        let mut pending = cands;
        let mut kept: Vec<(usize, Exponent, bool)> = Vec::new();
        while !pending.is_empty() {
            let (g, l, cop) = pending.remove(0);
            let dominated = pending
                .iter()
                .chain(kept.iter())
                .any(|(_, l2, _)| divides(l2, &l));
            if cop || !dominated {
                kept.push((g, l, cop));
            }
        }
        let fresh: Vec<(usize, usize, Exponent)> = kept
            .into_iter()
            .filter(|(_, _, cop)| !cop)
            .map(|(g, l, _)| (g, hn, l))
            .collect();
        // B_k criterion on old pairs
        let polys = &self.polys;
        self.pairs.retain(|(a, b, l)| {
            let la = lcm(polys[*a].lead_exp(), &hl);
            let lb = lcm(polys[*b].lead_exp(), &hl);
            !(divides(&hl, l) && la != *l && lb != *l)
        });
        self.pairs.extend(fresh);
        for g in 0..hn {
            if self.active[g] && divides(&hl, self.polys[g].lead_exp()) {
                self.active[g] = false;
            }
        }
        self.polys.push(h);
        self.active.push(true);
    }

    fn pop_pair(&mut self) -> Option<(usize, usize)> {
        if self.pairs.is_empty() {
            return None;
        }
        let ord = &self.ring.order;
        let mut best = 0;
        for k in 1..self.pairs.len() {
            let (a, b, l) = &self.pairs[k];
            let (ba, bb, bl) = &self.pairs[best];
            let c = ord.cmp(l, bl).then((a, b).cmp(&(ba, bb)));
            if c == Ordering::Less {
                best = k;
            }
        }
        let (a, b, _) = self.pairs.swap_remove(best);
        Some((a, b))
    }

    fn reduced(self) -> Vec<Poly> {
        let mut lead: Vec<Poly> = Vec::new();
        let act: Vec<Poly> = self
            .polys
            .into_iter()
            .zip(self.active)
            .filter(|(_, a)| *a)
            .map(|(p, _)| p)
            .collect();
        for (i, p) in act.iter().enumerate() {
            let redundant = act.iter().enumerate().any(|(j, q)| {
                j != i
                    && divides(q.lead_exp(), p.lead_exp())
                    && (q.lead_exp() != p.lead_exp() || j < i)
            });
            if !redundant {
                lead.push(p.clone());
            }
        }
        let mut out = Vec::with_capacity(lead.len());
        for i in 0..lead.len() {
            let others: Vec<&Poly> = lead
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p)
                .collect();
            let (le, lc) = lead[i].lead().expect("nonzero").clone();
            let tail = Poly {
                terms: lead[i].terms[1..].to_vec(),
            };
            let t = self.ring.normal_form(&tail, &others);
            let mut terms = vec![(le, lc)];
            terms.extend(t.terms);
            out.push(self.ring.monic(&Poly { terms }));
        }
        let ord = &self.ring.order;
        out.sort_by(|a, b| ord.cmp(a.lead_exp(), b.lead_exp()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    fn p(ring: &PolyRing, terms: &[(&[u32], i64)]) -> Poly {
        ring.from_terms(terms.iter().map(|(e, c)| (e.to_vec(), rat(*c))).collect())
    }

    #[test]
    fn univariate_gcd() {
        let r = PolyRing::new(MonomialOrder::degrevlex(1));
        let f = p(&r, &[(&[2], 1), (&[0], -1)]);
        let g = p(&r, &[(&[1], 1), (&[0], -1)]);
        assert_eq!(r.groebner(&[f, g.clone()]), vec![g]);
    }

    #[test]
    fn unit_detected() {
        let r = PolyRing::new(MonomialOrder::degrevlex(2));
        let f = p(&r, &[(&[1, 0], 1)]);
        let g = p(&r, &[(&[1, 0], 1), (&[0, 0], 1)]);
        assert_eq!(r.groebner(&[f, g]), vec![r.constant(rat(1))]);
    }

    #[test]
    fn elimination_order() {
        // eliminate s from (s*x - 1, x^2 - y): block order s > (x,y)
        let r = PolyRing::new(MonomialOrder::new(&[1, 2]));
        let f = p(&r, &[(&[1, 1, 0], 1), (&[0, 0, 0], -1)]);
        let g = p(&r, &[(&[0, 2, 0], 1), (&[0, 0, 1], -1)]);
        let gb = r.groebner(&[f, g]);
        for a in &gb {
            for b in &gb {
                let s = r.spoly(a, b);
                assert!(r.member(&s, &gb));
            }
        }
        let g2 = p(&r, &[(&[0, 2, 0], 1), (&[0, 0, 1], -1)]);
        assert!(gb.contains(&g2));
        assert!(gb.iter().filter(|q| !q.involves(0)).count() == 1);
    }

    #[test]
    fn cyclic3_spolys_reduce() {
        let r = PolyRing::new(MonomialOrder::degrevlex(3));
        let f1 = p(&r, &[(&[1, 0, 0], 1), (&[0, 1, 0], 1), (&[0, 0, 1], 1)]);
        let f2 = p(&r, &[(&[1, 1, 0], 1), (&[0, 1, 1], 1), (&[1, 0, 1], 1)]);
        let f3 = p(&r, &[(&[1, 1, 1], 1), (&[0, 0, 0], -1)]);
        let gb = r.groebner(&[f1.clone(), f2.clone(), f3.clone()]);
        for a in &gb {
            for b in &gb {
                assert!(r.member(&r.spoly(a, b), &gb));
            }
        }
        for f in [f1, f2, f3] {
            assert!(r.member(&f, &gb));
        }
        assert_eq!(gb.len(), 3);
    }

    #[test]
    fn order_comparisons() {
        let o = MonomialOrder::degrevlex(3);
        assert_eq!(o.cmp(&[1, 0, 0], &[0, 1, 0]), Ordering::Greater);
        assert_eq!(o.cmp(&[1, 0, 1], &[0, 2, 0]), Ordering::Less);
        let b = MonomialOrder::new(&[1, 2]);
        assert_eq!(b.cmp(&[1, 0, 0], &[0, 5, 5]), Ordering::Greater);
    }
}
