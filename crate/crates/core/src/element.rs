//! Ring elements `Σ c·u^q·t^e` with canonical term order, plus the element syntax.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactmath::{fmt_rational, parse_rational, Rational};
use crate::monoid::LatticePoint;

/// A syntax error in element text, with a byte offset.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at column {pos}: {msg}")]
pub struct ElementParseError {
    pub pos: usize,
    pub msg: String,
}

/// Key of a term: t-exponents and lattice exponent.
///
/// Ordered by degrevlex on the t-exponents, ties broken lexicographically on the lattice exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermKey {
    pub exps: Vec<u32>,
    pub q: LatticePoint,
}

impl Ord for TermKey {
    fn cmp(&self, o: &Self) -> Ordering {
        let da: u64 = self.exps.iter().map(|&x| x as u64).sum();
        let db: u64 = o.exps.iter().map(|&x| x as u64).sum();
        da.cmp(&db)
            .then_with(|| {
                for i in (0..self.exps.len().min(o.exps.len())).rev() {
                    if self.exps[i] != o.exps[i] {
                        return o.exps[i].cmp(&self.exps[i]);
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.q.cmp(&o.q))
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A finite sum of terms `c·u^q·t^e` over the rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    nvars: usize,
    rank: usize,
    terms: BTreeMap<TermKey, Rational>,
}

impl RingElement {
    pub fn zero(nvars: usize, rank: usize) -> Self {
        RingElement {
            nvars,
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, nvars: usize, rank: usize) -> Self {
        Self::term(c, LatticePoint::zero(rank), vec![0; nvars])
    }

    pub fn one(nvars: usize, rank: usize) -> Self {
        Self::constant(Rational::one(), nvars, rank)
    }

    pub fn var(i: usize, nvars: usize, rank: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::term(Rational::one(), LatticePoint::zero(rank), e)
    }

    pub fn monomial(q: LatticePoint, nvars: usize) -> Self {
        Self::term(Rational::one(), q, vec![0; nvars])
    }

    pub fn term(c: Rational, q: LatticePoint, exps: Vec<u32>) -> Self {
        let mut out = RingElement::zero(exps.len(), q.rank());
        if !c.is_zero() {
            out.terms.insert(TermKey { exps, q }, c);
        }
        out
    }

    pub fn from_terms(
        nvars: usize,
        rank: usize,
        terms: impl IntoIterator<Item = (TermKey, Rational)>,
    ) -> Self {
        let mut out = RingElement::zero(nvars, rank);
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: TermKey, c: Rational) {
        debug_assert_eq!(k.exps.len(), self.nvars);
        debug_assert_eq!(k.q.rank(), self.rank);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&TermKey, &Rational)> {
        self.terms.iter()
    }

    /// Largest term in canonical order.
    pub fn leading(&self) -> Option<(&TermKey, &Rational)> {
        self.terms.iter().next_back()
    }

    /// The value if the element is a constant (zero included).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().expect("one term");
                if k.q.is_zero() && k.exps.iter().all(|&e| e == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_nonzero_constant(&self) -> bool {
        matches!(self.as_constant(), Some(c) if !c.is_zero())
    }

    pub fn involves(&self, v: usize) -> bool {
        self.terms.keys().any(|k| k.exps[v] > 0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|k| k.exps[v]).max().unwrap_or(0)
    }

    /// Total t-degree of the lowest-degree term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.exps.iter().sum()).min()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RingElement::zero(self.nvars, self.rank);
        }
        RingElement {
            nvars: self.nvars,
            rank: self.rank,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = RingElement::zero(self.nvars, self.rank);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let exps = k1.exps.iter().zip(&k2.exps).map(|(a, b)| a + b).collect();
                out.add_term(
                    TermKey {
                        exps,
                        q: k1.q.add(&k2.q),
                    },
                    c1 * c2,
                );
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = RingElement::one(self.nvars, self.rank);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplies by `u^q`.
    pub fn shift(&self, q: &LatticePoint) -> Self {
        RingElement {
            nvars: self.nvars,
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| {
                    (
                        TermKey {
                            exps: k.exps.clone(),
                            q: k.q.add(q),
                        },
                        v.clone(),
                    )
                })
                .collect(),
        }
    }

    /// Pads with zero t-exponents and zero lattice coordinates.
    pub fn extend(&self, nvars: usize, rank: usize) -> Self {
        let mut out = RingElement::zero(nvars, rank);
        for (k, c) in &self.terms {
            let mut e = k.exps.clone();
            e.resize(nvars, 0);
            out.add_term(
                TermKey {
                    exps: e,
                    q: k.q.extend_to(rank),
                },
                c.clone(),
            );
        }
        out
    }

    /// Replaces every variable by an element and every lattice exponent by `map_q(q)`.
    /// Images live in a ring with `nvars`/`rank` given by the first image (or the arguments).
    pub fn substitute(
        &self,
        images: &[RingElement],
        nvars: usize,
        rank: usize,
        map_q: impl Fn(&LatticePoint) -> LatticePoint,
    ) -> Self {
        let mut out = RingElement::zero(nvars, rank);
        let mut powers: Vec<Vec<RingElement>> =
            vec![vec![RingElement::one(nvars, rank)]; images.len()];
        for (k, c) in &self.terms {
            let mut acc = RingElement::monomial(map_q(&k.q), nvars).scale(c);
            for (v, &e) in k.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let next = powers[v].last().expect("nonempty").mul(&images[v]);
                    powers[v].push(next);
                }
                acc = acc.mul(&powers[v][e as usize]);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Same element with variable `v` removed (it must not occur).
    pub fn drop_var(&self, v: usize) -> Self {
        let mut out = RingElement::zero(self.nvars - 1, self.rank);
        for (k, c) in &self.terms {
            debug_assert_eq!(k.exps[v], 0);
            let mut e = k.exps.clone();
            e.remove(v);
            out.add_term(
                TermKey {
                    exps: e,
                    q: k.q.clone(),
                },
                c.clone(),
            );
        }
        out
    }

    /// Relabels variables: variable `i` becomes variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let mut out = RingElement::zero(self.nvars, self.rank);
        for (k, c) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (i, &x) in k.exps.iter().enumerate() {
                e[perm[i]] = x;
            }
            out.add_term(
                TermKey {
                    exps: e,
                    q: k.q.clone(),
                },
                c.clone(),
            );
        }
        out
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// The coefficient of `u^q t^e` (zero if absent).
    pub fn coefficient(&self, k: &TermKey) -> Rational {
        self.terms.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Parses the element syntax with `nvars` variables over a rank-`rank` lattice.
    pub fn parse(s: &str, nvars: usize, rank: usize) -> Result<Self, ElementParseError> {
        Parser::new(s, nvars, rank).parse_all()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            let mut parts: Vec<String> = Vec::new();
            let is_unit_mon = k.q.is_zero() && k.exps.iter().all(|&e| e == 0);
            if !a.is_one() || is_unit_mon {
                parts.push(fmt_rational(&a));
            }
            if !k.q.is_zero() {
                parts.push(format!("u{}", k.q));
            }
            for (v, &e) in k.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("t{}", v + 1)),
                    _ => parts.push(format!("t{}^{}", v + 1, e)),
                }
            }
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    nvars: usize,
    rank: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, nvars: usize, rank: usize) -> Self {
        let chars = src
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        Parser {
            chars,
            pos: 0,
            nvars,
            rank,
            src,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ElementParseError {
        let pos = self
            .chars
            .get(self.pos)
            .map(|(i, _)| *i)
            .unwrap_or(self.src.len());
        ElementParseError {
            pos: pos + 1,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn number(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        Some(
            self.chars[start..self.pos]
                .iter()
                .map(|(_, c)| *c)
                .collect(),
        )
    }

    fn parse_all(mut self) -> Result<RingElement, ElementParseError> {
        if self.chars.is_empty() {
            return Err(self.err("empty element"));
        }
        let mut out = RingElement::zero(self.nvars, self.rank);
        let mut first = true;
        while self.pos < self.chars.len() {
            let mut sign = Rational::one();
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    sign = -sign;
                    self.pos += 1;
                }
                _ if first => {}
                _ => return Err(self.err("expected '+' or '-'")),
            }
            first = false;
            let (k, c) = self.parse_term()?;
            out.add_term(k, c * sign);
        }
        Ok(out)
    }

    fn parse_term(&mut self) -> Result<(TermKey, Rational), ElementParseError> {
        let mut coeff = Rational::one();
        let mut any = false;
        if let Some(n) = self.number() {
            any = true;
            let mut text = n;
            if self.peek() == Some('/') {
                self.pos += 1;
                let d = self
                    .number()
                    .ok_or_else(|| self.err("expected denominator"))?;
                text = format!("{text}/{d}");
            }
            coeff = parse_rational(&text).map_err(|e| self.err(e.to_string()))?;
        }
        let mut q = LatticePoint::zero(self.rank);
        let mut exps = vec![0u32; self.nvars];
        loop {
            match self.peek() {
                Some('*') if any => {
                    self.pos += 1;
                }
                Some('u') => {
                    self.pos += 1;
                    q = q.add(&self.parse_point()?);
                    any = true;
                }
                Some('t') => {
                    self.pos += 1;
                    let n = self
                        .number()
                        .ok_or_else(|| self.err("expected variable index"))?;
                    let idx: usize = n.parse().map_err(|_| self.err("bad variable index"))?;
                    if idx == 0 || idx > self.nvars {
                        return Err(self.err(format!("variable t{idx} out of range")));
                    }
                    let mut e = 1u32;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        let n = self.number().ok_or_else(|| self.err("expected exponent"))?;
                        e = n.parse().map_err(|_| self.err("bad exponent"))?;
                    }
                    exps[idx - 1] += e;
                    any = true;
                }
                _ => break,
            }
        }
        if !any {
            return Err(self.err("expected a term"));
        }
        Ok((TermKey { exps, q }, coeff))
    }

    fn parse_point(&mut self) -> Result<LatticePoint, ElementParseError> {
        if self.peek() != Some('(') {
            return Err(self.err("expected '('"));
        }
        self.pos += 1;
        let mut coords = Vec::new();
        if self.peek() == Some(')') && self.rank == 0 {
            self.pos += 1;
            return Ok(LatticePoint(coords));
        }
        loop {
            let mut text = String::new();
            if self.peek() == Some('-') {
                text.push('-');
                self.pos += 1;
            }
            let n = self
                .number()
                .ok_or_else(|| self.err("expected rational coordinate"))?;
            text.push_str(&n);
            if self.peek() == Some('/') {
                self.pos += 1;
                let d = self
                    .number()
                    .ok_or_else(|| self.err("expected denominator"))?;
                text.push('/');
                text.push_str(&d);
            }
            coords.push(parse_rational(&text).map_err(|e| self.err(e.to_string()))?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
        if coords.len() != self.rank {
            return Err(self.err(format!(
                "expected {} coordinates, found {}",
                self.rank,
                coords.len()
            )));
        }
        Ok(LatticePoint(coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_and_parse() {
        let f = RingElement::parse("t1^2 - t2^3", 2, 0).unwrap();
        assert_eq!(f.to_string(), "-t2^3 + t1^2");
        let g = RingElement::parse("1/2 u(1,0) t1 + u(0,1/2) - 3", 1, 2).unwrap();
        assert_eq!(RingElement::parse(&g.to_string(), 1, 2).unwrap(), g);
        assert_eq!(RingElement::zero(1, 0).to_string(), "0");
        assert_eq!(
            RingElement::parse("t1 - t1", 1, 0).unwrap().to_string(),
            "0"
        );
    }

    #[test]
    fn parse_errors() {
        let e = RingElement::parse("u(1,)", 0, 2).unwrap_err();
        assert_eq!(e.pos, 5);
        assert!(RingElement::parse("t3", 2, 0).is_err());
        assert!(RingElement::parse("", 2, 0).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = RingElement::parse("t1 + t2", 2, 0).unwrap();
        let b = RingElement::parse("t1 - t2", 2, 0).unwrap();
        assert_eq!(a.mul(&b), RingElement::parse("t1^2 - t2^2", 2, 0).unwrap());
        assert_eq!(
            a.pow(2).sub(&b.pow(2)),
            RingElement::parse("4 t1 t2", 2, 0).unwrap()
        );
    }
}
