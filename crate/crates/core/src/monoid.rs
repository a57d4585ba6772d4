//! Saturated toric monoids `M = L ∩ C` with a distinguished base submonoid,
//! monomial ideals, Newton-polyhedron saturation and Hilbert bases.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactmath::{
    self, dot, fmt_rational, hnf_basis, lattice_coords_hnf, lcm_of_denominators, lp_feasible,
    nullspace, parse_rational, rank, ExactError, IntMatrix, Rational,
};

/// Upper bound on the number of lattice points enumerated by a single
/// parallelepiped or saturation search.
pub const ENUMERATION_LIMIT: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("dimension mismatch: expected rank {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lattice basis does not have full rank")]
    LatticeNotFull,
    #[error("cone generator {0} is not a lattice point")]
    RayNotInLattice(String),
    #[error("cone is not full-dimensional")]
    ConeNotFull,
    #[error("cone contains a line")]
    NotSharp,
    #[error("point {0} does not lie in the monoid")]
    NotInMonoid(String),
    #[error("enumeration bound exceeded")]
    RankTooLarge,
    #[error("the zero monomial ideal has no saturation")]
    ZeroIdeal,
    #[error("invalid non-logarithmic axis {0}")]
    BadNonLogAxis(usize),
}

/// A point of `Q^r`, used for lattice and monoid elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<Rational>);

impl LatticePoint {
    pub fn zero(r: usize) -> Self {
        LatticePoint(vec![Rational::zero(); r])
    }

    pub fn from_i64(v: &[i64]) -> Self {
        LatticePoint(v.iter().map(|&x| exactmath::rat(x)).collect())
    }

    pub fn axis(r: usize, i: usize) -> Self {
        let mut p = Self::zero(r);
        p.0[i] = Rational::one();
        p
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        LatticePoint(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        LatticePoint(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        LatticePoint(self.0.iter().map(|a| a * c).collect())
    }

    /// Appends zero coordinates up to rank `r`.
    pub fn extend_to(&self, r: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(r, Rational::zero());
        LatticePoint(v)
    }

    pub fn parse(s: &str) -> Result<Self, ExactError> {
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| ExactError::BadRational(s.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(LatticePoint(Vec::new()));
        }
        inner
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()
            .map(LatticePoint)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_rational(x))?;
        }
        write!(f, ")")
    }
}

/// Inward normals of the facets of the full-dimensional pointed cone spanned by `gens` in `Q^dim`.
pub fn cone_facets(gens: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    if dim == 0 {
        return Vec::new();
    }
    let mut dirs: Vec<Vec<Rational>> = Vec::new();
    let mut seen = HashSet::new();
    for g in gens {
        if g.iter().all(|x| x.is_zero()) {
            continue;
        }
        let p = exactmath::primitive_integer(g);
        if seen.insert(p) {
            dirs.push(g.clone());
        }
    }
    let mut out: Vec<Vec<Rational>> = Vec::new();
    let mut found = HashSet::new();
    let k = dim - 1;
    let mut idx: Vec<usize> = (0..k).collect();
    if k > dirs.len() {
        return out;
    }
    loop {
        let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| dirs[i].clone()).collect();
        let ns = nullspace(&sub, dim);
        if ns.len() == 1 {
            let n = &ns[0];
            let vals: Vec<Rational> = dirs.iter().map(|g| dot(n, g)).collect();
            let pos = vals.iter().any(|v| v.is_positive());
            let neg = vals.iter().any(|v| v.is_negative());
            if !(pos && neg) && (pos || neg) {
                let oriented: Vec<Rational> = if neg {
                    n.iter().map(|x| -x).collect()
                } else {
                    n.clone()
                };
                let prim = exactmath::primitive_integer(&oriented);
                if found.insert(prim.clone()) {
                    out.push(prim.into_iter().map(Rational::from_integer).collect());
                }
            }
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if idx[i] < dirs.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            out.sort();
            return out;
        }
    }
}

/// Simplicial subdivision of the pointed cone spanned by `rays` (indices into `rays`).
pub fn triangulate(rays: &[Vec<Rational>]) -> Vec<Vec<usize>> {
    let ids: Vec<usize> = (0..rays.len()).collect();
    triangulate_ids(rays, &ids)
}

fn triangulate_ids(rays: &[Vec<Rational>], ids: &[usize]) -> Vec<Vec<usize>> {
    let vecs: Vec<Vec<Rational>> = ids.iter().map(|&i| rays[i].clone()).collect();
    let d = rank(&vecs);
    if ids.len() <= d {
        return vec![ids.to_vec()];
    }
    // coordinates in a basis of the span
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for v in &vecs {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if rank(&trial) > basis.len() {
            basis = trial;
        }
    }
    let coords: Vec<Vec<Rational>> = vecs
        .iter()
        .map(|v| exactmath::solve_combination(&basis, v).expect("vector lies in its own span"))
        .collect();
    let facets = cone_facets(&coords, d);
    let apex = 0usize;
    let mut out = Vec::new();
    for n in facets {
        let on: Vec<usize> = (0..ids.len())
            .filter(|&i| dot(&n, &coords[i]).is_zero())
            .collect();
        if on.contains(&apex) {
            continue;
        }
        let sub_ids: Vec<usize> = on.iter().map(|&i| ids[i]).collect();
        for mut s in triangulate_ids(rays, &sub_ids) {
            s.insert(0, ids[apex]);
            out.push(s);
        }
    }
    out
}

/// A saturated sharp toric monoid `M = L ∩ C` with base data.
///
/// The lattice is `(1/denom) * rowspan(basis)` with `basis` in Hermite normal form.
/// Axes listed in `nonlog` are base coordinates that carry no logarithmic structure:
/// they are rays of the cone, belong to the base, and split off as a direct factor.
#[derive(Clone, Debug)]
pub struct ToricMonoid {
    rank: usize,
    denom: BigInt,
    basis: IntMatrix,
    rays: Vec<LatticePoint>,
    base: Vec<LatticePoint>,
    nonlog: Vec<usize>,
    facets: Vec<Vec<Rational>>,
    hilbert: OnceLock<Result<Arc<Vec<LatticePoint>>, MonoidError>>,
}

impl PartialEq for ToricMonoid {
    fn eq(&self, o: &Self) -> bool {
        self.rank == o.rank
            && self.denom == o.denom
            && self.basis == o.basis
            && self.rays == o.rays
            && self.base == o.base
            && self.nonlog == o.nonlog
    }
}

impl Eq for ToricMonoid {}

impl ToricMonoid {
    /// Builds `M = L ∩ C` from lattice generators (integer rows over `denom`), cone generators,
    /// base points and non-logarithmic axes. The lattice must have full rank `rank`.
    pub fn new(
        rank: usize,
        denom: BigInt,
        lattice_rows: Vec<Vec<BigInt>>,
        cone_gens: Vec<LatticePoint>,
        base: Vec<LatticePoint>,
        nonlog: Vec<usize>,
    ) -> Result<Self, MonoidError> {
        let m = IntMatrix::new(lattice_rows, rank)?;
        let mut basis = hnf_basis(&m)?;
        if basis.nrows() != rank {
            return Err(MonoidError::LatticeNotFull);
        }
        let mut denom = denom;
        // normalize so that gcd(denom, entries) = 1
        let g = basis
            .rows()
            .iter()
            .flatten()
            .fold(denom.clone(), |acc, x| acc.gcd(x));
        if !g.is_one() && !g.is_zero() {
            let rows = basis
                .rows()
                .iter()
                .map(|r| r.iter().map(|x| x / &g).collect())
                .collect();
            basis = IntMatrix::new(rows, rank)?;
            denom /= &g;
        }
        for c in cone_gens.iter().chain(base.iter()) {
            if c.rank() != rank {
                return Err(MonoidError::DimensionMismatch {
                    expected: rank,
                    found: c.rank(),
                });
            }
        }
        let gens: Vec<Vec<Rational>> = cone_gens.iter().map(|c| c.0.clone()).collect();
        if rank > 0 && exactmath::rank(&gens) != rank {
            return Err(MonoidError::ConeNotFull);
        }
        if rank > 0 && !gens.is_empty() {
            // sharp iff 0 is not a nontrivial nonnegative combination
            let mut a: Vec<Vec<Rational>> = (0..rank)
                .map(|k| gens.iter().map(|g| g[k].clone()).collect())
                .collect();
            a.push(vec![Rational::one(); gens.len()]);
            let mut b = vec![Rational::zero(); rank];
            b.push(Rational::one());
            if lp_feasible(&a, &b) {
                return Err(MonoidError::NotSharp);
            }
        }
        let facets = cone_facets(&gens, rank);
        let mut mon = ToricMonoid {
            rank,
            denom,
            basis,
            rays: Vec::new(),
            base: Vec::new(),
            nonlog: Vec::new(),
            facets,
            hilbert: OnceLock::new(),
        };
        for c in &cone_gens {
            if !mon.in_lattice(c)? {
                return Err(MonoidError::RayNotInLattice(c.to_string()));
            }
        }
        // extreme rays, primitive in L
        let mut rays = BTreeSet::new();
        for c in &cone_gens {
            if c.is_zero() {
                continue;
            }
            let tight: Vec<Vec<Rational>> = mon
                .facets
                .iter()
                .filter(|n| dot(n, &c.0).is_zero())
                .cloned()
                .collect();
            if exactmath::rank(&tight) + 1 == rank {
                rays.insert(mon.primitive_on_ray(c)?);
            }
        }
        mon.rays = rays.into_iter().collect();
        let mut b: Vec<LatticePoint> = Vec::new();
        for p in base {
            if !mon.contains(&p)? {
                return Err(MonoidError::NotInMonoid(p.to_string()));
            }
            if !b.contains(&p) {
                b.push(p);
            }
        }
        b.sort();
        mon.base = b;
        let mut nl = nonlog;
        nl.sort();
        nl.dedup();
        for &i in &nl {
            mon.check_nonlog_axis(i)?;
        }
        mon.nonlog = nl;
        Ok(mon)
    }

    /// The free monoid `N^r` with the given base points.
    pub fn free(rank: usize, base: Vec<LatticePoint>) -> Result<Self, MonoidError> {
        let rows = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let cone = (0..rank).map(|i| LatticePoint::axis(rank, i)).collect();
        Self::new(rank, BigInt::one(), rows, cone, base, Vec::new())
    }

    fn check_nonlog_axis(&self, i: usize) -> Result<(), MonoidError> {
        let e = LatticePoint::axis(self.rank, i);
        let bad = || MonoidError::BadNonLogAxis(i);
        if i >= self.rank || !self.rays.contains(&e) || !self.base.contains(&e) {
            return Err(bad());
        }
        if self.rays.iter().any(|r| *r != e && !r.0[i].is_zero()) {
            return Err(bad());
        }
        let d = Rational::from_integer(self.denom.clone());
        for row in self.basis.rows() {
            if !(Rational::from_integer(row[i].clone()) / &d).is_integer() {
                return Err(bad());
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rays(&self) -> &[LatticePoint] {
        &self.rays
    }

    pub fn base(&self) -> &[LatticePoint] {
        &self.base
    }

    pub fn nonlog(&self) -> &[usize] {
        &self.nonlog
    }

    pub fn facets(&self) -> &[Vec<Rational>] {
        &self.facets
    }

    /// Rational basis vectors of the lattice.
    pub fn lattice_basis(&self) -> Vec<LatticePoint> {
        let d = Rational::from_integer(self.denom.clone());
        self.basis
            .rows()
            .iter()
            .map(|r| {
                LatticePoint(
                    r.iter()
                        .map(|x| Rational::from_integer(x.clone()) / &d)
                        .collect(),
                )
            })
            .collect()
    }

    fn check_dim(&self, q: &LatticePoint) -> Result<(), MonoidError> {
        if q.rank() != self.rank {
            return Err(MonoidError::DimensionMismatch {
                expected: self.rank,
                found: q.rank(),
            });
        }
        Ok(())
    }

    pub fn in_lattice(&self, q: &LatticePoint) -> Result<bool, MonoidError> {
        self.check_dim(q)?;
        Ok(self.lattice_coords(q).is_some())
    }

    /// Integer coordinates of `q` in the HNF lattice basis.
    pub fn lattice_coords(&self, q: &LatticePoint) -> Option<Vec<BigInt>> {
        let d = Rational::from_integer(self.denom.clone());
        let mut w = Vec::with_capacity(q.rank());
        for x in &q.0 {
            let y = x * &d;
            if !y.is_integer() {
                return None;
            }
            w.push(y.to_integer());
        }
        lattice_coords_hnf(&w, &self.basis).ok().flatten()
    }

    pub fn in_cone(&self, q: &LatticePoint) -> bool {
        self.facets.iter().all(|n| !dot(n, &q.0).is_negative())
    }

    /// Saturated membership: `q ∈ L` and `q ∈ C`.
    pub fn contains(&self, q: &LatticePoint) -> Result<bool, MonoidError> {
        self.check_dim(q)?;
        Ok(self.in_cone(q) && self.lattice_coords(q).is_some())
    }

    /// Whether `q - p` lies in the monoid.
    pub fn divides(&self, p: &LatticePoint, q: &LatticePoint) -> bool {
        let d = q.sub(p);
        self.in_cone(&d) && self.lattice_coords(&d).is_some()
    }

    /// Membership in the cone decided by the LP backend (used to cross-check the facet test).
    pub fn in_cone_lp(&self, q: &LatticePoint) -> bool {
        if self.rank == 0 {
            return true;
        }
        let a: Vec<Vec<Rational>> = (0..self.rank)
            .map(|k| self.rays.iter().map(|r| r.0[k].clone()).collect())
            .collect();
        lp_feasible(&a, &q.0)
    }

    fn primitive_on_ray(&self, c: &LatticePoint) -> Result<LatticePoint, MonoidError> {
        let coords = self
            .lattice_coords(c)
            .ok_or_else(|| MonoidError::RayNotInLattice(c.to_string()))?;
        let g = coords.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        Ok(c.scale(&Rational::from_integer(g).recip()))
    }

    /// A linear functional strictly positive on `C \ {0}`.
    pub fn grading(&self) -> Vec<Rational> {
        let mut g = vec![Rational::zero(); self.rank];
        for n in &self.facets {
            for (x, y) in g.iter_mut().zip(n) {
                *x += y;
            }
        }
        g
    }

    /// Minimal generating set of `M`, computed by triangulating the cone and enumerating
    /// the half-open fundamental parallelepipeds of the simplicial pieces.
    pub fn hilbert_basis(&self) -> Result<Arc<Vec<LatticePoint>>, MonoidError> {
        self.hilbert
            .get_or_init(|| self.compute_hilbert_basis().map(Arc::new))
            .clone()
    }

    fn compute_hilbert_basis(&self) -> Result<Vec<LatticePoint>, MonoidError> {
        if self.rank == 0 {
            return Ok(Vec::new());
        }
        let rays: Vec<Vec<Rational>> = self.rays.iter().map(|r| r.0.clone()).collect();
        let mut cands: BTreeSet<LatticePoint> = self.rays.iter().cloned().collect();
        for simplex in triangulate(&rays) {
            let srays: Vec<LatticePoint> = simplex.iter().map(|&i| self.rays[i].clone()).collect();
            for p in self.parallelepiped_points(&srays)? {
                if !p.is_zero() {
                    cands.insert(p);
                }
            }
        }
        let cands: Vec<LatticePoint> = cands.into_iter().collect();
        let mut out: Vec<LatticePoint> = cands
            .iter()
            .filter(|x| !cands.iter().any(|g| g != *x && self.divides(g, x)))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            let g = self.grading();
            dot(&g, &a.0).cmp(&dot(&g, &b.0)).then_with(|| b.cmp(a))
        });
        Ok(out)
    }

    /// Lattice points `sum λ_i ρ_i` with `0 <= λ_i < 1` for linearly independent lattice points `ρ_i`.
    pub fn parallelepiped_points(
        &self,
        srays: &[LatticePoint],
    ) -> Result<Vec<LatticePoint>, MonoidError> {
        let k = srays.len();
        // lattice coordinates of the rays
        let coords: Vec<Vec<BigInt>> = srays
            .iter()
            .map(|r| {
                self.lattice_coords(r)
                    .ok_or_else(|| MonoidError::RayNotInLattice(r.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if k < self.rank {
            // lower-dimensional simplex: restrict to the saturated sublattice it spans
            return self.parallelepiped_points_sub(srays);
        }
        let a = IntMatrix::new(coords, self.rank)?;
        let ha = hnf_basis(&a)?;
        let diag: Vec<BigInt> = (0..k).map(|i| ha.get(i, i).clone()).collect();
        let total = diag.iter().fold(BigInt::one(), |acc, d| acc * d);
        if total > BigInt::from(ENUMERATION_LIMIT) {
            return Err(MonoidError::RankTooLarge);
        }
        let lb = self.lattice_basis();
        let ray_rows: Vec<Vec<Rational>> = srays.iter().map(|r| r.0.clone()).collect();
        let mut out = Vec::new();
        let mut c = vec![BigInt::zero(); k];
        loop {
            let mut x = LatticePoint::zero(self.rank);
            for (ci, b) in c.iter().zip(&lb) {
                x = x.add(&b.scale(&Rational::from_integer(ci.clone())));
            }
            let lam = exactmath::solve_combination(&ray_rows, &x.0).expect("rays span the space");
            let mut y = LatticePoint::zero(self.rank);
            for (l, r) in lam.iter().zip(srays) {
                let f = l - l.floor();
                y = y.add(&r.scale(&f));
            }
            out.push(y);
            // increment mixed radix counter
            let mut i = 0;
            loop {
                if i == k {
                    out.sort();
                    out.dedup();
                    return Ok(out);
                }
                c[i] += 1;
                if c[i] < diag[i] {
                    break;
                }
                c[i] = BigInt::zero();
                i += 1;
            }
        }
    }

    fn parallelepiped_points_sub(
        &self,
        srays: &[LatticePoint],
    ) -> Result<Vec<LatticePoint>, MonoidError> {
        // bounded search inside the box spanned by the rays
        let ray_rows: Vec<Vec<Rational>> = srays.iter().map(|r| r.0.clone()).collect();
        let mut out = vec![LatticePoint::zero(self.rank)];
        let hb_free: Vec<LatticePoint> = self.lattice_basis();
        let _ = hb_free;
        // enumerate lattice points x with coordinates bounded by the sum of |ray| entries
        let bound: Vec<Rational> = (0..self.rank)
            .map(|k| {
                srays
                    .iter()
                    .fold(Rational::zero(), |acc, r| acc + r.0[k].abs())
            })
            .collect();
        for x in self.box_points(
            &bound.iter().map(|b| -b.clone()).collect::<Vec<_>>(),
            &bound,
        )? {
            if let Some(lam) = exactmath::solve_combination(&ray_rows, &x.0) {
                if lam.iter().all(|l| !l.is_negative() && *l < Rational::one()) {
                    out.push(x);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// All lattice points in the box `lo <= x <= hi`.
    pub fn box_points(
        &self,
        lo: &[Rational],
        hi: &[Rational],
    ) -> Result<Vec<LatticePoint>, MonoidError> {
        let d = Rational::from_integer(self.denom.clone());
        let rows = self.basis.rows();
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Vec<Rational>)> = vec![(0, vec![Rational::zero(); self.rank])];
        while let Some((i, acc)) = stack.pop() {
            if i == self.rank {
                out.push(LatticePoint(acc));
                if out.len() > ENUMERATION_LIMIT {
                    return Err(MonoidError::RankTooLarge);
                }
                continue;
            }
            // row i has its pivot at column i (full rank HNF)
            let piv = Rational::from_integer(rows[i][i].clone()) / &d;
            let lo_c = ((&lo[i] - &acc[i]) / &piv).ceil().to_integer();
            let hi_c = ((&hi[i] - &acc[i]) / &piv).floor().to_integer();
            let mut c = lo_c;
            while c <= hi_c {
                let cr = Rational::from_integer(c.clone());
                let next: Vec<Rational> = acc
                    .iter()
                    .zip(&rows[i])
                    .map(|(a, r)| a + &cr * Rational::from_integer(r.clone()) / &d)
                    .collect();
                stack.push((i + 1, next));
                c += 1;
            }
        }
        out.sort();
        Ok(out)
    }

    /// Greedy decomposition of `q` into Hilbert basis elements (multiplicities by index).
    pub fn decompose(&self, q: &LatticePoint) -> Result<Vec<u32>, MonoidError> {
        let hb = self.hilbert_basis()?;
        let mut w = vec![0u32; hb.len()];
        let mut rest = q.clone();
        if !self.contains(&rest)? {
            return Err(MonoidError::NotInMonoid(q.to_string()));
        }
        while !rest.is_zero() {
            let (i, h) = hb
                .iter()
                .enumerate()
                .rev()
                .find(|(_, h)| self.divides(h, &rest))
                .ok_or_else(|| MonoidError::NotInMonoid(q.to_string()))?;
            w[i] += 1;
            rest = rest.sub(h);
        }
        Ok(w)
    }

    /// `dim_Q (L / <P>) ⊗ Q`.
    pub fn relative_rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = self.base.iter().map(|p| p.0.clone()).collect();
        self.rank - rank(&rows)
    }

    /// Enlarges the base by points of `M`. Non-logarithmic axes named by the new points become logarithmic.
    pub fn extend_base(&self, new_p: &[LatticePoint]) -> Result<ToricMonoid, MonoidError> {
        let mut base = self.base.clone();
        let mut nonlog = self.nonlog.clone();
        for p in new_p {
            if !self.contains(p)? {
                return Err(MonoidError::NotInMonoid(p.to_string()));
            }
            for &i in &self.nonlog {
                if !p.0[i].is_zero() {
                    if *p != LatticePoint::axis(self.rank, i) {
                        return Err(MonoidError::BadNonLogAxis(i));
                    }
                    nonlog.retain(|&j| j != i);
                }
            }
            base.push(p.clone());
        }
        let mut m = self.clone();
        base.sort();
        base.dedup();
        m.base = base;
        m.nonlog = nonlog;
        Ok(m)
    }

    /// Monoid `(1/a)L ∩ C` with the same cone and base.
    pub fn refine(&self, a: u64) -> Result<ToricMonoid, MonoidError> {
        ToricMonoid::new(
            self.rank,
            &self.denom * BigInt::from(a),
            self.basis.rows().to_vec(),
            self.rays.clone(),
            self.base.clone(),
            self.nonlog.clone(),
        )
    }

    /// Monoid with lattice enlarged by extra points, cone given explicitly.
    pub fn with_lattice_and_cone(
        &self,
        extra_lattice: &[LatticePoint],
        cone: Vec<LatticePoint>,
    ) -> Result<ToricMonoid, MonoidError> {
        let mut pts: Vec<LatticePoint> = self.lattice_basis();
        pts.extend(extra_lattice.iter().cloned());
        let den = lcm_of_denominators(pts.iter().flat_map(|p| p.0.iter()));
        let dr = Rational::from_integer(den.clone());
        let rows: Vec<Vec<BigInt>> = pts
            .iter()
            .map(|p| p.0.iter().map(|x| (x * &dr).to_integer()).collect())
            .collect();
        ToricMonoid::new(
            self.rank,
            den,
            rows,
            cone,
            self.base.clone(),
            self.nonlog.clone(),
        )
    }

    /// Log part of an exponent: non-logarithmic coordinates set to zero.
    pub fn log_part(&self, q: &LatticePoint) -> LatticePoint {
        let mut p = q.clone();
        for &i in &self.nonlog {
            p.0[i] = Rational::zero();
        }
        p
    }

    /// Whether `q` is a vertex of `conv(points) + C`.
    pub fn is_newton_vertex(&self, q: &LatticePoint, points: &[LatticePoint]) -> bool {
        let others: Vec<&LatticePoint> = points.iter().filter(|p| *p != q).collect();
        if others.is_empty() {
            return true;
        }
        // q ∈ conv(others) + C ?
        let mut a: Vec<Vec<Rational>> = (0..self.rank)
            .map(|k| {
                others
                    .iter()
                    .map(|p| p.0[k].clone())
                    .chain(self.rays.iter().map(|r| r.0[k].clone()))
                    .collect()
            })
            .collect();
        let mut conv_row = vec![Rational::one(); others.len()];
        conv_row.extend(std::iter::repeat_n(Rational::zero(), self.rays.len()));
        a.push(conv_row);
        let mut b = q.0.clone();
        b.push(Rational::one());
        !lp_feasible(&a, &b)
    }

    pub fn describe(&self) -> String {
        let lb: Vec<String> = self.lattice_basis().iter().map(|p| p.to_string()).collect();
        let rays: Vec<String> = self.rays.iter().map(|p| p.to_string()).collect();
        let base: Vec<String> = self.base.iter().map(|p| p.to_string()).collect();
        format!(
            "rank {} lattice [{}] rays [{}] base [{}] nonlog {:?}",
            self.rank,
            lb.join(" "),
            rays.join(" "),
            base.join(" "),
            self.nonlog
        )
    }
}

/// Membership oracle for `conv(V) + C` via its facet description.
#[derive(Clone, Debug)]
pub struct NewtonRegion {
    ineqs: Vec<(Vec<Rational>, Rational)>,
}

impl NewtonRegion {
    pub fn new(monoid: &ToricMonoid, verts: &[LatticePoint]) -> Self {
        let r = monoid.rank();
        let mut gens: Vec<Vec<Rational>> = Vec::new();
        for v in verts {
            let mut g = v.0.clone();
            g.push(Rational::one());
            gens.push(g);
        }
        for ray in monoid.rays() {
            let mut g = ray.0.clone();
            g.push(Rational::zero());
            gens.push(g);
        }
        let facets = cone_facets(&gens, r + 1);
        let ineqs = facets
            .into_iter()
            .map(|mut n| {
                let c = n.pop().expect("nonempty normal");
                (n, c)
            })
            .collect();
        NewtonRegion { ineqs }
    }

    pub fn contains(&self, q: &LatticePoint) -> bool {
        self.ineqs
            .iter()
            .all(|(n, c)| !(dot(n, &q.0) + c).is_negative())
    }
}

/// Minimal lattice points of `(conv(verts) + C) ∩ M`.
pub fn region_generators(
    monoid: &ToricMonoid,
    verts: &[LatticePoint],
) -> Result<Vec<LatticePoint>, MonoidError> {
    if verts.is_empty() {
        return Err(MonoidError::ZeroIdeal);
    }
    if monoid.rank() == 0 {
        return Ok(vec![LatticePoint::zero(0)]);
    }
    let region = NewtonRegion::new(monoid, verts);
    let ell = monoid.grading();
    let hb = monoid.hilbert_basis()?;
    let mut ray_vals: Vec<Rational> = monoid.rays().iter().map(|r| dot(&ell, &r.0)).collect();
    ray_vals.sort();
    ray_vals.reverse();
    let top: Rational = ray_vals
        .iter()
        .take(monoid.rank())
        .fold(Rational::zero(), |a, b| a + b);
    let vmax = verts
        .iter()
        .map(|v| dot(&ell, &v.0))
        .max()
        .expect("nonempty");
    let bound = vmax + top;
    // breadth-first enumeration of monoid elements with grading <= bound
    let mut seen: HashSet<LatticePoint> = HashSet::new();
    let mut queue = VecDeque::new();
    let zero = LatticePoint::zero(monoid.rank());
    seen.insert(zero.clone());
    queue.push_back(zero);
    while let Some(x) = queue.pop_front() {
        for h in hb.iter() {
            let y = x.add(h);
            if dot(&ell, &y.0) <= bound && !seen.contains(&y) {
                seen.insert(y.clone());
                if seen.len() > ENUMERATION_LIMIT {
                    return Err(MonoidError::RankTooLarge);
                }
                queue.push_back(y);
            }
        }
    }
    let inside: HashSet<&LatticePoint> = seen.iter().filter(|x| region.contains(x)).collect();
    let mut out: Vec<LatticePoint> = inside
        .iter()
        .filter(|x| {
            !hb.iter().any(|h| {
                let y = x.sub(h);
                inside.contains(&y)
            })
        })
        .map(|x| (*x).clone())
        .collect();
    out.sort();
    Ok(out)
}

/// A finitely generated monomial ideal of a toric monoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialIdeal {
    ambient: Arc<ToricMonoid>,
    gens: Vec<LatticePoint>,
}

impl MonomialIdeal {
    /// Builds the ideal and minimizes its generator list under divisibility.
    pub fn new(ambient: Arc<ToricMonoid>, gens: Vec<LatticePoint>) -> Result<Self, MonoidError> {
        for g in &gens {
            if !ambient.contains(g)? {
                return Err(MonoidError::NotInMonoid(g.to_string()));
            }
        }
        let gens = minimize(&ambient, gens);
        Ok(MonomialIdeal { ambient, gens })
    }

    pub fn unit(ambient: Arc<ToricMonoid>) -> Self {
        let r = ambient.rank();
        MonomialIdeal {
            ambient,
            gens: vec![LatticePoint::zero(r)],
        }
    }

    pub fn ambient(&self) -> &Arc<ToricMonoid> {
        &self.ambient
    }

    pub fn gens(&self) -> &[LatticePoint] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(|g| g.is_zero())
    }

    pub fn contains(&self, q: &LatticePoint) -> bool {
        self.gens.iter().any(|g| self.ambient.divides(g, q))
    }

    /// Generators that are vertices of the Newton polyhedron.
    pub fn newton_vertices(&self) -> Vec<LatticePoint> {
        self.gens
            .iter()
            .filter(|g| self.ambient.is_newton_vertex(g, &self.gens))
            .cloned()
            .collect()
    }
}

fn minimize(m: &ToricMonoid, gens: Vec<LatticePoint>) -> Vec<LatticePoint> {
    let mut g: Vec<LatticePoint> = gens;
    g.sort();
    g.dedup();
    let out: Vec<LatticePoint> = g
        .iter()
        .filter(|x| !g.iter().any(|y| y != *x && m.divides(y, x)))
        .cloned()
        .collect();
    out
}

/// `N^sat`: lattice points of `conv(gens N) + C`, returned by minimal generators.
pub fn monomial_saturation(n: &MonomialIdeal) -> Result<MonomialIdeal, MonoidError> {
    if n.is_zero() {
        return Err(MonoidError::ZeroIdeal);
    }
    if n.gens.len() == 1 {
        return Ok(n.clone());
    }
    let gens = region_generators(&n.ambient, &n.gens)?;
    Ok(MonomialIdeal {
        ambient: n.ambient.clone(),
        gens: minimize(&n.ambient, gens),
    })
}

/// Membership in `N^sat` decided by the LP backend.
pub fn saturation_member_lp(n: &MonomialIdeal, q: &LatticePoint) -> bool {
    let m = &n.ambient;
    if m.lattice_coords(q).is_none() {
        return false;
    }
    let mut a: Vec<Vec<Rational>> = (0..m.rank())
        .map(|k| {
            n.gens
                .iter()
                .map(|p| p.0[k].clone())
                .chain(m.rays().iter().map(|r| r.0[k].clone()))
                .collect()
        })
        .collect();
    let mut conv_row = vec![Rational::one(); n.gens.len()];
    conv_row.extend(std::iter::repeat_n(Rational::zero(), m.rays().len()));
    a.push(conv_row);
    let mut b = q.0.clone();
    b.push(Rational::one());
    lp_feasible(&a, &b)
}

/// `N^{1/a}` in the refined monoid `(1/a)L ∩ C`.
pub fn kummer_root(n: &MonomialIdeal, a: u64) -> Result<MonomialIdeal, MonoidError> {
    if a == 1 {
        return Ok(n.clone());
    }
    let refined = Arc::new(n.ambient.refine(a)?);
    let inv = Rational::new(BigInt::one(), BigInt::from(a));
    let gens = n.gens.iter().map(|g| g.scale(&inv)).collect();
    MonomialIdeal::new(refined, gens)
}

/// Returns `q` when `N^sat = (q)`.
pub fn is_principal_invertible(n: &MonomialIdeal) -> Option<LatticePoint> {
    n.gens
        .iter()
        .find(|g| n.gens.iter().all(|o| n.ambient.divides(g, o)))
        .cloned()
}

/// The Kummer monomial `u^q` with `q ∈ (1/d)M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KummerMonomial {
    pub exponent: LatticePoint,
    pub denom: u64,
}

impl KummerMonomial {
    pub fn new(
        ambient: &ToricMonoid,
        exponent: LatticePoint,
        denom: u64,
    ) -> Result<Self, MonoidError> {
        let scaled = exponent.scale(&Rational::from_integer(BigInt::from(denom)));
        if !ambient.contains(&scaled)? {
            return Err(MonoidError::NotInMonoid(exponent.to_string()));
        }
        Ok(KummerMonomial { exponent, denom })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::ratio;

    pub(crate) fn half_lattice_quadrant() -> ToricMonoid {
        ToricMonoid::new(
            2,
            BigInt::from(2),
            vec![
                vec![BigInt::from(2), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::from(2)],
                vec![BigInt::from(1), BigInt::from(1)],
            ],
            vec![
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
            ],
            vec![],
            vec![],
        )
        .unwrap()
    }

    fn pt(v: &[(i64, i64)]) -> LatticePoint {
        LatticePoint(v.iter().map(|&(n, d)| ratio(n, d)).collect())
    }

    #[test]
    fn contains_examples() {
        let n2 = ToricMonoid::free(2, vec![]).unwrap();
        assert!(n2.contains(&LatticePoint::zero(2)).unwrap());
        assert!(n2.contains(&LatticePoint::from_i64(&[1, 1])).unwrap());
        let m = half_lattice_quadrant();
        assert!(!m.contains(&pt(&[(1, 2), (0, 1)])).unwrap());
        assert!(m.contains(&pt(&[(1, 2), (1, 2)])).unwrap());
        assert!(m.contains(&pt(&[(1, 1)])).is_err());
    }

    #[test]
    fn hilbert_basis_examples() {
        let n2 = ToricMonoid::free(2, vec![]).unwrap();
        let hb: BTreeSet<_> = n2.hilbert_basis().unwrap().iter().cloned().collect();
        assert_eq!(
            hb,
            [
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1])
            ]
            .into_iter()
            .collect()
        );
        let m = half_lattice_quadrant();
        let hb: BTreeSet<_> = m.hilbert_basis().unwrap().iter().cloned().collect();
        assert_eq!(
            hb,
            [
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
                pt(&[(1, 2), (1, 2)])
            ]
            .into_iter()
            .collect()
        );
        let c = ToricMonoid::new(
            2,
            BigInt::one(),
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[1, 2]),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let hb: BTreeSet<_> = c.hilbert_basis().unwrap().iter().cloned().collect();
        assert_eq!(
            hb,
            [
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[1, 1]),
                LatticePoint::from_i64(&[1, 2])
            ]
            .into_iter()
            .collect()
        );
    }

    #[test]
    fn saturation_examples() {
        let n2 = Arc::new(ToricMonoid::free(2, vec![]).unwrap());
        let p = MonomialIdeal::new(n2.clone(), vec![LatticePoint::from_i64(&[1, 2])]).unwrap();
        assert_eq!(monomial_saturation(&p).unwrap(), p);
        let n = MonomialIdeal::new(
            n2.clone(),
            vec![
                LatticePoint::from_i64(&[2, 0]),
                LatticePoint::from_i64(&[0, 2]),
            ],
        )
        .unwrap();
        let s = monomial_saturation(&n).unwrap();
        assert_eq!(
            s.gens(),
            &[
                LatticePoint::from_i64(&[0, 2]),
                LatticePoint::from_i64(&[1, 1]),
                LatticePoint::from_i64(&[2, 0])
            ]
        );
        assert!(!s.contains(&LatticePoint::from_i64(&[1, 0])));
        assert!(!saturation_member_lp(&n, &LatticePoint::from_i64(&[1, 0])));
        assert!(monomial_saturation(&MonomialIdeal::new(n2, vec![]).unwrap()).is_err());
    }

    #[test]
    fn kummer_root_examples() {
        let n1 = Arc::new(ToricMonoid::free(1, vec![]).unwrap());
        let n = MonomialIdeal::new(n1.clone(), vec![LatticePoint::from_i64(&[2])]).unwrap();
        assert_eq!(kummer_root(&n, 1).unwrap(), n);
        let r = kummer_root(&n, 2).unwrap();
        assert_eq!(r.gens(), &[LatticePoint::from_i64(&[1])]);
        let n2 = Arc::new(ToricMonoid::free(2, vec![]).unwrap());
        let m = MonomialIdeal::new(
            n2,
            vec![
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
            ],
        )
        .unwrap();
        let r = kummer_root(&m, 2).unwrap();
        assert_eq!(r.gens(), &[pt(&[(0, 1), (1, 2)]), pt(&[(1, 2), (0, 1)])]);
        assert_eq!(r.ambient().denom(), &BigInt::from(2));
    }

    #[test]
    fn principal_examples() {
        let n2 = Arc::new(ToricMonoid::free(2, vec![]).unwrap());
        let q = LatticePoint::from_i64(&[1, 1]);
        let n = MonomialIdeal::new(n2.clone(), vec![q.clone()]).unwrap();
        assert_eq!(is_principal_invertible(&n), Some(q.clone()));
        let n = MonomialIdeal::new(
            n2.clone(),
            vec![
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(is_principal_invertible(&n), None);
        let n = MonomialIdeal::new(n2, vec![q.clone(), LatticePoint::from_i64(&[2, 1])]).unwrap();
        assert_eq!(is_principal_invertible(&n), Some(q));
    }

    #[test]
    fn relative_rank_and_extend() {
        let n2 = ToricMonoid::free(2, vec![]).unwrap();
        assert_eq!(n2.relative_rank(), 2);
        let full = n2
            .extend_base(&[
                LatticePoint::from_i64(&[1, 0]),
                LatticePoint::from_i64(&[0, 1]),
            ])
            .unwrap();
        assert_eq!(full.relative_rank(), 0);
        let diag = n2.extend_base(&[LatticePoint::from_i64(&[1, 1])]).unwrap();
        assert_eq!(diag.relative_rank(), 1);
        assert_eq!(n2.extend_base(&[]).unwrap(), n2);
        let n1 = ToricMonoid::free(1, vec![]).unwrap();
        assert_eq!(n1.relative_rank(), 1);
        assert_eq!(
            n1.extend_base(&[LatticePoint::from_i64(&[1])])
                .unwrap()
                .relative_rank(),
            0
        );
    }

    #[test]
    fn sharpness_enforced() {
        let r = ToricMonoid::new(
            1,
            BigInt::one(),
            vec![vec![BigInt::one()]],
            vec![LatticePoint::from_i64(&[1]), LatticePoint::from_i64(&[-1])],
            vec![],
            vec![],
        );
        assert_eq!(r.unwrap_err(), MonoidError::NotSharp);
    }

    #[test]
    fn triangulation_of_square_cone() {
        let rays = vec![
            vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(1, 1), ratio(1, 1)],
            vec![ratio(-1, 1), ratio(0, 1), ratio(1, 1)],
            vec![ratio(0, 1), ratio(-1, 1), ratio(1, 1)],
        ];
        let t = triangulate(&rays);
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|s| s.len() == 3));
    }
}
