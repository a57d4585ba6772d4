//! Order reduction of marked ideals by Kummer blow-ups along maximal contact hypersurfaces,
//! principalization, invariants, base enlargement and extraction of embedded resolutions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::blowup::{
    canonical_center, lift_derivations, make_charts, transform_derivation, BlowupChart,
    BlowupError, Center, Selector,
};
use crate::chartring::{ChartRing, Ideal, RelationTag, RingError};
use crate::derivations::{
    contract, d_saturation, derive_ideal, extend_to_aux, standard_derivations, DerivError,
    Derivation, DerivationSet,
};
use crate::element::RingElement;
use crate::exactmath::Rational;
use crate::marked::{
    balanced_decomposition, coefficient_ideal, diagonal_coefficient_ideal, support_empty, LogOrder,
    MarkedError, MarkedIdeal,
};
use crate::monoid::{is_principal_invertible, monomial_saturation, LatticePoint, MonoidError};

pub const DEFAULT_MAX_DEPTH: usize = 32;
/// Valid contacts collected per node before choosing.
pub const CONTACT_CHOICE_CAP: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Deriv(#[from] DerivError),
    #[error(transparent)]
    Marked(#[from] MarkedError),
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("the zero ideal cannot be principalized")]
    ZeroIdeal,
    #[error("marked ideals need a positive weight")]
    ZeroWeight,
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// A chart ring with its derivations and a marked ideal.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ring: ChartRing,
    pub derivations: DerivationSet,
    pub marked: MarkedIdeal,
}

impl Problem {
    pub fn new(ring: ChartRing, marked: MarkedIdeal) -> Result<Self, DriverError> {
        let derivations = standard_derivations(&ring)?;
        Ok(Problem {
            ring,
            derivations,
            marked,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DriverOptions {
    pub max_depth: usize,
    /// Index among the valid maximal contacts found at a node (clamped).
    pub contact_choice: usize,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            contact_choice: 0,
        }
    }
}

/// An entry of the invariant sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum InvEntry {
    Value(Rational),
    Zero,
    Infinity,
}

impl fmt::Display for InvEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvEntry::Value(v) => write!(f, "{}", crate::exactmath::fmt_rational(v)),
            InvEntry::Zero => write!(f, "0"),
            InvEntry::Infinity => write!(f, "inf"),
        }
    }
}

/// How a chart arises from its parent.
#[derive(Clone, Debug)]
pub enum Edge {
    Blowup {
        selector: Selector,
        exceptional: LatticePoint,
        inertia: (u64, Vec<LatticePoint>),
        substitutions: Vec<RingElement>,
    },
    Localize {
        element: RingElement,
    },
}

/// What happened at a chart.
#[derive(Clone, Debug)]
pub enum NodeAction {
    Blowup { center: Center, whole_chart: bool },
    Localize { cover: Vec<RingElement> },
    Leaf(LeafStatus),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafStatus {
    Resolved(LeafCheck),
    Fail {
        obstruction: Ideal,
        stack: Vec<RingElement>,
    },
    DepthCap,
    Internal(String),
    NoStageFound,
}

/// Checks performed on a resolved chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafCheck {
    /// The controlled transform of the input is the unit ideal.
    pub controlled_unit: bool,
    /// The full transform of the input is a monomial ideal.
    pub monomial: bool,
    /// ... and that monomial ideal is invertible.
    pub invertible: bool,
}

#[derive(Clone, Debug)]
pub struct ChartNode {
    pub id: String,
    pub depth: usize,
    pub edge: Option<Edge>,
    pub ring: ChartRing,
    pub invariant: Vec<InvEntry>,
    /// Controlled transform of the input marked ideal on entry (reduced generators).
    pub transform: Vec<RingElement>,
    pub action: NodeAction,
    /// The strict transform of the tracked subvariety is the center here.
    pub resolution_stage: bool,
    /// Most valid maximal contacts offered at this chart (0 if none was searched).
    pub contact_options: usize,
    pub children: Vec<ChartNode>,
}

impl ChartNode {
    /// Nodes in depth-first order.
    pub fn walk(&self) -> Vec<&ChartNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    pub fn leaves(&self) -> Vec<&ChartNode> {
        self.walk()
            .into_iter()
            .filter(|n| n.children.is_empty())
            .collect()
    }

    pub fn action_summary(&self) -> String {
        match &self.action {
            NodeAction::Blowup { center, .. } => format!("blowup {center}"),
            NodeAction::Localize { cover } => {
                let c: Vec<String> = cover.iter().map(|g| g.to_string()).collect();
                format!("localize {}", c.join(", "))
            }
            NodeAction::Leaf(s) => format!("{s:?}"),
        }
    }

    pub fn depth_reached(&self) -> usize {
        self.walk().iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Centers in depth-first order.
    pub fn centers(&self) -> Vec<&Center> {
        self.walk()
            .into_iter()
            .filter_map(|n| match &n.action {
                NodeAction::Blowup { center, .. } => Some(center),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Resolved,
    Fail {
        chart: String,
        obstruction: Ideal,
        stack: Vec<RingElement>,
    },
    DepthCap {
        chart: String,
    },
    Internal {
        chart: String,
        message: String,
    },
    NoStageFound {
        chart: String,
    },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Resolved => 0,
            RunStatus::Fail { .. } => 2,
            RunStatus::DepthCap { .. } => 4,
            RunStatus::Internal { .. } => 5,
            RunStatus::NoStageFound { .. } => 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub root: ChartNode,
    pub status: RunStatus,
}

fn status_of(root: &ChartNode) -> RunStatus {
    for n in root.walk() {
        if let NodeAction::Leaf(s) = &n.action {
            let chart = n.id.clone();
            match s {
                LeafStatus::Resolved(_) => {}
                LeafStatus::Fail { obstruction, stack } => {
                    return RunStatus::Fail {
                        chart,
                        obstruction: obstruction.clone(),
                        stack: stack.clone(),
                    }
                }
                LeafStatus::DepthCap => return RunStatus::DepthCap { chart },
                LeafStatus::Internal(m) => {
                    return RunStatus::Internal {
                        chart,
                        message: m.clone(),
                    }
                }
                LeafStatus::NoStageFound => return RunStatus::NoStageFound { chart },
            }
        }
    }
    RunStatus::Resolved
}

/// A maximal contact hypersurface `h` with `w(h) ≡ 1` modulo `h`.
#[derive(Clone, Debug)]
struct Contact {
    element: RingElement,
    witness: Derivation,
}

#[derive(Clone, Debug)]
enum Frame {
    /// Order reduction of a general marked ideal at a contact level.
    General {
        level: usize,
        marked: MarkedIdeal,
        started: bool,
        last_b: Option<u64>,
    },
    /// Order reduction of a maximal-order marked ideal, delegated to the next level.
    MaxOrder { level: usize, marked: MarkedIdeal },
}

impl Frame {
    fn level(&self) -> usize {
        match self {
            Frame::General { level, .. } | Frame::MaxOrder { level, .. } => *level,
        }
    }

    fn marked(&self) -> &MarkedIdeal {
        match self {
            Frame::General { marked, .. } | Frame::MaxOrder { marked, .. } => marked,
        }
    }

    fn marked_mut(&mut self) -> &mut MarkedIdeal {
        match self {
            Frame::General { marked, .. } | Frame::MaxOrder { marked, .. } => marked,
        }
    }
}

/// The state carried along one branch of the chart tree.
#[derive(Clone, Debug)]
struct NodeState {
    ring: ChartRing,
    /// Derivations at the deepest contact level.
    derivs: DerivationSet,
    contacts: Vec<Contact>,
    frames: Vec<Frame>,
    /// Full transform of the input ideal.
    full: Ideal,
    /// Strict transform of the tracked subvariety, while tracking.
    strict: Option<Ideal>,
    /// Most valid contacts offered by a search at this chart.
    contact_options: usize,
}

enum Step {
    BlowUp { center: Center, whole_chart: bool },
    Localize(Vec<RingElement>),
    Resolved,
    Fail { obstruction: Ideal },
}

impl NodeState {
    fn level_ring(&self, k: usize) -> Result<ChartRing, DriverError> {
        let mut r = self.ring.clone();
        for c in &self.contacts[..k] {
            r = r.with_relation(c.element.clone(), RelationTag::User)?;
        }
        Ok(r)
    }

    fn level_derivs(&self, k: usize) -> DerivationSet {
        let mut gens = self.derivs.gens().to_vec();
        gens.extend(self.contacts[k..].iter().map(|c| c.witness.clone()));
        DerivationSet::new(gens)
    }

    fn contact_elements(&self) -> Vec<RingElement> {
        self.contacts.iter().map(|c| c.element.clone()).collect()
    }

    fn invariant(&self) -> Vec<InvEntry> {
        self.frames
            .iter()
            .filter_map(|f| match f {
                Frame::General {
                    marked,
                    last_b: Some(b),
                    ..
                } => Some(InvEntry::Value(Rational::new(
                    BigInt::from(*b),
                    BigInt::from(marked.weight),
                ))),
                _ => None,
            })
            .collect()
    }

    /// Leaves the contact level `k + 1` (the frames above it are already gone).
    fn drop_contacts_from(&mut self, k: usize) {
        let mut gens = self.derivs.gens().to_vec();
        gens.extend(self.contacts[k..].iter().map(|c| c.witness.clone()));
        self.derivs = DerivationSet::new(gens);
        self.contacts.truncate(k);
    }

    /// Kummer center with monomials `u^{w_j}`, `w_j = q_j / a`, using the least denominator.
    fn center_for(&self, qs: &[LatticePoint], a: u64) -> Result<Center, DriverError> {
        let m = self.ring.monoid();
        let inv_a = Rational::new(BigInt::one(), BigInt::from(a));
        let ws: Vec<LatticePoint> = qs.iter().map(|q| q.scale(&inv_a)).collect();
        let mut d = 1u64;
        while d < a
            && !ws.iter().all(|w| {
                m.lattice_coords(&w.scale(&Rational::from_integer(BigInt::from(d))))
                    .is_some()
            })
        {
            d += 1;
        }
        let dr = Rational::from_integer(BigInt::from(d));
        let mon: Vec<LatticePoint> = ws.iter().map(|w| w.scale(&dr)).collect();
        Ok(Center::new(self.contact_elements(), mon, d)?)
    }

    fn advance(&mut self, opts: &DriverOptions) -> Result<Step, DriverError> {
        loop {
            let Some(top) = self.frames.last().cloned() else {
                return Ok(Step::Resolved);
            };
            match top {
                Frame::General {
                    level,
                    marked,
                    started: false,
                    ..
                } => {
                    let lr = self.level_ring(level)?;
                    if lr.is_zero_ideal(&marked.ideal)? {
                        if level == 0 {
                            return Err(DriverError::ZeroIdeal);
                        }
                        let center = Center::new(self.contact_elements(), Vec::new(), 1)?;
                        return Ok(Step::BlowUp {
                            center,
                            whole_chart: true,
                        });
                    }
                    if let Some(Frame::General { started, .. }) = self.frames.last_mut() {
                        *started = true;
                    }
                    let sat = monomial_saturation(&lr.monomial_part(&marked.ideal)?)?;
                    if !sat.is_unit() {
                        let center = self.center_for(&sat.newton_vertices(), marked.weight)?;
                        return Ok(Step::BlowUp {
                            center,
                            whole_chart: false,
                        });
                    }
                }
                Frame::General {
                    level,
                    marked,
                    started: true,
                    last_b,
                } => {
                    let lr = self.level_ring(level)?;
                    let f = self.level_derivs(level);
                    let bal = match balanced_decomposition(&lr, &f, &marked.ideal) {
                        Ok(b) => b,
                        Err(MarkedError::NotBalanced(_)) => {
                            return Ok(Step::Fail {
                                obstruction: d_saturation(&lr, &f, &marked.ideal)?,
                            })
                        }
                        Err(e) => return Err(e.into()),
                    };
                    let b = match bal.order {
                        LogOrder::Finite(b) => b,
                        LogOrder::Infinite(obstruction) => return Ok(Step::Fail { obstruction }),
                    };
                    if b >= marked.weight {
                        if let Some(lb) = last_b {
                            if b >= lb {
                                return Err(DriverError::Invariant(format!(
                                    "clean order {b} did not drop below {lb} at level {level}"
                                )));
                            }
                        }
                        if let Some(Frame::General { last_b, .. }) = self.frames.last_mut() {
                            *last_b = Some(b);
                        }
                        self.frames.push(Frame::MaxOrder {
                            level,
                            marked: MarkedIdeal::new(bal.clean, b),
                        });
                    } else if !bal.monomial.is_zero() {
                        let center =
                            self.center_for(std::slice::from_ref(&bal.monomial), marked.weight)?;
                        return Ok(Step::BlowUp {
                            center,
                            whole_chart: false,
                        });
                    } else {
                        self.frames.pop();
                        if level > 0 {
                            match self.frames.pop() {
                                Some(Frame::MaxOrder { .. }) => {}
                                _ => {
                                    return Err(DriverError::Invariant(
                                        "frame stack out of order".into(),
                                    ))
                                }
                            }
                            self.drop_contacts_from(level - 1);
                        }
                    }
                }
                Frame::MaxOrder { level, marked } => {
                    let lr = self.level_ring(level)?;
                    let f = self.level_derivs(level);
                    if support_empty(&lr, &f, &marked)? {
                        self.frames.pop();
                        continue;
                    }
                    match find_contact(
                        &lr,
                        &self.ring,
                        &f,
                        &marked,
                        &self.contact_elements(),
                        opts.contact_choice,
                    )? {
                        ContactSearch::Found {
                            element,
                            witness,
                            options,
                        } => {
                            self.contact_options = self.contact_options.max(options);
                            let coef = driver_coefficient_ideal(&lr, &f, &marked)?;
                            let next = lr.with_relation(element.clone(), RelationTag::User)?;
                            let restricted = Ideal::new(
                                coef.ideal
                                    .gens()
                                    .iter()
                                    .map(|g| next.normal_form(g))
                                    .collect::<Result<_, _>>()?,
                            );
                            self.derivs =
                                contract(&self.derivs, &element, &witness, &Rational::one(), None)?;
                            let norm: Vec<Derivation> = self
                                .derivs
                                .gens()
                                .iter()
                                .map(|d| d.normalize(&self.ring))
                                .collect::<Result<_, _>>()?;
                            self.derivs = DerivationSet::new(norm);
                            self.contacts.push(Contact { element, witness });
                            self.frames.push(Frame::General {
                                level: level + 1,
                                marked: MarkedIdeal::new(restricted, coef.weight),
                                started: false,
                                last_b: None,
                            });
                        }
                        ContactSearch::Cover(gs) => return Ok(Step::Localize(gs)),
                    }
                }
            }
        }
    }

    fn apply_chart(&self, center: &Center, chart: &BlowupChart) -> Result<NodeState, DriverError> {
        let ring = chart.ring.clone();
        let mut contacts = Vec::new();
        for c in &self.contacts {
            contacts.push(Contact {
                element: chart.strict_transform_element(&c.element)?.monic(),
                witness: transform_derivation(chart, center, &c.witness)?,
            });
        }
        let mut st = NodeState {
            ring,
            derivs: lift_derivations(chart, center, &self.derivs)?,
            contacts,
            frames: self.frames.clone(),
            full: chart.pullback_ideal(&self.full),
            strict: None,
            contact_options: 0,
        };
        if let Some(z) = &self.strict {
            st.strict = Some(
                st.ring
                    .saturate_at_monomial(&chart.pullback_ideal(z), &chart.exceptional)?,
            );
        }
        // contact levels whose hypersurface left the chart
        let mut vacuous = None;
        for j in 1..=st.contacts.len() {
            let cs = Ideal::new(st.contacts[..j].iter().map(|c| c.element.clone()).collect());
            if st.ring.is_unit(&cs)? {
                vacuous = Some(j);
                break;
            }
        }
        if let Some(j) = vacuous {
            st.frames.truncate(2 * j - 1);
            st.drop_contacts_from(j - 1);
        }
        for i in 0..st.frames.len() {
            let level = st.frames[i].level();
            let lr = st.level_ring(level)?;
            let m = st.frames[i].marked().clone();
            let q = chart
                .exceptional
                .scale(&Rational::from_integer(BigInt::from(m.weight)));
            let mut gens = Vec::new();
            for g in m.ideal.gens() {
                let p = lr.normal_form(&chart.pullback(g))?;
                gens.push(lr.divide_by_monomial(&p, &q).map_err(|e| match e {
                    RingError::NotDivisible { element, divisor } => DriverError::Invariant(format!(
                        "center not admissible at level {level}: {element} not divisible by u{divisor}"
                    )),
                    e => e.into(),
                })?);
            }
            *st.frames[i].marked_mut() = MarkedIdeal::new(Ideal::new(gens), m.weight);
        }
        Ok(st)
    }

    fn apply_localization(&self, g: &RingElement) -> Result<NodeState, DriverError> {
        let (ring, _) = self.ring.localize(g)?;
        let (n, r) = (ring.nvars(), ring.rank());
        let ext_d = |d: &Derivation| {
            let mut e = d.extend(n, r);
            extend_to_aux(&ring, &mut e);
            e
        };
        let ext_i = |i: &Ideal| i.map(|f| f.extend(n, r));
        let mut frames = self.frames.clone();
        for f in &mut frames {
            let m = f.marked().clone();
            *f.marked_mut() = MarkedIdeal::new(ext_i(&m.ideal), m.weight);
        }
        Ok(NodeState {
            derivs: DerivationSet::new(self.derivs.gens().iter().map(ext_d).collect()),
            contacts: self
                .contacts
                .iter()
                .map(|c| Contact {
                    element: c.element.extend(n, r),
                    witness: ext_d(&c.witness),
                })
                .collect(),
            frames,
            full: ext_i(&self.full),
            strict: self.strict.as_ref().map(ext_i),
            contact_options: 0,
            ring,
        })
    }

    fn root_transform(&self) -> Result<Vec<RingElement>, DriverError> {
        match self.frames.first() {
            Some(f) => Ok(self.ring.canonical_generators(&f.marked().ideal)?),
            None => Ok(vec![self.ring.one()]),
        }
    }

    fn leaf_check(&self) -> Result<LeafCheck, DriverError> {
        let controlled_unit = self.frames.is_empty();
        let mp = self.ring.monomial_part(&self.full)?;
        let monomial = self
            .ring
            .ideal_equal(&self.ring.monomial_ideal(&mp), &self.full)?;
        let invertible = monomial
            && is_principal_invertible(&monomial_saturation(&mp)?).is_some()
            && mp.gens().len() == 1;
        Ok(LeafCheck {
            controlled_unit,
            monomial,
            invertible,
        })
    }
}

/// Largest weight for which the driver uses the exact homogenized coefficient ideal; above it the
/// number of minimal tuples explodes and the integrally equivalent diagonal form is used.
pub const EXACT_COEFFICIENT_WEIGHT: u64 = 3;

/// Coefficient ideal as used by the driver.
pub fn driver_coefficient_ideal(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
) -> Result<MarkedIdeal, MarkedError> {
    if m.weight <= EXACT_COEFFICIENT_WEIGHT {
        coefficient_ideal(ring, f, m)
    } else {
        diagonal_coefficient_ideal(ring, f, m)
    }
}

/// Result of the maximal contact search.
#[derive(Clone, Debug)]
pub enum ContactSearch {
    Found {
        element: RingElement,
        witness: Derivation,
        /// Number of valid contacts found (capped).
        options: usize,
    },
    /// Elements generating the unit ideal; a contact exists on each localization.
    Cover(Vec<RingElement>),
}

/// Contacts paired with the derivation that witnesses each one.
pub type WitnessedContacts = Vec<(RingElement, Derivation)>;

/// Candidate contacts in `T = F^{(≤b-1)}(I)` with their witnesses, in canonical order.
pub fn contact_candidates(
    ring: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
    cap: usize,
) -> Result<(WitnessedContacts, Vec<RingElement>), DriverError> {
    let t = derive_ideal(ring, f, &m.ideal, m.weight.saturating_sub(1) as usize)?;
    let gb = ring.reduced_generators(&t)?;
    let mut cands: Vec<RingElement> = Vec::new();
    let push = |h: RingElement, cands: &mut Vec<RingElement>| {
        if !h.is_zero() && h.as_constant().is_none() && !cands.contains(&h) {
            cands.push(h);
        }
    };
    for h in &gb {
        push(h.monic(), &mut cands);
    }
    for h in t.gens() {
        push(h.monic(), &mut cands);
    }
    for i in 0..gb.len() {
        for j in i + 1..gb.len() {
            push(gb[i].add(&gb[j]).monic(), &mut cands);
        }
    }
    // A constant derivative makes V(h) a graph over the other coordinates. A contact whose
    // derivative is only invertible modulo h may cut out several components; the first one is
    // used when no graph exists.
    let mut valid = Vec::new();
    for h in &cands {
        let extra = Ideal::new(vec![h.clone()]);
        for d in f.gens() {
            if let Some(c) = ring.normal_form_mod(&d.apply(h), &extra)?.as_constant() {
                if !c.is_zero() {
                    valid.push((h.clone(), d.times(&ring.constant(c.recip()))));
                    break;
                }
            }
        }
        if valid.len() >= cap {
            return Ok((valid, gb));
        }
    }
    if !valid.is_empty() {
        return Ok((valid, gb));
    }
    for h in &cands {
        let extra = Ideal::new(vec![h.clone()]);
        for d in f.gens() {
            let dh = ring.normal_form_mod(&d.apply(h), &extra)?;
            if dh.is_zero() {
                continue;
            }
            if let Some(g) = ring.inverse_mod(&dh, &extra)? {
                return Ok((vec![(h.clone(), d.times(&g))], gb));
            }
        }
    }
    Ok((valid, gb))
}

/// A maximal contact for a maximal-order marked ideal, or a localization cover.
pub fn find_contact(
    ring: &ChartRing,
    ambient: &ChartRing,
    f: &DerivationSet,
    m: &MarkedIdeal,
    contacts: &[RingElement],
    choice: usize,
) -> Result<ContactSearch, DriverError> {
    let (valid, gb) = contact_candidates(ring, f, m, CONTACT_CHOICE_CAP)?;
    if !valid.is_empty() {
        let (element, witness) = valid[choice.min(valid.len() - 1)].clone();
        let witness = witness.normalize(ambient)?;
        return Ok(ContactSearch::Found {
            element,
            witness,
            options: valid.len(),
        });
    }
    let mut pool: Vec<RingElement> = Vec::new();
    for h in &gb {
        for d in f.gens() {
            pool.push(ring.normal_form(&d.apply(h))?);
        }
    }
    pool.extend(gb.iter().cloned());
    pool.extend(contacts.iter().cloned());
    let mut chosen: Vec<RingElement> = Vec::new();
    for g in pool {
        if g.is_zero() || chosen.contains(&g) {
            continue;
        }
        if !chosen.is_empty() && ambient.member(&g, &Ideal::new(chosen.clone()))? {
            continue;
        }
        chosen.push(g);
        if ambient.is_unit(&Ideal::new(chosen.clone()))? {
            return Ok(ContactSearch::Cover(chosen));
        }
    }
    Err(DriverError::Invariant(format!(
        "no maximal contact and no cover for {m}"
    )))
}

fn expand(
    st: NodeState,
    id: String,
    depth: usize,
    edge: Option<Edge>,
    opts: &DriverOptions,
) -> ChartNode {
    let ring = st.ring.clone();
    let mut node = ChartNode {
        id: id.clone(),
        depth,
        edge,
        ring: ring.clone(),
        invariant: Vec::new(),
        transform: Vec::new(),
        action: NodeAction::Leaf(LeafStatus::DepthCap),
        resolution_stage: false,
        contact_options: 0,
        children: Vec::new(),
    };
    let mut st = st;
    let result = (|| -> Result<(), DriverError> {
        node.transform = st.root_transform()?;
        let step = st.advance(opts);
        node.contact_options = st.contact_options;
        let step = step?;
        node.invariant = st.invariant();
        match step {
            Step::Resolved => {
                node.invariant = vec![InvEntry::Zero];
                let check = st.leaf_check()?;
                node.action = match &st.strict {
                    Some(z) if !st.ring.is_unit(z)? => NodeAction::Leaf(LeafStatus::NoStageFound),
                    _ => NodeAction::Leaf(LeafStatus::Resolved(check)),
                };
            }
            Step::Fail { obstruction } => {
                let obstruction = Ideal::new(st.ring.canonical_generators(&obstruction)?);
                node.action = NodeAction::Leaf(LeafStatus::Fail {
                    obstruction,
                    stack: st.contact_elements(),
                });
            }
            Step::BlowUp {
                center,
                whole_chart,
            } => {
                if whole_chart {
                    node.invariant.push(InvEntry::Infinity);
                }
                if depth >= opts.max_depth {
                    node.action = NodeAction::Leaf(LeafStatus::DepthCap);
                    return Ok(());
                }
                let center = canonical_center(&st.ring, &center)
                    .ok()
                    .filter(|c| c.t_part.len() == center.t_part.len())
                    .unwrap_or(center);
                if let Some(z) = &st.strict {
                    if !center.t_part.is_empty()
                        && st.ring.ideal_equal(z, &Ideal::new(center.t_part.clone()))?
                    {
                        node.resolution_stage = true;
                        st.strict = None;
                    }
                }
                let charts = make_charts(&st.ring, &center)?;
                let states: Vec<Result<NodeState, DriverError>> = charts
                    .par_iter()
                    .map(|ch| st.apply_chart(&center, ch))
                    .collect();
                let mut pending = Vec::new();
                for (ch, s) in charts.into_iter().zip(states) {
                    let edge = Edge::Blowup {
                        selector: ch.selector,
                        exceptional: ch.exceptional.clone(),
                        inertia: ch.inertia.clone(),
                        substitutions: ch.images.clone(),
                    };
                    pending.push((format!("{id}.{}", ch.selector), edge, s?));
                }
                node.children = pending
                    .into_par_iter()
                    .map(|(cid, e, s)| expand(s, cid, depth + 1, Some(e), opts))
                    .collect();
                node.action = NodeAction::Blowup {
                    center,
                    whole_chart,
                };
            }
            Step::Localize(cover) => {
                if depth >= opts.max_depth {
                    node.action = NodeAction::Leaf(LeafStatus::DepthCap);
                    return Ok(());
                }
                let mut pending = Vec::new();
                for (i, g) in cover.iter().enumerate() {
                    pending.push((
                        format!("{id}.d{}", i + 1),
                        g.clone(),
                        st.apply_localization(g)?,
                    ));
                }
                node.children = pending
                    .into_par_iter()
                    .map(|(cid, g, s)| {
                        expand(s, cid, depth + 1, Some(Edge::Localize { element: g }), opts)
                    })
                    .collect();
                node.action = NodeAction::Localize { cover };
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        node.children.clear();
        node.action = NodeAction::Leaf(LeafStatus::Internal(e.to_string()));
    }
    node
}

/// Order reduction of `(I, a)` with the given derivations.
pub fn order_reduction(p: &Problem, opts: &DriverOptions) -> Result<Run, DriverError> {
    run_with(p, None, opts)
}

fn run_with(p: &Problem, track: Option<Ideal>, opts: &DriverOptions) -> Result<Run, DriverError> {
    if p.marked.weight == 0 {
        return Err(DriverError::ZeroWeight);
    }
    if p.ring.is_zero_ideal(&p.marked.ideal)? {
        return Err(DriverError::ZeroIdeal);
    }
    let st = NodeState {
        ring: p.ring.clone(),
        derivs: p.derivations.clone(),
        contacts: Vec::new(),
        frames: vec![Frame::General {
            level: 0,
            marked: p.marked.clone(),
            started: false,
            last_b: None,
        }],
        full: p.marked.ideal.clone(),
        strict: track,
        contact_options: 0,
    };
    let root = expand(st, "0".into(), 0, None, opts);
    let status = status_of(&root);
    Ok(Run { root, status })
}

/// Principalization of `I`: order reduction of `(I, 1)`.
pub fn principalize(
    ring: &ChartRing,
    ideal: &Ideal,
    opts: &DriverOptions,
) -> Result<Run, DriverError> {
    let p = Problem::new(ring.clone(), MarkedIdeal::new(ideal.clone(), 1))?;
    order_reduction(&p, opts)
}

/// Principalization of `Z` tracking its strict transform; the chart where the strict transform
/// is blown up as a center is marked as the resolution stage.
pub fn desingularize(
    ring: &ChartRing,
    z: &Ideal,
    opts: &DriverOptions,
) -> Result<Run, DriverError> {
    let p = Problem::new(ring.clone(), MarkedIdeal::new(z.clone(), 1))?;
    run_with(&p, Some(ring.reduce_ideal(z)?), opts)
}

/// Enlarges the base by the given lattice points and reruns order reduction.
pub fn base_extend_and_retry(
    p: &Problem,
    new_base: &[LatticePoint],
    opts: &DriverOptions,
) -> Result<(Problem, Run), DriverError> {
    let monoid = p.ring.monoid().extend_base(new_base)?;
    let ring = p.ring.with_monoid(Arc::new(monoid));
    let q = Problem::new(ring, p.marked.clone())?;
    let run = order_reduction(&q, opts)?;
    Ok((q, run))
}

/// Invariant of a chart node.
pub fn invariant(node: &ChartNode) -> &[InvEntry] {
    &node.invariant
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::ToricMonoid;

    fn free(r: usize, n: usize, base: Vec<LatticePoint>) -> ChartRing {
        ChartRing::new(Arc::new(ToricMonoid::free(r, base).unwrap()), n)
    }

    fn ideal(r: &ChartRing, gens: &[&str]) -> Ideal {
        Ideal::new(gens.iter().map(|g| r.parse(g).unwrap()).collect())
    }

    #[test]
    fn unit_ideal_needs_nothing() {
        let r = free(0, 1, vec![]);
        let run = principalize(&r, &ideal(&r, &["1"]), &DriverOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        assert!(run.root.children.is_empty());
    }

    #[test]
    fn smooth_hypersurface_one_blowup() {
        let r = free(0, 2, vec![]);
        let run = principalize(&r, &ideal(&r, &["t1"]), &DriverOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        assert_eq!(run.root.centers().len(), 1);
        assert_eq!(run.root.centers()[0].to_string(), "(t1; ; 1)");
        assert_eq!(
            run.root.invariant,
            vec![InvEntry::Value(Rational::one()), InvEntry::Infinity]
        );
    }

    #[test]
    fn power_of_variable() {
        let r = free(0, 1, vec![]);
        let p = Problem::new(r.clone(), MarkedIdeal::new(ideal(&r, &["t1^3"]), 3)).unwrap();
        let run = order_reduction(&p, &DriverOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        assert_eq!(run.root.centers().len(), 1);
        // with weight one the monomial left behind is blown up in a final step
        let run = principalize(&r, &ideal(&r, &["t1^3"]), &DriverOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        let cs: Vec<String> = run.root.centers().iter().map(|c| c.to_string()).collect();
        assert_eq!(cs, vec!["(t1; ; 1)", "(; (2); 1)"]);
    }

    #[test]
    fn monomial_ideal_is_one_log_blowup() {
        let r = free(2, 0, vec![]);
        let run = principalize(
            &r,
            &ideal(&r, &["u(1,0)", "u(0,1)"]),
            &DriverOptions::default(),
        )
        .unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        assert_eq!(run.root.centers().len(), 1);
        assert_eq!(run.root.children.len(), 2);
        for l in run.root.leaves() {
            match &l.action {
                NodeAction::Leaf(LeafStatus::Resolved(c)) => {
                    assert!(c.monomial && c.invertible && c.controlled_unit)
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn localization_cover() {
        let r = free(0, 2, vec![]);
        let run = principalize(
            &r,
            &ideal(&r, &["t1^2 + t2^2 - 1"]),
            &DriverOptions::default(),
        )
        .unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        assert!(matches!(run.root.action, NodeAction::Localize { .. }));
    }

    fn stuck_ring(log_axes: bool) -> ChartRing {
        let axes = vec![
            LatticePoint::from_i64(&[1, 0]),
            LatticePoint::from_i64(&[0, 1]),
        ];
        let nonlog = if log_axes { vec![] } else { vec![0, 1] };
        let m = ToricMonoid::new(
            2,
            BigInt::one(),
            vec![
                vec![BigInt::one(), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::one()],
            ],
            axes.clone(),
            axes,
            nonlog,
        )
        .unwrap();
        ChartRing::new(Arc::new(m), 1)
    }

    #[test]
    fn stuck_example_fails_then_succeeds() {
        let r = stuck_ring(false);
        let i = ideal(&r, &["u(1,0)", "u(0,1)", "t1"]);
        let run = principalize(&r, &i, &DriverOptions::default()).unwrap();
        match &run.status {
            RunStatus::Fail {
                obstruction, stack, ..
            } => {
                assert_eq!(obstruction.to_string(), "u(1,0), u(0,1)");
                assert_eq!(stack.len(), 1);
                assert_eq!(stack[0].to_string(), "t1");
            }
            other => panic!("{other:?}"),
        }
        let p = Problem::new(r, MarkedIdeal::new(i, 1)).unwrap();
        let axes = [
            LatticePoint::from_i64(&[1, 0]),
            LatticePoint::from_i64(&[0, 1]),
        ];
        let (_, run) = base_extend_and_retry(&p, &axes, &DriverOptions::default()).unwrap();
        assert_eq!(run.status, RunStatus::Resolved);
        let cs: Vec<String> = run.root.centers().iter().map(|c| c.to_string()).collect();
        assert_eq!(cs, vec!["(t1; (1,0), (0,1); 1)"]);
        assert_eq!(run.root.children.len(), 3);
        for l in run.root.leaves() {
            match &l.action {
                NodeAction::Leaf(LeafStatus::Resolved(c)) => {
                    assert!(c.monomial && c.controlled_unit)
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn cusp_resolves() {
        let r = free(0, 2, vec![]);
        let run =
            principalize(&r, &ideal(&r, &["t1^2 - t2^3"]), &DriverOptions::default()).unwrap();
        let cs: Vec<String> = run
            .root
            .walk()
            .iter()
            .map(|n| format!("{} {:?} {}", n.id, n.action_summary(), n.ring.describe()))
            .collect();
        assert_eq!(run.status, RunStatus::Resolved, "{:#?}", cs);
        assert!(run.root.depth_reached() <= 12);
        assert_eq!(run.root.centers()[0].to_string(), "(t1, t2; ; 1)");
        let three_halves = Rational::new(BigInt::from(3), BigInt::from(2));
        assert_eq!(
            run.root.invariant,
            vec![
                InvEntry::Value(Rational::from_integer(BigInt::from(2))),
                InvEntry::Value(three_halves),
                InvEntry::Infinity
            ]
        );
        for l in run.root.leaves() {
            match &l.action {
                NodeAction::Leaf(LeafStatus::Resolved(c)) => {
                    assert!(c.monomial && c.invertible && c.controlled_unit)
                }
                other => panic!("{}: {other:?}", l.id),
            }
        }
    }
}
