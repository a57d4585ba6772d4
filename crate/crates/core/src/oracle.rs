//! Brute-force oracles used by `--check` and the acceptance suite, and the contact independence harness.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::blowup::{
    admissible, exceptional_is_invertible, j_pullback_is_exceptional_power, lift_derivations,
    make_charts, transform_derivations, BlowupError, Center,
};
use crate::chartring::{ChartRing, Ideal, RingError, VarKind};
use crate::derivations::{d_saturation, derive_ideal, standard_derivations, DerivationSet};
use crate::element::RingElement;
use crate::exactmath::{rank, rat, Rational};
use crate::marked::{balanced_decomposition, coefficient_ideal, logord_at_origin, MarkedIdeal};
use crate::monoid::{monomial_saturation, LatticePoint, MonoidError, MonomialIdeal};
use crate::principalize::{
    ChartNode, DriverOptions, LeafStatus, NodeAction, Run, RunStatus, CONTACT_CHOICE_CAP,
};
use crate::problem::{Mode, ProblemError, ProblemFile};
use crate::trace::Trace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the fiber oracle needs a chart without relations or inverted elements")]
    NotApplicable,
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Law(String),
}

/// Order of `I` on the logarithmic fiber through the origin: monomials outside the span of the
/// base go to zero, base monomials stay as generic coefficients, and the order is the least total
/// t-degree that survives. `None` stands for infinity.
pub fn logord_origin(ring: &ChartRing, ideal: &Ideal) -> Result<Option<u64>, OracleError> {
    if ring.has_relations() || ring.kinds().iter().any(|k| *k != VarKind::T) {
        return Err(OracleError::NotApplicable);
    }
    let base: Vec<Vec<Rational>> = ring.monoid().base().iter().map(|p| p.0.clone()).collect();
    let r0 = rank(&base);
    let in_span = |q: &LatticePoint| {
        let mut rows = base.clone();
        rows.push(q.0.clone());
        rank(&rows) == r0
    };
    let mut best: Option<u64> = None;
    for g in ideal.gens() {
        for (k, _) in g.terms() {
            if k.q.is_zero() || in_span(&k.q) {
                let deg: u64 = k.exps.iter().map(|&e| e as u64).sum();
                best = Some(best.map_or(deg, |b| b.min(deg)));
            }
        }
    }
    Ok(best)
}

/// Default multiplier bound for [`saturation_table`].
pub const SATURATION_K_MAX: u64 = 12;
/// Default coordinate bound for [`saturation_table`].
pub const SATURATION_BOX: i64 = 10;

/// Membership in the integral closure of `N` for every monoid point with coordinates in
/// `[-bound, bound]`: `q` is a member when `k·q` lies in the `k`-th power of `N` for some `k ≤ k_max`.
pub fn saturation_table(
    n: &MonomialIdeal,
    bound: i64,
    k_max: u64,
) -> Result<Vec<(LatticePoint, bool)>, OracleError> {
    let m = n.ambient();
    let r = m.rank();
    let lo = vec![rat(-bound); r];
    let hi = vec![rat(bound); r];
    let mut points = Vec::new();
    for q in m.box_points(&lo, &hi)? {
        if m.contains(&q)? {
            points.push(q);
        }
    }
    // sums[k-1] = all sums of k generators
    let mut sums: Vec<BTreeSet<LatticePoint>> = Vec::new();
    let mut cur: BTreeSet<LatticePoint> = BTreeSet::from([LatticePoint::zero(r)]);
    for _ in 0..k_max {
        let next: BTreeSet<LatticePoint> = cur
            .iter()
            .flat_map(|s| n.gens().iter().map(move |g| s.add(g)))
            .collect();
        sums.push(next.clone());
        cur = next;
    }
    let mut out = Vec::new();
    for q in points {
        let mut member = false;
        'k: for (i, layer) in sums.iter().enumerate() {
            let kq = q.scale(&rat(i as i64 + 1));
            for s in layer {
                if m.contains(&kq.sub(s))? {
                    member = true;
                    break 'k;
                }
            }
        }
        out.push((q, member));
    }
    Ok(out)
}

/// Blow-up centers of a tree keyed by chart id, in depth-first order.
pub fn center_sequence(root: &ChartNode) -> Vec<(String, Center, ChartRing)> {
    root.walk()
        .into_iter()
        .filter_map(|n| match &n.action {
            NodeAction::Blowup { center, .. } => {
                Some((n.id.clone(), center.clone(), n.ring.clone()))
            }
            _ => None,
        })
        .collect()
}

/// Outcome of rerunning a problem under every contact choice.
#[derive(Clone, Debug)]
pub struct IndependenceReport {
    /// Choices that were run.
    pub choices: usize,
    /// Most valid contacts offered at any chart of the default run.
    pub max_options: usize,
    /// Center sequence of each run, printed.
    pub sequences: Vec<Vec<String>>,
    pub identical: bool,
}

fn same_center(ring: &ChartRing, a: &Center, b: &Center) -> Result<bool, RingError> {
    if a.to_string() == b.to_string() {
        return Ok(true);
    }
    if a.d != b.d || a.t_part.len() != b.t_part.len() {
        return Ok(false);
    }
    let ma: BTreeSet<_> = a.mon_part.iter().collect();
    let mb: BTreeSet<_> = b.mon_part.iter().collect();
    if ma != mb {
        return Ok(false);
    }
    let lift = |c: &Center| {
        Ideal::new(
            c.t_part
                .iter()
                .map(|g| g.extend(ring.nvars(), ring.rank()))
                .collect(),
        )
    };
    ring.ideal_equal(&lift(a), &lift(b))
}

/// Chart id with localization steps removed, so that a chart and the patches of a cover of it
/// share a key.
fn cover_key(id: &str) -> String {
    id.split('.')
        .filter(|s| {
            !(s.len() > 1 && s.starts_with('d') && s[1..].bytes().all(|b| b.is_ascii_digit()))
        })
        .collect::<Vec<_>>()
        .join(".")
}

fn is_localized(id: &str) -> bool {
    cover_key(id) != id
}

/// Centers of two runs agree when every pair of charts with the same key blows up the same
/// ideal, compared in the finer of the two rings. Two different localizations are not compared.
fn same_centers(
    a: &[(String, Center, ChartRing)],
    b: &[(String, Center, ChartRing)],
) -> Result<bool, RingError> {
    let keys = |s: &[(String, Center, ChartRing)]| {
        s.iter()
            .map(|(id, _, _)| cover_key(id))
            .collect::<BTreeSet<_>>()
    };
    if keys(a) != keys(b) {
        return Ok(false);
    }
    for (ia, ca, ra) in a {
        for (ib, cb, rb) in b {
            if cover_key(ia) != cover_key(ib) {
                continue;
            }
            let ring = match (is_localized(ia), is_localized(ib)) {
                (true, true) if ia != ib => continue,
                (_, true) => rb,
                _ => ra,
            };
            if !same_center(ring, ca, cb)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Statuses agree when they have the same kind and chart, and a failure reports the same ideal
/// once the contact stack is added back.
fn same_status(root: &ChartRing, a: &RunStatus, b: &RunStatus) -> Result<bool, RingError> {
    match (a, b) {
        (
            RunStatus::Fail {
                chart: ca,
                obstruction: oa,
                stack: sa,
            },
            RunStatus::Fail {
                chart: cb,
                obstruction: ob,
                stack: sb,
            },
        ) => {
            if ca != cb || sa.len() != sb.len() {
                return Ok(false);
            }
            let full = |o: &Ideal, s: &[RingElement]| o.add(&Ideal::new(s.to_vec()));
            root.ideal_equal(&full(oa, sa), &full(ob, sb))
        }
        _ => Ok(a == b),
    }
}

/// Runs `file` with contact choices `0..cap` and compares the emitted centers chart by chart,
/// up to refinement by localization covers.
pub fn independence(
    file: &ProblemFile,
    opts: &DriverOptions,
) -> Result<IndependenceReport, OracleError> {
    let base = file.solve(&DriverOptions {
        contact_choice: 0,
        ..opts.clone()
    })?;
    let root = file.working_ring()?;
    let max_options = base
        .root
        .walk()
        .iter()
        .map(|n| n.contact_options)
        .max()
        .unwrap_or(0);
    let reference = center_sequence(&base.root);
    let show = |seq: &[(String, Center, ChartRing)]| {
        seq.iter().map(|(id, c, _)| format!("{id} {c}")).collect()
    };
    let mut sequences = vec![show(&reference)];
    let mut identical = true;
    let runs = max_options.clamp(1, CONTACT_CHOICE_CAP);
    for choice in 1..runs {
        let mut f = file.clone();
        f.contact_choice = Some(choice);
        let run = f.solve(&DriverOptions {
            contact_choice: choice,
            ..opts.clone()
        })?;
        let seq = center_sequence(&run.root);
        identical &=
            same_status(&root, &base.status, &run.status)? && same_centers(&reference, &seq)?;
        sequences.push(show(&seq));
    }
    Ok(IndependenceReport {
        choices: runs,
        max_options,
        sequences,
        identical,
    })
}

/// Re-checks the transform laws on every center of a tree: the pulled-back center is the
/// exceptional ideal, and `σ^{-1} J^{(a)} = (y^a)` for `1 ≤ a ≤ powers`. Returns the number of
/// charts checked and whether all passed.
pub fn transform_laws(root: &ChartNode, powers: u64) -> Result<(usize, bool), OracleError> {
    let mut count = 0;
    let mut ok = true;
    for (_, center, ring) in center_sequence(root) {
        let charts = make_charts(&ring, &center).map_err(|e| OracleError::Law(e.to_string()))?;
        for ch in &charts {
            count += 1;
            let law = |r: Result<bool, BlowupError>| r.map_err(|e| OracleError::Law(e.to_string()));
            ok &= law(exceptional_is_invertible(ch, &center))?;
            for a in 1..=powers {
                ok &= law(j_pullback_is_exceptional_power(&ring, ch, &center, a))?;
            }
        }
    }
    Ok((count, ok))
}

/// Result of comparing derivative and coefficient ideals before and after one blow-up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub charts: usize,
    /// `(σ^c F)^{(≤i)}(σ^c I) = Σ_{j≤i} σ^c(F^{(≤j)} I, a - j)` for every `0 ≤ i < a`.
    pub derivative_filtration: bool,
    /// `C_{σ^c F}(σ^c I) = σ^c C_F(I)`, weights included.
    pub coefficient_ideal: bool,
}

/// Checks both transform identities for the admissible `center` on every chart. Here `σ^c F` is
/// the transform of each derivation in `f`.
pub fn transform_identities(
    ring: &ChartRing,
    f: &DerivationSet,
    marked: &MarkedIdeal,
    center: &Center,
) -> Result<IdentityReport, OracleError> {
    let law = |e: &dyn std::fmt::Display| OracleError::Law(e.to_string());
    if !admissible(ring, center, marked).map_err(|e| law(&e))? {
        return Err(OracleError::Law(format!(
            "center {center} is not admissible"
        )));
    }
    let a = marked.weight;
    let filtration: Vec<MarkedIdeal> = (0..a)
        .map(|j| {
            Ok(MarkedIdeal::new(
                derive_ideal(ring, f, &marked.ideal, j as usize)?,
                a - j,
            ))
        })
        .collect::<Result<_, RingError>>()?;
    let coef = coefficient_ideal(ring, f, marked).map_err(|e| law(&e))?;
    let charts = make_charts(ring, center).map_err(|e| law(&e))?;
    let mut report = IdentityReport {
        charts: charts.len(),
        derivative_filtration: true,
        coefficient_ideal: true,
    };
    for ch in &charts {
        let g = transform_derivations(ch, center, f)?;
        let moved = ch.controlled_transform(marked)?;
        let mut partial = Ideal::zero();
        for (i, level) in filtration.iter().enumerate() {
            partial = partial.add(&ch.controlled_transform(level)?.ideal);
            let lhs = derive_ideal(&ch.ring, &g, &moved.ideal, i)?;
            report.derivative_filtration &= ch.ring.ideal_equal(&lhs, &partial)?;
        }
        let lhs = coefficient_ideal(&ch.ring, &g, &moved).map_err(|e| law(&e))?;
        let rhs = ch.controlled_transform(&coef)?;
        report.coefficient_ideal &=
            lhs.weight == rhs.weight && ch.ring.ideal_equal(&lhs.ideal, &rhs.ideal)?;
    }
    Ok(report)
}

/// Whether the D-saturation of `ideal` is a proper monomial ideal, so that cleaning applies.
pub fn needs_cleaning(ring: &ChartRing, ideal: &Ideal) -> Result<bool, OracleError> {
    let law = |e: &dyn std::fmt::Display| OracleError::Law(e.to_string());
    let f = standard_derivations(ring).map_err(|e| law(&e))?;
    let sat = d_saturation(ring, &f, ideal).map_err(|e| law(&e))?;
    let mono = ring.monomial_ideal(&ring.monomial_part(&sat)?);
    Ok(!ring.is_unit(&sat)? && ring.ideal_equal(&sat, &mono)?)
}

/// Blows up `center` and reports the number of charts and whether the clean part of the
/// pullback of `ideal` has finite order on each.
pub fn cleaning(
    ring: &ChartRing,
    ideal: &Ideal,
    center: &Center,
) -> Result<(usize, bool), OracleError> {
    let law = |e: &dyn std::fmt::Display| OracleError::Law(e.to_string());
    let f = standard_derivations(ring).map_err(|e| law(&e))?;
    let charts = make_charts(ring, center).map_err(|e| law(&e))?;
    let mut ok = true;
    for ch in &charts {
        let g = lift_derivations(ch, center, &f)?;
        let pulled = ch.pullback_ideal(ideal);
        ok &= match balanced_decomposition(&ch.ring, &g, &pulled) {
            Ok(b) => b.order.finite().is_some(),
            Err(_) => false,
        };
    }
    Ok((charts.len(), ok))
}

/// One line of a `--check` report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Oracle checks on a finished run of `file`.
pub fn check_run(
    file: &ProblemFile,
    opts: &DriverOptions,
    run: &Run,
) -> Result<Vec<CheckLine>, OracleError> {
    let mut out = Vec::new();
    let ring = file.working_ring()?;
    let ideal = file.ideal();
    match logord_origin(&ring, &ideal) {
        Ok(fiber) => {
            let f = standard_derivations(&ring).map_err(|e| OracleError::Law(e.to_string()))?;
            let derived =
                logord_at_origin(&ring, &f, &ideal).map_err(|e| OracleError::Law(e.to_string()))?;
            let show = |o: Option<u64>| o.map_or("inf".to_string(), |a| a.to_string());
            out.push(CheckLine {
                name: "logord-origin",
                pass: derived.finite() == fiber,
                detail: format!(
                    "fiber {} derivations {}",
                    show(fiber),
                    show(derived.finite())
                ),
            });
        }
        Err(OracleError::NotApplicable) => {}
        Err(e) => return Err(e),
    }
    let mp = ring.monomial_part(&ideal)?;
    if !mp.is_zero() && ring.rank() <= 3 {
        let sat = monomial_saturation(&mp)?;
        let table = saturation_table(&mp, 4, 6)?;
        let bad = table.iter().filter(|(q, m)| sat.contains(q) != *m).count();
        out.push(CheckLine {
            name: "saturation",
            pass: bad == 0,
            detail: format!("{} points, {bad} disagreements", table.len()),
        });
    }
    let (charts, laws) = transform_laws(&run.root, 2)?;
    out.push(CheckLine {
        name: "transform-laws",
        pass: laws,
        detail: format!("{charts} charts"),
    });
    // order reduction only promises an empty support, principalization a monomial full transform
    let need_monomial = file.mode != Mode::OrderReduce;
    let leaves = run.root.leaves();
    let bad = leaves
        .iter()
        .filter(|n| match &n.action {
            NodeAction::Leaf(LeafStatus::Resolved(c)) => {
                !c.controlled_unit || (need_monomial && !c.monomial)
            }
            _ => false,
        })
        .count();
    out.push(CheckLine {
        name: "resolved-leaves",
        pass: bad == 0,
        detail: format!("{} leaves, {bad} unresolved", leaves.len()),
    });
    let same = match file.solve(opts) {
        Ok(r) => Trace::from_run(&r).to_json() == Trace::from_run(run).to_json(),
        Err(_) => false,
    };
    out.push(CheckLine {
        name: "determinism",
        pass: same,
        detail: "rerun trace compared byte for byte".into(),
    });
    Ok(out)
}
