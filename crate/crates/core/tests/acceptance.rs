//! Acceptance criteria, one printed line each (a plain binary, so the lines always show). All comparisons are exact; the only tolerances
//! are the wall-clock budgets below.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use logres::blowup::Center;
use logres::corpus::{corpus, fixture};
use logres::derivations::standard_derivations;
use logres::marked::logord_at_origin;
use logres::monoid::{monomial_saturation, LatticePoint, MonomialIdeal, ToricMonoid};
use logres::oracle::{
    cleaning, independence, logord_origin, needs_cleaning, saturation_table, transform_identities,
    transform_laws, OracleError, SATURATION_BOX, SATURATION_K_MAX,
};
use logres::principalize::{ChartNode, DriverOptions, LeafStatus, NodeAction, Run, RunStatus};
use logres::problem::ProblemFile;
use logres::trace::Trace;

const STUCK_BUDGET: Duration = Duration::from_secs(5);
const CUSP_BUDGET: Duration = Duration::from_secs(60);
const CUSP_MAX_DEPTH: usize = 12;
const IDENTITY_BUDGET: Duration = Duration::from_secs(60);
const SATURATION_BUDGET: Duration = Duration::from_secs(120);
const MIN_IDENTITY_FIXTURES: usize = 5;
const MIN_SATURATION_IDEALS: usize = 20;
const MIN_LOGORD_FIXTURES: usize = 10;
const MIN_INDEPENDENCE_FIXTURES: usize = 3;
const DETERMINISM_REPEATS: usize = 3;
const LAW_POWERS: u64 = 3;

const MAX_ORDER_FIXTURES: &[&str] = &[
    "mo_cusp", "mo_node", "mo_log", "mo_cone", "mo_rank2", "mo_cube",
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn load(name: &str) -> (ProblemFile, Run) {
    let file = fixture(name).unwrap().problem().unwrap();
    let run = file.solve(&DriverOptions::default()).unwrap();
    (file, run)
}

fn root_center(run: &Run) -> Option<Center> {
    match &run.root.action {
        NodeAction::Blowup { center, .. } => Some(center.clone()),
        _ => None,
    }
}

fn resolved_leaf(n: &ChartNode) -> bool {
    matches!(&n.action, NodeAction::Leaf(LeafStatus::Resolved(c)) if c.controlled_unit && c.monomial && c.invertible)
}

fn stuck_example() -> Outcome {
    let start = Instant::now();
    let (_, pre) = load("stuck_plane_pre");
    let fail_ok = match &pre.status {
        RunStatus::Fail {
            obstruction, stack, ..
        } => {
            let o: Vec<String> = obstruction.gens().iter().map(|g| g.to_string()).collect();
            let s: Vec<String> = stack.iter().map(|g| g.to_string()).collect();
            o == ["u(1,0)", "u(0,1)"] && s == ["t1"]
        }
        _ => false,
    };
    let (_, post) = load("stuck_plane_post");
    let centers: Vec<String> = post.root.centers().iter().map(|c| c.to_string()).collect();
    let leaves = post.root.leaves();
    let post_ok = post.status == RunStatus::Resolved
        && centers == ["(t1; (1,0), (0,1); 1)"]
        && leaves.len() == 3
        && leaves.iter().all(|n| {
            resolved_leaf(n)
                && n.ring
                    .is_unit(&logres::chartring::Ideal::new(n.transform.clone()))
                    .unwrap()
        });
    let elapsed = start.elapsed();
    outcome(
        fail_ok && post_ok && elapsed < STUCK_BUDGET,
        format!(
            "obstruction ok {fail_ok}, one center on 3 resolved charts {post_ok}, {elapsed:.2?}"
        ),
    )
}

fn cusp() -> Outcome {
    let start = Instant::now();
    let file = fixture("cusp").unwrap().problem().unwrap();
    let run = file
        .solve(&DriverOptions {
            max_depth: CUSP_MAX_DEPTH,
            ..DriverOptions::default()
        })
        .unwrap();
    let leaves = run.root.leaves();
    let all = leaves.iter().all(|n| resolved_leaf(n));
    let elapsed = start.elapsed();
    outcome(
        run.status == RunStatus::Resolved
            && all
            && run.root.depth_reached() <= CUSP_MAX_DEPTH
            && elapsed < CUSP_BUDGET,
        format!(
            "{} centers, depth {}, {} leaves invertible {all}, {elapsed:.2?}",
            run.root.centers().len(),
            run.root.depth_reached(),
            leaves.len()
        ),
    )
}

/// Criteria 3 and 4 share their fixtures; returns (coefficient ideal, derivative filtration).
fn identities() -> (Outcome, Outcome) {
    let start = Instant::now();
    let (mut coef_ok, mut filt_ok, mut n, mut charts) = (0, 0, 0, 0);
    let mut errors = Vec::new();
    for name in MAX_ORDER_FIXTURES {
        let (file, run) = load(name);
        let ring = file.working_ring().unwrap();
        let f = standard_derivations(&ring).unwrap();
        let Some(center) = root_center(&run) else {
            errors.push(format!("{name}: no center"));
            continue;
        };
        match transform_identities(&ring, &f, &file.marked(), &center) {
            Ok(r) => {
                n += 1;
                charts += r.charts;
                coef_ok += r.coefficient_ideal as usize;
                filt_ok += r.derivative_filtration as usize;
            }
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let timely = elapsed < IDENTITY_BUDGET;
    let enough = n >= MIN_IDENTITY_FIXTURES && errors.is_empty();
    let tail = if errors.is_empty() {
        String::new()
    } else {
        format!(", errors {errors:?}")
    };
    (
        outcome(
            enough && coef_ok == n && timely,
            format!("{coef_ok}/{n} fixtures, {charts} charts, {elapsed:.2?}{tail}"),
        ),
        outcome(
            enough && filt_ok == n,
            format!("{filt_ok}/{n} fixtures, {charts} charts{tail}"),
        ),
    )
}

fn cleaning_criterion() -> Outcome {
    let (mut applicable, mut charts) = (0, 0);
    let mut bad = Vec::new();
    for fx in corpus() {
        let file = fx.problem().unwrap();
        let ring = file.working_ring().unwrap();
        if !needs_cleaning(&ring, &file.ideal()).unwrap() {
            continue;
        }
        applicable += 1;
        let (_, run) = load(fx.name);
        match root_center(&run).map(|c| cleaning(&ring, &file.ideal(), &c)) {
            Some(Ok((c, true))) => charts += c,
            _ => bad.push(fx.name),
        }
    }
    outcome(
        applicable > 0 && bad.is_empty(),
        format!(
            "{applicable} fixtures with monomial D-saturation, {charts} charts, failing {bad:?}"
        ),
    )
}

fn monoid(rank: usize, denom: i64, lattice: &[&[i64]], cone: &[&[i64]]) -> Arc<ToricMonoid> {
    let rows = lattice
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let rays = cone.iter().map(|r| LatticePoint::from_i64(r)).collect();
    Arc::new(
        ToricMonoid::new(
            rank,
            BigInt::from(denom),
            rows,
            rays,
            Vec::new(),
            Vec::new(),
        )
        .unwrap(),
    )
}

fn saturation_ideals() -> Vec<MonomialIdeal> {
    let free1 = Arc::new(ToricMonoid::free(1, Vec::new()).unwrap());
    let free2 = Arc::new(ToricMonoid::free(2, Vec::new()).unwrap());
    let free3 = Arc::new(ToricMonoid::free(3, Vec::new()).unwrap());
    let wedge = monoid(2, 1, &[&[1, 0], &[0, 1]], &[&[1, 0], &[1, 2]]);
    let half = monoid(2, 2, &[&[1, 1], &[0, 2]], &[&[1, 0], &[0, 1]]);
    let cone3 = monoid(
        3,
        1,
        &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]],
        &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 2]],
    );
    let cases: Vec<(&Arc<ToricMonoid>, &[&[i64]])> = vec![
        (&free1, &[&[3]]),
        (&free1, &[&[4], &[6]]),
        (&free2, &[&[2, 0], &[0, 2]]),
        (&free2, &[&[2, 0], &[0, 3]]),
        (&free2, &[&[3, 0], &[0, 5]]),
        (&free2, &[&[4, 0], &[1, 1], &[0, 4]]),
        (&free2, &[&[3, 0], &[1, 2]]),
        (&free2, &[&[2, 1], &[0, 3], &[5, 0]]),
        (&free2, &[&[6, 0], &[0, 2]]),
        (&free2, &[&[1, 1]]),
        (&free2, &[&[4, 0], &[0, 4]]),
        (&wedge, &[&[2, 0]]),
        (&wedge, &[&[1, 2], &[3, 0]]),
        (&wedge, &[&[2, 0], &[2, 4]]),
        (&wedge, &[&[3, 1], &[1, 2]]),
        (&half, &[&[2, 0], &[0, 2]]),
        (&half, &[&[1, 0], &[0, 1]]),
        (&free3, &[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]),
        (&free3, &[&[1, 1, 0], &[0, 0, 3]]),
        (&free3, &[&[3, 0, 0], &[0, 2, 0], &[0, 0, 2]]),
        (&free3, &[&[2, 0, 0], &[0, 2, 2]]),
        (&cone3, &[&[2, 0, 0], &[0, 2, 0]]),
        (&cone3, &[&[1, 1, 2], &[2, 0, 0]]),
    ];
    cases
        .into_iter()
        .map(|(m, gens)| {
            let gens = gens.iter().map(|g| LatticePoint::from_i64(g)).collect();
            MonomialIdeal::new(m.clone(), gens).unwrap()
        })
        .collect()
}

fn saturation() -> Outcome {
    let start = Instant::now();
    let ideals = saturation_ideals();
    let (mut points, mut bad) = (0, 0);
    for n in &ideals {
        let sat = monomial_saturation(n).unwrap();
        for (q, member) in saturation_table(n, SATURATION_BOX, SATURATION_K_MAX).unwrap() {
            points += 1;
            bad += (sat.contains(&q) != member) as usize;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ideals.len() >= MIN_SATURATION_IDEALS && bad == 0 && elapsed < SATURATION_BUDGET,
        format!(
            "{} ideals, {points} points, {bad} disagreements, {elapsed:.2?}",
            ideals.len()
        ),
    )
}

fn logord() -> Outcome {
    let (mut n, mut agree) = (0, 0);
    let mut bad = Vec::new();
    for fx in corpus() {
        let file = fx.problem().unwrap();
        let ring = file.working_ring().unwrap();
        let ideal = file.ideal();
        let fiber = match logord_origin(&ring, &ideal) {
            Ok(v) => v,
            Err(OracleError::NotApplicable) => continue,
            Err(e) => panic!("{}: {e}", fx.name),
        };
        let f = standard_derivations(&ring).unwrap();
        let derived = logord_at_origin(&ring, &f, &ideal).unwrap().finite();
        n += 1;
        if derived == fiber {
            agree += 1;
        } else {
            bad.push(format!(
                "{}: fiber {fiber:?} derivations {derived:?}",
                fx.name
            ));
        }
    }
    outcome(
        n >= MIN_LOGORD_FIXTURES && bad.is_empty(),
        format!("{agree}/{n} fixtures agree {bad:?}"),
    )
}

fn contact_independence() -> Outcome {
    let (mut multi, mut identical) = (0, 0);
    let mut divergent = Vec::new();
    for fx in corpus() {
        let file = fx.problem().unwrap();
        let rep = independence(&file, &DriverOptions::default()).unwrap();
        if rep.max_options < 2 {
            continue;
        }
        multi += 1;
        if rep.identical {
            identical += 1;
        } else {
            divergent.push(fx.name);
        }
    }
    outcome(
        multi >= MIN_INDEPENDENCE_FIXTURES && divergent.is_empty(),
        format!("{identical}/{multi} multi-contact fixtures identical, divergent {divergent:?}"),
    )
}

fn laws() -> Outcome {
    let (mut charts, mut ok, mut centers) = (0, true, 0);
    for fx in corpus() {
        let (_, run) = load(fx.name);
        centers += run.root.centers().len();
        let (c, good) = transform_laws(&run.root, LAW_POWERS).unwrap();
        charts += c;
        ok &= good;
    }
    outcome(
        ok,
        format!("{centers} centers, {charts} charts, powers 1..={LAW_POWERS}"),
    )
}

fn corpus_traces() -> Vec<String> {
    corpus()
        .iter()
        .map(|fx| {
            Trace::from_run(
                &fx.problem()
                    .unwrap()
                    .solve(&DriverOptions::default())
                    .unwrap(),
            )
            .to_json()
        })
        .collect()
}

fn determinism() -> Outcome {
    let wide = std::thread::available_parallelism()
        .map_or(4, |n| n.get())
        .max(2);
    let mut outputs = Vec::new();
    for threads in [1, wide] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        for _ in 0..DETERMINISM_REPEATS {
            outputs.push(pool.install(corpus_traces));
        }
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "{} runs of {} fixtures at 1 and {wide} threads",
            outputs.len(),
            outputs[0].len()
        ),
    )
}

fn report(name: &str, o: Outcome, failed: &mut Vec<String>) {
    println!(
        "criterion {name}: {} ({})",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    if !o.pass {
        failed.push(name.to_string());
    }
}

fn main() {
    let mut failed = Vec::new();
    report("1 stuck example", stuck_example(), &mut failed);
    report("2 cusp principalization", cusp(), &mut failed);
    let (coefprop, filtration) = identities();
    report("3 coefficient ideal transform", coefprop, &mut failed);
    report("4 derivative filtration transform", filtration, &mut failed);
    report("5 cleaning", cleaning_criterion(), &mut failed);
    report("6 saturation oracle", saturation(), &mut failed);
    report("7 logord oracle", logord(), &mut failed);
    report(
        "8 contact independence",
        contact_independence(),
        &mut failed,
    );
    report("9 transform laws", laws(), &mut failed);
    report("10 determinism", determinism(), &mut failed);
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
