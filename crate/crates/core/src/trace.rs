//! Deterministic run traces: one record per chart, emitted as sorted-key JSON or as text.

use std::fmt::Write as _;

use serde::Serialize;

use crate::principalize::{ChartNode, Edge, LeafStatus, NodeAction, Run, RunStatus};

/// One chart of the tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChartRecord {
    pub id: String,
    pub parent: Option<String>,
    pub depth: usize,
    /// `t1`, `m2`, ... for blow-up charts, `d1`, ... for localizations.
    pub selector: Option<String>,
    /// Element inverted on a localization chart.
    pub localized_at: Option<String>,
    pub substitutions: Vec<String>,
    pub exceptional: Option<String>,
    pub inertia: Option<Inertia>,
    pub monoid: String,
    pub relations: Vec<String>,
    pub transform: Vec<String>,
    pub invariant: Vec<String>,
    /// Center blown up at this chart.
    pub center: Option<String>,
    pub whole_chart: bool,
    pub cover: Vec<String>,
    /// Leaf outcome; absent on interior charts.
    pub status: Option<String>,
    pub resolution_stage: bool,
    pub contact_options: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub order: u64,
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatusRecord {
    /// `resolved`, `fail`, `depth-cap`, `internal` or `no-stage`.
    pub kind: String,
    pub exit_code: i32,
    pub chart: Option<String>,
    pub obstruction: Vec<String>,
    pub stack: Vec<String>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub status: StatusRecord,
    pub centers: usize,
    pub depth: usize,
    pub charts: Vec<ChartRecord>,
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn leaf_label(s: &LeafStatus) -> String {
    match s {
        LeafStatus::Resolved(c) => format!(
            "resolved (controlled unit: {}, monomial: {}, invertible: {})",
            c.controlled_unit, c.monomial, c.invertible
        ),
        LeafStatus::Fail { obstruction, stack } => format!(
            "fail: obstruction {obstruction} on [{}]",
            strings(stack).join(", ")
        ),
        LeafStatus::DepthCap => "depth cap".into(),
        LeafStatus::Internal(m) => format!("internal: {m}"),
        LeafStatus::NoStageFound => "no resolution stage".into(),
    }
}

fn record(node: &ChartNode, parent: Option<&str>) -> ChartRecord {
    let mut r = ChartRecord {
        id: node.id.clone(),
        parent: parent.map(str::to_string),
        depth: node.depth,
        selector: None,
        localized_at: None,
        substitutions: Vec::new(),
        exceptional: None,
        inertia: None,
        monoid: node.ring.monoid().describe(),
        relations: strings(&node.ring.relation_elements()),
        transform: strings(&node.transform),
        invariant: strings(&node.invariant),
        center: None,
        whole_chart: false,
        cover: Vec::new(),
        status: None,
        resolution_stage: node.resolution_stage,
        contact_options: node.contact_options,
    };
    match &node.edge {
        Some(Edge::Blowup {
            selector,
            exceptional,
            inertia,
            substitutions,
        }) => {
            r.selector = Some(selector.to_string());
            r.exceptional = Some(exceptional.to_string());
            r.inertia = Some(Inertia {
                order: inertia.0,
                generators: strings(&inertia.1),
            });
            r.substitutions = strings(substitutions);
        }
        Some(Edge::Localize { element }) => {
            r.selector = node.id.rsplit('.').next().map(str::to_string);
            r.localized_at = Some(element.to_string());
        }
        None => {}
    }
    match &node.action {
        NodeAction::Blowup {
            center,
            whole_chart,
        } => {
            r.center = Some(center.to_string());
            r.whole_chart = *whole_chart;
        }
        NodeAction::Localize { cover } => r.cover = strings(cover),
        NodeAction::Leaf(s) => r.status = Some(leaf_label(s)),
    }
    r
}

fn collect(node: &ChartNode, parent: Option<&str>, out: &mut Vec<ChartRecord>) {
    out.push(record(node, parent));
    for c in &node.children {
        collect(c, Some(&node.id), out);
    }
}

impl Trace {
    pub fn from_run(run: &Run) -> Self {
        let mut charts = Vec::new();
        collect(&run.root, None, &mut charts);
        let mut status = StatusRecord {
            kind: String::new(),
            exit_code: run.status.exit_code(),
            chart: None,
            obstruction: Vec::new(),
            stack: Vec::new(),
            message: None,
        };
        match &run.status {
            RunStatus::Resolved => status.kind = "resolved".into(),
            RunStatus::Fail {
                chart,
                obstruction,
                stack,
            } => {
                status.kind = "fail".into();
                status.chart = Some(chart.clone());
                status.obstruction = strings(obstruction.gens());
                status.stack = strings(stack);
            }
            RunStatus::DepthCap { chart } => {
                status.kind = "depth-cap".into();
                status.chart = Some(chart.clone());
            }
            RunStatus::Internal { chart, message } => {
                status.kind = "internal".into();
                status.chart = Some(chart.clone());
                status.message = Some(message.clone());
            }
            RunStatus::NoStageFound { chart } => {
                status.kind = "no-stage".into();
                status.chart = Some(chart.clone());
            }
        }
        Trace {
            status,
            centers: run.root.centers().len(),
            depth: run.root.depth_reached(),
            charts,
        }
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        // `Value` objects are B-tree maps, so the round trip sorts the keys
        let v = serde_json::to_value(self).expect("trace records serialize");
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    /// One block per chart, indented by depth.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let st = &self.status;
        let _ = write!(s, "status: {} (exit {})", st.kind, st.exit_code);
        if let Some(c) = &st.chart {
            let _ = write!(s, " at {c}");
        }
        s.push('\n');
        if !st.obstruction.is_empty() {
            let _ = writeln!(s, "obstruction: {}", st.obstruction.join(", "));
            let _ = writeln!(s, "contact stack: [{}]", st.stack.join(", "));
        }
        if let Some(m) = &st.message {
            let _ = writeln!(s, "message: {m}");
        }
        let _ = writeln!(s, "centers: {}, depth: {}", self.centers, self.depth);
        for c in &self.charts {
            let pad = "  ".repeat(c.depth);
            let _ = write!(s, "{pad}{}", c.id);
            if let Some(g) = &c.localized_at {
                let _ = write!(s, " [invert {g}]");
            }
            if let (Some(e), Some(i)) = (&c.exceptional, &c.inertia) {
                let _ = write!(s, " [exceptional u{e}, inertia {}]", i.order);
            }
            let _ = writeln!(s, " inv ({})", c.invariant.join(", "));
            if !c.substitutions.is_empty() {
                let _ = writeln!(s, "{pad}  substitutions: {}", c.substitutions.join("; "));
            }
            let _ = writeln!(s, "{pad}  transform: {}", c.transform.join(", "));
            if let Some(center) = &c.center {
                let tag = if c.whole_chart { " (whole chart)" } else { "" };
                let _ = writeln!(s, "{pad}  blow up {center}{tag}");
            }
            if !c.cover.is_empty() {
                let _ = writeln!(s, "{pad}  localize at {}", c.cover.join("; "));
            }
            if let Some(l) = &c.status {
                let _ = writeln!(s, "{pad}  {l}");
            }
            if c.resolution_stage {
                let _ = writeln!(s, "{pad}  resolution stage");
            }
        }
        s
    }
}
