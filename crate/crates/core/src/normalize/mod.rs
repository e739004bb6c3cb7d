//! Dialect-independent plan trees.
//!
//! [`normalize`] classifies every operator and derives exclusive costs,
//! [`render_terminology`] relabels a tree in one vocabulary, and
//! [`metric_percentages`] computes each operator's share of a planner
//! metric for the stacked percentage chart.

pub mod hierarchy;
pub mod taxonomy;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::{Dialect, RawPlanNode};

pub use hierarchy::{
    from_hierarchy_json, to_hierarchy_json, to_hierarchy_json_pretty, HierarchyNode,
};
pub use taxonomy::{classify, style_name, OperatorClass, Terminology};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanNode {
    pub op_class: OperatorClass,
    pub display_name: String,
    pub raw_op_name: String,
    pub dialect: Dialect,
    /// Planner cost as reported; cumulative for PostgreSQL.
    pub cost: Option<f64>,
    /// Cost attributable to this operator alone.
    pub self_cost: Option<f64>,
    pub rows: Option<f64>,
    pub relation: Option<String>,
    pub condition: Option<String>,
    pub extras: BTreeMap<String, String>,
    pub children: Vec<PlanNode>,
}

impl PlanNode {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(PlanNode::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&PlanNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn op_classes(&self) -> Vec<OperatorClass> {
        self.walk().into_iter().map(|n| n.op_class).collect()
    }

    fn metric(&self, metric: MetricKindPlan) -> Option<f64> {
        match metric {
            MetricKindPlan::Cost => self.self_cost,
            MetricKindPlan::Rows => self.rows,
        }
    }
}

/// Builds the canonical tree. Structure is preserved node for node.
///
/// For dialects with cumulative costs the exclusive cost is the node's cost
/// minus the summed cost of its direct children, clamped at zero. Children
/// without a cost count as zero. Elsewhere the exclusive cost is the cost.
pub fn normalize(raw: &RawPlanNode, dialect: Dialect) -> PlanNode {
    let children: Vec<PlanNode> = raw.children.iter().map(|c| normalize(c, dialect)).collect();
    let self_cost = raw.cost.map(|cost| {
        if dialect.cumulative_costs() {
            let inputs: f64 = raw.children.iter().filter_map(|c| c.cost).sum();
            (cost - inputs).max(0.0)
        } else {
            cost
        }
    });
    let op_class = classify(&raw.raw_op_name, dialect);
    PlanNode {
        op_class,
        display_name: label(op_class, &raw.raw_op_name, Terminology::Canonical),
        raw_op_name: raw.raw_op_name.clone(),
        dialect,
        cost: raw.cost,
        self_cost,
        rows: raw.rows,
        relation: raw.relation.clone(),
        condition: raw.condition.clone(),
        extras: raw.extras.clone(),
        children,
    }
}

fn label(class: OperatorClass, raw_op_name: &str, term: Terminology) -> String {
    style_name(class, term).map_or_else(|| raw_op_name.to_string(), str::to_string)
}

/// Rewrites every display label in `term`; classes and shape are untouched.
pub fn render_terminology(tree: &PlanNode, term: Terminology) -> PlanNode {
    let mut out = tree.clone();
    relabel(&mut out, term);
    out
}

fn relabel(node: &mut PlanNode, term: Terminology) {
    node.display_name = label(node.op_class, &node.raw_op_name, term);
    for child in &mut node.children {
        relabel(child, term);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKindPlan {
    #[default]
    Cost,
    Rows,
}

impl MetricKindPlan {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKindPlan::Cost => "cost",
            MetricKindPlan::Rows => "rows",
        }
    }
}

impl fmt::Display for MetricKindPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKindPlan {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cost" => Ok(MetricKindPlan::Cost),
            "rows" => Ok(MetricKindPlan::Rows),
            other => Err(format!("unknown plan metric `{other}`")),
        }
    }
}

/// One operator label's share of a metric, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricShare {
    pub label: String,
    pub pct: f64,
}

/// Share of `metric` per display label, largest first, ties by label.
///
/// The cost metric uses exclusive cost. Nodes without the metric contribute
/// nothing; labels appear only if at least one of their nodes carries it.
/// When every carried value is zero the share is split by node count.
pub fn metric_percentages(tree: &PlanNode, metric: MetricKindPlan) -> Result<Vec<MetricShare>> {
    let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for node in tree.walk() {
        if let Some(value) = node.metric(metric) {
            let entry = groups.entry(node.display_name.as_str()).or_default();
            entry.0 += value;
            entry.1 += 1;
        }
    }
    if groups.is_empty() {
        return Err(Error::MetricUnavailable(metric.as_str()));
    }

    let total: f64 = groups.values().map(|(sum, _)| sum).sum();
    let bearing: usize = groups.values().map(|(_, n)| n).sum();
    let mut shares: Vec<MetricShare> = groups
        .into_iter()
        .map(|(label, (sum, count))| MetricShare {
            label: label.to_string(),
            pct: if total > 0.0 {
                100.0 * (sum / total)
            } else {
                100.0 * (count as f64 / bearing as f64)
            },
        })
        .collect();
    shares.sort_by(|a, b| b.pct.total_cmp(&a.pct).then_with(|| a.label.cmp(&b.label)));
    Ok(shares)
}

/// A rendered plan plus its metric breakdown, as served to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanView {
    pub tree: HierarchyNode,
    /// `None` when no node carries the requested metric.
    pub percentages: Option<Vec<MetricShare>>,
    #[serde(
        rename = "percentagesError",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub percentages_error: Option<String>,
}

/// Runs a raw capture through parsing, normalization and rendering.
/// `dialect = None` detects the dialect from the capture.
pub fn plan_view(
    capture: &str,
    dialect: Option<Dialect>,
    term: Terminology,
    metric: MetricKindPlan,
) -> Result<PlanView> {
    let dialect = match dialect {
        Some(d) => d,
        None => crate::plan::detect_dialect(capture)?,
    };
    let raw = crate::plan::parse_plan(capture, dialect)?;
    let tree = render_terminology(&normalize(&raw, dialect), term);
    let (percentages, percentages_error) = match metric_percentages(&tree, metric) {
        Ok(shares) => (Some(shares), None),
        Err(e @ Error::MetricUnavailable(_)) => (None, Some(e.code().to_string())),
        Err(e) => return Err(e),
    };
    Ok(PlanView {
        tree: HierarchyNode::from(&tree),
        percentages,
        percentages_error,
    })
}
