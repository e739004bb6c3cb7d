//! The hierarchy document consumed by tree-layout renderers.
//!
//! ```json
//! {"name": "...", "opClass": "...", "dialect": "postgres|mysql|mariadb",
//!  "attrs": {"cost": 1.0, "selfCost": 1.0, "rows": 1.0, "relation": null,
//!            "condition": null, "extra": {}},
//!  "children": [ ... ]}
//! ```
//!
//! Keys are emitted in that order and `extra` is sorted by key. The native
//! operator label is kept in `extra.rawName` when it differs from `name`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::taxonomy::OperatorClass;
use super::PlanNode;
use crate::error::{Error, Result};
use crate::plan::Dialect;

pub const RAW_NAME_KEY: &str = "rawName";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyNode {
    pub name: String,
    #[serde(rename = "opClass")]
    pub op_class: OperatorClass,
    pub dialect: Dialect,
    pub attrs: HierarchyAttrs,
    pub children: Vec<HierarchyNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyAttrs {
    pub cost: Option<f64>,
    #[serde(rename = "selfCost")]
    pub self_cost: Option<f64>,
    pub rows: Option<f64>,
    pub relation: Option<String>,
    pub condition: Option<String>,
    pub extra: BTreeMap<String, String>,
}

impl From<&PlanNode> for HierarchyNode {
    fn from(node: &PlanNode) -> Self {
        let mut extra = node.extras.clone();
        if node.raw_op_name != node.display_name {
            extra.insert(RAW_NAME_KEY.to_string(), node.raw_op_name.clone());
        }
        HierarchyNode {
            name: node.display_name.clone(),
            op_class: node.op_class,
            dialect: node.dialect,
            attrs: HierarchyAttrs {
                cost: node.cost,
                self_cost: node.self_cost,
                rows: node.rows,
                relation: node.relation.clone(),
                condition: node.condition.clone(),
                extra,
            },
            children: node.children.iter().map(HierarchyNode::from).collect(),
        }
    }
}

impl From<HierarchyNode> for PlanNode {
    fn from(node: HierarchyNode) -> Self {
        let mut extras = node.attrs.extra;
        let raw_op_name = extras.remove(RAW_NAME_KEY).unwrap_or_else(|| node.name.clone());
        PlanNode {
            op_class: node.op_class,
            display_name: node.name,
            raw_op_name,
            dialect: node.dialect,
            cost: node.attrs.cost,
            self_cost: node.attrs.self_cost,
            rows: node.attrs.rows,
            relation: node.attrs.relation,
            condition: node.attrs.condition,
            extras,
            children: node.children.into_iter().map(PlanNode::from).collect(),
        }
    }
}

/// Compact single-line document.
pub fn to_hierarchy_json(tree: &PlanNode) -> String {
    serde_json::to_string(&HierarchyNode::from(tree)).expect("hierarchy serializes")
}

/// Two-space indented document.
pub fn to_hierarchy_json_pretty(tree: &PlanNode) -> String {
    serde_json::to_string_pretty(&HierarchyNode::from(tree)).expect("hierarchy serializes")
}

pub fn from_hierarchy_json(text: &str) -> Result<PlanNode> {
    let node: HierarchyNode = serde_json::from_str(text).map_err(|e| Error::Json {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    Ok(node.into())
}
