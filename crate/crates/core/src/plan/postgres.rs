use std::sync::LazyLock;

use regex::Regex;

use super::{non_negative_attr, RawPlanNode};
use crate::error::{Error, Result};
use crate::lenient_json::{parse_document, JsonDoc};

/// Keys whose value is the node's predicate, in order of preference. The
/// first one present becomes `condition`, the rest stay in `extras`.
const CONDITION_KEYS: &[&str] = &[
    "Filter",
    "Index Cond",
    "Hash Cond",
    "Merge Cond",
    "Join Filter",
    "Recheck Cond",
    "One-Time Filter",
    "TID Cond",
];

static COST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"\(cost=(?P<startup>\d+(?:\.\d+)?)\.\.(?P<total>\d+(?:\.\d+)?)\s+rows=(?P<rows>\d+)\s+width=(?P<width>\d+)\)",
    )
    .unwrap()
});
static ROW_COUNT_TRAILER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\(\d+ rows?\)$").unwrap());

/// Parses PostgreSQL `EXPLAIN` output in JSON or classic text format.
pub fn parse_postgres_plan(text: &str) -> Result<RawPlanNode> {
    let trimmed = text.trim_start();
    let looks_like_json = trimmed.starts_with('[') || trimmed.starts_with('{');
    let has_cost_annotations = COST.is_match(text);
    if looks_like_json || !has_cost_annotations {
        match parse_document(text) {
            Ok(doc) => return parse_json(&doc),
            Err(e) if !has_cost_annotations => return Err(e),
            Err(_) => {}
        }
    }
    parse_text(text)
}

fn parse_json(doc: &JsonDoc) -> Result<RawPlanNode> {
    let top = match doc {
        JsonDoc::Array(items) => items
            .first()
            .ok_or_else(|| Error::structure("empty EXPLAIN array"))?,
        other => other,
    };
    let plan = match top.get("Plan") {
        Some(plan) if plan.is_object() => plan,
        Some(_) => return Err(Error::structure("\"Plan\" is not an object")),
        None if top.get("Node Type").is_some() => top,
        None => return Err(Error::structure("missing \"Plan\" object")),
    };
    json_node(plan)
}

fn json_node(obj: &JsonDoc) -> Result<RawPlanNode> {
    let node_type = obj
        .get("Node Type")
        .and_then(JsonDoc::as_str)
        .ok_or_else(|| Error::structure("plan node without \"Node Type\""))?;

    let qualifiers: Vec<&str> = ["Strategy", "Join Type"]
        .iter()
        .filter_map(|k| obj.get(k).and_then(JsonDoc::as_str))
        .collect();
    let raw_op_name = if qualifiers.is_empty() {
        node_type.to_string()
    } else {
        format!("{node_type} ({})", qualifiers.join(", "))
    };

    let mut node = RawPlanNode::new(raw_op_name);
    node.cost = non_negative_attr(
        obj.get("Total Cost").and_then(JsonDoc::as_f64),
        "Total Cost",
        node_type,
    )?;
    node.rows = non_negative_attr(
        obj.get("Plan Rows").and_then(JsonDoc::as_f64),
        "Plan Rows",
        node_type,
    )?;

    let relation_key = ["Relation Name", "Index Name"]
        .into_iter()
        .find(|k| obj.get(k).and_then(JsonDoc::as_str).is_some());
    node.relation = relation_key.and_then(|k| obj.get(k)?.as_str().map(str::to_string));
    let condition_key = CONDITION_KEYS
        .iter()
        .copied()
        .find(|k| obj.get(k).and_then(JsonDoc::as_str).is_some());
    node.condition = condition_key.and_then(|k| obj.get(k)?.as_str().map(str::to_string));

    for (key, value) in obj.entries() {
        let consumed = matches!(
            key.as_str(),
            "Node Type" | "Strategy" | "Join Type" | "Total Cost" | "Plan Rows" | "Plans"
        ) || Some(key.as_str()) == relation_key
            || Some(key.as_str()) == condition_key;
        if consumed {
            continue;
        }
        if let Some(text) = value.scalar_text() {
            node.extras.insert(key.clone(), text);
        }
    }

    if let Some(plans) = obj.get("Plans") {
        let items = plans
            .as_array()
            .ok_or_else(|| Error::structure("\"Plans\" is not an array"))?;
        for child in items {
            if !child.is_object() {
                return Err(Error::structure("\"Plans\" entry is not an object"));
            }
            node.children.push(json_node(child)?);
        }
    }
    Ok(node)
}

struct TextNode {
    indent: usize,
    child_indent: Option<usize>,
    node: RawPlanNode,
    children: Vec<usize>,
}

fn indent_of(line: &str) -> usize {
    line.chars().take_while(|c| c.is_whitespace()).count()
}

/// Splits `Seq Scan on lineitem l` / `Index Scan using idx on orders` into
/// operator, relation and the remaining attributes.
fn text_label(label: &str, node: &mut RawPlanNode) {
    let (op, rest) = match label.find(" using ") {
        Some(i) => {
            let (op, rest) = label.split_at(i);
            let rest = &rest[" using ".len()..];
            let (index, rel) = match rest.find(" on ") {
                Some(j) => (&rest[..j], Some(&rest[j + " on ".len()..])),
                None => (rest, None),
            };
            node.extras.insert("Index Name".into(), index.trim().to_string());
            (op, rel)
        }
        None => match label.find(" on ") {
            Some(i) => (&label[..i], Some(&label[i + " on ".len()..])),
            None => (label, None),
        },
    };
    node.raw_op_name = op.trim().to_string();
    if let Some(rel) = rest {
        let mut parts = rel.split_whitespace();
        node.relation = parts.next().map(str::to_string);
        if let Some(alias) = parts.next() {
            node.extras.insert("Alias".into(), alias.to_string());
        }
    }
    if node.relation.is_none() {
        if let Some(index) = node.extras.remove("Index Name") {
            node.relation = Some(index);
        }
    }
}

fn text_node(body: &str, line_no: usize) -> Result<RawPlanNode> {
    let mut node = RawPlanNode::default();
    let label = match COST.captures(body) {
        Some(caps) => {
            let whole = caps.get(0).unwrap();
            let num = |name: &str| caps[name].parse::<f64>().ok();
            node.cost = num("total");
            node.rows = num("rows");
            node.extras
                .insert("Startup Cost".into(), caps["startup"].to_string());
            node.extras
                .insert("Plan Width".into(), caps["width"].to_string());
            &body[..whole.start()]
        }
        None => body.split("  (").next().unwrap_or(body),
    };
    let label = label.trim();
    if label.is_empty() {
        return Err(Error::structure(format!("line {line_no}: operator without a name")));
    }
    text_label(label, &mut node);
    Ok(node)
}

fn parse_text(text: &str) -> Result<RawPlanNode> {
    let mut arena: Vec<TextNode> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = indent_of(line);

        if let Some(body) = trimmed.strip_prefix("->") {
            if arena.is_empty() {
                return Err(Error::structure(format!(
                    "line {line_no}: child operator before the root operator"
                )));
            }
            while stack.last().is_some_and(|&top| arena[top].indent >= indent) {
                stack.pop();
            }
            let Some(&parent) = stack.last() else {
                return Err(Error::structure(format!(
                    "line {line_no}: operator is not indented below the root"
                )));
            };
            match arena[parent].child_indent {
                Some(expected) if expected != indent => {
                    return Err(Error::structure(format!(
                        "line {line_no}: inconsistent indentation (expected column {}, found {})",
                        expected + 1,
                        indent + 1
                    )));
                }
                _ => arena[parent].child_indent = Some(indent),
            }
            let node = text_node(body.trim(), line_no)?;
            let id = arena.len();
            arena.push(TextNode {
                indent,
                child_indent: None,
                node,
                children: Vec::new(),
            });
            arena[parent].children.push(id);
            stack.push(id);
            continue;
        }

        if arena.is_empty() {
            if COST.is_match(trimmed) {
                arena.push(TextNode {
                    indent,
                    child_indent: None,
                    node: text_node(trimmed, line_no)?,
                    children: Vec::new(),
                });
                stack.push(0);
            }
            continue;
        }

        if ROW_COUNT_TRAILER.is_match(trimmed) {
            continue;
        }
        // Detail lines belong to the nearest open operator indented less.
        let Some(&owner) = stack.iter().rev().find(|&&id| arena[id].indent < indent) else {
            continue;
        };
        if let Some((key, value)) = trimmed.split_once(": ") {
            let node = &mut arena[owner].node;
            let key = key.trim();
            if node.condition.is_none() && CONDITION_KEYS.contains(&key) {
                node.condition = Some(value.trim().to_string());
            } else {
                node.extras.insert(key.to_string(), value.trim().to_string());
            }
        }
    }

    if arena.is_empty() {
        return Err(Error::structure("no plan operators found"));
    }
    Ok(assemble(&mut arena, 0))
}

fn assemble(arena: &mut [TextNode], id: usize) -> RawPlanNode {
    let mut node = std::mem::take(&mut arena[id].node);
    let children = std::mem::take(&mut arena[id].children);
    node.children = children.into_iter().map(|c| assemble(arena, c)).collect();
    node
}
