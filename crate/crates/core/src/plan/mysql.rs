//! `EXPLAIN FORMAT=JSON` unnesting shared by MySQL and MariaDB.
//!
//! Both servers describe a query as a `query_block` whose body is a stack of
//! wrapper objects (`ordering_operation`, `grouping_operation`, `filesort`,
//! ...) around tables. Joins are listed linearly, either as a `nested_loop`
//! array or, on MariaDB, as repeated `table` entries. A join over k inputs is
//! rebuilt as a left-deep chain of k - 1 join nodes.

use super::{non_negative_attr, RawPlanNode};
use crate::error::{Error, Result};
use crate::lenient_json::{parse_document, JsonDoc};

pub(super) const JOIN_OP: &str = "nested_loop";

/// Keys holding lists of subqueries; each entry carries a `query_block`.
const SUBQUERY_KEYS: &[&str] = &[
    "attached_subqueries",
    "having_subqueries",
    "select_list_subqueries",
    "order_by_subqueries",
    "group_by_subqueries",
    "optimized_away_subqueries",
    "subqueries",
];

const CONDITION_KEYS: &[&str] = &["attached_condition", "having_condition"];

/// Format differences between the two servers.
pub(super) struct Flavor {
    pub wrappers: &'static [&'static str],
    /// Table attribute holding the row estimate, in order of preference.
    pub rows_keys: &'static [&'static str],
    /// Transparent objects that contribute one table to the join sequence.
    pub join_members: &'static [&'static str],
    pub repeated_tables: bool,
}

pub(super) const MYSQL: Flavor = Flavor {
    wrappers: &[
        "ordering_operation",
        "grouping_operation",
        "duplicates_removal",
        "windowing",
        "union_result",
    ],
    rows_keys: &["rows_examined_per_scan", "rows"],
    join_members: &[],
    repeated_tables: false,
};

/// Parses MySQL `EXPLAIN FORMAT=JSON` output.
pub fn parse_mysql_plan(text: &str) -> Result<RawPlanNode> {
    parse_with(text, &MYSQL)
}

pub(super) fn parse_with(text: &str, flavor: &Flavor) -> Result<RawPlanNode> {
    let doc = parse_document(text)?;
    let block = doc
        .get("query_block")
        .filter(|b| b.is_object())
        .ok_or_else(|| Error::structure("missing \"query_block\""))?;
    let mut root = query_block(block, flavor)?;
    if root.cost.is_none() {
        root.cost = non_negative_attr(block_cost(block), "query cost", "query_block")?;
    }
    Ok(root)
}

fn block_cost(block: &JsonDoc) -> Option<f64> {
    block
        .get("cost_info")
        .and_then(|c| c.get("query_cost"))
        .or_else(|| block.get("cost"))
        .and_then(JsonDoc::as_f64)
}

fn query_block(block: &JsonDoc, flavor: &Flavor) -> Result<RawPlanNode> {
    let mut node = match body(block, flavor)? {
        Some(node) => node,
        None => {
            let message = block
                .get("message")
                .and_then(JsonDoc::as_str)
                .ok_or_else(|| Error::structure("query_block has no operators"))?;
            RawPlanNode::new(message)
        }
    };
    attach_subqueries(block, &mut node, flavor)?;
    Ok(node)
}

/// Builds the operator for a container object (a query block or a wrapper
/// body) from its operator-bearing entries, in source order.
fn body(obj: &JsonDoc, flavor: &Flavor) -> Result<Option<RawPlanNode>> {
    let mut members: Vec<(RawPlanNode, &str)> = Vec::new();
    let mut seen_table = false;
    for (key, value) in obj.entries() {
        match key.as_str() {
            "table" => {
                if seen_table && !flavor.repeated_tables {
                    return Err(Error::structure("repeated \"table\" entry in one block"));
                }
                seen_table = true;
                members.push((table(value, flavor)?, JOIN_OP));
            }
            "nested_loop" => members.push((nested_loop(value, flavor)?, JOIN_OP)),
            "query_block" if value.is_object() => members.push((query_block(value, flavor)?, JOIN_OP)),
            k if flavor.join_members.contains(&k) => members.push((join_member(value, flavor)?, k)),
            k if flavor.wrappers.contains(&k) || (value.is_object() && bears_operators(value)) => {
                if SUBQUERY_KEYS.contains(&k) || k == "materialized_from_subquery" {
                    continue;
                }
                members.push((wrapper(k, value, flavor)?, JOIN_OP));
            }
            _ => {}
        }
    }
    Ok(chain(members))
}

fn bears_operators(doc: &JsonDoc) -> bool {
    match doc {
        JsonDoc::Object(entries) => entries.iter().any(|(k, v)| {
            matches!(k.as_str(), "table" | "nested_loop" | "query_block") || bears_operators(v)
        }),
        JsonDoc::Array(items) => items.iter().any(bears_operators),
        _ => false,
    }
}

/// Left-deep join chain: `[a, b, c]` becomes `join(join(a, b), c)`. Each
/// member carries the label of the join that brings it in.
fn chain(members: Vec<(RawPlanNode, &str)>) -> Option<RawPlanNode> {
    let mut iter = members.into_iter();
    let (first, _) = iter.next()?;
    Some(iter.fold(first, |left, (right, join_op)| {
        let mut join = RawPlanNode::new(join_op);
        join.children = vec![left, right];
        join
    }))
}

fn nested_loop(value: &JsonDoc, flavor: &Flavor) -> Result<RawPlanNode> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::structure("\"nested_loop\" is not an array"))?;
    let mut members = Vec::with_capacity(items.len());
    for item in items {
        let member = body(item, flavor)?
            .ok_or_else(|| Error::structure("\"nested_loop\" entry without a table"))?;
        members.push((member, JOIN_OP));
    }
    chain(members).ok_or_else(|| Error::structure("empty \"nested_loop\""))
}

/// MariaDB's `block-nl-join` style objects wrap the next table of the join
/// sequence together with join-buffer attributes.
fn join_member(value: &JsonDoc, flavor: &Flavor) -> Result<RawPlanNode> {
    let table_doc = value
        .get("table")
        .ok_or_else(|| Error::structure("join buffer entry without a table"))?;
    let mut node = table(table_doc, flavor)?;
    for (key, attr) in value.entries() {
        if key == "table" {
            continue;
        }
        if CONDITION_KEYS.contains(&key.as_str()) {
            if let Some(text) = attr.as_str() {
                if node.condition.is_none() {
                    node.condition = Some(text.to_string());
                } else {
                    node.extras.insert(format!("join.{key}"), text.to_string());
                }
                continue;
            }
        }
        if let Some(text) = attr.scalar_text() {
            node.extras.insert(format!("join.{key}"), text);
        }
    }
    Ok(node)
}

fn wrapper(key: &str, value: &JsonDoc, flavor: &Flavor) -> Result<RawPlanNode> {
    let mut node = RawPlanNode::new(key);
    node.cost = non_negative_attr(
        value
            .get("cost_info")
            .and_then(|c| c.get("sort_cost").or_else(|| c.get("query_cost")))
            .or_else(|| value.get("cost"))
            .and_then(JsonDoc::as_f64),
        "cost",
        key,
    )?;
    collect_attributes(value, &mut node);

    if key == "union_result" {
        if let Some(specs) = value.get("query_specifications").and_then(JsonDoc::as_array) {
            for spec in specs {
                let block = spec.get("query_block").unwrap_or(spec);
                node.children.push(query_block(block, flavor)?);
            }
        }
    } else if let Some(inner) = body(value, flavor)? {
        node.children.push(inner);
    }
    attach_subqueries(value, &mut node, flavor)?;
    Ok(node)
}

fn table(value: &JsonDoc, flavor: &Flavor) -> Result<RawPlanNode> {
    if !value.is_object() {
        return Err(Error::structure("\"table\" is not an object"));
    }
    let access_type = value
        .get("access_type")
        .and_then(JsonDoc::as_str)
        .ok_or_else(|| Error::structure("table entry without \"access_type\""))?;
    let mut node = RawPlanNode::new(access_type);
    node.relation = value
        .get("table_name")
        .and_then(JsonDoc::as_str)
        .map(str::to_string);
    node.rows = non_negative_attr(
        flavor
            .rows_keys
            .iter()
            .find_map(|k| value.get(k).and_then(JsonDoc::as_f64)),
        "rows",
        access_type,
    )?;
    node.cost = non_negative_attr(table_cost(value), "cost", access_type)?;
    collect_attributes(value, &mut node);
    for key in ["access_type", "table_name"]
        .into_iter()
        .chain(flavor.rows_keys.iter().copied())
    {
        node.extras.remove(key);
    }

    if let Some(block) = value
        .get("materialized_from_subquery")
        .and_then(|m| m.get("query_block"))
    {
        node.children.push(query_block(block, flavor)?);
    }
    attach_subqueries(value, &mut node, flavor)?;
    Ok(node)
}

fn table_cost(value: &JsonDoc) -> Option<f64> {
    if let Some(info) = value.get("cost_info") {
        let read = info.get("read_cost").and_then(JsonDoc::as_f64);
        let eval = info.get("eval_cost").and_then(JsonDoc::as_f64);
        match (read, eval) {
            (Some(r), Some(e)) => return Some(r + e),
            (Some(v), None) | (None, Some(v)) => return Some(v),
            (None, None) => {}
        }
    }
    value.get("cost").and_then(JsonDoc::as_f64)
}

/// Copies the condition and scalar attributes of an operator object.
fn collect_attributes(value: &JsonDoc, node: &mut RawPlanNode) {
    for (key, attr) in value.entries() {
        if key == "cost" || key == "cost_info" {
            continue;
        }
        if CONDITION_KEYS.contains(&key.as_str()) && node.condition.is_none() {
            if let Some(text) = attr.as_str() {
                node.condition = Some(text.to_string());
                continue;
            }
        }
        if let Some(text) = attr.scalar_text() {
            node.extras.insert(key.clone(), text);
        }
    }
}

fn attach_subqueries(owner: &JsonDoc, node: &mut RawPlanNode, flavor: &Flavor) -> Result<()> {
    for (key, value) in owner.entries() {
        if !SUBQUERY_KEYS.contains(&key.as_str()) {
            continue;
        }
        let items = value
            .as_array()
            .ok_or_else(|| Error::structure(format!("\"{key}\" is not an array")))?;
        for item in items {
            let block = item
                .get("query_block")
                .ok_or_else(|| Error::structure(format!("\"{key}\" entry without query_block")))?;
            node.children.push(query_block(block, flavor)?);
        }
    }
    Ok(())
}
