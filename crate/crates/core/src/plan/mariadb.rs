use super::mysql::{parse_with, Flavor};
use super::RawPlanNode;
use crate::error::Result;

const MARIADB: Flavor = Flavor {
    wrappers: &[
        "read_sorted_file",
        "filesort",
        "temporary_table",
        "duplicates_removal",
        "window_functions_computation",
        "union_result",
    ],
    rows_keys: &["rows", "rows_examined_per_scan"],
    join_members: &["block-nl-join", "bka-join", "hash-join"],
    repeated_tables: true,
};

/// Parses MariaDB `EXPLAIN FORMAT=JSON` / `ANALYZE FORMAT=JSON` output.
///
/// Tables listed one after another inside a block (repeated `"table"` keys,
/// or join-buffer objects such as `block-nl-join`) are the join order and
/// become a left-deep chain of join nodes.
pub fn parse_mariadb_plan(text: &str) -> Result<RawPlanNode> {
    parse_with(text, &MARIADB)
}
