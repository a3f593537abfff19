//! Synthetic schemas for the benchmarks.

use std::fmt::Write;

/// A chain of `n` entities, each named by its own value type, with a
/// many-to-one relationship from every entity to the next one.
pub fn chain_schema(n: usize) -> String {
    let mut s = String::new();
    for i in 0..n {
        writeln!(s, "value V{i} size {}", 4 + i % 5).unwrap();
        writeln!(s, "entity E{i} refby pairs ((e{i},v{i}))").unwrap();
        writeln!(s, "rel Id{i} (e{i}: E{i}, v{i}: V{i}) unique(e{i}) unique(v{i}) total(e{i}) total(v{i})").unwrap();
    }
    for i in 1..n {
        writeln!(s, "rel Next{i} (from{i}: E{}, to{i}: E{i}) unique(from{i}) total(from{i})", i - 1).unwrap();
    }
    s
}

/// Tree spec rooted at `E0` that follows the chain for `depth` hops.
pub fn chain_tree(depth: usize) -> String {
    let mut s = String::from("root n0: E0 ");
    for i in 1..=depth {
        write!(s, "{{ edge from{i} -> r{i}: Next{i} {{ edge to{i}~ -> n{i}: E{i} ").unwrap();
    }
    for _ in 0..depth {
        s.push_str("} } ");
    }
    s.trim_end().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use exemplar_core::dsl::{parse_schema, parse_tree_spec};

    #[test]
    fn generated_inputs_parse() {
        let s = parse_schema(&chain_schema(12)).into_result().unwrap();
        parse_tree_spec(&chain_tree(5), &s).unwrap();
    }
}
