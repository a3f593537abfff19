#![allow(dead_code)]

use std::collections::BTreeSet;

use exemplar_core::{ExtNat, GridTree, Link, NodeId, Pattern, RoleId, Schema, SchemaBuilder, SizeMap, TypeId};

/// Builds a tree by a walk of random edits, keeping only those accepted.
pub fn walk(schema: &Schema, root_pick: usize, steps: &[(usize, usize, u8)]) -> GridTree {
    let types: Vec<_> = schema.types().collect();
    let mut tree = GridTree::new(schema, types[root_pick % types.len()]).unwrap();
    for &(a, b, op) in steps {
        let nodes: Vec<NodeId> = tree.grid_nodes().collect();
        let n = nodes[a % nodes.len()];
        let next = match op % 8 {
            0 => tree.explode(schema, n).ok(),
            1 => tree.collapse(schema, n).ok(),
            _ => {
                let ty = tree.obj(n).unwrap();
                let mut links: Vec<Link> = tree.extension_candidates(schema, n).unwrap().into_iter().collect();
                if schema.is_relationship(ty) {
                    links.extend(schema.roles_of(ty).iter().map(|&r| Link::reverse(r)));
                }
                if links.is_empty() {
                    None
                } else {
                    tree.add_edge(schema, n, links[b % links.len()]).ok().map(|(t, _)| t)
                }
            }
        };
        if let Some(t) = next {
            tree = t;
        }
    }
    tree
}

/// A random relationship with distinct value-type players.
#[derive(Debug, Clone)]
pub struct Case {
    pub arity: usize,
    /// Role bitmasks of declared uniqueness sets.
    pub uniques: Vec<u8>,
    pub totals: Vec<bool>,
    pub player_sizes: Vec<u64>,
    pub rel_size: Option<u64>,
}

fn role(i: usize) -> String {
    format!("r{i}")
}

pub fn build(c: &Case) -> (Schema, TypeId, SizeMap) {
    let mut b = SchemaBuilder::new();
    for (i, &s) in c.player_sizes.iter().enumerate() {
        b = b.value(&format!("V{i}"), Some(s), None);
    }
    let names: Vec<(String, String)> = (0..c.arity).map(|i| (role(i), format!("V{i}"))).collect();
    let pairs: Vec<(&str, &str)> = names.iter().map(|(r, t)| (r.as_str(), t.as_str())).collect();
    b = b.relationship("R", &pairs);
    for &m in &c.uniques {
        let set: Vec<String> = (0..c.arity).filter(|i| m & (1 << i) != 0).map(role).collect();
        let refs: Vec<&str> = set.iter().map(String::as_str).collect();
        b = b.unique(&refs);
    }
    for (i, &t) in c.totals.iter().enumerate() {
        if t {
            b = b.total(&[&role(i)]);
        }
    }
    let schema = b.build().expect("generated schema builds");
    let rel = schema.lookup_type("R").unwrap();
    let mut sizes = SizeMap::uniform(&schema, ExtNat::Inf);
    for (i, &s) in c.player_sizes.iter().enumerate() {
        sizes.set(schema.lookup_type(&format!("V{i}")).unwrap(), ExtNat::Fin(s));
    }
    sizes.set(rel, c.rel_size.map_or(ExtNat::Inf, ExtNat::Fin));
    (schema, rel, sizes)
}

/// Checks a pattern against the case description alone, without consulting
/// the schema's constraint accessors.
pub fn check(c: &Case, roles: &[RoleId], p: &Pattern, sizes: &SizeMap, schema: &Schema) -> Result<(), String> {
    let rows: Vec<Vec<u64>> = p.rows.iter().map(|r| roles.iter().map(|&q| r.get(q)).collect()).collect();
    let complete: Vec<&Vec<u64>> = rows.iter().filter(|r| r.iter().all(|&v| v > 0)).collect();
    let set_of = |m: u8| (0..c.arity).filter(move |i| m & (1 << i) != 0);

    for &m in &c.uniques {
        let mut seen = BTreeSet::new();
        for r in &complete {
            let proj: Vec<u64> = set_of(m).map(|i| r[i]).collect();
            if !seen.insert(proj.clone()) {
                return Err(format!("uniqueness {m:b} violated by {r:?}"));
            }
        }
    }
    for i in 0..c.arity {
        let mutable = c.uniques.iter().all(|&m| m & (1 << i) != 0);
        if mutable {
            let found = complete.iter().any(|a| {
                complete
                    .iter()
                    .any(|b| a[i] != b[i] && (0..c.arity).all(|j| j == i || a[j] == b[j]))
            });
            if !found {
                return Err(format!("no mutation pair at role {i}"));
            }
        }
        if !c.totals[i] {
            let found = rows
                .iter()
                .any(|r| r[i] > 0 && (0..c.arity).all(|j| j == i || r[j] == 0));
            if !found {
                return Err(format!("no nil row at role {i}"));
            }
        }
    }
    if complete.is_empty() {
        return Err("no complete row".into());
    }
    for (i, &q) in roles.iter().enumerate() {
        let player = schema.player(q);
        let used = p.used.0.get(&player).copied().unwrap_or(0);
        if ExtNat::Fin(used) > sizes.get(player) {
            return Err(format!("player {i} overdrawn"));
        }
        if rows.iter().any(|r| r[i] > used) {
            return Err(format!("index beyond usage at role {i}"));
        }
    }
    let rel_used = p.used.0.get(&p.rel).copied().unwrap_or(0);
    if ExtNat::Fin(rel_used) > sizes.get(p.rel) || rel_used != complete.len() as u64 {
        return Err("relationship count off".into());
    }
    Ok(())
}
