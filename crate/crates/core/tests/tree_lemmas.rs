use exemplar_core::dsl::{parse_tree_spec, render_tree_spec};
mod common;

use common::walk;
use exemplar_core::{fixtures, validate_tree, Link, Schema};
use proptest::prelude::*;

fn schemas() -> Vec<Schema> {
    vec![fixtures::shop(), fixtures::orders(), fixtures::prop()]
}

fn rel_of(schema: &Schema, l: Link) -> exemplar_core::TypeId {
    let rel = schema.relationship_types().find(|&r| schema.roles_of(r).contains(&l.role));
    rel.expect("every role belongs to a relationship")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn random_trees_satisfy_the_lemmas(
        which in 0usize..3,
        root in 0usize..64,
        steps in proptest::collection::vec((0usize..64, 0usize..64, any::<u8>()), 1..24),
    ) {
        let schema = schemas().swap_remove(which);
        let tree = walk(&schema, root, &steps);
        prop_assert_eq!(validate_tree(&schema, &tree), vec![]);

        for n in tree.grid_nodes() {
            let implicit = tree.is_implicit(n);
            for &(l, m) in tree.e_out(n) {
                // no implicit neighbours
                prop_assert!(!(implicit && tree.is_implicit(m)));
                if implicit {
                    let ty = tree.obj(n).unwrap();
                    prop_assert_eq!(rel_of(&schema, l), ty);
                    for (li, _) in tree.e_in(n) {
                        prop_assert_eq!(rel_of(&schema, li), ty);
                    }
                }
            }
            if !implicit {
                // umbrella members sit at most two edges below the root
                for m in tree.umbrella(n) {
                    let (_, p) = tree.parent(m).unwrap();
                    prop_assert!(p == n || tree.parent(p).map(|(_, g)| g) == Some(n));
                }
            }
        }
        prop_assert!(tree.root().is_some());

        // rendering and reparsing reproduces the tree
        let text = render_tree_spec(&schema, &tree);
        let back = parse_tree_spec(&text, &schema).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(render_tree_spec(&schema, &back), text);
        prop_assert_eq!(back.grid_nodes().count(), tree.grid_nodes().count());
    }

    #[test]
    fn explode_then_collapse_restores(which in 0usize..3, root in 0usize..64, steps in proptest::collection::vec((0usize..64, 0usize..64, 2u8..8), 0..10)) {
        let schema = schemas().swap_remove(which);
        let tree = walk(&schema, root, &steps);
        for n in tree.grid_nodes().collect::<Vec<_>>() {
            if tree.is_explodable(&schema, n) {
                let ex = tree.explode(&schema, n).unwrap();
                prop_assert!(ex.is_exploded(&schema, n) && !ex.is_explodable(&schema, n));
                prop_assert_eq!(validate_tree(&schema, &ex), vec![]);
                prop_assert!(ex.collapse(&schema, n).unwrap().same_structure(&tree));
            }
            prop_assert_eq!(tree.can_extend(&schema, n), !tree.extension_candidates(&schema, n).unwrap().is_empty());
        }
    }
}

#[test]
fn walks_build_nontrivial_trees() {
    let schema = fixtures::orders();
    let (mut deepest, mut implicit, mut exploded) = (0, 0, 0);
    for seed in 0..64usize {
        let steps: Vec<_> = (0..20).map(|i| (seed * 7 + i, seed + i * 3, ((seed + i) % 8) as u8)).collect();
        let t = walk(&schema, seed, &steps);
        deepest = deepest.max(t.grid_nodes().count());
        implicit += usize::from(!t.implicit_nodes().is_empty());
        exploded += usize::from(t.grid_nodes().any(|n| t.is_exploded(&schema, n)));
    }
    assert!(deepest >= 5);
    assert!(implicit >= 8, "{implicit} walks reached an implicit node");
    assert!(exploded >= 4, "{exploded} walks exploded a node");
}
