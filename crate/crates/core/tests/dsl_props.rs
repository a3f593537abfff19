use exemplar_core::dsl::{parse_schema, parse_tree_spec, render_schema};
use exemplar_core::fixtures;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Fact {
    players: Vec<usize>,
    uniques: Vec<u8>,
    totals: Vec<bool>,
}

#[derive(Debug, Clone)]
struct Plan {
    values: Vec<(u64, Option<Vec<String>>)>,
    /// Identifying value per entity, a second one makes it composite.
    entities: Vec<(usize, Option<usize>)>,
    subtypes: Vec<usize>,
    facts: Vec<Fact>,
}

fn example() -> impl Strategy<Value = String> {
    "[a-z0-9 /\"\\\\]{0,6}"
}

fn plan() -> impl Strategy<Value = Plan> {
    let values = proptest::collection::vec((0u64..12, proptest::option::of(proptest::collection::vec(example(), 1..4))), 1..4);
    (values, 1usize..4, 0usize..3).prop_flat_map(|(values, n_ent, n_sub)| {
        let nv = values.len();
        let entities = proptest::collection::vec((0..nv, proptest::option::of(0..nv)), n_ent);
        let subtypes = proptest::collection::vec(0..n_ent, n_sub);
        let n_obj = n_ent + n_sub;
        let fact = (2usize..=3).prop_flat_map(move |arity| {
            (
                proptest::collection::vec(0..n_obj + nv, arity),
                proptest::collection::vec(1u8..(1 << arity), 0..3),
                proptest::collection::vec(any::<bool>(), arity),
            )
                .prop_map(|(players, uniques, totals)| Fact { players, uniques, totals })
        });
        let facts = proptest::collection::vec(fact, 0..4);
        (Just(values), entities, subtypes, facts).prop_map(|(values, entities, subtypes, facts)| Plan {
            values,
            entities,
            subtypes,
            facts,
        })
    })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn text(p: &Plan) -> String {
    let mut out = String::new();
    for (i, (size, ex)) in p.values.iter().enumerate() {
        out += &format!("value V{i} size {size}");
        if let Some(ex) = ex {
            out += &format!(" examples [{}]", ex.iter().map(|e| quote(e)).collect::<Vec<_>>().join(","));
        }
        out += "\n";
    }
    for (j, &(a, b)) in p.entities.iter().enumerate() {
        match b {
            None => out += &format!("entity E{j} refby pairs ((e{j}a,v{j}a))\n"),
            Some(_) => out += &format!("entity E{j} refby pairs ((e{j}a,v{j}a),(e{j}b,v{j}b))\n"),
        }
        let uniq = if b.is_none() { format!(" unique(v{j}a)") } else { String::new() };
        out += &format!("rel I{j}a (e{j}a: E{j}, v{j}a: V{a}) unique(e{j}a){uniq} total(e{j}a)\n");
        if let Some(b) = b {
            out += &format!("rel I{j}b (e{j}b: E{j}, v{j}b: V{b}) unique(e{j}b) total(e{j}b)\n");
            out += &format!("rel I{j}c (k{j}a: E{j}, k{j}b: E{j}) unique(k{j}a)\n");
        }
    }
    let n_ent = p.entities.len();
    let obj_name = |k: usize| {
        if k < n_ent {
            format!("E{k}")
        } else if k < n_ent + p.subtypes.len() {
            format!("S{}", k - n_ent)
        } else {
            format!("V{}", k - n_ent - p.subtypes.len())
        }
    };
    for (f, fact) in p.facts.iter().enumerate() {
        let roles: Vec<String> = fact
            .players
            .iter()
            .enumerate()
            .map(|(i, &k)| format!("f{f}r{i}: {}", obj_name(k)))
            .collect();
        out += &format!("rel F{f} ({})", roles.join(", "));
        for &m in &fact.uniques {
            let set: Vec<String> = (0..fact.players.len()).filter(|i| m & (1 << i) != 0).map(|i| format!("f{f}r{i}")).collect();
            out += &format!(" unique({})", set.join(", "));
        }
        for (i, &t) in fact.totals.iter().enumerate() {
            if t {
                out += &format!(" total(f{f}r{i})");
            }
        }
        out += "\n";
    }
    for (s, &sup) in p.subtypes.iter().enumerate() {
        out += &format!("entity S{s} refby super E{sup}\nS{s} isa E{sup}\n");
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn render_parse_round_trip(p in plan()) {
        let src = text(&p);
        let parsed = parse_schema(&src);
        // generated schemas may break a validation rule; only valid ones round-trip
        let Ok(schema) = parsed.into_result() else {
            return Ok(());
        };
        let rendered = render_schema(&schema);
        let again = parse_schema(&rendered).into_result();
        prop_assert!(again.is_ok(), "{:?}\n{}", again, rendered);
        let again = again.unwrap();
        prop_assert!(schema.is_isomorphic(&again));
        prop_assert_eq!(render_schema(&again), rendered);
    }
}

#[test]
fn most_generated_schemas_are_valid() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let valid = (0..200)
        .filter(|_| {
            let p = plan().new_tree(&mut runner).unwrap().current();
            parse_schema(&text(&p)).into_result().is_ok()
        })
        .count();
    assert!(valid >= 100, "only {valid} of 200 generated schemas are valid");
}

#[test]
fn fixtures_render_verbatim() {
    assert_eq!(render_schema(&fixtures::shop()), fixtures::SHOP_ORM);
    assert_eq!(render_schema(&fixtures::prop()), fixtures::PROP_ORM);
}

const KEYWORDS: &[&str] = &[
    "value", "entity", "rel", "refby", "pairs", "roles", "super", "isa", "size", "examples", "unique", "total", "root",
    "edge", "explode", "(", ")", "[", "]", "{", "}", ",", ":", "~", "->", "\"", "#", "\n", "Customer", "by", "of~",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn parsers_are_total_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let src = String::from_utf8_lossy(&bytes);
        let out = parse_schema(&src);
        prop_assert!(out.schema.is_some() || !out.diagnostics.is_empty() || src.trim().is_empty());
        let shop = fixtures::shop();
        let _ = parse_tree_spec(&src, &shop);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn parsers_are_total_on_token_soup(words in proptest::collection::vec(proptest::sample::select(KEYWORDS), 0..40)) {
        let src = words.join(" ");
        let out = parse_schema(&src);
        for d in &out.diagnostics {
            prop_assert!(d.line >= 1 && d.column >= 1);
        }
        let shop = fixtures::shop();
        if let Err(diags) = parse_tree_spec(&src, &shop) {
            prop_assert!(!diags.is_empty());
        }
    }
}
