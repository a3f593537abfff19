//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};

use exemplar_core::dsl::{parse_schema, parse_tree_spec, render_schema, render_tree_spec};
use exemplar_core::popgen::{compose_indices, ValueProvider};
use exemplar_core::{
    calc_sizes, fixtures, gamma, gen_pattern, initial_max_size, plausibility_report, resize, validate_tree,
    ExtNat, GenConfig, GridDocument, Schema, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, why: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why.into())
    }
}

fn propagation() -> Outcome {
    let s = fixtures::prop();
    let fp = calc_sizes(&s, &GenConfig::default());
    let size = |n: &str| fp.sizes.get(s.lookup_type(n).unwrap());
    ensure(size("A") == ExtNat::Fin(2), format!("Size(A) = {}", size("A")))?;
    ensure(size("F") == ExtNat::Fin(2), format!("Size(F) = {}", size("F")))?;
    Ok("Size(A) = 2, Size(F) = 2".into())
}

fn gen_inst() -> Outcome {
    let s = fixtures::orders();
    let p = ValueProvider::from_schema(&s);
    let date = p.gen_value(&s, s.lookup_type("Date").unwrap(), 2).text();
    let line = p.gen_value(&s, s.lookup_type("LineInfo").unwrap(), 1).text();
    ensure(date.as_deref() == Some("8/8/94"), format!("date gave {date:?}"))?;
    ensure(line.as_deref() == Some("LineInfo1"), format!("surrogate gave {line:?}"))?;
    Ok("8/8/94, LineInfo1".into())
}

fn significance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = 256;
    for i in 0..cases {
        let arity = rng.gen_range(2..=3);
        let floor = 2 * arity as u64 + 2;
        let uniques = (1u8..(1 << arity)).filter(|_| rng.gen_bool(0.3)).collect();
        let c = common::Case {
            arity,
            uniques,
            totals: (0..arity).map(|_| rng.gen_bool(0.5)).collect(),
            player_sizes: (0..arity).map(|_| rng.gen_range(floor..floor + 8)).collect(),
            rel_size: rng.gen_bool(0.5).then(|| rng.gen_range(floor..floor * 6)),
        };
        let (schema, rel, sizes) = common::build(&c);
        let p = gen_pattern(&schema, rel, &sizes, &GenConfig::default()).map_err(|e| e.to_string())?;
        common::check(&c, schema.roles_of(rel), &p, &sizes, &schema).map_err(|e| format!("case {i} {c:?}: {e}"))?;
    }
    Ok(format!("{cases} relationship types"))
}

fn all_fixtures() -> Vec<(&'static str, Schema)> {
    vec![
        ("shop", fixtures::shop()),
        ("prop", fixtures::prop()),
        ("orders", fixtures::orders()),
        ("empty_domain", fixtures::empty_domain()),
    ]
}

fn fixed_point() -> Outcome {
    for (name, s) in all_fixtures() {
        for cfg in [GenConfig::default(), GenConfig::verbatim()] {
            let start = initial_max_size(&s);
            ensure(resize(&s, &start, &cfg).le_pointwise(&start), format!("{name}: resize grew"))?;
            let fp = calc_sizes(&s, &cfg);
            ensure(resize(&s, &fp.sizes, &cfg) == fp.sizes, format!("{name}: not a fixed point"))?;
            let budget = start.iter().filter_map(|(_, v)| v.finite()).sum::<u64>() + s.type_count() as u64;
            ensure(fp.iterations as u64 <= budget, format!("{name}: {} iterations", fp.iterations))?;
        }
    }
    Ok("4 fixtures, both accountings".into())
}

fn bijections() -> Outcome {
    for n in 1..=64u64 {
        let image: BTreeSet<u64> = (0..n).map(|m| gamma(m, n).unwrap()).collect();
        ensure(image.len() as u64 == n && image.iter().all(|&v| v < n), format!("gamma not onto for {n}"))?;
    }
    let mut vectors = 0;
    let mut stack: Vec<Vec<u64>> = (1..=256).map(|s| vec![s]).collect();
    while let Some(sizes) = stack.pop() {
        let product: u64 = sizes.iter().product();
        vectors += 1;
        let mut seen = vec![false; product as usize];
        for m in 0..product {
            let idx = compose_indices(&sizes, m).map_err(|e| e.to_string())?;
            let rank = idx.iter().zip(&sizes).rev().fold(0, |acc, (&i, &s)| acc * s + (i - 1));
            ensure(
                idx.iter().zip(&sizes).all(|(&i, &s)| (1..=s).contains(&i)) && !seen[rank as usize],
                format!("compose {sizes:?} fails at {m}"),
            )?;
            seen[rank as usize] = true;
        }
        if sizes.len() < 4 {
            stack.extend((1..=256 / product).map(|s| [sizes.as_slice(), &[s]].concat()));
        }
    }
    Ok(format!("N <= 64, {vectors} size vectors"))
}

fn rel_of(s: &Schema, role: exemplar_core::RoleId) -> exemplar_core::TypeId {
    s.relationship_types().find(|&r| s.roles_of(r).contains(&role)).unwrap()
}

fn tree_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let schemas = [fixtures::shop(), fixtures::orders(), fixtures::prop()];
    let trees = 600;
    let mut implicit_seen = 0;
    for i in 0..trees {
        let s = &schemas[i % schemas.len()];
        let steps: Vec<(usize, usize, u8)> = (0..rng.gen_range(1..24)).map(|_| (rng.gen(), rng.gen(), rng.gen())).collect();
        let t = common::walk(s, rng.gen(), &steps);
        ensure(validate_tree(s, &t).is_empty(), format!("tree {i} invalid"))?;
        implicit_seen += usize::from(!t.implicit_nodes().is_empty());
        for n in t.grid_nodes() {
            for &(l, m) in t.e_out(n) {
                ensure(!(t.is_implicit(n) && t.is_implicit(m)), format!("tree {i}: implicit neighbours"))?;
                if t.is_implicit(n) {
                    let ty = t.obj(n).unwrap();
                    let ins = t.e_in(n).into_iter().map(|(li, _)| li.role);
                    ensure(
                        rel_of(s, l.role) == ty && ins.into_iter().all(|r| rel_of(s, r) == ty),
                        format!("tree {i}: mixed relationship types at {n}"),
                    )?;
                }
            }
            if !t.is_implicit(n) {
                for m in t.umbrella(n) {
                    let (_, p) = t.parent(m).unwrap();
                    ensure(p == n || t.parent(p).map(|x| x.1) == Some(n), format!("tree {i}: deep umbrella at {n}"))?;
                }
            }
        }
    }
    ensure(implicit_seen > 50, format!("only {implicit_seen} trees had implicit nodes"))?;
    Ok(format!("{trees} trees, {implicit_seen} with implicit nodes"))
}

/// Rebuilds the shop grid from first principles: the pattern loop for a
/// binary relationship with `of` unique and total, the spread permutation,
/// and the usage ordering.
fn simulate_shop_grid() -> Value {
    let gamma = |m: u64, n: u64| if m.is_multiple_of(2) { m / 2 } else { n - m.div_ceil(2) };
    let (cust_bound, order_bound, places_bound) = (4u64, 6u64, 24u64);
    let pattern = |cust_size: u64| {
        let (mut c, mut o, mut p) = (0u64, 0u64, 0u64);
        let mut rows = Vec::new();
        // only of may mutate since unique(of) excludes by; by is optional, of is not
        while c < cust_size && o < order_bound && p < places_bound {
            c += 1;
            o += 1;
            p += 1;
            rows.push((c, o));
            if o < order_bound && p < places_bound {
                o += 1;
                p += 1;
                rows.push((c, o));
            }
            if c < cust_size {
                c += 1;
                rows.push((c, 0));
            }
        }
        (rows, c)
    };
    let (_, used_c) = pattern(cust_bound);
    let node_size = used_c.min(10);
    let (rows, _) = pattern(node_size);
    let names = ["Ann", "Bob", "Cy", "Di"];
    let cust = |n: u64| names[gamma(n - 1, 4) as usize];
    let order = |n: u64| format!("OrderNr{}", gamma(n - 1, 6) + 1);

    let mut first_seen: Vec<u64> = Vec::new();
    for &(c, _) in &rows {
        if !first_seen.contains(&c) {
            first_seen.push(c);
        }
    }
    let count = |c: u64| rows.iter().filter(|r| r.0 == c).count();
    let mut ranked = first_seen.clone();
    ranked.sort_by_key(|&c| std::cmp::Reverse(count(c)));
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| ranked.iter().position(|&c| c == r.0));

    let cell = |text: Option<String>, key: Option<String>| json!({"text": text, "key": key});
    let out_rows: Vec<Value> = sorted
        .iter()
        .map(|&(c, o)| {
            let oc = if o == 0 {
                cell(None, None)
            } else {
                cell(Some(order(o)), Some(format!("Order#{o}")))
            };
            json!({"cells": [cell(Some(cust(c).into()), Some(format!("Customer#{c}"))), oc]})
        })
        .collect();
    let column = |node: &str, ty: &str| {
        json!({"node": node, "path": [node], "type": ty, "canExtend": true, "explodable": false, "exploded": false})
    };
    json!({"umbrellas": [{"root": "n0", "columns": [column("n0", "Customer"), column("n3", "Order")], "rows": out_rows}]})
}

fn golden_grid() -> Outcome {
    let golden = include_str!("golden/shop_grid.json");
    let sim = simulate_shop_grid();
    let parsed: Value = serde_json::from_str(golden).map_err(|e| e.to_string())?;
    ensure(parsed == sim, "golden file disagrees with the simulator")?;
    let s = fixtures::shop();
    let t = parse_tree_spec(fixtures::SHOP_TREE, &s).map_err(|d| format!("{d:?}"))?;
    let doc = GridDocument::build(&s, &t, &GenConfig::default(), &ValueProvider::from_schema(&s)).map_err(|e| e.to_string())?;
    ensure(doc.to_json() + "\n" == golden, "rendered JSON differs from the golden file")?;
    let order: Vec<_> = doc.umbrellas[0].rows.iter().filter_map(|r| r.cells[0].text.clone()).fold(Vec::new(), |mut v, x| {
        if !v.contains(&x) {
            v.push(x);
        }
        v
    });
    ensure(order == ["Ann", "Bob", "Di", "Cy"], format!("customer order {order:?}"))?;
    Ok(format!("{} rows, order {}", doc.row_count(), order.join(" ")))
}

fn dsl() -> Outcome {
    for (name, s) in all_fixtures() {
        let back = parse_schema(&render_schema(&s)).into_result().map_err(|d| format!("{name}: {d:?}"))?;
        ensure(back.is_isomorphic(&s) && render_schema(&back) == render_schema(&s), format!("{name} round trip"))?;
    }
    ensure(render_schema(&fixtures::shop()) == fixtures::SHOP_ORM, "shop text not reproduced")?;
    let shop = fixtures::shop();
    let t = parse_tree_spec(fixtures::SHOP_TREE, &shop).map_err(|d| format!("{d:?}"))?;
    let text = render_tree_spec(&shop, &t);
    ensure(parse_tree_spec(&text, &shop).is_ok_and(|b| b.same_structure(&t)), "tree spec round trip")?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inputs = 10_000;
    let mut crashes = 0;
    for _ in 0..inputs {
        let len = rng.gen_range(0..200);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let src = String::from_utf8_lossy(&bytes).into_owned();
        let ok = catch_unwind(AssertUnwindSafe(|| {
            let _ = parse_schema(&src);
            let _ = parse_tree_spec(&src, &shop);
        }));
        crashes += usize::from(ok.is_err());
    }
    ensure(crashes == 0, format!("{crashes} crashes"))?;
    Ok(format!("fixtures round-trip, {inputs} fuzz inputs, 0 crashes"))
}

fn plausibility() -> Outcome {
    let cfg = GenConfig::default();
    let e = plausibility_report(&fixtures::empty_domain(), &cfg);
    let item = e.finding("Item").ok_or("no Item finding")?;
    ensure(item.verdict == Verdict::Error, format!("Item verdict {:?}", item.verdict))?;
    ensure(e.suspects == ["ItemCode"], format!("suspects {:?}", e.suspects))?;
    let shop = plausibility_report(&fixtures::shop(), &cfg);
    let order = shop.finding("Order").ok_or("no Order finding")?;
    ensure(order.verdict == Verdict::Warning, format!("Order verdict {:?}", order.verdict))?;
    ensure(shop.suspects.contains(&"Places".to_string()), "Places not suspected")?;
    let others: BTreeMap<_, _> = shop.types.iter().map(|f| (f.type_name.as_str(), f.verdict)).collect();
    ensure(others.values().all(|&v| v != Verdict::Error), "shop has an error")?;
    Ok("Item error via ItemCode, Order warning via Places".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("propagation reproduction", propagation),
        ("value generation fixture", gen_inst),
        ("significance suite", significance),
        ("fixed-point properties", fixed_point),
        ("spread and composition bijectivity", bijections),
        ("tree lemma suite", tree_lemmas),
        ("end-to-end golden grid", golden_grid),
        ("dsl round-trip and parser fuzz", dsl),
        ("plausibility verdicts", plausibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
