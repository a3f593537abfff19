//! Instance synthesis and umbrella populations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin};
use crate::orm::{RoleId, Schema, SizeMap, TypeId, TypeKind};
use crate::sizing::{bound_map, gen_pattern, GenConfig, Pattern};
use crate::tree::{GridTree, NodeId};

/// A generated instance: an atom, a composed identification, or nil.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instance {
    Nil,
    Atom { text: String, ty: TypeId, index: u64 },
    Seq(Vec<Instance>),
}

impl Instance {
    pub fn is_nil(&self) -> bool {
        matches!(self, Instance::Nil)
    }

    /// Atom texts in left-to-right order.
    pub fn atoms(&self) -> Vec<&str> {
        fn walk<'a>(i: &'a Instance, out: &mut Vec<&'a str>) {
            match i {
                Instance::Nil => {}
                Instance::Atom { text, .. } => out.push(text),
                Instance::Seq(items) => items.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Display text, `None` for nil.
    pub fn text(&self) -> Option<String> {
        (!self.is_nil()).then(|| self.atoms().join(", "))
    }
}

/// The spread permutation of `0..product`: even indices count up from the
/// bottom, odd ones down from the top.
pub fn gamma(m: u64, product: u64) -> Result<u64> {
    if m >= product {
        return Err(Error::Range {
            subject: "gamma".into(),
            index: m,
            bound: product,
        });
    }
    Ok(if m.is_multiple_of(2) { m / 2 } else { product - m.div_ceil(2) })
}

/// Per-component get-instance indices (1-based) for composition index `m`
/// over components of the given sizes.
pub fn compose_indices(sizes: &[u64], m: u64) -> Result<Vec<u64>> {
    let product = sizes
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s))
        .ok_or_else(|| Error::SizeOverflow("composition".into()))?;
    match sizes {
        [] => Err(Error::Range {
            subject: "composition".into(),
            index: m,
            bound: 0,
        }),
        [s] => Ok(vec![gamma(m, *s)? + 1]),
        [s1, rest @ ..] => {
            let g = gamma(m, product)?;
            let mut out = compose_indices(&[*s1], g % s1)?;
            out.extend(compose_indices(rest, g / s1)?);
            Ok(out)
        }
    }
}

/// Example values per value type; anything not covered gets a surrogate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueProvider {
    examples: BTreeMap<TypeId, Vec<String>>,
}

impl ValueProvider {
    /// The examples declared in the schema.
    pub fn from_schema(schema: &Schema) -> Self {
        let examples = schema
            .types_of_kind(TypeKind::Value)
            .filter_map(|t| schema.value_examples(t).map(|e| (t, e.to_vec())))
            .collect();
        ValueProvider { examples }
    }

    pub fn with_examples(mut self, ty: TypeId, examples: Vec<String>) -> Self {
        self.examples.insert(ty, examples);
        self
    }

    /// The `n`th instance of `x` (1-based).
    pub fn gen_value(&self, schema: &Schema, x: TypeId, n: u64) -> Instance {
        let example = self
            .examples
            .get(&x)
            .filter(|_| schema.is_value(x))
            .and_then(|e| e.get(usize::try_from(n).ok()?.checked_sub(1)?));
        let text = match example {
            Some(e) => e.clone(),
            None => format!("{}{n}", schema.type_name(x)),
        };
        Instance::Atom { text, ty: x, index: n }
    }
}

/// What instance generation needs to know about one grid.
#[derive(Debug, Clone, Copy)]
pub struct Ctx<'a> {
    pub schema: &'a Schema,
    pub tree: &'a GridTree,
    pub provider: &'a ValueProvider,
    pub bounds: &'a SizeMap,
}

impl Ctx<'_> {
    fn bound(&self, n: NodeId) -> Result<u64> {
        let t = self.tree.obj(n).ok_or_else(|| Error::UnknownNode(n.to_string()))?;
        self.bounds
            .get(t)
            .finite()
            .ok_or_else(|| Error::SizeOverflow(self.schema.type_name(t).to_string()))
    }

    /// Instance `n` of the type at `node`, shaped by the node's identification.
    pub fn get_inst(&self, node: NodeId, n: u64) -> Result<Instance> {
        if n == 0 {
            return Ok(Instance::Nil);
        }
        let bound = self.bound(node)?;
        if n > bound {
            return Err(Error::Range {
                subject: node.to_string(),
                index: n,
                bound,
            });
        }
        match self.tree.n_ref_sch(node) {
            Some(nrs) => self.compose(&nrs.nodes(), n - 1),
            None => Ok(self.provider.gen_value(self.schema, self.tree.ty(node), n)),
        }
    }

    /// Composition of the identification instances of `comps` for index `m`.
    /// Two or more components nest as (head, rest) pairs.
    pub fn compose(&self, comps: &[NodeId], m: u64) -> Result<Instance> {
        let sizes = comps.iter().map(|&c| self.bound(c)).collect::<Result<Vec<_>>>()?;
        match comps {
            [] => Err(Error::Range {
                subject: "composition".into(),
                index: m,
                bound: 0,
            }),
            [c] => Ok(Instance::Seq(vec![self.get_inst(*c, gamma(m, sizes[0])? + 1)?])),
            [c1, rest @ ..] => {
                let product = sizes
                    .iter()
                    .try_fold(1u64, |acc, &s| acc.checked_mul(s))
                    .ok_or_else(|| Error::SizeOverflow("composition".into()))?;
                let g = gamma(m, product)?;
                Ok(Instance::Seq(vec![
                    self.compose(&[*c1], g % sizes[0])?,
                    self.compose(rest, g / sizes[0])?,
                ]))
            }
        }
    }

    /// `(identification node, instance index)` per component of instance
    /// `n` of `node`; empty when the node carries no identification.
    pub fn components(&self, node: NodeId, n: u64) -> Result<Vec<(NodeId, u64)>> {
        let Some(nrs) = self.tree.n_ref_sch(node) else {
            return Ok(Vec::new());
        };
        if n == 0 {
            return Ok(Vec::new());
        }
        let comps = nrs.nodes();
        let sizes = comps.iter().map(|&c| self.bound(c)).collect::<Result<Vec<_>>>()?;
        Ok(comps.into_iter().zip(compose_indices(&sizes, n - 1)?).collect())
    }
}

/// Where the roles of one relationship type show up in an umbrella.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoleLayout {
    /// Role whose instances fill the root column, when the root is a player.
    pub root_role: Option<RoleId>,
    /// Column node per role.
    pub role_nodes: BTreeMap<RoleId, NodeId>,
    /// Nodes showing the relationship tuple itself.
    pub rel_nodes: Vec<NodeId>,
}

pub fn role_layout(schema: &Schema, tree: &GridTree, root: NodeId, rel: TypeId) -> RoleLayout {
    let mut out = RoleLayout::default();
    if tree.obj(root) == Some(rel) {
        out.rel_nodes.push(root);
    }
    for &(l, m) in tree.e_out(root) {
        if schema.rel(l.role) != rel {
            continue;
        }
        if l.reversed {
            out.role_nodes.entry(l.role).or_insert(m);
            continue;
        }
        if out.root_role.is_none() && !out.rel_nodes.contains(&root) {
            out.root_role = Some(l.role);
            out.role_nodes.insert(l.role, root);
        }
        if tree.is_implicit(m) {
            for &(q, k) in tree.e_out(m) {
                out.role_nodes.entry(q.role).or_insert(k);
            }
        } else {
            out.rel_nodes.push(m);
        }
    }
    out
}

/// Instances of `node`'s type consumed by a pattern for `rel` under the
/// identification-derived bounds.
pub fn usage(schema: &Schema, tree: &GridTree, rel: TypeId, node: NodeId, cfg: &GenConfig) -> ExtNat {
    let bounds = bound_map(schema);
    let Some(ty) = tree.obj(node) else {
        return ExtNat::Inf;
    };
    if !bounds.get(ty).is_finite() {
        return ExtNat::Inf;
    }
    let Ok(pattern) = gen_pattern(schema, rel, &bounds, cfg) else {
        return ExtNat::Inf;
    };
    let player = role_layout(schema, tree, node, rel).root_role.map(|p| schema.player(p));
    let used = |t: TypeId| pattern.used.0.get(&t).copied();
    used(ty).or_else(|| player.and_then(used)).map_or(ExtNat::Inf, Fin)
}

/// Negotiated number of root instances of the umbrella at `n`; 0 when `n`
/// has no outgoing edges.
pub fn node_size(schema: &Schema, tree: &GridTree, n: NodeId, cfg: &GenConfig) -> u64 {
    let rels = tree.rel_set(schema, n);
    if rels.is_empty() {
        return 0;
    }
    let cap = rels
        .into_iter()
        .map(|r| usage(schema, tree, r, n, cfg))
        .min()
        .unwrap_or(ExtNat::Inf);
    match cap {
        Fin(u) => u.min(cfg.max_user_size_pref),
        ExtNat::Inf => cfg.max_user_size_pref,
    }
}

pub type RelRow = BTreeMap<RoleId, Instance>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelPopulation {
    pub rel: TypeId,
    pub layout: RoleLayout,
    pub pattern: Pattern,
    /// `rows[i]` renders `pattern.rows[i]`.
    pub rows: Vec<RelRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPopulation {
    pub root: NodeId,
    pub node_size: u64,
    pub rels: Vec<RelPopulation>,
    /// Distinct non-nil instances per player type, most used first for
    /// the root's type.
    pub o_pop: BTreeMap<TypeId, Vec<Instance>>,
}

impl GridPopulation {
    pub fn r_pop(&self, rel: TypeId) -> Option<&[RelRow]> {
        self.rels.iter().find(|p| p.rel == rel).map(|p| p.rows.as_slice())
    }
}

/// Populates the umbrella rooted at `root`.
pub fn gen_pop(
    schema: &Schema,
    tree: &GridTree,
    root: NodeId,
    cfg: &GenConfig,
    provider: &ValueProvider,
) -> Result<GridPopulation> {
    let root_ty = tree.obj(root).ok_or_else(|| Error::UnknownNode(root.to_string()))?;
    let bounds = bound_map(schema);
    let ctx = Ctx {
        schema,
        tree,
        provider,
        bounds: &bounds,
    };
    let size = node_size(schema, tree, root, cfg);
    let mut rels = Vec::new();
    let mut o_pop: BTreeMap<TypeId, Vec<Instance>> = BTreeMap::new();
    let mut order_types = vec![root_ty];
    for rel in tree.rel_set(schema, root) {
        let layout = role_layout(schema, tree, root, rel);
        let mut sizes = bounds.clone();
        match layout.root_role {
            Some(p) => {
                sizes.lower(schema.player(p), Fin(size));
                order_types.push(schema.player(p));
            }
            None => sizes.lower(rel, Fin(size)),
        }
        // keep every index within the type shown in its column
        for (&q, &k) in &layout.role_nodes {
            sizes.lower(schema.player(q), bounds.get(tree.ty(k)));
        }
        let pattern = gen_pattern(schema, rel, &sizes, cfg)?;
        let mut rows = Vec::with_capacity(pattern.rows.len());
        for prow in &pattern.rows {
            let mut row = RelRow::new();
            for &q in schema.roles_of(rel) {
                let n = prow.get(q);
                let inst = match layout.role_nodes.get(&q) {
                    Some(&k) => ctx.get_inst(k, n)?,
                    None if n == 0 => Instance::Nil,
                    None => provider.gen_value(schema, schema.player(q), n),
                };
                if !inst.is_nil() {
                    let seen = o_pop.entry(schema.player(q)).or_default();
                    if !seen.contains(&inst) {
                        seen.push(inst.clone());
                    }
                }
                row.insert(q, inst);
            }
            rows.push(row);
        }
        rels.push(RelPopulation {
            rel,
            layout,
            pattern,
            rows,
        });
    }
    order_types.dedup();
    let mut pop = GridPopulation {
        root,
        node_size: size,
        rels,
        o_pop,
    };
    for x in order_types {
        if let Some(seq) = pop.o_pop.get(&x) {
            let sorted = reorder(schema, &pop, seq, x);
            pop.o_pop.insert(x, sorted);
        }
    }
    Ok(pop)
}

/// Number of rows using `v` in some role played by `x`.
pub fn tuples(schema: &Schema, pop: &GridPopulation, v: &Instance, x: TypeId) -> usize {
    pop.rels
        .iter()
        .flat_map(|rp| rp.rows.iter())
        .filter(|row| row.iter().any(|(&p, inst)| schema.player(p) == x && inst == v))
        .count()
}

/// Stable sort of `seq` by descending tuple count.
pub fn reorder(schema: &Schema, pop: &GridPopulation, seq: &[Instance], x: TypeId) -> Vec<Instance> {
    let mut keyed: Vec<(usize, &Instance)> = seq.iter().map(|v| (tuples(schema, pop, v, x), v)).collect();
    keyed.sort_by_key(|k| std::cmp::Reverse(k.0));
    keyed.into_iter().map(|(_, v)| v.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_tree_spec;
    use crate::fixtures;

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(0, 1).unwrap(), 0);
        assert_eq!(gamma(0, 7).unwrap(), 0);
        assert_eq!(gamma(1, 4).unwrap(), 3);
        assert_eq!(gamma(3, 4).unwrap(), 2);
        assert!(gamma(4, 4).is_err());
    }

    #[test]
    fn gen_value_examples_and_surrogates() {
        let s = fixtures::orders();
        let p = ValueProvider::from_schema(&s);
        let date = s.lookup_type("Date").unwrap();
        assert_eq!(p.gen_value(&s, date, 2).text().unwrap(), "8/8/94");
        assert_eq!(p.gen_value(&s, date, 4).text().unwrap(), "Date4");
        let li = s.lookup_type("LineInfo").unwrap();
        assert_eq!(p.gen_value(&s, li, 1).text().unwrap(), "LineInfo1");
        let shop = fixtures::shop();
        let cn = shop.lookup_type("CustName").unwrap();
        assert_eq!(ValueProvider::from_schema(&shop).gen_value(&shop, cn, 4).text().unwrap(), "Di");
    }

    fn shop_ctx<R>(f: impl FnOnce(Ctx<'_>, NodeId, NodeId) -> R) -> R {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        let provider = ValueProvider::from_schema(&s);
        let bounds = bound_map(&s);
        let ctx = Ctx {
            schema: &s,
            tree: &t,
            provider: &provider,
            bounds: &bounds,
        };
        f(ctx, t.node_by_label("c").unwrap(), t.node_by_label("o").unwrap())
    }

    #[test]
    fn get_inst_spreads_customer_names() {
        shop_ctx(|ctx, c, o| {
            assert_eq!(ctx.get_inst(c, 0).unwrap(), Instance::Nil);
            let names: Vec<_> = (1..=4).map(|n| ctx.get_inst(c, n).unwrap().text().unwrap()).collect();
            assert_eq!(names, ["Ann", "Di", "Bob", "Cy"]);
            assert!(matches!(ctx.get_inst(c, 1).unwrap(), Instance::Seq(ref v) if v.len() == 1));
            let orders: Vec<_> = (1..=4).map(|n| ctx.get_inst(o, n).unwrap().text().unwrap()).collect();
            assert_eq!(orders, ["OrderNr1", "OrderNr6", "OrderNr2", "OrderNr5"]);
            assert!(matches!(ctx.get_inst(c, 5), Err(Error::Range { .. })));
            let cn = ctx.tree.idf_nodes(c).unwrap()[0];
            assert_eq!(ctx.compose(&[cn], 0).unwrap().text().unwrap(), "Ann");
            assert!(ctx.compose(&[cn], 4).is_err());
        });
    }

    #[test]
    fn composite_components_match_composition() {
        let s = fixtures::orders();
        let t = parse_tree_spec("root l: LineInfo { explode }", &s).unwrap();
        let provider = ValueProvider::from_schema(&s);
        let bounds = bound_map(&s);
        let ctx = Ctx {
            schema: &s,
            tree: &t,
            provider: &provider,
            bounds: &bounds,
        };
        let root = t.root().unwrap();
        let total = bounds.get(s.lookup_type("LineInfo").unwrap()).finite().unwrap();
        assert_eq!(total, 30);
        let mut seen = std::collections::BTreeSet::new();
        for n in 1..=total {
            let inst = ctx.get_inst(root, n).unwrap();
            let parts: Vec<String> = ctx
                .components(root, n)
                .unwrap()
                .into_iter()
                .map(|(k, i)| ctx.get_inst(k, i).unwrap().text().unwrap())
                .collect();
            assert_eq!(inst.atoms().join(", "), parts.join(", "));
            assert!(seen.insert(inst));
        }
    }

    #[test]
    fn shop_sizes_negotiate_to_four() {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        let cfg = GenConfig::default();
        let c = t.node_by_label("c").unwrap();
        let places = s.lookup_type("Places").unwrap();
        assert_eq!(usage(&s, &t, places, c, &cfg), Fin(4));
        assert_eq!(usage(&s, &t, places, c, &cfg), usage(&s, &t, places, c, &cfg));
        assert_eq!(node_size(&s, &t, c, &cfg), 4);
        let capped = GenConfig {
            max_user_size_pref: 3,
            ..cfg
        };
        assert_eq!(node_size(&s, &t, c, &capped), 3);
        assert_eq!(node_size(&s, &t, t.node_by_label("o").unwrap(), &cfg), 0);
    }

    #[test]
    fn shop_population_and_reorder() {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        let c = t.node_by_label("c").unwrap();
        let pop = gen_pop(&s, &t, c, &GenConfig::default(), &ValueProvider::from_schema(&s)).unwrap();
        let by = s.lookup_role("by").unwrap();
        let of = s.lookup_role("of").unwrap();
        let rows: Vec<(Option<String>, Option<String>)> = pop.r_pop(s.lookup_type("Places").unwrap()).unwrap()
            .iter()
            .map(|r| (r[&by].text(), r[&of].text()))
            .collect();
        let expect = [
            ("Ann", Some("OrderNr1")),
            ("Ann", Some("OrderNr6")),
            ("Di", None),
            ("Bob", Some("OrderNr2")),
            ("Bob", Some("OrderNr5")),
            ("Cy", None),
        ];
        let expect: Vec<_> = expect.iter().map(|(a, b)| (Some(a.to_string()), b.map(String::from))).collect();
        assert_eq!(rows, expect);
        let customers: Vec<_> = pop.o_pop[&s.lookup_type("Customer").unwrap()]
            .iter()
            .map(|i| i.text().unwrap())
            .collect();
        assert_eq!(customers, ["Ann", "Bob", "Di", "Cy"]);
        for seq in pop.o_pop.values() {
            assert!(seq.iter().all(|i| !i.is_nil()));
            let distinct: std::collections::BTreeSet<_> = seq.iter().collect();
            assert_eq!(distinct.len(), seq.len());
        }
    }

    #[test]
    fn leaf_umbrella_is_empty() {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        let o = t.node_by_label("o").unwrap();
        let pop = gen_pop(&s, &t, o, &GenConfig::default(), &ValueProvider::from_schema(&s)).unwrap();
        assert!(pop.rels.is_empty() && pop.o_pop.is_empty());
    }

    #[test]
    fn reorder_is_stable_for_equal_counts() {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        let c = t.node_by_label("c").unwrap();
        let pop = gen_pop(&s, &t, c, &GenConfig::default(), &ValueProvider::from_schema(&s)).unwrap();
        let cust = s.lookup_type("Customer").unwrap();
        let counts: Vec<usize> = pop.o_pop[&cust].iter().map(|v| tuples(&s, &pop, v, cust)).collect();
        assert_eq!(counts, [2, 2, 1, 1]);
        // instances of a type playing nothing keep their order
        let qty = s.lookup_type("Qty").unwrap();
        let seq: Vec<_> = (1..=3).map(|n| ValueProvider::default().gen_value(&s, qty, n)).collect();
        assert_eq!(reorder(&s, &pop, &seq, qty), seq);
    }
}
