//! The rendered grid: one table per umbrella, ready for JSON.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orm::Schema;
use crate::popgen::{gen_pop, Ctx, GridPopulation, RelPopulation, ValueProvider};
use crate::sizing::{bound_map, GenConfig};
use crate::tree::{GridTree, NodeId, NodeRefScheme};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDocument {
    pub umbrellas: Vec<UmbrellaGrid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UmbrellaGrid {
    pub root: String,
    pub columns: Vec<Column>,
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Column {
    /// Grid node the column belongs to.
    pub node: String,
    /// From the grid node down to the identification node shown; a single
    /// element unless the node is exploded.
    pub path: Vec<String>,
    #[serde(rename = "type")]
    pub type_name: String,
    pub can_extend: bool,
    pub explodable: bool,
    pub exploded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRow {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub text: Option<String>,
    pub key: Option<String>,
}

impl Cell {
    pub const NIL: Cell = Cell { text: None, key: None };
}

/// What a grid node shows in one row before it is split into columns.
enum Source {
    Nil,
    /// Instance `index` of the node's type.
    Value(NodeId, u64),
    /// The `ordinal`th tuple of a relationship type, with its role cells.
    Tuple(NodeId, u64, Vec<(NodeId, u64)>),
}

impl GridDocument {
    /// Populates and renders every umbrella of `tree`, in display order.
    pub fn build(schema: &Schema, tree: &GridTree, cfg: &GenConfig, provider: &ValueProvider) -> Result<GridDocument> {
        let bounds = bound_map(schema);
        let ctx = Ctx {
            schema,
            tree,
            provider,
            bounds: &bounds,
        };
        let mut roots: Vec<NodeId> = tree
            .grid_nodes()
            .filter(|&n| !tree.is_implicit(n) && !tree.rel_set(schema, n).is_empty())
            .collect();
        roots.sort_by_key(|&n| (tree.order(n), n));
        let mut umbrellas = Vec::with_capacity(roots.len());
        for root in roots {
            let pop = gen_pop(schema, tree, root, cfg, provider)?;
            umbrellas.push(umbrella(&ctx, &pop)?);
        }
        Ok(GridDocument { umbrellas })
    }

    pub fn row_count(&self) -> usize {
        self.umbrellas.iter().map(|u| u.rows.len()).sum()
    }

    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid documents always serialize")
    }
}

/// Identification paths below `n`, expanding exploded nodes only.
fn leaves(ctx: &Ctx<'_>, n: NodeId) -> Vec<Vec<NodeId>> {
    if !ctx.tree.is_exploded(ctx.schema, n) {
        return vec![vec![n]];
    }
    let comps = ctx.tree.n_ref_sch(n).map_or(Vec::new(), NodeRefScheme::nodes);
    comps
        .into_iter()
        .flat_map(|c| leaves(ctx, c))
        .map(|mut p| {
            p.insert(0, n);
            p
        })
        .collect()
}

fn umbrella(ctx: &Ctx<'_>, pop: &GridPopulation) -> Result<UmbrellaGrid> {
    let (schema, tree) = (ctx.schema, ctx.tree);
    let root = pop.root;
    let mut members: Vec<NodeId> = tree
        .umbrella(root)
        .into_iter()
        .filter(|&m| !tree.is_implicit(m))
        .collect();
    members.sort_by_key(|&m| (tree.order(m), m));
    members.insert(0, root);

    let mut columns = Vec::new();
    let mut layout: Vec<(NodeId, Vec<Vec<NodeId>>)> = Vec::new();
    for &m in &members {
        let paths = leaves(ctx, m);
        let exploded = tree.is_exploded(schema, m);
        for p in &paths {
            let leaf = *p.last().expect("paths are nonempty");
            columns.push(Column {
                node: m.to_string(),
                path: p.iter().map(NodeId::to_string).collect(),
                type_name: schema.type_name(tree.ty(leaf)).to_string(),
                can_extend: tree.can_extend(schema, m),
                explodable: tree.is_explodable(schema, m),
                exploded,
            });
        }
        layout.push((m, paths));
    }

    // rows follow the root's reordered population; nil roots go last
    let mut keyed = Vec::new();
    for rp in &pop.rels {
        let order = rp.layout.root_role.and_then(|p| pop.o_pop.get(&schema.player(p)));
        let mut ordinal = 0;
        for (i, row) in rp.rows.iter().enumerate() {
            if rp.pattern.rows[i].is_complete() {
                ordinal += 1;
            }
            let rank = match (rp.layout.root_role, order) {
                (Some(p), Some(seq)) => seq.iter().position(|v| *v == row[&p]).unwrap_or(usize::MAX),
                _ => 0,
            };
            keyed.push((rank, rp, i, ordinal));
        }
    }
    keyed.sort_by_key(|k| k.0);

    let mut rows = Vec::with_capacity(keyed.len());
    for (_, rp, i, ordinal) in keyed {
        let mut cells = Vec::with_capacity(columns.len());
        for (m, paths) in &layout {
            let src = source(ctx, rp, i, ordinal, *m);
            for p in paths {
                cells.push(render(ctx, &src, p)?);
            }
        }
        rows.push(GridRow { cells });
    }
    Ok(UmbrellaGrid {
        root: root.to_string(),
        columns,
        rows,
    })
}

fn source(ctx: &Ctx<'_>, rp: &RelPopulation, i: usize, ordinal: u64, m: NodeId) -> Source {
    let prow = &rp.pattern.rows[i];
    if rp.layout.rel_nodes.contains(&m) {
        if !prow.is_complete() {
            return Source::Nil;
        }
        let comps = match ctx.tree.n_ref_sch(m) {
            Some(NodeRefScheme::Roles(v)) => v.iter().map(|&(p, c)| (c, prow.get(p))).collect(),
            _ => Vec::new(),
        };
        return Source::Tuple(m, ordinal, comps);
    }
    match rp.layout.role_nodes.iter().find(|&(_, &k)| k == m) {
        Some((&q, _)) if prow.get(q) > 0 => Source::Value(m, prow.get(q)),
        _ => Source::Nil,
    }
}

/// The cell at the end of `path`, which starts at the source's node.
fn render(ctx: &Ctx<'_>, src: &Source, path: &[NodeId]) -> Result<Cell> {
    let key = |n: NodeId, idx: u64| format!("{}#{idx}", ctx.schema.type_name(ctx.tree.ty(n)));
    match src {
        Source::Nil => Ok(Cell::NIL),
        Source::Value(n, idx) => value_cell(ctx, *n, *idx, &path[1..]),
        Source::Tuple(n, ordinal, comps) => {
            if path.len() > 1 {
                let &(c, idx) = comps
                    .iter()
                    .find(|(c, _)| *c == path[1])
                    .ok_or_else(|| Error::UnknownNode(path[1].to_string()))?;
                return value_cell(ctx, c, idx, &path[2..]);
            }
            let text = match comps.as_slice() {
                [(c, idx)] => ctx.get_inst(*c, *idx)?.text(),
                _ => ctx.provider.gen_value(ctx.schema, ctx.tree.ty(*n), *ordinal).text(),
            };
            Ok(Cell {
                text,
                key: Some(key(*n, *ordinal)),
            })
        }
    }
}

fn value_cell(ctx: &Ctx<'_>, n: NodeId, idx: u64, rest: &[NodeId]) -> Result<Cell> {
    match rest.first() {
        None => Ok(Cell {
            text: ctx.get_inst(n, idx)?.text(),
            key: Some(format!("{}#{idx}", ctx.schema.type_name(ctx.tree.ty(n)))),
        }),
        Some(&next) => {
            let &(c, i) = ctx
                .components(n, idx)?
                .iter()
                .find(|(c, _)| *c == next)
                .ok_or_else(|| Error::UnknownNode(next.to_string()))?;
            value_cell(ctx, c, i, &rest[1..])
        }
    }
}
