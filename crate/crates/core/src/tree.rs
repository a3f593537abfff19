//! Grid trees: the selection of a subschema shown as an example grid.
//!
//! A tree is the five-component structure of nodes, outgoing edges, node
//! types, display order and per-node identification trees. Mutators return
//! new trees and keep every axiom checked by [`validate_tree`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::orm::{RefScheme, RoleId, Schema, TypeId};
use crate::violation::{Violation, ViolationCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<NodeId> {
        s.strip_prefix('n')
            .and_then(|d| d.parse().ok())
            .map(NodeId)
            .ok_or_else(|| Error::UnknownNode(s.to_string()))
    }
}

/// An edge label: a role, possibly traversed in reverse (from the
/// relationship type to the player).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub role: RoleId,
    pub reversed: bool,
}

impl Link {
    pub fn forward(role: RoleId) -> Link {
        Link {
            role,
            reversed: false,
        }
    }

    pub fn reverse(role: RoleId) -> Link {
        Link {
            role,
            reversed: true,
        }
    }

    pub fn flipped(self) -> Link {
        Link {
            role: self.role,
            reversed: !self.reversed,
        }
    }

    /// Parses `role` or `role~`.
    pub fn parse(schema: &Schema, text: &str) -> Result<Link> {
        let (name, reversed) = match text.strip_suffix('~') {
            Some(name) => (name, true),
            None => (text, false),
        };
        Ok(Link {
            role: schema.lookup_role(name)?,
            reversed,
        })
    }

    pub fn display(self, schema: &Schema) -> String {
        let name = schema.role_name(self.role);
        if self.reversed {
            format!("{name}~")
        } else {
            name.to_string()
        }
    }
}

/// `(Start, End)` of a link: player to relationship for a forward role,
/// relationship to player for a reversed one.
pub fn link_endpoints(schema: &Schema, link: Link) -> Result<(TypeId, TypeId)> {
    let rel = schema.rel_of(link.role)?;
    let player = schema.player(link.role);
    Ok(if link.reversed {
        (rel, player)
    } else {
        (player, rel)
    })
}

/// Identification structure attached to a node, mirroring the reference
/// scheme of its type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRefScheme {
    Super(NodeId),
    Roles(Vec<(RoleId, NodeId)>),
    Pairs(Vec<(RoleId, RoleId, NodeId)>),
}

impl NodeRefScheme {
    pub fn nodes(&self) -> Vec<NodeId> {
        match self {
            NodeRefScheme::Super(m) => vec![*m],
            NodeRefScheme::Roles(v) => v.iter().map(|&(_, m)| m).collect(),
            NodeRefScheme::Pairs(v) => v.iter().map(|&(_, _, m)| m).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridTree {
    next: u32,
    nodes: BTreeSet<NodeId>,
    obj: BTreeMap<NodeId, TypeId>,
    // keyed by every grid node; identification nodes have no entry
    e_out: BTreeMap<NodeId, Vec<(Link, NodeId)>>,
    order: BTreeMap<NodeId, u64>,
    n_ref_sch: BTreeMap<NodeId, NodeRefScheme>,
    labels: BTreeMap<NodeId, String>,
}

impl GridTree {
    /// A tree with a single root node of type `root_type`.
    pub fn new(schema: &Schema, root_type: TypeId) -> Result<GridTree> {
        if !schema.contains_type(root_type) {
            return Err(Error::UnknownType(format!("#{}", root_type.0)));
        }
        let mut tree = GridTree::empty();
        let root = tree.fresh(root_type);
        tree.e_out.insert(root, Vec::new());
        tree.add_simple_identification(schema, root, 0);
        Ok(tree)
    }

    /// A tree without nodes. It fails validation until a root is inserted;
    /// used with the `*_unchecked` mutators to build arbitrary shapes.
    pub fn empty() -> GridTree {
        GridTree {
            next: 0,
            nodes: BTreeSet::new(),
            obj: BTreeMap::new(),
            e_out: BTreeMap::new(),
            order: BTreeMap::new(),
            n_ref_sch: BTreeMap::new(),
            labels: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, ty: TypeId) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        let pos = self.order.values().max().map_or(0, |m| m + 1);
        self.nodes.insert(id);
        self.obj.insert(id, ty);
        self.order.insert(id, pos);
        id
    }

    pub fn insert_grid_node_unchecked(&mut self, ty: TypeId) -> NodeId {
        let id = self.fresh(ty);
        self.e_out.insert(id, Vec::new());
        id
    }

    pub fn insert_identification_node_unchecked(&mut self, ty: TypeId) -> NodeId {
        self.fresh(ty)
    }

    pub fn insert_edge_unchecked(&mut self, from: NodeId, link: Link, to: NodeId) {
        self.e_out.entry(from).or_default().push((link, to));
        self.e_out.entry(to).or_default();
    }

    pub fn set_identification_unchecked(&mut self, node: NodeId, scheme: NodeRefScheme) {
        self.n_ref_sch.insert(node, scheme);
    }

    pub fn set_order_unchecked(&mut self, node: NodeId, position: u64) {
        self.order.insert(node, position);
    }

    pub fn remove_obj_unchecked(&mut self, node: NodeId) {
        self.obj.remove(&node);
    }

    pub fn set_label(&mut self, node: NodeId, label: impl Into<String>) {
        self.labels.insert(node, label.into());
    }

    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.labels.get(&node).map(String::as_str)
    }

    /// Node carrying `label`, if any.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .find(|(_, l)| l.as_str() == label)
            .map(|(&n, _)| n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    /// Nodes of the grid itself, excluding identification nodes.
    pub fn grid_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.e_out.keys().copied()
    }

    pub fn is_grid_node(&self, n: NodeId) -> bool {
        self.e_out.contains_key(&n)
    }

    pub fn obj(&self, n: NodeId) -> Option<TypeId> {
        self.obj.get(&n).copied()
    }

    pub(crate) fn ty(&self, n: NodeId) -> TypeId {
        self.obj[&n]
    }

    pub fn order(&self, n: NodeId) -> Option<u64> {
        self.order.get(&n).copied()
    }

    pub fn e_out(&self, n: NodeId) -> &[(Link, NodeId)] {
        self.e_out.get(&n).map_or(&[], Vec::as_slice)
    }

    /// Incoming edges as `(link, source)` pairs.
    pub fn e_in(&self, n: NodeId) -> Vec<(Link, NodeId)> {
        self.e_out
            .iter()
            .flat_map(|(&m, edges)| {
                edges
                    .iter()
                    .filter(move |&&(_, t)| t == n)
                    .map(move |&(l, _)| (l, m))
            })
            .collect()
    }

    pub fn parent(&self, n: NodeId) -> Option<(Link, NodeId)> {
        self.e_in(n).into_iter().next()
    }

    pub fn n_ref_sch(&self, n: NodeId) -> Option<&NodeRefScheme> {
        self.n_ref_sch.get(&n)
    }

    /// The unique grid node without an incoming edge.
    pub fn root(&self) -> Option<NodeId> {
        let targets: BTreeSet<NodeId> = self
            .e_out
            .values()
            .flat_map(|v| v.iter().map(|&(_, m)| m))
            .collect();
        let mut roots = self.grid_nodes().filter(|n| !targets.contains(n));
        match (roots.next(), roots.next()) {
            (Some(r), None) => Some(r),
            _ => None,
        }
    }

    /// Nodes that need no column of their own: bare relationship nodes
    /// entered through a forward role and left through reversed roles only.
    pub fn implicit_nodes(&self) -> BTreeSet<NodeId> {
        self.grid_nodes().filter(|&n| self.is_implicit(n)).collect()
    }

    pub fn is_implicit(&self, n: NodeId) -> bool {
        let ins = self.e_in(n);
        let outs = self.e_out(n);
        !ins.is_empty()
            && !outs.is_empty()
            && ins.iter().all(|(l, _)| !l.reversed)
            && outs.iter().all(|(l, _)| l.reversed)
    }

    /// A node's direct descendants, closed over implicit children.
    pub fn umbrella(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for &(_, m) in self.e_out(n) {
            out.insert(m);
            if self.is_implicit(m) {
                out.extend(self.umbrella(m));
            }
        }
        out
    }

    /// Relationship types labelling the outgoing edges of `n`.
    pub fn rel_set(&self, schema: &Schema, n: NodeId) -> BTreeSet<TypeId> {
        self.e_out(n).iter().map(|&(l, _)| schema.rel(l.role)).collect()
    }

    /// Forward roles that could form a new edge at `n`.
    pub fn extension_candidates(&self, schema: &Schema, n: NodeId) -> Result<BTreeSet<Link>> {
        let ty = self.obj(n).ok_or_else(|| Error::UnknownNode(n.to_string()))?;
        let used: BTreeSet<Link> = self.e_out(n).iter().map(|&(l, _)| l).collect();
        Ok(schema
            .roles()
            .map(Link::forward)
            .filter(|l| schema.related(schema.player(l.role), ty) && !used.contains(l))
            .collect())
    }

    pub fn can_extend(&self, schema: &Schema, n: NodeId) -> bool {
        self.extension_candidates(schema, n)
            .is_ok_and(|c| !c.is_empty())
    }

    /// Adds an edge labelled `link` at `n` to a fresh node. Returns the new
    /// tree and the new node.
    pub fn add_edge(&self, schema: &Schema, n: NodeId, link: Link) -> Result<(GridTree, NodeId)> {
        if !self.contains(n) {
            return Err(Error::UnknownNode(n.to_string()));
        }
        if !self.is_grid_node(n) {
            return Err(Error::tree(
                ViolationCode::NotAGridNode,
                format!("{n} belongs to an identification tree"),
            ));
        }
        let (start, end) = link_endpoints(schema, link)?;
        let ty = self.ty(n);
        if !schema.related(start, ty) {
            return Err(Error::tree(
                ViolationCode::EdgeWellFormedness,
                format!(
                    "link `{}` starts at `{}`, not related to `{}` of {n}",
                    link.display(schema),
                    schema.type_name(start),
                    schema.type_name(ty)
                ),
            ));
        }
        if self.e_out(n).iter().any(|&(l, _)| l == link) {
            return Err(Error::tree(
                ViolationCode::LinkReuse,
                format!("{n} already has an edge labelled `{}`", link.display(schema)),
            ));
        }
        let mut tree = self.clone();
        let m = tree.fresh(end);
        tree.insert_edge_unchecked(n, link, m);
        tree.add_simple_identification(schema, m, 0);
        Ok((tree, m))
    }

    fn install_identification(&mut self, schema: &Schema, n: NodeId, depth: usize) {
        let Some(scheme) = schema.ref_sch(self.ty(n)).cloned() else {
            return;
        };
        let nrs = match scheme {
            RefScheme::SuperType(y) => NodeRefScheme::Super(self.fresh(y)),
            RefScheme::RoleSeq(roles) => NodeRefScheme::Roles(
                roles
                    .iter()
                    .map(|&p| (p, self.fresh(schema.player(p))))
                    .collect(),
            ),
            RefScheme::PairSeq(pairs) => NodeRefScheme::Pairs(
                pairs
                    .iter()
                    .map(|&(p, q)| (p, q, self.fresh(schema.player(q))))
                    .collect(),
            ),
        };
        let parts = nrs.nodes();
        self.n_ref_sch.insert(n, nrs);
        for m in parts {
            self.add_simple_identification(schema, m, depth + 1);
        }
    }

    fn add_simple_identification(&mut self, schema: &Schema, n: NodeId, depth: usize) {
        // the depth guard only matters for schemas with cyclic identification
        if depth > schema.type_count() || self.n_ref_sch.contains_key(&n) {
            return;
        }
        if schema.ref_sch(self.ty(n)).is_some_and(|s| s.len() == 1) {
            self.install_identification(schema, n, depth);
        }
    }

    /// Shows the identification of a compositely identified node as
    /// separate identification nodes.
    pub fn explode(&self, schema: &Schema, n: NodeId) -> Result<GridTree> {
        let ty = self.obj(n).ok_or_else(|| Error::UnknownNode(n.to_string()))?;
        match schema.ref_sch(ty) {
            Some(s) if s.len() > 1 => {}
            _ => {
                return Err(Error::tree(
                    ViolationCode::NotExplodable,
                    format!("`{}` is not compositely identified", schema.type_name(ty)),
                ))
            }
        }
        if self.n_ref_sch.contains_key(&n) {
            return Err(Error::tree(
                ViolationCode::AlreadyExploded,
                format!("{n} already shows its identification"),
            ));
        }
        let mut tree = self.clone();
        tree.install_identification(schema, n, 0);
        Ok(tree)
    }

    /// Inverse of [`explode`](GridTree::explode).
    pub fn collapse(&self, schema: &Schema, n: NodeId) -> Result<GridTree> {
        let ty = self.obj(n).ok_or_else(|| Error::UnknownNode(n.to_string()))?;
        if !self.n_ref_sch.contains_key(&n) {
            return Err(Error::tree(
                ViolationCode::NotExploded,
                format!("{n} shows no identification"),
            ));
        }
        if schema.ref_sch(ty).is_some_and(|s| s.len() == 1) {
            return Err(Error::tree(
                ViolationCode::SimpleIdentificationMandatory,
                format!("simple identification of `{}` cannot be hidden", schema.type_name(ty)),
            ));
        }
        let mut tree = self.clone();
        let mut stack = tree.n_ref_sch.remove(&n).map_or(Vec::new(), |s| s.nodes());
        while let Some(m) = stack.pop() {
            if let Some(s) = tree.n_ref_sch.remove(&m) {
                stack.extend(s.nodes());
            }
            tree.nodes.remove(&m);
            tree.obj.remove(&m);
            tree.order.remove(&m);
            tree.labels.remove(&m);
        }
        Ok(tree)
    }

    /// Whether `n` shows a composite identification chosen by the user (as
    /// opposed to a mandatory simple one).
    pub fn is_exploded(&self, schema: &Schema, n: NodeId) -> bool {
        self.n_ref_sch.contains_key(&n)
            && self
                .obj(n)
                .and_then(|t| schema.ref_sch(t))
                .is_some_and(|s| s.len() > 1)
    }

    pub fn is_explodable(&self, schema: &Schema, n: NodeId) -> bool {
        !self.n_ref_sch.contains_key(&n)
            && self
                .obj(n)
                .and_then(|t| schema.ref_sch(t))
                .is_some_and(|s| s.len() > 1)
    }

    /// Identification nodes of `n` in component order.
    pub fn idf_nodes(&self, n: NodeId) -> Result<Vec<NodeId>> {
        self.n_ref_sch
            .get(&n)
            .map(NodeRefScheme::nodes)
            .ok_or_else(|| Error::UndefinedIdentification(n.to_string()))
    }

    /// Re-derives the display order from conceptual weights, lighter types
    /// first. Equal weights keep their previous relative order.
    pub fn reorder_by_weight(&self, schema: &Schema, weights: &BTreeMap<TypeId, u64>) -> Result<GridTree> {
        let mut keyed = Vec::with_capacity(self.nodes.len());
        for n in self.nodes() {
            let ty = self.obj(n).ok_or_else(|| Error::UnknownNode(n.to_string()))?;
            let w = weights
                .get(&ty)
                .copied()
                .ok_or_else(|| Error::MissingWeight(schema.type_name(ty).to_string()))?;
            keyed.push((w, self.order(n).unwrap_or(u64::MAX), n));
        }
        keyed.sort();
        let mut tree = self.clone();
        for (pos, (_, _, n)) in keyed.into_iter().enumerate() {
            tree.order.insert(n, pos as u64);
        }
        Ok(tree)
    }

    /// Equality ignoring the fresh-id counter.
    pub fn same_structure(&self, other: &GridTree) -> bool {
        self.nodes == other.nodes
            && self.obj == other.obj
            && self.e_out == other.e_out
            && self.order == other.order
            && self.n_ref_sch == other.n_ref_sch
    }

    /// Nodes of `n`'s subtree in the grid, `n` excluded.
    pub fn descendants(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.e_out(n).iter().map(|&(_, m)| m).collect();
        while let Some(m) = stack.pop() {
            if out.insert(m) {
                stack.extend(self.e_out(m).iter().map(|&(_, k)| k));
            }
        }
        out
    }
}

/// Checks every tree axiom; an empty result means the tree is valid for `schema`.
pub fn validate_tree(schema: &Schema, tree: &GridTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |code, subjects: Vec<String>, msg: String| Violation::new(code, subjects, msg);
    let ty_name = |t: TypeId| schema.type_name(t).to_string();

    for n in tree.nodes() {
        match tree.obj(n) {
            None => out.push(v(
                ViolationCode::MissingObj,
                vec![n.to_string()],
                format!("{n} has no type"),
            )),
            Some(t) if !schema.contains_type(t) => out.push(v(
                ViolationCode::MissingObj,
                vec![n.to_string()],
                format!("{n} has a type unknown to the schema"),
            )),
            _ => {}
        }
    }
    let known = |n: NodeId| tree.obj(n).filter(|&t| schema.contains_type(t));

    let mut incoming: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (&n, edges) in &tree.e_out {
        if !tree.contains(n) {
            out.push(v(ViolationCode::UnknownNode, vec![n.to_string()], format!("edge source {n} is not a node")));
        }
        let mut seen = BTreeSet::new();
        for &(l, m) in edges {
            *incoming.entry(m).or_default() += 1;
            if !tree.contains(m) {
                out.push(v(ViolationCode::UnknownNode, vec![m.to_string()], format!("edge target {m} is not a node")));
            }
            if !schema.contains_role(l.role) {
                out.push(v(ViolationCode::EdgeWellFormedness, vec![n.to_string()], format!("edge at {n} uses an unknown role")));
                continue;
            }
            if !seen.insert(l) {
                out.push(v(
                    ViolationCode::LinkReuse,
                    vec![n.to_string(), l.display(schema)],
                    format!("link `{}` labels more than one edge of {n}", l.display(schema)),
                ));
            }
            if let (Some(tn), Some(tm)) = (known(n), known(m)) {
                let (start, end) = link_endpoints(schema, l).expect("role checked above");
                if !schema.related(start, tn) || tm != end {
                    out.push(v(
                        ViolationCode::EdgeWellFormedness,
                        vec![n.to_string(), l.display(schema), m.to_string()],
                        format!(
                            "edge {n} -{}-> {m} does not connect `{}` to `{}`",
                            l.display(schema),
                            ty_name(tn),
                            ty_name(tm)
                        ),
                    ));
                }
            }
        }
    }
    for (&m, &count) in &incoming {
        if count > 1 {
            out.push(v(ViolationCode::SingleParent, vec![m.to_string()], format!("{m} has {count} incoming edges")));
        }
    }
    let roots: Vec<NodeId> = tree.grid_nodes().filter(|n| !incoming.contains_key(n)).collect();
    if roots.len() != 1 {
        out.push(v(
            ViolationCode::UniqueRoot,
            roots.iter().map(NodeId::to_string).collect(),
            format!("expected exactly one root, found {}", roots.len()),
        ));
    } else {
        let reach = tree.descendants(roots[0]);
        for n in tree.grid_nodes() {
            if n != roots[0] && !reach.contains(&n) {
                out.push(v(ViolationCode::UniqueRoot, vec![n.to_string()], format!("{n} is not reachable from the root")));
            }
        }
    }

    let mut positions = BTreeMap::new();
    for n in tree.nodes() {
        match tree.order(n) {
            None => out.push(v(ViolationCode::OrderUndefined, vec![n.to_string()], format!("{n} has no display position"))),
            Some(p) => {
                if let Some(prev) = positions.insert(p, n) {
                    out.push(v(
                        ViolationCode::OrderNotInjective,
                        vec![prev.to_string(), n.to_string()],
                        format!("{prev} and {n} share display position {p}"),
                    ));
                }
            }
        }
    }

    // identification trees
    let mut idf_owner: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (&n, nrs) in &tree.n_ref_sch {
        if !tree.contains(n) {
            out.push(v(ViolationCode::UnknownNode, vec![n.to_string()], format!("identification owner {n} is not a node")));
            continue;
        }
        for m in nrs.nodes() {
            if !tree.contains(m) {
                out.push(v(ViolationCode::UnknownNode, vec![m.to_string()], format!("identification node {m} is not a node")));
            }
            if let Some(prev) = idf_owner.insert(m, n) {
                out.push(v(
                    ViolationCode::SharedIdentificationNode,
                    vec![m.to_string(), prev.to_string(), n.to_string()],
                    format!("{m} identifies both {prev} and {n}"),
                ));
            }
            if tree.is_grid_node(m) {
                out.push(v(
                    ViolationCode::IdentificationIntermixed,
                    vec![m.to_string()],
                    format!("{m} is both a grid node and an identification node"),
                ));
            }
        }
        if let Some(t) = known(n) {
            if !conforms(schema, tree, t, nrs) {
                out.push(v(
                    ViolationCode::IdfConformity,
                    vec![n.to_string()],
                    format!("identification of {n} does not mirror the reference scheme of `{}`", ty_name(t)),
                ));
            }
        }
        if !non_cyclic(tree, n, &mut vec![n]) {
            out.push(v(
                ViolationCode::NonCyclicIdentification,
                vec![n.to_string()],
                format!("identification tree of {n} is cyclic"),
            ));
        }
        if !idf_owner.contains_key(&n) && !tree.is_grid_node(n) && !tree.n_ref_sch.values().any(|s| s.nodes().contains(&n)) {
            out.push(v(
                ViolationCode::DetachedIdentificationRoot,
                vec![n.to_string()],
                format!("identification root {n} is not part of the grid"),
            ));
        }
    }
    for n in tree.nodes() {
        if !tree.is_grid_node(n) && !idf_owner.contains_key(&n) && !tree.n_ref_sch.values().any(|s| s.nodes().contains(&n)) {
            out.push(v(
                ViolationCode::UnknownNode,
                vec![n.to_string()],
                format!("{n} is neither a grid node nor part of an identification"),
            ));
        }
        if let Some(t) = known(n) {
            if schema.ref_sch(t).is_some_and(|s| s.len() == 1) && tree.n_ref_sch(n).is_none() {
                out.push(v(
                    ViolationCode::MissingSimpleIdentification,
                    vec![n.to_string()],
                    format!("{n} of simply identified `{}` lacks its identification", ty_name(t)),
                ));
            }
        }
    }
    out
}

fn conforms(schema: &Schema, tree: &GridTree, ty: TypeId, nrs: &NodeRefScheme) -> bool {
    let obj = |m: NodeId| tree.obj(m);
    match (schema.ref_sch(ty), nrs) {
        (Some(RefScheme::SuperType(y)), NodeRefScheme::Super(m)) => obj(*m) == Some(*y),
        (Some(RefScheme::RoleSeq(roles)), NodeRefScheme::Roles(v)) => {
            roles.len() == v.len()
                && roles
                    .iter()
                    .zip(v)
                    .all(|(&p, &(vp, m))| p == vp && obj(m) == Some(schema.player(p)))
        }
        (Some(RefScheme::PairSeq(pairs)), NodeRefScheme::Pairs(v)) => {
            pairs.len() == v.len()
                && pairs.iter().zip(v).all(|(&(p, q), &(vp, vq, m))| {
                    p == vp && q == vq && obj(m) == Some(schema.player(q))
                })
        }
        _ => false,
    }
}

fn non_cyclic(tree: &GridTree, x: NodeId, seen: &mut Vec<NodeId>) -> bool {
    let Some(nrs) = tree.n_ref_sch(x) else {
        return true;
    };
    for y in nrs.nodes() {
        if seen.contains(&y) {
            return false;
        }
        seen.push(y);
        let ok = non_cyclic(tree, y, seen);
        seen.pop();
        if !ok {
            return false;
        }
    }
    true
}
