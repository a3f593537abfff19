//! The ORM metamodel: types, roles, subtyping, reference schemes and the
//! cardinality constraints, together with the functions derived from them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::violation::{Violation, ViolationCode};

/// Index of a type within one [`Schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub(crate) u32);

/// Index of a role (predicator) within one [`Schema`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoleId(pub(crate) u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RoleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Value,
    Entity,
    Relationship,
}

/// How instances of a non-value type are identified.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RefScheme {
    /// Identified through a supertype.
    SuperType(TypeId),
    /// Identified by the roles of one relationship type.
    RoleSeq(Vec<RoleId>),
    /// Identified by role pairs `(p, q)`: `p` is played by the identified
    /// type, `q` by the identifying one.
    PairSeq(Vec<(RoleId, RoleId)>),
}

impl RefScheme {
    /// Number of identification components.
    pub fn len(&self) -> usize {
        match self {
            RefScheme::SuperType(_) => 1,
            RefScheme::RoleSeq(roles) => roles.len(),
            RefScheme::PairSeq(pairs) => pairs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
struct TypeDef {
    name: String,
    kind: TypeKind,
    roles: Vec<RoleId>,
    ref_sch: Option<RefScheme>,
    dom_size: Option<u64>,
    examples: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
struct RoleDef {
    name: String,
    rel: TypeId,
    player: TypeId,
}

/// An ORM conceptual schema.
///
/// Built with [`SchemaBuilder`] or parsed from text by
/// [`crate::dsl::parse_schema`]. Relationship types are always identified by
/// their own roles. Apart from the constraint what-if edits, a schema is
/// immutable once built.
#[derive(Debug, Clone)]
pub struct Schema {
    types: Vec<TypeDef>,
    roles: Vec<RoleDef>,
    spec: Vec<(TypeId, TypeId)>,
    unique: Vec<Vec<RoleId>>,
    total: Vec<Vec<RoleId>>,
    type_names: HashMap<String, TypeId>,
    role_names: HashMap<String, RoleId>,
    // representative of each type's class under the subtyping closure
    related: Vec<u32>,
}

impl Schema {
    pub fn empty() -> Schema {
        SchemaBuilder::new().build().expect("empty schema builds")
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn role_count(&self) -> usize {
        self.roles.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.types.len() as u32).map(TypeId)
    }

    pub fn roles(&self) -> impl Iterator<Item = RoleId> + '_ {
        (0..self.roles.len() as u32).map(RoleId)
    }

    pub fn types_of_kind(&self, kind: TypeKind) -> impl Iterator<Item = TypeId> + '_ {
        self.types().filter(move |&t| self.kind(t) == kind)
    }

    pub fn relationship_types(&self) -> impl Iterator<Item = TypeId> + '_ {
        self.types_of_kind(TypeKind::Relationship)
    }

    pub fn lookup_type(&self, name: &str) -> Result<TypeId> {
        self.type_names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn lookup_role(&self, name: &str) -> Result<RoleId> {
        self.role_names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownRole(name.to_string()))
    }

    pub fn contains_type(&self, t: TypeId) -> bool {
        t.index() < self.types.len()
    }

    pub fn contains_role(&self, r: RoleId) -> bool {
        r.index() < self.roles.len()
    }

    fn check_type(&self, t: TypeId) -> Result<()> {
        if self.contains_type(t) {
            Ok(())
        } else {
            Err(Error::UnknownType(format!("#{}", t.0)))
        }
    }

    fn check_role(&self, r: RoleId) -> Result<()> {
        if self.contains_role(r) {
            Ok(())
        } else {
            Err(Error::UnknownRole(format!("#{}", r.0)))
        }
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.types[t.index()].name
    }

    pub fn role_name(&self, r: RoleId) -> &str {
        &self.roles[r.index()].name
    }

    pub fn kind(&self, t: TypeId) -> TypeKind {
        self.types[t.index()].kind
    }

    pub fn is_value(&self, t: TypeId) -> bool {
        self.kind(t) == TypeKind::Value
    }

    pub fn is_relationship(&self, t: TypeId) -> bool {
        self.kind(t) == TypeKind::Relationship
    }

    /// Roles of a relationship type in declaration order; empty for other types.
    pub fn roles_of(&self, rel: TypeId) -> &[RoleId] {
        &self.types[rel.index()].roles
    }

    pub fn player(&self, role: RoleId) -> TypeId {
        self.roles[role.index()].player
    }

    /// The relationship type a role belongs to.
    pub fn rel_of(&self, role: RoleId) -> Result<TypeId> {
        self.check_role(role)?;
        Ok(self.rel(role))
    }

    pub(crate) fn rel(&self, role: RoleId) -> TypeId {
        self.roles[role.index()].rel
    }

    /// Roles played by `t`, in role declaration order.
    pub fn roles_played_by(&self, t: TypeId) -> impl Iterator<Item = RoleId> + '_ {
        self.roles().filter(move |&r| self.player(r) == t)
    }

    pub fn ref_sch(&self, t: TypeId) -> Option<&RefScheme> {
        self.types[t.index()].ref_sch.as_ref()
    }

    pub fn dom_size(&self, t: TypeId) -> Option<u64> {
        self.types[t.index()].dom_size
    }

    pub fn value_examples(&self, t: TypeId) -> Option<&[String]> {
        self.types[t.index()].examples.as_deref()
    }

    /// Declared subtype pairs `(sub, super)`.
    pub fn spec(&self) -> &[(TypeId, TypeId)] {
        &self.spec
    }

    pub fn unique_sets(&self) -> &[Vec<RoleId>] {
        &self.unique
    }

    pub fn total_sets(&self) -> &[Vec<RoleId>] {
        &self.total
    }

    /// Uniqueness sets contained in the roles of `rel`.
    pub fn uniqueness_within(&self, rel: TypeId) -> impl Iterator<Item = &[RoleId]> + '_ {
        let roles = self.roles_of(rel);
        self.unique
            .iter()
            .filter(move |set| !set.is_empty() && set.iter().all(|r| roles.contains(r)))
            .map(Vec::as_slice)
    }

    /// Whether the single role `role` is mandatory.
    pub fn is_total(&self, role: RoleId) -> bool {
        self.total.iter().any(|set| set.as_slice() == [role])
    }

    /// Type relatedness: the reflexive, symmetric, transitive closure of subtyping.
    pub fn type_related(&self, x: TypeId, y: TypeId) -> Result<bool> {
        self.check_type(x)?;
        self.check_type(y)?;
        Ok(self.related(x, y))
    }

    pub(crate) fn related(&self, x: TypeId, y: TypeId) -> bool {
        self.related[x.index()] == self.related[y.index()]
    }

    /// The types needed to directly identify `x`.
    pub fn idf_objs(&self, x: TypeId) -> Result<Vec<TypeId>> {
        self.check_type(x)?;
        let scheme = self
            .ref_sch(x)
            .ok_or_else(|| Error::UndefinedIdentification(self.type_name(x).to_string()))?;
        Ok(self.scheme_objs(scheme))
    }

    pub(crate) fn scheme_objs(&self, scheme: &RefScheme) -> Vec<TypeId> {
        match scheme {
            RefScheme::SuperType(y) => vec![*y],
            RefScheme::RoleSeq(roles) => roles.iter().map(|&p| self.player(p)).collect(),
            RefScheme::PairSeq(pairs) => pairs.iter().map(|&(_, q)| self.player(q)).collect(),
        }
    }

    /// Adds an intra-predicate uniqueness constraint. Returns false when an
    /// equal set was already present.
    pub fn add_unique(&mut self, roles: &[RoleId]) -> bool {
        add_set(&mut self.unique, roles)
    }

    pub fn remove_unique(&mut self, roles: &[RoleId]) -> bool {
        remove_set(&mut self.unique, roles)
    }

    pub fn add_total(&mut self, roles: &[RoleId]) -> bool {
        add_set(&mut self.total, roles)
    }

    pub fn remove_total(&mut self, roles: &[RoleId]) -> bool {
        remove_set(&mut self.total, roles)
    }

    /// Structural equality up to identifier numbering.
    pub fn is_isomorphic(&self, other: &Schema) -> bool {
        self.named_form() == other.named_form()
    }

    fn named_form(&self) -> NamedForm {
        let tn = |t: TypeId| self.type_name(t).to_string();
        let rn = |r: RoleId| self.role_name(r).to_string();
        let types = self
            .types()
            .map(|t| {
                let d = &self.types[t.index()];
                let scheme = d.ref_sch.as_ref().map(|s| match s {
                    RefScheme::SuperType(y) => vec![vec![tn(*y)]],
                    RefScheme::RoleSeq(rs) => rs.iter().map(|&r| vec![rn(r)]).collect(),
                    RefScheme::PairSeq(ps) => {
                        ps.iter().map(|&(p, q)| vec![rn(p), rn(q)]).collect()
                    }
                });
                let roles = d
                    .roles
                    .iter()
                    .map(|&r| (rn(r), tn(self.player(r))))
                    .collect();
                (
                    d.name.clone(),
                    (
                        format!("{:?}", d.kind),
                        roles,
                        scheme,
                        d.dom_size,
                        d.examples.clone(),
                    ),
                )
            })
            .collect();
        let sets = |sets: &[Vec<RoleId>]| {
            sets.iter()
                .map(|s| s.iter().map(|&r| rn(r)).collect::<BTreeSet<_>>())
                .collect::<BTreeSet<_>>()
        };
        NamedForm {
            types,
            spec: self.spec.iter().map(|&(a, b)| (tn(a), tn(b))).collect(),
            unique: sets(&self.unique),
            total: sets(&self.total),
        }
    }
}

type NamedType = (
    String,
    Vec<(String, String)>,
    Option<Vec<Vec<String>>>,
    Option<u64>,
    Option<Vec<String>>,
);

#[derive(PartialEq, Eq)]
struct NamedForm {
    types: BTreeMap<String, NamedType>,
    spec: BTreeSet<(String, String)>,
    unique: BTreeSet<BTreeSet<String>>,
    total: BTreeSet<BTreeSet<String>>,
}

fn normalized(roles: &[RoleId]) -> Vec<RoleId> {
    let mut v = roles.to_vec();
    v.sort();
    v.dedup();
    v
}

fn add_set(sets: &mut Vec<Vec<RoleId>>, roles: &[RoleId]) -> bool {
    let set = normalized(roles);
    if sets.contains(&set) {
        return false;
    }
    sets.push(set);
    true
}

fn remove_set(sets: &mut Vec<Vec<RoleId>>, roles: &[RoleId]) -> bool {
    let set = normalized(roles);
    let before = sets.len();
    sets.retain(|s| *s != set);
    sets.len() != before
}

/// Reference scheme given by names, resolved by [`SchemaBuilder::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefSpec {
    Super(String),
    Roles(Vec<String>),
    Pairs(Vec<(String, String)>),
}

#[derive(Debug, Clone)]
enum PendingType {
    Value {
        dom_size: Option<u64>,
        examples: Option<Vec<String>>,
    },
    Entity(Option<RefSpec>),
    Relationship(Vec<(String, String)>),
}

/// Name-based schema construction.
///
/// Names may be used before they are declared; everything is resolved in
/// [`build`](SchemaBuilder::build). The builder only rejects what cannot be
/// represented (unknown or duplicate names); well-formedness is checked by
/// [`validate_schema`].
#[derive(Debug, Clone, Default)]
pub struct SchemaBuilder {
    types: Vec<(String, PendingType)>,
    spec: Vec<(String, String)>,
    unique: Vec<Vec<String>>,
    total: Vec<Vec<String>>,
}

impl SchemaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(mut self, name: &str, dom_size: Option<u64>, examples: Option<Vec<String>>) -> Self {
        self.types.push((
            name.to_string(),
            PendingType::Value { dom_size, examples },
        ));
        self
    }

    pub fn entity(mut self, name: &str, refby: RefSpec) -> Self {
        self.types
            .push((name.to_string(), PendingType::Entity(Some(refby))));
        self
    }

    /// An entity type without a reference scheme (invalid, but representable).
    pub fn unidentified_entity(mut self, name: &str) -> Self {
        self.types.push((name.to_string(), PendingType::Entity(None)));
        self
    }

    /// A relationship type with `(role, player)` pairs in tuple order.
    pub fn relationship(mut self, name: &str, roles: &[(&str, &str)]) -> Self {
        let roles = roles
            .iter()
            .map(|(r, p)| (r.to_string(), p.to_string()))
            .collect();
        self.types
            .push((name.to_string(), PendingType::Relationship(roles)));
        self
    }

    pub fn subtype(mut self, sub: &str, sup: &str) -> Self {
        self.spec.push((sub.to_string(), sup.to_string()));
        self
    }

    pub fn unique(mut self, roles: &[&str]) -> Self {
        self.unique.push(roles.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn total(mut self, roles: &[&str]) -> Self {
        self.total.push(roles.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn build(self) -> Result<Schema> {
        let mut type_names = HashMap::new();
        for (i, (name, _)) in self.types.iter().enumerate() {
            if type_names.insert(name.clone(), TypeId(i as u32)).is_some() {
                return Err(Error::Duplicate(name.clone()));
            }
        }
        let find_type = |name: &str| {
            type_names
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownType(name.to_string()))
        };

        let mut roles = Vec::new();
        let mut role_names = HashMap::new();
        let mut types = Vec::with_capacity(self.types.len());
        for (i, (name, pending)) in self.types.iter().enumerate() {
            let id = TypeId(i as u32);
            let mut def = TypeDef {
                name: name.clone(),
                kind: TypeKind::Entity,
                roles: Vec::new(),
                ref_sch: None,
                dom_size: None,
                examples: None,
            };
            match pending {
                PendingType::Value { dom_size, examples } => {
                    def.kind = TypeKind::Value;
                    def.dom_size = *dom_size;
                    def.examples = examples.clone();
                }
                PendingType::Entity(_) => {}
                PendingType::Relationship(rs) => {
                    def.kind = TypeKind::Relationship;
                    for (role, player) in rs {
                        let rid = RoleId(roles.len() as u32);
                        if role_names.insert(role.clone(), rid).is_some() {
                            return Err(Error::Duplicate(role.clone()));
                        }
                        roles.push(RoleDef {
                            name: role.clone(),
                            rel: id,
                            player: find_type(player)?,
                        });
                        def.roles.push(rid);
                    }
                    def.ref_sch = Some(RefScheme::RoleSeq(def.roles.clone()));
                }
            }
            types.push(def);
        }

        let find_role = |name: &str| {
            role_names
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownRole(name.to_string()))
        };
        for (i, (_, pending)) in self.types.iter().enumerate() {
            if let PendingType::Entity(Some(spec)) = pending {
                let scheme = match spec {
                    RefSpec::Super(y) => RefScheme::SuperType(find_type(y)?),
                    RefSpec::Roles(rs) => RefScheme::RoleSeq(
                        rs.iter().map(|r| find_role(r)).collect::<Result<_>>()?,
                    ),
                    RefSpec::Pairs(ps) => RefScheme::PairSeq(
                        ps.iter()
                            .map(|(p, q)| Ok((find_role(p)?, find_role(q)?)))
                            .collect::<Result<_>>()?,
                    ),
                };
                types[i].ref_sch = Some(scheme);
            }
        }

        let spec = self
            .spec
            .iter()
            .map(|(a, b)| Ok((find_type(a)?, find_type(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let resolve_sets = |sets: &[Vec<String>]| -> Result<Vec<Vec<RoleId>>> {
            let mut out: Vec<Vec<RoleId>> = Vec::new();
            for set in sets {
                let ids = set.iter().map(|r| find_role(r)).collect::<Result<Vec<_>>>()?;
                add_set(&mut out, &ids);
            }
            Ok(out)
        };
        let unique = resolve_sets(&self.unique)?;
        let total = resolve_sets(&self.total)?;

        let related = subtype_classes(types.len(), &spec);
        Ok(Schema {
            types,
            roles,
            spec,
            unique,
            total,
            type_names,
            role_names,
            related,
        })
    }
}

fn subtype_classes(n: usize, spec: &[(TypeId, TypeId)]) -> Vec<u32> {
    fn find(parent: &mut [u32], x: u32) -> u32 {
        let mut root = x;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = x;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for &(a, b) in spec {
        let ra = find(&mut parent, a.0);
        let rb = find(&mut parent, b.0);
        if ra != rb {
            parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
    (0..n as u32).map(|x| find(&mut parent, x)).collect()
}

/// Checks every schema invariant; an empty result means the schema is valid.
pub fn validate_schema(schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    let tn = |t: TypeId| schema.type_name(t).to_string();
    let rn = |r: RoleId| schema.role_name(r).to_string();

    for t in schema.types() {
        match schema.kind(t) {
            TypeKind::Value => {
                match schema.dom_size(t) {
                    None => out.push(Violation::new(
                        ViolationCode::MissingDomainSize,
                        vec![tn(t)],
                        format!("value type `{}` needs a domain size", tn(t)),
                    )),
                    Some(size) => {
                        if let Some(ex) = schema.value_examples(t) {
                            if ex.len() as u64 > size {
                                out.push(Violation::new(
                                    ViolationCode::ValueExamplesExceedDomain,
                                    vec![tn(t)],
                                    format!(
                                        "`{}` lists {} examples but its domain holds {size}",
                                        tn(t),
                                        ex.len()
                                    ),
                                ));
                            }
                        }
                    }
                }
                if let Some(ex) = schema.value_examples(t) {
                    let mut seen = BTreeSet::new();
                    for e in ex {
                        if !seen.insert(e) {
                            out.push(Violation::new(
                                ViolationCode::DuplicateValueExample,
                                vec![tn(t), e.clone()],
                                format!("example {e:?} of `{}` is listed twice", tn(t)),
                            ));
                        }
                    }
                }
            }
            TypeKind::Entity | TypeKind::Relationship => match schema.ref_sch(t) {
                None => out.push(Violation::new(
                    ViolationCode::MissingRefScheme,
                    vec![tn(t)],
                    format!("`{}` has no reference scheme", tn(t)),
                )),
                Some(scheme) => check_scheme(schema, t, scheme, &mut out),
            },
        }
    }

    for &(sub, sup) in schema.spec() {
        let (ks, kp) = (schema.kind(sub), schema.kind(sup));
        if ks == TypeKind::Relationship || kp == TypeKind::Relationship {
            out.push(Violation::new(
                ViolationCode::SubtypeOfRelationship,
                vec![tn(sub), tn(sup)],
                format!("subtyping `{} isa {}` involves a relationship type", tn(sub), tn(sup)),
            ));
        } else if ks != kp {
            out.push(Violation::new(
                ViolationCode::SubtypeKindMismatch,
                vec![tn(sub), tn(sup)],
                format!("`{}` and `{}` are of different kinds", tn(sub), tn(sup)),
            ));
        } else if let (Some(a), Some(b)) = (schema.dom_size(sub), schema.dom_size(sup)) {
            if a > b {
                out.push(Violation::new(
                    ViolationCode::DomSizeMonotonicity,
                    vec![tn(sub), tn(sup)],
                    format!(
                        "subtype `{}` has domain size {a}, larger than {b} of supertype `{}`",
                        tn(sub),
                        tn(sup)
                    ),
                ));
            }
        }
    }

    for set in schema.unique_sets() {
        let names: Vec<String> = set.iter().map(|&r| rn(r)).collect();
        if set.is_empty() {
            out.push(Violation::new(
                ViolationCode::EmptyConstraint,
                names,
                "uniqueness constraint over no roles",
            ));
            continue;
        }
        let rels: BTreeSet<TypeId> = set.iter().map(|&r| schema.rel(r)).collect();
        if rels.len() > 1 {
            out.push(Violation::new(
                ViolationCode::InterPredicateUniquenessUnsupported,
                names.clone(),
                format!(
                    "uniqueness over ({}) spans several relationship types; \
                     declare a derived relationship type and put the constraint on it instead",
                    names.join(", ")
                ),
            ));
        }
    }
    for set in schema.total_sets() {
        let names: Vec<String> = set.iter().map(|&r| rn(r)).collect();
        match set.len() {
            0 => out.push(Violation::new(
                ViolationCode::EmptyConstraint,
                names,
                "totality constraint over no roles",
            )),
            1 => {}
            _ => out.push(Violation::new(
                ViolationCode::NonSingletonTotality,
                names.clone(),
                format!(
                    "totality over several roles ({}) is not supported; use single-role totality",
                    names.join(", ")
                ),
            )),
        }
    }

    if let Some(t) = identification_cycle(schema) {
        out.push(Violation::new(
            ViolationCode::CyclicIdentification,
            vec![tn(t)],
            format!("identification of `{}` refers back to itself", tn(t)),
        ));
    }
    out
}

fn check_scheme(schema: &Schema, t: TypeId, scheme: &RefScheme, out: &mut Vec<Violation>) {
    let tn = |t: TypeId| schema.type_name(t).to_string();
    let rn = |r: RoleId| schema.role_name(r).to_string();
    match scheme {
        RefScheme::SuperType(y) => {
            if !schema.spec().contains(&(t, *y)) {
                out.push(Violation::new(
                    ViolationCode::SuperTypeWithoutSubtyping,
                    vec![tn(t), tn(*y)],
                    format!("`{}` is identified by `{}` but is not declared its subtype", tn(t), tn(*y)),
                ));
            }
        }
        RefScheme::RoleSeq(roles) => {
            let rels: BTreeSet<TypeId> = roles.iter().map(|&r| schema.rel(r)).collect();
            if roles.is_empty() || rels.len() != 1 {
                out.push(Violation::new(
                    ViolationCode::RefSchemeRoles,
                    std::iter::once(tn(t)).chain(roles.iter().map(|&r| rn(r))).collect(),
                    format!("identifying roles of `{}` must belong to one relationship type", tn(t)),
                ));
            }
        }
        RefScheme::PairSeq(pairs) => {
            if pairs.is_empty() {
                out.push(Violation::new(
                    ViolationCode::RefSchemePairs,
                    vec![tn(t)],
                    format!("`{}` has an empty identification", tn(t)),
                ));
            }
            for &(p, q) in pairs {
                if p == q || schema.rel(p) != schema.rel(q) || schema.player(p) != t {
                    out.push(Violation::new(
                        ViolationCode::RefSchemePairs,
                        vec![tn(t), rn(p), rn(q)],
                        format!(
                            "pair ({}, {}) must be two roles of one relationship type with `{}` playing the first",
                            rn(p),
                            rn(q),
                            tn(t)
                        ),
                    ));
                }
            }
        }
    }
}

/// First type found on a cycle of the identification graph, if any.
fn identification_cycle(schema: &Schema) -> Option<TypeId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(schema: &Schema, t: TypeId, marks: &mut [Mark]) -> Option<TypeId> {
        match marks[t.index()] {
            Mark::Active => return Some(t),
            Mark::Done => return None,
            Mark::New => {}
        }
        marks[t.index()] = Mark::Active;
        if let Some(scheme) = schema.ref_sch(t) {
            for y in schema.scheme_objs(scheme) {
                if let Some(c) = visit(schema, y, marks) {
                    return Some(c);
                }
            }
        }
        marks[t.index()] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; schema.type_count()];
    schema.types().find_map(|t| visit(schema, t, &mut marks))
}

/// A total assignment of ℕ∪{∞} population bounds to the types of a schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeMap {
    sizes: Vec<ExtNat>,
}

impl SizeMap {
    pub fn uniform(schema: &Schema, value: ExtNat) -> SizeMap {
        SizeMap {
            sizes: vec![value; schema.type_count()],
        }
    }

    pub fn get(&self, t: TypeId) -> ExtNat {
        self.sizes[t.index()]
    }

    pub fn set(&mut self, t: TypeId, value: ExtNat) {
        self.sizes[t.index()] = value;
    }

    /// Lowers the bound of `t` to `value` if that is smaller.
    pub fn lower(&mut self, t: TypeId, value: ExtNat) {
        let slot = &mut self.sizes[t.index()];
        *slot = (*slot).min(value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (TypeId, ExtNat)> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| (TypeId(i as u32), s))
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Pointwise `self ≤ other`.
    pub fn le_pointwise(&self, other: &SizeMap) -> bool {
        self.sizes.len() == other.sizes.len()
            && self.sizes.iter().zip(&other.sizes).all(|(a, b)| a <= b)
    }

    /// Named view, keyed by type name.
    pub fn named(&self, schema: &Schema) -> BTreeMap<String, ExtNat> {
        self.iter()
            .map(|(t, s)| (schema.type_name(t).to_string(), s))
            .collect()
    }
}

/// The starting point of the size analysis: domain sizes for value types,
/// infinity for everything else.
pub fn initial_max_size(schema: &Schema) -> SizeMap {
    let sizes = schema
        .types()
        .map(|t| match (schema.kind(t), schema.dom_size(t)) {
            (TypeKind::Value, Some(n)) => Fin(n),
            _ => Inf,
        })
        .collect();
    SizeMap { sizes }
}

/// Context-free population bound: the domain size of a value type, or the
/// product of the bounds of the identifying types otherwise. Relationship
/// types are covered through their own roles.
pub fn recursive_max_size(schema: &Schema, x: TypeId) -> Result<u64> {
    schema.check_type(x)?;
    let mut memo = vec![None; schema.type_count()];
    recursive_size_inner(schema, x, &mut memo, &mut Vec::new())
}

/// [`recursive_max_size`] for every type, as a (finite) [`SizeMap`].
pub fn recursive_size_map(schema: &Schema) -> Result<SizeMap> {
    let mut memo = vec![None; schema.type_count()];
    let sizes = schema
        .types()
        .map(|t| recursive_size_inner(schema, t, &mut memo, &mut Vec::new()).map(Fin))
        .collect::<Result<_>>()?;
    Ok(SizeMap { sizes })
}

fn recursive_size_inner(
    schema: &Schema,
    x: TypeId,
    memo: &mut [Option<u64>],
    stack: &mut Vec<TypeId>,
) -> Result<u64> {
    if let Some(n) = memo[x.index()] {
        return Ok(n);
    }
    if stack.contains(&x) {
        return Err(Error::CyclicIdentification(schema.type_name(x).to_string()));
    }
    let size = if schema.is_value(x) {
        schema
            .dom_size(x)
            .ok_or_else(|| Error::MissingDomainSize(schema.type_name(x).to_string()))?
    } else {
        let objs = schema.idf_objs(x)?;
        stack.push(x);
        let mut product: u64 = 1;
        for y in objs {
            let n = recursive_size_inner(schema, y, memo, stack)?;
            product = product
                .checked_mul(n)
                .ok_or_else(|| Error::SizeOverflow(schema.type_name(x).to_string()))?;
        }
        stack.pop();
        product
    };
    memo[x.index()] = Some(size);
    Ok(size)
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeKind::Value => "value",
            TypeKind::Entity => "entity",
            TypeKind::Relationship => "relationship",
        })
    }
}
