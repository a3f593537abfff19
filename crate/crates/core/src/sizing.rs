//! Significant patterns and the maximum-population fixed point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extnat::{ExtNat, Fin, Inf};
use crate::orm::{initial_max_size, recursive_max_size, RoleId, Schema, SizeMap, TypeId};

/// How [`gen_pattern`] charges rows against the size bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Accounting {
    /// One relationship tuple per fully non-nil row, one player instance
    /// per non-nil cell, nothing for the nil template.
    #[default]
    Strict,
    /// Literal bookkeeping: every role
    /// increment also counts against the relationship, and the nil
    /// template consumes instances.
    Verbatim,
}

impl FromStr for Accounting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strict" => Ok(Accounting::Strict),
            "verbatim" => Ok(Accounting::Verbatim),
            other => Err(format!("unknown accounting mode `{other}` (expected strict or verbatim)")),
        }
    }
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accounting::Strict => "strict",
            Accounting::Verbatim => "verbatim",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub accounting: Accounting,
    /// Preferred maximum number of instances of an umbrella root.
    pub max_user_size_pref: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            accounting: Accounting::Strict,
            max_user_size_pref: 10,
        }
    }
}

impl GenConfig {
    pub fn verbatim() -> Self {
        GenConfig {
            accounting: Accounting::Verbatim,
            ..Self::default()
        }
    }
}

/// One row of a pattern: an instance index per role, 0 meaning nil.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternRow(pub BTreeMap<RoleId, u64>);

impl PatternRow {
    pub fn get(&self, role: RoleId) -> u64 {
        self.0.get(&role).copied().unwrap_or(0)
    }

    pub fn is_complete(&self) -> bool {
        self.0.values().all(|&v| v != 0)
    }
}

/// Instances consumed per player type, tuples per relationship type.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UsageMap(pub BTreeMap<TypeId, u64>);

impl UsageMap {
    pub fn get(&self, t: TypeId) -> Option<u64> {
        self.0.get(&t).copied()
    }

    fn bump(&mut self, t: TypeId) -> u64 {
        let slot = self.0.entry(t).or_default();
        *slot += 1;
        *slot
    }

    fn at(&self, t: TypeId) -> u64 {
        self.get(t).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub rel: TypeId,
    pub used: UsageMap,
    /// Rows in generation order.
    pub rows: Vec<PatternRow>,
}

fn fits(used: u64, extra: u64, size: ExtNat) -> bool {
    match size {
        Inf => true,
        Fin(n) => used.checked_add(extra).is_some_and(|u| u <= n),
    }
}

/// Generates a significant pattern for `rel` within `sizes`.
pub fn gen_pattern(schema: &Schema, rel: TypeId, sizes: &SizeMap, cfg: &GenConfig) -> Result<Pattern> {
    if !schema.contains_type(rel) {
        return Err(Error::UnknownType(format!("#{}", rel.index())));
    }
    if !schema.is_relationship(rel) {
        return Err(Error::NotARelationship(schema.type_name(rel).to_string()));
    }
    let roles = schema.roles_of(rel).to_vec();
    let players: Vec<TypeId> = roles.iter().map(|&p| schema.player(p)).collect();
    if !sizes.get(rel).is_finite() && players.iter().all(|&t| !sizes.get(t).is_finite()) {
        return Err(Error::NonTerminatingCall(schema.type_name(rel).to_string()));
    }
    let mut used = UsageMap::default();
    used.0.insert(rel, 0);
    for &t in &players {
        used.0.insert(t, 0);
    }
    let mut rows = Vec::new();
    if roles.is_empty() {
        return Ok(Pattern { rel, used, rows });
    }
    // roles whose mutation cannot break a uniqueness constraint
    let mutable: Vec<bool> = roles
        .iter()
        .map(|p| !schema.uniqueness_within(rel).any(|tau| !tau.contains(p)))
        .collect();
    let row = |cells: Vec<u64>| PatternRow(roles.iter().copied().zip(cells).collect());
    let size = |t: TypeId| sizes.get(t);

    match cfg.accounting {
        Accounting::Strict => {
            let mut demand: BTreeMap<TypeId, u64> = BTreeMap::new();
            for &t in &players {
                *demand.entry(t).or_default() += 1;
            }
            let extendable = |used: &UsageMap| {
                fits(used.at(rel), 1, size(rel)) && demand.iter().all(|(&t, &d)| fits(used.at(t), d, size(t)))
            };
            while extendable(&used) {
                used.bump(rel);
                let fresh: Vec<u64> = players.iter().map(|&t| used.bump(t)).collect();
                rows.push(row(fresh.clone()));
                for (i, &t) in players.iter().enumerate() {
                    if mutable[i] && fits(used.at(t), 1, size(t)) && fits(used.at(rel), 1, size(rel)) {
                        used.bump(rel);
                        let mut work = fresh.clone();
                        work[i] = used.bump(t);
                        rows.push(row(work));
                    }
                }
                for (i, &t) in players.iter().enumerate() {
                    if !schema.is_total(roles[i]) && fits(used.at(t), 1, size(t)) {
                        let mut work = vec![0; roles.len()];
                        work[i] = used.bump(t);
                        rows.push(row(work));
                    }
                }
            }
        }
        Accounting::Verbatim => {
            let extendable = |used: &UsageMap, idx: &[usize]| {
                idx.iter().all(|&i| size(players[i]) > Fin(used.at(players[i])))
                    && fits(used.at(rel), idx.len() as u64, size(rel))
            };
            let all: Vec<usize> = (0..roles.len()).collect();
            while extendable(&used, &all) {
                let mut fresh = vec![0; roles.len()];
                for (i, &t) in players.iter().enumerate() {
                    used.bump(rel);
                    fresh[i] = used.bump(t);
                }
                rows.push(row(fresh.clone()));
                for (i, &t) in players.iter().enumerate() {
                    if mutable[i] && extendable(&used, &[i]) {
                        used.bump(rel);
                        let mut work = fresh.clone();
                        work[i] = used.bump(t);
                        rows.push(row(work));
                    }
                }
                for &t in &players {
                    used.bump(rel);
                    used.bump(t);
                }
                for (i, &t) in players.iter().enumerate() {
                    if !schema.is_total(roles[i]) && extendable(&used, &[i]) {
                        used.bump(rel);
                        let mut work = vec![0; roles.len()];
                        work[i] = used.bump(t);
                        rows.push(row(work));
                    }
                }
            }
        }
    }
    Ok(Pattern { rel, used, rows })
}

/// Relationship types with at least one finite involved size.
fn to_do(schema: &Schema, sizes: &SizeMap) -> Vec<TypeId> {
    schema
        .relationship_types()
        .filter(|&r| {
            sizes.get(r).is_finite() || schema.roles_of(r).iter().any(|&p| sizes.get(schema.player(p)).is_finite())
        })
        .collect()
}

/// One refinement step. Every pattern of the step is generated from the
/// sizes given; the results are merged by pointwise minimum, then bounds
/// are pushed down the subtype hierarchy.
pub fn resize(schema: &Schema, sizes: &SizeMap, cfg: &GenConfig) -> SizeMap {
    let mut next = sizes.clone();
    for r in to_do(schema, sizes) {
        let pattern = gen_pattern(schema, r, sizes, cfg).expect("to-do relationships have a finite size");
        for (&t, &u) in &pattern.used.0 {
            next.lower(t, Fin(u));
        }
    }
    for &(sub, sup) in schema.spec() {
        let bound = next.get(sup);
        next.lower(sub, bound);
    }
    next
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPoint {
    pub sizes: SizeMap,
    /// Number of [`resize`] steps, the final confirming step included.
    pub iterations: usize,
}

/// Iterates [`resize`] from [`initial_max_size`] until nothing changes.
pub fn calc_sizes(schema: &Schema, cfg: &GenConfig) -> FixedPoint {
    calc_sizes_from(schema, initial_max_size(schema), cfg)
}

pub fn calc_sizes_from(schema: &Schema, start: SizeMap, cfg: &GenConfig) -> FixedPoint {
    let mut sizes = start;
    let mut iterations = 0;
    loop {
        let next = resize(schema, &sizes, cfg);
        iterations += 1;
        if next == sizes {
            return FixedPoint { sizes, iterations };
        }
        sizes = next;
    }
}

/// Identification-derived bound per type; a bound too large for `u64`
/// counts as infinite.
pub fn bound_map(schema: &Schema) -> SizeMap {
    let mut out = SizeMap::uniform(schema, Inf);
    for t in schema.types() {
        if let Ok(n) = recursive_max_size(schema, t) {
            out.set(t, Fin(n));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Warning,
    Error,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ok => "ok",
            Verdict::Warning => "warning",
            Verdict::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeFinding {
    #[serde(rename = "type")]
    pub type_name: String,
    /// Bound derived from the domain sizes of the identifying value types.
    pub initial: ExtNat,
    /// Result of the fixed point.
    #[serde(rename = "final")]
    pub final_size: ExtNat,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlausibilityReport {
    pub types: Vec<TypeFinding>,
    /// Relationships to examine, in declaration order.
    pub suspects: Vec<String>,
    pub iterations: usize,
}

impl PlausibilityReport {
    pub fn worst(&self) -> Verdict {
        self.types.iter().map(|t| t.verdict).max().unwrap_or(Verdict::Ok)
    }

    pub fn finding(&self, type_name: &str) -> Option<&TypeFinding> {
        self.types.iter().find(|t| t.type_name == type_name)
    }
}

/// Flags types that can hold no instance (error) or fewer instances than
/// their domain sizes suggest (warning).
///
/// Error suspects are relationships where the empty population reaches a
/// player that was not empty to begin with. Warning suspects are
/// relationships between a shrunk and an unshrunk player.
pub fn plausibility_report(schema: &Schema, cfg: &GenConfig) -> PlausibilityReport {
    let seed = initial_max_size(schema);
    let fp = calc_sizes(schema, cfg);
    let bound = bound_map(schema);
    let verdict = |t: TypeId| {
        let f = fp.sizes.get(t);
        if f == Fin(0) {
            Verdict::Error
        } else if f < bound.get(t) {
            Verdict::Warning
        } else {
            Verdict::Ok
        }
    };
    let types = schema
        .types()
        .map(|t| TypeFinding {
            type_name: schema.type_name(t).to_string(),
            initial: bound.get(t),
            final_size: fp.sizes.get(t),
            verdict: verdict(t),
        })
        .collect();
    let mut suspects = Vec::new();
    for r in schema.relationship_types() {
        let roles = schema.roles_of(r);
        let pairs = || {
            roles.iter().enumerate().flat_map(move |(i, &p)| {
                roles
                    .iter()
                    .enumerate()
                    .filter(move |&(j, _)| j != i)
                    .map(move |(_, &q)| (schema.player(p), schema.player(q)))
            })
        };
        let zero = pairs().any(|(y, z)| fp.sizes.get(y) == Fin(0) && seed.get(z) > Fin(0));
        let shrunk = |t: TypeId| verdict(t) == Verdict::Warning;
        let mixed = pairs().any(|(y, z)| shrunk(y) && verdict(z) == Verdict::Ok);
        if zero || mixed {
            suspects.push(schema.type_name(r).to_string());
        }
    }
    PlausibilityReport {
        types,
        suspects,
        iterations: fp.iterations,
    }
}
