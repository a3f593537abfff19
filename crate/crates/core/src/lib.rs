//! ORM conceptual schemas, maximum-population analysis and significant
//! example populations for grid views.
//!
//! The usual flow: parse a schema with [`dsl::parse_schema`], check it with
//! [`sizing::plausibility_report`], select a subschema as a [`GridTree`] and
//! render it with [`grid::GridDocument`].

pub mod dsl;
pub mod error;
pub mod extnat;
pub mod fixtures;
pub mod grid;
pub mod orm;
pub mod popgen;
pub mod sizing;
pub mod tree;
pub mod violation;

pub use error::{Error, Result};
pub use extnat::ExtNat;
pub use grid::{Cell, Column, GridDocument, GridRow, UmbrellaGrid};
pub use orm::{
    initial_max_size, recursive_max_size, recursive_size_map, validate_schema, RefScheme, RefSpec,
    RoleId, Schema, SchemaBuilder, SizeMap, TypeId, TypeKind,
};
pub use popgen::{gamma, gen_pop, node_size, GridPopulation, Instance, ValueProvider};
pub use tree::{link_endpoints, validate_tree, GridTree, Link, NodeId, NodeRefScheme};
pub use violation::{Violation, ViolationCode};
pub use sizing::{
    calc_sizes, gen_pattern, plausibility_report, resize, Accounting, GenConfig, Pattern, PatternRow,
    PlausibilityReport, UsageMap, Verdict,
};
