//! Text formats: the schema language and the grid-tree spec language.

mod diagnostic;
mod lexer;
mod schema;
mod tree_spec;

pub use diagnostic::{ParseDiagnostic, Severity};
pub use schema::{parse_schema, render_schema, ParsedSchema};
pub use tree_spec::{parse_tree_spec, render_tree_spec};
