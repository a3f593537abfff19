//! Bundled example schemas, used by tests, benches and the CLI docs.

use crate::dsl::parse_schema;
use crate::orm::{RefSpec, Schema, SchemaBuilder};

pub const SHOP_ORM: &str = include_str!("../fixtures/shop.orm");
pub const SHOP_TREE: &str = include_str!("../fixtures/shop.tree");
pub const PROP_ORM: &str = include_str!("../fixtures/prop.orm");
pub const ORDERS_ORM: &str = include_str!("../fixtures/orders.orm");
pub const EMPTY_DOMAIN_ORM: &str = include_str!("../fixtures/empty_domain.orm");

fn pairs(p: &str, q: &str) -> RefSpec {
    RefSpec::Pairs(vec![(p.to_string(), q.to_string())])
}

/// The customer/order schema, assembled without the parser.
pub fn shop_builder() -> SchemaBuilder {
    let names = ["Ann", "Bob", "Cy", "Di"].map(String::from).to_vec();
    SchemaBuilder::new()
        .value("CustName", Some(4), Some(names))
        .value("OrderNr", Some(6), None)
        .value("Qty", Some(3), None)
        .entity("Customer", pairs("cOf", "nOf"))
        .entity("Order", pairs("oOf", "numOf"))
        .relationship("HasName", &[("cOf", "Customer"), ("nOf", "CustName")])
        .relationship("HasNr", &[("oOf", "Order"), ("numOf", "OrderNr")])
        .relationship("Places", &[("by", "Customer"), ("of", "Order")])
        .unique(&["cOf"])
        .unique(&["nOf"])
        .total(&["cOf"])
        .total(&["nOf"])
        .unique(&["oOf"])
        .unique(&["numOf"])
        .total(&["oOf"])
        .total(&["numOf"])
        .unique(&["of"])
        .total(&["of"])
}

pub fn shop() -> Schema {
    shop_builder().build().expect("shop fixture builds")
}

fn parsed(text: &str) -> Schema {
    let out = parse_schema(text);
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    out.schema.expect("bundled fixture parses")
}

pub fn prop() -> Schema {
    parsed(PROP_ORM)
}

pub fn orders() -> Schema {
    parsed(ORDERS_ORM)
}

/// Parses despite validation diagnostics: this schema is valid, only its
/// population analysis reports a problem.
pub fn empty_domain() -> Schema {
    parsed(EMPTY_DOMAIN_ORM)
}
