use std::collections::HashMap;
use std::fmt::Write;

use super::diagnostic::{sort, ParseDiagnostic, Pos};
use super::lexer::{lex, Cursor, Tok};
use crate::orm::{validate_schema, RefScheme, RefSpec, RoleId, Schema, SchemaBuilder, TypeKind};

/// Result of [`parse_schema`]. `schema` is present when the text resolved
/// to a schema; validation findings are then included as diagnostics.
#[derive(Debug, Clone)]
pub struct ParsedSchema {
    pub schema: Option<Schema>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParsedSchema {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(ParseDiagnostic::is_error)
    }

    /// The schema if no error was reported.
    pub fn into_result(self) -> Result<Schema, Vec<ParseDiagnostic>> {
        match self.schema {
            Some(s) if !self.has_errors() => Ok(s),
            _ => Err(self.diagnostics),
        }
    }
}

type Name = (String, Pos);

enum RefAst {
    Super(Name),
    Roles(Vec<Name>),
    Pairs(Vec<(Name, Name)>),
}

enum Decl {
    Value {
        name: Name,
        size: u64,
        examples: Option<Vec<String>>,
    },
    Entity {
        name: Name,
        refby: RefAst,
    },
    Rel {
        name: Name,
        roles: Vec<(Name, Name)>,
        constraints: Vec<(bool, Vec<Name>)>,
    },
    Isa {
        sub: Name,
        sup: Name,
    },
}

fn starts_decl(c: &Cursor) -> bool {
    matches!(c.peek().tok, Tok::Id(_))
}

struct Parser {
    c: Cursor,
    diags: Vec<ParseDiagnostic>,
}

impl Parser {
    fn decls(&mut self) -> Vec<Decl> {
        let mut out = Vec::new();
        while !self.c.at_eof() {
            let start = self.c.mark();
            match self.decl() {
                Ok(d) => out.push(d),
                Err(d) => {
                    self.diags.push(d);
                    self.c.recover(start, starts_decl);
                }
            }
        }
        out
    }

    fn decl(&mut self) -> Result<Decl, ParseDiagnostic> {
        let (word, pos) = self.c.ident("a declaration")?;
        if self.c.is_keyword("isa") {
            self.c.bump();
            let sup = self.c.ident("a supertype name")?;
            return Ok(Decl::Isa {
                sub: (word, pos),
                sup,
            });
        }
        match word.as_str() {
            "value" => {
                let name = self.c.ident("a type name")?;
                self.c.keyword("size")?;
                let size = self.c.nat()?;
                let examples = if self.c.is_keyword("examples") {
                    self.c.bump();
                    self.c.expect(Tok::LBracket)?;
                    let mut ex = vec![self.c.string()?.0];
                    while self.c.eat(Tok::Comma) {
                        ex.push(self.c.string()?.0);
                    }
                    self.c.expect(Tok::RBracket)?;
                    Some(ex)
                } else {
                    None
                };
                Ok(Decl::Value { name, size, examples })
            }
            "entity" => {
                let name = self.c.ident("a type name")?;
                self.c.keyword("refby")?;
                let refby = if self.c.is_keyword("super") {
                    self.c.bump();
                    RefAst::Super(self.c.ident("a supertype name")?)
                } else if self.c.is_keyword("roles") {
                    self.c.bump();
                    RefAst::Roles(self.id_list()?)
                } else if self.c.is_keyword("pairs") {
                    self.c.bump();
                    self.c.expect(Tok::LParen)?;
                    let mut pairs = vec![self.pair()?];
                    while self.c.eat(Tok::Comma) {
                        pairs.push(self.pair()?);
                    }
                    self.c.expect(Tok::RParen)?;
                    RefAst::Pairs(pairs)
                } else {
                    return Err(self.c.unexpected("`super`, `roles` or `pairs`"));
                };
                Ok(Decl::Entity { name, refby })
            }
            "rel" => {
                let name = self.c.ident("a relationship name")?;
                self.c.expect(Tok::LParen)?;
                let mut roles = vec![self.role()?];
                while self.c.eat(Tok::Comma) {
                    roles.push(self.role()?);
                }
                self.c.expect(Tok::RParen)?;
                let mut constraints = Vec::new();
                loop {
                    let unique = if self.c.is_keyword("unique") {
                        true
                    } else if self.c.is_keyword("total") {
                        false
                    } else {
                        break;
                    };
                    self.c.bump();
                    constraints.push((unique, self.id_list()?));
                }
                Ok(Decl::Rel {
                    name,
                    roles,
                    constraints,
                })
            }
            _ => Err(ParseDiagnostic::error(
                pos,
                "UnexpectedToken",
                format!("expected `value`, `entity`, `rel` or a subtype declaration, found `{word}`"),
            )),
        }
    }

    fn id_list(&mut self) -> Result<Vec<Name>, ParseDiagnostic> {
        self.c.expect(Tok::LParen)?;
        let mut ids = vec![self.c.ident("a role name")?];
        while self.c.eat(Tok::Comma) {
            ids.push(self.c.ident("a role name")?);
        }
        self.c.expect(Tok::RParen)?;
        Ok(ids)
    }

    fn pair(&mut self) -> Result<(Name, Name), ParseDiagnostic> {
        self.c.expect(Tok::LParen)?;
        let p = self.c.ident("a role name")?;
        self.c.expect(Tok::Comma)?;
        let q = self.c.ident("a role name")?;
        self.c.expect(Tok::RParen)?;
        Ok((p, q))
    }

    fn role(&mut self) -> Result<(Name, Name), ParseDiagnostic> {
        let r = self.c.ident("a role name")?;
        self.c.expect(Tok::Colon)?;
        let p = self.c.ident("a player type")?;
        Ok((r, p))
    }
}

/// Parses schema text. Never panics; every problem becomes a diagnostic.
pub fn parse_schema(text: &str) -> ParsedSchema {
    let (tokens, mut diags) = lex(text);
    let mut p = Parser {
        c: Cursor::new(tokens),
        diags: Vec::new(),
    };
    let decls = p.decls();
    diags.append(&mut p.diags);
    let syntax_ok = diags.is_empty();

    // name resolution, all types and roles first
    let mut types: HashMap<&str, Pos> = HashMap::new();
    let mut roles: HashMap<&str, Pos> = HashMap::new();
    for d in &decls {
        let name = match d {
            Decl::Value { name, .. } | Decl::Entity { name, .. } | Decl::Rel { name, .. } => name,
            Decl::Isa { .. } => continue,
        };
        if types.contains_key(name.0.as_str()) {
            diags.push(ParseDiagnostic::error(name.1, "DuplicateType", format!("type `{}` is declared twice", name.0)));
        } else {
            types.insert(&name.0, name.1);
        }
        if let Decl::Rel { roles: rs, .. } = d {
            for (r, _) in rs {
                if roles.contains_key(r.0.as_str()) {
                    diags.push(ParseDiagnostic::error(r.1, "DuplicateRole", format!("role `{}` is declared twice", r.0)));
                } else {
                    roles.insert(&r.0, r.1);
                }
            }
        }
    }
    let check_type = |n: &Name, diags: &mut Vec<ParseDiagnostic>| {
        if !types.contains_key(n.0.as_str()) {
            diags.push(ParseDiagnostic::error(n.1, "UnknownType", format!("unknown type `{}`", n.0)));
        }
    };
    let check_role = |n: &Name, diags: &mut Vec<ParseDiagnostic>| {
        if !roles.contains_key(n.0.as_str()) {
            diags.push(ParseDiagnostic::error(n.1, "UnknownRole", format!("unknown role `{}`", n.0)));
        }
    };
    let mut seen_constraints = Vec::new();
    for d in &decls {
        match d {
            Decl::Value { .. } => {}
            Decl::Entity { refby, .. } => match refby {
                RefAst::Super(t) => check_type(t, &mut diags),
                RefAst::Roles(rs) => rs.iter().for_each(|r| check_role(r, &mut diags)),
                RefAst::Pairs(ps) => ps.iter().for_each(|(a, b)| {
                    check_role(a, &mut diags);
                    check_role(b, &mut diags);
                }),
            },
            Decl::Rel {
                roles: rs,
                constraints,
                ..
            } => {
                rs.iter().for_each(|(_, t)| check_type(t, &mut diags));
                for (unique, set) in constraints {
                    set.iter().for_each(|r| check_role(r, &mut diags));
                    let mut key: Vec<&str> = set.iter().map(|r| r.0.as_str()).collect();
                    key.sort_unstable();
                    key.dedup();
                    if seen_constraints.contains(&(*unique, key.clone())) {
                        diags.push(ParseDiagnostic::warning(set[0].1, "DuplicateConstraint", "constraint is declared twice"));
                    } else {
                        seen_constraints.push((*unique, key));
                    }
                }
            }
            Decl::Isa { sub, sup } => {
                check_type(sub, &mut diags);
                check_type(sup, &mut diags);
            }
        }
    }
    if !syntax_ok || diags.iter().any(ParseDiagnostic::is_error) {
        sort(&mut diags);
        return ParsedSchema {
            schema: None,
            diagnostics: diags,
        };
    }

    let mut b = SchemaBuilder::new();
    let mut constraints = Vec::new();
    let mut subtypes = Vec::new();
    for d in &decls {
        match d {
            Decl::Value { name, size, examples } => b = b.value(&name.0, Some(*size), examples.clone()),
            Decl::Entity { name, refby } => {
                let spec = match refby {
                    RefAst::Super(t) => RefSpec::Super(t.0.clone()),
                    RefAst::Roles(rs) => RefSpec::Roles(rs.iter().map(|r| r.0.clone()).collect()),
                    RefAst::Pairs(ps) => RefSpec::Pairs(ps.iter().map(|(a, b)| (a.0.clone(), b.0.clone())).collect()),
                };
                b = b.entity(&name.0, spec);
            }
            Decl::Rel {
                name,
                roles: rs,
                constraints: cs,
            } => {
                let pairs: Vec<(&str, &str)> = rs.iter().map(|(r, t)| (r.0.as_str(), t.0.as_str())).collect();
                b = b.relationship(&name.0, &pairs);
                constraints.extend(cs.iter());
            }
            Decl::Isa { sub, sup } => subtypes.push((sub, sup)),
        }
    }
    for (sub, sup) in subtypes {
        b = b.subtype(&sub.0, &sup.0);
    }
    for (unique, set) in constraints {
        let names: Vec<&str> = set.iter().map(|r| r.0.as_str()).collect();
        b = if *unique { b.unique(&names) } else { b.total(&names) };
    }
    let schema = match b.build() {
        Ok(s) => s,
        Err(e) => {
            // resolution above mirrors the builder, so this is a safety net
            diags.push(ParseDiagnostic::error(Pos::START, "InvalidSchema", e.to_string()));
            sort(&mut diags);
            return ParsedSchema {
                schema: None,
                diagnostics: diags,
            };
        }
    };
    for v in validate_schema(&schema) {
        let pos = v
            .subjects
            .first()
            .and_then(|s| types.get(s.as_str()).or_else(|| roles.get(s.as_str())))
            .copied()
            .unwrap_or(Pos::START);
        diags.push(ParseDiagnostic::error(pos, v.code.as_str(), v.message));
    }
    sort(&mut diags);
    ParsedSchema {
        schema: Some(schema),
        diagnostics: diags,
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn join(items: impl IntoIterator<Item = String>, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

/// Canonical text for `schema`: value types, entity types, relationship
/// types with their constraints, then subtype declarations.
pub fn render_schema(schema: &Schema) -> String {
    let mut out = String::new();
    let rn = |r: &RoleId| schema.role_name(*r).to_string();
    for t in schema.types_of_kind(TypeKind::Value) {
        write!(out, "value {} size {}", schema.type_name(t), schema.dom_size(t).unwrap_or(0)).unwrap();
        if let Some(ex) = schema.value_examples(t).filter(|e| !e.is_empty()) {
            write!(out, " examples [{}]", join(ex.iter().map(|e| quote(e)), ",")).unwrap();
        }
        out.push('\n');
    }
    for t in schema.types_of_kind(TypeKind::Entity) {
        let refby = match schema.ref_sch(t) {
            Some(RefScheme::SuperType(y)) => format!("super {}", schema.type_name(*y)),
            Some(RefScheme::RoleSeq(rs)) => format!("roles ({})", join(rs.iter().map(rn), ", ")),
            Some(RefScheme::PairSeq(ps)) => format!(
                "pairs ({})",
                join(ps.iter().map(|(p, q)| format!("({},{})", rn(p), rn(q))), ",")
            ),
            None => continue,
        };
        writeln!(out, "entity {} refby {refby}", schema.type_name(t)).unwrap();
    }
    for rel in schema.relationship_types() {
        let roles = join(
            schema
                .roles_of(rel)
                .iter()
                .map(|&r| format!("{}: {}", schema.role_name(r), schema.type_name(schema.player(r)))),
            ", ",
        );
        write!(out, "rel {} ({roles})", schema.type_name(rel)).unwrap();
        // each constraint is written with the relationship of its first role
        let owns = |set: &&Vec<RoleId>| set.first().is_some_and(|&r| schema.rel(r) == rel);
        for set in schema.unique_sets().iter().filter(owns) {
            write!(out, " unique({})", join(set.iter().map(rn), ", ")).unwrap();
        }
        for set in schema.total_sets().iter().filter(owns) {
            write!(out, " total({})", join(set.iter().map(rn), ", ")).unwrap();
        }
        out.push('\n');
    }
    for &(sub, sup) in schema.spec() {
        writeln!(out, "{} isa {}", schema.type_name(sub), schema.type_name(sup)).unwrap();
    }
    out
}
