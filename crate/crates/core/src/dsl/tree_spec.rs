use std::collections::BTreeSet;
use std::fmt::Write;

use super::diagnostic::{sort, ParseDiagnostic, Pos};
use super::lexer::{lex, Cursor, Tok};
use crate::error::Error;
use crate::orm::Schema;
use crate::tree::{GridTree, Link, NodeId};
use crate::violation::ViolationCode;

struct Builder<'s> {
    schema: &'s Schema,
    c: Cursor,
    tree: Option<GridTree>,
    labels: BTreeSet<String>,
    diags: Vec<ParseDiagnostic>,
}

type Step<T> = Result<T, ParseDiagnostic>;

fn edit_diag(pos: Pos, e: Error) -> ParseDiagnostic {
    match e {
        Error::TreeEdit { code, message } => {
            let code = match code {
                ViolationCode::LinkReuse => "DuplicateLink",
                other => other.as_str(),
            };
            ParseDiagnostic::error(pos, code, message)
        }
        other => ParseDiagnostic::error(pos, "InvalidTree", other.to_string()),
    }
}

impl Builder<'_> {
    fn label(&mut self, name: &str, pos: Pos) {
        if !self.labels.insert(name.to_string()) {
            self.diags
                .push(ParseDiagnostic::error(pos, "DuplicateLabel", format!("node label `{name}` is used twice")));
        }
    }

    fn typed(&mut self) -> Step<(String, Pos, Option<crate::orm::TypeId>)> {
        let (label, pos) = self.c.ident("a node label")?;
        self.c.expect(Tok::Colon)?;
        let (ty, tpos) = self.c.ident("a type name")?;
        let id = match self.schema.lookup_type(&ty) {
            Ok(t) => Some(t),
            Err(_) => {
                self.diags
                    .push(ParseDiagnostic::error(tpos, "UnknownType", format!("unknown type `{ty}`")));
                None
            }
        };
        Ok((label, pos, id))
    }

    fn root(&mut self) -> Step<()> {
        self.c.keyword("root")?;
        let (label, pos, ty) = self.typed()?;
        self.label(&label, pos);
        let node = match ty {
            Some(t) => {
                let tree = GridTree::new(self.schema, t).map_err(|e| edit_diag(pos, e))?;
                let root = tree.root().expect("fresh tree has a root");
                self.tree = Some(tree);
                self.set_label(root, &label);
                Some(root)
            }
            None => None,
        };
        if self.c.peek().tok == Tok::LBrace {
            self.block(node)?;
        }
        Ok(())
    }

    fn set_label(&mut self, n: NodeId, label: &str) {
        if let Some(t) = self.tree.as_mut() {
            t.set_label(n, label);
        }
    }

    /// `node` is `None` below a node that could not be created; the block
    /// is still parsed so later errors are reported.
    fn block(&mut self, node: Option<NodeId>) -> Step<()> {
        self.c.expect(Tok::LBrace)?;
        loop {
            if self.c.eat(Tok::RBrace) {
                return Ok(());
            }
            if self.c.is_keyword("explode") {
                let pos = self.c.bump().pos;
                if let (Some(n), Some(tree)) = (node, self.tree.as_ref()) {
                    match tree.explode(self.schema, n) {
                        Ok(t) => self.tree = Some(t),
                        Err(e) => self.diags.push(edit_diag(pos, e)),
                    }
                }
            } else if self.c.is_keyword("edge") {
                self.edge(node)?;
            } else {
                return Err(self.c.unexpected("`edge`, `explode` or `}`"));
            }
        }
    }

    fn edge(&mut self, parent: Option<NodeId>) -> Step<()> {
        self.c.keyword("edge")?;
        let (role, rpos) = self.c.ident("a role name")?;
        let reversed = self.c.eat(Tok::Tilde);
        self.c.expect(Tok::Arrow)?;
        let (label, lpos, ty) = self.typed()?;
        self.label(&label, lpos);
        let link = match self.schema.lookup_role(&role) {
            Ok(r) => Some(Link { role: r, reversed }),
            Err(_) => {
                self.diags
                    .push(ParseDiagnostic::error(rpos, "UnknownRole", format!("unknown role `{role}`")));
                None
            }
        };
        let mut child = None;
        if let (Some(p), Some(l), Some(t), Some(tree)) = (parent, link, ty, self.tree.as_ref()) {
            match tree.add_edge(self.schema, p, l) {
                Ok((next, m)) => {
                    let end = next.obj(m).expect("new node is typed");
                    if end != t {
                        self.diags.push(ParseDiagnostic::error(
                            lpos,
                            "EdgeWellFormedness",
                            format!(
                                "link `{}` ends at `{}`, not `{}`",
                                l.display(self.schema),
                                self.schema.type_name(end),
                                self.schema.type_name(t)
                            ),
                        ));
                    } else {
                        self.tree = Some(next);
                        self.set_label(m, &label);
                        child = Some(m);
                    }
                }
                Err(e) => self.diags.push(edit_diag(rpos, e)),
            }
        }
        if self.c.peek().tok == Tok::LBrace {
            self.block(child)?;
        }
        Ok(())
    }
}

/// Parses a tree spec against `schema`. Node labels are kept on the tree.
pub fn parse_tree_spec(text: &str, schema: &Schema) -> Result<GridTree, Vec<ParseDiagnostic>> {
    let (tokens, lex_diags) = lex(text);
    let mut b = Builder {
        schema,
        c: Cursor::new(tokens),
        tree: None,
        labels: BTreeSet::new(),
        diags: lex_diags,
    };
    if let Err(d) = b.root() {
        b.diags.push(d);
    } else if !b.c.at_eof() {
        let t = b.c.peek();
        let code = if b.c.is_keyword("root") { "MultipleRoots" } else { "UnexpectedToken" };
        b.diags.push(ParseDiagnostic::error(
            t.pos,
            code,
            format!("expected end of input, found {}", t.tok.describe()),
        ));
    }
    match b.tree {
        Some(tree) if b.diags.is_empty() => Ok(tree),
        _ => {
            let mut diags = b.diags;
            sort(&mut diags);
            Err(diags)
        }
    }
}

/// Tree spec text for `tree`; unlabelled nodes are named by their id.
pub fn render_tree_spec(schema: &Schema, tree: &GridTree) -> String {
    fn block(schema: &Schema, tree: &GridTree, n: NodeId, depth: usize, out: &mut String) {
        let edges = tree.e_out(n);
        let exploded = tree.is_exploded(schema, n);
        if edges.is_empty() && !exploded {
            return;
        }
        out.push_str(" {\n");
        let pad = "  ".repeat(depth + 1);
        if exploded {
            writeln!(out, "{pad}explode").unwrap();
        }
        for &(l, m) in edges {
            write!(out, "{pad}edge {} -> {}", l.display(schema), head(schema, tree, m)).unwrap();
            block(schema, tree, m, depth + 1, out);
            out.push('\n');
        }
        write!(out, "{}}}", "  ".repeat(depth)).unwrap();
    }
    fn head(schema: &Schema, tree: &GridTree, n: NodeId) -> String {
        let label = tree.label(n).map_or_else(|| n.to_string(), str::to_string);
        format!("{label}: {}", schema.type_name(tree.ty(n)))
    }
    let Some(root) = tree.root() else {
        return String::new();
    };
    let mut out = format!("root {}", head(schema, tree, root));
    block(schema, tree, root, 0, &mut out);
    out.push('\n');
    out
}
