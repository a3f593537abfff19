//! In-memory session service behind the browser grid.
//!
//! A session holds one schema and the trees built over it. Every mutation
//! bumps the session revision; a client that sends `revision` (in the JSON
//! body or an `If-Match` header) gets 409 if it is stale.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use exemplar_core::dsl::{parse_schema, parse_tree_spec, render_schema, render_tree_spec, ParseDiagnostic};
use exemplar_core::{
    plausibility_report, validate_schema, validate_tree, Accounting, Error, GenConfig, GridDocument, GridTree, Link,
    NodeId, Schema, TypeKind, ValueProvider, Violation,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationBody {
    pub code: String,
    pub subjects: Vec<String>,
    pub message: String,
}

impl From<&Violation> for ViolationBody {
    fn from(v: &Violation) -> Self {
        ViolationBody {
            code: v.code.as_str().to_string(),
            subjects: v.subjects.clone(),
            message: v.message.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    NotFound(String),
    #[error("stale revision {sent}, current is {current}")]
    Stale { sent: u64, current: u64 },
    #[error("{message}")]
    Unprocessable {
        message: String,
        violations: Vec<ViolationBody>,
        diagnostics: Vec<ParseDiagnostic>,
    },
    #[error("{0}")]
    BadRequest(String),
}

impl ApiError {
    fn violation(code: &str, subject: impl Into<String>, message: impl Into<String>) -> ApiError {
        let (message, subject) = (message.into(), subject.into());
        ApiError::Unprocessable {
            violations: vec![ViolationBody {
                code: code.into(),
                subjects: if subject.is_empty() { Vec::new() } else { vec![subject] },
                message: message.clone(),
            }],
            message,
            diagnostics: Vec::new(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::UnknownNode(n) => ApiError::NotFound(format!("unknown node `{n}`")),
            Error::TreeEdit { code, message } => ApiError::violation(code.as_str(), "", message),
            Error::UnknownType(t) => ApiError::violation("UnknownType", t, message),
            Error::UnknownRole(r) => ApiError::violation("UnknownRole", r, message),
            Error::Range { subject, .. } => ApiError::violation("Range", subject, message),
            Error::SizeOverflow(t) => ApiError::violation("SizeOverflow", t, message),
            _ => ApiError::violation("Invalid", "", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let message = self.to_string();
        match self {
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, Json(json!({ "error": message }))).into_response(),
            ApiError::Stale { current, .. } => {
                (StatusCode::CONFLICT, Json(json!({ "error": message, "revision": current }))).into_response()
            }
            ApiError::Unprocessable {
                violations,
                diagnostics,
                ..
            } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "error": message, "violations": violations, "diagnostics": diagnostics })),
            )
                .into_response(),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, Json(json!({ "error": message }))).into_response(),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub schema: Schema,
    pub trees: BTreeMap<String, GridTree>,
    pub cfg: GenConfig,
    pub revision: u64,
}

#[derive(Debug, Default)]
struct Registry {
    next_schema: u64,
    next_tree: u64,
    sessions: HashMap<String, Arc<RwLock<Session>>>,
    tree_owner: HashMap<String, String>,
}

/// Shared service state.
#[derive(Debug, Default)]
pub struct AppState {
    registry: RwLock<Registry>,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot_dir: Option<PathBuf>) -> Self {
        AppState {
            registry: RwLock::default(),
            snapshot_dir,
        }
    }

    fn session(&self, id: &str) -> ApiResult<Arc<RwLock<Session>>> {
        let reg = self.registry.read().expect("registry lock");
        reg.sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown schema `{id}`")))
    }

    fn session_of_tree(&self, tree: &str) -> ApiResult<Arc<RwLock<Session>>> {
        let owner = {
            let reg = self.registry.read().expect("registry lock");
            reg.tree_owner.get(tree).cloned()
        };
        let owner = owner.ok_or_else(|| ApiError::NotFound(format!("unknown tree `{tree}`")))?;
        self.session(&owner)
    }

    fn snapshot(&self, s: &Session) {
        let Some(dir) = &self.snapshot_dir else {
            return;
        };
        let mut files = vec![(format!("{}.orm", s.id), render_schema(&s.schema))];
        for (id, t) in &s.trees {
            files.push((format!("{id}.tree"), render_tree_spec(&s.schema, t)));
        }
        for (name, text) in files {
            if let Err(e) = std::fs::write(dir.join(&name), text) {
                eprintln!("snapshot {name}: {e}");
            }
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/schemas", post(create_schema))
        .route("/api/schemas/{id}", get(get_schema))
        .route("/api/schemas/{id}/constraints", patch(edit_constraints))
        .route("/api/schemas/{id}/plausibility", get(get_plausibility))
        .route("/api/schemas/{id}/trees", post(create_tree))
        .route("/api/trees/{id}", get(get_tree))
        .route("/api/trees/{id}/grid", get(get_grid))
        .route("/api/trees/{id}/nodes/{n}/edges", post(add_edge))
        .route("/api/trees/{id}/nodes/{n}/explode", post(explode))
        .route("/api/trees/{id}/nodes/{n}/collapse", post(collapse))
        .route("/api/trees/{id}/nodes/{n}/extension-candidates", get(extension_candidates))
        .with_state(state)
}

/// The API plus static UI assets from `ui_dir`, if given.
pub fn app(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = router(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn body<T: for<'de> Deserialize<'de> + Default>(bytes: &Bytes) -> ApiResult<T> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

fn check_revision(headers: &HeaderMap, sent: Option<u64>, current: u64) -> ApiResult<()> {
    let header = headers
        .get("if-match")
        .and_then(|v| v.to_str().ok())
        .map(|v| v.trim_matches('"').parse::<u64>())
        .transpose()
        .map_err(|_| ApiError::BadRequest("If-Match must be a revision number".into()))?;
    match sent.or(header) {
        Some(sent) if sent != current => Err(ApiError::Stale { sent, current }),
        _ => Ok(()),
    }
}

fn parse_node(n: &str) -> ApiResult<NodeId> {
    n.parse().map_err(|_| ApiError::NotFound(format!("unknown node `{n}`")))
}

fn schema_view(s: &Session) -> Value {
    let schema = &s.schema;
    let kind = |k: TypeKind| match k {
        TypeKind::Value => "value",
        TypeKind::Entity => "entity",
        TypeKind::Relationship => "relationship",
    };
    let names = |set: &[exemplar_core::RoleId]| set.iter().map(|&r| schema.role_name(r).to_string()).collect::<Vec<_>>();
    let rels: Vec<Value> = schema
        .relationship_types()
        .map(|r| {
            let roles = schema.roles_of(r);
            let within = |sets: &[Vec<exemplar_core::RoleId>]| {
                sets.iter()
                    .filter(|set| set.iter().all(|q| roles.contains(q)))
                    .map(|set| names(set))
                    .collect::<Vec<_>>()
            };
            json!({
                "name": schema.type_name(r),
                "roles": roles.iter().map(|&q| json!({
                    "name": schema.role_name(q),
                    "player": schema.type_name(schema.player(q)),
                })).collect::<Vec<_>>(),
                "unique": within(schema.unique_sets()),
                "total": within(schema.total_sets()),
            })
        })
        .collect();
    json!({
        "schemaId": s.id,
        "revision": s.revision,
        "text": render_schema(schema),
        "types": schema.types().map(|t| json!({"name": schema.type_name(t), "kind": kind(schema.kind(t))})).collect::<Vec<_>>(),
        "relationships": rels,
        "trees": s.trees.keys().collect::<Vec<_>>(),
    })
}

fn tree_view(s: &Session, id: &str) -> Value {
    let (schema, t) = (&s.schema, &s.trees[id]);
    let nodes: Vec<Value> = t
        .nodes()
        .map(|n| {
            let edges: Vec<Value> = t
                .e_out(n)
                .iter()
                .map(|&(l, m)| json!({"link": l.display(schema), "target": m.to_string()}))
                .collect();
            json!({
                "id": n.to_string(),
                "type": t.obj(n).map(|ty| schema.type_name(ty)),
                "label": t.label(n),
                "order": t.order(n),
                "grid": t.is_grid_node(n),
                "implicit": t.is_grid_node(n) && t.is_implicit(n),
                "canExtend": t.is_grid_node(n) && t.can_extend(schema, n),
                "explodable": t.is_explodable(schema, n),
                "exploded": t.is_exploded(schema, n),
                "edges": edges,
                "identification": t.n_ref_sch(n).map(|r| r.nodes().iter().map(NodeId::to_string).collect::<Vec<_>>()),
            })
        })
        .collect();
    json!({
        "treeId": id,
        "schemaId": s.id,
        "revision": s.revision,
        "root": t.root().map(|r| r.to_string()),
        "spec": render_tree_spec(schema, t),
        "nodes": nodes,
    })
}

#[derive(Debug, Default, Deserialize)]
struct SchemaBody {
    text: String,
}

async fn create_schema(State(st): State<Arc<AppState>>, headers: HeaderMap, bytes: Bytes) -> ApiResult<Response> {
    let is_json = headers
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let text = if is_json {
        body::<SchemaBody>(&bytes)?.text
    } else {
        String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::BadRequest("schema text must be UTF-8".into()))?
    };
    let parsed = parse_schema(&text);
    let diagnostics = parsed.diagnostics.clone();
    let schema = match parsed.into_result() {
        Ok(s) => s,
        Err(diagnostics) => {
            return Err(ApiError::Unprocessable {
                message: "schema has errors".into(),
                violations: Vec::new(),
                diagnostics,
            })
        }
    };
    let session = {
        let mut reg = st.registry.write().expect("registry lock");
        reg.next_schema += 1;
        let id = format!("s{}", reg.next_schema);
        let session = Session {
            id: id.clone(),
            schema,
            trees: BTreeMap::new(),
            cfg: GenConfig::default(),
            revision: 1,
        };
        reg.sessions.insert(id, Arc::new(RwLock::new(session.clone())));
        session
    };
    st.snapshot(&session);
    let out = json!({"schemaId": session.id, "revision": session.revision, "diagnostics": diagnostics});
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn get_schema(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let s = s.read().expect("session lock");
    Ok(Json(schema_view(&s)))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EditOp {
    Add,
    Remove,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ConstraintKind {
    Unique,
    Total,
}

#[derive(Debug, Clone, Deserialize)]
struct ConstraintEdit {
    op: EditOp,
    kind: ConstraintKind,
    roles: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
struct ConstraintBody {
    revision: Option<u64>,
    #[serde(default)]
    edits: Vec<ConstraintEdit>,
    #[serde(flatten)]
    single: Option<ConstraintEdit>,
}

async fn edit_constraints(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Json<Value>> {
    let req: ConstraintBody = body(&bytes)?;
    let edits: Vec<ConstraintEdit> = req.edits.into_iter().chain(req.single).collect();
    if edits.is_empty() {
        return Err(ApiError::BadRequest("no constraint edits given".into()));
    }
    let s = st.session(&id)?;
    let mut s = s.write().expect("session lock");
    check_revision(&headers, req.revision, s.revision)?;
    let mut schema = s.schema.clone();
    for e in &edits {
        let roles = e
            .roles
            .iter()
            .map(|r| schema.lookup_role(r))
            .collect::<Result<Vec<_>, _>>()?;
        let changed = match (&e.op, &e.kind) {
            (EditOp::Add, ConstraintKind::Unique) => schema.add_unique(&roles),
            (EditOp::Remove, ConstraintKind::Unique) => schema.remove_unique(&roles),
            (EditOp::Add, ConstraintKind::Total) => schema.add_total(&roles),
            (EditOp::Remove, ConstraintKind::Total) => schema.remove_total(&roles),
        };
        if !changed {
            let (code, what) = match e.op {
                EditOp::Add => ("DuplicateConstraint", "is already declared"),
                EditOp::Remove => ("UnknownConstraint", "is not declared"),
            };
            let subject = e.roles.join(",");
            return Err(ApiError::violation(code, subject.clone(), format!("constraint on ({subject}) {what}")));
        }
    }
    let mut violations = validate_schema(&schema);
    for t in s.trees.values() {
        violations.extend(validate_tree(&schema, t));
    }
    if !violations.is_empty() {
        return Err(ApiError::Unprocessable {
            message: "the edit would make the schema invalid".into(),
            violations: violations.iter().map(ViolationBody::from).collect(),
            diagnostics: Vec::new(),
        });
    }
    s.schema = schema;
    s.revision += 1;
    st.snapshot(&s);
    Ok(Json(schema_view(&s)))
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GridQuery {
    max_rows: Option<u64>,
    accounting: Option<String>,
}

fn config(base: &GenConfig, q: &GridQuery) -> ApiResult<GenConfig> {
    let mut cfg = *base;
    if let Some(n) = q.max_rows {
        if n == 0 {
            return Err(ApiError::BadRequest("maxRows must be at least 1".into()));
        }
        cfg.max_user_size_pref = n;
    }
    if let Some(a) = &q.accounting {
        cfg.accounting = a.parse::<Accounting>().map_err(ApiError::BadRequest)?;
    }
    Ok(cfg)
}

async fn get_plausibility(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<GridQuery>,
) -> ApiResult<Json<Value>> {
    let s = st.session(&id)?;
    let s = s.read().expect("session lock");
    let report = plausibility_report(&s.schema, &config(&s.cfg, &q)?);
    let verdict = report.worst();
    let mut out = serde_json::to_value(report).expect("reports serialize");
    out["schemaId"] = json!(s.id);
    out["revision"] = json!(s.revision);
    out["verdict"] = json!(verdict);
    Ok(Json(out))
}

#[derive(Debug, Default, Deserialize)]
struct TreeBody {
    revision: Option<u64>,
    root: Option<String>,
    spec: Option<String>,
}

async fn create_tree(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let req: TreeBody = body(&bytes)?;
    let s = st.session(&id)?;
    let mut s = s.write().expect("session lock");
    check_revision(&headers, req.revision, s.revision)?;
    let tree = match (req.spec, req.root) {
        (Some(spec), _) => parse_tree_spec(&spec, &s.schema).map_err(|diagnostics| ApiError::Unprocessable {
            message: "tree spec has errors".into(),
            violations: Vec::new(),
            diagnostics,
        })?,
        (None, Some(root)) => GridTree::new(&s.schema, s.schema.lookup_type(&root)?)?,
        (None, None) => return Err(ApiError::BadRequest("give a `root` type or a tree `spec`".into())),
    };
    let tree_id = {
        let mut reg = st.registry.write().expect("registry lock");
        reg.next_tree += 1;
        let tid = format!("t{}", reg.next_tree);
        reg.tree_owner.insert(tid.clone(), s.id.clone());
        tid
    };
    s.trees.insert(tree_id.clone(), tree);
    s.revision += 1;
    st.snapshot(&s);
    Ok((StatusCode::CREATED, Json(tree_view(&s, &tree_id))).into_response())
}

fn with_tree<R>(st: &AppState, id: &str, f: impl FnOnce(&Session, &GridTree) -> ApiResult<R>) -> ApiResult<R> {
    let s = st.session_of_tree(id)?;
    let s = s.read().expect("session lock");
    let t = s.trees.get(id).ok_or_else(|| ApiError::NotFound(format!("unknown tree `{id}`")))?;
    f(&s, t)
}

/// Applies `edit` to tree `id` under the session's write lock.
fn mutate_tree<R>(
    st: &AppState,
    id: &str,
    headers: &HeaderMap,
    sent: Option<u64>,
    edit: impl FnOnce(&Schema, &GridTree) -> ApiResult<(GridTree, R)>,
) -> ApiResult<(Value, R)> {
    let s = st.session_of_tree(id)?;
    let mut s = s.write().expect("session lock");
    check_revision(headers, sent, s.revision)?;
    let t = s.trees.get(id).ok_or_else(|| ApiError::NotFound(format!("unknown tree `{id}`")))?;
    let (next, extra) = edit(&s.schema, t)?;
    debug_assert!(validate_tree(&s.schema, &next).is_empty());
    s.trees.insert(id.to_string(), next);
    s.revision += 1;
    st.snapshot(&s);
    Ok((tree_view(&s, id), extra))
}

fn known_node(t: &GridTree, n: &str) -> ApiResult<NodeId> {
    let node = parse_node(n)?;
    if !t.contains(node) {
        return Err(ApiError::NotFound(format!("unknown node `{n}`")));
    }
    Ok(node)
}

async fn get_tree(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_tree(&st, &id, |s, _| Ok(Json(tree_view(s, &id))))
}

async fn get_grid(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<GridQuery>,
) -> ApiResult<Json<GridDocument>> {
    with_tree(&st, &id, |s, t| {
        let cfg = config(&s.cfg, &q)?;
        let doc = GridDocument::build(&s.schema, t, &cfg, &ValueProvider::from_schema(&s.schema))?;
        Ok(Json(doc))
    })
}

#[derive(Debug, Default, Deserialize)]
struct EdgeBody {
    link: String,
    revision: Option<u64>,
}

async fn add_edge(
    State(st): State<Arc<AppState>>,
    Path((id, n)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let req: EdgeBody = body(&bytes)?;
    let (mut view, node) = mutate_tree(&st, &id, &headers, req.revision, |schema, t| {
        let node = known_node(t, &n)?;
        let link = Link::parse(schema, &req.link)?;
        let (next, m) = t.add_edge(schema, node, link)?;
        Ok((next, m))
    })?;
    view["node"] = json!(node.to_string());
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct RevisionBody {
    revision: Option<u64>,
}

async fn explode(
    State(st): State<Arc<AppState>>,
    Path((id, n)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Json<Value>> {
    let req: RevisionBody = body(&bytes)?;
    let (view, ()) = mutate_tree(&st, &id, &headers, req.revision, |schema, t| {
        Ok((t.explode(schema, known_node(t, &n)?)?, ()))
    })?;
    Ok(Json(view))
}

async fn collapse(
    State(st): State<Arc<AppState>>,
    Path((id, n)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Json<Value>> {
    let req: RevisionBody = body(&bytes)?;
    let (view, ()) = mutate_tree(&st, &id, &headers, req.revision, |schema, t| {
        Ok((t.collapse(schema, known_node(t, &n)?)?, ()))
    })?;
    Ok(Json(view))
}

async fn extension_candidates(
    State(st): State<Arc<AppState>>,
    Path((id, n)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    with_tree(&st, &id, |s, t| {
        let node = known_node(t, &n)?;
        let links: Vec<String> = t
            .extension_candidates(&s.schema, node)?
            .into_iter()
            .map(|l| l.display(&s.schema))
            .collect();
        Ok(Json(json!({"node": node.to_string(), "candidates": links})))
    })
}

/// Serves until interrupted.
pub async fn serve(addr: std::net::SocketAddr, ui_dir: Option<PathBuf>, snapshot_dir: Option<PathBuf>) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(snapshot_dir));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app(state, ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
