//! The HTTP JSON API.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use routevar_core::chaos::{
    generate_variation, render_plan, PlanFormat, State3, VariationConfig, VariationPlan,
};
use routevar_core::crdl::{parse_crdl, Route};
use routevar_core::frameparse::Grammar;
use routevar_core::icmap::{pick_ic, ICMap, MapBuilder, MetricRange, Slice};
use routevar_core::symbolize::SymbolSetId;
use routevar_core::vomm::{VommModel, DEFAULT_ORDER};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::error::{Error, ErrorKind, Result};
use crate::pipeline::{self, API_VERSION};
use crate::store::{ListFilter, NewRecord, RecordKind, RecordMeta, Store, StoredRecord};
use crate::sweep::build_map_parallel;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub api_version: u32,
    pub id: String,
    pub status: JobStatus,
    pub cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icmap_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<Store>>,
    grammar: Arc<Grammar>,
    jobs: Arc<Mutex<BTreeMap<String, Job>>>,
    workers: Arc<Semaphore>,
    next_job: Arc<AtomicU64>,
}

impl AppState {
    /// `map_workers` bounds how many map builds run at once.
    pub fn new(store: Store, grammar: Grammar, map_workers: usize) -> AppState {
        AppState {
            store: Arc::new(RwLock::new(store)),
            grammar: Arc::new(grammar),
            jobs: Arc::new(Mutex::new(BTreeMap::new())),
            workers: Arc::new(Semaphore::new(map_workers.max(1))),
            next_job: Arc::new(AtomicU64::new(1)),
        }
    }

    fn read<T>(&self, f: impl FnOnce(&Store) -> Result<T>) -> Result<T> {
        f(&self.store.read().expect("store lock"))
    }

    fn write<T>(&self, f: impl FnOnce(&mut Store) -> Result<T>) -> Result<T> {
        f(&mut self.store.write().expect("store lock"))
    }

    fn set_job(&self, job: Job) {
        self.jobs
            .lock()
            .expect("jobs lock")
            .insert(job.id.clone(), job);
    }
}

impl IntoResponse for Error {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

/// `Json` whose rejections use the structured error body.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = Error;

    async fn from_request(req: Request, state: &S) -> Result<Self, Error> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(json_rejection(e)),
        }
    }
}

fn json_rejection(e: JsonRejection) -> Error {
    Error::new(ErrorKind::Validation, "BadRequest", e.body_text())
}

/// `Query` with the structured error body.
pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = Error;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Error> {
        match Query::<T>::from_request_parts(parts, state).await {
            Ok(Query(v)) => Ok(ApiQuery(v)),
            Err(e) => Err(query_rejection(e)),
        }
    }
}

fn query_rejection(e: QueryRejection) -> Error {
    Error::new(ErrorKind::Validation, "BadRequest", e.body_text())
}

/// Runs store and compute work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(Error::new(ErrorKind::Io, "Internal", e.to_string())))
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    let api = Router::new()
        .route("/routes", post(post_route).get(list_routes))
        .route("/routes/{id}", get(get_route))
        .route("/variations", post(post_variation).get(list_variations))
        .route("/variations/{id}", get(get_variation))
        .route("/icmaps", post(post_icmap).get(list_icmaps))
        .route("/icmaps/{id}", get(get_icmap))
        .route("/icmaps/{id}/pick", get(pick))
        .route("/jobs/{id}", get(get_job))
        .route("/parse", post(parse))
        .route("/models", get(list_models))
        .route("/models/train", post(train_model))
        .route("/smooth", post(smooth))
        .route(
            "/health",
            get(|| async { Json(json!({ "api_version": API_VERSION, "status": "ok" })) }),
        )
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api
            .fallback(|| async { Error::new(ErrorKind::NotFound, "NotFound", "no such endpoint") }),
    };
    app.layer(cors)
}

#[derive(Serialize)]
struct RecordHead {
    id: String,
    created_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    owner: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grade: Option<String>,
}

impl From<&RecordMeta> for RecordHead {
    fn from(m: &RecordMeta) -> Self {
        RecordHead {
            id: m.id.clone(),
            created_at: m.created_at,
            owner: m.owner.clone(),
            grade: m.grade.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostRoute {
    crdl: String,
    #[serde(default)]
    owner: Option<String>,
    #[serde(default)]
    grade: Option<String>,
}

#[derive(Deserialize, Default)]
struct Filter {
    owner: Option<String>,
    grade: Option<String>,
}

fn route_body(rec: &StoredRecord) -> Result<Value> {
    let route = parse_crdl(&rec.payload)?.with_id(rec.meta.id.clone());
    Ok(json!({
        "api_version": API_VERSION,
        "record": RecordHead::from(&rec.meta),
        "crdl": rec.payload,
        "route": route,
    }))
}

async fn post_route(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostRoute>,
) -> Result<(StatusCode, Json<Value>)> {
    // report the CRDL error itself, with its line, rather than a wrapped store error
    parse_crdl(&req.crdl)?;
    let body = blocking(move || {
        st.write(|store| {
            let rec = NewRecord {
                grade: req.grade,
                ..NewRecord::new(RecordKind::Route, req.crdl).owner(req.owner)
            };
            let id = store.put(rec)?;
            route_body(&store.get(&id)?)
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(body)))
}

async fn list_routes(
    State(st): State<AppState>,
    ApiQuery(f): ApiQuery<Filter>,
) -> Result<Json<Value>> {
    blocking(move || {
        st.read(|store| {
            let filter = ListFilter {
                owner: f.owner,
                grade: f.grade,
            };
            let mut routes = Vec::new();
            for meta in store.list(RecordKind::Route, &filter) {
                let rec = store.get(&meta.id)?;
                let route = parse_crdl(&rec.payload)?;
                routes.push(json!({
                    "record": RecordHead::from(&meta),
                    "header": route.header,
                    "moves": route.moves.len(),
                }));
            }
            Ok(Json(
                json!({ "api_version": API_VERSION, "routes": routes }),
            ))
        })
    })
    .await
}

async fn get_route(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>> {
    blocking(move || {
        st.read(|store| Ok(Json(route_body(&get_kind(store, &id, RecordKind::Route)?)?)))
    })
    .await
}

fn get_kind(store: &Store, id: &str, kind: RecordKind) -> Result<StoredRecord> {
    store.get_kind(id, kind).map_err(|e| match e {
        crate::store::StoreError::NotFound(_) => Error::not_found(kind.as_str(), id),
        other => other.into(),
    })
}

fn list_kind(st: &AppState, kind: RecordKind, f: Filter) -> Result<Json<Value>> {
    st.read(|store| {
        let filter = ListFilter {
            owner: f.owner,
            grade: f.grade,
        };
        let records: Vec<RecordHead> = store
            .list(kind, &filter)
            .iter()
            .map(RecordHead::from)
            .collect();
        Ok(Json(
            json!({ "api_version": API_VERSION, "records": records }),
        ))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostVariation {
    inputs: Vec<String>,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    config: Option<VariationConfig>,
    #[serde(default)]
    owner: Option<String>,
}

fn plan_body(meta: &RecordMeta, plan: &VariationPlan) -> Value {
    json!({
        "api_version": API_VERSION,
        "record": RecordHead::from(meta),
        "plan": plan,
        "text": render_plan(plan, PlanFormat::Text),
    })
}

async fn post_variation(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostVariation>,
) -> Result<(StatusCode, Json<Value>)> {
    let cfg = pipeline::resolve_config(req.preset.as_deref(), req.config)?;
    if req.inputs.is_empty() {
        return Err(Error::validation("inputs must name at least one route"));
    }
    let body = blocking(move || {
        st.write(|store| {
            let routes: Vec<Route> = req
                .inputs
                .iter()
                .map(|id| {
                    let rec = get_kind(store, id, RecordKind::Route)?;
                    Ok(parse_crdl(&rec.payload)?.with_id(id.clone()))
                })
                .collect::<Result<_>>()?;
            let plan = generate_variation(&routes, &cfg)?;
            let id = store.put(
                NewRecord::new(RecordKind::Variation, render_plan(&plan, PlanFormat::Json))
                    .owner(req.owner),
            )?;
            Ok(plan_body(store.meta(&id)?, &plan))
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(body)))
}

fn load_plan(store: &Store, id: &str) -> Result<(RecordMeta, VariationPlan)> {
    let rec = get_kind(store, id, RecordKind::Variation)?;
    let plan = serde_json::from_str(&rec.payload)
        .map_err(|e| Error::new(ErrorKind::Io, "CorruptStore", e.to_string()))?;
    Ok((rec.meta, plan))
}

async fn get_variation(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>> {
    blocking(move || {
        st.read(|store| {
            let (meta, plan) = load_plan(store, &id)?;
            Ok(Json(plan_body(&meta, &plan)))
        })
    })
    .await
}

async fn list_variations(
    State(st): State<AppState>,
    ApiQuery(f): ApiQuery<Filter>,
) -> Result<Json<Value>> {
    blocking(move || list_kind(&st, RecordKind::Variation, f)).await
}

async fn list_icmaps(
    State(st): State<AppState>,
    ApiQuery(f): ApiQuery<Filter>,
) -> Result<Json<Value>> {
    blocking(move || list_kind(&st, RecordKind::Icmap, f)).await
}

async fn list_models(
    State(st): State<AppState>,
    ApiQuery(f): ApiQuery<Filter>,
) -> Result<Json<Value>> {
    blocking(move || list_kind(&st, RecordKind::Model, f)).await
}

fn default_sequence_length() -> usize {
    30
}

fn default_spacing() -> f64 {
    0.1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostIcmap {
    n_per_axis: usize,
    #[serde(default = "default_spacing")]
    spacing: f64,
    /// Defaults to the configuration's `ic_r`.
    #[serde(default)]
    center: Option<State3>,
    #[serde(default)]
    slice: Option<Slice>,
    #[serde(default)]
    full_3d: bool,
    #[serde(default = "default_sequence_length")]
    sequence_length: usize,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    config: Option<VariationConfig>,
    #[serde(default)]
    owner: Option<String>,
}

async fn post_icmap(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostIcmap>,
) -> Result<(StatusCode, Json<Job>)> {
    let cfg = pipeline::resolve_config(req.preset.as_deref(), req.config)?;
    let spec = pipeline::grid(
        req.center.unwrap_or(cfg.ic_r),
        req.n_per_axis,
        req.spacing,
        req.slice,
        req.full_3d,
    )?;
    // validates the grid before a job exists
    let cells = MapBuilder::new(spec, &cfg, req.sequence_length)?.cell_count();
    let id = format!("job-{}", st.next_job.fetch_add(1, Ordering::SeqCst));
    let job = Job {
        api_version: API_VERSION,
        id: id.clone(),
        status: JobStatus::Queued,
        cells,
        icmap_id: None,
        error: None,
    };
    st.set_job(job.clone());
    let n = req.sequence_length;
    let owner = req.owner;
    let accepted = job.clone();
    tokio::spawn(async move {
        let _permit = st.workers.clone().acquire_owned().await;
        st.set_job(Job {
            status: JobStatus::Running,
            ..job.clone()
        });
        let worker = st.clone();
        let outcome = blocking(move || {
            let map = build_map_parallel(spec, &cfg, n)?;
            worker.write(|store| {
                Ok(store.put(NewRecord::new(RecordKind::Icmap, map.to_json()).owner(owner))?)
            })
        })
        .await;
        let done = match outcome {
            Ok(icmap_id) => Job {
                status: JobStatus::Done,
                icmap_id: Some(icmap_id),
                ..job
            },
            Err(e) => Job {
                status: JobStatus::Failed,
                error: Some(serde_json::to_value(&e).expect("error serializes")),
                ..job
            },
        };
        st.set_job(done);
    });
    Ok((StatusCode::ACCEPTED, Json(accepted)))
}

async fn get_job(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Job>> {
    st.jobs
        .lock()
        .expect("jobs lock")
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| Error::not_found("job", &id))
}

fn load_map(store: &Store, id: &str) -> Result<ICMap> {
    Ok(ICMap::from_json(
        &get_kind(store, id, RecordKind::Icmap)?.payload,
    )?)
}

async fn get_icmap(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>> {
    blocking(move || {
        st.read(|store| {
            let map = load_map(store, &id)?;
            Ok(Json(json!({
                "api_version": API_VERSION,
                "record": RecordHead::from(store.meta(&id)?),
                "center_index": map.center_index(),
                "map": map,
            })))
        })
    })
    .await
}

#[derive(Deserialize)]
struct PickQuery {
    effect: Option<String>,
    change: Option<String>,
    limit: Option<usize>,
}

async fn pick(
    State(st): State<AppState>,
    Path(id): Path<String>,
    ApiQuery(q): ApiQuery<PickQuery>,
) -> Result<Json<Value>> {
    let range = |s: Option<&str>| {
        s.map(pipeline::parse_range)
            .unwrap_or(Ok(MetricRange::everything()))
    };
    let effect = range(q.effect.as_deref())?;
    let change = range(q.change.as_deref())?;
    let limit = q.limit.unwrap_or(10);
    blocking(move || {
        st.read(|store| {
            let map = load_map(store, &id)?;
            let candidates = pick_ic(&map, effect, change, limit);
            Ok(Json(json!({
                "api_version": API_VERSION,
                "icmap_id": id,
                "sequence_length": map.sequence_length,
                "candidates": candidates,
            })))
        })
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostParse {
    text: String,
}

async fn parse(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostParse>,
) -> Result<Json<Value>> {
    let result = pipeline::parse_description(&req.text, &st.grammar)?;
    let mut body = serde_json::to_value(result).expect("parse result serializes");
    body["api_version"] = json!(API_VERSION);
    Ok(Json(body))
}

fn default_set() -> String {
    "s1".into()
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn parse_set(s: &str) -> Result<SymbolSetId> {
    SymbolSetId::parse(s)
        .ok_or_else(|| Error::validation(format!("unknown symbol set {s:?}; expected s1..s4")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostTrain {
    /// Route ids; all stored routes (filtered by owner) when absent.
    #[serde(default)]
    routes: Option<Vec<String>>,
    /// Symbol sequences used as they are, instead of routes.
    #[serde(default)]
    sequences: Option<Vec<Vec<String>>>,
    #[serde(default = "default_set")]
    set: String,
    #[serde(default = "default_order")]
    order: usize,
    #[serde(default)]
    trained_on: Option<String>,
    #[serde(default)]
    owner: Option<String>,
}

async fn train_model(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostTrain>,
) -> Result<(StatusCode, Json<Value>)> {
    let set = parse_set(&req.set)?;
    if req.routes.is_some() && req.sequences.is_some() {
        return Err(Error::validation(
            "give either routes or sequences, not both",
        ));
    }
    let grammar = st.grammar.clone();
    let body = blocking(move || {
        st.write(|store| {
            let (model, report) = match req.sequences {
                Some(seqs) => {
                    let tag = req.trained_on.clone().unwrap_or_else(|| "custom".into());
                    pipeline::train_on_sequences(&seqs, set, req.order, &tag, 0)?
                }
                None => {
                    let (ids, tag) = match req.routes {
                        Some(ids) => (
                            ids,
                            req.trained_on.clone().unwrap_or_else(|| "custom".into()),
                        ),
                        None => {
                            let filter = ListFilter {
                                owner: req.owner.clone(),
                                grade: None,
                            };
                            let ids = store
                                .list(RecordKind::Route, &filter)
                                .into_iter()
                                .map(|m| m.id)
                                .collect();
                            let tag = req
                                .trained_on
                                .clone()
                                .or_else(|| req.owner.clone())
                                .unwrap_or_else(|| "all".into());
                            (ids, tag)
                        }
                    };
                    let routes: Vec<Route> = ids
                        .iter()
                        .map(|id| {
                            Ok(
                                parse_crdl(&get_kind(store, id, RecordKind::Route)?.payload)?
                                    .with_id(id.clone()),
                            )
                        })
                        .collect::<Result<_>>()?;
                    pipeline::train_on_routes(&routes, &grammar, set, req.order, &tag)?
                }
            };
            let rec = NewRecord {
                symbol_set: Some(set),
                ..NewRecord::new(RecordKind::Model, model.to_json()).owner(req.owner)
            };
            let id = store.put(rec)?;
            Ok(json!({
                "api_version": API_VERSION,
                "record": RecordHead::from(store.meta(&id)?),
                "trained_on": model.trained_on(),
                "report": report,
            }))
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(body)))
}

fn default_j_max() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostSmooth {
    plan_id: String,
    model_id: String,
    #[serde(default = "default_j_max")]
    j_max: usize,
    /// Defaults to the set the model was trained on.
    #[serde(default)]
    set: Option<String>,
}

async fn smooth(
    State(st): State<AppState>,
    ApiJson(req): ApiJson<PostSmooth>,
) -> Result<Json<Value>> {
    let explicit = req.set.as_deref().map(parse_set).transpose()?;
    let grammar = st.grammar.clone();
    blocking(move || {
        st.read(|store| {
            let (_, plan) = load_plan(store, &req.plan_id)?;
            let rec = get_kind(store, &req.model_id, RecordKind::Model)?;
            let model = VommModel::from_json(&rec.payload)?;
            let set = explicit.or(rec.meta.symbol_set).unwrap_or(SymbolSetId::S1);
            let report = pipeline::smooth_plan(&plan, &model, &grammar, set, req.j_max)?;
            let mut body = serde_json::to_value(report).expect("report serializes");
            body["api_version"] = json!(API_VERSION);
            body["plan_id"] = json!(req.plan_id);
            body["model_id"] = json!(req.model_id);
            Ok(Json(body))
        })
    })
    .await
}
