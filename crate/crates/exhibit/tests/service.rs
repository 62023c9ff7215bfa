mod common;

use std::sync::{Arc, OnceLock};

use axum::http::StatusCode;
use axum::Router;
use common::{local_embedder, send, Fixture};
use exhibit::chat::HttpChatClient;
use exhibit::engine::Engine;
use exhibit::service::router;
use exhibit::transport::Offline;
use exhibit_core::neural::Variant;
use serde_json::Value;

struct World {
    app: Router,
    offline: Arc<Offline>,
}

fn world() -> &'static World {
    static WORLD: OnceLock<World> = OnceLock::new();
    WORLD.get_or_init(|| {
        let fx = Fixture::small();
        let embedder = local_embedder();
        let (m1, meta1) = fx.train(Variant::SelfContained, 5, &embedder);
        let (m2, meta2) = fx.train(Variant::EmbedToTags, 40, &embedder);
        let offline = Arc::new(Offline::default());
        let chat = HttpChatClient::new(offline.clone(), "http://127.0.0.1:9/v1", "ft:none", None);
        let engine: Engine = fx
            .engine(embedder, vec![(m1.best, meta1), (m2.best, meta2)])
            .with_chat(Box::new(chat), 2);
        World {
            app: router(Arc::new(engine)),
            offline,
        }
    })
}

#[tokio::test]
async fn artwork_lookup() {
    let app = &world().app;
    let (status, jug) = send(app, "GET", "/artworks/187702", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(jug["title"], "Jug");
    assert_eq!(jug["department"], "European Sculpture and Decorative Arts");
    assert_eq!(jug["tags"], serde_json::json!(["Cranes", "Donkeys", "Trees"]));
    assert_eq!(send(app, "GET", "/artworks/1", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(send(app, "GET", "/artworks/jug", None).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn curate_defaults_to_sixteen() {
    let app = &world().app;
    let body = r#"{"title": "Splendors of the samurai armor", "description": "katana and helmet of the shogun", "variant": "m2"}"#;
    let (status, resp) = send(app, "POST", "/curate", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{resp}");
    assert_eq!(resp["k"], 16);
    assert_eq!(resp["variant"], "m2");
    let arts = resp["artworks"].as_array().unwrap();
    assert_eq!(arts.len(), 16);
    for (i, a) in arts.iter().enumerate() {
        assert_eq!(a["rank"], i + 1);
        for key in ["department", "artist_display_name", "object_begin_date", "medium", "classification", "tags"] {
            assert!(a.get(key).is_some(), "missing {key}");
        }
    }
    let scores: Vec<f64> = arts.iter().map(|a| a["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test]
async fn identical_requests_give_identical_orderings() {
    let app = &world().app;
    let body = r#"{"title": "Jingdezhen porcelain", "description": "", "variant": "m1", "k": 8}"#;
    let ids = |v: &Value| -> Vec<u64> { v["artworks"].as_array().unwrap().iter().map(|a| a["object_id"].as_u64().unwrap()).collect() };
    let (s1, a) = send(app, "POST", "/curate", Some(body)).await;
    let (s2, b) = send(app, "POST", "/curate", Some(body)).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(ids(&a), ids(&b));
    assert_eq!(ids(&a).len(), 8);
}

#[tokio::test]
async fn malformed_requests_are_rejected() {
    let app = &world().app;
    for body in [
        "not json",
        r#"{"title": "", "description": "", "variant": "m2"}"#,
        r#"{"title": "x", "description": "y"}"#,
        r#"{"title": "x", "description": "y", "variant": "m9"}"#,
        r#"{"title": "x", "description": "y", "variant": "m2", "k": 0}"#,
        r#"{"title": "x", "description": "y", "variant": "m2", "k": -3}"#,
        r#"{"title": "x", "variant": "m2", "colour": "red"}"#,
    ] {
        let (status, resp) = send(app, "POST", "/curate", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(resp["error"].is_string());
    }
}

#[tokio::test]
async fn missing_artifacts_are_unavailable() {
    let app = &world().app;
    let (status, _) = send(app, "POST", "/curate", Some(r#"{"title": "x", "variant": "m3"}"#)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (_, models) = send(app, "GET", "/models", None).await;
    let variants = models["variants"].as_array().unwrap();
    let available: Vec<(&str, bool)> =
        variants.iter().map(|v| (v["variant"].as_str().unwrap(), v["available"].as_bool().unwrap())).collect();
    assert_eq!(available, [("m1", true), ("m2", true), ("m3", false), ("m4", true)]);
    assert_eq!(models["default_k"], 16);
    let (status, health) = send(app, "GET", "/health", None).await;
    assert_eq!((status, health["status"].as_str()), (StatusCode::OK, Some("ok")));
}

#[tokio::test]
async fn only_the_chat_variant_reaches_the_network() {
    let w = world();
    for v in ["m1", "m2"] {
        let body = format!(r#"{{"title": "Assyrian palace reliefs", "description": "cuneiform", "variant": "{v}"}}"#);
        assert_eq!(send(&w.app, "POST", "/curate", Some(&body)).await.0, StatusCode::OK);
    }
    let before = w.offline.calls();
    assert_eq!(before, 0, "m1/m2 requests reached the network stub");
    let (status, _) = send(&w.app, "POST", "/curate", Some(r#"{"title": "x", "variant": "m4"}"#)).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert!(w.offline.calls() > before);
}

#[test]
fn empty_engine_has_no_curators() {
    let fx = Fixture::small();
    let engine = Engine::new(fx.corpus.catalog.clone(), fx.tags.clone());
    assert!(engine.status().iter().all(|s| !s.available));
}
