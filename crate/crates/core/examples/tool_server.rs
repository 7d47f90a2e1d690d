//! Serves the search/browse tools over HTTP and drives one session against them.
//!
//! `cargo run --example tool_server`

use std::path::PathBuf;
use std::sync::Arc;

use memgov::card::ExperienceCard;
use memgov::index::{HashingEmbedder, MemoryStore, DEFAULT_DIMENSION};
use memgov::server::{serve, ToolService};
use serde_json::{json, Value};

fn post(base: &str, path: &str, body: Value) -> Value {
    let mut resp = ureq::post(format!("{base}{path}"))
        .header("content-type", "application/json")
        .send(body.to_string())
        .expect("request succeeds");
    serde_json::from_str(&resp.body_mut().read_to_string().unwrap()).unwrap()
}

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted_cards.jsonl");
    let embedder = HashingEmbedder::new(DEFAULT_DIMENSION);
    let mut store = MemoryStore::for_embedder(&embedder);
    for line in std::fs::read_to_string(path).expect("planted cards").lines() {
        let card: ExperienceCard = serde_json::from_str(line).expect("card line");
        store.index_card(card, &embedder).expect("card indexes");
    }
    let service = Arc::new(ToolService::new(Some(store), Arc::new(embedder)));

    let rt = tokio::runtime::Runtime::new().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let server = rt.spawn(serve(listener, service, async {
        let _ = stopped.await;
    }));
    println!("serving on {base}");

    let health: Value = serde_json::from_str(&ureq::get(format!("{base}/v1/health")).call().unwrap().body_mut().read_to_string().unwrap()).unwrap();
    println!("health: {health}");

    let session = post(&base, "/v1/session", json!({}))["session_id"].as_str().unwrap().to_string();
    let hits = post(&base, "/v1/search", json!({ "query": "leaked connection pool checkout timeout", "top_k": 3, "session_id": session }));
    for h in hits["hits"].as_array().unwrap() {
        println!("hit {} {:.3} {}", h["card_id"], h["similarity"].as_f64().unwrap(), h["preview"]["problem_summary"]);
    }
    let top = hits["hits"][0]["card_id"].as_str().unwrap().to_string();
    let card = post(&base, "/v1/browse", json!({ "card_id": top, "session_id": session }));
    println!("browsed root cause: {}", card["resolution"]["root_cause"]);
    let brief = post(&base, "/v1/transfer_brief", json!({ "session_id": session, "card_ids": [top] }));
    println!("brief: {}", serde_json::to_string_pretty(&brief).unwrap());

    let log: Value = serde_json::from_str(&ureq::get(format!("{base}/v1/session/{session}")).call().unwrap().body_mut().read_to_string().unwrap()).unwrap();
    println!("session rounds: {}", log["rounds"].as_array().map_or(0, Vec::len));

    let _ = stop.send(());
    rt.block_on(server).unwrap().unwrap();
}
