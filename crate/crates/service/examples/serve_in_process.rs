// Train small models, serve them on an ephemeral port, call the predict and
// health endpoints, then shut down gracefully.
//
// cargo run --release --example serve_in_process

use polarcascade::cascade::CascadeConfig;
use polarcascade::embed::Pooling;
use polarcascade::nnet::TrainConfig;
use polarcascade::pipeline::{train_classifier, SyntheticSetup, TaskKind};
use polarcascade_service::{serve_on, AppState, ModelRegistry, RegistryHandle, ServiceConfig};
use serde_json::{json, Value};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SyntheticSetup::new(150, 20, 16, 7)?;
    let cfg = TrainConfig {
        epochs: 10,
        hidden_sizes: vec![16],
        ..TrainConfig::default()
    };
    let train = |kind| train_classifier(kind, &setup.corpus, &setup.table, Pooling::Average, &cfg, 0.8);
    let registry = ModelRegistry::from_parts(
        train(TaskKind::Polarity)?.model,
        train(TaskKind::Neutral)?.model,
        setup.table.clone(),
        CascadeConfig::default(),
    )?;
    let state = AppState::new(RegistryHandle::new(registry), ServiceConfig::default())?;

    let text = "left001 left002 left003 left004. plain001 plain002 plain003. plain004 plain005.";
    tokio::runtime::Runtime::new()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let base = format!("http://{}", listener.local_addr()?);
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let server = tokio::spawn(serve_on(listener, state, async {
            stopped.await.ok();
        }));

        let http = reqwest::Client::new();
        let health: Value = serde_json::from_str(&http.get(format!("{base}/healthz")).send().await?.text().await?)?;
        println!("healthz: {health}");
        let reply = http
            .post(format!("{base}/api/v1/predict?detail=1"))
            .header("content-type", "application/json")
            .body(json!({ "text": text }).to_string())
            .send()
            .await?
            .text()
            .await?;
        let reply: Value = serde_json::from_str(&reply)?;
        println!("{}", serde_json::to_string_pretty(&reply)?);
        let bad = http
            .post(format!("{base}/api/v1/predict"))
            .header("content-type", "application/json")
            .body("{}")
            .send()
            .await?;
        println!("empty request: {} {}", bad.status(), bad.text().await?);

        stop.send(()).ok();
        server.await??;
        Ok::<_, Box<dyn std::error::Error>>(())
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
