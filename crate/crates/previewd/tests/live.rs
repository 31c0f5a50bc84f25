//! Against a real socket.

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use examdown_previewd::{router, ServiceConfig};
use serde_json::{json, Value};

async fn spawn_server() -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(ServiceConfig::default())).await.unwrap() });
    addr
}

fn two_kib_document() -> String {
    let part = "## Question\n\nProve $sum_(i=1)^n i^3=((n(n+1))/2)^2$ for all $n >= 1$.\n\n\
                :::derivation\nx^2-10x+9=0\n<=> (x-1)(x-9)=0 | factorise\n=> x=1 or x=9\n:::\n\n\
                We calculate \\(6\\times 3={@6*3@}\\) and $[[a,b],[c,d]]$.\n\nanswer: x=1 or x=9\n\n";
    let mut doc = String::new();
    while doc.len() < 2048 {
        doc.push_str(part);
    }
    doc.truncate(doc[..2048].rfind('\n').unwrap() + 1);
    doc
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn two_kib_document_renders_quickly() {
    let addr = spawn_server().await;
    let client = reqwest::Client::new();
    let body = json!({"source": two_kib_document(), "calc_enabled": true, "want": ["html", "diagnostics", "answers"]});
    let mut times = Vec::new();
    for _ in 0..21 {
        let start = Instant::now();
        let resp = client
            .post(format!("http://{addr}/v1/render"))
            .json(&body)
            .send()
            .await
            .unwrap();
        assert_eq!(resp.status(), 200);
        let v: Value = resp.json().await.unwrap();
        times.push(start.elapsed());
        assert!(v["html"].as_str().unwrap().contains("<mn>18</mn>"));
    }
    times.sort();
    let median = times[times.len() / 2];
    assert!(median < Duration::from_millis(50), "median {median:?}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn health_stays_responsive_under_render_load() {
    let addr = spawn_server().await;
    let client = reqwest::Client::new();
    let heavy = json!({"source": two_kib_document().repeat(8), "want": ["html", "diagnostics"]});

    let stop = Instant::now() + Duration::from_secs(2);
    let load: Vec<_> = (0..8)
        .map(|_| {
            let client = client.clone();
            let heavy = heavy.clone();
            tokio::spawn(async move {
                let mut n = 0;
                while Instant::now() < stop {
                    let r = client
                        .post(format!("http://{addr}/v1/render"))
                        .json(&heavy)
                        .send()
                        .await
                        .unwrap();
                    assert_eq!(r.status(), 200);
                    r.bytes().await.unwrap();
                    n += 1;
                }
                n
            })
        })
        .collect();

    let mut latencies = Vec::new();
    tokio::time::sleep(Duration::from_millis(100)).await;
    while Instant::now() < stop {
        let start = Instant::now();
        let r = client.get(format!("http://{addr}/v1/health")).send().await.unwrap();
        assert_eq!(r.status(), 200);
        let v: Value = r.json().await.unwrap();
        latencies.push(start.elapsed());
        assert_eq!(v["status"], "ok");
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    let mut renders = 0;
    for t in load {
        renders += t.await.unwrap();
    }
    assert!(renders > 0);
    latencies.sort();
    let p99 = latencies[(latencies.len() * 99 / 100).min(latencies.len() - 1)];
    assert!(
        p99 < Duration::from_millis(100),
        "p99 {p99:?} over {} probes",
        latencies.len()
    );
}
