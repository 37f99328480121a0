use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

use fractile_service::{router, AppState};

#[derive(Parser)]
#[command(name = "fractile-service", version, about = "HTTP service for neighborhood exploration")]
struct Opts {
    #[arg(long, env = "FRACTILE_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory of extra `*.json` IFS files served as presets by file stem.
    #[arg(long)]
    preset_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt::init();
    let opts = Opts::parse();
    let state = match &opts.preset_dir {
        Some(dir) => AppState::with_preset_dir(dir).with_context(|| format!("reading {}", dir.display()))?,
        None => AppState::new(),
    };
    let addr = SocketAddr::new(opts.host, opts.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await?;
    Ok(())
}
