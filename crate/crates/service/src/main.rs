use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use tokio::net::TcpListener;

use incr_service::{serve, AppState, Catalog};

/// Serves interpretation sessions over HTTP/JSON.
#[derive(Debug, Parser)]
#[command(name = "incr-service", version)]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory of `*.lex` files, added to the built-in `demo` lexicon.
    #[arg(long)]
    lexicon_dir: Option<PathBuf>,
    /// Directory of `*.world` files, added to the built-in worlds.
    #[arg(long)]
    world_dir: Option<PathBuf>,
    /// Sessions unused for this long are dropped.
    #[arg(long, default_value_t = 1800)]
    idle_timeout_secs: u64,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let mut catalog = Catalog::builtin();
    let loaded = (|| {
        if let Some(d) = &args.lexicon_dir {
            catalog = std::mem::take(&mut catalog).with_lexicon_dir(d)?;
        }
        if let Some(d) = &args.world_dir {
            catalog = std::mem::take(&mut catalog).with_world_dir(d)?;
        }
        Ok::<_, incr_service::CatalogError>(())
    })();
    if let Err(e) = loaded {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let listener = match TcpListener::bind((args.host.as_str(), args.port)).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}:{}: {e}", args.host, args.port);
            return ExitCode::from(1);
        }
    };
    tracing::info!(addr = %listener.local_addr().unwrap(), "listening");
    let state = AppState::new(catalog, Duration::from_secs(args.idle_timeout_secs));
    match serve(listener, state).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
