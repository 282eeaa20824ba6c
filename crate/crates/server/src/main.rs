use std::path::PathBuf;
use std::process::ExitCode;

use tfscope_server::{router, Pipeline, ServerConfig};

fn usage() -> ! {
    eprintln!("usage: tfscope-server [--config <file.toml>]");
    std::process::exit(2);
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let mut args = std::env::args().skip(1);
    let mut config_path: Option<PathBuf> = None;
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--config" | "-c" => config_path = Some(args.next().unwrap_or_else(|| usage()).into()),
            _ => usage(),
        }
    }

    let config = match ServerConfig::load(config_path.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let pipeline = match Pipeline::open(config.pipeline()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: binding {}: {e}", config.listen);
            return ExitCode::FAILURE;
        }
    };
    log::info!("listening on {}", config.listen);
    let app = router(pipeline, &config.cors_origins);
    let served = axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    match served {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
