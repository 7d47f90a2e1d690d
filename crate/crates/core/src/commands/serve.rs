use std::future::Future;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use tokio::net::TcpListener;

use super::{open_store, CommandError};
use crate::server::{serve, ToolService};

/// Loads the store and binds the listening socket, so that load failures and
/// occupied ports surface before the server reports itself ready.
pub async fn prepare_server(dir: &Path, addr: SocketAddr) -> Result<(TcpListener, Arc<ToolService>), CommandError> {
    let (store, embedder) = open_store(dir)?;
    let listener = TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => CommandError::Infra(format!("port {} is already in use", addr.port())),
        _ => CommandError::Infra(format!("binding {addr}: {e}")),
    })?;
    Ok((listener, Arc::new(ToolService::new(Some(store), Arc::new(embedder)))))
}

/// Serves until `shutdown` resolves; in-flight requests are completed first.
pub async fn run_server(
    listener: TcpListener,
    service: Arc<ToolService>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), CommandError> {
    serve(listener, service, shutdown)
        .await
        .map_err(|e| CommandError::Infra(format!("server: {e}")))
}

/// Resolves on SIGINT or, on Unix, SIGTERM.
pub async fn interrupt() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    {
        let term = async {
            match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
                Ok(mut s) => {
                    s.recv().await;
                }
                Err(_) => std::future::pending::<()>().await,
            }
        };
        tokio::select! {
            _ = ctrl_c => {},
            _ = term => {},
        }
    }
    #[cfg(not(unix))]
    ctrl_c.await;
}
