use std::sync::OnceLock;

use rayon::prelude::*;

/// Environment variable that forces every per-node map to run on the calling thread.
pub const SERIAL_ENV: &str = "SIGMAK_SERIAL";

pub(crate) fn serial_mode() -> bool {
    static SERIAL: OnceLock<bool> = OnceLock::new();
    *SERIAL.get_or_init(|| {
        std::env::var(SERIAL_ENV)
            .map(|v| !v.is_empty() && v != "0" && v != "false")
            .unwrap_or(false)
    })
}

/// Order-preserving map over `0..n`. Results are identical in both modes
/// since no reduction is involved.
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if serial_mode() || n < 256 {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}
