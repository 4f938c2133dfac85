//! Replication-level parallelism.
//!
//! With the `parallel` feature, [`map_indexed`] fans out over rayon's pool;
//! without it, or inside [`serial`], it is a plain ordered loop. Results are
//! always returned in index order so aggregation is independent of
//! scheduling.

use std::cell::Cell;

thread_local! {
    static FORCE_SERIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all nested [`map_indexed`] calls on the current thread.
pub fn serial<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SERIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SERIAL.with(|c| c.set(prev));
    out
}

pub fn is_serial() -> bool {
    !cfg!(feature = "parallel") || FORCE_SERIAL.with(|c| c.get())
}

/// `(0..n).map(f)` collected in order, in parallel when enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !is_serial() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Fallible variant; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let par = map_indexed(1000, |i| i * i);
        let ser = serial(|| map_indexed(1000, |i| i * i));
        assert_eq!(par, ser);
        assert_eq!(par[31], 961);
    }
}
