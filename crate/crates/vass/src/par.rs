//! Tiny dispatch layer between rayon and plain iteration.
//!
//! With the `parallel` feature (default) the closures run on the rayon pool
//! whenever the caller asked for parallelism; without it everything is
//! sequential and the flag is ignored. Results come back in input order, so
//! both paths are observationally identical.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if parallel && items.len() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, R, F>(_parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
