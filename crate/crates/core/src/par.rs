//! Thin execution helpers: run two closures or an indexed map either on the
//! rayon pool (feature `parallel`, toggled at runtime) or sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs the two closures, in parallel when `parallel` is set and the feature
/// is compiled in.
pub fn join<A, B, FA, FB>(parallel: bool, fa: FA, fb: FB) -> (A, B)
where
    A: Send,
    B: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::join(fa, fb);
    }
    let _ = parallel;
    (fa(), fb())
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<R, F>(parallel: bool, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
