//! Worker-count plumbing shared by evaluation and training.
//!
//! `workers == 1` always takes the plain sequential path; that is the
//! deterministic reference mode. `workers == 0` means "all cores". With the
//! `parallel` feature disabled every call degrades to sequential.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map_items<T, U, F>(workers: usize, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return with_pool(workers, || items.par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Maps `f` over indices `0..n`, preserving order.
pub fn map_range<U, F>(workers: usize, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            return with_pool(workers, || (0..n).into_par_iter().map(&f).collect());
        }
    }
    let _ = workers;
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(workers: usize, run: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        // Global pool, sized to the machine.
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction")
            .install(run)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree_and_preserve_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_items(1, &items, |x| x * x);
        let par = map_items(0, &items, |x| x * x);
        assert_eq!(seq, par);
        let ranged = map_range(4, 1000, |i| (i as u64) * (i as u64));
        assert_eq!(seq, ranged);
    }
}
