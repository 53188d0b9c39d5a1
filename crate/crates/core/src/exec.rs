//! Execution policy for the data-parallel loops over quanta.
//!
//! With the `parallel` feature the loops run on rayon's pool; without it, or
//! under [`Policy::Sequential`], they run on the calling thread. Reductions use
//! fixed chunk boundaries so results are bitwise identical across policies and
//! thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for ordered reductions.
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Policy {
    Sequential,
    #[default]
    Parallel,
}

impl Policy {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Policy::Parallel
    }
}

pub fn for_each_mut<T, F>(policy: Policy, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = policy;
    items.iter_mut().for_each(f);
}

/// Fallible variant; the first error in slice order is returned.
pub fn try_for_each_mut<T, E, F>(policy: Policy, items: &mut [T], f: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(&mut T) -> Result<(), E> + Sync + Send,
{
    let results: Vec<Result<(), E>> = map_chunks_mut(policy, items, |chunk| {
        for item in chunk {
            f(item)?;
        }
        Ok(())
    });
    results.into_iter().collect()
}

/// Map each fixed-size chunk of `items` to a value, preserving chunk order.
pub fn map_chunks<T, R, F>(policy: Policy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return items.par_chunks(CHUNK).map(f).collect();
    }
    let _ = policy;
    items.chunks(CHUNK).map(f).collect()
}

pub fn map_chunks_mut<T, R, F>(policy: Policy, items: &mut [T], f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(&mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return items.par_chunks_mut(CHUNK).map(f).collect();
    }
    let _ = policy;
    items.chunks_mut(CHUNK).map(f).collect()
}

/// Build `0..n` mapped through `f`, preserving index order.
pub fn map_range<R, F>(policy: Policy, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_sums_agree_across_policies() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let a = map_chunks(Policy::Sequential, &xs, |c| c.iter().sum::<f64>());
        let b = map_chunks(Policy::Parallel, &xs, |c| c.iter().sum::<f64>());
        assert_eq!(a, b);
    }

    #[test]
    fn first_error_wins() {
        let mut xs: Vec<i32> = (0..10_000).collect();
        let r = try_for_each_mut(Policy::Parallel, &mut xs, |x| if *x % 5000 == 4999 { Err(*x) } else { Ok(()) });
        assert_eq!(r, Err(4999));
    }
}
