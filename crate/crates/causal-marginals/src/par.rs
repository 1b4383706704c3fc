//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the closures run on the rayon pool;
//! without it the same helpers degrade to plain iterator code. Callers are
//! expected to sort or otherwise canonicalize collected results, so the two
//! modes are observationally identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items` and collects in input order.
pub fn map_vec<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over an index range and collects in input order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Flat-maps `f` over `items`, concatenating in input order.
pub fn flat_map_vec<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().flat_map_iter(|t| f(t).into_iter()).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().flat_map(|t| f(t).into_iter()).collect()
    }
}

/// True when this build actually fans work out to rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u32> = (0..100).collect();
        let ys = map_vec(&xs, |x| x * 2);
        assert_eq!(ys, (0..100).map(|x| x * 2).collect::<Vec<_>>());
        let zs = map_range(5, |i| i + 1);
        assert_eq!(zs, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn flat_map_concatenates_in_order() {
        let xs = vec![1usize, 2, 3];
        let ys = flat_map_vec(&xs, |x| vec![*x; *x]);
        assert_eq!(ys, vec![1, 2, 2, 3, 3, 3]);
    }
}
