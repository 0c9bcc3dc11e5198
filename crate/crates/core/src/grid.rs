//! Data-parallel grid evaluation.
//!
//! Every grid scan in the crate funnels through [`map_line`] / [`map_grid`].
//! With the `parallel` feature (on by default) they dispatch the points to
//! rayon; without it they run the plain sequential loops in [`map_line_seq`]
//! and [`map_grid_seq`]. Both paths produce elements in the same order, so
//! downstream reductions are deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `n` evenly spaced samples covering `[a, b]` inclusive. `n` must be ≥ 2.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two samples");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Maps `f` over the samples, in order.
pub fn map_line_seq<T, F>(ts: &[f64], f: F) -> Vec<T>
where
    F: Fn(f64) -> T,
{
    ts.iter().map(|&t| f(t)).collect()
}

/// Maps `f` over the cartesian grid, row-major in the first coordinate.
pub fn map_grid_seq<T, F>(us: &[f64], vs: &[f64], f: F) -> Vec<T>
where
    F: Fn(f64, f64) -> T,
{
    let mut out = Vec::with_capacity(us.len() * vs.len());
    for &u in us {
        for &v in vs {
            out.push(f(u, v));
        }
    }
    out
}

#[cfg(feature = "parallel")]
pub fn map_line<T, F>(ts: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    ts.par_iter().map(|&t| f(t)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_line<T, F>(ts: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    map_line_seq(ts, f)
}

#[cfg(feature = "parallel")]
pub fn map_grid<T, F>(us: &[f64], vs: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64, f64) -> T + Sync,
{
    let vs_owned: Vec<f64> = vs.to_vec();
    us.par_iter()
        .flat_map_iter(|&u| {
            let f = &f;
            vs_owned.iter().map(move |&v| f(u, v)).collect::<Vec<T>>()
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_grid<T, F>(us: &[f64], vs: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64, f64) -> T + Sync,
{
    map_grid_seq(us, vs, f)
}

/// Caps the worker pool used by the parallel grid paths. A no-op without
/// the `parallel` feature, and after the pool already started.
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}
