//! Fixtures shared by the criterion benches.

use fwf_core::{embed, Dataset, SignalSpec};

/// Standardized Mackey-Glass windows: `n` rows of order `order`, one step ahead.
pub fn mackey_glass(n: usize, order: usize) -> Dataset {
    let (s, _) = SignalSpec::mackey_glass()
        .generate(n + order, 0)
        .expect("default generator settings are valid");
    embed(&s, order, 1).expect("series long enough")
}

/// Splits off the last `queries` rows as a query set.
pub fn split(data: &Dataset, queries: usize) -> (Dataset, Dataset) {
    let n = data.len() - queries;
    (data.slice(0..n), data.slice(n..data.len()))
}
