//! Shared fixtures for the pipeline benchmarks.

use derate_core::ml::{Dataset, Matrix};
use derate_core::netlist::Netlist;
use derate_core::rng::stream_rng;
use derate_core::sim::Stimulus;
use rand_core::RngCore;

pub fn demo_fixture(cycles: u32) -> (Netlist, Stimulus) {
    (derate_core::demo::netlist(), derate_core::demo::stimulus(0, cycles))
}

/// Random feature-shaped dataset: n rows, 17 columns, targets in [0, 1].
pub fn synthetic_dataset(n: usize) -> Dataset {
    let mut rng = stream_rng(0, 0xBE, 0);
    let mut f64s = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..17).map(|_| f64s() * 4.0 - 2.0).collect())
        .collect();
    let y: Vec<f64> = (0..n).map(|_| f64s()).collect();
    let ids = (0..n).map(|i| format!("ff{i}")).collect();
    Dataset::new(Matrix::from_rows(&rows), y, ids).unwrap()
}
