//! Fixtures shared by the simulator benchmarks.

use qaoa_lab::experiments::{make_instance, Instance};
use qaoa_lab::{random_params, Convention, QaoaParams};

/// Connected `G(n, 0.6)` instance and random depth-`p` parameters.
pub fn fixture(n: usize, p: usize) -> (Instance, QaoaParams) {
    let inst = make_instance(n, 0.6, 7, false, Convention::MaxCut).expect("fixture graph");
    (inst, random_params(p, 11))
}
