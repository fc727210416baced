//! Fixtures shared by the benchmarks.

use shapeinv_core::expr::{Bindings, DomainSampler};
use shapeinv_core::spectral::{discretize, TridiagonalOperator};
use shapeinv_core::{catalog, susy, Grid};

/// Morse hamiltonian (A=5, B=1) on `n` nodes of [-4, 20].
pub fn morse_operator(n: usize) -> TridiagonalOperator {
    let s = catalog::get("morse").expect("builtin");
    let params = Bindings::from_pairs(&[("A", 5.0), ("B", 1.0), ("hbar", 1.0)]);
    let v = susy::partner_potentials(s).v_minus;
    let grid = Grid::new(-4.0, 20.0, n).expect("grid");
    discretize(&v, &s.variable, &params, &grid, 1.0).expect("operator")
}

/// Sampler over the region used to check the Morse recursion.
pub fn recursion_sampler(samples: usize) -> DomainSampler {
    DomainSampler::new(7)
        .range("x", 0.0, 3.0)
        .range("a", -6.0, -0.5)
        .range("P", -2.0, 2.0)
        .range("Q", 0.2, 3.0)
        .samples(samples)
}
