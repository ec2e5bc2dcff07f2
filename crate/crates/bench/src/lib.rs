//! Fixtures shared by the benchmarks.

use robinlab::boundary_ops::BoundaryOperatorSpec;
use robinlab::harness::{Discretization, Problem};
use robinlab::PolygonalDomain;

/// Discretization of `domain` with boundary operator `theta` at `level`.
pub fn discretization(domain: &str, theta: &str, level: usize) -> Discretization {
    let problem =
        Problem::new(PolygonalDomain::parse(domain).expect("catalog domain"), BoundaryOperatorSpec::parse(theta).expect("valid spec"));
    Discretization::new(&problem, level).expect("mesh and assembly")
}
