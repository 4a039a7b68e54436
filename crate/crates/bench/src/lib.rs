//! Shared scenarios for the benchmarks.

use kzstring::{
    lambda_init, make_curve, uniform_grid, InitialCurve, KzMap, Presentation, Topology,
    VelocitySpec,
};

/// The (2, 1) ellipse at rest.
pub fn ellipse() -> InitialCurve {
    make_curve(
        &Presentation::preset("ellipse", &[2.0, 1.0]),
        &VelocitySpec::Zero,
        2,
        Topology::default(),
    )
    .expect("ellipse preset")
}

/// Transform of [`ellipse`] tabulated on `nodes` θ-cells.
pub fn ellipse_map(nodes: usize) -> KzMap {
    let c = ellipse();
    let field = lambda_init(&c, &uniform_grid(Topology::default(), nodes)).expect("time-like data");
    KzMap::build(&c, &field).expect("monotone ρ")
}
