//! Fixtures shared by the kernel benchmarks.

use ghostmax::{Domain, RedistanceParams, Scene, Shape};

/// Circle of radius 2 in `[0, 10]²` with `cells` intervals per side.
pub fn circle_scene(cells: usize) -> Scene {
    Scene::with_cells(
        Shape::circle([5.0, 5.0], 2.0),
        Domain::square(10.0).expect("valid domain"),
        cells,
        &RedistanceParams::default(),
    )
    .expect("circle scene builds")
}

/// The default crescent with `cells` intervals per side.
pub fn half_moon_scene(cells: usize) -> Scene {
    Scene::with_cells(
        Shape::default_half_moon(),
        Domain::square(10.0).expect("valid domain"),
        cells,
        &RedistanceParams::default(),
    )
    .expect("crescent scene builds")
}
