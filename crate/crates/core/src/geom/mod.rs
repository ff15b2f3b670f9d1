//! Bounded pseudometric spaces with a linear structure `L(x, y, t)`.

mod axioms;
mod point;
mod sample;
mod space;

pub use axioms::{
    check_hyperbolic_type, check_linear_axioms, tsub, AxiomPart, AxiomReport, AxiomWitness,
};
pub use point::Point;
pub use sample::{all_pairs, grid_points, random_triples, sample_points};
pub(crate) use space::check_unit;
pub use space::{
    default_t_grid, Geodesic, GeodesicSpace, Norm, SpaceKind, SpaceWithGeodesic, ZERO_DISTANCE,
};
