//! Density models for heat flow: analytic Gaussian mixtures and sampled grids.

mod grid;
mod mixture;

pub use grid::{convolve, heat_evolve_grid, DensityGrid, HALF_WIDTH_STDS, POINTS_PER_STD};
pub use mixture::{hermite_probabilists, Component, GaussianMixture, ScoreScratch};

/// Either density representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    Mixture(GaussianMixture),
    Grid(DensityGrid),
}

impl From<GaussianMixture> for Density {
    fn from(m: GaussianMixture) -> Self {
        Density::Mixture(m)
    }
}

impl From<DensityGrid> for Density {
    fn from(g: DensityGrid) -> Self {
        Density::Grid(g)
    }
}
