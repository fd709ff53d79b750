//! Plane-wave sums on ordered regions and Bethe wavefunctions.

mod exppoly;
mod wavefunction;

pub use exppoly::{unit, ExpPoly, Term};
pub use wavefunction::{
    build_bethe, build_bethe_limited, summary_json, BetheWavefunction, Coupling, RapiditySet,
    DEFAULT_MAX_PARTICLES,
};
