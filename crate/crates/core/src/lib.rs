//! Free-field tonal noise simulation, soundfield interpolation at virtual
//! microphones and multichannel filtered-x LMS control.

pub mod acoustics;
pub mod anc;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pinn;
pub mod scenario;
pub mod sh;
pub mod signal;

pub use acoustics::{make_path_fir, propagate_tonal, TonalSource, ToneComponent};
pub use error::{Error, Result};
pub use geometry::{ball_points, cart_to_sph, sphere_points, Point3, Spherical};
pub use metrics::{interpolation_error, noise_reduction, to_db, DB_FLOOR};
pub use scenario::{ScenarioConfig, ScenarioSpec};
pub use signal::{FirFilter, SampledSignal};
