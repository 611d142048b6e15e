//! Built-in systems with charts, constraints, samplers and closed forms.

pub mod klauder;
pub mod maxwell;
pub mod particle;
pub mod potential;

pub use klauder::KlauderModel;
pub use maxwell::LatticeMaxwell;
pub use particle::RelativisticParticle;
pub use potential::Potential;
