pub mod density;
pub mod poles;
pub mod quadrature;

pub use density::{SpectralDensity, Tabulated};
pub use poles::{pole_ladder, pole_second_order, self_energy, Pole, PoleLadder, PvQuadrature, SelfEnergy};
