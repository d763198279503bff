pub mod expansion;
pub mod pencil;
pub mod timescales;

pub use expansion::{evaluate_expansion, DecayMode, ModeExpansion};
pub use pencil::{extract_modes, ExtractedModes};
pub use timescales::{
    classify_modes, decoherence_time, gamma_eff, relaxation_time, short_time_log_expansion, GammaEff, GammaEffReading,
    TimescaleReport,
};
