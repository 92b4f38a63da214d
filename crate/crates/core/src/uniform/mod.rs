//! The multi-interval Hilbert transform with all coupling coefficients equal to one,
//! diagonalized by a change of variables and a Fourier multiplier.

pub mod spectral;
pub mod transform;

pub use spectral::{build_spectral_data, SpectralData, TGrid};
pub use transform::{
    apply_m, apply_t, apply_t_inverse, uniform_forward, uniform_invert, uniform_range_check, ChannelVector, RangeReport,
    Spectrum, UniformOptions, UniformOutput,
};
