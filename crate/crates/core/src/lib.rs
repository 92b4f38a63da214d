//! Multi-interval finite Hilbert transforms: forward evaluation, inversion,
//! range conditions, and the Riemann–Hilbert resolvent for coupled systems.

pub mod bilinear;
pub mod chebyshev;
pub mod error;
pub mod fht;
pub mod function;
pub mod interval;
pub mod nystrom;
pub mod pv;
pub mod quadrature;
pub mod rhp;
pub mod theta;
pub mod uniform;

pub use bilinear::{bilinear_form_j, injectivity_report, FourierGrid, InjectivityReport};
pub use error::{Error, Result};
pub use fht::RangeData;
pub use function::{cheb_project, PiecewiseFunction, Weight};
pub use interval::{multi_radical_sqrt, Interval, IntervalPoint, IntervalSystem, Side};
pub use nystrom::{solve_phi, NystromSystem, PhiSolution, SolveOptions};
pub use quadrature::{Family, QuadratureGrid};
pub use rhp::{GammaSolution, KernelVectors};
pub use theta::{ThetaClass, ThetaMatrix};
pub use uniform::{build_spectral_data, SpectralData, UniformOptions};
