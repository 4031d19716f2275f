pub mod cli;
pub mod cubic;
pub mod error;
pub mod evolve;
mod linalg;
pub mod metric;
pub mod spectrum;

pub use cubic::{
    classify_mode, critical_masses, depress, discriminant, solve_characteristic,
    verify_root_identities, CriticalMasses, DepressedCubic, DiscriminantReport, DiscriminantSign,
    MassRegime, ModelParams, RootKind, RootResiduals, RootTriple,
};
pub use error::{Error, Result};
pub use spectrum::{
    assemble_spectrum, asymptotic_check, figure_data, modes_dirichlet_1d, monotonicity_check,
    sigma_max, Dominant, FigureData, ModeSet, OrderingFlag, SpectrumReport,
};
pub use metric::{
    defective_metric, equivalence_bounds, global_metric, gram_asymptotics, modal_gram,
    mr_energy_weight, natural_weight, normality_residual, normalization_constants, SpaceKind,
    SpaceRequest,
};
pub use evolve::{
    decay_certificate, modal_coefficients, modal_state, mr_energy_derivative_check,
    optimality_witness, rk4_oracle, DecayCertificate, ModalCoefficients, ModalIC, Trajectory,
};
