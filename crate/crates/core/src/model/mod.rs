//! Alternative densities `p = 1 + f` on [0, 1], their CDFs, and sampling.

mod density;
mod descriptor;
mod families;
mod field;
mod piecewise;

pub use density::{
    build_density, field_kolmogorov_distance, AlternativeDensity, ConditionA, ModelFamily, SampleBatch, MAX_SAMPLE,
};
pub use descriptor::{exact_decimal, CoefficientRecord, ExactReal, ModelDescriptor};
pub use families::{
    check_condition_g, critical_scale, gen_endpoint_bump, gen_interior_bump, gen_single_coefficient,
    single_coefficient_field, ConditionG,
    DEFAULT_C_EPS,
};
pub use field::CoefficientField;
pub use piecewise::PiecewiseDeviation;
