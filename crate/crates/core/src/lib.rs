//! Design and analysis toolkit for polar and PAC codes.
//!
//! The crate enumerates minimum-weight codewords exactly through the coset
//! structure of `G_N = G_2^{⊗n}`, rewrites rate profiles to lower the error
//! coefficient, counts minimum-weight codewords under convolutional
//! precoding, and checks designs with an SC-list Monte-Carlo simulator.
//!
//! ```
//! use polarcoset::{error_coefficient, RateProfile};
//!
//! let rm13 = RateProfile::new(3, [3, 5, 6, 7]).unwrap();
//! let report = error_coefficient(&rm13).unwrap();
//! assert_eq!((report.d_min, report.a_dmin), (4, 14));
//! ```

pub mod bits;
pub mod codec;
pub mod construct;
pub mod error;
pub mod indexsets;
pub mod minweight;
pub mod pac;
pub mod sim;

pub use codec::{
    ml_lower_bound_flag, polar_transform, scl_decode, CodeSpec, Crc, Decoded, DecoderConfig,
    SclDecoder,
};
pub use construct::{
    dega_profile, improve_profile, improve_profile_with, CheckApprox, ImprovementStep, JRule,
    ProfileFile, ReliabilityOrder,
};
pub use error::{Error, Result};
pub use indexsets::{
    pair_sum_weight, partial_order_leq, row_weight, satisfies_pop, support, transform_entry,
    IndexSupport, RateProfile, MAX_LAYERS,
};
pub use minweight::{
    brute_force_spectrum, coset_count, coset_report, e_set, error_coefficient, k_set, k_size,
    m_construction, min_weight_codeword, t_star, KSet, MMultiset, MinWeightCodeword,
    MinWeightReport, DEFAULT_BUDGET,
};
pub use pac::{pac_encode, pac_min_weight_count, precode, precode_inverse, Precoder};
pub use sim::{emit_csv, run_bler, wilson_interval, SimConfig, SimPoint, SimResult};
