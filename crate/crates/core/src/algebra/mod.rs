//! The complex group algebra `C[G]`: sparse elements, Hopf structure maps,
//! weighted norms and the norm inequalities between them.

mod checks;
mod element;
mod norms;

pub use checks::{
    almost_constant_ln, check_bimodule_estimate, check_c0_sub_bimodule, check_product_inequality, BimoduleMode,
    BimoduleReport, C0Report, Inequality, ProductMode, ProductReport,
};
pub use element::{AlgebraElement, ProductAlgebraElement};
pub use norms::{c0_tail_profile, norm, profile_csv, tensor_norm, Exponent, NormSpec};
