//! The product space carrying a default time, the lifted base filtration, the
//! progressive enlargement `G`, and the stopped σ-algebras and fragment
//! filtrations built from `G`.

mod appendix;
mod product;
mod stopped;

pub use appendix::{
    check_appendix_identities, check_appendix_identities_with, gtau_equality, gtau_witness, AppendixMutation,
    AppendixReport, IdentityCheck, Witness, BEFORE_SPLIT_AT_OR_BEFORE_DEFAULT, BEFORE_SPLIT_STRICTLY_BEFORE_DEFAULT,
    FRAGMENT_ADAPTED_TRANSFER, FRAGMENT_IS_FILTRATION, FRAGMENT_MARTINGALE_TRANSFER, FRAGMENT_PREDICTABLE_TRANSFER,
    FRAGMENT_START_AND_END, FRAGMENT_STOPPED_SIGMA, STAR_BETWEEN_BEFORE_AND_AT, STAR_OF_MAXIMUM,
};
pub use product::{build_product_space, DefaultKernel, EnlargedSpace};
pub use stopped::{fragment_filtration, fragment_process, g_at, g_before, g_star, random_stopping_time};
