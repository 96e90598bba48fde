//! Default-time models built as enlarged spaces: Cox, conditional density,
//! honest times, fixed dates, explicit kernels and the conditional-CDF model,
//! plus the base trees and drivers they live on.

pub mod catalog;
mod cox;
mod density;
mod honest;
mod natural;
mod tree;

pub use cox::{cox_kernel, cox_model, CoxParams};
pub use density::{density_kernel, density_model, DensityParams};
pub use honest::{fixed_time_model, honest_time_model, honesty_defect, random_honest_times, HonestRule};
pub use natural::{conditional_cdf, natural_kernel, natural_model_discrete, NaturalModel, NaturalParams, ScalarFn};
pub use tree::{coordinate_drivers, walk_driver, BaseTree};

use num::Zero;
use rand::Rng;

use crate::enlargement::{build_product_space, DefaultKernel, EnlargedSpace};
use crate::error::Result;
use crate::finite_prob::{Filtration, FiniteSpace, Rational};

/// A model given directly by its kernel.
pub fn kernel_model(base: &FiniteSpace, f: &Filtration, kernel: DefaultKernel) -> Result<EnlargedSpace> {
    build_product_space(base.clone(), f.clone(), kernel)
}

/// Random kernel: each entry proportional to an integer in `0..=3`, rows
/// redrawn until non-zero; time 0 gets mass only when `allow_time_zero`.
pub fn random_kernel<R: Rng>(rng: &mut R, atoms: usize, columns: usize, allow_time_zero: bool) -> DefaultKernel {
    let rows = (0..atoms)
        .map(|_| loop {
            let raw: Vec<i64> =
                (0..columns).map(|k| if k == 0 && !allow_time_zero { 0 } else { rng.gen_range(0..=3) }).collect();
            let total: i64 = raw.iter().sum();
            if total > 0 {
                break raw.into_iter().map(|r| Rational::new(r.into(), total.into())).collect::<Vec<_>>();
            }
        })
        .collect::<Vec<Vec<Rational>>>();
    debug_assert!(rows.iter().all(|r| !r.iter().all(Zero::is_zero)));
    DefaultKernel::new(rows).expect("normalized rows")
}
