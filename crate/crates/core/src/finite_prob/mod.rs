//! Exact finite probability: weighted atom spaces, partitions as σ-algebras,
//! filtrations, process tables, stopping times, and the conditional-expectation
//! calculus built on them (Doob decomposition, predictable brackets, dual
//! projections, stopped σ-algebras).
//!
//! All arithmetic is over arbitrary-precision rationals.

mod filtration;
mod ops;
mod partition;
mod process;
mod space;

pub use filtration::{Filtration, StoppingTime};
pub use ops::{
    cond_exp, doob_decomposition, dual_projections, is_martingale,
    martingale_defect, predictable_bracket, sigma_at, stochastic_integral, SigmaKind,
};
pub(crate) use ops::{sigma_at_unchecked, StageBlocks};
pub use partition::{generate_partition, Generator, Partition};
pub use process::ProcessTable;
pub use space::FiniteSpace;

use num::{BigInt, One, Signed, Zero};

/// Exact rational scalar used throughout the engine.
pub type Rational = num::BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as an exact rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{}{}", whole_digits, frac);
        let numer: BigInt = digits.parse().ok()?;
        let denom = BigInt::from(10).pow(frac.len() as u32);
        let value = Rational::new(numer, denom);
        return Some(if negative { -value } else { value });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Nearest `f64` (used only for reporting and the Monte Carlo bridge).
pub fn to_f64(x: &Rational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-2"), Some(int(-2)));
        assert_eq!(parse_rational("0.125"), Some(rat(1, 8)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn formats_round_trip() {
        for x in [rat(3, 4), int(7), rat(-5, 12), int(0)] {
            assert_eq!(parse_rational(&format_rational(&x)), Some(x));
        }
    }
}
