use rand::Rng;

use super::EnlargedSpace;
use crate::error::{Error, Result};
use crate::finite_prob::{sigma_at_unchecked, Filtration, Partition, ProcessTable, Rational, SigmaKind, StoppingTime};

/// Which of the three pieces of `G*_T` an atom falls in.
fn g_star_piece(t: usize, tau: usize, terminal: usize) -> u8 {
    if t == terminal {
        2
    } else if t < tau {
        0
    } else {
        1
    }
}

/// `G*_T`: `F̂_T` on `{T < τ}`, `σ(τ) ∨ F̂_T` on `{τ ≤ T < ∞}` and
/// `σ(τ) ∨ F̂_∞` on `{T = ∞}`.
pub fn g_star(space: &EnlargedSpace, t: &StoppingTime) -> Result<Partition> {
    check_on_space(space, t)?;
    t.check_stopping(space.g())?;
    Ok(g_star_unchecked(space, t.values(), true))
}

/// [`g_star`] without the stopping-time check; `with_tau_in_middle = false`
/// drops `σ(τ)` from the middle piece.
pub(crate) fn g_star_unchecked(space: &EnlargedSpace, t: &[usize], with_tau_in_middle: bool) -> Partition {
    let f_t = sigma_at_unchecked(t, space.lifted(), SigmaKind::At);
    let terminal = space.terminal();
    let tau = space.tau().values();
    Partition::from_keys((0..space.atoms()).map(|i| {
        let piece = g_star_piece(t[i], tau[i], terminal);
        let known_tau = match piece {
            0 => None,
            1 if !with_tau_in_middle => None,
            _ => Some(tau[i]),
        };
        (piece, known_tau, f_t.block_of(i))
    }))
}

/// `G_{T−}` of the enlarged filtration.
pub fn g_before(space: &EnlargedSpace, t: &StoppingTime) -> Result<Partition> {
    check_on_space(space, t)?;
    t.check_stopping(space.g())?;
    Ok(sigma_at_unchecked(t.values(), space.g(), SigmaKind::Before))
}

/// `G_T` of the enlarged filtration.
pub fn g_at(space: &EnlargedSpace, t: &StoppingTime) -> Result<Partition> {
    check_on_space(space, t)?;
    t.check_stopping(space.g())?;
    Ok(sigma_at_unchecked(t.values(), space.g(), SigmaKind::At))
}

pub(crate) fn check_on_space(space: &EnlargedSpace, t: &StoppingTime) -> Result<()> {
    if t.len() != space.atoms() || t.terminal() != space.terminal() {
        return Err(Error::Dimension(format!(
            "time on {} atoms with terminal {} used on a space of {} atoms with terminal {}",
            t.len(),
            t.terminal(),
            space.atoms(),
            space.terminal()
        )));
    }
    Ok(())
}

/// The fragment filtration `G^(S,T]`: stage `k` is `G*_{T'}` on
/// `{T' ≤ S∨k}` and `G_{S∨k}` on `{S∨k < T'}`, with `T' = S ∨ T`.
pub fn fragment_filtration(space: &EnlargedSpace, s: &StoppingTime, t: &StoppingTime) -> Result<Filtration> {
    check_on_space(space, s)?;
    check_on_space(space, t)?;
    s.check_stopping(space.g())?;
    t.check_stopping(space.g())?;
    fragment_filtration_unchecked(space, s.values(), t.values(), false)
}

/// `flip_comparison` swaps `T' ≤ S∨k` for `T' < S∨k` (a deliberate corruption).
pub(crate) fn fragment_filtration_unchecked(
    space: &EnlargedSpace,
    s: &[usize],
    t: &[usize],
    flip_comparison: bool,
) -> Result<Filtration> {
    let t_prime: Vec<usize> = s.iter().zip(t).map(|(&a, &b)| a.max(b)).collect();
    let star = g_star_unchecked(space, &t_prime, true);
    let stages = (0..space.columns())
        .map(|k| {
            let r: Vec<usize> = s.iter().map(|&v| v.max(k)).collect();
            let g_r = sigma_at_unchecked(&r, space.g(), SigmaKind::At);
            Partition::from_keys((0..space.atoms()).map(|i| {
                let settled = if flip_comparison { t_prime[i] < r[i] } else { t_prime[i] <= r[i] };
                if settled {
                    (0, star.block_of(i))
                } else {
                    (1, g_r.block_of(i))
                }
            }))
        })
        .collect();
    Filtration::new(space.g().grid().to_vec(), stages)
}

/// `X^(S,T]_k = X_{(S∨k)∧T'} − X_S` with `T' = S ∨ T`.
pub fn fragment_process(x: &ProcessTable, s: &StoppingTime, t: &StoppingTime) -> Result<ProcessTable> {
    if x.atoms() != s.len() || x.atoms() != t.len() || x.columns() != s.terminal() + 1 {
        return Err(Error::Dimension("process and stopping times differ in shape".into()));
    }
    Ok(fragment_process_unchecked(x, s.values(), t.values()))
}

pub(crate) fn fragment_process_unchecked(x: &ProcessTable, s: &[usize], t: &[usize]) -> ProcessTable {
    x.map(|k, i, _| {
        let upper = s[i].max(t[i]);
        let at: &Rational = x.at(s[i].max(k).min(upper), i);
        at - x.at(s[i], i)
    })
}

/// Random stopping time of `filtration`: walking forward, each block not yet
/// stopped is stopped at stage `k` with probability `stop_probability`.
pub fn random_stopping_time<R: Rng>(filtration: &Filtration, rng: &mut R, stop_probability: f64) -> StoppingTime {
    let terminal = filtration.terminal();
    let mut values = vec![terminal; filtration.atoms()];
    for k in 0..terminal {
        let stage = filtration.stage(k);
        let mut decision: Vec<Option<bool>> = vec![None; stage.block_count()];
        for atom in 0..filtration.atoms() {
            if values[atom] != terminal {
                continue;
            }
            let b = stage.block_of(atom);
            let stop = *decision[b].get_or_insert_with(|| rng.gen_bool(stop_probability));
            if stop {
                values[atom] = k;
            }
        }
    }
    StoppingTime::random(values, terminal).expect("values bounded by terminal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enlargement::{build_product_space, DefaultKernel};
    use crate::finite_prob::{int, rat, FiniteSpace};
    use rand::SeedableRng;

    /// Two-step binary base with the default time uniform on `{1, 2, ∞}`
    /// independently of the base.
    fn independent_model() -> EnlargedSpace {
        let base = FiniteSpace::uniform(4).unwrap();
        let s1 = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        let f = Filtration::new(
            Filtration::integer_grid(2),
            vec![Partition::trivial(4), s1, Partition::discrete(4), Partition::discrete(4)],
        )
        .unwrap();
        let row = vec![int(0), rat(1, 3), rat(1, 3), rat(1, 3)];
        build_product_space(base, f, DefaultKernel::new(vec![row; 4]).unwrap()).unwrap()
    }

    #[test]
    fn g_star_at_infinity_is_tau_and_terminal_base() {
        let space = independent_model();
        let inf = StoppingTime::infinite(space.g());
        let star = g_star(&space, &inf).unwrap();
        let expected = space.lifted().stage(space.terminal()).join(&Partition::from_keys(space.tau().values()));
        assert_eq!(star, expected);
    }

    #[test]
    fn g_star_before_default_is_base_information() {
        let space = independent_model();
        let zero = StoppingTime::constant(0, space.g());
        // τ ≥ 1 everywhere, so T ≡ 0 lies strictly before the default.
        assert_eq!(g_star(&space, &zero).unwrap(), *space.lifted().stage(0));
    }

    #[test]
    fn g_star_sits_between_before_and_at() {
        let space = independent_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = random_stopping_time(space.g(), &mut rng, 0.4);
            let star = g_star(&space, &t).unwrap();
            assert!(star.refines(&g_before(&space, &t).unwrap()));
            assert!(g_at(&space, &t).unwrap().refines(&star));
        }
    }

    #[test]
    fn fragment_after_default_is_shifted_enlargement() {
        let space = independent_model();
        let tau = space.tau().clone();
        let inf = StoppingTime::infinite(space.g());
        let frag = fragment_filtration(&space, &tau, &inf).unwrap();
        for k in 0..space.columns() {
            let shifted = tau.max_const(k);
            assert_eq!(frag.stage(k), &g_at(&space, &shifted).unwrap());
        }
    }

    #[test]
    fn equal_times_give_constant_fragment() {
        let space = independent_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = random_stopping_time(space.g(), &mut rng, 0.5);
        let frag = fragment_filtration(&space, &t, &t).unwrap();
        let star = g_star(&space, &t).unwrap();
        assert!(frag.stages().iter().all(|s| *s == star));
    }

    #[test]
    fn fragment_process_freezes_outside_window() {
        let x = ProcessTable::from_fn(4, 2, |k, i| int((k * 10 + i) as i64));
        let s = StoppingTime::random(vec![1, 0], 3).unwrap();
        let t = StoppingTime::random(vec![2, 3], 3).unwrap();
        let y = fragment_process(&x, &s, &t).unwrap();
        assert_eq!(y.column(0), &[int(0), int(0)]);
        assert_eq!(y.column(3), &[int(10), int(30)]);
    }

    #[test]
    fn random_times_are_stopping_times() {
        let space = independent_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            assert!(random_stopping_time(space.g(), &mut rng, 0.3).is_stopping_time(space.g()));
        }
    }
}
