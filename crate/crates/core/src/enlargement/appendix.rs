use num::{One, Zero};

use super::stopped::{check_on_space, fragment_filtration_unchecked, fragment_process_unchecked, g_star_unchecked};
use super::EnlargedSpace;
use crate::error::Result;
use crate::finite_prob::{
    cond_exp, martingale_defect, sigma_at_unchecked, Filtration, Partition, ProcessTable, Rational, SigmaKind,
    StoppingTime,
};

/// Evidence that an identity failed: the atoms involved and what went wrong.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub atoms: Vec<usize>,
    pub detail: String,
}

/// Outcome of one identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AppendixReport {
    pub checks: Vec<IdentityCheck>,
}

impl AppendixReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, witness: Option<Witness>) {
        self.checks.push(IdentityCheck { name, passed: witness.is_none(), witness });
    }
}

/// Deliberate corruptions used to confirm the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppendixMutation {
    /// Builds `G*_T` on `{S < T}` without `σ(τ)` in its middle piece.
    DropTauInMiddlePiece,
    /// Uses the lifted base information `F̂_{S∨k}` instead of `G_{S∨k}` on
    /// the unsettled piece of the fragment filtration.
    BaseInformationInFragment,
}

pub const STAR_BETWEEN_BEFORE_AND_AT: &str = "g-star-between-before-and-at";
pub const BEFORE_SPLIT_AT_OR_BEFORE_DEFAULT: &str = "g-before-split-at-or-before-default";
pub const BEFORE_SPLIT_STRICTLY_BEFORE_DEFAULT: &str = "g-before-split-strictly-before-default";
pub const STAR_OF_MAXIMUM: &str = "g-star-of-maximum";
pub const FRAGMENT_IS_FILTRATION: &str = "fragment-is-filtration";
pub const FRAGMENT_STOPPED_SIGMA: &str = "fragment-stopped-sigma";
pub const FRAGMENT_START_AND_END: &str = "fragment-start-and-end";
pub const FRAGMENT_ADAPTED_TRANSFER: &str = "fragment-adapted-transfer";
pub const FRAGMENT_PREDICTABLE_TRANSFER: &str = "fragment-predictable-transfer";
pub const FRAGMENT_MARTINGALE_TRANSFER: &str = "fragment-martingale-transfer";

/// Checks the stopped-σ-algebra identities and the fragment-filtration
/// transfer properties for the pair `(S, T)` as exact partition equalities.
pub fn check_appendix_identities(space: &EnlargedSpace, s: &StoppingTime, t: &StoppingTime) -> Result<AppendixReport> {
    check_appendix_identities_with(space, s, t, None)
}

pub fn check_appendix_identities_with(
    space: &EnlargedSpace,
    s: &StoppingTime,
    t: &StoppingTime,
    mutation: Option<AppendixMutation>,
) -> Result<AppendixReport> {
    check_on_space(space, s)?;
    check_on_space(space, t)?;
    s.check_stopping(space.g())?;
    t.check_stopping(space.g())?;
    let mut report = AppendixReport::default();
    let (sv, tv) = (s.values(), t.values());
    let t_prime = s.max(t);

    report.push(STAR_BETWEEN_BEFORE_AND_AT, [sv, tv, t_prime.values()].iter().find_map(|r| star_between(space, r)));
    report.push(BEFORE_SPLIT_AT_OR_BEFORE_DEFAULT, [sv, tv].iter().find_map(|r| before_split(space, r, true)));
    report.push(BEFORE_SPLIT_STRICTLY_BEFORE_DEFAULT, [sv, tv].iter().find_map(|r| before_split(space, r, false)));
    report.push(STAR_OF_MAXIMUM, star_of_maximum(space, sv, tv, mutation));

    let frag = match mutation {
        Some(AppendixMutation::BaseInformationInFragment) => base_fragment(space, sv, tv),
        _ => fragment_filtration_unchecked(space, sv, tv, false),
    };
    let frag = match frag {
        Ok(f) => {
            report.push(FRAGMENT_IS_FILTRATION, None);
            f
        }
        Err(e) => {
            report.push(FRAGMENT_IS_FILTRATION, Some(Witness { atoms: vec![], detail: e.to_string() }));
            return Ok(report);
        }
    };
    let star = g_star_unchecked(space, t_prime.values(), true);
    report.push(FRAGMENT_STOPPED_SIGMA, fragment_stopped_sigma(space, &frag, sv, t_prime.values(), &star));
    report.push(FRAGMENT_START_AND_END, fragment_start_and_end(&frag, sv, t_prime.values(), &star));
    report.push(FRAGMENT_ADAPTED_TRANSFER, adapted_transfer(space, &frag, sv, t_prime.values()));
    report.push(FRAGMENT_PREDICTABLE_TRANSFER, predictable_transfer(space, &frag, sv, t_prime.values()));
    report.push(FRAGMENT_MARTINGALE_TRANSFER, martingale_transfer(space, &frag, sv, t_prime.values(), &star)?);
    Ok(report)
}

fn pair_witness(pair: Option<(usize, usize)>, detail: impl FnOnce() -> String) -> Option<Witness> {
    pair.map(|(a, b)| Witness { atoms: vec![a, b], detail: detail() })
}

fn star_between(space: &EnlargedSpace, r: &[usize]) -> Option<Witness> {
    let star = g_star_unchecked(space, r, true);
    let before = sigma_at_unchecked(r, space.g(), SigmaKind::Before);
    let at = sigma_at_unchecked(r, space.g(), SigmaKind::At);
    let everywhere = vec![true; space.atoms()];
    if !star.refines(&before) {
        return pair_witness(before.join(&star).trace_difference(&star, &everywhere), || {
            "G*_T does not contain G_{T-}".into()
        });
    }
    if !at.refines(&star) {
        return pair_witness(star.join(&at).trace_difference(&at, &everywhere), || "G*_T is not inside G_T".into());
    }
    None
}

/// The two three-piece decompositions of `G_{T−}`. The `{T ≤ τ}` form is
/// compared off `{T = 0}` (where `G_{0−}` is read as `G_0`); the `{T < τ}` form
/// is compared off `{0 < T = τ}` (where the grid puts mass on `τ = T`).
fn before_split(space: &EnlargedSpace, r: &[usize], at_or_before: bool) -> Option<Witness> {
    let g_before = sigma_at_unchecked(r, space.g(), SigmaKind::Before);
    let f_before = sigma_at_unchecked(r, space.lifted(), SigmaKind::Before);
    let terminal = space.terminal();
    let tau = space.tau().values();
    let split = Partition::from_keys((0..space.atoms()).map(|i| {
        let alive = if at_or_before { r[i] <= tau[i] } else { r[i] < tau[i] };
        let piece = if r[i] == terminal {
            2
        } else if alive {
            0
        } else {
            1
        };
        (piece, if piece == 0 { None } else { Some(tau[i]) }, f_before.block_of(i))
    }));
    let on: Vec<bool> = (0..space.atoms())
        .map(|i| if at_or_before { r[i] > 0 } else { r[i] == 0 || r[i] != tau[i] })
        .collect();
    pair_witness(g_before.trace_difference(&split, &on), || "decomposition of G_{T-} differs".into())
}

fn star_of_maximum(space: &EnlargedSpace, s: &[usize], t: &[usize], mutation: Option<AppendixMutation>) -> Option<Witness> {
    let max: Vec<usize> = s.iter().zip(t).map(|(&a, &b)| a.max(b)).collect();
    let lhs = g_star_unchecked(space, &max, true);
    let keep_tau = mutation != Some(AppendixMutation::DropTauInMiddlePiece);
    let star_t = g_star_unchecked(space, t, keep_tau);
    let star_s = g_star_unchecked(space, s, true);
    let rhs = Partition::from_keys(
        (0..space.atoms()).map(|i| if s[i] < t[i] { (0, star_t.block_of(i)) } else { (1, star_s.block_of(i)) }),
    );
    pair_witness(lhs.trace_difference(&rhs, &vec![true; space.atoms()]), || {
        "G*_{S∨T} differs from the split of G*_T and G*_S".into()
    })
}

fn base_fragment(space: &EnlargedSpace, s: &[usize], t: &[usize]) -> Result<Filtration> {
    let t_prime: Vec<usize> = s.iter().zip(t).map(|(&a, &b)| a.max(b)).collect();
    let star = g_star_unchecked(space, &t_prime, true);
    let stages = (0..space.columns())
        .map(|k| {
            let r: Vec<usize> = s.iter().map(|&v| v.max(k)).collect();
            let f_r = sigma_at_unchecked(&r, space.lifted(), SigmaKind::At);
            Partition::from_keys((0..space.atoms()).map(|i| {
                if t_prime[i] <= r[i] {
                    (0, star.block_of(i))
                } else {
                    (1, f_r.block_of(i))
                }
            }))
        })
        .collect();
    Filtration::new(space.g().grid().to_vec(), stages)
}

/// `G^(S,T]_R = {R = T'} ∩ G*_{T'} + {R < T'} ∩ G_R` for `R = S`, `T'` and
/// every `(S∨k) ∧ T'`.
fn fragment_stopped_sigma(
    space: &EnlargedSpace,
    frag: &Filtration,
    s: &[usize],
    t_prime: &[usize],
    star: &Partition,
) -> Option<Witness> {
    let mut candidates: Vec<Vec<usize>> = vec![s.to_vec(), t_prime.to_vec()];
    candidates.extend((0..space.columns()).map(|k| s.iter().zip(t_prime).map(|(&a, &b)| a.max(k).min(b)).collect()));
    let everywhere = vec![true; space.atoms()];
    for r in candidates {
        let time = StoppingTime::random(r.clone(), space.terminal()).expect("bounded by terminal");
        if let Err(e) = time.check_stopping(frag) {
            return Some(Witness { atoms: vec![], detail: format!("R is not a fragment stopping time: {e}") });
        }
        let lhs = sigma_at_unchecked(&r, frag, SigmaKind::At);
        let g_r = sigma_at_unchecked(&r, space.g(), SigmaKind::At);
        let rhs = Partition::from_keys(
            (0..space.atoms()).map(|i| if r[i] == t_prime[i] { (0, star.block_of(i)) } else { (1, g_r.block_of(i)) }),
        );
        if let Some(w) =
            pair_witness(lhs.trace_difference(&rhs, &everywhere), || "stopped fragment σ-algebra differs".into())
        {
            return Some(w);
        }
    }
    None
}

fn fragment_start_and_end(frag: &Filtration, s: &[usize], t_prime: &[usize], star: &Partition) -> Option<Witness> {
    let everywhere = vec![true; s.len()];
    let at_s = sigma_at_unchecked(s, frag, SigmaKind::At);
    if let Some(w) = pair_witness(at_s.trace_difference(frag.stage(0), &everywhere), || {
        "fragment σ-algebra at S differs from its initial stage".into()
    }) {
        return Some(w);
    }
    let at_t = sigma_at_unchecked(t_prime, frag, SigmaKind::At);
    pair_witness(at_t.trace_difference(star, &everywhere), || "fragment σ-algebra at T differs from G*_T".into())
}

fn indicator(block: &[usize], len: usize) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); len];
    for &a in block {
        x[a] = Rational::one();
    }
    x
}

/// A fragment-adapted step process, stopped into the window, is `G`-adapted.
fn adapted_transfer(space: &EnlargedSpace, frag: &Filtration, s: &[usize], t_prime: &[usize]) -> Option<Witness> {
    let (columns, atoms) = (space.columns(), space.atoms());
    for k in 0..columns {
        for block in frag.stage(k).blocks() {
            let step = indicator(&block, atoms);
            let x = ProcessTable::from_fn(columns, atoms, |j, i| if j >= k { step[i].clone() } else { Rational::zero() });
            let y = fragment_process_unchecked(&x, s, t_prime);
            if let Some(column) = y.first_non_adapted(space.g()) {
                return Some(Witness {
                    atoms: block,
                    detail: format!("stopped fragment-adapted step from stage {k} not G-adapted at column {column}"),
                });
            }
        }
    }
    None
}

/// `1_{(S,T']} K` is predictable for the other filtration, for indicator
/// generators `K_j = 1_B 1_{j=k}` with `B` a stage-`(k−1)` block.
fn predictable_transfer(space: &EnlargedSpace, frag: &Filtration, s: &[usize], t_prime: &[usize]) -> Option<Witness> {
    let (columns, atoms) = (space.columns(), space.atoms());
    let in_window = |j: usize, i: usize| s[i] < j && j <= t_prime[i];
    for (from, to, direction) in [(space.g(), frag, "G to fragment"), (frag, space.g(), "fragment to G")] {
        for k in 1..columns {
            for block in from.stage(k - 1).blocks() {
                let b = indicator(&block, atoms);
                let column: Vec<Rational> =
                    (0..atoms).map(|i| if in_window(k, i) { b[i].clone() } else { Rational::zero() }).collect();
                if let Some(atom) = to.stage(k - 1).first_non_constant(&column) {
                    return Some(Witness {
                        atoms: vec![atom],
                        detail: format!("windowed predictable generator at step {k} fails {direction}"),
                    });
                }
            }
        }
    }
    None
}

fn conditional_martingale(x: &[Rational], f: &Filtration, w: &[Rational]) -> Result<ProcessTable> {
    let columns = (0..f.columns()).map(|k| cond_exp(x, f.stage(k), w)).collect::<Result<Vec<_>>>()?;
    ProcessTable::new(columns)
}

/// Martingales closed by indicators of `G*_{T'}` blocks, stopped into the
/// window, are martingales for the other filtration (both directions).
fn martingale_transfer(
    space: &EnlargedSpace,
    frag: &Filtration,
    s: &[usize],
    t_prime: &[usize],
    star: &Partition,
) -> Result<Option<Witness>> {
    let w = space.weights();
    for (from, to, direction) in [(space.g(), frag, "G to fragment"), (frag, space.g(), "fragment to G")] {
        for block in star.blocks() {
            let zeta = indicator(&block, space.atoms());
            let x = conditional_martingale(&zeta, from, w)?;
            let y = fragment_process_unchecked(&x, s, t_prime);
            let failure = match martingale_defect(&y, to, w) {
                Ok(None) => None,
                Ok(Some(step)) => Some(format!("martingale property fails at step {step} ({direction})")),
                Err(e) => Some(format!("{e} ({direction})")),
            };
            if let Some(detail) = failure {
                return Ok(Some(Witness { atoms: block, detail }));
            }
        }
    }
    Ok(None)
}

/// `{0<τ<∞} ∩ G_τ = {0<τ<∞} ∩ G_{τ−}` as an equality of partition traces.
pub fn gtau_equality(space: &EnlargedSpace) -> bool {
    gtau_witness(space).is_none()
}

/// A pair of atoms in `{0<τ<∞}` that `G_τ` separates and `G_{τ−}` does not.
pub fn gtau_witness(space: &EnlargedSpace) -> Option<(usize, usize)> {
    let tau = space.tau().values();
    let at = sigma_at_unchecked(tau, space.g(), SigmaKind::At);
    let before = sigma_at_unchecked(tau, space.g(), SigmaKind::Before);
    before.trace_difference(&at, &space.finite_positive_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enlargement::{build_product_space, random_stopping_time, DefaultKernel};
    use crate::finite_prob::{int, rat, FiniteSpace};
    use rand::SeedableRng;

    fn binary_filtration(n: usize) -> (FiniteSpace, Filtration) {
        let atoms = 1usize << n;
        let base = FiniteSpace::uniform(atoms).unwrap();
        let mut stages: Vec<Partition> =
            (0..=n).map(|k| Partition::from_keys((0..atoms).map(|a| a >> (n - k)))).collect();
        stages.push(Partition::discrete(atoms));
        (base, Filtration::new(Filtration::integer_grid(n), stages).unwrap())
    }

    fn dependent_model() -> EnlargedSpace {
        let (base, f) = binary_filtration(2);
        let rows = vec![
            vec![rat(1, 8), rat(1, 8), rat(1, 4), rat(1, 2)],
            vec![int(0), rat(1, 2), rat(1, 4), rat(1, 4)],
            vec![rat(1, 4), int(0), rat(1, 2), rat(1, 4)],
            vec![int(0), rat(1, 3), rat(1, 3), rat(1, 3)],
        ];
        build_product_space(base, f, DefaultKernel::new(rows).unwrap()).unwrap()
    }

    #[test]
    fn trivial_window_passes() {
        let space = dependent_model();
        let s = StoppingTime::constant(0, space.g());
        let t = StoppingTime::infinite(space.g());
        let report = check_appendix_identities(&space, &s, &t).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn random_windows_pass() {
        let space = dependent_model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let a = random_stopping_time(space.g(), &mut rng, 0.35);
            let b = random_stopping_time(space.g(), &mut rng, 0.35);
            let (s, t) = (a.min(&b), a.max(&b));
            let report = check_appendix_identities(&space, &s, &t).unwrap();
            assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn dropping_tau_breaks_star_split() {
        let space = dependent_model();
        let s = StoppingTime::constant(0, space.g());
        let t = StoppingTime::constant(2, space.g());
        let report =
            check_appendix_identities_with(&space, &s, &t, Some(AppendixMutation::DropTauInMiddlePiece)).unwrap();
        let check = report.get(STAR_OF_MAXIMUM).unwrap();
        assert!(!check.passed);
        let pair = &check.witness.as_ref().unwrap().atoms;
        assert_eq!(space.origin()[pair[0]], space.origin()[pair[1]]);
    }

    #[test]
    fn base_information_breaks_martingale_transfer() {
        let space = dependent_model();
        let s = StoppingTime::constant(0, space.g());
        let t = StoppingTime::infinite(space.g());
        let report =
            check_appendix_identities_with(&space, &s, &t, Some(AppendixMutation::BaseInformationInFragment)).unwrap();
        assert!(!report.all_passed());
    }

    #[test]
    fn gtau_on_simple_models() {
        let space = dependent_model();
        let _ = gtau_equality(&space);
        let one = FiniteSpace::uniform(1).unwrap();
        let f = Filtration::constant(Filtration::integer_grid(2), Partition::trivial(1)).unwrap();
        let uniform = DefaultKernel::new(vec![vec![int(0), rat(1, 2), rat(1, 2), int(0)]]).unwrap();
        assert!(gtau_equality(&build_product_space(one, f, uniform).unwrap()));

        // τ ≡ 1 while a fair coin is revealed at time 1.
        let (base, f) = binary_filtration(1);
        let point = DefaultKernel::point_mass(&[1, 1], 3).unwrap();
        let space = build_product_space(base, f, point).unwrap();
        assert!(!gtau_equality(&space));
        assert!(gtau_witness(&space).is_some());
    }
}
