mod common;

use num::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

use common::*;
use enlargement::calculus::{
    drift_before_formula, drift_exact, first_drift_mismatch, girsanov_transform, stochastic_exponential, DriftRegion,
};
use enlargement::enlargement::{fragment_filtration, g_at, g_before, g_star, random_stopping_time};
use enlargement::finite_prob::{
    cond_exp, doob_decomposition, dual_projections, is_martingale, predictable_bracket, rat, ProcessTable, Rational,
};
use enlargement::models::{coordinate_drivers, honest_time_model, honesty_defect, random_honest_times, HonestRule};
use enlargement::representation::{immersion_check, integrand_solver_before, mrp_check, MrpVerdict};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn indicator(event: impl Iterator<Item = bool>) -> Vec<Rational> {
    event.map(|b| if b { Rational::one() } else { Rational::zero() }).collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn tower_property(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let x = random_variable(&mut r, tree.atoms());
        let coarse = r.gen_range(0..f.columns());
        let fine = r.gen_range(coarse..f.columns());
        let inner = cond_exp(&x, f.stage(fine), w).unwrap();
        prop_assert_eq!(cond_exp(&inner, f.stage(coarse), w).unwrap(), cond_exp(&x, f.stage(coarse), w).unwrap());
    }

    #[test]
    fn doob_decomposition_is_unique(seed in any::<u64>(), steps in 1usize..=4, branches in 2usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let x = random_adapted(&mut r, f, w);
        let (m, a) = doob_decomposition(&x, f, w).unwrap();
        prop_assert_eq!(m.sub(&a).unwrap(), x.clone());
        prop_assert!(is_martingale(&m, f, w).unwrap());
        prop_assert!(a.is_predictable(f));
        prop_assert!(a.column(0).iter().all(Zero::is_zero));
        // Any other predictable compensator leaves a drift behind.
        let p = random_predictable(&mut r, f);
        let perturbed = ProcessTable::from_increments((0..f.columns()).map(|k| p.column(k).to_vec()).collect()).unwrap();
        if !perturbed.is_zero() {
            prop_assert!(!is_martingale(&m.add(&perturbed).unwrap(), f, w).unwrap());
        }
    }

    #[test]
    fn dual_projection_difference_is_a_martingale(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (_, space) = random_model(&mut r, steps, branches);
        let (a, ah) = dual_projections(space.tau().values(), space.lifted(), space.weights()).unwrap();
        prop_assert!(is_martingale(&ah.sub(&a).unwrap(), space.lifted(), space.weights()).unwrap());
    }

    #[test]
    fn bracket_polarization(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let u = random_adapted(&mut r, f, w);
        let v = random_adapted(&mut r, f, w);
        let plus = u.add(&v).unwrap();
        let minus = u.sub(&v).unwrap();
        let polar = predictable_bracket(&plus, &plus, f, w)
            .unwrap()
            .sub(&predictable_bracket(&minus, &minus, f, w).unwrap())
            .unwrap()
            .scale(&rat(1, 4));
        prop_assert_eq!(predictable_bracket(&u, &v, f, w).unwrap(), polar);
    }

    #[test]
    fn stopped_sigma_algebras_are_nested(seed in any::<u64>(), steps in 1usize..=3, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (_, space) = random_model(&mut r, steps, branches);
        let t = random_stopping_time(space.g(), &mut r, 0.35);
        let (before, star, at) =
            (g_before(&space, &t).unwrap(), g_star(&space, &t).unwrap(), g_at(&space, &t).unwrap());
        prop_assert!(star.refines(&before));
        prop_assert!(at.refines(&star));
    }

    #[test]
    fn fragment_filtration_is_a_filtration(seed in any::<u64>(), steps in 1usize..=3, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (_, space) = random_model(&mut r, steps, branches);
        let a = random_stopping_time(space.g(), &mut r, 0.35);
        let b = random_stopping_time(space.g(), &mut r, 0.35);
        let f = fragment_filtration(&space, &a.min(&b), &a.max(&b)).unwrap();
        for k in 1..f.columns() {
            prop_assert!(f.stage(k).refines(f.stage(k - 1)));
        }
    }

    #[test]
    fn product_space_restricts_to_the_base(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (tree, space) = random_model(&mut r, steps, branches);
        let mut marginal = vec![Rational::zero(); tree.atoms()];
        for (i, w) in space.weights().iter().enumerate() {
            marginal[space.origin()[i]] += w;
        }
        prop_assert_eq!(marginal.as_slice(), tree.space.weights());
    }

    #[test]
    fn cox_models_project_and_are_immersed(seed in any::<u64>(), steps in 1usize..=3, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (_, space, survival) = random_cox(&mut r, steps, branches);
        let lifted = space.lift_process(&survival);
        for k in 0..=space.horizon() {
            let alive = indicator(space.tau().values().iter().map(|&t| t > k));
            let projected = cond_exp(&alive, space.lifted().stage(k), space.weights()).unwrap();
            prop_assert_eq!(projected.as_slice(), lifted.column(k));
        }
        prop_assert!(immersion_check(&space).unwrap());
    }

    #[test]
    fn honest_models_are_honest(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let times = random_honest_times(&tree.filtration, &mut r, 0.5);
        let space = honest_time_model(&tree.space, &tree.filtration, &HonestRule::Custom(times)).unwrap();
        prop_assert_eq!(honesty_defect(space.tau().values(), space.lifted()), None);
    }

    #[test]
    fn drift_before_default_is_exact(seed in any::<u64>(), steps in 1usize..=3, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (_, space) = random_model(&mut r, steps, branches);
        for x in space.f_martingale_basis().unwrap() {
            let exact = drift_exact(&x, &space).unwrap();
            let formula = drift_before_formula(&x, &space).unwrap();
            prop_assert_eq!(first_drift_mismatch(&formula, &exact.drift, &space, DriftRegion::BeforeDefault), None);
            prop_assert!(exact.drift.is_predictable(space.g()));
            prop_assert!(is_martingale(&exact.martingale_part, space.g(), space.weights()).unwrap());
        }
    }

    #[test]
    fn girsanov_transform_is_a_martingale(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let eta = random_density(&mut r, f, w);
        let q: Vec<Rational> = eta.last().iter().zip(w).map(|(a, b)| a * b).collect();
        for x in coordinate_drivers(&tree.space, f).into_iter().chain([random_martingale(&mut r, f, w)]) {
            let moved = girsanov_transform(&x, &eta, f, w).unwrap();
            prop_assert!(is_martingale(&moved, f, &q).unwrap());
        }
    }

    #[test]
    fn stochastic_exponential_is_a_martingale(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=3) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let y = random_martingale(&mut r, f, w);
        let j = random_predictable(&mut r, f);
        let e = stochastic_exponential(&j, &y, f).unwrap();
        prop_assert!(is_martingale(&e.eta, f, w).unwrap());
    }

    #[test]
    fn coordinate_drivers_are_strongly_orthogonal(seed in any::<u64>(), steps in 1usize..=4, branches in 1usize..=4) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let d = coordinate_drivers(&tree.space, f);
        for i in 0..d.len() {
            prop_assert!(is_martingale(&d[i], f, w).unwrap());
            for j in 0..i {
                prop_assert!(predictable_bracket(&d[i], &d[j], f, w).unwrap().is_zero());
            }
        }
        prop_assert_eq!(mrp_check(w, f, &d).unwrap().verdict, MrpVerdict::Spanning);
    }

    #[test]
    fn mrp_verdict_survives_measure_change(seed in any::<u64>(), steps in 1usize..=3, branches in 2usize..=4) {
        let mut r = rng(seed);
        let tree = random_tree(&mut r, steps, branches);
        let (f, w) = (&tree.filtration, tree.space.weights());
        let mut drivers = coordinate_drivers(&tree.space, f);
        if r.gen_bool(0.5) {
            drivers.pop();
        }
        let eta = random_density(&mut r, f, w);
        let q: Vec<Rational> = eta.last().iter().zip(w).map(|(a, b)| a * b).collect();
        let moved: Vec<ProcessTable> = drivers.iter().map(|x| girsanov_transform(x, &eta, f, w).unwrap()).collect();
        let before = mrp_check(w, f, &drivers).unwrap();
        let after = mrp_check(&q, f, &moved).unwrap();
        prop_assert_eq!(before.verdict, after.verdict);
        if let Some(witness) = before.witness {
            let m = &witness.martingale;
            prop_assert!(!m.is_zero());
            prop_assert!(m.column(0).iter().all(Zero::is_zero));
            prop_assert!(is_martingale(m, f, w).unwrap());
            for x in &drivers {
                prop_assert!(is_martingale(&m.mul(x).unwrap(), f, w).unwrap());
            }
        }
    }

    #[test]
    fn residual_jump_is_invisible_before_default(seed in any::<u64>(), steps in 1usize..=3, branches in 1usize..=3) {
        let mut r = rng(seed);
        let (tree, space) = random_model(&mut r, steps, branches);
        let drivers = lifted_drivers(&tree, &space);
        let tau = space.tau();
        let partition = g_at(&space, tau).unwrap();
        let block = r.gen_range(0..partition.block_count());
        let zeta = indicator((0..space.atoms()).map(|i| partition.block_of(i) == block));
        let triple = integrand_solver_before(&space, &zeta, &drivers).unwrap();
        prop_assert_eq!(triple.reconstruct(&space), triple.y.clone());
        let terminal = space.terminal();
        let masked: Vec<Rational> = (0..space.atoms())
            .map(|i| if tau.value(i) > 0 && tau.value(i) < terminal { triple.xi[i].clone() } else { Rational::zero() })
            .collect();
        let before = g_before(&space, tau).unwrap();
        prop_assert!(cond_exp(&masked, &before, space.weights()).unwrap().iter().all(Zero::is_zero));
    }
}
