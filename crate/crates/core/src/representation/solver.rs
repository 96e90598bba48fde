use num::{Signed, Zero};

use super::mrp::{mrp_check, solve_integrands, MrpCertificate};
use crate::calculus::{azema_z, default_martingale_l, drift_exact, sh_measure_check, MeasureChange};
use crate::enlargement::{fragment_filtration, fragment_process, g_at, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, doob_decomposition, dual_projections, ProcessTable, Rational, StoppingTime};
use crate::models::honesty_defect;

/// `E[ζ | G_k] = E[ζ | G_0] + Σ 1_{τ≥j} J_j·ΔW̃_j + Σ K_j ΔL_j + ξ 1_{0<τ≤k}`
/// for a variable `ζ` measurable for `G_τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationTriple {
    /// `E[ζ | G_k]`.
    pub y: ProcessTable,
    /// `X_k = E[ζ 1_{τ>k} | F̂_k] / Z_k`, frozen at `X_{k−1}` where `Z_k = 0`.
    pub x: ProcessTable,
    /// One predictable integrand per driver, used on `(0, τ]`.
    pub j: Vec<ProcessTable>,
    /// Predictable integrand of `L`.
    pub k: ProcessTable,
    /// Residual jump at `τ`, zero off `{0 < τ < ∞}`.
    pub xi: Vec<Rational>,
    /// `W̃ = W − Γ(W)` for each driver.
    pub w_tilde: Vec<ProcessTable>,
    pub l: ProcessTable,
}

impl RepresentationTriple {
    pub fn reconstruct(&self, space: &EnlargedSpace) -> ProcessTable {
        let terminal = space.terminal();
        let mut out = ProcessTable::zeros(space.columns(), space.atoms());
        let dl: Vec<Vec<Rational>> = (0..space.columns()).map(|k| self.l.increment(k)).collect();
        let dw: Vec<Vec<Vec<Rational>>> =
            self.w_tilde.iter().map(|w| (0..space.columns()).map(|k| w.increment(k)).collect()).collect();
        for i in 0..space.atoms() {
            let tau = space.tau().value(i);
            let mut acc = self.y.at(0, i).clone();
            out.set(0, i, acc.clone());
            for step in 1..space.columns() {
                if tau >= step {
                    for (ji, dwi) in self.j.iter().zip(&dw) {
                        acc += ji.at(step, i) * &dwi[step][i];
                    }
                    acc += self.k.at(step, i) * &dl[step][i];
                }
                let jumped = tau > 0 && tau < terminal && tau <= step;
                let value = if jumped { &acc + &self.xi[i] } else { acc.clone() };
                out.set(step, i, value);
            }
        }
        out
    }
}

fn check_measurable(zeta: &[Rational], partition: &crate::finite_prob::Partition, what: &str) -> Result<()> {
    match partition.first_non_constant(zeta) {
        Some(block) => Err(Error::InvalidParameters(format!("claim is not {what}-measurable (block {block})"))),
        None => Ok(()),
    }
}

fn conditional_process(zeta: &[Rational], space: &EnlargedSpace) -> Result<ProcessTable> {
    let columns =
        (0..space.columns()).map(|k| cond_exp(zeta, space.g().stage(k), space.weights())).collect::<Result<_>>()?;
    ProcessTable::new(columns)
}

fn tilde_drivers(space: &EnlargedSpace, drivers: &[ProcessTable]) -> Result<Vec<ProcessTable>> {
    drivers.iter().map(|w| Ok(drift_exact(w, space)?.martingale_part)).collect()
}

/// Solves for `(J, K, ξ)` given `ζ` measurable for `G_τ` and `F̂`-drivers with
/// the representation property in `F̂`.
pub fn integrand_solver_before(
    space: &EnlargedSpace,
    zeta: &[Rational],
    drivers: &[ProcessTable],
) -> Result<RepresentationTriple> {
    if zeta.len() != space.atoms() {
        return Err(Error::Dimension("claim and space differ in atoms".into()));
    }
    check_measurable(zeta, &g_at(space, space.tau())?, "G_τ")?;
    let w = space.weights();
    let lifted = space.lifted();
    let z = azema_z(space)?;
    let (a, _) = dual_projections(space.tau().values(), lifted, w)?;
    let mut x_columns: Vec<Vec<Rational>> = Vec::with_capacity(space.columns());
    for k in 0..space.columns() {
        let alive = space.alive(k);
        let survivors: Vec<Rational> =
            (0..zeta.len()).map(|i| if alive[i] { zeta[i].clone() } else { Rational::zero() }).collect();
        let num = cond_exp(&survivors, lifted.stage(k), w)?;
        let column = (0..zeta.len())
            .map(|i| match (z.at(k, i).is_positive(), k) {
                (true, _) => &num[i] / z.at(k, i),
                (false, 0) => Rational::zero(),
                (false, _) => x_columns[k - 1][i].clone(),
            })
            .collect();
        x_columns.push(column);
    }
    let x = ProcessTable::new(x_columns)?;
    let (m, _) = doob_decomposition(&x, lifted, w)?;
    let j = solve_integrands(&m, w, lifted, drivers, |_, _| true)?;

    let mut k_table = ProcessTable::zeros(space.columns(), space.atoms());
    for step in 1..=space.horizon() {
        let da = a.increment(step);
        let jump: Vec<Rational> = (0..space.atoms())
            .map(|i| if space.tau().value(i) == step { &zeta[i] - x.at(step, i) } else { Rational::zero() })
            .collect();
        let num = cond_exp(&jump, lifted.stage(step - 1), w)?;
        for i in 0..space.atoms() {
            if da[i].is_positive() {
                k_table.set(step, i, &num[i] / &da[i]);
            }
        }
    }
    let xi = (0..space.atoms())
        .map(|i| {
            let tau = space.tau().value(i);
            if tau > 0 && tau < space.terminal() {
                &zeta[i] - x.at(tau, i) - k_table.at(tau, i)
            } else {
                Rational::zero()
            }
        })
        .collect();
    Ok(RepresentationTriple {
        y: conditional_process(zeta, space)?,
        x,
        j,
        k: k_table,
        xi,
        w_tilde: tilde_drivers(space, drivers)?,
        l: default_martingale_l(space)?,
    })
}

/// Full representation of a `G_∞`-measurable claim under an honest time:
/// the before-default triple for `E[ζ | G_τ]` plus integrands `J″` of `W̃`
/// on `(τ, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HonestRepresentation {
    pub before: RepresentationTriple,
    pub j_after: Vec<ProcessTable>,
    pub y: ProcessTable,
}

impl HonestRepresentation {
    pub fn reconstruct(&self, space: &EnlargedSpace) -> ProcessTable {
        let mut out = self.before.reconstruct(space);
        for (ji, w) in self.j_after.iter().zip(&self.before.w_tilde) {
            for i in 0..space.atoms() {
                let tau = space.tau().value(i);
                let mut acc = Rational::zero();
                for step in 1..space.columns() {
                    if tau < step {
                        acc += ji.at(step, i) * (w.at(step, i) - w.at(step - 1, i));
                    }
                    let v = out.at(step, i) + &acc;
                    out.set(step, i, v);
                }
            }
        }
        out
    }
}

pub fn honest_full_representation(
    space: &EnlargedSpace,
    zeta: &[Rational],
    drivers: &[ProcessTable],
) -> Result<HonestRepresentation> {
    if zeta.len() != space.atoms() {
        return Err(Error::Dimension("claim and space differ in atoms".into()));
    }
    if let Some(k) = honesty_defect(space.tau().values(), space.lifted()) {
        return Err(Error::NotHonest(format!("default time is not determined by stage {k} on {{τ ≤ {k}}}")));
    }
    check_measurable(zeta, space.g().stage(space.terminal()), "G_∞")?;
    let y = conditional_process(zeta, space)?;
    let at_default = y.evaluate_at(space.tau().values());
    let before = integrand_solver_before(space, &at_default, drivers)?;
    let tau = space.tau();
    let j_after = solve_integrands(&y, space.weights(), space.g(), &before.w_tilde, |k, i| tau.value(i) < k)?;
    Ok(HonestRepresentation { before, j_after, y })
}

/// The representation property on a fragment: checks that `qp` is an
/// sH-measure on `(S, T]`, moves the start to `S' = (S ∨ τ) ∧ (S ∨ T)` and runs
/// the rank test for `W^(S',T]` under `(qp, G^(S',T])`.
pub fn fragment_mrp_check(
    space: &EnlargedSpace,
    qp: &MeasureChange,
    s: &StoppingTime,
    t: &StoppingTime,
    drivers: &[ProcessTable],
) -> Result<MrpCertificate> {
    let sh = sh_measure_check(space, qp, s, t, &space.f_martingale_basis()?)?;
    if let Some(w) = sh.witness {
        return Err(Error::NotShMeasure(format!("basis martingale {} drifts at step {}", w.basis_index, w.step)));
    }
    let start = s.max(space.tau()).min(&s.max(t));
    let start = space.g_stopping_time(start.values().to_vec())?;
    let filtration = fragment_filtration(space, &start, t)?;
    let fragments = drivers.iter().map(|d| fragment_process(d, &start, t)).collect::<Result<Vec<_>>>()?;
    mrp_check(&qp.weights(space.weights()), &filtration, &fragments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{build_sh_measure_honest, density_sh_measure};
    use crate::enlargement::gtau_equality;
    use crate::finite_prob::int;
    use crate::models::catalog;

    fn drivers(m: &catalog::NamedModel) -> Vec<ProcessTable> {
        vec![m.space.lift_process(&m.walk)]
    }

    fn g_tau_indicators(space: &EnlargedSpace) -> Vec<Vec<Rational>> {
        g_at(space, space.tau())
            .unwrap()
            .blocks()
            .into_iter()
            .map(|b| (0..space.atoms()).map(|i| if b.contains(&i) { int(1) } else { int(0) }).collect())
            .collect()
    }

    #[test]
    fn constant_claim_needs_no_integrands() {
        let m = catalog::cox_interleaved().unwrap();
        let t = integrand_solver_before(&m.space, &vec![int(5); m.space.atoms()], &drivers(&m)).unwrap();
        assert!(t.j.iter().all(ProcessTable::is_zero));
        assert!(t.k.is_zero());
        assert!(t.xi.iter().all(Zero::is_zero));
        assert_eq!(t.reconstruct(&m.space), t.y);
    }

    #[test]
    fn reconstruction_on_curated_models() {
        for m in [catalog::cox_interleaved(), catalog::density_tilted(), catalog::honest_walk(3), catalog::never_default()] {
            let m = m.unwrap();
            let no_jump_information = gtau_equality(&m.space);
            for zeta in g_tau_indicators(&m.space) {
                let t = integrand_solver_before(&m.space, &zeta, &drivers(&m)).unwrap();
                assert_eq!(t.reconstruct(&m.space), t.y, "{}", m.name);
                if no_jump_information {
                    assert!(t.xi.iter().all(Zero::is_zero), "{}", m.name);
                }
            }
        }
    }

    #[test]
    fn cox_claim_on_first_default_date() {
        let m = catalog::cox_deterministic().unwrap();
        let zeta: Vec<Rational> =
            m.space.tau().values().iter().map(|&t| if t == 1 { int(1) } else { int(0) }).collect();
        let t = integrand_solver_before(&m.space, &zeta, &drivers(&m)).unwrap();
        // X_1 = P(τ = 1, τ > 1 | F_1)/Z_1 = 0, so K_1 = 1.
        for i in 0..m.space.atoms() {
            assert!(t.x.at(1, i).is_zero());
            assert_eq!(*t.k.at(1, i), int(1));
        }
        assert_eq!(t.reconstruct(&m.space), t.y);
    }

    #[test]
    fn revealed_coin_leaves_a_residual_jump() {
        let m = catalog::deterministic_with_coin().unwrap();
        let coin: Vec<Rational> = m.space.origin().iter().map(|&o| if o == 0 { int(1) } else { int(0) }).collect();
        let t = integrand_solver_before(&m.space, &coin, &drivers(&m)).unwrap();
        assert!(t.xi.iter().any(|v| !v.is_zero()));
        assert_eq!(t.reconstruct(&m.space), t.y);
    }

    #[test]
    fn claim_outside_g_tau_is_rejected() {
        let m = catalog::cox_deterministic().unwrap();
        let w2 = m.space.lift_process(&m.walk).column(2).to_vec();
        assert!(integrand_solver_before(&m.space, &w2, &drivers(&m)).is_err());
    }

    #[test]
    fn honest_representation_of_the_walk() {
        let m = catalog::honest_walk(3).unwrap();
        let w2 = m.space.lift_process(&m.walk).column(2).to_vec();
        let r = honest_full_representation(&m.space, &w2, &drivers(&m)).unwrap();
        assert_eq!(r.reconstruct(&m.space), r.y);
        let one = honest_full_representation(&m.space, &vec![int(1); m.space.atoms()], &drivers(&m)).unwrap();
        assert!(one.j_after.iter().all(ProcessTable::is_zero));
        assert!(one.before.k.is_zero());
    }

    #[test]
    fn fragment_representation_under_sh_measures() {
        let m = catalog::density_tilted().unwrap();
        let (params, _) = catalog::density_tilted_params(&m.tree).unwrap();
        let g = m.space.g();
        let qp = density_sh_measure(&m.space, &params, 2).unwrap();
        let cert =
            fragment_mrp_check(&m.space, &qp, &StoppingTime::constant(0, g), &StoppingTime::constant(2, g), &drivers(&m))
                .unwrap();
        assert!(cert.is_spanning());

        let h = catalog::honest_walk(5).unwrap();
        let built = build_sh_measure_honest(&h.space, 3, &int(1000)).unwrap();
        assert!(fragment_mrp_check(&h.space, &built.measure, &built.s, &built.t, &drivers(&h)).unwrap().is_spanning());

        let empty = StoppingTime::constant(1, h.space.g());
        let plain = MeasureChange::identity(h.space.atoms());
        let cert = fragment_mrp_check(&h.space, &plain, &empty, &empty, &drivers(&h)).unwrap();
        assert!(cert.is_spanning());
        assert!(cert.dimensions.iter().all(|d| d.martingale_dim == 0));
    }

    #[test]
    fn failing_sh_measure_is_a_distinct_error() {
        let h = catalog::honest_walk(2).unwrap();
        let plain = MeasureChange::identity(h.space.atoms());
        let result = fragment_mrp_check(&h.space, &plain, h.space.tau(), &StoppingTime::infinite(h.space.g()), &drivers(&h));
        assert!(matches!(result, Err(Error::NotShMeasure(_))));
    }
}
