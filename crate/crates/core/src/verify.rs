//! On-shell reduction, conservation checking, symmetry and multiplier
//! condition checks, and independent numeric spot checks.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{sum, Expr, JetCoord, MultiIndex};
use crate::jet::{self, JetError};
use crate::scaling::ConservationLaw;
use crate::system::FieldSystem;

/// Default seed for the deterministic sampler.
pub const DEFAULT_SEED: u64 = 0x6a65_746c_6177;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("system declares no solved forms for on-shell reduction")]
    NoSolvedForm,
    #[error("on-shell reduction exceeded the prolongation depth cap")]
    DepthExceeded,
    #[error("conservation law density is nonlocal")]
    NonlocalDensity,
    #[error("conservation law carries no current or density to check")]
    NothingToCheck,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// One named pass/fail check with the residual kept on failure.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: Option<Expr>,
}

/// Outcome of a verification run on a single subject.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub subject: String,
    pub checks: Vec<Check>,
    /// Max absolute residual over sampled points, when a numeric pass ran.
    pub numeric_max: Option<f64>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        VerificationReport {
            subject: subject.into(),
            checks: Vec::new(),
            numeric_max: None,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, residual: Expr) {
        let pass = residual.is_zero();
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: if pass { None } else { Some(residual) },
        });
    }

    pub fn push_outcome(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: None,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Substitutes the system's solved forms and their total-derivative
/// prolongations to fixpoint, canonicalizing. The pass cap is the jet order
/// of the input plus one; exceeding it is an explicit error, never a silent
/// wrong answer.
pub fn on_shell_reduce(f: &Expr, sys: &FieldSystem) -> Result<Expr, VerifyError> {
    if sys.solved_forms.is_empty() {
        return Err(VerifyError::NoSolvedForm);
    }
    let mut cur = f.canonical();
    let cap = cur.jet_order() + 1;
    for _ in 0..=cap {
        let rules = reduction_rules(&cur, sys)?;
        if rules.is_empty() {
            return Ok(cur);
        }
        cur = cur.substitute(&rules);
    }
    if reduction_rules(&cur, sys)?.is_empty() {
        Ok(cur)
    } else {
        Err(VerifyError::DepthExceeded)
    }
}

/// Builds one substitution rule per reducible coordinate of `f`: the first
/// declared solved form whose lead divides the coordinate, prolonged by the
/// remaining derivatives.
fn reduction_rules(
    f: &Expr,
    sys: &FieldSystem,
) -> Result<BTreeMap<JetCoord, Expr>, VerifyError> {
    let mut rules = BTreeMap::new();
    for coord in f.field_coords() {
        let JetCoord::Field { field, deriv } = &coord else {
            unreachable!()
        };
        for (lead, rhs) in &sys.solved_forms {
            let JetCoord::Field {
                field: lead_field,
                deriv: lead_deriv,
            } = lead
            else {
                continue;
            };
            if lead_field == field && lead_deriv.divides(deriv) {
                let remaining = deriv.minus(lead_deriv);
                let prolonged = jet::derivative_multi(rhs, &remaining)?;
                rules.insert(coord.clone(), prolonged);
                break;
            }
        }
    }
    Ok(rules)
}

/// Checks a conservation law on shell.
///
/// With a full current the total divergence must reduce to zero; with only a
/// 1+1 density the flux is reconstructed by exact antiderivative extraction.
/// When a multiplier is attached, the characteristic residual
/// `Q_A Ups^A - D_alpha Psi^alpha` must also reduce to zero on shell.
pub fn conservation_check(
    law: &ConservationLaw,
    sys: &FieldSystem,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("conservation law");
    if let Some(current) = &law.current {
        if !current.iter().all(Expr::is_local) {
            return Err(VerifyError::NonlocalDensity);
        }
        let mut parts = Vec::with_capacity(current.len());
        for (alpha, comp) in current.iter().enumerate() {
            parts.push(jet::total_derivative(comp, alpha)?);
        }
        let divergence = sum(parts).canonical();
        let reduced = on_shell_reduce(&divergence, sys)?;
        report.push("divergence-vanishes-on-shell", reduced);
        if let Some(q) = &law.multiplier {
            let characteristic = (0..sys.n_equations())
                .map(|a| (q[a].clone() * sys.equations[a].clone()).canonical())
                .collect::<Vec<_>>();
            let residual =
                (sum(characteristic) - divergence).canonical();
            let reduced = on_shell_reduce(&residual, sys)?;
            report.push("characteristic-residual-vanishes-on-shell", reduced);
        }
        return Ok(report);
    }
    let Some(density) = &law.density else {
        return Err(VerifyError::NothingToCheck);
    };
    if !density.is_local() {
        return Err(VerifyError::NonlocalDensity);
    }
    let Some(x) = sys.antid_direction else {
        return Err(VerifyError::NothingToCheck);
    };
    let dt = jet::total_derivative(density, sys.time_index)?;
    let reduced = on_shell_reduce(&dt, sys)?;
    match jet::extract_antiderivative(&reduced, x) {
        Ok(_flux) => report.push_outcome("density-flux-exists-on-shell", true),
        Err(JetError::NotExact) => {
            report.checks.push(Check {
                name: "density-flux-exists-on-shell".into(),
                pass: false,
                residual: Some(reduced),
            });
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

/// Reconstructs the spatial flux of a conserved 1+1 density.
pub fn flux_for_density(density: &Expr, sys: &FieldSystem) -> Result<Expr, VerifyError> {
    let x = sys.antid_direction.ok_or(VerifyError::NothingToCheck)?;
    let dt = jet::total_derivative(density, sys.time_index)?;
    let reduced = on_shell_reduce(&dt, sys)?;
    let g = jet::extract_antiderivative(&reduced, x)?;
    Ok((-g).canonical())
}

/// Passes iff the linearized equations vanish on shell at `eta`.
pub fn symmetry_check(eta: &[Expr], sys: &FieldSystem) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("symmetry");
    let lin = jet::linearize(sys, eta)?;
    for (idx, comp) in lin.iter().enumerate() {
        let reduced = on_shell_reduce(comp, sys)?;
        report.push(format!("linearized-equation-{idx}"), reduced);
    }
    Ok(report)
}

/// Passes iff the adjoint linearized equations vanish on shell at `omega`.
pub fn adjoint_symmetry_check(
    omega: &[Expr],
    sys: &FieldSystem,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("adjoint-symmetry");
    let adj = jet::adjoint_linearize(sys, omega)?;
    for (idx, comp) in adj.iter().enumerate() {
        let reduced = on_shell_reduce(comp, sys)?;
        report.push(format!("adjoint-equation-{idx}"), reduced);
    }
    Ok(report)
}

/// The adjoint-invariance condition that distinguishes multipliers among
/// adjoint-symmetries: `L*_omega(Ups) = -L*_Ups(omega)` as an exact
/// expression identity, without use of the field equations.
pub fn multiplier_condition_check(
    omega: &[Expr],
    sys: &FieldSystem,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new("multiplier-condition");
    let lhs = jet::adjoint_of_operator(omega, &sys.equations, sys.n_fields())?;
    let rhs = jet::adjoint_linearize(sys, omega)?;
    for (idx, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        let residual = (l.clone() + r.clone()).canonical();
        report.push(format!("adjoint-invariance-{idx}"), residual);
    }
    Ok(report)
}

/// Uniform random assignment over the jet coordinates of `f`; coordinates
/// appearing under negative powers are kept away from zero.
fn random_assignment(
    f: &Expr,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<JetCoord, f64> {
    let mut guarded = std::collections::BTreeSet::new();
    collect_negative_power_coords(f, &mut guarded);
    let mut assignment = BTreeMap::new();
    for coord in f.coords() {
        let v = if guarded.contains(&coord) {
            let mag: f64 = rng.gen_range(0.1..1.0);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        } else {
            rng.gen_range(-1.0..1.0)
        };
        assignment.insert(coord, v);
    }
    assignment
}

fn collect_negative_power_coords(e: &Expr, out: &mut std::collections::BTreeSet<JetCoord>) {
    match e {
        Expr::Const(_) | Expr::Coord(_) => {}
        Expr::Sum(es) | Expr::Prod(es) => {
            for e in es {
                collect_negative_power_coords(e, out);
            }
        }
        Expr::Pow(b, k) => {
            if *k < 0 {
                out.extend(b.coords());
            }
            collect_negative_power_coords(b, out);
        }
        Expr::Sin(a) | Expr::Cos(a) => collect_negative_power_coords(a, out),
        Expr::AntiD(_, g) => collect_negative_power_coords(g, out),
    }
}

/// Result of a numeric sampling pass.
#[derive(Clone, Copy, Debug)]
pub struct NumericCheck {
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluates a local expression at random points in `[-1, 1]` per
/// coordinate and reports the maximum absolute value. Independent
/// cross-check that symbolic zeros are numeric zeros.
pub fn numeric_spot_check(
    f: &Expr,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<NumericCheck, crate::expr::EvalError> {
    if !f.is_local() {
        return Err(crate::expr::EvalError::NonlocalExpression);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max = 0.0f64;
    for _ in 0..samples {
        let assignment = random_assignment(f, &mut rng);
        let v = f.eval(&assignment)?.abs();
        if v > max {
            max = v;
        }
    }
    Ok(NumericCheck {
        max_residual: max,
        tol,
        pass: max <= tol,
    })
}

/// Numeric on-shell check: free coordinates are sampled randomly, solved
/// coordinates are evaluated from the prolonged solved forms, and the raw
/// expression is evaluated on the resulting consistent jet point. This path
/// never goes through canonicalization of `f` itself.
pub fn numeric_on_shell_check(
    f: &Expr,
    sys: &FieldSystem,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<NumericCheck, VerifyError> {
    if !f.is_local() {
        return Err(VerifyError::Jet(JetError::NonlocalExpression));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut guarded = std::collections::BTreeSet::new();
    collect_negative_power_coords(f, &mut guarded);
    let mut max = 0.0f64;
    for _ in 0..samples {
        let mut assignment: BTreeMap<JetCoord, f64> = BTreeMap::new();
        for coord in f.coords() {
            assign_on_shell(&coord, sys, &mut assignment, &mut rng, &guarded, 0)?;
        }
        let v = f
            .eval(&assignment)
            .map_err(|_| VerifyError::Jet(JetError::NonlocalExpression))?
            .abs();
        if v > max {
            max = v;
        }
    }
    Ok(NumericCheck {
        max_residual: max,
        tol,
        pass: max <= tol,
    })
}

/// Assigns one coordinate consistently with the solved forms, recursing into
/// the coordinates of the prolonged rule.
fn assign_on_shell(
    coord: &JetCoord,
    sys: &FieldSystem,
    assignment: &mut BTreeMap<JetCoord, f64>,
    rng: &mut ChaCha8Rng,
    guarded: &std::collections::BTreeSet<JetCoord>,
    depth: u32,
) -> Result<(), VerifyError> {
    if assignment.contains_key(coord) {
        return Ok(());
    }
    if depth > 64 {
        return Err(VerifyError::DepthExceeded);
    }
    let rule = match coord {
        JetCoord::Field { field, deriv } => sys.solved_forms.iter().find_map(|(lead, rhs)| {
            let JetCoord::Field {
                field: lead_field,
                deriv: lead_deriv,
            } = lead
            else {
                return None;
            };
            if lead_field == field && lead_deriv.divides(deriv) {
                Some((rhs, deriv.minus(lead_deriv)))
            } else {
                None
            }
        }),
        JetCoord::Indep(_) => None,
    };
    match rule {
        None => {
            let v = if guarded.contains(coord) {
                let mag: f64 = rng.gen_range(0.1..1.0);
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            } else {
                rng.gen_range(-1.0..1.0)
            };
            assignment.insert(coord.clone(), v);
        }
        Some((rhs, remaining)) => {
            let prolonged = prolong_raw(rhs, &remaining)?;
            for inner in prolonged.coords() {
                assign_on_shell(&inner, sys, assignment, rng, guarded, depth + 1)?;
            }
            let v = prolonged
                .eval(assignment)
                .map_err(|_| VerifyError::Jet(JetError::NonlocalExpression))?;
            assignment.insert(coord.clone(), v);
        }
    }
    Ok(())
}

fn prolong_raw(rhs: &Expr, idx: &MultiIndex) -> Result<Expr, VerifyError> {
    Ok(jet::derivative_multi(rhs, idx)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;
    use crate::scaling::ConservationLaw;

    const T: usize = 0;
    const X: usize = 1;

    fn u(vars: &[usize]) -> Expr {
        Expr::field(0, vars)
    }

    #[test]
    fn kdv_reduces_its_own_equation() {
        let sys = crate::models::build_kdv();
        let reduced = on_shell_reduce(&sys.equations[0], &sys).unwrap();
        assert!(reduced.is_zero());
    }

    #[test]
    fn kdv_prolonged_reduction() {
        let sys = crate::models::build_kdv();
        // u_tx -> -(u_x^2 + u u_xx + u_xxxx)
        let reduced = on_shell_reduce(&u(&[T, X]), &sys).unwrap();
        let want = -(u(&[X]).pow(2) + u(&[]) * u(&[X, X]) + u(&[X, X, X, X]));
        assert!(crate::expr::canon_eq(&reduced, &want));
    }

    #[test]
    fn sine_gordon_prolonged_reduction() {
        let sys = crate::models::build_sine_gordon();
        // u_txx -> cos(u) u_x
        let reduced = on_shell_reduce(&u(&[T, X, X]), &sys).unwrap();
        let want = u(&[]).cos() * u(&[X]);
        assert!(crate::expr::canon_eq(&reduced, &want));
    }

    #[test]
    fn kdv_mass_current_passes() {
        let sys = crate::models::build_kdv();
        let law = ConservationLaw::from_current(
            &sys,
            Some(vec![Expr::one()]),
            vec![u(&[]), u(&[]).pow(2).scale(rat(1, 2)) + u(&[X, X])],
            crate::expr::rint(-1),
        );
        let report = conservation_check(&law, &sys).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn wrong_flux_fails() {
        let sys = crate::models::build_kdv();
        let law = ConservationLaw::from_current(
            &sys,
            None,
            vec![u(&[]).pow(2), Expr::one()],
            crate::expr::rint(-1),
        );
        let report = conservation_check(&law, &sys).unwrap();
        assert!(!report.passed());
        assert!(report.checks[0].residual.is_some());
    }

    #[test]
    fn sine_gordon_density_only_check() {
        let sys = crate::models::build_sine_gordon();
        let law = ConservationLaw::from_density(
            None,
            u(&[X]).pow(2).scale(rat(1, 2)),
            crate::expr::rint(-1),
        );
        let report = conservation_check(&law, &sys).unwrap();
        assert!(report.passed());
        let flux = flux_for_density(&u(&[X]).pow(2).scale(rat(1, 2)), &sys).unwrap();
        assert!(crate::expr::canon_eq(&flux, &u(&[]).cos()));
    }

    #[test]
    fn kdv_scaling_symmetry_is_symmetry() {
        let sys = crate::models::build_kdv();
        let eta = crate::scaling::scaling_symmetry(&sys);
        assert!(symmetry_check(&eta, &sys).unwrap().passed());
    }

    #[test]
    fn kdv_ux_is_not_adjoint_symmetry() {
        let sys = crate::models::build_kdv();
        let report = adjoint_symmetry_check(&[u(&[X])], &sys).unwrap();
        assert!(!report.passed());
        // residual is exactly u_x^2
        let residual = report.checks[0].residual.clone().unwrap();
        assert!(crate::expr::canon_eq(&residual, &u(&[X]).pow(2)));
    }

    #[test]
    fn kdv_u_is_multiplier() {
        let sys = crate::models::build_kdv();
        assert!(adjoint_symmetry_check(&[u(&[])], &sys).unwrap().passed());
        assert!(multiplier_condition_check(&[u(&[])], &sys)
            .unwrap()
            .passed());
    }

    #[test]
    fn fabricated_adjoint_symmetry_fails_multiplier_condition() {
        let sys = crate::models::build_kdv();
        // add an on-shell-vanishing term with asymmetric linearization
        let omega = (u(&[]) + sys.equations[0].clone() * u(&[X])).canonical();
        assert!(adjoint_symmetry_check(&[omega.clone()], &sys)
            .unwrap()
            .passed());
        let report = multiplier_condition_check(&[omega], &sys).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn numeric_zero_is_exactly_zero() {
        let check = numeric_spot_check(&Expr::zero(), 16, 1e-9, DEFAULT_SEED).unwrap();
        assert_eq!(check.max_residual, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn numeric_sampler_is_not_degenerate() {
        let f = u(&[X]).pow(2);
        let check = numeric_spot_check(&f, 32, 1e-9, DEFAULT_SEED).unwrap();
        assert!(check.max_residual > 0.0);
        assert!(!check.pass);
    }

    #[test]
    fn numeric_on_shell_agrees_with_symbolic() {
        let sys = crate::models::build_kdv();
        // D_t(u^2/2) + D_x(u^3/3 + u u_xx - u_x^2/2) vanishes on shell
        let divergence = jet::total_derivative(&u(&[]).pow(2).scale(rat(1, 2)), T)
            .unwrap()
            + jet::total_derivative(
                &(u(&[]).pow(3).scale(rat(1, 3)) + u(&[]) * u(&[X, X])
                    - u(&[X]).pow(2).scale(rat(1, 2))),
                X,
            )
            .unwrap();
        let reduced = on_shell_reduce(&divergence.canonical(), &sys).unwrap();
        assert!(reduced.is_zero());
        let numeric =
            numeric_on_shell_check(&divergence, &sys, 100, 1e-9, DEFAULT_SEED).unwrap();
        assert!(numeric.pass, "max residual {}", numeric.max_residual);
    }
}
