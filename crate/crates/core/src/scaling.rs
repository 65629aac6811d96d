//! Scaling symmetries, homogeneity weights, the conservation-law formula and
//! density reconstruction.
//!
//! For a system invariant under `x^a -> l^p x^a`, `u -> l^q u`, the scaling
//! symmetry contracted into the bilinear boundary current turns any
//! adjoint-symmetry into a conserved current; dividing by the scaling weight
//! of the conserved integral recovers the canonical density whenever that
//! weight is nonzero.

use num::Zero;

use crate::expr::{Expr, JetCoord, Poly, Rat};
use crate::jet::{self, JetError};
use crate::system::{FieldSystem, ScalingSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalingError {
    #[error("equation {equation} is not scaling invariant under the given exponents")]
    NotScalingInvariant { equation: usize },
    #[error("expression is not homogeneous under the scaling symmetry")]
    Inhomogeneous,
    #[error("multiplier and equation weights r_A + s_A differ across components")]
    InconsistentComponents,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// The scaling symmetry characteristic: per field `a`,
/// `q^a u^a - sum_alpha p^alpha x^alpha u^a_alpha`.
pub fn scaling_symmetry(sys: &FieldSystem) -> Vec<Expr> {
    let spec = &sys.scaling;
    (0..sys.n_fields())
        .map(|a| {
            let mut e = Expr::field(a, &[]).scale(spec.q[a].clone());
            for (alpha, p) in spec.p.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                e = e
                    - (Expr::indep(alpha) * Expr::field(a, &[alpha]))
                        .scale(p.clone());
            }
            e.canonical()
        })
        .collect()
}

/// Solves `t = r * f` for a rational `r`, verifying the identity exactly.
fn solve_ratio(t: &Expr, f: &Expr) -> Option<Rat> {
    let pt = Poly::of(t);
    if pt.is_zero() {
        return Some(Rat::zero());
    }
    let pf = Poly::of(f);
    let (mono, c) = pf.terms.iter().next()?;
    let r = pt.terms.get(mono)? / c;
    let mut diff = pt;
    diff.add(pf.mul(&Poly::constant(-r.clone())));
    if diff.is_zero() {
        Some(r)
    } else {
        None
    }
}

/// Verifies the declared scaling invariance of the system and returns the
/// equation weights `s^A` with
/// `L(eta_s)^A = s^A Ups^A - sum p^a x^a D_a Ups^A`.
pub fn check_scaling_invariance(sys: &FieldSystem) -> Result<Vec<Rat>, ScalingError> {
    let eta_s = scaling_symmetry(sys);
    let variations = jet::linearize(sys, &eta_s)?;
    let mut out = Vec::with_capacity(sys.n_equations());
    for (idx, eq) in sys.equations.iter().enumerate() {
        let t = (variations[idx].clone() + transport_term(eq, &sys.scaling)?).canonical();
        match solve_ratio(&t, eq) {
            Some(s) => out.push(s),
            None => return Err(ScalingError::NotScalingInvariant { equation: idx }),
        }
    }
    Ok(out)
}

/// `sum_alpha p^alpha x^alpha D_alpha f`.
fn transport_term(f: &Expr, spec: &ScalingSpec) -> Result<Expr, JetError> {
    let mut parts = Vec::new();
    for (alpha, p) in spec.p.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        parts.push(
            (Expr::indep(alpha) * jet::total_derivative(f, alpha)?).scale(p.clone()),
        );
    }
    Ok(crate::expr::sum(parts).canonical())
}

/// Scaling weight `r` of a homogeneous differential function:
/// `L_f(eta_s) = r f - sum p^a x^a D_a f`.
///
/// Local expressions are checked through the symbolic identity; expressions
/// carrying formal antiderivatives are weighed structurally (the
/// antiderivative adds `p` of its direction to the integrand weight).
pub fn homogeneity_weight(f: &Expr, sys: &FieldSystem) -> Result<Rat, ScalingError> {
    let f = f.canonical();
    if f.is_zero() {
        return Ok(Rat::zero());
    }
    if f.is_local() {
        let eta_s = scaling_symmetry(sys);
        let t = (jet::linearize_expr(&f, &eta_s)? + transport_term(&f, &sys.scaling)?)
            .canonical();
        solve_ratio(&t, &f).ok_or(ScalingError::Inhomogeneous)
    } else {
        match structural_weight(&f, &sys.scaling)? {
            Some(w) => Ok(w),
            None => Ok(Rat::zero()),
        }
    }
}

/// Term-by-term weight audit; `None` means "any weight" (the zero
/// expression or a bare constant factor).
fn structural_weight(e: &Expr, spec: &ScalingSpec) -> Result<Option<Rat>, ScalingError> {
    match e {
        Expr::Const(c) => {
            if c.is_zero() {
                Ok(None)
            } else {
                Ok(Some(Rat::zero()))
            }
        }
        Expr::Coord(JetCoord::Indep(a)) => Ok(Some(spec.p[*a].clone())),
        Expr::Coord(JetCoord::Field { field, deriv }) => {
            let mut w = spec.q[*field].clone();
            for v in deriv.vars() {
                w -= spec.p[v].clone();
            }
            Ok(Some(w))
        }
        Expr::Sum(es) => {
            let mut agreed: Option<Rat> = None;
            for part in es {
                match structural_weight(part, spec)? {
                    None => {}
                    Some(w) => match &agreed {
                        None => agreed = Some(w),
                        Some(prev) if *prev == w => {}
                        Some(_) => return Err(ScalingError::Inhomogeneous),
                    },
                }
            }
            Ok(agreed)
        }
        Expr::Prod(es) => {
            let mut total = Rat::zero();
            for part in es {
                match structural_weight(part, spec)? {
                    None => return Ok(None),
                    Some(w) => total += w,
                }
            }
            Ok(Some(total))
        }
        Expr::Pow(b, k) => match structural_weight(b, spec)? {
            None => Ok(None),
            Some(w) => Ok(Some(w * crate::expr::rint(*k as i64))),
        },
        Expr::Sin(a) | Expr::Cos(a) => match structural_weight(a, spec)? {
            None => Ok(Some(Rat::zero())),
            Some(w) if w.is_zero() => Ok(Some(Rat::zero())),
            Some(_) => Err(ScalingError::Inhomogeneous),
        },
        Expr::AntiD(d, g) => match structural_weight(g, spec)? {
            None => Ok(None),
            Some(w) => Ok(Some(w + spec.p[*d].clone())),
        },
    }
}

/// Scaling weights attached to a multiplier: `r` per component, `s` per
/// equation, `p_sum` and the conserved-integral weight `w = r + s + p_sum`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightReport {
    pub r: Vec<Option<Rat>>,
    pub s: Vec<Rat>,
    pub p_sum: Rat,
    pub w: Rat,
}

impl WeightReport {
    /// Builds the report, rejecting multipliers whose `r_A + s_A` varies
    /// across components. Components reported as `None` (identically zero
    /// multiplier entries) are unconstrained.
    pub fn new(
        r: Vec<Option<Rat>>,
        s: Vec<Rat>,
        spec: &ScalingSpec,
    ) -> Result<WeightReport, ScalingError> {
        assert_eq!(r.len(), s.len(), "one multiplier component per equation");
        let mut agreed: Option<Rat> = None;
        for (ra, sa) in r.iter().zip(&s) {
            let Some(ra) = ra else { continue };
            let total = ra.clone() + sa.clone();
            match &agreed {
                None => agreed = Some(total),
                Some(prev) if *prev == total => {}
                Some(_) => return Err(ScalingError::InconsistentComponents),
            }
        }
        let rs = agreed.ok_or(ScalingError::InconsistentComponents)?;
        let p_sum = spec.p_sum();
        let w = rs + p_sum.clone();
        Ok(WeightReport { r, s, p_sum, w })
    }
}

/// Conserved-integral weight `w = r_A + s_A + sum_alpha p^alpha`.
pub fn weight_w(
    r: &[Option<Rat>],
    s: &[Rat],
    spec: &ScalingSpec,
) -> Result<Rat, ScalingError> {
    Ok(WeightReport::new(r.to_vec(), s.to_vec(), spec)?.w)
}

/// Weight report for a concrete multiplier on a system.
pub fn multiplier_weight_report(
    sys: &FieldSystem,
    omega: &[Expr],
) -> Result<WeightReport, ScalingError> {
    let s = check_scaling_invariance(sys)?;
    let mut r = Vec::with_capacity(omega.len());
    for comp in omega {
        let c = comp.canonical();
        if c.is_zero() {
            r.push(None);
        } else {
            r.push(Some(homogeneity_weight(&c, sys)?));
        }
    }
    WeightReport::new(r, s, &sys.scaling)
}

/// The conservation-law formula: the bilinear boundary current evaluated on
/// (adjoint-symmetry, scaling symmetry).
pub fn conservation_current(sys: &FieldSystem, omega: &[Expr]) -> Result<Vec<Expr>, ScalingError> {
    let eta_s = scaling_symmetry(sys);
    Ok(jet::bilinear_current(sys, omega, &eta_s)?)
}

/// A conservation law: multiplier, current, reduced density and weight data.
#[derive(Clone, Debug)]
pub struct ConservationLaw {
    pub multiplier: Option<Vec<Expr>>,
    /// Current components, one per independent variable.
    pub current: Option<Vec<Expr>>,
    /// Reduced representative of the time component (1+1 models).
    pub density: Option<Expr>,
    pub weight: Rat,
    pub critical: bool,
    pub local: bool,
}

impl ConservationLaw {
    /// A law given by an explicit current vector.
    pub fn from_current(
        sys: &FieldSystem,
        multiplier: Option<Vec<Expr>>,
        current: Vec<Expr>,
        weight: Rat,
    ) -> ConservationLaw {
        let local = current.iter().all(Expr::is_local);
        let density = if sys.is_one_plus_one() && local {
            sys.antid_direction
                .map(|x| jet::reduce_modulo_trivial(&current[sys.time_index], x))
        } else {
            None
        };
        ConservationLaw {
            multiplier,
            current: Some(current),
            density,
            weight,
            critical: false,
            local,
        }
    }

    /// A 1+1 law specified only by its conserved density.
    pub fn from_density(
        multiplier: Option<Vec<Expr>>,
        density: Expr,
        weight: Rat,
    ) -> ConservationLaw {
        let local = density.is_local();
        ConservationLaw {
            multiplier,
            current: None,
            density: Some(density),
            weight,
            critical: false,
            local,
        }
    }
}

/// Divides the generated current by the conserved-integral weight. A zero
/// weight marks the law critical: the formula is silent there and no density
/// is produced. In 1+1 the density is reduced on shell and modulo trivial
/// spatial derivatives.
pub fn reconstruct_density(
    sys: &FieldSystem,
    multiplier: Option<Vec<Expr>>,
    current: &[Expr],
    weight: &Rat,
) -> Result<ConservationLaw, ScalingError> {
    if weight.is_zero() {
        return Ok(ConservationLaw {
            multiplier,
            current: None,
            density: None,
            weight: Rat::zero(),
            critical: true,
            local: current.iter().all(Expr::is_local),
        });
    }
    let inv = Rat::from_integer(1.into()) / weight.clone();
    let scaled: Vec<Expr> = current
        .iter()
        .map(|c| c.clone().scale(inv.clone()).canonical())
        .collect();
    let local = scaled.iter().all(Expr::is_local);
    let density = if sys.is_one_plus_one() && local {
        let x = sys.antid_direction.unwrap_or(1);
        // A system without solved forms still gets the mod-trivial reduction.
        let base = crate::verify::on_shell_reduce(&scaled[sys.time_index], sys)
            .unwrap_or_else(|_| scaled[sys.time_index].clone());
        Some(jet::reduce_modulo_trivial(&base, x))
    } else {
        None
    };
    Ok(ConservationLaw {
        multiplier,
        current: Some(scaled),
        density,
        weight: weight.clone(),
        critical: false,
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canon_eq, rat, rint};

    const T: usize = 0;
    const X: usize = 1;

    fn u(vars: &[usize]) -> Expr {
        Expr::field(0, vars)
    }

    #[test]
    fn kdv_scaling_symmetry() {
        let sys = crate::models::build_kdv();
        let eta = scaling_symmetry(&sys);
        let want = -(u(&[]).scale(rint(2)))
            - (Expr::indep(T) * u(&[T])).scale(rint(3))
            - Expr::indep(X) * u(&[X]);
        assert!(canon_eq(&eta[0], &want));
    }

    #[test]
    fn sine_gordon_scaling_symmetry() {
        let sys = crate::models::build_sine_gordon();
        let eta = scaling_symmetry(&sys);
        let want = Expr::indep(T) * u(&[T]) - Expr::indep(X) * u(&[X]);
        assert!(canon_eq(&eta[0], &want));
    }

    #[test]
    fn kdv_equation_weight() {
        let sys = crate::models::build_kdv();
        let s = check_scaling_invariance(&sys).unwrap();
        assert_eq!(s, vec![rint(-5)]);
    }

    #[test]
    fn sine_gordon_equation_weight() {
        let sys = crate::models::build_sine_gordon();
        let s = check_scaling_invariance(&sys).unwrap();
        assert_eq!(s, vec![rint(0)]);
    }

    #[test]
    fn invalid_scaling_is_rejected() {
        let mut sys = crate::models::build_kdv();
        sys.scaling.q[0] = rint(7);
        assert!(matches!(
            check_scaling_invariance(&sys),
            Err(ScalingError::NotScalingInvariant { equation: 0 })
        ));
    }

    #[test]
    fn kdv_multiplier_weights() {
        let sys = crate::models::build_kdv();
        assert_eq!(homogeneity_weight(&u(&[]), &sys).unwrap(), rint(-2));
        let w1 = (u(&[X, X]) + u(&[]).pow(2).scale(rat(1, 2))).canonical();
        assert_eq!(homogeneity_weight(&w1, &sys).unwrap(), rint(-4));
    }

    #[test]
    fn mixed_weights_are_inhomogeneous() {
        let sys = crate::models::build_kdv();
        let f = u(&[]) + u(&[X]);
        assert_eq!(
            homogeneity_weight(&f, &sys),
            Err(ScalingError::Inhomogeneous)
        );
    }

    #[test]
    fn antiderivative_weight_is_structural() {
        let sys = crate::models::build_kdv();
        // D_x^{-1}(u u_x): integrand weight -2 + -3, plus p^x = 1 -> -4
        let f = (u(&[]) * u(&[X])).antid(X);
        assert_eq!(homogeneity_weight(&f, &sys).unwrap(), rint(-4));
    }

    #[test]
    fn kdv_conserved_current_formula() {
        let sys = crate::models::build_kdv();
        // Phi^t = -(3 t u_t + x u_x + 2 u) omega for any omega
        let omega = u(&[]);
        let current = conservation_current(&sys, &[omega.clone()]).unwrap();
        let want = -((Expr::indep(T) * u(&[T])).scale(rint(3))
            + Expr::indep(X) * u(&[X])
            + u(&[]).scale(rint(2)))
            * omega;
        assert!(canon_eq(&current[0], &want));
    }

    #[test]
    fn sine_gordon_conserved_current_formula() {
        let sys = crate::models::build_sine_gordon();
        // Phi^t = (x u_x - t u_t) D_x omega
        let omega = u(&[X]);
        let current = conservation_current(&sys, &[omega.clone()]).unwrap();
        let want = (Expr::indep(X) * u(&[X]) - Expr::indep(T) * u(&[T]))
            * jet::total_derivative(&omega, X).unwrap();
        assert!(canon_eq(&current[0], &want));
    }

    #[test]
    fn kdv_weight_formula() {
        let sys = crate::models::build_kdv();
        // w = r + s + sum(p) = -2 - 5 + 4 = -3 for omega = u
        let report = multiplier_weight_report(&sys, &[u(&[])]).unwrap();
        assert_eq!(report.w, rint(-3));
    }

    #[test]
    fn kdv_density_reconstruction() {
        let sys = crate::models::build_kdv();
        let omega = u(&[]);
        let current = conservation_current(&sys, &[omega.clone()]).unwrap();
        let report = multiplier_weight_report(&sys, &[omega.clone()]).unwrap();
        let law = reconstruct_density(&sys, Some(vec![omega]), &current, &report.w).unwrap();
        assert!(!law.critical);
        let density = law.density.unwrap();
        assert!(canon_eq(&density, &u(&[]).pow(2).scale(rat(1, 2))));
    }

    #[test]
    fn zero_weight_flags_critical() {
        let sys = crate::models::build_kdv();
        let law =
            reconstruct_density(&sys, None, &[u(&[]), u(&[X])], &Rat::zero()).unwrap();
        assert!(law.critical);
        assert!(law.density.is_none());
        assert!(law.current.is_none());
    }
}
