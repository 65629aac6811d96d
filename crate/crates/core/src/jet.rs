//! Operator toolkit on jet space: total derivatives, linearization and its
//! adjoint, the bilinear boundary current of the adjoint identity, the Euler
//! operator, exact antiderivative extraction and reduction of densities
//! modulo total spatial derivatives.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::expr::{canon_eq, sum, Expr, JetCoord, MultiIndex, Rat};
use crate::system::FieldSystem;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("formal antiderivative in direction {antid_dir} does not commute with the total derivative in direction {deriv_dir}")]
    AntiDTimeDerivative { antid_dir: usize, deriv_dir: usize },
    #[error("expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("operation requires a local expression")]
    NonlocalExpression,
    #[error("expression is not an exact total derivative in the given direction")]
    NotExact,
}

/// Total derivative `D_dir f`, canonicalized.
///
/// Acts on jet coordinates by index append; the formal antiderivative
/// inverts only along its own direction and errors otherwise.
pub fn total_derivative(f: &Expr, dir: usize) -> Result<Expr, JetError> {
    Ok(d_raw(f, dir)?.canonical())
}

fn d_raw(f: &Expr, dir: usize) -> Result<Expr, JetError> {
    Ok(match f {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(JetCoord::Indep(v)) => {
            if *v == dir {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Coord(JetCoord::Field { field, deriv }) => {
            Expr::Coord(JetCoord::Field {
                field: *field,
                deriv: deriv.with(dir),
            })
        }
        Expr::Sum(es) => {
            let parts = es
                .iter()
                .map(|e| d_raw(e, dir))
                .collect::<Result<Vec<_>, _>>()?;
            Expr::Sum(parts)
        }
        Expr::Prod(es) => {
            let mut parts = Vec::with_capacity(es.len());
            for (i, e) in es.iter().enumerate() {
                let mut term = Vec::with_capacity(es.len());
                for (j, e2) in es.iter().enumerate() {
                    if i == j {
                        term.push(d_raw(e2, dir)?);
                    } else {
                        term.push(e2.clone());
                    }
                }
                let _ = e;
                parts.push(Expr::Prod(term));
            }
            Expr::Sum(parts)
        }
        Expr::Pow(b, k) => {
            if *k == 0 {
                Expr::zero()
            } else {
                Expr::int(*k as i64)
                    * Expr::Pow(b.clone(), k - 1)
                    * d_raw(b, dir)?
            }
        }
        Expr::Sin(a) => Expr::Cos(a.clone()) * d_raw(a, dir)?,
        Expr::Cos(a) => -(Expr::Sin(a.clone()) * d_raw(a, dir)?),
        Expr::AntiD(d, g) => {
            if *d == dir {
                (**g).clone()
            } else {
                return Err(JetError::AntiDTimeDerivative {
                    antid_dir: *d,
                    deriv_dir: dir,
                });
            }
        }
    })
}

/// Repeated total derivative `D_J f` over a multi-index.
pub fn derivative_multi(f: &Expr, idx: &MultiIndex) -> Result<Expr, JetError> {
    let mut cur = f.clone();
    for v in idx.vars() {
        cur = total_derivative(&cur, v)?;
    }
    Ok(cur.canonical())
}

/// Formal partial derivative with respect to a single jet coordinate,
/// treating all other coordinates as independent. Local expressions only.
pub fn jet_partial(f: &Expr, coord: &JetCoord) -> Result<Expr, JetError> {
    Ok(partial_raw(f, coord)?.canonical())
}

fn partial_raw(f: &Expr, coord: &JetCoord) -> Result<Expr, JetError> {
    Ok(match f {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(c) => {
            if c == coord {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(es) => Expr::Sum(
            es.iter()
                .map(|e| partial_raw(e, coord))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Expr::Prod(es) => {
            let mut parts = Vec::with_capacity(es.len());
            for i in 0..es.len() {
                let mut term = Vec::with_capacity(es.len());
                for (j, e2) in es.iter().enumerate() {
                    if i == j {
                        term.push(partial_raw(e2, coord)?);
                    } else {
                        term.push(e2.clone());
                    }
                }
                parts.push(Expr::Prod(term));
            }
            Expr::Sum(parts)
        }
        Expr::Pow(b, k) => {
            if *k == 0 {
                Expr::zero()
            } else {
                Expr::int(*k as i64)
                    * Expr::Pow(b.clone(), k - 1)
                    * partial_raw(b, coord)?
            }
        }
        Expr::Sin(a) => Expr::Cos(a.clone()) * partial_raw(a, coord)?,
        Expr::Cos(a) => -(Expr::Sin(a.clone()) * partial_raw(a, coord)?),
        Expr::AntiD(..) => return Err(JetError::NonlocalExpression),
    })
}

/// Linearization of a single differential function along a field variation:
/// the sum over occurring field coordinates of `(d f / d u^a_J) D_J eta^a`.
pub fn linearize_expr(f: &Expr, eta: &[Expr]) -> Result<Expr, JetError> {
    let mut parts = Vec::new();
    for coord in f.field_coords() {
        let JetCoord::Field { field, deriv } = &coord else {
            unreachable!()
        };
        if *field >= eta.len() {
            return Err(JetError::ArityMismatch {
                expected: *field + 1,
                got: eta.len(),
            });
        }
        let v = jet_partial(f, &coord)?;
        if v.is_zero() {
            continue;
        }
        parts.push(v * derivative_multi(&eta[*field], deriv)?);
    }
    Ok(sum(parts).canonical())
}

/// Linearized field equations evaluated on a variation `eta` (one component
/// per field).
pub fn linearize(sys: &FieldSystem, eta: &[Expr]) -> Result<Vec<Expr>, JetError> {
    if eta.len() != sys.n_fields() {
        return Err(JetError::ArityMismatch {
            expected: sys.n_fields(),
            got: eta.len(),
        });
    }
    sys.equations
        .iter()
        .map(|eq| linearize_expr(eq, eta))
        .collect()
}

/// Adjoint linearization evaluated on a covector `omega` (one component per
/// equation): for each field `a`, the sum of `(-D)_J (omega_A dUps^A/du^a_J)`.
pub fn adjoint_linearize(sys: &FieldSystem, omega: &[Expr]) -> Result<Vec<Expr>, JetError> {
    if omega.len() != sys.n_equations() {
        return Err(JetError::ArityMismatch {
            expected: sys.n_equations(),
            got: omega.len(),
        });
    }
    adjoint_of_operator(&sys.equations, omega, sys.n_fields())
}

/// Adjoint of the linearization operator of an arbitrary list of
/// differential functions, applied to `arg` (one component per function).
pub fn adjoint_of_operator(
    funcs: &[Expr],
    arg: &[Expr],
    n_fields: usize,
) -> Result<Vec<Expr>, JetError> {
    let mut out = vec![Vec::new(); n_fields];
    for (a_idx, f) in funcs.iter().enumerate() {
        for coord in f.field_coords() {
            let JetCoord::Field { field, deriv } = &coord else {
                unreachable!()
            };
            if *field >= n_fields {
                return Err(JetError::ArityMismatch {
                    expected: *field + 1,
                    got: n_fields,
                });
            }
            let v = jet_partial(f, &coord)?;
            if v.is_zero() {
                continue;
            }
            let inner = (arg[a_idx].clone() * v).canonical();
            let mut term = derivative_multi(&inner, deriv)?;
            if deriv.order() % 2 == 1 {
                term = -term;
            }
            out[*field].push(term);
        }
    }
    Ok(out.into_iter().map(|p| sum(p).canonical()).collect())
}

/// Boundary current of the adjoint identity: components `C^alpha` with
/// `omega_A L(eta)^A - eta^a L*(omega)_a = D_alpha C^alpha` holding
/// identically, built by deterministic integration by parts that peels the
/// derivative in the largest coordinate direction first.
pub fn bilinear_current(
    sys: &FieldSystem,
    omega: &[Expr],
    eta: &[Expr],
) -> Result<Vec<Expr>, JetError> {
    if omega.len() != sys.n_equations() {
        return Err(JetError::ArityMismatch {
            expected: sys.n_equations(),
            got: omega.len(),
        });
    }
    if eta.len() != sys.n_fields() {
        return Err(JetError::ArityMismatch {
            expected: sys.n_fields(),
            got: eta.len(),
        });
    }
    let n = sys.n_indep();
    let mut comps: Vec<Vec<Expr>> = vec![Vec::new(); n];
    for (a_idx, eq) in sys.equations.iter().enumerate() {
        for coord in eq.field_coords() {
            let JetCoord::Field { field, deriv } = &coord else {
                unreachable!()
            };
            if deriv.is_empty() {
                continue;
            }
            let v = jet_partial(eq, &coord)?;
            if v.is_zero() {
                continue;
            }
            let w = (omega[a_idx].clone() * v).canonical();
            peel(w, &eta[*field], deriv, &mut comps, true)?;
        }
    }
    comps
        .into_iter()
        .map(|p| Ok(sum(p).canonical()))
        .collect()
}

/// One integration-by-parts peel: moves a derivative off `eta` in the
/// largest direction present, recording the boundary term.
fn peel(
    w: Expr,
    eta: &Expr,
    idx: &MultiIndex,
    comps: &mut [Vec<Expr>],
    positive: bool,
) -> Result<(), JetError> {
    let Some(dir) = idx.max_var() else {
        return Ok(());
    };
    let rest = idx.without(dir).expect("max_var present");
    let boundary = (w.clone() * derivative_multi(eta, &rest)?).canonical();
    comps[dir].push(if positive { boundary } else { -boundary });
    peel(total_derivative(&w, dir)?, eta, &rest, comps, !positive)
}

/// Variational derivative with respect to field `a`: the sum of
/// `(-D)_J (df/du^a_J)`. Annihilates exactly the total divergences.
pub fn euler_operator(f: &Expr, a: usize) -> Result<Expr, JetError> {
    if !f.is_local() {
        return Err(JetError::NonlocalExpression);
    }
    let mut parts = Vec::new();
    for coord in f.field_coords() {
        let JetCoord::Field { field, deriv } = &coord else {
            unreachable!()
        };
        if *field != a {
            continue;
        }
        let v = jet_partial(f, &coord)?;
        if v.is_zero() {
            continue;
        }
        let mut term = derivative_multi(&v, deriv)?;
        if deriv.order() % 2 == 1 {
            term = -term;
        }
        parts.push(term);
    }
    Ok(sum(parts).canonical())
}

/// Largest differentiated field coordinate (by derivative order, then field
/// index, then multi-index) occurring in the expression.
fn top_jet_coord(f: &Expr) -> Option<JetCoord> {
    f.field_coords()
        .into_iter()
        .filter(|c| c.order() >= 1)
        .max_by(|a, b| {
            let (JetCoord::Field { field: fa, deriv: da }, JetCoord::Field { field: fb, deriv: db }) =
                (a, b)
            else {
                unreachable!()
            };
            da.order()
                .cmp(&db.order())
                .then_with(|| fa.cmp(fb))
                .then_with(|| da.cmp(db))
        })
}

/// Finds local `g` with `D_dir g = f`, when `f` is exact within the
/// polynomial-trig class. Decision procedure: Euler-operator test for
/// exactness, then greedy integration by parts from the highest jet
/// coordinate downward.
pub fn extract_antiderivative(f: &Expr, dir: usize) -> Result<Expr, JetError> {
    let f = f.canonical();
    if f.is_zero() {
        return Ok(Expr::zero());
    }
    if !f.is_local() {
        return Err(JetError::NonlocalExpression);
    }
    for a in f.fields() {
        if !euler_operator(&f, a)?.is_zero() {
            return Err(JetError::NotExact);
        }
    }
    let mut work = f.clone();
    let mut parts: Vec<Expr> = Vec::new();
    let mut fuel: u32 = 4096;
    while !work.is_zero() {
        if fuel == 0 {
            return Err(JetError::NotExact);
        }
        fuel -= 1;
        match top_jet_coord(&work) {
            None => {
                if !work.fields().is_empty() {
                    return Err(JetError::NotExact);
                }
                parts.push(integrate_in(&work, &JetCoord::Indep(dir))?);
                work = Expr::zero();
            }
            Some(coord) => {
                let JetCoord::Field { field, deriv } = &coord else {
                    unreachable!()
                };
                let Some(lower_idx) = deriv.without(dir) else {
                    return Err(JetError::NotExact);
                };
                let a1 = jet_partial(&work, &coord)?;
                if a1.coords().contains(&coord) {
                    return Err(JetError::NotExact);
                }
                let lower = JetCoord::Field {
                    field: *field,
                    deriv: lower_idx,
                };
                let piece = integrate_in(&a1, &lower)?;
                work = (work - total_derivative(&piece, dir)?).canonical();
                parts.push(piece);
            }
        }
    }
    let g = sum(parts).canonical();
    // Refuse to return a wrong answer.
    if !canon_eq(&total_derivative(&g, dir)?, &f) {
        return Err(JetError::NotExact);
    }
    Ok(g)
}

/// Antiderivative of `a_expr` with respect to a single jet coordinate,
/// treating all other coordinates as constants. Handles polynomial powers
/// (except the logarithmic `1/v` case) and a single sine/cosine factor with
/// argument linear in the variable.
fn integrate_in(a_expr: &Expr, var: &JetCoord) -> Result<Expr, JetError> {
    let a = a_expr.canonical();
    if a.is_zero() {
        return Ok(Expr::zero());
    }
    let terms: Vec<Expr> = match a.clone() {
        Expr::Sum(ts) => ts,
        other => vec![other],
    };
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        out.push(integrate_term(&term, var)?);
    }
    Ok(sum(out).canonical())
}

fn integrate_term(term: &Expr, var: &JetCoord) -> Result<Expr, JetError> {
    let factors: Vec<Expr> = match term.clone() {
        Expr::Prod(fs) => fs,
        other => vec![other],
    };
    let mut var_power: i64 = 0;
    let mut trig: Option<Expr> = None; // the sin/cos factor containing var
    let mut rest: Vec<Expr> = Vec::new();
    for f in factors {
        let (base, exp) = match f {
            Expr::Pow(b, k) => ((*b).clone(), k as i64),
            other => (other, 1),
        };
        match &base {
            Expr::Coord(c) if c == var => {
                var_power += exp;
                continue;
            }
            _ => {}
        }
        if !base.coords().contains(var) {
            rest.push(if exp == 1 {
                base
            } else {
                Expr::Pow(Box::new(base), exp as i32)
            });
            continue;
        }
        match &base {
            Expr::Sin(_) | Expr::Cos(_) if exp == 1 && trig.is_none() => {
                trig = Some(base);
            }
            _ => return Err(JetError::NotExact),
        }
    }
    let rest = prod(rest);
    match trig {
        None => {
            if var_power == -1 {
                return Err(JetError::NotExact); // logarithm, outside the class
            }
            let new_pow = var_power + 1;
            let coeff = Expr::Const(Rat::one() / crate::expr::rint(new_pow));
            Ok(coeff * rest * Expr::Coord(var.clone()).pow(new_pow as i32))
        }
        Some(t) if var_power == 0 => {
            let (is_sin, arg) = match &t {
                Expr::Sin(a) => (true, (**a).clone()),
                Expr::Cos(a) => (false, (**a).clone()),
                _ => unreachable!(),
            };
            // argument must be linear in var with constant rational slope
            let slope = jet_partial(&arg, var)?;
            let Expr::Const(lambda) = slope else {
                return Err(JetError::NotExact);
            };
            if lambda.is_zero() {
                return Err(JetError::NotExact);
            }
            let inv = Expr::Const(Rat::one() / lambda);
            if is_sin {
                Ok(-(inv * rest * arg.cos()))
            } else {
                Ok(inv * rest * arg.sin())
            }
        }
        Some(_) => Err(JetError::NotExact),
    }
}

fn prod(mut fs: Vec<Expr>) -> Expr {
    match fs.len() {
        0 => Expr::one(),
        1 => fs.pop().unwrap(),
        _ => Expr::Prod(fs),
    }
}

/// Canonical representative of a density modulo total derivatives in the
/// given spatial direction: strips every exact summand by greedy integration
/// by parts, leaving the irreducible residue. Nonlocal input is returned
/// unchanged.
pub fn reduce_modulo_trivial(f: &Expr, dir: usize) -> Expr {
    let f = f.canonical();
    if !f.is_local() {
        return f;
    }
    let mut work = f;
    let mut residue: Vec<Expr> = Vec::new();
    let mut fuel: u32 = 4096;
    while !work.is_zero() {
        if fuel == 0 {
            residue.push(work);
            break;
        }
        fuel -= 1;
        let Some(coord) = top_jet_coord(&work) else {
            // Only order-0 field coordinates and explicit independents left.
            let (field_part, indep_part) = split_field_dependent(&work);
            residue.push(field_part);
            // Pure functions of the independent variables are exact images;
            // drop them when the power rule applies.
            if integrate_in(&indep_part, &JetCoord::Indep(dir)).is_err() {
                residue.push(indep_part);
            }
            break;
        };
        let JetCoord::Field { field, deriv } = &coord else {
            unreachable!()
        };
        let Some(lower_idx) = deriv.without(dir) else {
            // No derivative along `dir`: nothing to strip; set aside every
            // term containing this coordinate.
            let (with, without) = split_containing(&work, &coord);
            residue.push(with);
            work = without;
            continue;
        };
        let lower = JetCoord::Field {
            field: *field,
            deriv: lower_idx,
        };
        let coord_expr = Expr::Coord(coord.clone());
        let (powers, entangled, rest) = powers_of(&work, &coord);
        residue.push(entangled);
        let mut next = rest;
        for (m, a_m) in powers {
            if m == 1 {
                match integrate_in(&a_m, &lower) {
                    Ok(piece) => {
                        // work -= D(piece); the linear term cancels exactly.
                        let d = total_derivative(&piece, dir)
                            .expect("local along spatial direction");
                        let corr = (d - a_m.clone() * coord_expr.clone()).canonical();
                        next = (next - corr).canonical();
                    }
                    Err(_) => {
                        residue.push((a_m * coord_expr.clone()).canonical());
                    }
                }
            } else {
                residue
                    .push((a_m * coord_expr.clone().pow(m as i32)).canonical());
            }
        }
        work = next.canonical();
    }
    sum(residue).canonical()
}

/// Splits a canonical sum into (terms with field dependence, terms without).
fn split_field_dependent(f: &Expr) -> (Expr, Expr) {
    let terms: Vec<Expr> = match f.clone() {
        Expr::Sum(ts) => ts,
        other => vec![other],
    };
    let (with, without): (Vec<Expr>, Vec<Expr>) =
        terms.into_iter().partition(|t| !t.fields().is_empty());
    (sum(with).canonical(), sum(without).canonical())
}

/// Splits a canonical sum into (terms containing `coord`, the rest).
fn split_containing(f: &Expr, coord: &JetCoord) -> (Expr, Expr) {
    let terms: Vec<Expr> = match f.clone() {
        Expr::Sum(ts) => ts,
        other => vec![other],
    };
    let (with, without): (Vec<Expr>, Vec<Expr>) = terms
        .into_iter()
        .partition(|t| t.coords().contains(coord));
    (sum(with).canonical(), sum(without).canonical())
}

/// Groups the terms of `f` by the plain power of `coord` they carry.
/// Returns (power -> cofactor with that power removed, terms where `coord`
/// occurs inside a nonlinear factor, terms free of `coord`).
fn powers_of(f: &Expr, coord: &JetCoord) -> (BTreeMap<i64, Expr>, Expr, Expr) {
    let terms: Vec<Expr> = match f.clone() {
        Expr::Sum(ts) => ts,
        other => vec![other],
    };
    let mut powers: BTreeMap<i64, Vec<Expr>> = BTreeMap::new();
    let mut entangled: Vec<Expr> = Vec::new();
    let mut rest: Vec<Expr> = Vec::new();
    'terms: for term in terms {
        if !term.coords().contains(coord) {
            rest.push(term);
            continue;
        }
        let factors: Vec<Expr> = match term.clone() {
            Expr::Prod(fs) => fs,
            other => vec![other],
        };
        let mut power: i64 = 0;
        let mut cof: Vec<Expr> = Vec::new();
        for fac in factors {
            let (base, exp) = match &fac {
                Expr::Pow(b, k) => ((**b).clone(), *k as i64),
                other => (other.clone(), 1),
            };
            if matches!(&base, Expr::Coord(c) if c == coord) {
                power += exp;
            } else if base.coords().contains(coord) {
                entangled.push(term.clone());
                continue 'terms;
            } else {
                cof.push(fac);
            }
        }
        powers.entry(power).or_default().push(prod(cof));
    }
    (
        powers
            .into_iter()
            .map(|(m, ts)| (m, sum(ts).canonical()))
            .collect(),
        sum(entangled).canonical(),
        sum(rest).canonical(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    const T: usize = 0;
    const X: usize = 1;

    fn u(vars: &[usize]) -> Expr {
        Expr::field(0, vars)
    }

    #[test]
    fn chain_rule_square() {
        // D_x(u^2/2) = u u_x
        let f = u(&[]).pow(2).scale(rat(1, 2));
        let d = total_derivative(&f, X).unwrap();
        assert!(canon_eq(&d, &(u(&[]) * u(&[X]))));
    }

    #[test]
    fn antiderivative_inverse_pair() {
        let g = (u(&[]) * u(&[X])).antid(X);
        let d = total_derivative(&g, X).unwrap();
        assert!(canon_eq(&d, &(u(&[]) * u(&[X]))));
    }

    #[test]
    fn explicit_coordinate_derivative() {
        // D_t(x u_x) = x u_tx
        let f = Expr::indep(X) * u(&[X]);
        let d = total_derivative(&f, T).unwrap();
        assert!(canon_eq(&d, &(Expr::indep(X) * u(&[T, X]))));
    }

    #[test]
    fn antiderivative_blocks_time_derivative() {
        let g = u(&[]).antid(X);
        assert_eq!(
            total_derivative(&g, T),
            Err(JetError::AntiDTimeDerivative {
                antid_dir: X,
                deriv_dir: T
            })
        );
    }

    #[test]
    fn derivatives_commute() {
        let f = u(&[]).pow(3) * u(&[X]) + Expr::indep(X) * u(&[T]).sin();
        let dtx = total_derivative(&total_derivative(&f, T).unwrap(), X).unwrap();
        let dxt = total_derivative(&total_derivative(&f, X).unwrap(), T).unwrap();
        assert!(canon_eq(&dtx, &dxt));
    }

    #[test]
    fn euler_operator_examples() {
        // E_u(u u_x) = 0 (total derivative of u^2/2)
        assert!(euler_operator(&(u(&[]) * u(&[X])), 0).unwrap().is_zero());
        // E_u(u^2/2) = u
        let e = euler_operator(&u(&[]).pow(2).scale(rat(1, 2)), 0).unwrap();
        assert!(canon_eq(&e, &u(&[])));
        // E_u(u_x^2/2) = -u_xx
        let e = euler_operator(&u(&[X]).pow(2).scale(rat(1, 2)), 0).unwrap();
        assert!(canon_eq(&e, &(-u(&[X, X]))));
    }

    #[test]
    fn extract_simple() {
        let g = extract_antiderivative(&(u(&[]) * u(&[X])), X).unwrap();
        assert!(canon_eq(&g, &u(&[]).pow(2).scale(rat(1, 2))));
        let g = extract_antiderivative(&(u(&[X]) * u(&[X, X])), X).unwrap();
        assert!(canon_eq(&g, &u(&[X]).pow(2).scale(rat(1, 2))));
    }

    #[test]
    fn extract_rejects_non_exact() {
        assert_eq!(
            extract_antiderivative(&u(&[X]).pow(2), X),
            Err(JetError::NotExact)
        );
    }

    #[test]
    fn extract_handles_trig_and_explicit_x() {
        // u_x sin(u) = D_x(-cos u)
        let f = u(&[X]) * u(&[]).sin();
        let g = extract_antiderivative(&f, X).unwrap();
        assert!(canon_eq(&g, &-(u(&[]).cos())));
        // u + x u_x = D_x(x u)
        let f = u(&[]) + Expr::indep(X) * u(&[X]);
        let g = extract_antiderivative(&f, X).unwrap();
        assert!(canon_eq(&g, &(Expr::indep(X) * u(&[]))));
    }

    #[test]
    fn reduce_examples() {
        // u^2/2 + u_xx -> u^2/2
        let f = u(&[]).pow(2).scale(rat(1, 2)) + u(&[X, X]);
        let r = reduce_modulo_trivial(&f, X);
        assert!(canon_eq(&r, &u(&[]).pow(2).scale(rat(1, 2))));
        // u_xx -> 0
        assert!(reduce_modulo_trivial(&u(&[X, X]), X).is_zero());
        // u_x^2/2 is irreducible
        let f = u(&[X]).pow(2).scale(rat(1, 2));
        assert!(canon_eq(&reduce_modulo_trivial(&f, X), &f));
        // u_x u_xxx ~ -u_xx^2
        let r = reduce_modulo_trivial(&(u(&[X]) * u(&[X, X, X])), X);
        assert!(canon_eq(&r, &-(u(&[X, X]).pow(2))));
    }

    #[test]
    fn kdv_linearization_matches_operator_form() {
        let sys = crate::models::build_kdv();
        // L(eta) = D_t eta + u_x eta + u D_x eta + D_x^3 eta
        for eta in [u(&[X, X]), u(&[]) * u(&[X]), Expr::indep(X) * u(&[T])] {
            let got = linearize(&sys, &[eta.clone()]).unwrap();
            let want = total_derivative(&eta, T).unwrap()
                + u(&[X]) * eta.clone()
                + u(&[]) * total_derivative(&eta, X).unwrap()
                + derivative_multi(&eta, &MultiIndex::of(&[X, X, X])).unwrap();
            assert!(canon_eq(&got[0], &want));
        }
    }

    #[test]
    fn kdv_adjoint_matches_operator_form() {
        let sys = crate::models::build_kdv();
        // L*(w) = -D_t w - u D_x w - D_x^3 w
        for w in [u(&[X]), u(&[]).pow(2), Expr::indep(T) * u(&[])] {
            let got = adjoint_linearize(&sys, &[w.clone()]).unwrap();
            let want = -(total_derivative(&w, T).unwrap())
                - u(&[]) * total_derivative(&w, X).unwrap()
                - derivative_multi(&w, &MultiIndex::of(&[X, X, X])).unwrap();
            assert!(canon_eq(&got[0], &want));
        }
    }

    #[test]
    fn sine_gordon_is_self_adjoint() {
        let sys = crate::models::build_sine_gordon();
        for w in [u(&[X]), u(&[]) * u(&[X]), u(&[]).sin()] {
            let lin = linearize(&sys, &[w.clone()]).unwrap();
            let adj = adjoint_linearize(&sys, &[w]).unwrap();
            assert!(canon_eq(&lin[0], &adj[0]));
        }
    }

    #[test]
    fn bilinear_identity_holds_offshell() {
        let sys = crate::models::build_kdv();
        let cases = [
            (u(&[]), u(&[X])),
            (u(&[X, X]), u(&[]).pow(2)),
            (Expr::indep(X) * u(&[]), u(&[T]) * u(&[X])),
        ];
        for (w, eta) in cases {
            let current = bilinear_current(&sys, &[w.clone()], &[eta.clone()]).unwrap();
            let lhs = w.clone() * linearize(&sys, &[eta.clone()]).unwrap()[0].clone()
                - eta.clone() * adjoint_linearize(&sys, &[w.clone()]).unwrap()[0].clone();
            let div = total_derivative(&current[0], T).unwrap()
                + total_derivative(&current[1], X).unwrap();
            assert!(canon_eq(&lhs, &div));
        }
    }

    #[test]
    fn kdv_time_component_is_product() {
        // Only u_t enters the t-direction, so C^t = omega * eta.
        let sys = crate::models::build_kdv();
        let w = u(&[]).pow(2);
        let eta = u(&[X]);
        let current = bilinear_current(&sys, &[w.clone()], &[eta.clone()]).unwrap();
        assert!(canon_eq(&current[0], &(w * eta)));
    }
}
