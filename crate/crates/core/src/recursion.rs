//! Recursion operators and the generated hierarchies of adjoint-symmetries
//! and conserved densities for KdV, sine-Gordon and vector mKdV.
//!
//! Operators are chains of primitive steps applied left to right; the
//! formal antiderivative step resolves eagerly through exact extraction and
//! marks the result nonlocal when extraction fails.

use crate::expr::{rat, rint, sum, Expr, Rat};
use crate::jet::{self, JetError};

const X: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecursionError {
    #[error("operator arity does not match the input shape")]
    ArityMismatch,
    #[error("hierarchy step k={k} produced a genuinely nonlocal term")]
    NonlocalHierarchyStep { k: usize },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A primitive step of a recursion operator chain.
#[derive(Clone, Debug)]
pub enum Prim {
    /// Repeated total derivative.
    Deriv(usize, u32),
    /// Pointwise multiplication by a scalar expression.
    Mul(Expr),
    /// Contraction of a vector value with a fixed vector: `v . f`.
    Dot(Vec<Expr>),
    /// Promotion of a scalar value to a vector: `v * g`.
    VecTimes(Vec<Expr>),
    /// Antisymmetric outer product with a fixed vector: `v wedge f`.
    Wedge(Vec<Expr>),
    /// Interior product of a fixed vector against a 2-tensor value,
    /// contracting the first slot: `c -| (a wedge b) = (c.a) b - (c.b) a`.
    Interior(Vec<Expr>),
    /// Formal antiderivative, resolved eagerly by exact extraction.
    AntiDeriv(usize),
}

/// Intermediate value flowing through an operator chain.
#[derive(Clone, Debug)]
pub enum Value {
    Scalar(Expr),
    Vector(Vec<Expr>),
    Matrix(Vec<Vec<Expr>>),
}

impl Value {
    fn map(self, f: &mut impl FnMut(&Expr) -> Result<Expr, RecursionError>) -> Result<Value, RecursionError> {
        Ok(match self {
            Value::Scalar(e) => Value::Scalar(f(&e)?),
            Value::Vector(es) => {
                Value::Vector(es.iter().map(&mut *f).collect::<Result<_, _>>()?)
            }
            Value::Matrix(rows) => Value::Matrix(
                rows.iter()
                    .map(|row| row.iter().map(&mut *f).collect::<Result<_, _>>())
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    fn add(self, other: Value) -> Result<Value, RecursionError> {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar((a + b).canonical())),
            (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => Ok(Value::Vector(
                a.into_iter()
                    .zip(b)
                    .map(|(x, y)| (x + y).canonical())
                    .collect(),
            )),
            _ => Err(RecursionError::ArityMismatch),
        }
    }

    pub fn into_components(self) -> Vec<Expr> {
        match self {
            Value::Scalar(e) => vec![e],
            Value::Vector(es) => es,
            Value::Matrix(rows) => rows.into_iter().flatten().collect(),
        }
    }
}

/// A recursion operator: a sum of primitive chains.
#[derive(Clone, Debug)]
pub struct RecursionOperator {
    pub name: String,
    pub chains: Vec<Vec<Prim>>,
    /// `None` for scalar operators, `Some(n)` for vector ones.
    pub vector_arity: Option<usize>,
}

impl RecursionOperator {
    /// Applies the operator. The boolean is false when any antiderivative
    /// step failed to resolve and a formal wrapper was kept.
    pub fn apply(&self, input: &Value) -> Result<(Value, bool), RecursionError> {
        match (self.vector_arity, input) {
            (None, Value::Scalar(_)) => {}
            (Some(n), Value::Vector(v)) if v.len() == n => {}
            _ => return Err(RecursionError::ArityMismatch),
        }
        let mut local = true;
        let mut acc: Option<Value> = None;
        for chain in &self.chains {
            let mut value = input.clone();
            for prim in chain {
                value = apply_prim(prim, value, &mut local)?;
            }
            acc = Some(match acc {
                None => value,
                Some(prev) => prev.add(value)?,
            });
        }
        Ok((acc.expect("operator has at least one chain"), local))
    }

    /// Applies the operator, requiring every antiderivative to resolve.
    pub fn apply_local(&self, input: &Value, k: usize) -> Result<Value, RecursionError> {
        let (value, local) = self.apply(input)?;
        if local {
            Ok(value)
        } else {
            Err(RecursionError::NonlocalHierarchyStep { k })
        }
    }
}

fn apply_prim(prim: &Prim, value: Value, local: &mut bool) -> Result<Value, RecursionError> {
    match prim {
        Prim::Deriv(dir, power) => value.map(&mut |e| {
            let mut cur = e.clone();
            for _ in 0..*power {
                cur = jet::total_derivative(&cur, *dir)?;
            }
            Ok(cur)
        }),
        Prim::Mul(m) => value.map(&mut |e| Ok((m.clone() * e.clone()).canonical())),
        Prim::Dot(v) => match value {
            Value::Vector(es) if es.len() == v.len() => Ok(Value::Scalar(
                sum(v.iter().zip(&es).map(|(a, b)| a.clone() * b.clone())).canonical(),
            )),
            _ => Err(RecursionError::ArityMismatch),
        },
        Prim::VecTimes(v) => match value {
            Value::Scalar(g) => Ok(Value::Vector(
                v.iter().map(|a| (a.clone() * g.clone()).canonical()).collect(),
            )),
            _ => Err(RecursionError::ArityMismatch),
        },
        Prim::Wedge(v) => match value {
            Value::Vector(es) if es.len() == v.len() => {
                let n = v.len();
                Ok(Value::Matrix(
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| {
                                    (v[i].clone() * es[j].clone()
                                        - v[j].clone() * es[i].clone())
                                    .canonical()
                                })
                                .collect()
                        })
                        .collect(),
                ))
            }
            _ => Err(RecursionError::ArityMismatch),
        },
        Prim::Interior(c) => match value {
            Value::Matrix(rows) if rows.len() == c.len() => {
                let n = c.len();
                Ok(Value::Vector(
                    (0..n)
                        .map(|j| {
                            sum((0..n).map(|i| c[i].clone() * rows[i][j].clone()))
                                .canonical()
                        })
                        .collect(),
                ))
            }
            _ => Err(RecursionError::ArityMismatch),
        },
        Prim::AntiDeriv(dir) => value.map(&mut |e| {
            match jet::extract_antiderivative(e, *dir) {
                Ok(g) => Ok(g),
                Err(JetError::NotExact) => {
                    *local = false;
                    Ok(e.clone().antid(*dir).canonical())
                }
                Err(other) => Err(other.into()),
            }
        }),
    }
}

fn u(vars: &[usize]) -> Expr {
    Expr::field(0, vars)
}

/// Adjoint of the KdV recursion operator:
/// `D_x^2 + u/3 + (1/3) D_x^{-1} (u D_x .)`.
pub fn kdv_adjoint_recursion() -> RecursionOperator {
    RecursionOperator {
        name: "kdv-adjoint".into(),
        chains: vec![
            vec![Prim::Deriv(X, 2)],
            vec![Prim::Mul(u(&[]).scale(rat(1, 3)).canonical())],
            vec![
                Prim::Deriv(X, 1),
                Prim::Mul(u(&[])),
                Prim::AntiDeriv(X),
                Prim::Mul(Expr::ratio(1, 3)),
            ],
        ],
        vector_arity: None,
    }
}

/// The KdV recursion operator `D_x^2 + (2/3) u + (1/3) u_x D_x^{-1}`.
pub fn kdv_recursion() -> RecursionOperator {
    RecursionOperator {
        name: "kdv".into(),
        chains: vec![
            vec![Prim::Deriv(X, 2)],
            vec![Prim::Mul(u(&[]).scale(rat(2, 3)).canonical())],
            vec![
                Prim::AntiDeriv(X),
                Prim::Mul(u(&[X]).scale(rat(1, 3)).canonical()),
            ],
        ],
        vector_arity: None,
    }
}

/// The sine-Gordon recursion operator `D_x^2 + u_x D_x^{-1} (u_x D_x .)`.
pub fn sg_recursion() -> RecursionOperator {
    RecursionOperator {
        name: "sine-gordon".into(),
        chains: vec![
            vec![Prim::Deriv(X, 2)],
            vec![
                Prim::Deriv(X, 1),
                Prim::Mul(u(&[X])),
                Prim::AntiDeriv(X),
                Prim::Mul(u(&[X])),
            ],
        ],
        vector_arity: None,
    }
}

/// The sine-Gordon recursion operator on conserved densities:
/// `u_x^2 D_x u_x^{-2} D_x + u_x^2/2 + D_x^{-1}((u_xxx/u_x + u_x^2/2) D_x .)`.
pub fn sg_density_recursion() -> RecursionOperator {
    RecursionOperator {
        name: "sine-gordon-density".into(),
        chains: vec![
            vec![
                Prim::Deriv(X, 1),
                Prim::Mul(u(&[X]).pow(-2)),
                Prim::Deriv(X, 1),
                Prim::Mul(u(&[X]).pow(2)),
            ],
            vec![Prim::Mul(u(&[X]).pow(2).scale(rat(1, 2)).canonical())],
            vec![
                Prim::Deriv(X, 1),
                Prim::Mul(
                    (u(&[X, X, X]) * u(&[X]).pow(-1)
                        + u(&[X]).pow(2).scale(rat(1, 2)))
                    .canonical(),
                ),
                Prim::AntiDeriv(X),
            ],
        ],
        vector_arity: None,
    }
}

fn vec_u(n: usize, vars: &[usize]) -> Vec<Expr> {
    (0..n).map(|i| Expr::field(i, vars)).collect()
}

/// Adjoint of the SO(N)-invariant vector mKdV recursion operator:
/// `D_x^2 + u -| (u ^ .) + u_x -| D_x^{-1}(u ^ .) + u D_x^{-1}(u . D_x .)`.
pub fn mkdv_adjoint_recursion(n: usize) -> RecursionOperator {
    RecursionOperator {
        name: "mkdv-adjoint".into(),
        chains: vec![
            vec![Prim::Deriv(X, 2)],
            vec![Prim::Wedge(vec_u(n, &[])), Prim::Interior(vec_u(n, &[]))],
            vec![
                Prim::Wedge(vec_u(n, &[])),
                Prim::AntiDeriv(X),
                Prim::Interior(vec_u(n, &[X])),
            ],
            vec![
                Prim::Deriv(X, 1),
                Prim::Dot(vec_u(n, &[])),
                Prim::AntiDeriv(X),
                Prim::VecTimes(vec_u(n, &[])),
            ],
        ],
        vector_arity: Some(n),
    }
}

/// The SO(N)-invariant vector mKdV recursion operator:
/// `D_x^2 + u.u + u_x D_x^{-1}(u . .) - u -| D_x^{-1}(u_x ^ .)`.
pub fn mkdv_recursion(n: usize) -> RecursionOperator {
    let uu = sum((0..n).map(|i| Expr::field(i, &[]).pow(2))).canonical();
    RecursionOperator {
        name: "mkdv".into(),
        chains: vec![
            vec![Prim::Deriv(X, 2)],
            vec![Prim::Mul(uu)],
            vec![
                Prim::Dot(vec_u(n, &[])),
                Prim::AntiDeriv(X),
                Prim::VecTimes(vec_u(n, &[X])),
            ],
            vec![
                Prim::Wedge(vec_u(n, &[X])),
                Prim::AntiDeriv(X),
                Prim::Interior(vec_u(n, &[])),
                Prim::Mul(Expr::int(-1)),
            ],
        ],
        vector_arity: Some(n),
    }
}

/// One member of a hierarchy: the generator, the reduced conserved density
/// and the scaling weight of the conserved integral.
#[derive(Clone, Debug)]
pub struct HierarchyEntry {
    pub k: usize,
    /// Components of the generator (adjoint-symmetry or symmetry).
    pub generator: Vec<Expr>,
    /// Reduced conserved density.
    pub density: Expr,
    pub weight: Rat,
    pub local: bool,
}

/// KdV hierarchy: generators `(R*)^k u`, densities `3/(3+2k)` times the
/// next generator, reduced modulo trivial; weights `-(3+2k)`.
pub fn kdv_hierarchy(k_max: usize) -> Result<Vec<HierarchyEntry>, RecursionError> {
    let op = kdv_adjoint_recursion();
    let mut gen = Value::Scalar(u(&[]));
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let next = op.apply_local(&gen, k + 1)?;
        let Value::Scalar(next_expr) = &next else {
            unreachable!()
        };
        let density_raw = next_expr
            .clone()
            .scale(rat(3, 3 + 2 * k as i64))
            .canonical();
        let density = jet::reduce_modulo_trivial(&density_raw, X);
        out.push(HierarchyEntry {
            k,
            generator: gen.clone().into_components(),
            density,
            weight: rint(-(3 + 2 * k as i64)),
            local: true,
        });
        gen = next;
    }
    Ok(out)
}

/// Sine-Gordon hierarchy: generators `R^k u_x`, densities
/// `(-1/(1+2k)) Phi^t_(k)` with `Phi^t_(k) = -D_x^{-1}(u_x D_x eta^(k))`;
/// weights `-(1+2k)`.
pub fn sg_hierarchy(k_max: usize) -> Result<Vec<HierarchyEntry>, RecursionError> {
    let op = sg_recursion();
    let mut gen = u(&[X]);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let integrand = (u(&[X]) * jet::total_derivative(&gen, X)?).canonical();
        let resolved = jet::extract_antiderivative(&integrand, X)
            .map_err(|_| RecursionError::NonlocalHierarchyStep { k })?;
        // Psi = (-1/(1+2k)) * Phi, Phi = -resolved
        let density_raw = resolved.scale(rat(1, 1 + 2 * k as i64)).canonical();
        let density = jet::reduce_modulo_trivial(&density_raw, X);
        out.push(HierarchyEntry {
            k,
            generator: vec![gen.clone()],
            density,
            weight: rint(-(1 + 2 * k as i64)),
            local: true,
        });
        if k < k_max {
            let next = op.apply_local(&Value::Scalar(gen), k + 1)?;
            let Value::Scalar(e) = next else { unreachable!() };
            gen = e;
        }
    }
    Ok(out)
}

/// Density route through the sine-Gordon density recursion operator:
/// `Psi_(k) = ((2k-1)/(2k+1)) R_hat(Psi_(k-1))`, starting from `Psi_(0)`.
pub fn sg_density_route(k_max: usize) -> Result<Vec<Expr>, RecursionError> {
    let op = sg_density_recursion();
    let mut densities = vec![u(&[X]).pow(2).scale(rat(1, 2)).canonical()];
    for k in 1..=k_max {
        let prev = densities.last().unwrap().clone();
        let stepped = op.apply_local(&Value::Scalar(prev), k)?;
        let Value::Scalar(e) = stepped else { unreachable!() };
        let kk = k as i64;
        densities.push(e.scale(rat(2 * kk - 1, 2 * kk + 1)).canonical());
    }
    Ok(densities)
}

/// Vector mKdV hierarchy: generators `(R*)^k u`, densities
/// `(1/(2k+1)) D_x^{-1}(u . D_x omega^(k))`; weights `-(1+2k)`.
pub fn mkdv_hierarchy(n: usize, k_max: usize) -> Result<Vec<HierarchyEntry>, RecursionError> {
    if n < 1 {
        return Err(RecursionError::ArityMismatch);
    }
    let op = mkdv_adjoint_recursion(n);
    let mut gen: Vec<Expr> = vec_u(n, &[]);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut parts = Vec::with_capacity(n);
        for i in 0..n {
            parts.push(Expr::field(i, &[]) * jet::total_derivative(&gen[i], X)?);
        }
        let integrand = sum(parts).canonical();
        let resolved = jet::extract_antiderivative(&integrand, X)
            .map_err(|_| RecursionError::NonlocalHierarchyStep { k })?;
        let density_raw = resolved.scale(rat(1, 2 * k as i64 + 1)).canonical();
        let density = jet::reduce_modulo_trivial(&density_raw, X);
        out.push(HierarchyEntry {
            k,
            generator: gen.clone(),
            density,
            weight: rint(-(1 + 2 * k as i64)),
            local: true,
        });
        if k < k_max {
            let next = op.apply_local(&Value::Vector(gen), k + 1)?;
            let Value::Vector(es) = next else { unreachable!() };
            gen = es;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::canon_eq;

    #[test]
    fn kdv_adjoint_first_step() {
        let op = kdv_adjoint_recursion();
        let (v, local) = op.apply(&Value::Scalar(u(&[]))).unwrap();
        assert!(local);
        let Value::Scalar(e) = v else { panic!() };
        let want = (u(&[X, X]) + u(&[]).pow(2).scale(rat(1, 2))).canonical();
        assert!(canon_eq(&e, &want));
    }

    #[test]
    fn sg_first_step() {
        let op = sg_recursion();
        let (v, local) = op.apply(&Value::Scalar(u(&[X]))).unwrap();
        assert!(local);
        let Value::Scalar(e) = v else { panic!() };
        let want = (u(&[X, X, X]) + u(&[X]).pow(3).scale(rat(1, 2))).canonical();
        assert!(canon_eq(&e, &want));
    }

    #[test]
    fn mkdv_adjoint_first_step_any_n() {
        for n in [1usize, 2, 3] {
            let op = mkdv_adjoint_recursion(n);
            let (v, local) = op.apply(&Value::Vector(vec_u(n, &[]))).unwrap();
            assert!(local, "n={n}");
            let Value::Vector(es) = v else { panic!() };
            let uu = sum((0..n).map(|i| Expr::field(i, &[]).pow(2))).canonical();
            for i in 0..n {
                let want = (Expr::field(i, &[X, X])
                    + (uu.clone() * Expr::field(i, &[])).scale(rat(1, 2)))
                .canonical();
                assert!(canon_eq(&es[i], &want), "n={n} component {i}");
            }
        }
    }

    #[test]
    fn kdv_densities() {
        let entries = kdv_hierarchy(1).unwrap();
        assert!(canon_eq(
            &entries[0].density,
            &u(&[]).pow(2).scale(rat(1, 2))
        ));
        assert_eq!(entries[0].weight, rint(-3));
        assert_eq!(entries[1].weight, rint(-5));
    }

    #[test]
    fn sg_density_k0() {
        let entries = sg_hierarchy(0).unwrap();
        assert!(canon_eq(
            &entries[0].density,
            &u(&[X]).pow(2).scale(rat(1, 2))
        ));
    }

    #[test]
    fn sg_routes_agree_exactly_at_k1() {
        let direct = sg_hierarchy(1).unwrap();
        let hat = sg_density_route(1).unwrap();
        let reduced_hat = jet::reduce_modulo_trivial(&hat[1], X);
        assert!(canon_eq(&direct[1].density, &reduced_hat));
    }

    #[test]
    fn mkdv_density_k0() {
        for n in [1usize, 2] {
            let entries = mkdv_hierarchy(n, 0).unwrap();
            let uu = sum((0..n).map(|i| Expr::field(i, &[]).pow(2))).canonical();
            assert!(canon_eq(&entries[0].density, &uu.scale(rat(1, 2))));
        }
    }

    #[test]
    fn weight_ladder_is_minus_two_per_step() {
        let sys = crate::models::build_kdv();
        let entries = kdv_hierarchy(2).unwrap();
        let mut prev: Option<Rat> = None;
        for e in &entries {
            let w = crate::scaling::homogeneity_weight(&e.generator[0], &sys).unwrap();
            if let Some(p) = prev {
                assert_eq!(w.clone() - p, rint(-2));
            }
            prev = Some(w);
        }
    }
}
