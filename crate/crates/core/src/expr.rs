//! Exact symbolic expressions over jet space.
//!
//! Jet coordinates treat independent variables, field components and all
//! their partial derivatives as independent symbols. Expressions are
//! polynomial-trigonometric in these coordinates with exact rational
//! coefficients, plus a formal antiderivative node for nonlocal terms.
//! [`Expr::canonical`] maps every expression to a unique normal form, so
//! structural equality of canonical forms decides mathematical equality
//! (within the polynomial-trig class, modulo `sin^2 + cos^2 = 1`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Signed, Zero};

/// Exact rational scalar used throughout the symbolic core.
pub type Rat = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Derivative multi-index over the independent variables.
///
/// Mixed partials commute, so only the count per variable is stored;
/// two multi-indices with equal counts are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: BTreeMap<usize, u32>,
}

impl MultiIndex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of(vars: &[usize]) -> Self {
        let mut m = Self::default();
        for &v in vars {
            m.bump(v);
        }
        m
    }

    pub fn bump(&mut self, var: usize) {
        *self.counts.entry(var).or_insert(0) += 1;
    }

    pub fn with(&self, var: usize) -> Self {
        let mut m = self.clone();
        m.bump(var);
        m
    }

    /// Removes one derivative in `var`; `None` if the count is zero.
    pub fn without(&self, var: usize) -> Option<Self> {
        let mut m = self.clone();
        match m.counts.get_mut(&var) {
            Some(c) if *c > 1 => {
                *c -= 1;
                Some(m)
            }
            Some(_) => {
                m.counts.remove(&var);
                Some(m)
            }
            None => None,
        }
    }

    pub fn count(&self, var: usize) -> u32 {
        self.counts.get(&var).copied().unwrap_or(0)
    }

    pub fn order(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// True when every count of `self` is <= the count in `other`.
    pub fn divides(&self, other: &Self) -> bool {
        self.counts.iter().all(|(v, c)| other.count(*v) >= *c)
    }

    /// Componentwise difference `self - other`; caller guarantees `other.divides(self)`.
    pub fn minus(&self, other: &Self) -> Self {
        let mut m = Self::default();
        for (&v, &c) in &self.counts {
            let d = c - other.count(v);
            if d > 0 {
                m.counts.insert(v, d);
            }
        }
        m
    }

    /// Largest variable index carrying a derivative, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    /// Variables in ascending order, one entry per derivative.
    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (&v, &c) in &self.counts {
            for _ in 0..c {
                out.push(v);
            }
        }
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded, then lexicographic on counts in ascending variable order.
        self.order().cmp(&other.order()).then_with(|| {
            let vars: BTreeSet<usize> = self
                .counts
                .keys()
                .chain(other.counts.keys())
                .copied()
                .collect();
            for v in vars {
                match self.count(v).cmp(&other.count(v)) {
                    Ordering::Equal => {}
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single jet-space coordinate: an independent variable or a field
/// component differentiated by a multi-index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum JetCoord {
    Indep(usize),
    Field { field: usize, deriv: MultiIndex },
}

impl JetCoord {
    pub fn field(field: usize, vars: &[usize]) -> Self {
        JetCoord::Field {
            field,
            deriv: MultiIndex::of(vars),
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            JetCoord::Indep(_) => 0,
            JetCoord::Field { deriv, .. } => deriv.order(),
        }
    }
}

impl Ord for JetCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (JetCoord::Indep(a), JetCoord::Indep(b)) => a.cmp(b),
            (JetCoord::Indep(_), JetCoord::Field { .. }) => Ordering::Less,
            (JetCoord::Field { .. }, JetCoord::Indep(_)) => Ordering::Greater,
            (
                JetCoord::Field { field: fa, deriv: da },
                JetCoord::Field { field: fb, deriv: db },
            ) => fa.cmp(fb).then_with(|| da.cmp(db)),
        }
    }
}

impl PartialOrd for JetCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Symbolic expression tree.
///
/// Constructors build raw trees; call [`Expr::canonical`] to normalize.
/// All operations in the rest of the crate return canonical expressions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Rat),
    Coord(JetCoord),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// Formal antiderivative in the given independent direction.
    AntiD(usize, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rat::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rat::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(rint(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(rat(n, d))
    }

    pub fn coord(c: JetCoord) -> Expr {
        Expr::Coord(c)
    }

    pub fn indep(var: usize) -> Expr {
        Expr::Coord(JetCoord::Indep(var))
    }

    pub fn field(field: usize, vars: &[usize]) -> Expr {
        Expr::Coord(JetCoord::field(field, vars))
    }

    pub fn pow(self, exp: i32) -> Expr {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn antid(self, dir: usize) -> Expr {
        Expr::AntiD(dir, Box::new(self))
    }

    pub fn scale(self, c: Rat) -> Expr {
        Expr::Prod(vec![Expr::Const(c), self])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    /// True when the expression contains no formal antiderivative.
    pub fn is_local(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Coord(_) => true,
            Expr::Sum(es) | Expr::Prod(es) => es.iter().all(Expr::is_local),
            Expr::Pow(b, _) => b.is_local(),
            Expr::Sin(a) | Expr::Cos(a) => a.is_local(),
            Expr::AntiD(..) => false,
        }
    }

    /// All jet coordinates occurring in the expression.
    pub fn coords(&self) -> BTreeSet<JetCoord> {
        let mut out = BTreeSet::new();
        self.visit_coords(&mut |c| {
            out.insert(c.clone());
        });
        out
    }

    /// Field coordinates only.
    pub fn field_coords(&self) -> BTreeSet<JetCoord> {
        self.coords()
            .into_iter()
            .filter(|c| matches!(c, JetCoord::Field { .. }))
            .collect()
    }

    /// Distinct field indices occurring in the expression.
    pub fn fields(&self) -> BTreeSet<usize> {
        self.coords()
            .iter()
            .filter_map(|c| match c {
                JetCoord::Field { field, .. } => Some(*field),
                _ => None,
            })
            .collect()
    }

    /// Maximum derivative order over all field coordinates.
    pub fn jet_order(&self) -> u32 {
        self.coords().iter().map(JetCoord::order).max().unwrap_or(0)
    }

    fn visit_coords(&self, f: &mut impl FnMut(&JetCoord)) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(c) => f(c),
            Expr::Sum(es) | Expr::Prod(es) => {
                for e in es {
                    e.visit_coords(f);
                }
            }
            Expr::Pow(b, _) => b.visit_coords(f),
            Expr::Sin(a) | Expr::Cos(a) => a.visit_coords(f),
            Expr::AntiD(_, g) => g.visit_coords(f),
        }
    }

    /// The unique canonical form. Idempotent and value-preserving.
    pub fn canonical(&self) -> Expr {
        Poly::of(self).to_expr()
    }

    /// Simultaneous substitution of jet coordinates, then canonicalization.
    pub fn substitute(&self, rules: &BTreeMap<JetCoord, Expr>) -> Expr {
        self.substitute_raw(rules).canonical()
    }

    fn substitute_raw(&self, rules: &BTreeMap<JetCoord, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Coord(c) => match rules.get(c) {
                Some(r) => r.clone(),
                None => self.clone(),
            },
            Expr::Sum(es) => Expr::Sum(es.iter().map(|e| e.substitute_raw(rules)).collect()),
            Expr::Prod(es) => Expr::Prod(es.iter().map(|e| e.substitute_raw(rules)).collect()),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.substitute_raw(rules)), *k),
            Expr::Sin(a) => Expr::Sin(Box::new(a.substitute_raw(rules))),
            Expr::Cos(a) => Expr::Cos(Box::new(a.substitute_raw(rules))),
            Expr::AntiD(d, g) => Expr::AntiD(*d, Box::new(g.substitute_raw(rules))),
        }
    }

    /// Floating-point evaluation of a local expression.
    pub fn eval(&self, assignment: &BTreeMap<JetCoord, f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(rat_to_f64(c)),
            Expr::Coord(c) => assignment
                .get(c)
                .copied()
                .ok_or_else(|| EvalError::UnassignedCoordinate(format!("{c:?}"))),
            Expr::Sum(es) => es.iter().try_fold(0.0, |acc, e| Ok(acc + e.eval(assignment)?)),
            Expr::Prod(es) => es.iter().try_fold(1.0, |acc, e| Ok(acc * e.eval(assignment)?)),
            Expr::Pow(b, k) => {
                let v = b.eval(assignment)?;
                if *k < 0 && v == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(v.powi(*k))
            }
            Expr::Sin(a) => Ok(a.eval(assignment)?.sin()),
            Expr::Cos(a) => Ok(a.eval(assignment)?.cos()),
            Expr::AntiD(..) => Err(EvalError::NonlocalExpression),
        }
    }
}

fn rat_to_f64(c: &Rat) -> f64 {
    let num = c.numer();
    let den = c.denom();
    // Good enough for spot checks; exact arithmetic never goes through f64.
    bigint_to_f64(num) / bigint_to_f64(den)
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    n.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unassigned jet coordinate {0}")]
    UnassignedCoordinate(String),
    #[error("cannot numerically evaluate a nonlocal expression")]
    NonlocalExpression,
    #[error("division by zero")]
    DivisionByZero,
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Prod(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Prod(vec![Expr::int(-1), self])
    }
}

/// Sum a list of expressions without canonicalizing.
pub fn sum(es: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::Sum(es.into_iter().collect())
}

/// Multiply a list of expressions without canonicalizing.
pub fn prod(es: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::Prod(es.into_iter().collect())
}

/// True when `a` and `b` are mathematically equal (canonical forms match).
pub fn canon_eq(a: &Expr, b: &Expr) -> bool {
    (a.clone() - b.clone()).canonical().is_zero()
}

// ---------------------------------------------------------------------------
// Canonical polynomial form
// ---------------------------------------------------------------------------

/// Multiplicative atom of a canonical monomial. Inner expressions are
/// themselves canonical.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Coord(JetCoord),
    Sin(Expr),
    Cos(Expr),
    AntiD(usize, Expr),
    /// A multi-term base raised to a negative power, kept monic.
    SumPow(Expr),
}

impl Atom {
    fn to_expr(&self) -> Expr {
        match self {
            Atom::Coord(c) => Expr::Coord(c.clone()),
            Atom::Sin(a) => Expr::Sin(Box::new(a.clone())),
            Atom::Cos(a) => Expr::Cos(Box::new(a.clone())),
            Atom::AntiD(d, g) => Expr::AntiD(*d, Box::new(g.clone())),
            Atom::SumPow(b) => b.clone(),
        }
    }
}

pub(crate) type Monomial = Vec<(Atom, i32)>;

/// Expanded sum-of-monomials with merged like terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly::default()
    }

    pub(crate) fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub(crate) fn constant(c: Rat) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    fn atom(a: Atom) -> Poly {
        let mut p = Poly::zero();
        p.add_term(vec![(a, 1)], Rat::one());
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, mono: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub(crate) fn add(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    fn scaled(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut p = Poly::zero();
        for (m, k) in &self.terms {
            p.add_term(m.clone(), k.clone() * c.clone());
        }
        p
    }

    fn neg(&self) -> Poly {
        self.scaled(&-Rat::one())
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let merged = merge_factors(ma, mb);
                out.add(term_poly(ca.clone() * cb.clone(), merged));
            }
        }
        out
    }

    fn pow_nonneg(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Canonical expansion of an arbitrary expression tree.
    pub(crate) fn of(e: &Expr) -> Poly {
        match e {
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Coord(c) => Poly::atom(Atom::Coord(c.clone())),
            Expr::Sum(es) => {
                let mut p = Poly::zero();
                for e in es {
                    p.add(Poly::of(e));
                }
                p
            }
            Expr::Prod(es) => {
                let mut p = Poly::one();
                for e in es {
                    if p.is_zero() {
                        return p;
                    }
                    p = p.mul(&Poly::of(e));
                }
                p
            }
            Expr::Pow(b, k) => poly_int_pow(&Poly::of(b), *k),
            Expr::Sin(a) => {
                let pa = Poly::of(a);
                if pa.is_zero() {
                    return Poly::zero();
                }
                let (negated, arg) = normalize_sign(pa);
                let p = Poly::atom(Atom::Sin(arg));
                if negated {
                    p.neg()
                } else {
                    p
                }
            }
            Expr::Cos(a) => {
                let pa = Poly::of(a);
                if pa.is_zero() {
                    return Poly::one();
                }
                let (_, arg) = normalize_sign(pa);
                Poly::atom(Atom::Cos(arg))
            }
            Expr::AntiD(dir, g) => {
                // The formal antiderivative is linear: split over terms and
                // pull rational coefficients out, keeping monic integrands.
                let pg = Poly::of(g);
                let mut out = Poly::zero();
                for (mono, c) in &pg.terms {
                    let inner = Poly::single(Rat::one(), mono.clone()).to_expr();
                    out.add(Poly::atom(Atom::AntiD(*dir, inner)).scaled(c));
                }
                out
            }
        }
    }

    fn single(c: Rat, mono: Monomial) -> Poly {
        let mut p = Poly::zero();
        p.add_term(mono, c);
        p
    }

    /// Deterministic conversion back to an expression tree.
    pub(crate) fn to_expr(&self) -> Expr {
        if self.terms.is_empty() {
            return Expr::zero();
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (mono, c) in &self.terms {
            terms.push(term_expr(c, mono));
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        }
    }
}

fn term_expr(c: &Rat, mono: &Monomial) -> Expr {
    let mut factors = Vec::new();
    for (atom, exp) in mono {
        let base = atom.to_expr();
        if *exp == 1 {
            factors.push(base);
        } else {
            factors.push(Expr::Pow(Box::new(base), *exp));
        }
    }
    if factors.is_empty() {
        Expr::Const(c.clone())
    } else if c.is_one() {
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Prod(factors)
        }
    } else {
        let mut all = Vec::with_capacity(factors.len() + 1);
        all.push(Expr::Const(c.clone()));
        all.extend(factors);
        Expr::Prod(all)
    }
}

/// Merge two sorted factor lists, adding exponents and dropping zeros.
fn merge_factors(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some((fa, ea)), Some((fb, eb))) => match fa.cmp(fb) {
                Ordering::Less => {
                    out.push((fa.clone(), *ea));
                    ia.next();
                }
                Ordering::Greater => {
                    out.push((fb.clone(), *eb));
                    ib.next();
                }
                Ordering::Equal => {
                    let e = ea + eb;
                    if e != 0 {
                        out.push((fa.clone(), e));
                    }
                    ia.next();
                    ib.next();
                }
            },
            (Some(_), None) => {
                out.extend(ia.cloned());
                break;
            }
            (None, Some(_)) => {
                out.extend(ib.cloned());
                break;
            }
            (None, None) => break,
        }
    }
    out
}

/// Normalize a raw term: expand positive powers of multi-term bases and
/// rewrite `cos^2 f -> 1 - sin^2 f` to fixpoint.
fn term_poly(c: Rat, mono: Monomial) -> Poly {
    if c.is_zero() {
        return Poly::zero();
    }
    if let Some(pos) = mono
        .iter()
        .position(|(a, e)| matches!(a, Atom::SumPow(_)) && *e > 0)
    {
        let mut rest = mono.clone();
        let (atom, exp) = rest.remove(pos);
        let base = match atom {
            Atom::SumPow(b) => b,
            _ => unreachable!(),
        };
        let expanded = Poly::of(&base).pow_nonneg(exp as u32);
        return term_poly(c, rest).mul(&expanded);
    }
    if let Some(pos) = mono
        .iter()
        .position(|(a, e)| matches!(a, Atom::Cos(_)) && *e >= 2)
    {
        let mut rest = mono.clone();
        let (atom, exp) = rest.remove(pos);
        let arg = match atom {
            Atom::Cos(a) => a,
            _ => unreachable!(),
        };
        let half = (exp / 2) as u32;
        if exp % 2 == 1 {
            rest = merge_factors(&rest, &vec![(Atom::Cos(arg.clone()), 1)]);
        }
        // 1 - sin^2
        let mut pyth = Poly::one();
        pyth.add(Poly::single(
            -Rat::one(),
            vec![(Atom::Sin(arg), 2)],
        ));
        return term_poly(c, rest).mul(&pyth.pow_nonneg(half));
    }
    Poly::single(c, mono)
}

fn poly_int_pow(p: &Poly, k: i32) -> Poly {
    if k == 0 {
        return Poly::one();
    }
    if p.is_zero() {
        if k > 0 {
            return Poly::zero();
        }
        panic!("canonicalization: inverse of the zero expression");
    }
    if p.terms.len() == 1 {
        let (mono, c) = p.terms.iter().next().unwrap();
        let mut raised: Monomial = Vec::with_capacity(mono.len());
        for (a, e) in mono {
            let ne = e.checked_mul(k).expect("exponent overflow");
            if ne != 0 {
                raised.push((a.clone(), ne));
            }
        }
        let coeff = rat_int_pow(c, k);
        return term_poly(coeff, raised);
    }
    if k > 0 {
        return p.pow_nonneg(k as u32);
    }
    // Multi-term base to a negative power: keep as a monic SumPow atom.
    let lead = p.terms.values().next().unwrap().clone();
    let monic = p.scaled(&(Rat::one() / lead.clone()));
    let base = monic.to_expr();
    term_poly(rat_int_pow(&lead, k), vec![(Atom::SumPow(base), k)])
}

fn rat_int_pow(c: &Rat, k: i32) -> Rat {
    if k >= 0 {
        num::pow::pow(c.clone(), k as usize)
    } else {
        Rat::one() / num::pow::pow(c.clone(), (-k) as usize)
    }
}

/// Splits a leading minus sign off a nonzero polynomial; returns the
/// (possibly negated) canonical expression of the argument.
fn normalize_sign(p: Poly) -> (bool, Expr) {
    let lead = p.terms.values().next().unwrap();
    if lead.is_negative() {
        (true, p.neg().to_expr())
    } else {
        (false, p.to_expr())
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn u(vars: &[usize]) -> Expr {
        Expr::field(0, vars)
    }

    const T: usize = 0;
    const X: usize = 1;

    #[test]
    fn additive_identity_collapses() {
        // u + 0*u_x -> u
        let e = u(&[]) + Expr::zero() * u(&[X]);
        assert_eq!(e.canonical(), u(&[]));
    }

    #[test]
    fn commutativity_cancels() {
        let e = u(&[]) * u(&[X]) - u(&[X]) * u(&[]);
        assert!(e.canonical().is_zero());
    }

    #[test]
    fn pythagorean_rewrite() {
        let e = u(&[]).cos().pow(2) + u(&[]).sin().pow(2);
        assert_eq!(e.canonical(), Expr::one());
    }

    #[test]
    fn cos_odd_power_keeps_one_cos() {
        let e = u(&[]).cos().pow(3);
        let c = e.canonical();
        // cos^3 = cos - sin^2 cos
        let expect =
            (u(&[]).cos() - u(&[]).sin().pow(2) * u(&[]).cos()).canonical();
        assert_eq!(c, expect);
    }

    #[test]
    fn canonical_is_idempotent() {
        let e = (u(&[]) + u(&[X])) * (u(&[]) - u(&[X])) + u(&[X]).pow(2);
        let c1 = e.canonical();
        let c2 = c1.canonical();
        assert_eq!(c1, c2);
        assert_eq!(c1, u(&[]).pow(2).canonical());
    }

    #[test]
    fn negative_powers_merge() {
        // u_x^2 * u_x^-1 -> u_x
        let e = u(&[X]).pow(2) * u(&[X]).pow(-1);
        assert_eq!(e.canonical(), u(&[X]));
    }

    #[test]
    fn sum_negative_power_is_monic() {
        // (2u + 2u_x)^-1 -> (1/2) (u + u_x)^-1 and inverts exactly
        let base = Expr::int(2) * u(&[]) + Expr::int(2) * u(&[X]);
        let inv = base.clone().pow(-1);
        let prod = (base * inv).canonical();
        assert_eq!(prod, Expr::one());
    }

    #[test]
    fn sin_is_odd_cos_is_even() {
        let e = (-u(&[])).sin() + u(&[]).sin();
        assert!(e.canonical().is_zero());
        let e = (-u(&[])).cos() - u(&[]).cos();
        assert!(e.canonical().is_zero());
    }

    #[test]
    fn sin_of_zero_folds() {
        assert!(Expr::zero().sin().canonical().is_zero());
        assert_eq!(Expr::zero().cos().canonical(), Expr::one());
    }

    #[test]
    fn antid_is_linear() {
        let g = Expr::int(3) * u(&[]) * u(&[X]) + u(&[X]);
        let e = g.antid(X).canonical();
        let expect = (Expr::int(3) * (u(&[]) * u(&[X])).antid(X)
            + u(&[X]).antid(X))
        .canonical();
        assert_eq!(e, expect);
        assert!(!e.is_local());
    }

    #[test]
    fn substitute_exact_cancellation() {
        // u_t + u u_x with u_t -> -u u_x - u_xxx gives -u_xxx
        let kdv_lhs = u(&[T]) + u(&[]) * u(&[X]);
        let mut rules = BTreeMap::new();
        rules.insert(
            JetCoord::field(0, &[T]),
            -(u(&[]) * u(&[X])) - u(&[X, X, X]),
        );
        let out = kdv_lhs.substitute(&rules);
        assert_eq!(out, (-u(&[X, X, X])).canonical());
    }

    #[test]
    fn substitute_identity_and_sin() {
        assert_eq!(u(&[]).substitute(&BTreeMap::new()), u(&[]));
        let mut rules = BTreeMap::new();
        rules.insert(JetCoord::field(0, &[]), Expr::zero());
        assert!(u(&[]).sin().substitute(&rules).is_zero());
    }

    #[test]
    fn eval_examples() {
        let mut a = BTreeMap::new();
        a.insert(JetCoord::field(0, &[]), 3.0);
        assert_eq!(u(&[]).pow(2).eval(&a).unwrap(), 9.0);
        a.insert(JetCoord::field(0, &[]), 0.0);
        assert_eq!(u(&[]).sin().eval(&a).unwrap(), 0.0);
        a.insert(JetCoord::field(0, &[]), 2.0);
        a.insert(JetCoord::field(0, &[X]), 5.0);
        assert_eq!((u(&[]) * u(&[X])).eval(&a).unwrap(), 10.0);
    }

    #[test]
    fn eval_errors() {
        let a = BTreeMap::new();
        assert!(matches!(
            u(&[]).eval(&a),
            Err(EvalError::UnassignedCoordinate(_))
        ));
        assert_eq!(
            u(&[]).antid(X).eval(&a),
            Err(EvalError::NonlocalExpression)
        );
    }

    #[test]
    fn multiindex_is_order_insensitive() {
        assert_eq!(MultiIndex::of(&[T, X, X]), MultiIndex::of(&[X, T, X]));
        assert_eq!(MultiIndex::of(&[T, X, X]).order(), 3);
    }

    #[test]
    fn coord_order_is_graded() {
        let u0 = JetCoord::field(0, &[]);
        let ux = JetCoord::field(0, &[X]);
        let ut = JetCoord::field(0, &[T]);
        let uxx = JetCoord::field(0, &[X, X]);
        let utx = JetCoord::field(0, &[T, X]);
        assert!(u0 < ux);
        assert!(ut < ux || ux < ut); // total
        assert!(ux < uxx);
        assert!(utx < JetCoord::field(0, &[T, T]));
        assert!(JetCoord::Indep(X) < u0);
    }
}
