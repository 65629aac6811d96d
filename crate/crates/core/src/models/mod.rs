//! Built-in field systems and their catalogs of symmetries,
//! adjoint-symmetries and multipliers.

pub mod euler;
pub mod killing;
pub mod wave;

use std::collections::BTreeMap;

use crate::expr::{rat, rint, Expr, JetCoord, Rat};
use crate::system::{CatalogEntry, EntryClass, EntryKind, FieldSystem, ScalingSpec};

pub use euler::build_euler;
pub use wave::build_wave;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("vector dimension must be at least 1, got {0}")]
    InvalidN(usize),
    #[error("spatial dimension must be 2 or 3, got {0}")]
    InvalidDim(usize),
    #[error("interaction power must be an integer >= 2, got {0}")]
    InvalidPower(i64),
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
}

const T: usize = 0;
const X: usize = 1;

/// The KdV equation `u_t + u u_x + u_xxx = 0` with its scaling
/// `t -> l^3 t`, `x -> l x`, `u -> l^-2 u`.
pub fn build_kdv() -> FieldSystem {
    let u = |vars: &[usize]| Expr::field(0, vars);
    let equation = (u(&[T]) + u(&[]) * u(&[X]) + u(&[X, X, X])).canonical();
    let solved = (-(u(&[]) * u(&[X])) - u(&[X, X, X])).canonical();
    FieldSystem {
        name: "kdv".into(),
        indep_names: vec!["t".into(), "x".into()],
        time_index: T,
        antid_direction: Some(X),
        field_names: vec!["u".into()],
        field_groups: vec![("u".into(), vec![0])],
        equations: vec![equation],
        scaling: ScalingSpec::new(vec![rint(3), rint(1)], vec![rint(-2)]),
        solved_forms: vec![(JetCoord::field(0, &[T]), solved)],
        self_adjoint: false,
        params: BTreeMap::new(),
    }
}

pub fn kdv_catalog() -> Vec<CatalogEntry> {
    let u = |vars: &[usize]| Expr::field(0, vars);
    vec![CatalogEntry {
        name: "u".into(),
        kind: EntryKind::Multiplier,
        class: EntryClass::Hierarchy,
        components: vec![u(&[])],
        known_current: Some(vec![
            u(&[]).pow(2).scale(rat(1, 2)).canonical(),
            (u(&[]).pow(3).scale(rat(1, 3)) + u(&[]) * u(&[X, X])
                - u(&[X]).pow(2).scale(rat(1, 2)))
            .canonical(),
        ]),
        expected_weight: Some(rint(-3)),
    }]
}

/// The sine-Gordon equation `u_tx - sin u = 0` in light-cone coordinates,
/// scaling `t -> l^-1 t`, `x -> l x`. Self-adjoint: symmetries coincide
/// with adjoint-symmetries.
pub fn build_sine_gordon() -> FieldSystem {
    let u = |vars: &[usize]| Expr::field(0, vars);
    let equation = (u(&[T, X]) - u(&[]).sin()).canonical();
    FieldSystem {
        name: "sine-gordon".into(),
        indep_names: vec!["t".into(), "x".into()],
        time_index: T,
        antid_direction: Some(X),
        field_names: vec!["u".into()],
        field_groups: vec![("u".into(), vec![0])],
        equations: vec![equation],
        scaling: ScalingSpec::new(vec![rint(-1), rint(1)], vec![rint(0)]),
        solved_forms: vec![(JetCoord::field(0, &[T, X]), u(&[]).sin().canonical())],
        self_adjoint: true,
        params: BTreeMap::new(),
    }
}

pub fn sine_gordon_catalog() -> Vec<CatalogEntry> {
    let u = |vars: &[usize]| Expr::field(0, vars);
    vec![CatalogEntry {
        name: "u_x".into(),
        kind: EntryKind::Multiplier,
        class: EntryClass::SpaceTranslation,
        components: vec![u(&[X])],
        known_current: Some(vec![
            u(&[X]).pow(2).scale(rat(1, 2)).canonical(),
            u(&[]).cos().canonical(),
        ]),
        expected_weight: Some(rint(-1)),
    }]
}

/// The N-component vector mKdV equation
/// `u_t + (3/2)(u.u) u_x + u_xxx = 0`, scaling
/// `t -> l^3 t`, `x -> l x`, `u -> l^-1 u`. `N = 1` is the scalar mKdV.
pub fn build_mkdv(n: usize) -> Result<FieldSystem, ModelError> {
    if n < 1 {
        return Err(ModelError::InvalidN(n));
    }
    let comp = |i: usize, vars: &[usize]| Expr::field(i, vars);
    let uu = dot_fields(n, &[], &[]);
    let mut equations = Vec::with_capacity(n);
    let mut solved = Vec::with_capacity(n);
    for i in 0..n {
        let nonlinear = (uu.clone() * comp(i, &[X])).scale(rat(3, 2));
        equations.push((comp(i, &[T]) + nonlinear.clone() + comp(i, &[X, X, X])).canonical());
        solved.push((
            JetCoord::field(i, &[T]),
            (-(nonlinear) - comp(i, &[X, X, X])).canonical(),
        ));
    }
    let field_names: Vec<String> = if n == 1 {
        vec!["u".into()]
    } else {
        (1..=n).map(|i| format!("u{i}")).collect()
    };
    Ok(FieldSystem {
        name: format!("mkdv:{n}"),
        indep_names: vec!["t".into(), "x".into()],
        time_index: T,
        antid_direction: Some(X),
        field_names,
        field_groups: vec![("u".into(), (0..n).collect())],
        equations,
        scaling: ScalingSpec::new(vec![rint(3), rint(1)], vec![rint(-1); n]),
        solved_forms: solved,
        self_adjoint: false,
        params: BTreeMap::new(),
    })
}

pub fn mkdv_catalog(sys: &FieldSystem) -> Vec<CatalogEntry> {
    let n = sys.n_fields();
    let comp = |i: usize, vars: &[usize]| Expr::field(i, vars);
    let uu = dot_fields(n, &[], &[]);
    let u_uxx = dot_fields(n, &[], &[X, X]);
    let uxux = dot_fields(n, &[X], &[X]);
    let flux = (uu.clone().pow(2).scale(rat(3, 8)) + u_uxx
        - uxux.scale(rat(1, 2)))
    .canonical();
    vec![CatalogEntry {
        name: "u".into(),
        kind: EntryKind::Multiplier,
        class: EntryClass::Hierarchy,
        components: (0..n).map(|i| comp(i, &[])).collect(),
        known_current: Some(vec![uu.scale(rat(1, 2)).canonical(), flux]),
        expected_weight: Some(rint(-1)),
    }]
}

/// `sum_i u^i_J u^i_K` over the components of the vector field group.
fn dot_fields(n: usize, left: &[usize], right: &[usize]) -> Expr {
    crate::expr::sum((0..n).map(|i| Expr::field(i, left) * Expr::field(i, right))).canonical()
}

/// Parses a model id: `kdv`, `sine-gordon`, `mkdv:N`, `euler:dim:p`,
/// `wave:dim:upsilon:sign`.
pub fn build_by_id(id: &str) -> Result<FieldSystem, ModelError> {
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["kdv"] => Ok(build_kdv()),
        ["sine-gordon"] => Ok(build_sine_gordon()),
        ["mkdv", n] => {
            let n: usize = n.parse().map_err(|_| ModelError::UnknownModel(id.into()))?;
            build_mkdv(n)
        }
        ["euler", dim] => {
            let dim: usize = dim.parse().map_err(|_| ModelError::UnknownModel(id.into()))?;
            build_euler(dim, rint(1))
        }
        ["euler", dim, p] => {
            let dim: usize = dim.parse().map_err(|_| ModelError::UnknownModel(id.into()))?;
            let p = parse_rat(p).ok_or_else(|| ModelError::UnknownModel(id.into()))?;
            build_euler(dim, p)
        }
        ["wave", dim, upsilon] | ["wave", dim, upsilon, "+"] => {
            let dim: usize = dim.parse().map_err(|_| ModelError::UnknownModel(id.into()))?;
            let upsilon: i64 = upsilon
                .parse()
                .map_err(|_| ModelError::UnknownModel(id.into()))?;
            build_wave(dim, upsilon, 1)
        }
        ["wave", dim, upsilon, "-"] => {
            let dim: usize = dim.parse().map_err(|_| ModelError::UnknownModel(id.into()))?;
            let upsilon: i64 = upsilon
                .parse()
                .map_err(|_| ModelError::UnknownModel(id.into()))?;
            build_wave(dim, upsilon, -1)
        }
        _ => Err(ModelError::UnknownModel(id.into())),
    }
}

fn parse_rat(s: &str) -> Option<Rat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.parse().ok()?;
            let d: i64 = d.parse().ok()?;
            if d == 0 {
                None
            } else {
                Some(rat(n, d))
            }
        }
        None => {
            let n: i64 = s.parse().ok()?;
            Some(rint(n))
        }
    }
}

/// Catalog lookup for a built system.
pub fn catalog_for(sys: &FieldSystem) -> Vec<CatalogEntry> {
    if sys.name == "kdv" {
        kdv_catalog()
    } else if sys.name == "sine-gordon" {
        sine_gordon_catalog()
    } else if sys.name.starts_with("mkdv:") {
        mkdv_catalog(sys)
    } else if sys.name.starts_with("euler:") {
        euler::euler_catalog(sys)
    } else if sys.name.starts_with("wave:") {
        wave::wave_catalog(sys)
    } else {
        Vec::new()
    }
}

/// All built-in model ids with default parameters, for self tests.
pub fn builtin_ids() -> Vec<&'static str> {
    vec![
        "kdv",
        "sine-gordon",
        "mkdv:2",
        "euler:2:1",
        "euler:3:1",
        "wave:2:5:+",
        "wave:3:3:+",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::canon_eq;
    use crate::verify;

    #[test]
    fn built_in_systems_validate() {
        for id in builtin_ids() {
            let sys = build_by_id(id).unwrap();
            sys.validate().unwrap_or_else(|e| panic!("{id}: {e}"));
            crate::scaling::check_scaling_invariance(&sys)
                .unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }

    #[test]
    fn mkdv_rejects_zero_components() {
        assert!(matches!(build_mkdv(0), Err(ModelError::InvalidN(0))));
    }

    #[test]
    fn scalar_mkdv_reduces_to_known_form() {
        let sys = build_mkdv(1).unwrap();
        let u = |vars: &[usize]| Expr::field(0, vars);
        let want = (u(&[T]) + u(&[]).pow(2).scale(rat(3, 2)) * u(&[X]) + u(&[X, X, X]))
            .canonical();
        assert!(canon_eq(&sys.equations[0], &want));
    }

    #[test]
    fn mkdv_equation_weight() {
        let sys = build_mkdv(2).unwrap();
        let s = crate::scaling::check_scaling_invariance(&sys).unwrap();
        assert_eq!(s, vec![rint(-4), rint(-4)]);
    }

    #[test]
    fn catalog_entries_pass_their_checks() {
        for id in ["kdv", "sine-gordon", "mkdv:2", "mkdv:3"] {
            let sys = build_by_id(id).unwrap();
            for entry in catalog_for(&sys) {
                let report = verify::adjoint_symmetry_check(&entry.components, &sys)
                    .unwrap_or_else(|e| panic!("{id}/{}: {e}", entry.name));
                assert!(report.passed(), "{id}/{}: {report:?}", entry.name);
                let law = crate::scaling::ConservationLaw::from_current(
                    &sys,
                    Some(entry.components.clone()),
                    entry.known_current.clone().unwrap(),
                    entry.expected_weight.clone().unwrap(),
                );
                let report = verify::conservation_check(&law, &sys).unwrap();
                assert!(report.passed(), "{id}/{}: {report:?}", entry.name);
            }
        }
    }

    #[test]
    fn catalog_weights_match_formula() {
        for id in ["kdv", "sine-gordon", "mkdv:2"] {
            let sys = build_by_id(id).unwrap();
            for entry in catalog_for(&sys) {
                let report =
                    crate::scaling::multiplier_weight_report(&sys, &entry.components).unwrap();
                assert_eq!(report.w, entry.expected_weight.clone().unwrap(), "{id}");
            }
        }
    }
}
