//! Field systems: independent variables, fields, equations, scaling data
//! and on-shell substitution rules.

use std::collections::BTreeMap;

use num::Zero;

use crate::expr::{Expr, JetCoord, Rat};

/// Scaling exponents: `p` per independent variable, `q` per field component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingSpec {
    pub p: Vec<Rat>,
    pub q: Vec<Rat>,
}

impl ScalingSpec {
    /// Panics if every exponent is zero (the scaling would be trivial).
    pub fn new(p: Vec<Rat>, q: Vec<Rat>) -> Self {
        assert!(
            p.iter().chain(q.iter()).any(|r| !r.is_zero()),
            "scaling spec must have at least one nonzero exponent"
        );
        ScalingSpec { p, q }
    }

    pub fn p_sum(&self) -> Rat {
        self.p.iter().fold(Rat::zero(), |a, b| a + b.clone())
    }
}

/// Independent-variable and field names for parsing and printing.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub indep: Vec<String>,
    pub fields: Vec<String>,
    pub params: BTreeMap<String, Rat>,
    /// Direction the `Dxi[...]` formal antiderivative binds to.
    pub antid_direction: Option<usize>,
}

impl SymbolTable {
    pub fn indep_index(&self, name: &str) -> Option<usize> {
        self.indep.iter().position(|n| n == name)
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|n| n == name)
    }
}

/// A system of field equations on jet space.
///
/// Fields are flattened to scalar components; `field_groups` records which
/// components form a vector (e.g. `u -> [u1, u2, u3]`).
#[derive(Clone, Debug)]
pub struct FieldSystem {
    pub name: String,
    pub indep_names: Vec<String>,
    pub time_index: usize,
    /// Designated spatial direction for formal antiderivatives (1+1 models).
    pub antid_direction: Option<usize>,
    pub field_names: Vec<String>,
    pub field_groups: Vec<(String, Vec<usize>)>,
    /// Equation components, local expressions.
    pub equations: Vec<Expr>,
    pub scaling: ScalingSpec,
    /// On-shell rules: leading jet coordinate -> solved expression.
    pub solved_forms: Vec<(JetCoord, Expr)>,
    pub self_adjoint: bool,
    pub params: BTreeMap<String, Rat>,
}

impl FieldSystem {
    pub fn n_indep(&self) -> usize {
        self.indep_names.len()
    }

    pub fn n_fields(&self) -> usize {
        self.field_names.len()
    }

    pub fn n_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn spatial_indices(&self) -> Vec<usize> {
        (0..self.n_indep()).filter(|i| *i != self.time_index).collect()
    }

    pub fn is_one_plus_one(&self) -> bool {
        self.n_indep() == 2
    }

    pub fn table(&self) -> SymbolTable {
        SymbolTable {
            indep: self.indep_names.clone(),
            fields: self.field_names.clone(),
            params: self.params.clone(),
            antid_direction: self.antid_direction,
        }
    }

    /// Structural sanity checks on construction: equations local, solved
    /// forms well-formed (key absent from its own rule and derivatives).
    pub fn validate(&self) -> Result<(), String> {
        if self.time_index >= self.n_indep() {
            return Err("time index out of range".into());
        }
        if self.scaling.p.len() != self.n_indep() || self.scaling.q.len() != self.n_fields() {
            return Err("scaling spec arity mismatch".into());
        }
        for (i, eq) in self.equations.iter().enumerate() {
            if !eq.is_local() {
                return Err(format!("equation {i} is nonlocal"));
            }
        }
        for (lead, rhs) in &self.solved_forms {
            let JetCoord::Field { field, deriv } = lead else {
                return Err("solved form key must be a field coordinate".into());
            };
            let occurs = self
                .equations
                .iter()
                .any(|eq| eq.coords().contains(lead));
            if !occurs {
                return Err("solved form key does not occur in any equation".into());
            }
            for c in rhs.coords() {
                if let JetCoord::Field { field: f2, deriv: d2 } = &c {
                    if f2 == field && deriv.divides(d2) {
                        return Err(
                            "solved form right side contains the key or a derivative of it"
                                .into(),
                        );
                    }
                }
            }
        }
        Ok(())
    }
}

/// Kind of catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Symmetry,
    AdjointSymmetry,
    Multiplier,
}

/// Classification of a catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryClass {
    Scaling,
    TimeTranslation,
    SpaceTranslation,
    Rotation,
    Boost,
    GalileanBoost,
    Conformal,
    Vorticity,
    Helicity,
    FOfVorticity,
    Hierarchy,
}

/// A named (adjoint-)symmetry or multiplier shipped with a model, with the
/// reference conserved current where the literature states one.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub kind: EntryKind,
    pub class: EntryClass,
    /// One component per equation (multipliers/adjoint-symmetries) or per
    /// field (symmetries).
    pub components: Vec<Expr>,
    /// Reference current (one component per independent variable), if known.
    pub known_current: Option<Vec<Expr>>,
    /// Scaling weight of the associated conserved integral, if known.
    pub expected_weight: Option<Rat>,
}
