//! Power-law nonlinear wave equation `u_tt - lap(u) +/- u^upsilon = 0` on
//! Minkowski space, with Poincare symmetries for every power, inversion
//! symmetries at the conformal powers, and stress-energy reference currents.

use std::collections::BTreeMap;



use crate::expr::{rat, rint, sum, Expr, JetCoord};
use crate::jet;
use crate::models::{killing, ModelError};
use crate::system::{CatalogEntry, EntryClass, EntryKind, FieldSystem, ScalingSpec};

/// Builds the wave system. `sign` is the sign of the interaction term
/// (`+1` or `-1`); the scaling is `x^a -> l x^a`, `u -> l^q u` with
/// `q = 2/(1-upsilon)`.
pub fn build_wave(spatial_dim: usize, upsilon: i64, sign: i64) -> Result<FieldSystem, ModelError> {
    if spatial_dim != 2 && spatial_dim != 3 {
        return Err(ModelError::InvalidDim(spatial_dim));
    }
    if upsilon < 2 {
        return Err(ModelError::InvalidPower(upsilon));
    }
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    let n = spatial_dim + 1;
    let u = |vars: &[usize]| Expr::field(0, vars);
    let laplacian = sum((1..n).map(|i| u(&[i, i]))).canonical();
    let interaction = u(&[]).pow(upsilon as i32).scale(rint(sign));
    let equation = (u(&[0, 0]) - laplacian.clone() + interaction.clone()).canonical();
    let solved = (laplacian - interaction).canonical();

    let q = rat(2, 1 - upsilon);
    let names: Vec<String> = ["t", "x", "y", "z"][..n]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut params = BTreeMap::new();
    params.insert("upsilon".to_string(), rint(upsilon));
    params.insert("sign".to_string(), rint(sign));

    Ok(FieldSystem {
        name: format!(
            "wave:{spatial_dim}:{upsilon}:{}",
            if sign == 1 { "+" } else { "-" }
        ),
        indep_names: names,
        time_index: 0,
        antid_direction: None,
        field_names: vec!["u".into()],
        field_groups: vec![("u".into(), vec![0])],
        equations: vec![equation],
        scaling: ScalingSpec::new(vec![rint(1); n], vec![q]),
        solved_forms: vec![(JetCoord::field(0, &[0, 0]), solved)],
        self_adjoint: true,
        params,
    })
}

fn upsilon_of(sys: &FieldSystem) -> i64 {
    use num::ToPrimitive;
    sys.params["upsilon"].to_integer().to_i64().unwrap()
}

fn sign_of(sys: &FieldSystem) -> i64 {
    use num::ToPrimitive;
    sys.params["sign"].to_integer().to_i64().unwrap()
}

/// `d^a u = g^{aa} u_a` with metric `diag(-1, +1, ..., +1)`.
fn raised_gradient(sys: &FieldSystem) -> Vec<Expr> {
    let n = sys.n_indep();
    let metric = killing::minkowski_metric(n);
    (0..n)
        .map(|a| Expr::field(0, &[a]).scale(metric[a].clone()).canonical())
        .collect()
}

/// Mixed stress-energy tensor `T^a_b`.
fn stress_energy(sys: &FieldSystem) -> Vec<Vec<Expr>> {
    let n = sys.n_indep();
    let upsilon = upsilon_of(sys);
    let sign = sign_of(sys);
    let up = raised_gradient(sys);
    let u = |vars: &[usize]| Expr::field(0, vars);
    let kinetic = sum((0..n).map(|g| up[g].clone() * u(&[g]))).canonical();
    let potential = u(&[])
        .pow((upsilon + 1) as i32)
        .scale(rint(sign) * rat(2, upsilon + 1));
    let trace_part = (kinetic + potential).canonical();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut t = up[a].clone() * u(&[b]);
                    if a == b {
                        t = t - trace_part.clone().scale(rat(1, 2));
                    }
                    t.canonical()
                })
                .collect()
        })
        .collect()
}

/// Reference current `-T^a_b xi^b` for a Killing vector field.
pub fn killing_current(sys: &FieldSystem, xi: &[Expr]) -> Vec<Expr> {
    let t = stress_energy(sys);
    let n = sys.n_indep();
    (0..n)
        .map(|a| {
            (-sum((0..n).map(|b| t[a][b].clone() * xi[b].clone()))).canonical()
        })
        .collect()
}

/// Reference current for a conformal Killing vector field: the Killing
/// current plus the improvement terms weighted by `div xi`.
pub fn conformal_current(sys: &FieldSystem, xi: &[Expr]) -> Vec<Expr> {
    let n = sys.n_indep();
    let upsilon = upsilon_of(sys);
    let u = |vars: &[usize]| Expr::field(0, vars);
    let up = raised_gradient(sys);
    let metric = killing::minkowski_metric(n);
    let div = divergence(xi);
    let base = killing_current(sys, xi);
    (0..n)
        .map(|a| {
            let d_div = jet::total_derivative(&div, a)
                .expect("local")
                .scale(metric[a].clone());
            let extra = (div.clone() * u(&[]) * up[a].clone()
                - (d_div * u(&[]).pow(2)).scale(rat(1, 2)))
            .scale(rat(-1, upsilon + 1));
            (base[a].clone() + extra).canonical()
        })
        .collect()
}

fn divergence(xi: &[Expr]) -> Expr {
    sum(
        xi.iter()
            .enumerate()
            .map(|(a, c)| jet::total_derivative(c, a).expect("local")),
    )
    .canonical()
}

/// Evolutionary form of the point symmetry generated by a spacetime vector
/// field: `xi^a u_a`, plus the conformal weight term for inversions.
pub fn killing_symmetry(xi: &[Expr]) -> Expr {
    sum(
        xi.iter()
            .enumerate()
            .map(|(a, c)| c.clone() * Expr::field(0, &[a])),
    )
    .canonical()
}

pub fn conformal_symmetry(sys: &FieldSystem, xi: &[Expr]) -> Expr {
    let n = sys.n_indep();
    let q = sys.scaling.q[0].clone();
    let kappa = -q / rint(n as i64);
    (killing_symmetry(xi) + (divergence(xi) * Expr::field(0, &[])).scale(kappa)).canonical()
}

/// True when the wave equation admits inversion symmetries: `upsilon = 5`
/// in 2+1 dimensions, `upsilon = 3` in 3+1 dimensions.
pub fn admits_inversions(spatial_dim: usize, upsilon: i64) -> bool {
    matches!((spatial_dim, upsilon), (2, 5) | (3, 3))
}

/// Catalog of wave multipliers: one entry per Poincare generator, plus
/// inversion entries at the conformal powers. Symmetries coincide with
/// adjoint-symmetries (the equation is self-adjoint).
pub fn wave_catalog(sys: &FieldSystem) -> Vec<CatalogEntry> {
    let n = sys.n_indep();
    let spatial_dim = n - 1;
    let upsilon = upsilon_of(sys);
    let names: Vec<&str> = ["t", "x", "y", "z"][..n].to_vec();
    let q = sys.scaling.q[0].clone();
    // Conserved-integral weight for translations; rotations and boosts add
    // one, inversions add two.
    let translation_weight = q.clone() * rint(2) + rint(n as i64) - rint(3);

    let mut out = Vec::new();
    for gen in killing::minkowski_generators(n, &names) {
        let class = if gen.name == "translation-t" {
            EntryClass::TimeTranslation
        } else {
            gen.class
        };
        let weight = match class {
            EntryClass::TimeTranslation | EntryClass::SpaceTranslation => {
                translation_weight.clone()
            }
            EntryClass::Rotation | EntryClass::Boost => translation_weight.clone() + rint(1),
            _ => unreachable!(),
        };
        out.push(CatalogEntry {
            name: gen.name,
            kind: EntryKind::Multiplier,
            class,
            components: vec![killing_symmetry(&gen.components)],
            known_current: Some(killing_current(sys, &gen.components)),
            expected_weight: Some(weight),
        });
    }
    if admits_inversions(spatial_dim, upsilon) {
        for gen in killing::conformal_generators(n, &names) {
            out.push(CatalogEntry {
                name: gen.name,
                kind: EntryKind::Multiplier,
                class: EntryClass::Conformal,
                components: vec![conformal_symmetry(sys, &gen.components)],
                known_current: Some(conformal_current(sys, &gen.components)),
                expected_weight: Some(translation_weight.clone() + rint(2)),
            });
        }
    }
    out
}

/// Killing generators of the model: translations, rotations, boosts.
pub fn killing_generators(sys: &FieldSystem) -> Vec<killing::Generator> {
    let n = sys.n_indep();
    let names: Vec<&str> = ["t", "x", "y", "z"][..n].to_vec();
    killing::minkowski_generators(n, &names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify;

    #[test]
    fn power_gate() {
        assert!(matches!(build_wave(3, 1, 1), Err(ModelError::InvalidPower(1))));
        assert!(build_wave(3, 4, 1).is_ok());
    }

    #[test]
    fn inversion_gating() {
        assert!(admits_inversions(2, 5));
        assert!(admits_inversions(3, 3));
        assert!(!admits_inversions(3, 4));
        assert!(!admits_inversions(3, 5));
        assert!(!admits_inversions(2, 3));
        let sys = build_wave(3, 4, 1).unwrap();
        assert!(wave_catalog(&sys)
            .iter()
            .all(|e| e.class != EntryClass::Conformal));
        let sys = build_wave(3, 3, 1).unwrap();
        assert_eq!(
            wave_catalog(&sys)
                .iter()
                .filter(|e| e.class == EntryClass::Conformal)
                .count(),
            4
        );
    }

    #[test]
    fn stress_energy_conserves_for_killing_vectors() {
        for (dim, upsilon, sign) in [(2usize, 3i64, 1i64), (3, 3, 1), (3, 5, -1)] {
            let sys = build_wave(dim, upsilon, sign).unwrap();
            for gen in killing_generators(&sys) {
                let current = killing_current(&sys, &gen.components);
                let div = sum(
                    current
                        .iter()
                        .enumerate()
                        .map(|(a, c)| jet::total_derivative(c, a).unwrap()),
                )
                .canonical();
                let reduced = verify::on_shell_reduce(&div, &sys).unwrap();
                assert!(reduced.is_zero(), "{} {}", sys.name, gen.name);
            }
        }
    }

    #[test]
    fn catalog_symmetries_pass_checks() {
        for (dim, upsilon) in [(2usize, 5i64), (3, 3)] {
            let sys = build_wave(dim, upsilon, 1).unwrap();
            for entry in wave_catalog(&sys) {
                let report = verify::symmetry_check(&entry.components, &sys).unwrap();
                assert!(report.passed(), "{}: {report:?}", entry.name);
                let law = crate::scaling::ConservationLaw::from_current(
                    &sys,
                    Some(entry.components.clone()),
                    entry.known_current.clone().unwrap(),
                    entry.expected_weight.clone().unwrap(),
                );
                let report = verify::conservation_check(&law, &sys).unwrap();
                assert!(report.passed(), "{}: {report:?}", entry.name);
            }
        }
    }

    #[test]
    fn translation_weights() {
        // 3+1: (5 - upsilon)/(1 - upsilon); 2+1: 4/(1 - upsilon)
        let sys = build_wave(3, 3, 1).unwrap();
        let entry = wave_catalog(&sys)
            .into_iter()
            .find(|e| e.name == "translation-x")
            .unwrap();
        assert_eq!(entry.expected_weight.unwrap(), rat(5 - 3, 1 - 3));
        let sys = build_wave(2, 5, 1).unwrap();
        let entry = wave_catalog(&sys)
            .into_iter()
            .find(|e| e.name == "translation-t")
            .unwrap();
        assert_eq!(entry.expected_weight.unwrap(), rat(4, 1 - 5));
    }

    #[test]
    fn catalog_weights_match_formula() {
        let sys = build_wave(3, 3, 1).unwrap();
        for entry in wave_catalog(&sys) {
            let report =
                crate::scaling::multiplier_weight_report(&sys, &entry.components).unwrap();
            assert_eq!(
                report.w,
                entry.expected_weight.clone().unwrap(),
                "{}",
                entry.name
            );
        }
    }
}
