//! Incompressible inviscid fluid in two or three spatial dimensions:
//! momentum equations plus the divergence constraint, the one-parameter
//! scaling family, and the catalog of Galilean-group and vorticity
//! adjoint-symmetries with their conserved currents.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::expr::{rint, sum, Expr, JetCoord, Rat};
use crate::models::{killing, ModelError};
use crate::system::{CatalogEntry, EntryClass, EntryKind, FieldSystem, ScalingSpec};

/// Builds the Euler system with scaling family exponent `p`:
/// `t -> l^p t`, `x^i -> l x^i`, `u^i -> l^(1-p) u^i`, `P -> l^(2-2p) P`.
/// Constant density `rho` is fixed to 1; it scales out of every check.
pub fn build_euler(dim: usize, p: Rat) -> Result<FieldSystem, ModelError> {
    if dim != 2 && dim != 3 {
        return Err(ModelError::InvalidDim(dim));
    }
    let rho_inv = Rat::one();
    let vel = |i: usize, vars: &[usize]| Expr::field(i, vars);
    let pressure = |vars: &[usize]| Expr::field(dim, vars);
    let sp = |j: usize| 1 + j; // independent index of spatial axis j

    let mut equations = Vec::with_capacity(dim + 1);
    let mut solved = Vec::with_capacity(dim + 1);
    for i in 0..dim {
        let transport = sum((0..dim).map(|j| vel(j, &[]) * vel(i, &[sp(j)])));
        let force = pressure(&[sp(i)]).scale(rho_inv.clone());
        equations.push((vel(i, &[0]) + transport.clone() + force.clone()).canonical());
        solved.push((
            JetCoord::field(i, &[0]),
            (-(transport) - force).canonical(),
        ));
    }
    let divergence = sum((0..dim).map(|i| vel(i, &[sp(i)]))).canonical();
    equations.push(divergence);
    // Divergence constraint eliminates the last velocity's derivative along
    // the last axis.
    solved.push((
        JetCoord::field(dim - 1, &[sp(dim - 1)]),
        (-sum((0..dim - 1).map(|i| vel(i, &[sp(i)])))).canonical(),
    ));

    let axis_names: Vec<&str> = ["x", "y", "z"][..dim].to_vec();
    let mut indep_names = vec!["t".to_string()];
    indep_names.extend(axis_names.iter().map(|s| s.to_string()));
    let mut field_names: Vec<String> = (1..=dim).map(|i| format!("u{i}")).collect();
    field_names.push("P".into());

    let one = Rat::one();
    let q_u = one.clone() - p.clone();
    let q_p = rint(2) - rint(2) * p.clone();
    let mut scaling_p = vec![p.clone()];
    scaling_p.extend(std::iter::repeat(one).take(dim));
    let mut scaling_q = vec![q_u; dim];
    scaling_q.push(q_p);

    let mut params = BTreeMap::new();
    params.insert("p".to_string(), p.clone());
    params.insert("rho".to_string(), Rat::one());

    Ok(FieldSystem {
        name: format!("euler:{dim}:{p}"),
        indep_names,
        time_index: 0,
        antid_direction: None,
        field_names,
        field_groups: vec![
            ("u".into(), (0..dim).collect()),
            ("P".into(), vec![dim]),
        ],
        equations,
        scaling: ScalingSpec::new(scaling_p, scaling_q),
        solved_forms: solved,
        self_adjoint: false,
        params,
    })
}

/// Curl components of the velocity field: the scalar curl in 2D (a single
/// entry), the vector curl in 3D.
fn curl(dim: usize) -> Vec<Expr> {
    let vel = |i: usize, vars: &[usize]| Expr::field(i, vars);
    let sp = |j: usize| 1 + j;
    if dim == 2 {
        vec![(vel(1, &[sp(0)]) - vel(0, &[sp(1)])).canonical()]
    } else {
        vec![
            (vel(2, &[sp(1)]) - vel(1, &[sp(2)])).canonical(),
            (vel(0, &[sp(2)]) - vel(2, &[sp(0)])).canonical(),
            (vel(1, &[sp(0)]) - vel(0, &[sp(1)])).canonical(),
        ]
    }
}

/// Catalog of fluid adjoint-symmetries: time translation (energy), space
/// translations and rotations (momenta), Galilean boosts, and the vorticity
/// entries (helicity in 3D, squared scalar curl and `f(curl)` in 2D).
pub fn euler_catalog(sys: &FieldSystem) -> Vec<CatalogEntry> {
    let dim = sys.n_fields() - 1;
    let p = sys.params["p"].clone();
    let rho_inv = Rat::one() / sys.params["rho"].clone();
    let vel = |i: usize, vars: &[usize]| Expr::field(i, vars);
    let pressure = || Expr::field(dim, &[]);
    let sp = |j: usize| 1 + j;
    let axis_names: Vec<&str> = ["x", "y", "z"][..dim].to_vec();
    let spatial: Vec<usize> = (0..dim).map(sp).collect();

    let speed_sq = sum((0..dim).map(|i| vel(i, &[]).pow(2))).canonical();
    let bernoulli = (speed_sq.clone().scale(Rat::new(1.into(), 2.into()))
        + pressure().scale(rho_inv.clone()))
    .canonical();
    let dim_r = rint(dim as i64);

    let mut out = Vec::new();

    // Time translation: energy.
    {
        let mut comps: Vec<Expr> = (0..dim).map(|i| vel(i, &[])).collect();
        comps.push(bernoulli.clone());
        let density = speed_sq.clone().scale(Rat::new(1.into(), 2.into())).canonical();
        let mut current = vec![density];
        for j in 0..dim {
            current.push((vel(j, &[]) * bernoulli.clone()).canonical());
        }
        out.push(CatalogEntry {
            name: "time-translation".into(),
            kind: EntryKind::Multiplier,
            class: EntryClass::TimeTranslation,
            components: comps,
            known_current: Some(current),
            expected_weight: Some(dim_r.clone() + rint(2) - rint(2) * p.clone()),
        });
    }

    // Killing vectors: translations and rotations.
    for gen in killing::euclidean_generators(&spatial, &axis_names) {
        let xi = &gen.components;
        let xi_dot_u = sum((0..dim).map(|i| xi[i].clone() * vel(i, &[]))).canonical();
        let mut comps: Vec<Expr> = xi.to_vec();
        comps.push(xi_dot_u.clone());
        let mut current = vec![xi_dot_u.clone()];
        for k in 0..dim {
            current.push(
                (vel(k, &[]) * xi_dot_u.clone()
                    + xi[k].clone() * pressure().scale(rho_inv.clone()))
                .canonical(),
            );
        }
        let weight = match gen.class {
            EntryClass::SpaceTranslation => dim_r.clone() + rint(1) - p.clone(),
            EntryClass::Rotation => dim_r.clone() + rint(2) - p.clone(),
            _ => unreachable!(),
        };
        out.push(CatalogEntry {
            name: gen.name,
            kind: EntryKind::Multiplier,
            class: gen.class,
            components: comps,
            known_current: Some(current),
            expected_weight: Some(weight),
        });
    }

    // Galilean boosts.
    for j in 0..dim {
        let t = Expr::indep(0);
        let mut comps: Vec<Expr> = (0..dim)
            .map(|i| {
                if i == j {
                    t.clone().canonical()
                } else {
                    Expr::zero()
                }
            })
            .collect();
        comps.push((t.clone() * vel(j, &[]) - Expr::indep(sp(j))).canonical());
        let mut current = vec![(t.clone() * vel(j, &[])).canonical()];
        for k in 0..dim {
            let mut flux = t.clone() * vel(k, &[]) * vel(j, &[])
                - Expr::indep(sp(j)) * vel(k, &[]);
            if k == j {
                flux = flux + t.clone() * pressure().scale(rho_inv.clone());
            }
            current.push(flux.canonical());
        }
        out.push(CatalogEntry {
            name: format!("galilean-{}", axis_names[j]),
            kind: EntryKind::Multiplier,
            class: EntryClass::GalileanBoost,
            components: comps,
            known_current: Some(current),
            expected_weight: Some(dim_r.clone() + rint(1)),
        });
    }

    if dim == 3 {
        // Helicity: the vorticity vector as a momentum multiplier.
        let omega = curl(3);
        let u_dot_w = sum((0..3).map(|i| vel(i, &[]) * omega[i].clone())).canonical();
        let mut comps = omega.clone();
        comps.push(Expr::zero());
        let half = Rat::new(1.into(), 2.into());
        let mut current = vec![u_dot_w.clone().scale(half.clone()).canonical()];
        for k in 0..3 {
            let head = (speed_sq.clone().scale(half.clone())
                - pressure().scale(rho_inv.clone()))
            .canonical();
            current.push(
                ((vel(k, &[]) * u_dot_w.clone() - omega[k].clone() * head)
                    .scale(half.clone()))
                .canonical(),
            );
        }
        out.push(CatalogEntry {
            name: "helicity".into(),
            kind: EntryKind::Multiplier,
            class: EntryClass::Helicity,
            components: comps,
            known_current: Some(current),
            expected_weight: Some(rint(4) - rint(2) * p.clone()),
        });
    }

    if dim == 2 {
        let omega = curl(2)[0].clone();
        let d_omega = |axis: usize| {
            crate::jet::total_derivative(&omega, sp(axis)).expect("curl is local")
        };
        // Squared scalar curl.
        {
            let comps = vec![
                d_omega(1),
                (-d_omega(0)).canonical(),
                (-(omega.clone().pow(2).scale(Rat::new(1.into(), 2.into())))).canonical(),
            ];
            let density = omega
                .clone()
                .pow(2)
                .scale(Rat::new(1.into(), 2.into()))
                .canonical();
            let current = vec![
                density.clone(),
                (vel(0, &[]) * density.clone()).canonical(),
                (vel(1, &[]) * density.clone()).canonical(),
            ];
            out.push(CatalogEntry {
                name: "vorticity".into(),
                kind: EntryKind::Multiplier,
                class: EntryClass::Vorticity,
                components: comps,
                known_current: Some(current),
                expected_weight: Some(rint(2) - rint(2) * p.clone()),
            });
        }
        // f(curl) for a spatial dilation scaling only: f = curl^2 + curl^3.
        if p.is_zero() {
            let f = (omega.clone().pow(2) + omega.clone().pow(3)).canonical();
            let f1 = (omega.clone().scale(rint(2)) + omega.clone().pow(2).scale(rint(3)))
                .canonical();
            let f2 = (Expr::int(2) + omega.clone().scale(rint(6))).canonical();
            let comps = vec![
                (f2.clone() * d_omega(1)).canonical(),
                (-(f2 * d_omega(0))).canonical(),
                (f.clone() - omega.clone() * f1).canonical(),
            ];
            let current = vec![
                f.clone(),
                (vel(0, &[]) * f.clone()).canonical(),
                (vel(1, &[]) * f).canonical(),
            ];
            out.push(CatalogEntry {
                name: "vorticity-function".into(),
                kind: EntryKind::Multiplier,
                class: EntryClass::FOfVorticity,
                components: comps,
                known_current: Some(current),
                expected_weight: Some(rint(2)),
            });
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::canon_eq;
    use crate::verify;

    #[test]
    fn dimension_gate() {
        assert!(matches!(build_euler(1, rint(1)), Err(ModelError::InvalidDim(1))));
        assert!(matches!(build_euler(4, rint(1)), Err(ModelError::InvalidDim(4))));
    }

    #[test]
    fn equation_weights_match_family() {
        // s = (1 - 2p, -p) for momentum and continuity components
        for p in [rint(0), rint(1), crate::expr::rat(1, 2)] {
            let sys = build_euler(3, p.clone()).unwrap();
            let s = crate::scaling::check_scaling_invariance(&sys).unwrap();
            let mom = rint(1) - rint(2) * p.clone();
            assert_eq!(s, vec![mom.clone(), mom.clone(), mom, -p.clone()]);
        }
    }

    #[test]
    fn adjoint_equations_match_paper_form() {
        // L*(w)_i = -D_t w_i - u^j D_j w_i + (d_i u^j) w_j - D_i w  - w_i div u
        // on the nose, plus the continuity contribution; checked against the
        // general machinery on a sample.
        let sys = build_euler(3, rint(1)).unwrap();
        let u = |i: usize, vars: &[usize]| Expr::field(i, vars);
        let w = [
            u(0, &[]).pow(2),
            u(1, &[2]),
            Expr::indep(1),
            u(2, &[]) * u(0, &[]),
        ];
        let got = crate::jet::adjoint_linearize(&sys, &w).unwrap();
        // velocity component 0
        let divu = u(0, &[1]) + u(1, &[2]) + u(2, &[3]);
        let transport = |f: &Expr| -> Expr {
            sum((0..3).map(|j| {
                u(j, &[]) * crate::jet::total_derivative(f, 1 + j).unwrap()
            }))
        };
        let want = sum((0..3).map(|k| w[k].clone() * u(k, &[1])))
            - crate::jet::total_derivative(&w[0], 0).unwrap()
            - transport(&w[0])
            - w[0].clone() * divu
            - crate::jet::total_derivative(&w[3], 1).unwrap();
        assert!(canon_eq(&got[0], &want.canonical()));
        // pressure component: -div of the momentum part
        let want_p = -sum((0..3).map(|k| {
            crate::jet::total_derivative(&w[k], 1 + k).unwrap()
        }));
        assert!(canon_eq(&got[3], &want_p.canonical()));
    }

    #[test]
    fn all_catalog_entries_are_adjoint_symmetries() {
        for dim in [2usize, 3] {
            let sys = build_euler(dim, rint(1)).unwrap();
            for entry in euler_catalog(&sys) {
                let report =
                    verify::adjoint_symmetry_check(&entry.components, &sys).unwrap();
                assert!(report.passed(), "dim {dim} {}: {report:?}", entry.name);
            }
        }
    }

    #[test]
    fn all_catalog_currents_conserve() {
        for dim in [2usize, 3] {
            let sys = build_euler(dim, rint(1)).unwrap();
            for entry in euler_catalog(&sys) {
                let law = crate::scaling::ConservationLaw::from_current(
                    &sys,
                    Some(entry.components.clone()),
                    entry.known_current.clone().unwrap(),
                    entry.expected_weight.clone().unwrap(),
                );
                let report = verify::conservation_check(&law, &sys).unwrap();
                assert!(report.passed(), "dim {dim} {}: {report:?}", entry.name);
            }
        }
    }

    #[test]
    fn vorticity_function_requires_spatial_dilation() {
        let sys = build_euler(2, rint(1)).unwrap();
        assert!(euler_catalog(&sys)
            .iter()
            .all(|e| e.name != "vorticity-function"));
        let sys = build_euler(2, rint(0)).unwrap();
        assert!(euler_catalog(&sys)
            .iter()
            .any(|e| e.name == "vorticity-function"));
    }
}
