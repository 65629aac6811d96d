//! Bases of Killing and conformal Killing vector fields used by the fluid
//! and wave catalogs: explicit linear (or quadratic, for inversions) vector
//! fields over the independent variables.

use crate::expr::{Expr, Rat};
use crate::system::EntryClass;

/// A named generator with one component per relevant independent variable.
#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub class: EntryClass,
    pub components: Vec<Expr>,
}

/// Euclidean Killing basis on the given spatial coordinate slots:
/// translations along each axis and one rotation per axis pair.
/// Components are indexed by position in `spatial` (the independent-variable
/// indices of the axes); `names` are the axis display names.
pub fn euclidean_generators(spatial: &[usize], names: &[&str]) -> Vec<Generator> {
    let dim = spatial.len();
    let mut out = Vec::new();
    for i in 0..dim {
        let mut xi = vec![Expr::zero(); dim];
        xi[i] = Expr::one();
        out.push(Generator {
            name: format!("translation-{}", names[i]),
            class: EntryClass::SpaceTranslation,
            components: xi,
        });
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut xi = vec![Expr::zero(); dim];
            xi[i] = Expr::indep(spatial[j]);
            xi[j] = -Expr::indep(spatial[i]);
            out.push(Generator {
                name: format!("rotation-{}{}", names[i], names[j]),
                class: EntryClass::Rotation,
                components: xi,
            });
        }
    }
    out
}

/// Minkowski Killing basis over `n` spacetime slots (slot 0 is time,
/// metric `diag(-1, +1, ..., +1)`): translations, spatial rotations and
/// boosts. Components are indexed by the independent-variable index.
pub fn minkowski_generators(n: usize, names: &[&str]) -> Vec<Generator> {
    let mut out = Vec::new();
    for mu in 0..n {
        let mut xi = vec![Expr::zero(); n];
        xi[mu] = Expr::one();
        out.push(Generator {
            name: format!("translation-{}", names[mu]),
            class: EntryClass::SpaceTranslation,
            components: xi,
        });
    }
    for i in 1..n {
        for j in (i + 1)..n {
            let mut xi = vec![Expr::zero(); n];
            xi[i] = Expr::indep(j);
            xi[j] = -Expr::indep(i);
            out.push(Generator {
                name: format!("rotation-{}{}", names[i], names[j]),
                class: EntryClass::Rotation,
                components: xi,
            });
        }
    }
    for i in 1..n {
        let mut xi = vec![Expr::zero(); n];
        xi[0] = Expr::indep(i);
        xi[i] = Expr::indep(0);
        out.push(Generator {
            name: format!("boost-{}{}", names[0], names[i]),
            class: EntryClass::Boost,
            components: xi,
        });
    }
    out
}

/// Proper conformal Killing vectors (inversions) on Minkowski space:
/// `xi^a = (c.x) x^a - (1/2)(x.x) c^a` for each coordinate direction `c`.
pub fn conformal_generators(n: usize, names: &[&str]) -> Vec<Generator> {
    let metric = minkowski_metric(n);
    // c.x with index lowered by the metric
    let dot = |c: usize| -> Expr {
        Expr::indep(c).scale(metric[c].clone())
    };
    let mut xx_parts = Vec::with_capacity(n);
    for a in 0..n {
        xx_parts.push(Expr::indep(a).pow(2).scale(metric[a].clone()));
    }
    let xx = crate::expr::sum(xx_parts).canonical();
    let mut out = Vec::new();
    for mu in 0..n {
        let cx = dot(mu);
        let mut xi = Vec::with_capacity(n);
        for a in 0..n {
            let mut comp = cx.clone() * Expr::indep(a);
            if a == mu {
                comp = comp - xx.clone().scale(Rat::new(1.into(), 2.into()));
            }
            xi.push(comp.canonical());
        }
        out.push(Generator {
            name: format!("inversion-{}", names[mu]),
            class: EntryClass::Conformal,
            components: xi,
        });
    }
    out
}

/// Diagonal Minkowski metric entries `(-1, +1, ..., +1)` as rationals.
pub fn minkowski_metric(n: usize) -> Vec<Rat> {
    (0..n)
        .map(|a| {
            if a == 0 {
                -Rat::from_integer(1.into())
            } else {
                Rat::from_integer(1.into())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_basis_counts() {
        let g2 = euclidean_generators(&[1, 2], &["x", "y"]);
        assert_eq!(g2.len(), 3); // 2 translations + 1 rotation
        let g3 = euclidean_generators(&[1, 2, 3], &["x", "y", "z"]);
        assert_eq!(g3.len(), 6); // 3 translations + 3 rotations
    }

    #[test]
    fn minkowski_basis_counts() {
        let g = minkowski_generators(4, &["t", "x", "y", "z"]);
        // 4 translations + 3 rotations + 3 boosts
        assert_eq!(g.len(), 10);
        let conf = conformal_generators(4, &["t", "x", "y", "z"]);
        assert_eq!(conf.len(), 4);
    }
}
