//! Deterministic pretty-printers for canonical expressions: plain text (the
//! same grammar the parser accepts) and LaTeX.

use num::{One, Signed};

use crate::expr::{Expr, JetCoord, Rat};
use crate::system::SymbolTable;

/// Plain-text rendering; `plain(parse(s)) == s` for canonical `s`.
pub fn plain(e: &Expr, table: &SymbolTable) -> String {
    render_sum(&e.canonical(), table, false)
}

/// LaTeX rendering with the same term order as the plain printer.
pub fn latex(e: &Expr, table: &SymbolTable) -> String {
    render_sum(&e.canonical(), table, true)
}

fn render_sum(e: &Expr, table: &SymbolTable, latex: bool) -> String {
    let terms: Vec<&Expr> = match e {
        Expr::Sum(ts) => ts.iter().collect(),
        other => vec![other],
    };
    let mut out = String::new();
    for (i, term) in terms.iter().enumerate() {
        let (neg, body) = render_term(term, table, latex);
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn render_term(e: &Expr, table: &SymbolTable, latex: bool) -> (bool, String) {
    let empty: &[Expr] = &[];
    let (coeff, factors): (Rat, &[Expr]) = match e {
        Expr::Prod(fs) => match fs.first() {
            Some(Expr::Const(c)) => (c.clone(), &fs[1..]),
            _ => (Rat::one(), &fs[..]),
        },
        Expr::Const(c) => (c.clone(), empty),
        other => (Rat::one(), std::slice::from_ref(other)),
    };
    let neg = coeff.is_negative();
    let coeff_abs = coeff.abs();
    let mut parts: Vec<String> = Vec::new();
    if !coeff_abs.is_one() || factors.is_empty() {
        parts.push(fmt_coeff(&coeff_abs, latex));
    }
    for f in factors {
        parts.push(render_factor(f, table, latex));
    }
    let sep = if latex { "" } else { "*" };
    (neg, parts.join(sep))
}

fn fmt_coeff(c: &Rat, latex: bool) -> String {
    if c.is_integer() {
        format!("{}", c.numer())
    } else if latex {
        format!("\\tfrac{{{}}}{{{}}}", c.numer(), c.denom())
    } else {
        format!("({}/{})", c.numer(), c.denom())
    }
}

fn render_factor(e: &Expr, table: &SymbolTable, latex: bool) -> String {
    match e {
        Expr::Pow(base, k) => {
            let b = render_base(base, table, latex);
            if latex {
                format!("{b}^{{{k}}}")
            } else {
                format!("{b}^{k}")
            }
        }
        other => render_base(other, table, latex),
    }
}

fn render_base(e: &Expr, table: &SymbolTable, latex: bool) -> String {
    match e {
        Expr::Coord(c) => render_coord(c, table, latex),
        Expr::Sin(a) => {
            if latex {
                format!("\\sin\\left({}\\right)", render_sum(a, table, true))
            } else {
                format!("sin({})", render_sum(a, table, false))
            }
        }
        Expr::Cos(a) => {
            if latex {
                format!("\\cos\\left({}\\right)", render_sum(a, table, true))
            } else {
                format!("cos({})", render_sum(a, table, false))
            }
        }
        Expr::AntiD(dir, g) => {
            if latex {
                format!(
                    "D_{{{}}}^{{-1}}\\left[{}\\right]",
                    table.indep[*dir],
                    render_sum(g, table, true)
                )
            } else {
                format!("Dxi[{}]", render_sum(g, table, false))
            }
        }
        Expr::Sum(_) => {
            if latex {
                format!("\\left({}\\right)", render_sum(e, table, true))
            } else {
                format!("({})", render_sum(e, table, false))
            }
        }
        Expr::Const(c) => fmt_coeff(c, latex),
        // Canonical factors are never bare products or powers here.
        Expr::Prod(_) | Expr::Pow(..) => {
            if latex {
                format!("\\left({}\\right)", render_sum(e, table, true))
            } else {
                format!("({})", render_sum(e, table, false))
            }
        }
    }
}

fn render_coord(c: &JetCoord, table: &SymbolTable, latex: bool) -> String {
    match c {
        JetCoord::Indep(v) => table.indep[*v].clone(),
        JetCoord::Field { field, deriv } => {
            let name = &table.fields[*field];
            if deriv.is_empty() {
                return name.clone();
            }
            let subs: String = deriv
                .vars()
                .iter()
                .map(|v| table.indep[*v].as_str())
                .collect();
            if latex {
                format!("{name}_{{{subs}}}")
            } else {
                format!("{name}_{subs}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn table() -> SymbolTable {
        SymbolTable {
            indep: vec!["t".into(), "x".into()],
            fields: vec!["u".into()],
            params: Default::default(),
            antid_direction: Some(1),
        }
    }

    #[test]
    fn half_u_squared() {
        let e = Expr::field(0, &[]).pow(2).scale(rat(1, 2));
        assert_eq!(plain(&e, &table()), "(1/2)*u^2");
        assert_eq!(latex(&e, &table()), "\\tfrac{1}{2}u^{2}");
    }

    #[test]
    fn subscripts_sort_by_index_order() {
        // u_{xxt} prints as u_txx under t < x
        let e = Expr::field(0, &[1, 1, 0]);
        assert_eq!(plain(&e, &table()), "u_txx");
        assert_eq!(latex(&e, &table()), "u_{txx}");
    }

    #[test]
    fn antiderivative_renders_bracketed() {
        let e = (Expr::field(0, &[]) * Expr::field(0, &[1])).antid(1);
        assert_eq!(plain(&e.canonical(), &table()), "Dxi[u*u_x]");
    }

    #[test]
    fn zero_and_signs() {
        assert_eq!(plain(&Expr::zero(), &table()), "0");
        let e = (-(Expr::field(0, &[]))).canonical();
        assert_eq!(plain(&e, &table()), "-u");
        let e = (Expr::int(2) * Expr::field(0, &[]) - Expr::field(0, &[1])).canonical();
        assert_eq!(plain(&e, &table()), "2*u - u_x");
    }

    #[test]
    fn negative_power_and_sum_base() {
        let e = Expr::field(0, &[1]).pow(-2);
        assert_eq!(plain(&e, &table()), "u_x^-2");
        let base = (Expr::field(0, &[]) + Expr::one()).canonical();
        let e = base.pow(-1).canonical();
        assert_eq!(plain(&e, &table()), "(1 + u)^-1");
    }
}
