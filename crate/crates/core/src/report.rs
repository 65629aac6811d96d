//! Structured reports and the command pipelines behind the CLI.
//!
//! Every invocation produces one report document: model id, echoed inputs,
//! produced currents in plain expression syntax, weights as exact rationals
//! and check results. JSON key order is struct order, stable across runs.

use std::collections::BTreeMap;

use num::Zero;
use serde::Serialize;

use crate::expr::{Expr, Rat};
use crate::models;
use crate::parse;
use crate::printer;
use crate::recursion;
use crate::scaling::{self, ConservationLaw};
use crate::system::{FieldSystem, SymbolTable};
use crate::verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Model(#[from] models::ModelError),
    #[error("{0}")]
    Parse(#[from] parse::ParseError),
    #[error("{0}")]
    Scaling(#[from] crate::scaling::ScalingError),
    #[error("{0}")]
    Verify(#[from] verify::VerifyError),
    #[error("{0}")]
    Recursion(#[from] recursion::RecursionError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub name: String,
    pub weight: String,
    pub critical: bool,
    pub local: bool,
    pub multiplier: Option<Vec<String>>,
    pub current: Option<Vec<String>>,
    pub density: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub subject: String,
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub model: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub laws: Vec<LawReport>,
    pub checks: Vec<CheckReport>,
    pub ok: bool,
}

impl RunReport {
    fn new(model: &str, command: &str) -> Self {
        RunReport {
            model: model.into(),
            command: command.into(),
            inputs: BTreeMap::new(),
            laws: Vec::new(),
            checks: Vec::new(),
            ok: true,
        }
    }

    fn absorb(&mut self, subject: &str, report: &verify::VerificationReport, table: &SymbolTable) {
        for check in &report.checks {
            self.ok &= check.pass;
            self.checks.push(CheckReport {
                subject: subject.into(),
                name: check.name.clone(),
                pass: check.pass,
                residual: check.residual.as_ref().map(|r| printer::plain(r, table)),
                numeric_max: None,
            });
        }
    }
}

/// Exact rational formatting: integers bare, otherwise `numer/denom`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rendering options shared by the pipelines.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub latex: bool,
    pub samples: usize,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            latex: false,
            samples: 100,
            tol: 1e-9,
        }
    }
}

fn render(e: &Expr, table: &SymbolTable, opts: &Options) -> String {
    if opts.latex {
        printer::latex(e, table)
    } else {
        printer::plain(e, table)
    }
}

fn law_report(
    name: &str,
    law: &ConservationLaw,
    table: &SymbolTable,
    opts: &Options,
) -> LawReport {
    LawReport {
        name: name.into(),
        weight: fmt_rat(&law.weight),
        critical: law.critical,
        local: law.local,
        multiplier: law
            .multiplier
            .as_ref()
            .map(|m| m.iter().map(|e| render(e, table, opts)).collect()),
        current: law
            .current
            .as_ref()
            .map(|c| c.iter().map(|e| render(e, table, opts)).collect()),
        density: law.density.as_ref().map(|d| render(d, table, opts)),
    }
}

fn resolve_entry(sys: &FieldSystem, name: &str) -> Result<crate::system::CatalogEntry, CliError> {
    models::catalog_for(sys)
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no catalog entry `{name}` in model {} (try `catalog`)",
                sys.name
            ))
        })
}

/// `derive`: run the conservation-law formula on a multiplier, reconstruct
/// the density, verify conservation.
pub fn derive(
    model: &str,
    omega_text: Option<&str>,
    entry_name: Option<&str>,
    opts: &Options,
) -> Result<(String, RunReport), CliError> {
    let sys = models::build_by_id(model)?;
    let table = sys.table();
    let mut report = RunReport::new(&sys.name, "derive");
    let (label, omega) = match (omega_text, entry_name) {
        (Some(text), _) => {
            report.inputs.insert("omega".into(), text.into());
            let parsed = parse::parse_expr(text, &table)?;
            let comps = split_components(parsed, sys.n_equations())?;
            ("omega".to_string(), comps)
        }
        (None, Some(name)) => {
            report.inputs.insert("entry".into(), name.into());
            (name.to_string(), resolve_entry(&sys, name)?.components)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "derive needs --omega <expr> or --entry <name>".into(),
            ));
        }
    };

    let adjoint = verify::adjoint_symmetry_check(&omega, &sys)?;
    report.absorb(&label, &adjoint, &table);
    let weight_report = scaling::multiplier_weight_report(&sys, &omega)?;
    let current = scaling::conservation_current(&sys, &omega)?;
    let law = scaling::reconstruct_density(&sys, Some(omega.clone()), &current, &weight_report.w)?;
    if !law.critical {
        let conservation = verify::conservation_check(&law, &sys)?;
        report.absorb(&label, &conservation, &table);
    }
    report.laws.push(law_report(&label, &law, &table, opts));

    let mut human = String::new();
    human.push_str(&format!("model: {}\n", sys.name));
    human.push_str(&format!(
        "adjoint-symmetry check: {}\n",
        pass_str(adjoint.passed())
    ));
    human.push_str(&format!(
        "weight: w = {} (s = [{}], sum p = {})\n",
        fmt_rat(&weight_report.w),
        weight_report
            .s
            .iter()
            .map(fmt_rat)
            .collect::<Vec<_>>()
            .join(", "),
        fmt_rat(&weight_report.p_sum)
    ));
    for (alpha, comp) in current.iter().enumerate() {
        human.push_str(&format!(
            "current[{}] = {}\n",
            sys.indep_names[alpha],
            render(comp, &table, opts)
        ));
    }
    if law.critical {
        human.push_str("CRITICAL: zero weight, formula is silent for this law\n");
    } else {
        if let Some(d) = &law.density {
            human.push_str(&format!("density = {}\n", render(d, &table, opts)));
        }
        human.push_str(&format!(
            "conservation check: {}\n",
            pass_str(report.ok)
        ));
    }
    Ok((human, report))
}

fn split_components(e: Expr, n: usize) -> Result<Vec<Expr>, CliError> {
    if n == 1 {
        Ok(vec![e])
    } else {
        Err(CliError::Usage(format!(
            "model has {n} equation components; pass a catalog entry instead"
        )))
    }
}

/// `hierarchy`: generate hierarchy members for the soliton models.
pub fn hierarchy(
    model: &str,
    k_max: usize,
    opts: &Options,
) -> Result<(String, RunReport), CliError> {
    let sys = models::build_by_id(model)?;
    let table = sys.table();
    let mut report = RunReport::new(&sys.name, "hierarchy");
    report.inputs.insert("k".into(), k_max.to_string());
    let entries = if sys.name == "kdv" {
        recursion::kdv_hierarchy(k_max)?
    } else if sys.name == "sine-gordon" {
        recursion::sg_hierarchy(k_max)?
    } else if sys.name.starts_with("mkdv:") {
        recursion::mkdv_hierarchy(sys.n_fields(), k_max)?
    } else {
        return Err(CliError::Usage(format!(
            "model {} has no built-in hierarchy",
            sys.name
        )));
    };
    let mut human = format!("model: {}\n", sys.name);
    for entry in &entries {
        let law = ConservationLaw::from_density(
            Some(entry.generator.clone()),
            entry.density.clone(),
            entry.weight.clone(),
        );
        let check = verify::conservation_check(&law, &sys)?;
        report.absorb(&format!("k={}", entry.k), &check, &table);
        report
            .laws
            .push(law_report(&format!("k={}", entry.k), &law, &table, opts));
        human.push_str(&format!(
            "k = {}: weight {}, density {}, conservation {}\n",
            entry.k,
            fmt_rat(&entry.weight),
            render(&entry.density, &table, opts),
            pass_str(check.passed())
        ));
    }
    Ok((human, report))
}

/// `weights`: report the scaling weight of a catalog entry and criticality.
pub fn weights(
    model: &str,
    entry_name: &str,
    opts: &Options,
) -> Result<(String, RunReport), CliError> {
    let sys = models::build_by_id(model)?;
    let table = sys.table();
    let mut report = RunReport::new(&sys.name, "weights");
    report.inputs.insert("entry".into(), entry_name.into());
    let entry = resolve_entry(&sys, entry_name)?;
    let weight_report = scaling::multiplier_weight_report(&sys, &entry.components)?;
    let critical = weight_report.w.is_zero();
    report.laws.push(LawReport {
        name: entry.name.clone(),
        weight: fmt_rat(&weight_report.w),
        critical,
        local: entry.components.iter().all(Expr::is_local),
        multiplier: Some(
            entry
                .components
                .iter()
                .map(|e| render(e, &table, opts))
                .collect(),
        ),
        current: None,
        density: None,
    });
    if let Some(expected) = &entry.expected_weight {
        let matches = *expected == weight_report.w;
        report.ok &= matches;
        report.checks.push(CheckReport {
            subject: entry.name.clone(),
            name: "weight-matches-catalog".into(),
            pass: matches,
            residual: None,
            numeric_max: None,
        });
    }
    let mut human = format!(
        "model: {}\nentry: {}\nw = {}{}\n",
        sys.name,
        entry.name,
        fmt_rat(&weight_report.w),
        if critical { " CRITICAL" } else { "" }
    );
    human.push_str(&format!(
        "r = [{}], s = [{}], sum p = {}\n",
        weight_report
            .r
            .iter()
            .map(|r| r.as_ref().map(fmt_rat).unwrap_or_else(|| "-".into()))
            .collect::<Vec<_>>()
            .join(", "),
        weight_report
            .s
            .iter()
            .map(fmt_rat)
            .collect::<Vec<_>>()
            .join(", "),
        fmt_rat(&weight_report.p_sum)
    ));
    Ok((human, report))
}

/// `verify`: check a catalog entry or a user expression as an
/// (adjoint-)symmetry, multiplier and conservation law.
pub fn verify_cmd(
    model: &str,
    entry_name: Option<&str>,
    omega_text: Option<&str>,
    opts: &Options,
) -> Result<(String, RunReport), CliError> {
    let sys = models::build_by_id(model)?;
    let table = sys.table();
    let mut report = RunReport::new(&sys.name, "verify");
    let (label, comps, known_current, expected_weight) = match (entry_name, omega_text) {
        (Some(name), _) => {
            report.inputs.insert("entry".into(), name.into());
            let e = resolve_entry(&sys, name)?;
            (
                e.name.clone(),
                e.components.clone(),
                e.known_current.clone(),
                e.expected_weight.clone(),
            )
        }
        (None, Some(text)) => {
            report.inputs.insert("omega".into(), text.into());
            let parsed = parse::parse_expr(text, &table)?;
            (
                "omega".to_string(),
                split_components(parsed, sys.n_equations())?,
                None,
                None,
            )
        }
        (None, None) => {
            return Err(CliError::Usage(
                "verify needs --entry <name> or --omega <expr>".into(),
            ));
        }
    };
    let adjoint = verify::adjoint_symmetry_check(&comps, &sys)?;
    report.absorb(&label, &adjoint, &table);
    if sys.self_adjoint {
        let symm = verify::symmetry_check(&comps, &sys)?;
        report.absorb(&label, &symm, &table);
    }
    let multiplier = verify::multiplier_condition_check(&comps, &sys)?;
    report.absorb(&label, &multiplier, &table);
    let weight_report = scaling::multiplier_weight_report(&sys, &comps)?;
    if let Some(expected) = &expected_weight {
        let ok = *expected == weight_report.w;
        report.ok &= ok;
        report.checks.push(CheckReport {
            subject: label.clone(),
            name: "weight-matches-catalog".into(),
            pass: ok,
            residual: None,
            numeric_max: None,
        });
    }
    if let Some(current) = known_current {
        let law = ConservationLaw::from_current(
            &sys,
            Some(comps.clone()),
            current,
            weight_report.w.clone(),
        );
        let conservation = verify::conservation_check(&law, &sys)?;
        report.absorb(&label, &conservation, &table);
        report
            .laws
            .push(law_report(&label, &law, &table, opts));
    }
    let mut human = format!("model: {}\nsubject: {}\n", sys.name, label);
    for check in &report.checks {
        human.push_str(&format!("{}: {}\n", check.name, pass_str(check.pass)));
    }
    human.push_str(&format!("w = {}\n", fmt_rat(&weight_report.w)));
    human.push_str(&format!("overall: {}\n", pass_str(report.ok)));
    Ok((human, report))
}

/// `catalog`: list the model's catalog entries.
pub fn catalog(model: &str, opts: &Options) -> Result<(String, RunReport), CliError> {
    let sys = models::build_by_id(model)?;
    let table = sys.table();
    let mut report = RunReport::new(&sys.name, "catalog");
    let mut human = format!("model: {}\n", sys.name);
    for entry in models::catalog_for(&sys) {
        let weight = entry
            .expected_weight
            .as_ref()
            .map(fmt_rat)
            .unwrap_or_else(|| "-".into());
        human.push_str(&format!(
            "{}  [{:?}/{:?}]  w = {}  components: {}\n",
            entry.name,
            entry.kind,
            entry.class,
            weight,
            entry
                .components
                .iter()
                .map(|e| render(e, &table, opts))
                .collect::<Vec<_>>()
                .join("; ")
        ));
        report.laws.push(LawReport {
            name: entry.name.clone(),
            weight,
            critical: entry.expected_weight.map(|w| w.is_zero()).unwrap_or(false),
            local: entry.components.iter().all(Expr::is_local),
            multiplier: Some(
                entry
                    .components
                    .iter()
                    .map(|e| render(e, &table, opts))
                    .collect(),
            ),
            current: entry
                .known_current
                .as_ref()
                .map(|c| c.iter().map(|e| render(e, &table, opts)).collect()),
            density: None,
        });
    }
    Ok((human, report))
}

/// `selftest`: the invariant suite over every built-in model.
pub fn selftest(opts: &Options) -> Result<(String, RunReport), CliError> {
    let mut report = RunReport::new("all", "selftest");
    let mut human = String::new();
    let line = |report: &mut RunReport, subject: &str, name: &str, pass: bool| {
        report.ok &= pass;
        report.checks.push(CheckReport {
            subject: subject.into(),
            name: name.into(),
            pass,
            residual: None,
            numeric_max: None,
        });
        format!("{subject}: {name}: {}\n", pass_str(pass))
    };

    for id in models::builtin_ids() {
        let sys = models::build_by_id(id)?;
        let table = sys.table();
        human.push_str(&line(
            &mut report,
            id,
            "structure-valid",
            sys.validate().is_ok(),
        ));
        human.push_str(&line(
            &mut report,
            id,
            "scaling-invariant",
            scaling::check_scaling_invariance(&sys).is_ok(),
        ));
        for entry in models::catalog_for(&sys) {
            let subject = format!("{id}/{}", entry.name);
            let adjoint_ok = verify::adjoint_symmetry_check(&entry.components, &sys)?
                .passed();
            human.push_str(&line(&mut report, &subject, "adjoint-symmetry", adjoint_ok));
            let weight_report = scaling::multiplier_weight_report(&sys, &entry.components)?;
            if let Some(expected) = &entry.expected_weight {
                human.push_str(&line(
                    &mut report,
                    &subject,
                    "weight",
                    *expected == weight_report.w,
                ));
            }
            if let Some(current) = &entry.known_current {
                let law = ConservationLaw::from_current(
                    &sys,
                    Some(entry.components.clone()),
                    current.clone(),
                    weight_report.w.clone(),
                );
                let cons = verify::conservation_check(&law, &sys)?;
                human.push_str(&line(
                    &mut report,
                    &subject,
                    "conservation",
                    cons.passed(),
                ));
                // numeric cross-check of the divergence
                let mut parts = Vec::new();
                for (alpha, comp) in current.iter().enumerate() {
                    parts.push(crate::jet::total_derivative(comp, alpha).map_err(
                        crate::scaling::ScalingError::from,
                    )?);
                }
                let divergence = crate::expr::sum(parts);
                let numeric = verify::numeric_on_shell_check(
                    &divergence,
                    &sys,
                    opts.samples,
                    opts.tol,
                    verify::DEFAULT_SEED,
                )?;
                report.ok &= numeric.pass;
                report.checks.push(CheckReport {
                    subject: subject.clone(),
                    name: "numeric-divergence".into(),
                    pass: numeric.pass,
                    residual: None,
                    numeric_max: Some(numeric.max_residual),
                });
                human.push_str(&format!(
                    "{subject}: numeric-divergence: {} (max {:.3e})\n",
                    pass_str(numeric.pass),
                    numeric.max_residual
                ));
            }
            // silence unused warning for table
            let _ = &table;
        }
    }

    // Hierarchies.
    for entry in recursion::kdv_hierarchy(2)? {
        let sys = models::build_kdv();
        let law = ConservationLaw::from_density(
            Some(entry.generator.clone()),
            entry.density.clone(),
            entry.weight.clone(),
        );
        let pass = verify::conservation_check(&law, &sys)?.passed();
        human.push_str(&line(
            &mut report,
            &format!("kdv/hierarchy-k{}", entry.k),
            "conservation",
            pass,
        ));
    }
    for entry in recursion::sg_hierarchy(2)? {
        let sys = models::build_sine_gordon();
        let law = ConservationLaw::from_density(
            Some(entry.generator.clone()),
            entry.density.clone(),
            entry.weight.clone(),
        );
        let pass = verify::conservation_check(&law, &sys)?.passed();
        human.push_str(&line(
            &mut report,
            &format!("sine-gordon/hierarchy-k{}", entry.k),
            "conservation",
            pass,
        ));
    }
    for entry in recursion::mkdv_hierarchy(2, 1)? {
        let sys = models::build_mkdv(2)?;
        let law = ConservationLaw::from_density(
            Some(entry.generator.clone()),
            entry.density.clone(),
            entry.weight.clone(),
        );
        let pass = verify::conservation_check(&law, &sys)?.passed();
        human.push_str(&line(
            &mut report,
            &format!("mkdv:2/hierarchy-k{}", entry.k),
            "conservation",
            pass,
        ));
    }

    // Negative control: u_x is not a KdV adjoint-symmetry.
    {
        let sys = models::build_kdv();
        let failed = !verify::adjoint_symmetry_check(&[Expr::field(0, &[1])], &sys)?
            .passed();
        human.push_str(&line(
            &mut report,
            "kdv/u_x",
            "negative-control-rejected",
            failed,
        ));
    }

    human.push_str(&format!("selftest: {}\n", pass_str(report.ok)));
    Ok((human, report))
}

fn pass_str(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
