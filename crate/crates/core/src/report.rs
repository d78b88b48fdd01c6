//! Plain-text summary tables.

use std::fmt::Write;

use crate::harness::{AggregateReport, Condition, OBJECTIVES};
use crate::rules::Rule;

fn conditions(report: &AggregateReport) -> Vec<Condition> {
    Condition::all()
        .into_iter()
        .filter(|&c| report.cells.iter().any(|cell| cell.strategy == c))
        .collect()
}

fn cell(report: &AggregateReport, c: Condition, rule: Rule, objective: &str, scale: f64, digits: usize) -> String {
    match report.cell(c, rule).and_then(|cell| cell.objectives.get(objective)) {
        Some(s) => format!("{:.*} ± {:.*}", digits, s.mean * scale, digits, s.se * scale),
        None => "-".to_string(),
    }
}

/// EJR and PJR satisfaction percentages for AV and CC.
pub fn axiom_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "EJR% / PJR% satisfaction");
    let _ = writeln!(out, "{:<16} {:>16} {:>16} {:>16} {:>16}", "strategy", "EJR av", "EJR cc", "PJR av", "PJR cc");
    for c in conditions(report) {
        let _ = writeln!(
            out,
            "{:<16} {:>16} {:>16} {:>16} {:>16}",
            c.name(),
            cell(report, c, Rule::Av, "ejr", 100.0, 1),
            cell(report, c, Rule::Cc, "ejr", 100.0, 1),
            cell(report, c, Rule::Av, "pjr", 100.0, 1),
            cell(report, c, Rule::Cc, "pjr", 100.0, 1),
        );
    }
    out
}

/// Initial minority-supported candidates kept in the AV committee.
pub fn minority_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Minority-supported candidates elected by AV");
    let _ = writeln!(out, "{:<16} {:>16}", "strategy", "mean ± se");
    for c in conditions(report) {
        let _ = writeln!(out, "{:<16} {:>16}", c.name(), cell(report, c, Rule::Av, "minority_preserved", 1.0, 2));
    }
    out
}

/// AV's URagg under each condition relative to MES and PAV without deliberation.
pub fn comparison_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    let base = |rule| report.mean(Condition::INITIAL, rule, "uragg");
    let (mes, pav) = (base(Rule::Mes), base(Rule::Pav));
    let label = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    let _ = writeln!(out, "AV URagg relative to initial MES ({}) and PAV ({})", label(mes), label(pav));
    let _ = writeln!(out, "{:<16} {:>10} {:>10} {:>10}", "strategy", "AV URagg", "/ MES", "/ PAV");
    for c in conditions(report) {
        let av = report.mean(c, Rule::Av, "uragg");
        let ratio = |b: Option<f64>| match (av, b) {
            (Some(a), Some(b)) if b > 0.0 => format!("{:.3}", a / b),
            _ => "-".to_string(),
        };
        let _ = writeln!(out, "{:<16} {:>10} {:>10} {:>10}", c.name(), label(av), ratio(mes), ratio(pav));
    }
    out
}

/// Every objective for every (condition, rule) cell.
pub fn means_table(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<16} {:<5}", "strategy", "rule");
    for o in OBJECTIVES {
        let _ = write!(out, " {o:>12}");
    }
    out.push('\n');
    for c in conditions(report) {
        for rule in Rule::ALL {
            let Some(cell) = report.cell(c, rule) else { continue };
            let _ = write!(out, "{:<16} {:<5}", c.name(), rule.name());
            for o in OBJECTIVES {
                match cell.objectives.get(o) {
                    Some(s) => {
                        let _ = write!(out, " {:>12.4}", s.mean);
                    }
                    None => {
                        let _ = write!(out, " {:>12}", "-");
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Everything above, plus a note on the significance tests.
pub fn render(report: &AggregateReport) -> String {
    let mut out = format!(
        "{} replications, mean eligibility attempts {:.2}\n\n",
        report.replications, report.attempts.mean
    );
    out.push_str(&axiom_table(report));
    out.push('\n');
    out.push_str(&minority_table(report));
    out.push('\n');
    out.push_str(&comparison_table(report));
    out.push('\n');
    out.push_str(&means_table(report));
    out.push('\n');
    if report.insufficient_data {
        out.push_str("significance: insufficient data for paired tests\n");
    } else {
        let tested: Vec<_> = report.significance.iter().filter_map(|c| c.test.map(|t| (c, t))).collect();
        let both = tested.iter().filter(|(_, t)| t.t_pvalue < 0.05 && t.wilcoxon_pvalue < 0.05).count();
        let _ = writeln!(
            out,
            "significance: {both} of {} pairwise comparisons have p < 0.05 under both the t-test and the signed-rank test",
            tested.len()
        );
    }
    out
}
