//! Grouped bar charts rendered as standalone SVG.

use std::fmt::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{Condition, RunRecord};
use crate::rules::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Variance,
    Ur,
    Rr,
    Uragg,
    Vs,
    CcApprovals,
    Disagreement,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Variance,
        Figure::Ur,
        Figure::Rr,
        Figure::Uragg,
        Figure::Vs,
        Figure::CcApprovals,
        Figure::Disagreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Variance => "variance",
            Figure::Ur => "ur",
            Figure::Rr => "rr",
            Figure::Uragg => "uragg",
            Figure::Vs => "vs",
            Figure::CcApprovals => "cc_approvals",
            Figure::Disagreement => "disagreement",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Figure::Variance => "Mean utility variance",
            Figure::Ur => "Utilitarian ratio",
            Figure::Rr => "Representation ratio",
            Figure::Uragg => "Utility-representation aggregate",
            Figure::Vs => "Voter satisfaction",
            Figure::CcApprovals => "Approvals of CC winners, ascending",
            Figure::Disagreement => "Minority-majority ballot disagreement",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown figure {s:?}")))
    }
}

/// `values[group][series]`; `NaN` marks a missing bar.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub groups: Vec<String>,
    pub series: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn figure_data(records: &[RunRecord], figure: Figure) -> Result<BarChart> {
    if records.is_empty() {
        return Err(Error::invalid("no records to plot"));
    }
    let conditions: Vec<Condition> = Condition::all()
        .into_iter()
        .filter(|c| records.iter().any(|r| r.strategy == *c))
        .collect();
    let rules: Vec<Rule> = Rule::ALL.into_iter().filter(|x| records.iter().any(|r| r.rule == *x)).collect();
    let series: Vec<String> = conditions.iter().map(|c| c.name().to_string()).collect();
    let cell_mean = |c: Condition, rule: Rule, f: &dyn Fn(&RunRecord) -> f64| {
        mean(records.iter().filter(|r| r.strategy == c && r.rule == rule).map(f))
    };
    let (groups, values) = match figure {
        Figure::Variance | Figure::Disagreement => {
            // consensus statistics do not depend on the rule
            let rule = rules[0];
            let f = |r: &RunRecord| match figure {
                Figure::Variance => r.consensus.utility_variance,
                _ => r.consensus.intergroup_disagreement,
            };
            let row = conditions.iter().map(|&c| cell_mean(c, rule, &f)).collect();
            (vec!["all rules".to_string()], vec![row])
        }
        Figure::CcApprovals => {
            let k = records
                .iter()
                .filter(|r| r.rule == Rule::Cc)
                .map(|r| r.scores.committee_approvals.len())
                .max()
                .ok_or_else(|| Error::invalid("no CC records to plot"))?;
            let groups = (1..=k).map(|i| format!("winner {i}")).collect();
            let values = (0..k)
                .map(|i| {
                    conditions
                        .iter()
                        .map(|&c| cell_mean(c, Rule::Cc, &|r| r.scores.committee_approvals.get(i).map_or(f64::NAN, |&v| v as f64)))
                        .collect()
                })
                .collect();
            (groups, values)
        }
        Figure::Ur | Figure::Rr | Figure::Uragg | Figure::Vs => {
            let f = |r: &RunRecord| match figure {
                Figure::Ur => r.scores.ur,
                Figure::Rr => r.scores.rr,
                Figure::Uragg => r.scores.uragg,
                _ => r.scores.vs,
            };
            let groups = rules.iter().map(|r| r.name().to_uppercase()).collect();
            let values = rules.iter().map(|&rule| conditions.iter().map(|&c| cell_mean(c, rule, &f)).collect()).collect();
            (groups, values)
        }
    };
    Ok(BarChart {
        title: figure.title().to_string(),
        groups,
        series,
        values,
    })
}

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(chart: &BarChart) -> String {
    let (width, height) = (900.0, 480.0);
    let (left, right, top, bottom) = (70.0, 170.0, 50.0, 60.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let finite = chart.values.iter().flatten().copied().filter(|v| v.is_finite());
    let max = finite.fold(0.0f64, f64::max);
    let y_max = if max > 0.0 { nice_ceiling(max) } else { 1.0 };
    let y = |v: f64| top + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        escape(&chart.title)
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" x2="{:.1}" y1="{yy:.1}" y2="{yy:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            yy + 4.0,
            format_tick(v)
        );
    }
    let n_groups = chart.groups.len().max(1) as f64;
    let group_w = plot_w / n_groups;
    let n_series = chart.series.len().max(1) as f64;
    let bar_w = group_w * 0.8 / n_series;
    for (g, name) in chart.groups.iter().enumerate() {
        let gx = left + group_w * g as f64;
        for (s, &v) in chart.values[g].iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let x = gx + group_w * 0.1 + bar_w * s as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {}: {v:.4}</title></rect>"#,
                y(v),
                bar_w * 0.92,
                (top + plot_h - y(v)).max(0.0),
                PALETTE[s % PALETTE.len()],
                escape(name),
                escape(&chart.series[s])
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            top + plot_h + 20.0,
            escape(name)
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" x2="{left}" y1="{top}" y2="{:.1}" stroke="black"/><line x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h,
        top + plot_h
    );
    for (s, name) in chart.series.iter().enumerate() {
        let ly = top + 18.0 * s as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{ly:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            width - right + 16.0,
            PALETTE[s % PALETTE.len()],
            width - right + 34.0,
            ly + 10.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn nice_ceiling(v: f64) -> f64 {
    let step = 10f64.powf(v.log10().floor());
    for m in [1.0, 1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0] {
        if m * step >= v {
            return m * step;
        }
    }
    10.0 * step
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
