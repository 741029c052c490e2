//! Self-contained SVG line plots.

use std::collections::BTreeMap;
use std::fmt::Write;

use selfish_bandit::environments::phase_plan;
use selfish_bandit::simlab::{scaling_fit, ScalingFit, ScalingPoint};

use crate::error::CliError;
use crate::schema::{PathRow, RunRow};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Maps data coordinates onto the plotting area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64, pad: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - pad.max(0.5), hi + pad.max(0.5))
    } else {
        (lo - pad * (hi - lo), hi + pad * (hi - lo))
    }
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, (LEFT + WIDTH - RIGHT) / 2.0, escape(title));
}

fn axes(svg: &mut String, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(svg, r#"<rect x="{x0}" y="{y0}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0, escape(xlabel));
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn polyline(svg: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#, pts.join(" "));
}

fn legend(svg: &mut String, i: usize, color: &str, label: &str) {
    let y = TOP + 10.0 + 20.0 * i as f64;
    let x = WIDTH - RIGHT + 15.0;
    let _ = writeln!(svg, r#"<line x1="{x}" y1="{y}" x2="{:.1}" y2="{y}" stroke="{color}" stroke-width="3"/>"#, x + 20.0);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x + 26.0, y + 4.0, escape(label));
}

/// Decade ticks inside `[lo, hi]` (log10 units), or the endpoints when the
/// range holds none.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let ticks: Vec<f64> = (lo.ceil() as i64..=hi.floor() as i64).map(|e| e as f64).collect();
    if ticks.is_empty() {
        vec![lo, hi]
    } else {
        ticks
    }
}

fn log_label(e: f64) -> String {
    if (e - e.round()).abs() < 1e-9 {
        format!("10<tspan baseline-shift=\"super\" font-size=\"9\">{}</tspan>", e.round() as i64)
    } else {
        format!("{:.3e}", 10f64.powf(e))
    }
}

/// Mean regret per learner and horizon, on log-log axes, with the fitted
/// power law of each learner dashed and its exponent in the legend.
pub fn regret_plot(rows: &[RunRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Schema("run CSV has no data rows".into()));
    }
    let mut groups: BTreeMap<&str, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
    for r in rows {
        let e = groups.entry(&r.learner).or_default().entry(r.horizon).or_insert((0.0, 0));
        e.0 += r.pseudo_regret;
        e.1 += 1;
    }
    // (learner, log10 points, fit)
    type Series<'a> = (&'a str, Vec<(f64, f64)>, Option<ScalingFit>);
    let mut series: Vec<Series> = Vec::new();
    for (learner, by_t) in &groups {
        let points: Vec<ScalingPoint> = by_t
            .iter()
            .map(|(&t, &(sum, n))| ScalingPoint { horizon: t, mean_regret: sum / n as f64, stderr: 0.0 })
            .filter(|p| p.mean_regret > 0.0 && p.horizon > 0)
            .collect();
        let fit = scaling_fit(&points).ok();
        let logs = points.iter().map(|p| ((p.horizon as f64).log10(), p.mean_regret.log10())).collect();
        series.push((learner, logs, fit));
    }
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    if all.is_empty() {
        return Err(CliError::Schema("no positive mean regrets to draw on log axes".into()));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        let v: Vec<f64> = all.iter().map(f).collect();
        (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    };
    let ((xl, xh), (yl, yh)) = (fold(|p| p.0), fold(|p| p.1));
    let frame = Frame { x: padded(xl, xh, 0.05), y: padded(yl, yh, 0.08) };

    let mut svg = String::new();
    open(&mut svg, "Mean pseudo-regret against horizon");
    axes(&mut svg, "horizon T (log scale)", "mean pseudo-regret (log scale), fitted T^α");
    for e in log_ticks(frame.x.0, frame.x.1) {
        let x = frame.px(e);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{:.1}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, HEIGHT - BOTTOM, HEIGHT - BOTTOM + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, HEIGHT - BOTTOM + 18.0, log_label(e));
    }
    for e in log_ticks(frame.y.0, frame.y.1) {
        let y = frame.py(e);
        let _ = writeln!(svg, r#"<line x1="{:.1}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, log_label(e));
    }
    for (i, (learner, pts, fit)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (frame.px(x), frame.py(y))).collect();
        polyline(&mut svg, &mapped, color, false);
        for (x, y) in &mapped {
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#);
        }
        let label = match fit {
            Some(f) => {
                // ln-ln fit; the slope is base independent, the intercept is not.
                let line = |x: f64| (f.slope * x * std::f64::consts::LN_10 + f.intercept) / std::f64::consts::LN_10;
                let (a, b) = (frame.x.0, frame.x.1);
                polyline(&mut svg, &[(frame.px(a), frame.py(line(a))), (frame.px(b), frame.py(line(b)))], color, true);
                format!("{learner}: α = {:.3}", f.slope)
            }
            None => format!("{learner}: α n/a"),
        };
        legend(&mut svg, i, color, &label);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Mean `pi_{t,1}` against `t / T`, one line per configuration, with the
/// phase boundaries of the lower-bound sequence marked.
pub fn path_plot(rows: &[PathRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Schema("path CSV has no data rows".into()));
    }
    let mut groups: BTreeMap<(String, u64, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if r.horizon == 0 {
            return Err(CliError::Schema("path row with T = 0".into()));
        }
        groups
            .entry((r.learner.clone(), r.horizon, r.env.clone()))
            .or_default()
            .push((r.t as f64 / r.horizon as f64, r.mean_pi1));
    }
    let xmax = groups.values().flatten().map(|p| p.0).fold(1.0, f64::max);
    let frame = Frame { x: (0.0, xmax), y: (0.0, 1.0) };

    let mut svg = String::new();
    open(&mut svg, "Mean probability of arm 1");
    axes(&mut svg, "round t / T", "mean π(t, arm 1)");
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let (x, y) = (frame.px(v * xmax), frame.py(v));
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{:.2}</text>"#, HEIGHT - BOTTOM + 18.0, v * xmax);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{v:.2}</text>"#, LEFT - 8.0, y + 4.0);
    }
    let mut marked = std::collections::BTreeSet::new();
    for (_, horizon, env) in groups.keys() {
        if env != "lower-bound" || !marked.insert(*horizon) {
            continue;
        }
        if let Ok(plan) = phase_plan(*horizon) {
            for (b, name) in plan.boundaries[..3].iter().zip(["T1", "T1+T2", "T1+T2+T3"]) {
                let x = frame.px(*b as f64 / *horizon as f64);
                let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.1}" stroke="#888" stroke-dasharray="3 3"/>"##, HEIGHT - BOTTOM);
                let _ = writeln!(svg, r##"<text x="{:.2}" y="{:.1}" fill="#555" font-size="10">{name}</text>"##, x + 2.0, TOP + 12.0);
            }
        }
    }
    for (i, ((learner, horizon, env), pts)) in groups.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (frame.px(x), frame.py(y))).collect();
        polyline(&mut svg, &mapped, color, false);
        legend(&mut svg, i, color, &format!("{learner}, {env}, T = {horizon}"));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_row(learner: &str, t: u64, regret: f64) -> RunRow {
        RunRow {
            trial: 0,
            seed: 0,
            horizon: t,
            eta: 0.1,
            gamma: 0.1,
            learner: learner.into(),
            env: "lower-bound".into(),
            pseudo_regret: regret,
            ln_pi_final: 0.0,
            pi_t1: None,
            pi_t1t2: None,
            e1: None,
            e2: None,
            recovered: true,
            second_moment_sum: 0.0,
            bias_sum: 0.0,
            arm1_pulls_phase1: 0,
        }
    }

    #[test]
    fn one_polyline_per_learner_plus_fits() {
        let mut rows = Vec::new();
        for t in [1000u64, 10_000, 100_000] {
            rows.push(run_row("wsu-ux", t, (t as f64).powf(2.0 / 3.0)));
            rows.push(run_row("exp3", t, (t as f64).sqrt()));
        }
        let svg = regret_plot(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains("wsu-ux: α = 0.667"));
        assert!(svg.contains("exp3: α = 0.500"));
        assert!(svg.contains("log scale"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn empty_input_is_a_schema_error() {
        assert!(matches!(regret_plot(&[]), Err(CliError::Schema(_))));
        assert!(matches!(path_plot(&[]), Err(CliError::Schema(_))));
    }

    #[test]
    fn path_plot_marks_phases() {
        let rows: Vec<PathRow> = (1..=101)
            .map(|i| PathRow {
                learner: "wsu-ux".into(),
                env: "lower-bound".into(),
                horizon: 10_000,
                eta: 0.1,
                gamma: 0.1,
                t: (i - 1) * 100 + 1,
                mean_pi1: 0.5,
            })
            .collect();
        let svg = path_plot(&rows).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">T1<") && svg.contains(">T1+T2<"));
    }

    #[test]
    fn text_is_escaped() {
        let svg = regret_plot(&[run_row("<a&b>", 10, 1.0)]).unwrap();
        assert!(svg.contains("&lt;a&amp;b&gt;"));
    }
}
