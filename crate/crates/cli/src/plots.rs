//! Deterministic SVG line plots built from the store's CSV tables.

use crate::error::Result;
use crate::store::{ResultStore, Table};
use std::fmt::Write;
use std::path::PathBuf;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub markers: bool,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(label, y)`.
    pub reference: Vec<(String, f64)>,
}

fn tick(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-2 || x.abs() >= 1e4 {
        format!("{x:.2e}")
    } else {
        format!("{x:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.1 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl Figure {
    pub fn to_svg(&self) -> String {
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let (x0, x1) = span(self.series.iter().flat_map(|s| s.points.iter().map(|p| fx(p.0))));
        let (y0, y1) = span(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1))
                .chain(self.reference.iter().map(|r| r.1)),
        );
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (fx(x) - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let xl = if self.log_x { 10f64.powf(xv) } else { xv };
            let x = LEFT + f * pw;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 19.0,
                tick(xl)
            );
            let yv = y0 + f * (y1 - y0);
            let y = TOP + ph - f * ph;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        let mut legend = 0usize;
        let mut entry = |s: &mut String, label: &str, color: &str, dash: bool| {
            let y = TOP + 10.0 + 18.0 * legend as f64;
            let x = W - RIGHT + 12.0;
            let style = if dash { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{style}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                x + 22.0,
                x + 28.0,
                y + 4.0,
                escape(label)
            );
            legend += 1;
        };

        for r in &self.reference {
            let y = py(r.1);
            let _ = writeln!(
                s,
                r##"<line class="reference" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##,
                LEFT + pw
            );
            entry(&mut s, &r.0, "#555555", true);
        }
        for (k, ser) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = ser
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
            if ser.markers {
                for &(x, y) in ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(x), py(y));
                }
            }
            entry(&mut s, &ser.label, color, false);
        }
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Debug, Default)]
pub struct PlotOutcome {
    pub files: Vec<PathBuf>,
    /// One line per plot that was skipped.
    pub notes: Vec<String>,
}

pub fn gap_figure(t: &Table) -> Option<Figure> {
    let eps = t.numbers("eps")?;
    let gap = t.numbers("gap")?;
    let rhs = t.numbers("rhs")?;
    Some(Figure {
        title: "Second-order gap along the ladder".into(),
        x_label: "ε".into(),
        y_label: "(G_ε/ε − 2c_W η(t₀))/ε".into(),
        log_x: true,
        series: vec![Series {
            label: "gap".into(),
            points: eps.into_iter().zip(gap).collect(),
            markers: true,
        }],
        reference: rhs.first().map(|&r| vec![("liminf bound".to_string(), r)]).unwrap_or_default(),
    })
}

pub fn iso_figure(t: &Table) -> Option<Figure> {
    let v = t.numbers("v")?;
    let value = t.numbers("value")?;
    let branch = t.column("branch")?;
    let mut series: Vec<Series> = Vec::new();
    for i in 0..v.len() {
        match series.last_mut() {
            Some(s) if s.label == branch[i] => s.points.push((v[i], value[i])),
            _ => {
                // Join the pieces so the curve stays continuous.
                let start = series.last().and_then(|s| s.points.last().copied());
                let mut points: Vec<(f64, f64)> = start.into_iter().collect();
                points.push((v[i], value[i]));
                series.push(Series {
                    label: branch[i].to_string(),
                    points,
                    markers: false,
                });
            }
        }
    }
    Some(Figure {
        title: "Isoperimetric profile".into(),
        x_label: "volume".into(),
        y_label: "relative perimeter".into(),
        log_x: false,
        series,
        reference: Vec::new(),
    })
}

pub fn drift_figure(t: &Table) -> Option<Figure> {
    let eps = t.numbers("eps")?;
    let time = t.numbers("t")?;
    let l1 = t.numbers("l1")?;
    let mut series: Vec<Series> = Vec::new();
    for i in 0..eps.len() {
        let label = format!("ε = {}", eps[i]);
        match series.last_mut() {
            Some(s) if s.label == label => s.points.push((time[i], l1[i])),
            _ => series.push(Series {
                label,
                points: vec![(time[i], l1[i])],
                markers: false,
            }),
        }
    }
    Some(Figure {
        title: "L¹ distance to the sharp interface".into(),
        x_label: "t".into(),
        y_label: "‖u(t) − u_E₀‖₁".into(),
        log_x: false,
        series,
        reference: Vec::new(),
    })
}

type Builder = fn(&Table) -> Option<Figure>;

const PLOTS: [(&str, &str, Builder); 3] = [
    ("gap_vs_eps", "minimize1d", gap_figure),
    ("iso_profile", "iso_profile", iso_figure),
    ("drift", "dynamics_series", drift_figure),
];

/// Writes every plot whose table is present; the others are noted.
pub fn emit_plots(store: &mut ResultStore) -> Result<PlotOutcome> {
    let mut out = PlotOutcome::default();
    for (name, table, build) in PLOTS {
        let Some(t) = store.table(table) else {
            out.notes.push(format!("{name}: skipped, no {table}.csv in the store"));
            continue;
        };
        match build(&t) {
            Some(fig) => out.files.push(store.write_plot(name, &fig.to_svg())?),
            None => out.notes.push(format!("{name}: skipped, {table}.csv lacks the expected columns")),
        }
    }
    Ok(out)
}
