//! Footfall diagrams and trace plots emitted as plain SVG.
//!
//! No plotting dependency: the output is rectangles, polylines and text.
//! The bar diagram shows per-leg stance intervals in stride units; the
//! trace plot adds per-leg ground-force and foot-speed curves with the
//! expected stance/swing weights overlaid.

use gaitrl::gait::{GaitSpec, LegId, StrideTiming};
use gaitrl::symmetry::{expected_indicator, PhaseIndicatorConfig, PhaseKind};
use gaitrl::trace::Trace;
use gaitrl::util::wrap_unit;

/// Per-leg stance intervals (start, end) in stride units over a window of
/// whole strides, canonical leg order LH, LF, RF, RH. Intervals lie within
/// `[0, strides)` and never overlap within a leg.
#[derive(Debug, Clone, PartialEq)]
pub struct FootfallDiagram {
    pub stance: [Vec<(f64, f64)>; 4],
    pub strides: usize,
}

impl FootfallDiagram {
    /// Ideal intervals for a phase set: each leg is in stance for the last
    /// `duty` fraction of its own cycle; a reversed command reverses the
    /// clock, which shifts where the window lands but not its width.
    pub fn from_spec(spec: &GaitSpec, strides: usize) -> gaitrl::Result<Self> {
        let timing = StrideTiming::from_command(spec.v_cmd, 0.0)?;
        let duty = timing.duty;
        let backward = spec.v_cmd < 0.0;
        let mut stance: [Vec<(f64, f64)>; 4] = Default::default();
        for leg in LegId::ALL {
            let theta = spec.offset(leg);
            // Local phase is wrap(x + theta) forward, wrap(-(x + theta))
            // reversed; stance is the window [1 - duty, 1). Solving for the
            // clock coordinate x gives one window per stride starting at:
            let start = if backward {
                wrap_unit(-theta)
            } else {
                wrap_unit(1.0 - duty - theta)
            };
            let runs = &mut stance[leg.index()];
            for k in -1i64..strides as i64 {
                let lo = (k as f64 + start).max(0.0);
                let hi = (k as f64 + start + duty).min(strides as f64);
                if hi > lo {
                    runs.push((lo, hi));
                }
            }
        }
        Ok(FootfallDiagram { stance, strides })
    }

    /// Measured intervals from a rollout trace: contact runs mapped to
    /// stride units through the mean commanded stride period.
    pub fn from_trace(trace: &Trace) -> gaitrl::Result<Self> {
        if trace.rows.is_empty() {
            return Err(gaitrl::Error::Trace("empty trace".into()));
        }
        let mean_v = trace.rows.iter().map(|r| r.v_cmd).sum::<f64>() / trace.rows.len() as f64;
        let period = gaitrl::gait::stride_period(mean_v, 0.0)?;
        let t0 = trace.rows[0].time;
        let x_of = |t: f64| (t - t0) / period;
        let span = x_of(trace.rows.last().unwrap().time);
        let strides = span.ceil().max(1.0) as usize;

        let mut stance: [Vec<(f64, f64)>; 4] = Default::default();
        for leg in 0..4 {
            let runs = &mut stance[leg];
            let mut open: Option<f64> = None;
            for row in &trace.rows {
                let x = x_of(row.time);
                match (row.contact[leg], open) {
                    (true, None) => open = Some(x),
                    (false, Some(lo)) => {
                        runs.push((lo, x));
                        open = None;
                    }
                    _ => {}
                }
            }
            if let Some(lo) = open {
                let end = span.min(strides as f64);
                if end > lo {
                    runs.push((lo, end));
                }
            }
        }
        Ok(FootfallDiagram { stance, strides })
    }

    /// Fraction of the window each leg spends in stance.
    pub fn stance_fraction(&self, leg: LegId) -> f64 {
        let total: f64 = self.stance[leg.index()].iter().map(|(a, b)| b - a).sum();
        total / self.strides as f64
    }
}

const LEG_COLORS: [&str; 4] = ["#31688e", "#35b779", "#e57a44", "#9e4b9e"];
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const PLOT_W: f64 = 720.0;

fn svg_header(out: &mut String, width: f64, height: f64) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    out.push_str(&format!(
        "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{}</text>\n",
        escape(s)
    ));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Append the bar rows for a diagram starting at vertical offset `y0`;
/// returns the height consumed.
fn footfall_rows(out: &mut String, diag: &FootfallDiagram, y0: f64) -> f64 {
    let row_h = 24.0;
    let gap = 10.0;
    let x_scale = PLOT_W / diag.strides as f64;
    for leg in LegId::ALL {
        let i = leg.index();
        let y = y0 + i as f64 * (row_h + gap);
        text(out, MARGIN_L - 10.0, y + row_h * 0.7, "end", leg.label());
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{y:.1}\" width=\"{PLOT_W:.1}\" height=\"{row_h:.1}\" \
             fill=\"#f4f4f4\"/>\n",
            MARGIN_L
        ));
        for (lo, hi) in &diag.stance[i] {
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{y:.1}\" width=\"{:.2}\" height=\"{row_h:.1}\" \
                 fill=\"{}\"/>\n",
                MARGIN_L + lo * x_scale,
                (hi - lo) * x_scale,
                LEG_COLORS[i]
            ));
        }
    }
    let rows_h = 4.0 * row_h + 3.0 * gap;
    // Stride grid lines and axis labels.
    for s in 0..=diag.strides {
        let x = MARGIN_L + s as f64 * x_scale;
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{y0:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
             stroke=\"#999\" stroke-dasharray=\"3 3\"/>\n",
            y0 + rows_h
        ));
        text(out, x, y0 + rows_h + 16.0, "middle", &s.to_string());
    }
    text(
        out,
        MARGIN_L + PLOT_W / 2.0,
        y0 + rows_h + 32.0,
        "middle",
        "stride",
    );
    rows_h + 40.0
}

/// Bars-only footfall diagram for a phase set or measured trace.
pub fn footfall_svg(diag: &FootfallDiagram, title: &str) -> String {
    let mut out = String::new();
    let height = 30.0 + 4.0 * 24.0 + 3.0 * 10.0 + 48.0;
    svg_header(&mut out, MARGIN_L + PLOT_W + MARGIN_R, height);
    text(&mut out, MARGIN_L, 18.0, "start", title);
    footfall_rows(&mut out, diag, 30.0);
    out.push_str("</svg>\n");
    out
}

fn polyline(out: &mut String, pts: &[(f64, f64)], stroke: &str, dash: Option<&str>) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>\n",
        coords.join(" ")
    ));
}

/// Footfall bars plus per-leg curve panels: normalized ground force with the
/// expected stance weight overlaid, and normalized foot speed with the
/// expected swing weight overlaid.
pub fn trace_svg(trace: &Trace, kappa: f64, title: &str) -> gaitrl::Result<String> {
    let diag = FootfallDiagram::from_trace(trace)?;
    let panel_h = 80.0;
    let panel_gap = 26.0;
    let bars_h = 4.0 * 24.0 + 3.0 * 10.0 + 48.0;
    let height = 30.0 + bars_h + 4.0 * (panel_h + panel_gap) + 10.0;
    let mut out = String::new();
    svg_header(&mut out, MARGIN_L + PLOT_W + MARGIN_R, height);
    text(&mut out, MARGIN_L, 18.0, "start", title);
    footfall_rows(&mut out, &diag, 30.0);

    let t0 = trace.rows[0].time;
    let t1 = trace.rows.last().unwrap().time;
    let span = (t1 - t0).max(1e-9);
    let x_of = |t: f64| MARGIN_L + (t - t0) / span * PLOT_W;

    let max_grf = trace
        .rows
        .iter()
        .flat_map(|r| r.grf.iter().copied())
        .fold(1e-9f64, f64::max);
    let max_speed = trace
        .rows
        .iter()
        .flat_map(|r| r.foot_speed.iter().copied())
        .fold(1e-9f64, f64::max);

    for leg in LegId::ALL {
        let i = leg.index();
        let top = 30.0 + bars_h + i as f64 * (panel_h + panel_gap);
        let y_of = |v: f64| top + panel_h * (1.0 - v.clamp(0.0, 1.0));
        out.push_str(&format!(
            "<rect x=\"{MARGIN_L:.1}\" y=\"{top:.1}\" width=\"{PLOT_W:.1}\" \
             height=\"{panel_h:.1}\" fill=\"none\" stroke=\"#ccc\"/>\n"
        ));
        text(&mut out, MARGIN_L - 10.0, top + panel_h * 0.6, "end", leg.label());

        let mut grf = Vec::with_capacity(trace.rows.len());
        let mut speed = Vec::with_capacity(trace.rows.len());
        let mut e_st = Vec::with_capacity(trace.rows.len());
        let mut e_sw = Vec::with_capacity(trace.rows.len());
        for row in &trace.rows {
            let x = x_of(row.time);
            grf.push((x, y_of(row.grf[i] / max_grf)));
            speed.push((x, y_of(row.foot_speed[i] / max_speed)));
            let duty = gaitrl::gait::duty_factor(row.v_cmd, 0.0)?;
            let cfg = PhaseIndicatorConfig::new(duty, kappa)?;
            let sw = expected_indicator(row.phases[i], &cfg, PhaseKind::Swing)?;
            e_st.push((x, y_of(1.0 - sw)));
            e_sw.push((x, y_of(sw)));
        }
        polyline(&mut out, &grf, LEG_COLORS[i], None);
        polyline(&mut out, &e_st, "#444444", Some("5 3"));
        polyline(&mut out, &speed, "#c0392b", None);
        polyline(&mut out, &e_sw, "#c0392b", Some("2 3"));
    }
    let legend_y = height - 6.0;
    text(
        &mut out,
        MARGIN_L,
        legend_y,
        "start",
        "solid: ground force (leg color) and foot speed (red); dashed: expected stance/swing weight",
    );
    out.push_str("</svg>\n");
    Ok(out)
}
