//! Static SVG figures: trajectories over the prior, partitions, found-count
//! timelines and team-size scaling curves.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Context};
use vsearch_core::partition::partition_dims;
use vsearch_core::sim::RunTrace;
use vsearch_core::{GridDims, Vec2};

use crate::summary::SummaryRow;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
];

/// Longest side of the heat field, in drawn blocks.
const MAX_BLOCKS: usize = 100;
const MARGIN: f64 = 56.0;

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Maps data coordinates into a plot rectangle (y up).
#[derive(Debug, Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn axes(&self, svg: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            svg,
            r#"<g class="axes" font-family="sans-serif" font-size="11" fill="black">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            self.left, self.top, self.width, self.height
        );
        for v in ticks(self.x.0, self.x.1) {
            let x = self.px(v);
            let y = self.top + self.height;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y + 4.0,
                y + 16.0,
                tick_label(v)
            );
        }
        for v in ticks(self.y.0, self.y.1) {
            let y = self.py(v);
            let x = self.left;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x - 4.0,
                x - 6.0,
                y + 4.0,
                tick_label(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            self.left + self.width / 2.0,
            self.top + self.height + 36.0,
            escape(xlabel)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            self.left - 46.0,
            self.top + self.height / 2.0,
            self.left - 46.0,
            self.top + self.height / 2.0,
            escape(ylabel)
        );
        svg.push_str("</g>\n");
    }
}

/// Round-number ticks covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0 && span.is_finite()) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1e4 {
        return format!("{v:e}");
    }
    let r = (v * 1e6).round() / 1e6;
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(title));
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg
}

fn map_frame(dims: &GridDims) -> (Frame, f64, f64) {
    let e = dims.extent();
    let scale = 560.0 / e.x.max(e.y);
    let frame = Frame {
        left: MARGIN,
        top: 24.0,
        width: e.x * scale,
        height: e.y * scale,
        x: (0.0, e.x),
        y: (0.0, e.y),
    };
    (frame, frame.width + MARGIN + 24.0, frame.height + 24.0 + MARGIN)
}

/// Cells grouped into square blocks so large grids stay light.
fn blocks(dims: &GridDims) -> (usize, usize, usize) {
    let b = dims.width.max(dims.height).div_ceil(MAX_BLOCKS).max(1);
    (b, dims.width.div_ceil(b), dims.height.div_ceil(b))
}

fn heat_field(svg: &mut String, frame: &Frame, dims: &GridDims, values: &[f64]) {
    let (b, bw, bh) = blocks(dims);
    let mut sums = vec![0.0; bw * bh];
    for (idx, &v) in values.iter().enumerate() {
        let (c, r) = dims.col_row(idx);
        sums[(r / b) * bw + c / b] += v;
    }
    let peak = sums.iter().copied().fold(0.0, f64::max);
    svg.push_str("<g class=\"heat\" stroke=\"none\">\n");
    if peak > 0.0 {
        let cs = dims.cell_size;
        for (k, &s) in sums.iter().enumerate() {
            let level = (s / peak).sqrt();
            if level < 0.02 {
                continue;
            }
            let (bc, br) = (k % bw, k / bw);
            let x0 = (bc * b) as f64 * cs;
            let y0 = (br * b) as f64 * cs;
            let x1 = (((bc + 1) * b).min(dims.width)) as f64 * cs;
            let y1 = (((br + 1) * b).min(dims.height)) as f64 * cs;
            let mix = |hi: f64| (255.0 + (hi - 255.0) * level).round() as u8;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({},{},{})"/>"#,
                frame.px(x0),
                frame.py(y1),
                frame.px(x1) - frame.px(x0),
                frame.py(y0) - frame.py(y1),
                mix(204.0),
                mix(76.0),
                mix(2.0)
            );
        }
    }
    svg.push_str("</g>\n");
}

fn polyline(frame: &Frame, pts: impl IntoIterator<Item = (f64, f64)>) -> String {
    pts.into_iter()
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_trace(trace: &RunTrace) -> anyhow::Result<()> {
    let d = trace.dims;
    if d.width == 0 || d.height == 0 || d.cell_size.is_nan() || d.cell_size <= 0.0 {
        bail!("trace field `dims`: empty or non-positive grid");
    }
    if trace.prior.len() != d.len() {
        bail!(
            "trace field `prior`: {} values for a {}×{} grid",
            trace.prior.len(),
            d.width,
            d.height
        );
    }
    if trace.segments.len() > trace.n_agents || trace.initial_positions.len() != trace.n_agents {
        bail!("trace field `n_agents`: disagrees with `segments`/`initial_positions`");
    }
    Ok(())
}

/// Agent paths over the prior heat field, one `<g class="agent">` per agent
/// that moved, plus target markers.
pub fn trajectories(trace: &RunTrace) -> anyhow::Result<String> {
    check_trace(trace)?;
    let (frame, w, h) = map_frame(&trace.dims);
    let mut svg = open(
        w,
        h,
        &format!("{} trajectories, {} agents", trace.strategy, trace.n_agents),
    );
    heat_field(&mut svg, &frame, &trace.dims, &trace.prior);
    svg.push_str("<g class=\"targets\" fill=\"black\">\n");
    for t in &trace.targets {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
            frame.px(t.x),
            frame.py(t.y)
        );
    }
    svg.push_str("</g>\n");
    for (agent, segments) in trace.segments.iter().enumerate() {
        if segments.is_empty() {
            continue;
        }
        let mut pts = Vec::new();
        for seg in segments {
            let tau = seg.trajectory.duration();
            let n = ((tau / 0.25).ceil() as usize).clamp(4, 400);
            for k in 0..=n {
                let t = (tau * k as f64 / n as f64).min(tau);
                let (p, _, _) = seg
                    .trajectory
                    .eval(t)
                    .with_context(|| format!("agent {agent}, round {}", seg.round))?;
                pts.push((p.x, p.y));
            }
        }
        let c = color(agent);
        let start = trace.initial_positions[agent];
        let _ = writeln!(
            svg,
            r#"<g class="agent" data-agent="{agent}" stroke="{c}" fill="none"><polyline points="{}" stroke-width="1.5"/><circle cx="{:.2}" cy="{:.2}" r="4" fill="{c}"/></g>"#,
            polyline(&frame, pts),
            frame.px(start.x),
            frame.py(start.y)
        );
    }
    frame.axes(&mut svg, "x (m)", "y (m)");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Cells shaded by owning agent for one round's partition (the last one
/// recorded when `round` is `None`).
pub fn partition(trace: &RunTrace, round: Option<usize>) -> anyhow::Result<String> {
    check_trace(trace)?;
    let generators: Vec<Vec2> = match round {
        Some(r) => match trace.partitions.get(r) {
            Some(Some(g)) => g.clone(),
            Some(None) => trace.initial_positions.clone(),
            None => bail!(
                "trace field `partitions`: no round {r} (trace has {})",
                trace.partitions.len()
            ),
        },
        None => trace
            .partitions
            .iter()
            .rev()
            .find_map(|p| p.clone())
            .unwrap_or_else(|| trace.initial_positions.clone()),
    };
    if generators.is_empty() {
        bail!("trace field `initial_positions`: no agents");
    }
    let labeling = partition_dims(&generators, &trace.dims)?;
    let dims = trace.dims;
    let (frame, w, h) = map_frame(&dims);
    let mut svg = open(
        w,
        h,
        &format!("{} partition, {} agents", trace.strategy, generators.len()),
    );
    let (b, bw, bh) = blocks(&dims);
    let cs = dims.cell_size;
    svg.push_str("<g class=\"partition\" stroke=\"none\" fill-opacity=\"0.45\">\n");
    for br in 0..bh {
        for bc in 0..bw {
            let c = (bc * b + b / 2).min(dims.width - 1);
            let r = (br * b + b / 2).min(dims.height - 1);
            let label = labeling.label(dims.index(c, r));
            let x0 = (bc * b) as f64 * cs;
            let y0 = (br * b) as f64 * cs;
            let x1 = (((bc + 1) * b).min(dims.width)) as f64 * cs;
            let y1 = (((br + 1) * b).min(dims.height)) as f64 * cs;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" data-label="{label}"/>"#,
                frame.px(x0),
                frame.py(y1),
                frame.px(x1) - frame.px(x0),
                frame.py(y0) - frame.py(y1),
                color(label)
            );
        }
    }
    svg.push_str("</g>\n<g class=\"generators\" stroke=\"black\">\n");
    for (i, g) in generators.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{}"/>"#,
            frame.px(g.x),
            frame.py(g.y),
            color(i)
        );
    }
    svg.push_str("</g>\n");
    frame.axes(&mut svg, "x (m)", "y (m)");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Found-target count against simulated time, as a step curve.
pub fn timeline(trace: &RunTrace) -> anyhow::Result<String> {
    let total = trace.targets.len().max(1) as f64;
    let t_end = trace.found_timeline.last().map_or(0.0, |e| e.time).max(1.0);
    let frame = Frame {
        left: MARGIN + 8.0,
        top: 24.0,
        width: 560.0,
        height: 320.0,
        x: (0.0, t_end),
        y: (0.0, total),
    };
    let mut svg = open(
        frame.left + frame.width + 24.0,
        frame.top + frame.height + MARGIN,
        "targets found over time",
    );
    let mut pts = vec![(0.0, 0.0)];
    let mut last = 0.0;
    for e in &trace.found_timeline {
        pts.push((e.time, last));
        last = e.found as f64;
        pts.push((e.time, last));
    }
    pts.push((t_end, last));
    let _ = writeln!(
        svg,
        r#"<polyline class="timeline" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
        polyline(&frame, pts),
        color(0)
    );
    frame.axes(&mut svg, "time (s)", "targets found");
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Two panels against team size: max per-agent path length and mean
/// per-agent planning time (planner cells visited when the summary was
/// written without timing). One series per strategy, averaged over seeds.
/// (n_agents, mean max path, mean planning cost) for one strategy.
type Curve<'a> = (&'a str, Vec<(f64, f64, f64)>);

pub fn scalability(rows: &[SummaryRow]) -> anyhow::Result<String> {
    let ok: Vec<&SummaryRow> = rows.iter().filter(|r| r.error.is_empty()).collect();
    if ok.is_empty() {
        bail!("summary has no successful rows");
    }
    let timed = ok.iter().all(|r| r.mean_plan_time_s.is_some());
    // strategy → n_agents → (max path, cost) per seed
    let mut series = BTreeMap::<&str, BTreeMap<usize, Vec<(f64, f64)>>>::new();
    for r in &ok {
        let cost = if timed {
            r.mean_plan_time_s.unwrap_or(0.0)
        } else {
            r.mean_plan_cells
        };
        series
            .entry(r.strategy.as_str())
            .or_default()
            .entry(r.n_agents)
            .or_default()
            .push((r.max_path_m, cost));
    }
    let means: Vec<Curve> = series
        .into_iter()
        .map(|(name, by_n)| {
            let pts = by_n
                .into_iter()
                .map(|(n, v)| {
                    let k = v.len() as f64;
                    (
                        n as f64,
                        v.iter().map(|p| p.0).sum::<f64>() / k,
                        v.iter().map(|p| p.1).sum::<f64>() / k,
                    )
                })
                .collect();
            (name, pts)
        })
        .collect();

    let all: Vec<&(f64, f64, f64)> = means.iter().flat_map(|(_, p)| p).collect();
    let n_max = all.iter().map(|p| p.0).fold(1.0, f64::max);
    let n_min = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x = if n_max > n_min {
        (n_min, n_max)
    } else {
        (n_min - 1.0, n_max + 1.0)
    };
    let path_max = all.iter().map(|p| p.1).fold(0.0, f64::max).max(1e-9) * 1.05;
    let cost_max = all.iter().map(|p| p.2).fold(0.0, f64::max).max(1e-12) * 1.05;
    let panel = |left: f64, ymax: f64| Frame {
        left,
        top: 24.0,
        width: 360.0,
        height: 300.0,
        x,
        y: (0.0, ymax),
    };
    let left = panel(MARGIN + 8.0, path_max);
    let right = panel(MARGIN + 8.0 + 360.0 + 96.0, cost_max);
    let mut svg = open(
        right.left + right.width + 24.0,
        24.0 + 300.0 + MARGIN + 20.0,
        "scalability",
    );
    for (panel_name, frame, pick) in [("max_path", left, 1usize), ("plan_cost", right, 2usize)] {
        for (i, (name, pts)) in means.iter().enumerate() {
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, if pick == 1 { p.1 } else { p.2 })).collect();
            let _ = writeln!(
                svg,
                r#"<g class="series" data-panel="{panel_name}" data-strategy="{}" stroke="{}" fill="{}"><polyline points="{}" fill="none" stroke-width="2"/>"#,
                escape(name),
                color(i),
                color(i),
                polyline(&frame, xy.iter().copied())
            );
            for (n, v) in &xy {
                let _ = writeln!(
                    svg,
                    r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3.5" data-n="{n}" data-value="{v}"/>"#,
                    frame.px(*n),
                    frame.py(*v)
                );
            }
            svg.push_str("</g>\n");
        }
    }
    left.axes(&mut svg, "agents", "max path length (m)");
    right.axes(
        &mut svg,
        "agents",
        if timed {
            "mean plan time per agent (s)"
        } else {
            "mean planner cells per agent"
        },
    );
    for (i, (name, _)) in means.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            left.left + 8.0,
            left.top + 14.0 + 13.0 * i as f64,
            color(i),
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
