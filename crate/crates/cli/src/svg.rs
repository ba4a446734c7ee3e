//! Static vector plot of planar trajectories: one polyline per agent,
//! targets as concentric dashed circles in the agent's color, obstacles as
//! filled gray rectangles. The viewport is fitted to the content with a 5%
//! margin and output bytes are a pure function of the input.

use crate::error::CliError;
use crate::io::write_atomic;
use proxnet_core::{BoxRegion, Trajectory};
use std::fmt::Write as _;
use std::path::Path;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

pub fn render_svg(
    trajectory: &Trajectory,
    targets: &[Vec<f64>],
    obstacles: &[BoxRegion],
) -> Result<String, CliError> {
    let Some(first) = trajectory.states.first() else {
        return Err(CliError::EmptyTrajectory);
    };
    if first.block_dim() != 2 {
        return Err(CliError::UnsupportedPlot {
            dim: first.block_dim(),
        });
    }
    let agents = first.block_count();

    // bounding box over trajectories, targets and obstacles
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut grow = |p: &[f64]| {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    };
    for state in &trajectory.states {
        for i in 0..agents {
            grow(state.block(i));
        }
    }
    for t in targets {
        grow(t);
    }
    for b in obstacles {
        grow(b.min_corner());
        grow(b.max_corner());
    }

    // floor keeps the viewport printable even for a fully degenerate scene
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
    let marker_outer = 0.025 * extent;
    let margin = 0.05 * extent + marker_outer;
    let (x0, y0) = (lo[0] - margin, lo[1] - margin);
    let (x1, y1) = (hi[0] + margin, hi[1] + margin);
    let (w, h) = (x1 - x0, y1 - y0);
    // reflect vertically inside the box so larger ordinates render upward
    let flip = |y: f64| y0 + y1 - y;
    let stroke = 0.004 * extent;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{:.0}">"#,
        fmt(x0),
        fmt(y0),
        fmt(w),
        fmt(h),
        800.0 * h / w
    );

    for b in obstacles {
        let min = b.min_corner();
        let max = b.max_corner();
        let _ = writeln!(
            out,
            r##"  <rect x="{}" y="{}" width="{}" height="{}" fill="#9e9e9e"/>"##,
            fmt(min[0]),
            fmt(flip(max[1])),
            fmt(max[0] - min[0]),
            fmt(max[1] - min[1]),
        );
    }

    for i in 0..agents {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for state in &trajectory.states {
            let p = state.block(i);
            if !points.is_empty() {
                points.push(' ');
            }
            let _ = write!(points, "{},{}", fmt(p[0]), fmt(flip(p[1])));
        }
        let _ = writeln!(
            out,
            r#"  <polyline points="{points}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            fmt(stroke),
        );
    }

    for (i, t) in targets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for radius in [marker_outer, 0.55 * marker_outer] {
            let _ = writeln!(
                out,
                r#"  <circle cx="{}" cy="{}" r="{}" fill="none" stroke="{color}" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
                fmt(t[0]),
                fmt(flip(t[1])),
                fmt(radius),
                fmt(stroke),
                fmt(0.3 * radius),
                fmt(0.2 * radius),
            );
        }
    }

    out.push_str("</svg>\n");
    Ok(out)
}

pub fn export_svg(
    trajectory: &Trajectory,
    targets: &[Vec<f64>],
    obstacles: &[BoxRegion],
    path: &Path,
) -> Result<(), CliError> {
    let body = render_svg(trajectory, targets, obstacles)?;
    write_atomic(path, body.as_bytes())
}
