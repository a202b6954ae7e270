//! Static SVG frames and PGM belief images.

use std::fmt::Write as _;

use crate::belief::BeliefMap;
use crate::dynamics::RobotState;
use crate::grid::Grid;
use crate::world::{CellIndex, WorldMap, WorldPoint};

/// Pixels per meter in the main panel.
const SCALE: f64 = 20.0;
const INSET_WIDTH: f64 = 200.0;
const MARGIN: f64 = 20.0;

/// Belief colour: blue at 0, green at 0.5, red at 1, linear in between.
pub fn probability_color(p: f64) -> (u8, u8, u8) {
    let p = p.clamp(0.0, 1.0);
    let c = |x: f64| (255.0 * x).round() as u8;
    if p <= 0.5 {
        (0, c(2.0 * p), c(1.0 - 2.0 * p))
    } else {
        (c(2.0 * p - 1.0), c(2.0 - 2.0 * p), 0)
    }
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Everything drawn in one frame; insets are optional.
pub struct FrameView<'a> {
    pub world: &'a WorldMap,
    pub trajectory: &'a [WorldPoint],
    pub state: Option<&'a RobotState>,
    pub p_ref: Option<WorldPoint>,
    pub robot_radius: f64,
    pub local_grid: Option<&'a Grid<bool>>,
    pub probabilities: Option<&'a Grid<f64>>,
    pub title: Option<String>,
}

impl<'a> FrameView<'a> {
    pub fn map_only(world: &'a WorldMap) -> Self {
        Self {
            world,
            trajectory: &[],
            state: None,
            p_ref: None,
            robot_radius: 0.5,
            local_grid: None,
            probabilities: None,
            title: None,
        }
    }
}

pub fn belief_probabilities(belief: &BeliefMap) -> Grid<f64> {
    belief.probability_grid()
}

fn grid_panel<T>(out: &mut String, grid: &Grid<T>, x0: f64, y0: f64, id: &str, color: impl Fn(&T) -> String) {
    let cell = INSET_WIDTH / grid.cols().max(grid.rows()).max(1) as f64;
    let _ = writeln!(out, r#"<g id="{id}">"#);
    for (idx, v) in grid.iter_cells() {
        // Row 0 is the bottom of the panel.
        let x = x0 + idx.col as f64 * cell;
        let y = y0 + (grid.rows() - 1 - idx.row) as f64 * cell;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{}"/>"#,
            color(v)
        );
    }
    let _ = writeln!(out, "</g>");
}

/// Renders the map panel with trajectory, reference and obstacles, plus insets.
pub fn render_frame_svg(view: &FrameView) -> String {
    let w = view.world;
    let map_w = w.width_m() * SCALE;
    let map_h = w.height_m() * SCALE;
    let n_insets = usize::from(view.local_grid.is_some()) + usize::from(view.probabilities.is_some());
    let width = map_w + 2.0 * MARGIN + n_insets as f64 * (INSET_WIDTH + MARGIN);
    let height = map_h.max(INSET_WIDTH) + 2.0 * MARGIN + 20.0;
    let px = |p: WorldPoint| (MARGIN + p.x * SCALE, MARGIN + map_h - p.y * SCALE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect id="map" x="{MARGIN}" y="{MARGIN}" width="{map_w:.2}" height="{map_h:.2}" fill="#f4f4f4" stroke="black"/>"##
    );
    let _ = writeln!(s, r#"<g id="obstacles">"#);
    for o in w.obstacles() {
        let (x, y) = px(WorldPoint::new(o.min().x, o.max().y));
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#404040"/>"##,
            2.0 * o.half_extents[0] * SCALE,
            2.0 * o.half_extents[1] * SCALE
        );
    }
    let _ = writeln!(s, "</g>");

    if !view.trajectory.is_empty() {
        let mut d = String::new();
        for (i, p) in view.trajectory.iter().enumerate() {
            let (x, y) = px(*p);
            let _ = write!(d, "{}{x:.2} {y:.2} ", if i == 0 { "M" } else { "L" });
        }
        let _ = writeln!(
            s,
            r##"<path id="trajectory" d="{}" fill="none" stroke="#1f5fbf" stroke-width="2"/>"##,
            d.trim_end()
        );
    }
    if let Some(p) = view.p_ref {
        let (x, y) = px(p);
        let _ = writeln!(
            s,
            r##"<circle id="p_ref" cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="#d02020" stroke-width="2"/>"##
        );
    }
    if let Some(state) = view.state {
        let (x, y) = px(state.position());
        let (hx, hy) = px(state.position() + WorldPoint::new(state.psi.cos(), state.psi.sin()) * view.robot_radius);
        let _ = writeln!(
            s,
            r##"<circle id="robot" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="#ffb000" stroke="black"/>"##,
            view.robot_radius * SCALE
        );
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{hx:.2}" y2="{hy:.2}" stroke="black"/>"#);
    }

    let mut x0 = MARGIN + map_w + MARGIN;
    if let Some(g) = view.local_grid {
        grid_panel(&mut s, g, x0, MARGIN, "local_grid", |&o| if o { "#202020".into() } else { "#ffffff".into() });
        x0 += INSET_WIDTH + MARGIN;
    }
    if let Some(g) = view.probabilities {
        grid_panel(&mut s, g, x0, MARGIN, "belief", |&p| hex(probability_color(p)));
    }
    if let Some(title) = &view.title {
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{:.0}" font-family="monospace" font-size="14">{}</text>"#,
            height - 8.0,
            xml_escape(title)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Binary 8-bit PGM of a probability grid, top row = highest y.
pub fn probability_pgm(grid: &Grid<f64>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.cols(), grid.rows()).into_bytes();
    for row in (0..grid.rows()).rev() {
        for col in 0..grid.cols() {
            out.push((grid[CellIndex::new(row, col)].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}
