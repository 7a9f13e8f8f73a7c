//! Self-contained SVG renderings of sweep results: a heatmap for the
//! interference map and a dots-plus-curve plot for the defect-density
//! curve. Values quoted in the figures use the same decimal formatting as
//! the CSV export, so the two artifacts always agree textually.

use lzkz::sweep::io::format_value;
use lzkz::sweep::SweepResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

fn plot_area() -> (f64, f64) {
    (
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
    )
}

/// Two-stop color ramp (dark violet to yellow) over [0, 1]; NaN-safe input
/// is the caller's job.
fn color(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(13.0, 240.0), lerp(8.0, 249.0), lerp(135.0, 33.0))
}

fn svg_open(title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"13\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = title
    )
}

fn axis_labels(x_label: &str, y_label: &str) -> String {
    format!(
        concat!(
            "<text x=\"{xc}\" y=\"{yb}\" text-anchor=\"middle\">{xl}</text>\n",
            "<text x=\"18\" y=\"{ymid}\" text-anchor=\"middle\" ",
            "transform=\"rotate(-90 18 {ymid})\">{yl}</text>\n"
        ),
        xc = MARGIN_LEFT + plot_area().0 / 2.0,
        yb = HEIGHT - 18.0,
        xl = x_label,
        ymid = MARGIN_TOP + plot_area().1 / 2.0,
        yl = y_label
    )
}

fn require_column(result: &SweepResult, name: &str) -> Result<Vec<f64>, String> {
    result
        .column(name)
        .ok_or_else(|| format!("result has no '{name}' column"))
}

/// Heatmap of `p_excited_numeric` over the (eps_lz0, nu) grid. Cells are
/// indexed by grid position, so any axis spacing renders without
/// distortion; tick labels carry the physical values at the grid edges.
pub fn heatmap_svg(result: &SweepResult) -> Result<String, String> {
    let eps = require_column(result, "eps_lz0")?;
    let nu = require_column(result, "nu")?;
    let p = require_column(result, "p_excited_numeric")?;

    // Rows are ordered eps-outermost, nu-innermost.
    let mut eps_values: Vec<f64> = eps.clone();
    eps_values.dedup();
    let n_inner = nu.len() / eps_values.len().max(1);
    let nu_values: Vec<f64> = nu.iter().take(n_inner).cloned().collect();
    let (n_eps, n_nu) = (eps_values.len(), nu_values.len());
    if n_eps * n_nu != p.len() {
        return Err(format!(
            "grid shape {n_eps}x{n_nu} does not cover {} rows",
            p.len()
        ));
    }

    let finite: Vec<f64> = p.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err("every grid point is flagged; nothing to render".into());
    }
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let (pw, ph) = plot_area();
    let (cw, ch) = (pw / n_eps as f64, ph / n_nu as f64);
    let mut svg = svg_open("Interference map: excited-state population");
    for (row, &v) in p.iter().enumerate() {
        let (i, j) = (row / n_nu, row % n_nu);
        let x = MARGIN_LEFT + i as f64 * cw;
        // nu increases upward.
        let y = MARGIN_TOP + ph - (j + 1) as f64 * ch;
        let fill = if v.is_finite() {
            if hi > lo {
                color((v - lo) / (hi - lo))
            } else {
                color(0.5)
            }
        } else {
            "#9e9e9e".to_string()
        };
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" fill=\"{fill}\"/>\n"
        ));
    }
    svg.push_str(&axis_labels("eps_lz0 (ueV)", "nu (ueV/ns)"));
    let ticks = format!(
        concat!(
            "<text x=\"{x0}\" y=\"{yb}\" text-anchor=\"middle\">{e0}</text>\n",
            "<text x=\"{x1}\" y=\"{yb}\" text-anchor=\"middle\">{e1}</text>\n",
            "<text x=\"{xl}\" y=\"{ybot}\" text-anchor=\"end\">{n0}</text>\n",
            "<text x=\"{xl}\" y=\"{ytop}\" text-anchor=\"end\">{n1}</text>\n"
        ),
        x0 = MARGIN_LEFT + cw / 2.0,
        x1 = MARGIN_LEFT + pw - cw / 2.0,
        yb = MARGIN_TOP + ph + 20.0,
        e0 = eps_values[0],
        e1 = eps_values[n_eps - 1],
        xl = MARGIN_LEFT - 8.0,
        ybot = MARGIN_TOP + ph - ch / 2.0 + 4.0,
        ytop = MARGIN_TOP + ch / 2.0 + 4.0,
        n0 = nu_values[0],
        n1 = nu_values[n_nu - 1],
    );
    svg.push_str(&ticks);
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\">p_excited_numeric range [{}, {}]</text>\n",
        format_value(lo),
        format_value(hi),
        x = MARGIN_LEFT,
        y = HEIGHT - 40.0,
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Defect-density curve: numeric points as dots, the closed-form prediction
/// as a line, and the fit summary quoted beneath, mirroring the CSV footer.
pub fn kz_curve_svg(result: &SweepResult) -> Result<String, String> {
    let xs = require_column(result, "x")?;
    let rho_num = require_column(result, "rho_numeric")?;
    let rho_th = require_column(result, "rho_theory")?;

    let mut points: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(rho_num.iter().zip(&rho_th))
        .filter(|(x, (n, t))| x.is_finite() && n.is_finite() && t.is_finite())
        .map(|(&x, (&n, &t))| (x, n, t))
        .collect();
    if points.is_empty() {
        return Err("every curve point is flagged; nothing to render".into());
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let x_max = points.last().expect("nonempty").0 * 1.05;
    let rho_top: f64 = 1.05;
    let (pw, ph) = plot_area();
    let to_px = |x: f64, rho: f64| {
        (
            MARGIN_LEFT + pw * x / x_max,
            MARGIN_TOP + ph * (1.0 - rho / rho_top),
        )
    };

    let mut svg = svg_open("Defect density vs quench ratio");
    svg.push_str(&format!(
        "<rect x=\"{x}\" y=\"{y}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#444\"/>\n",
        x = MARGIN_LEFT,
        y = MARGIN_TOP,
    ));
    let path: Vec<String> = points
        .iter()
        .map(|&(x, _, t)| {
            let (px, py) = to_px(x, t);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"2\"/>\n",
        path.join(" ")
    ));
    for &(x, n, _) in &points {
        let (px, py) = to_px(x, n);
        svg.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"#c62828\"/>\n"
        ));
    }
    svg.push_str(&axis_labels("x = 4 Delta^2 / (hbar nu)", "defect density"));
    let (x0_px, y_axis) = (MARGIN_LEFT, MARGIN_TOP + ph + 20.0);
    svg.push_str(&format!(
        concat!(
            "<text x=\"{x0}\" y=\"{yb}\" text-anchor=\"middle\">0</text>\n",
            "<text x=\"{x1}\" y=\"{yb}\" text-anchor=\"middle\">{xmax:.3}</text>\n",
            "<text x=\"{xl}\" y=\"{y1}\" text-anchor=\"end\">1</text>\n",
            "<text x=\"{xl}\" y=\"{y0}\" text-anchor=\"end\">0</text>\n"
        ),
        x0 = x0_px,
        x1 = MARGIN_LEFT + pw,
        yb = y_axis,
        xmax = x_max,
        xl = MARGIN_LEFT - 8.0,
        y1 = to_px(0.0, 1.0).1 + 4.0,
        y0 = MARGIN_TOP + ph + 4.0,
    ));
    if let Some(fit) = &result.metadata.fit {
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\">fit_alpha: alpha_hat = {}, rms_log_residual = {}</text>\n",
            format_value(fit.alpha),
            format_value(fit.rms_log_residual),
            x = MARGIN_LEFT,
            y = HEIGHT - 40.0,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" fill=\"#c62828\">dots: numeric</text>\n<text x=\"{x2}\" y=\"{y}\" fill=\"#1565c0\">line: closed form</text>\n",
        x = WIDTH - 280.0,
        x2 = WIDTH - 170.0,
        y = MARGIN_TOP + 16.0,
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}
