//! Latent-space probability map as a standalone SVG.

use std::fmt::Write;

use gsee_core::ml::solvability::SolvabilityReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 60.0;
const PLOT: f64 = 480.0;

/// Red (0) through white (0.5) to blue (1).
pub fn probability_color(p: f64) -> String {
    let p = p.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    let (lo, mid, hi) = (
        (192.0, 57.0, 43.0),
        (247.0, 247.0, 247.0),
        (33.0, 102.0, 172.0),
    );
    let (from, to, t) = if p < 0.5 {
        (lo, mid, p * 2.0)
    } else {
        (mid, hi, (p - 0.5) * 2.0)
    };
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(from.0, to.0, t),
        lerp(from.1, to.1, t),
        lerp(from.2, to.2, t)
    )
}

fn star(cx: f64, cy: f64, r: f64) -> String {
    (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { r } else { r * 0.45 };
            let angle = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 5.0;
            format!(
                "{:.2},{:.2}",
                cx + radius * angle.cos(),
                cy + radius * angle.sin()
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Heatmap of sampled probabilities with solved (circle), unsolved (square)
/// and guidestar (star) task markers. Only the first two latent axes are drawn.
pub fn latent_map_svg(report: &SolvabilityReport, title: &str, comment: &str) -> String {
    let dim = report.latent.dim;
    let axis = |k: usize| -> (f64, f64) {
        if k >= dim {
            return (-1.0, 1.0);
        }
        let (mut lo, mut hi) = report.latent.bounds[k];
        for p in &report.data_points {
            lo = lo.min(p.coords[k]);
            hi = hi.max(p.coords[k]);
        }
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x_lo, x_hi) = axis(0);
    let (y_lo, y_hi) = axis(1);
    let px = |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * PLOT;
    let py = |c: &[f64]| {
        let v = if dim >= 2 { c[1] } else { 0.0 };
        TOP + PLOT - (v - y_lo) / (y_hi - y_lo) * PLOT
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, "<!-- {} -->", escape(comment.trim_start_matches("# ")));
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="44" text-anchor="middle" font-size="12">solvability ratio {:.4} at p &gt;= {} ({} samples, {} latent space)</text>"#,
        WIDTH / 2.0,
        report.solvability_ratio,
        report.threshold,
        report.n_samples,
        match report.latent.kind {
            gsee_core::ml::LatentKind::Pca => "PCA",
            gsee_core::ml::LatentKind::Nnmf => "NNMF",
        }
    );

    // cells: grid layout in 2-D, dots otherwise
    let grid = dim == 2 && {
        let r = (report.n_samples as f64).sqrt().round() as usize;
        r * r == report.n_samples
    };
    let _ = writeln!(s, r#"<g id="map">"#);
    if grid {
        let r = (report.n_samples as f64).sqrt().round() as usize;
        let (bx, by) = (report.latent.bounds[0], report.latent.bounds[1]);
        let cw = if r > 1 {
            (px(bx.1) - px(bx.0)) / (r - 1) as f64
        } else {
            PLOT
        };
        let ch = if r > 1 {
            (py(&[0.0, by.0]) - py(&[0.0, by.1])) / (r - 1) as f64
        } else {
            PLOT
        };
        for p in &report.latent_points {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                px(p.coords[0]) - cw / 2.0,
                py(&p.coords) - ch / 2.0,
                cw + 0.3,
                ch + 0.3,
                probability_color(p.probability)
            );
        }
    } else {
        for p in &report.latent_points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                px(p.coords[0]),
                py(&p.coords),
                probability_color(p.probability)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="tasks" stroke="black" stroke-width="0.8">"#);
    for p in &report.data_points {
        let (x, y) = (px(p.coords[0]), py(&p.coords));
        let _ = match p.label {
            Some(true) => writeln!(
                s,
                r##"<circle class="solved" cx="{x:.2}" cy="{y:.2}" r="5" fill="#1b7837"/>"##
            ),
            Some(false) => writeln!(
                s,
                r##"<rect class="unsolved" x="{:.2}" y="{:.2}" width="9" height="9" fill="#b2182b"/>"##,
                x - 4.5,
                y - 4.5
            ),
            None => writeln!(
                s,
                r##"<polygon class="guidestar" points="{}" fill="#f1c40f"/>"##,
                star(x, y, 8.0)
            ),
        };
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">latent axis 1</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 36.0
    );
    if dim >= 2 {
        let _ = writeln!(
            s,
            r#"<text transform="translate({},{}) rotate(-90)" text-anchor="middle" font-size="13">latent axis 2</text>"#,
            LEFT - 40.0,
            TOP + PLOT / 2.0
        );
    }
    for (v, anchor, x, y) in [
        (x_lo, "start", LEFT, TOP + PLOT + 16.0),
        (x_hi, "end", LEFT + PLOT, TOP + PLOT + 16.0),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#
        );
    }
    if dim >= 2 {
        for (v, y) in [(y_lo, TOP + PLOT), (y_hi, TOP + 8.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{v:.3}</text>"#,
                LEFT - 4.0
            );
        }
    }
    let (y, marker_y) = (HEIGHT - 8.0, HEIGHT - 12.0);
    let (solved_x, unsolved_x, star_x) = (LEFT + 10.0, LEFT + 90.0, LEFT + 180.0);
    let _ = writeln!(
        s,
        r##"<g font-size="11"><circle cx="{solved_x}" cy="{marker_y}" r="5" fill="#1b7837" stroke="black"/><text x="{}" y="{y}">solved</text><rect x="{}" y="{}" width="9" height="9" fill="#b2182b" stroke="black"/><text x="{}" y="{y}">unsolved</text><polygon points="{}" fill="#f1c40f" stroke="black"/><text x="{}" y="{y}">guidestar</text></g>"##,
        solved_x + 10.0,
        unsolved_x - 4.5,
        marker_y - 4.5,
        unsolved_x + 10.0,
        star(star_x, marker_y, 7.0),
        star_x + 12.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colors() {
        assert_eq!(probability_color(0.0), "#c0392b");
        assert_eq!(probability_color(0.5), "#f7f7f7");
        assert_eq!(probability_color(1.0), "#2166ac");
    }

    #[test]
    fn star_has_ten_vertices() {
        assert_eq!(star(0.0, 0.0, 1.0).split(' ').count(), 10);
    }
}
