//! Minimal hand-rolled SVG output: an intensity trace plot and a sweep
//! heatmap. Everything is formatted with fixed precision so repeated runs
//! produce byte-identical files.

use nfcomb_core::{SweepResult, Waveform};
use std::fmt::Write as _;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 35.0;
const MARGIN_B: f64 = 55.0;

/// Intensity floor of the logarithmic axis; everything below clips to it.
const LOG_FLOOR: f64 = 1e-8;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, desc: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(out, "<desc>{}</desc>", xml_escape(desc));
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn frame(out: &mut String, ax: &Axes, x_label: &str, y_label: &str, title: &str) {
    let (l, r) = (ax.px(ax.x0), ax.px(ax.x1));
    let (b, t) = (ax.py(ax.y0), ax.py(ax.y1));
    let _ = writeln!(
        out,
        "<rect x=\"{l:.2}\" y=\"{t:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"black\"/>",
        r - l,
        b - t
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        (l + r) / 2.0,
        HEIGHT - 12.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (t + b) / 2.0,
        (t + b) / 2.0,
        xml_escape(y_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        (l + r) / 2.0,
        xml_escape(title)
    );
}

fn x_ticks(out: &mut String, ax: &Axes, count: usize) {
    let b = ax.py(ax.y0);
    for i in 0..=count {
        let x = ax.x0 + (ax.x1 - ax.x0) * i as f64 / count as f64;
        let px = ax.px(x);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{b:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            b + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x:.1}</text>",
            b + 20.0
        );
    }
}

/// Input and output intensity versus time on a log axis — the echo sits
/// orders of magnitude below the transmitted spike, so linear plots hide it.
pub fn trace_plot(input: &Waveform, output: &Waveform, title: &str, desc: &str) -> String {
    let ax = Axes {
        x0: input.grid.t_start,
        x1: input.grid.t_end(),
        y0: LOG_FLOOR.log10(),
        y1: 0.0,
    };
    let mut out = String::new();
    header(&mut out, desc);
    frame(&mut out, &ax, "time, µs", "intensity (log)", title);
    x_ticks(&mut out, &ax, 8);
    // decade labels on the y axis
    let mut dec = ax.y0 as i32;
    while dec <= 0 {
        let py = ax.py(dec as f64);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#ddd\"/>",
            ax.px(ax.x0),
            ax.px(ax.x1)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{dec}</text>",
            ax.px(ax.x0) - 6.0,
            py + 4.0
        );
        dec += 2;
    }
    for (wave, color, label, y_legend) in
        [(input, "#888888", "input", 46.0), (output, "#c0392b", "output", 64.0)]
    {
        let mut path = String::new();
        for (i, (t, s)) in wave.grid.times().zip(&wave.samples).enumerate() {
            let v = s.norm_sqr().max(LOG_FLOOR).log10();
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.2} {:.2} ", ax.px(t), ax.py(v));
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.3\"/>",
            path.trim_end()
        );
        let lx = WIDTH - MARGIN_R - 90.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{y_legend:.2}\" x2=\"{:.2}\" y2=\"{y_legend:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.3\"/>",
            lx + 24.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{label}</text>",
            lx + 30.0,
            y_legend + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Five-stop dark-blue → yellow ramp; `u` in [0, 1].
fn colormap(u: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.00, [13.0, 8.0, 135.0]),
        (0.25, [126.0, 3.0, 168.0]),
        (0.50, [204.0, 71.0, 120.0]),
        (0.75, [248.0, 149.0, 64.0]),
        (1.00, [240.0, 249.0, 33.0]),
    ];
    let u = u.clamp(0.0, 1.0);
    for w in STOPS.windows(2) {
        let (u0, c0) = w[0];
        let (u1, c1) = w[1];
        if u <= u1 {
            let f = if u1 > u0 { (u - u0) / (u1 - u0) } else { 0.0 };
            let mix = |a: f64, b: f64| (a + f * (b - a)).round() as u8;
            return (mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]));
        }
    }
    (240, 249, 33)
}

/// Efficiency heatmap over the (ξ, T0) sweep grid. Cell edges sit halfway
/// between neighboring axis values, so uneven grids render faithfully.
pub fn sweep_heatmap(result: &SweepResult, desc: &str) -> String {
    let xs = &result.plan.xi_values;
    let ts = &result.plan.t0_values;
    let edges = |vals: &[f64]| -> Vec<f64> {
        if vals.len() == 1 {
            let half = 0.05 * vals[0].abs().max(1.0);
            return vec![vals[0] - half, vals[0] + half];
        }
        let mut e = Vec::with_capacity(vals.len() + 1);
        e.push(vals[0] - (vals[1] - vals[0]) / 2.0);
        for w in vals.windows(2) {
            e.push((w[0] + w[1]) / 2.0);
        }
        let n = vals.len();
        e.push(vals[n - 1] + (vals[n - 1] - vals[n - 2]) / 2.0);
        e
    };
    let xe = edges(xs);
    let te = edges(ts);
    let ax = Axes { x0: xe[0], x1: *xe.last().unwrap(), y0: te[0], y1: *te.last().unwrap() };

    let peak = result
        .points
        .iter()
        .filter_map(|p| p.efficiency)
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut out = String::new();
    header(&mut out, desc);
    for (ix, _) in xs.iter().enumerate() {
        for (it, _) in ts.iter().enumerate() {
            let p = result.point(ix, it);
            let (r, g, b) = match p.efficiency {
                Some(eta) => colormap(eta / peak),
                None => (220, 220, 220),
            };
            let (px0, px1) = (ax.px(xe[ix]), ax.px(xe[ix + 1]));
            let (py0, py1) = (ax.py(te[it]), ax.py(te[it + 1]));
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"rgb({r},{g},{b})\"/>",
                px0.min(px1),
                py0.min(py1),
                (px1 - px0).abs(),
                (py0 - py1).abs()
            );
        }
    }
    frame(
        &mut out,
        &ax,
        "optical thickness ξ",
        "rephasing period T0, µs",
        "storage efficiency",
    );
    x_ticks(&mut out, &ax, 6);
    for i in 0..=5 {
        let y = ax.y0 + (ax.y1 - ax.y0) * i as f64 / 5.0;
        let py = ax.py(y);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y:.1}</text>",
            ax.px(ax.x0) - 6.0,
            py + 4.0
        );
    }
    // colorbar
    let (cb_x, cb_w) = (WIDTH - MARGIN_R + 4.0, 12.0);
    let (cb_t, cb_b) = (MARGIN_T, HEIGHT - MARGIN_B);
    let steps = 40;
    for i in 0..steps {
        let u0 = i as f64 / steps as f64;
        let (r, g, b) = colormap((u0 + 0.5 / steps as f64).min(1.0));
        let y_hi = cb_b - (cb_b - cb_t) * (i + 1) as f64 / steps as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{cb_x:.2}\" y=\"{y_hi:.2}\" width=\"{cb_w:.2}\" height=\"{:.2}\" \
             fill=\"rgb({r},{g},{b})\"/>",
            (cb_b - cb_t) / steps as f64 + 0.5
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{peak:.4}</text>",
        cb_x + cb_w,
        cb_t - 6.0
    );
    out.push_str("</svg>\n");
    out
}
