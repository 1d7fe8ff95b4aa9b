//! Hand-emitted SVG plots: enough rectangles, polylines and text for a
//! histogram overlay and a scatter plot, with no plotting stack behind them.
//! Output is a standalone, well-formed document and byte-stable for a given
//! input.

/// Pixel coordinate formatting; two decimals keep files small and stable.
fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// An SVG document under construction.
pub struct SvgDoc {
    width: f64,
    height: f64,
    body: String,
}

impl SvgDoc {
    pub fn new(width: f64, height: f64) -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
            px(width),
            px(height)
        ));
        SvgDoc {
            width,
            height,
            body,
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        self.body.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"{extra}/>\n",
            px(x),
            px(y),
            px(w),
            px(h)
        ));
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
            px(x1), px(y1), px(x2), px(y2), px(width)
        ));
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", px(x), px(y)))
            .collect();
        self.body.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
            pts.join(" "),
            px(width)
        ));
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str, extra: &str) {
        self.body.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"{extra}/>\n",
            px(cx),
            px(cy),
            px(r)
        ));
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        self.body.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" \
             font-size=\"{}\">{}</text>\n",
            px(x),
            px(y),
            px(size),
            escape(content)
        ));
    }

    /// Y-axis label drawn rotated alongside the plot.
    pub fn text_rotated(&mut self, x: f64, y: f64, size: f64, content: &str) {
        self.body.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"{}\" transform=\"rotate(-90 {} {})\">{}</text>\n",
            px(x),
            px(y),
            px(size),
            px(x),
            px(y),
            escape(content)
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n{}</svg>\n",
            px(self.width),
            px(self.height),
            px(self.width),
            px(self.height),
            self.body
        )
    }
}

/// Mapping from data coordinates to a pixel viewport, plus axis rendering.
pub struct Frame {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), canvas: (f64, f64)) -> Self {
        let (mut x_lo, mut x_hi) = x_range;
        let (mut y_lo, mut y_hi) = y_range;
        // Degenerate ranges still need a drawable span.
        if !(x_hi > x_lo) {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if !(y_hi > y_lo) {
            y_lo -= 0.5;
            y_hi += 0.5;
        }
        Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            left: 70.0,
            top: 40.0,
            width: canvas.0 - 70.0 - 25.0,
            height: canvas.1 - 40.0 - 55.0,
        }
    }

    pub fn x(&self, v: f64) -> f64 {
        self.left + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.width
    }

    pub fn y(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.height
    }

    pub fn draw_axes(&self, doc: &mut SvgDoc, x_label: &str, y_label: &str, title: &str) {
        let bottom = self.top + self.height;
        let right = self.left + self.width;
        doc.line(self.left, bottom, right, bottom, "black", 1.0);
        doc.line(self.left, self.top, self.left, bottom, "black", 1.0);

        for tick in nice_ticks(self.x_lo, self.x_hi) {
            let x = self.x(tick);
            doc.line(x, bottom, x, bottom + 5.0, "black", 1.0);
            doc.text(x, bottom + 18.0, "middle", 11.0, &tick_label(tick));
        }
        for tick in nice_ticks(self.y_lo, self.y_hi) {
            let y = self.y(tick);
            doc.line(self.left - 5.0, y, self.left, y, "black", 1.0);
            doc.text(self.left - 8.0, y + 4.0, "end", 11.0, &tick_label(tick));
        }

        doc.text(
            self.left + self.width / 2.0,
            bottom + 40.0,
            "middle",
            13.0,
            x_label,
        );
        doc.text_rotated(18.0, self.top + self.height / 2.0, 13.0, y_label);
        doc.text(
            self.left + self.width / 2.0,
            self.top - 15.0,
            "middle",
            14.0,
            title,
        );
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e5 || a < 1e-3 {
        format!("{v:e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    }
}

/// Round ticks at a 1/2/5 step, covering `[lo, hi]` with roughly 5 lines.
pub fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw_step = span / 5.0;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_range_at_a_round_step() {
        let ticks = nice_ticks(0.0, 10.0);
        assert!(ticks.contains(&0.0) && ticks.contains(&10.0));
        let ticks = nice_ticks(-15.3, -14.1);
        assert!(!ticks.is_empty());
        assert!(ticks.iter().all(|&t| t >= -15.3 && t <= -14.1));
    }

    #[test]
    fn document_structure_is_balanced() {
        let mut doc = SvgDoc::new(400.0, 300.0);
        let frame = Frame::new((0.0, 1.0), (0.0, 1.0), (400.0, 300.0));
        frame.draw_axes(&mut doc, "x", "density < 1 & > 0", "title");
        doc.circle(frame.x(0.5), frame.y(0.5), 2.0, "steelblue", "");
        let svg = doc.finish();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("&lt;") && svg.contains("&amp;"));
        assert_eq!(svg.matches("<svg").count(), 1);
    }
}
