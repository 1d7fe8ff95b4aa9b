//! CSV assembly with locale-independent number formatting.

/// Format with 12 significant digits in plain decimal notation. Rust's
/// formatter never consults the locale, so output is byte-stable across
/// machines.
pub fn fmt_sig(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIG - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A CSV document under construction; always starts with a header row.
pub struct CsvBuilder {
    out: String,
    columns: usize,
}

impl CsvBuilder {
    pub fn new(header: &str) -> Self {
        let columns = header.split(',').count();
        let mut out = String::new();
        out.push_str(header);
        out.push('\n');
        CsvBuilder { out, columns }
    }

    /// Append one row; cells are written as given (already formatted).
    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns, "row width mismatch");
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}
