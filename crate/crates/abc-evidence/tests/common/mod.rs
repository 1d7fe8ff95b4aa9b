//! Shared test oracles, deliberately independent of the library's own
//! closed forms: the marginal likelihood is recomputed by adaptive
//! quadrature of a from-scratch integrand, and empirical distributions are
//! compared against reference CDFs with a Kolmogorov-Smirnov statistic.

#![allow(dead_code)]

use abc_evidence::data::Dataset;
use abc_evidence::models::ModelSpec;

/// Log marginal likelihood of the toy dataset under Poisson-Exp, pinned
/// from a 40-digit computation (closed form and quadrature agree).
pub const LOG_MARG_POIS_TOY: f64 = -15.926137743940042;

/// Log marginal likelihood of the toy dataset under Geometric-Uniform.
pub const LOG_MARG_GEO_TOY: f64 = -19.757181186059440;

/// Exact log likelihood of the toy dataset at theta = 2 under Poisson-Exp.
pub const LL_POIS_THETA2_TOY: f64 = -14.284923518725040;

pub const LN_HALF: f64 = -0.6931471805599453;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

/// Log factorial by direct summation; independent of any gamma-function
/// implementation. Fine for the small counts used in tests.
fn ln_factorial(y: u64) -> f64 {
    (2..=y).map(|k| (k as f64).ln()).sum()
}

/// Log of `L(theta) * prior(theta)` written out from the model definitions,
/// no library calls involved.
fn log_integrand(model: ModelSpec, dataset: &Dataset, theta: f64) -> f64 {
    let n = dataset.len() as f64;
    let s = dataset.total() as f64;
    match model {
        ModelSpec::PoissonExp => {
            let log_fact: f64 = dataset.counts().iter().map(|&y| ln_factorial(y)).sum();
            s * theta.ln() - n * theta - log_fact - theta
        }
        ModelSpec::GeometricUniform => n * theta.ln() + s * (1.0 - theta).ln(),
    }
}

/// Log marginal likelihood via quadrature of the shifted integrand; the
/// independent route the closed forms are validated against.
pub fn log_marginal_quadrature(model: ModelSpec, dataset: &Dataset) -> f64 {
    let n = dataset.len() as f64;
    let s = dataset.total() as f64;
    let (lo, hi, mode) = match model {
        ModelSpec::PoissonExp => {
            let mode = (s / (n + 1.0)).max(1e-12);
            let hi = (s + 1.0 + 60.0 * (s + 1.0).sqrt()) / (n + 1.0);
            (0.0, hi, mode)
        }
        ModelSpec::GeometricUniform => (0.0, 1.0, (n / (n + s)).clamp(1e-12, 1.0 - 1e-12)),
    };
    let shift = log_integrand(model, dataset, mode);
    // Endpoints are nudged inward so `0 * ln(0)` never produces a NaN; the
    // integrand is continuous there and the nudge is far below the
    // quadrature tolerance.
    let f = move |theta: f64| {
        let t = theta.clamp(lo + 1e-12, hi - 1e-12);
        (log_integrand(model, dataset, t) - shift).exp()
    };
    let integral = adaptive_simpson(&f, lo, hi, 1e-13);
    shift + integral.ln()
}

/// Kolmogorov-Smirnov distance between an empirical sample and a CDF.
pub fn ks_distance(draws: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares slope of y on x.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Parse a CSV file written by the harness into header + string cells.
pub fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("csv has a header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

/// Column index by name, panicking with context on a miss.
pub fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} not in {header:?}"))
}
