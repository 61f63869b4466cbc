//! Simpson quadrature: composite rules for tabulated curves and an adaptive
//! rule for the Fourier-side oracle integrals.

/// Composite Simpson on `[a, b]` with at least `intervals` subdivisions
/// (rounded up to an even count).
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Adaptive Simpson with Richardson correction. `tol` is an absolute
/// tolerance for the whole interval.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    adaptive_step(&f, a, m, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of a curve tabulated on a grid: composite Simpson when the grid
/// is uniform, trapezoid otherwise.
pub fn grid_mass(x: &[f64], v: &[f64]) -> f64 {
    assert_eq!(x.len(), v.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n >= 3 && is_uniform(x) {
        let h = (x[n - 1] - x[0]) / (n - 1) as f64;
        let intervals = n - 1;
        if intervals.is_multiple_of(2) {
            return simpson_tabulated(v, h);
        }
        // odd interval count: Simpson on the first n-1 points, trapezoid on the rest
        return simpson_tabulated(&v[..n - 1], h) + 0.5 * h * (v[n - 2] + v[n - 1]);
    }
    let mut acc = 0.0;
    for i in 1..n {
        acc += 0.5 * (x[i] - x[i - 1]) * (v[i] + v[i - 1]);
    }
    acc
}

fn simpson_tabulated(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut sum = v[0] + v[n];
    for (i, val) in v.iter().enumerate().take(n).skip(1) {
        sum += if i % 2 == 1 { 4.0 * val } else { 2.0 * val };
    }
    sum * h / 3.0
}

fn is_uniform(x: &[f64]) -> bool {
    let n = x.len();
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    if h.is_nan() || h <= 0.0 {
        return false;
    }
    x.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-8 * h.abs())
}

/// `count` equispaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        hi
                    } else {
                        lo + i as f64 * step
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn composite_matches_analytic_sine() {
        let v = composite_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 200);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn composite_is_exact_for_cubics() {
        let v = composite_simpson(|x| 3.0 * x * x * x - x + 2.0, -1.0, 3.0, 2);
        // antiderivative: (3/4)x^4 - x^2/2 + 2x
        let exact = |x: f64| 0.75 * x.powi(4) - 0.5 * x * x + 2.0 * x;
        assert_abs_diff_eq!(v, exact(3.0) - exact(-1.0), epsilon = 1e-12);
    }

    #[test]
    fn adaptive_reaches_tolerance_on_runge() {
        let v = adaptive_simpson(|x| 1.0 / (1.0 + x * x), -5.0, 5.0, 1e-12);
        assert_abs_diff_eq!(v, 2.0 * 5.0_f64.atan(), epsilon = 1e-10);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = adaptive_simpson(|x| (40.0 * x).cos(), 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(v, 40.0_f64.sin() / 40.0, epsilon = 1e-10);
    }

    #[test]
    fn grid_mass_uniform_simpson() {
        let x = linspace(0.0, std::f64::consts::PI, 201);
        let v: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        assert_abs_diff_eq!(grid_mass(&x, &v), 2.0, epsilon = 1e-8);
    }

    #[test]
    fn grid_mass_nonuniform_trapezoid() {
        let x = vec![0.0, 0.5, 2.0, 3.0];
        let v = vec![1.0, 1.0, 1.0, 1.0];
        assert_abs_diff_eq!(grid_mass(&x, &v), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn linspace_endpoints_exact() {
        let g = linspace(-2.0, 2.0, 41);
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[40], 2.0);
    }
}
