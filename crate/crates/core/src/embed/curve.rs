//! Least-squares fit of the low-dimensional kernel `1 / (1 + a t^(2b))`
//! against the piecewise membership target implied by `min_dist`:
//! 1 up to `min_dist`, then `exp(-(t - min_dist))`.

const GRID_MAX: f64 = 3.0;
const GRID_POINTS: usize = 300;
const MAX_STEPS: usize = 200;

/// The fitted kernel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub a: f64,
    pub b: f64,
}

pub fn target_curve(t: f64, min_dist: f64) -> f64 {
    if t <= min_dist {
        1.0
    } else {
        (-(t - min_dist)).exp()
    }
}

#[inline]
pub fn kernel(t_sq: f64, p: KernelParams) -> f64 {
    1.0 / (1.0 + p.a * t_sq.powf(p.b))
}

/// Fits `(a, b)` for the given `min_dist` by damped Gauss-Newton on a fixed
/// grid over `[0, 3]`.
pub fn fit_kernel_params(min_dist: f64) -> KernelParams {
    let ts: Vec<f64> = (0..GRID_POINTS)
        .map(|m| GRID_MAX * m as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let targets: Vec<f64> = ts.iter().map(|&t| target_curve(t, min_dist)).collect();

    let mut a = 1.0_f64;
    let mut b = 1.0_f64;
    let mut lambda = 1e-3;
    let mut sse = sum_sq_err(&ts, &targets, a, b);

    for _ in 0..MAX_STEPS {
        // accumulate normal equations
        let (mut jtj00, mut jtj01, mut jtj11) = (0.0, 0.0, 0.0);
        let (mut jtr0, mut jtr1) = (0.0, 0.0);
        for (&t, &y) in ts.iter().zip(&targets) {
            let pow = if t > 0.0 { t.powf(2.0 * b) } else { 0.0 };
            let denom = 1.0 + a * pow;
            let f = 1.0 / denom;
            let r = f - y;
            let da = -pow / (denom * denom);
            let db = if t > 0.0 {
                -2.0 * a * pow * t.ln() / (denom * denom)
            } else {
                0.0
            };
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            jtr0 += da * r;
            jtr1 += db * r;
        }

        // solve (JtJ + lambda I) step = -Jtr
        let m00 = jtj00 + lambda;
        let m11 = jtj11 + lambda;
        let det = m00 * m11 - jtj01 * jtj01;
        if det.abs() < 1e-30 {
            break;
        }
        let step_a = (-jtr0 * m11 + jtr1 * jtj01) / det;
        let step_b = (jtr0 * jtj01 - jtr1 * m00) / det;

        let new_a = (a + step_a).max(1e-3);
        let new_b = (b + step_b).max(1e-3);
        let new_sse = sum_sq_err(&ts, &targets, new_a, new_b);
        if new_sse < sse {
            let moved = (new_a - a).abs() + (new_b - b).abs();
            a = new_a;
            b = new_b;
            sse = new_sse;
            lambda = (lambda * 0.5).max(1e-12);
            if moved < 1e-12 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    KernelParams { a, b }
}

fn sum_sq_err(ts: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    ts.iter()
        .zip(targets)
        .map(|(&t, &y)| {
            let pow = if t > 0.0 { t.powf(2.0 * b) } else { 0.0 };
            let f = 1.0 / (1.0 + a * pow);
            (f - y) * (f - y)
        })
        .sum()
}

/// RMSE of the fitted kernel against the target over the fitting grid.
pub fn fit_rmse(p: KernelParams, min_dist: f64) -> f64 {
    let mut sse = 0.0;
    for m in 0..GRID_POINTS {
        let t = GRID_MAX * m as f64 / (GRID_POINTS - 1) as f64;
        let y = target_curve(t, min_dist);
        let f = kernel(t * t, p);
        sse += (f - y) * (f - y);
    }
    (sse / GRID_POINTS as f64).sqrt()
}
