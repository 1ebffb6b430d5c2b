//! Exact discrete minimax (Chebyshev) linear fits.
//!
//! The fit minimises `max_i |y_i - (A + B x_i)|` over a finite point set.
//! For a fixed slope `B` the optimal intercept centres the residual band,
//! so the problem reduces to minimising the vertical width
//! `w(B) = max_i (y_i - B x_i) - min_i (y_i - B x_i)`,
//! a convex piecewise-linear function of `B` whose kinks are the edge slopes
//! of the upper and lower convex hulls of the points. Scanning those
//! candidate slopes with two monotone hull pointers gives the exact optimum
//! in `O(n log n)`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("cannot fit an empty point list")]
    Empty,
    #[error("duplicate x value {0} in fit input")]
    DuplicateX(i64),
    #[error("non-finite y value in fit input")]
    NonFinite,
}

/// Result of a linear fit `y ~ intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Achieved `max_i |y_i - (intercept + slope * x_i)|`.
    pub max_dev: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Exact minimax linear fit over integer-gridded samples.
///
/// Returns the `(A, B)` minimising `max |y - (A + Bx)|` together with that
/// minimum. Points need not be sorted; x values must be distinct.
pub fn minimax_linear_fit(points: &[(i64, f64)]) -> Result<LinearFit, FitError> {
    if points.is_empty() {
        return Err(FitError::Empty);
    }
    if points.iter().any(|&(_, y)| !y.is_finite()) {
        return Err(FitError::NonFinite);
    }
    if points.len() == 1 {
        return Ok(LinearFit { intercept: points[0].1, slope: 0.0, max_dev: 0.0 });
    }

    let mut pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x as f64, y)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (i, pair) in pts.windows(2).enumerate() {
        if pair[0].0 == pair[1].0 {
            return Err(FitError::DuplicateX(points[i].0.min(points[i + 1].0)));
        }
    }

    if pts.len() == 2 {
        let slope = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
        let intercept = pts[0].1 - slope * pts[0].0;
        let fit = LinearFit { intercept, slope, max_dev: 0.0 };
        return Ok(refresh_max_dev(fit, &pts));
    }

    let upper = hull(&pts, true);
    let lower = hull(&pts, false);

    let mut candidates: Vec<f64> = edge_slopes(&upper);
    candidates.extend(edge_slopes(&lower));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Pointer into the upper hull: argmax of y - Bx starts at the rightmost
    // vertex for B -> -inf and walks left as B grows. The lower-hull argmin
    // walks right.
    let mut iu = upper.len() - 1;
    let mut il = 0usize;
    let mut best: Option<(f64, f64, f64)> = None; // (width, slope, band top)
    for &b in &candidates {
        while iu > 0 && slope_between(upper[iu - 1], upper[iu]) <= b {
            iu -= 1;
        }
        while il + 1 < lower.len() && slope_between(lower[il], lower[il + 1]) <= b {
            il += 1;
        }
        let top = upper[iu].1 - b * upper[iu].0;
        let bottom = lower[il].1 - b * lower[il].0;
        let width = top - bottom;
        if best.map_or(true, |(w, _, _)| width < w) {
            best = Some((width, b, top));
        }
    }

    let (width, slope, top) = best.expect("hulls always yield at least one candidate slope");
    let fit = LinearFit { intercept: top - width / 2.0, slope, max_dev: width / 2.0 };
    Ok(refresh_max_dev(fit, &pts))
}

/// Ordinary least-squares fit over the same inputs; used as a comparison
/// baseline (the minimax deviation is never worse).
pub fn least_squares_fit(points: &[(i64, f64)]) -> Result<LinearFit, FitError> {
    if points.is_empty() {
        return Err(FitError::Empty);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|&(x, _)| x as f64).sum();
    let sy: f64 = points.iter().map(|&(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|&(x, _)| (x as f64) * (x as f64)).sum();
    let sxy: f64 = points.iter().map(|&(x, y)| (x as f64) * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom == 0.0 { 0.0 } else { (n * sxy - sx * sy) / denom };
    let intercept = (sy - slope * sx) / n;
    let max_dev = points
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x as f64).abs())
        .fold(0.0, f64::max);
    Ok(LinearFit { intercept, slope, max_dev })
}

/// Recomputes the achieved deviation from the raw points so the reported
/// value is consistent with `eval` under floating-point rounding.
fn refresh_max_dev(fit: LinearFit, pts: &[(f64, f64)]) -> LinearFit {
    let max_dev = pts.iter().map(|&(x, y)| (y - fit.eval(x)).abs()).fold(0.0, f64::max);
    LinearFit { max_dev, ..fit }
}

fn slope_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

fn edge_slopes(hull: &[(f64, f64)]) -> Vec<f64> {
    hull.windows(2).map(|p| slope_between(p[0], p[1])).collect()
}

/// Monotone-chain hull over x-sorted points. `upper` selects the concave
/// (upper) chain; collinear interior points are dropped.
fn hull(pts: &[(f64, f64)], upper: bool) -> Vec<(f64, f64)> {
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(pts.len().min(64));
    for &p in pts {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 2];
            let b = chain[chain.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            let keep = if upper { cross < 0.0 } else { cross > 0.0 };
            if keep {
                break;
            }
            chain.pop();
        }
        chain.push(p);
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: scan slopes densely with the analytic inner
    /// minimisation over the intercept, then zoom in around the best slope.
    fn brute_force_fit(points: &[(i64, f64)]) -> LinearFit {
        let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x as f64, y)).collect();
        let width_at = |b: f64| {
            let top = pts.iter().map(|&(x, y)| y - b * x).fold(f64::NEG_INFINITY, f64::max);
            let bottom = pts.iter().map(|&(x, y)| y - b * x).fold(f64::INFINITY, f64::min);
            (top - bottom, top)
        };
        let ls = least_squares_fit(points).unwrap();
        let spread: f64 = pts
            .iter()
            .map(|&(x, y)| (y - ls.eval(x)).abs())
            .fold(0.0, f64::max)
            .max(1e-12);
        let mut lo = ls.slope - 8.0 * spread;
        let mut hi = ls.slope + 8.0 * spread;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for _ in 0..6 {
            let step = (hi - lo) / 400.0;
            for i in 0..=400 {
                let b = lo + step * i as f64;
                let (w, top) = width_at(b);
                if w < best.0 {
                    best = (w, b, top);
                }
            }
            lo = best.1 - 2.0 * step;
            hi = best.1 + 2.0 * step;
        }
        LinearFit {
            intercept: best.2 - best.0 / 2.0,
            slope: best.1,
            max_dev: best.0 / 2.0,
        }
    }

    #[test]
    fn two_points_fit_exactly() {
        let fit = minimax_linear_fit(&[(0, 1.0), (3, 4.0)]).unwrap();
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.max_dev < 1e-12);
    }

    #[test]
    fn collinear_points_fit_exactly() {
        let fit = minimax_linear_fit(&[(0, 0.0), (1, 1.0), (2, 2.0)]).unwrap();
        assert!((fit.intercept).abs() < 1e-12);
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.max_dev < 1e-12);
    }

    #[test]
    fn tent_points_equioscillate() {
        // Brute force confirms the optimum is the horizontal mid-line
        // A = 0.5, B = 0 with residuals (-1/2, +1/2, -1/2).
        let points = [(0, 0.0), (1, 1.0), (2, 0.0)];
        let oracle = brute_force_fit(&points);
        assert!((oracle.intercept - 0.5).abs() < 1e-6, "oracle intercept {}", oracle.intercept);
        assert!(oracle.slope.abs() < 1e-6);
        assert!((oracle.max_dev - 0.5).abs() < 1e-6);

        let fit = minimax_linear_fit(&points).unwrap();
        assert!((fit.intercept - 0.5).abs() < 1e-12);
        assert!(fit.slope.abs() < 1e-12);
        assert!((fit.max_dev - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(minimax_linear_fit(&[]).unwrap_err(), FitError::Empty);
    }

    #[test]
    fn duplicate_x_is_rejected() {
        let err = minimax_linear_fit(&[(1, 0.0), (1, 2.0)]).unwrap_err();
        assert_eq!(err, FitError::DuplicateX(1));
    }

    #[test]
    fn single_point_is_exact() {
        let fit = minimax_linear_fit(&[(5, 2.5)]).unwrap();
        assert_eq!(fit.max_dev, 0.0);
        assert_eq!(fit.eval(5.0), 2.5);
    }

    #[test]
    fn matches_brute_force_on_random_point_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for case in 0..60 {
            let count = rng.gen_range(3..24);
            let mut xs: Vec<i64> = (0..count as i64 * 3).collect();
            for i in (1..xs.len()).rev() {
                xs.swap(i, rng.gen_range(0..=i));
            }
            xs.truncate(count);
            let points: Vec<(i64, f64)> =
                xs.iter().map(|&x| (x, rng.gen_range(-4.0..4.0))).collect();

            let fit = minimax_linear_fit(&points).unwrap();
            let oracle = brute_force_fit(&points);
            assert!(
                fit.max_dev <= oracle.max_dev + 1e-7,
                "case {case}: hull fit {:.9} worse than oracle {:.9}",
                fit.max_dev,
                oracle.max_dev
            );
        }
    }

    #[test]
    fn never_worse_than_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let count = rng.gen_range(2..40);
            let points: Vec<(i64, f64)> =
                (0..count).map(|x| (x as i64, rng.gen_range(-10.0..10.0))).collect();
            let minimax = minimax_linear_fit(&points).unwrap();
            let ls = least_squares_fit(&points).unwrap();
            assert!(minimax.max_dev <= ls.max_dev + 1e-9);
        }
    }
}
