//! Derivative-free minimization of extended-valued convex functions on
//! boxes of dimension 0, 1 or 2.
//!
//! A coarse scan locates a finite bracket, golden-section search refines it.
//! Two-dimensional problems are solved by nesting: the partial minimum of a
//! jointly convex function is convex in the remaining variable.

use crate::ext_real::ExtReal;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Scan nodes per axis, endpoints included.
    pub scan: usize,
    /// Golden-section stops once the bracket is narrower than
    /// `rel_tol · max(|x|, floor · box width)`.
    pub rel_tol: f64,
    pub floor: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { scan: 33, rel_tol: 1e-15, floor: 1e-8, max_iter: 200 }
    }
}

/// Minimizes `f` on `[lo, hi]`. Among scan nodes with equal value the one
/// closest to `prefer` wins.
pub fn minimize_1d<F>(mut f: F, lo: f64, hi: f64, prefer: f64, opts: &SearchOptions) -> (f64, ExtReal)
where
    F: FnMut(f64) -> ExtReal,
{
    let width = hi - lo;
    if !(width > 0.0) {
        return (lo, f(lo));
    }
    let n = opts.scan.max(3);
    let h = width / (n - 1) as f64;
    let mut best_i = 0;
    let mut best_v = ExtReal::PosInf;
    for i in 0..n {
        let x = if i == n - 1 { hi } else { lo + h * i as f64 };
        let v = f(x);
        let better = v < best_v || (v == best_v && v.is_finite() && (x - prefer).abs() < (node(lo, hi, h, n, best_i) - prefer).abs());
        if better {
            best_v = v;
            best_i = i;
        }
    }
    let x_best = node(lo, hi, h, n, best_i);
    if !best_v.is_finite() {
        return (x_best, best_v);
    }

    let mut a = node(lo, hi, h, n, best_i.saturating_sub(1));
    let mut b = node(lo, hi, h, n, (best_i + 1).min(n - 1));
    let floor = opts.floor * width;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = (x_best, best_v);
    for _ in 0..opts.max_iter {
        if b - a <= opts.rel_tol * (0.5 * (a + b)).abs().max(floor).max(f64::MIN_POSITIVE) {
            break;
        }
        let go_left = if fc.is_finite() || fd.is_finite() {
            fc <= fd
        } else {
            // both probes infinite: keep the side holding the scan minimizer
            (x_best - c).abs() <= (x_best - d).abs()
        };
        if go_left {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            if c >= d {
                break;
            }
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            if d <= c {
                break;
            }
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    for x in [a, b] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

fn node(lo: f64, hi: f64, h: f64, n: usize, i: usize) -> f64 {
    if i == n - 1 {
        hi
    } else {
        lo + h * i as f64
    }
}

/// Minimizes `f` over the box `bounds` (dimension 0, 1 or 2).
/// `prefer` breaks ties between equal scan values.
pub fn minimize_box<F>(mut f: F, bounds: &[(f64, f64)], prefer: &[f64], opts: &SearchOptions) -> (Vec<f64>, ExtReal)
where
    F: FnMut(&[f64]) -> ExtReal,
{
    match bounds.len() {
        0 => (Vec::new(), f(&[])),
        1 => {
            let (x, v) = minimize_1d(|x| f(&[x]), bounds[0].0, bounds[0].1, prefer[0], opts);
            (vec![x], v)
        }
        2 => {
            let (lo1, hi1) = bounds[1];
            let mut inner = |x: f64| minimize_1d(|y| f(&[x, y]), lo1, hi1, prefer[1], opts);
            let (x, _) = minimize_1d(|x| inner(x).1, bounds[0].0, bounds[0].1, prefer[0], opts);
            let (y, v) = inner(x);
            (vec![x, y], v)
        }
        d => panic!("minimize_box supports at most two dimensions, got {d}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_kink_minimum() {
        let (x, v) = minimize_1d(|x| ExtReal::finite((x - 0.3).abs()), -2.0, 5.0, 0.0, &SearchOptions::default());
        assert!((x - 0.3).abs() < 1e-13, "{x}");
        assert!(v.value().unwrap() < 1e-13);
    }

    #[test]
    fn finds_minimum_on_feasibility_boundary() {
        // convex, +inf beyond x = 1, decreasing up to it
        let f = |x: f64| if x > 1.0 { ExtReal::PosInf } else { ExtReal::finite(1.0 - x) };
        let (x, _) = minimize_1d(f, -3.0, 3.0, 0.0, &SearchOptions::default());
        assert!((x - 1.0).abs() < 1e-13, "{x}");
    }

    #[test]
    fn nested_two_dimensional_search() {
        let f = |z: &[f64]| ExtReal::finite((z[0] - 0.25).powi(2) + (z[1] + 0.5).abs());
        let (z, _) = minimize_box(f, &[(-1.0, 1.0), (-1.0, 1.0)], &[0.0, 0.0], &SearchOptions::default());
        assert!((z[0] - 0.25).abs() < 1e-7 && (z[1] + 0.5).abs() < 1e-12, "{z:?}");
    }

    #[test]
    fn ties_prefer_the_requested_point() {
        let f = |x: f64| ExtReal::finite(if x.abs() <= 1.0 { 0.0 } else { x.abs() - 1.0 });
        let (x, _) = minimize_1d(f, -4.0, 4.0, 0.0, &SearchOptions { scan: 9, ..Default::default() });
        assert!(x.abs() <= 1.0);
    }
}
