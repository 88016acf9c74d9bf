//! Gauss–Legendre rules.

use alloc::vec::Vec;

use crate::math::cos;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One sub-interval of a composite rule with its `(node, weight)` pairs.
#[derive(Debug, Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<(f64, f64)>,
}

/// Composite rule on `[lo, hi]` split at every multiple of `cell` and at the
/// endpoints, with `per_cell` nodes in each piece.
pub fn composite_nodes(lo: f64, hi: f64, cell: f64, per_cell: usize) -> Vec<Piece> {
    let (x, w) = gauss_legendre(per_cell);
    let mut pieces = Vec::new();
    let mut left = lo;
    let mut j = crate::math::floor(lo / cell) as i64 + 1;
    while left < hi {
        let right = (j as f64 * cell).min(hi);
        j += 1;
        if right <= left {
            continue;
        }
        let half = 0.5 * (right - left);
        let mid = 0.5 * (right + left);
        let points = x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect();
        pieces.push(Piece { lo: left, hi: right, points });
        left = right;
    }
    pieces
}
