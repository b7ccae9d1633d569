//! Gauss–Legendre quadrature on `[0, 1]`, plus composite helpers.

/// 5-point Gauss–Legendre nodes on `[0, 1]`. Exact for polynomials of
/// degree ≤ 9, which covers every product of bicubic shape functions.
pub const GAUSS5_NODES: [f64; 5] = [
    0.5 - 0.453_089_922_969_332_03,
    0.5 - 0.269_234_655_052_841_55,
    0.5,
    0.5 + 0.269_234_655_052_841_55,
    0.5 + 0.453_089_922_969_332_03,
];

/// Weights matching [`GAUSS5_NODES`]; they sum to 1.
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_44,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// 3-point Gauss–Legendre nodes on `[0, 1]` (exact for degree ≤ 5).
pub const GAUSS3_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];

pub const GAUSS3_WEIGHTS: [f64; 3] = [
    0.277_777_777_777_777_8,
    0.444_444_444_444_444_4,
    0.277_777_777_777_777_8,
];

/// Integrates `f` over `[a, b]` with composite 5-point Gauss on `n` equal
/// subintervals.
pub fn integrate_g5(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * h;
        for (x, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS) {
            acc += w * h * f(lo + x * h);
        }
    }
    acc
}
