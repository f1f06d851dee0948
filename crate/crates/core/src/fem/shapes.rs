//! Crouzeix-Raviart shape functions on the reference triangle
//! `{ξ ∈ [0, 1], η ∈ [0, 1 - ξ]}` and a symmetric quadrature rule.
//!
//! Local edge 1 is `η = 0`, edge 2 is `ξ + η = 1`, edge 3 is `ξ = 0`.

/// Values of the three shape functions at `(xi, eta)`.
pub fn cr_shapes(xi: f64, eta: f64) -> [f64; 3] {
    [1.0 - 2.0 * eta, 2.0 * (xi + eta) - 1.0, 1.0 - 2.0 * xi]
}

/// Constant reference gradients `(∂/∂ξ, ∂/∂η)` of the shape functions.
pub const CR_GRADIENTS: [[f64; 2]; 3] = [[0.0, -2.0], [2.0, 2.0], [-2.0, 0.0]];

/// Quadrature point in reference coordinates with its weight, normalized so
/// the weights sum to one (multiply by the element area).
#[derive(Debug, Clone, Copy)]
pub struct QuadraturePoint {
    pub xi: f64,
    pub eta: f64,
    pub weight: f64,
}

const W_A: f64 = 0.223_381_589_678_011_465_944;
const W_B: f64 = 0.109_951_743_655_321_867_389;
const A: f64 = 0.445_948_490_915_964_886_319;
const B: f64 = 0.091_576_213_509_770_743_460;

/// Six-point symmetric rule, exact for polynomials of degree 4.
pub const QUADRATURE: [QuadraturePoint; 6] = [
    QuadraturePoint { xi: A, eta: A, weight: W_A },
    QuadraturePoint { xi: 1.0 - 2.0 * A, eta: A, weight: W_A },
    QuadraturePoint { xi: A, eta: 1.0 - 2.0 * A, weight: W_A },
    QuadraturePoint { xi: B, eta: B, weight: W_B },
    QuadraturePoint { xi: 1.0 - 2.0 * B, eta: B, weight: W_B },
    QuadraturePoint { xi: B, eta: 1.0 - 2.0 * B, weight: W_B },
];

/// Shape function values at every quadrature point.
pub fn shapes_at_quadrature() -> [[f64; 3]; 6] {
    QUADRATURE.map(|q| cr_shapes(q.xi, q.eta))
}
