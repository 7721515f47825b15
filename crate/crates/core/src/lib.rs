//! Exact combined graphs `Γ_ξ` of the two successive minima of the parametric convex
//! bodies `C_ξ(e^q) = {(x, y) : |x| ≤ e^q, |xξ − y| ≤ e^{−q}}` for rational `ξ`, and the
//! continued fraction of `‖ξ‖` read back from them.
//!
//! All graph coordinates are [`LogCoord`]s, `½·log` of positive rationals, so the
//! construction, the brute-force lattice [`oracle`] and every invariant check in
//! [`verify`] use exact comparisons only.

pub mod arith;
pub mod cf;
pub mod envelope;
pub mod error;
pub mod oracle;
pub mod render;
pub mod trajectory;
pub mod verify;

pub use arith::{format_rational, parse_rational, LatticePoint, LogCoord, Rational};
pub use cf::{normalize, CfExpansion, ConvergentTable, Semiconvergent};
pub use envelope::{
    build_graph, decode, evaluate_graph, interval_local_maxima, CombinedGraph, PiecewiseLinear,
    DEFAULT_DEPTH,
};
pub use error::{Error, Result};
pub use oracle::{brute_minima, MinimaWitness};
pub use render::{render_svg, RenderConfig};
pub use trajectory::{crossing, dominates, Trajectory};
pub use verify::{fuzz, verify_one, Check, FuzzSummary, VerifyOptions, VerifyReport};
