//! Central numeric tolerances.
//!
//! Every magic constant that decides a comparison lives here so the choice is
//! documented once and shared by implementation, tests, and the CLI.

/// Conditioning floor for basis construction: a basis is rejected as singular
/// when `|det| < BASIS_CONDITION_FLOOR * prod(column norms)`.
pub const BASIS_CONDITION_FLOOR: f64 = 1e-10;

/// Round-trip accuracy required of the cached inverse: `max |B*B^-1 - I|`.
pub const LINALG_CHECK: f64 = 1e-12;

/// Tie tolerance for closed-box membership: boundary points within this
/// distance of a face are counted as inside.
pub const BOX_TIE: f64 = 1e-12;

/// Two comb atoms whose positions agree per axis within this distance are
/// merged into one (weights summed).
pub const POSITION_MERGE: f64 = 1e-9;

/// Fractional coordinates this close to 1 wrap to 0, so lattice points reduce
/// to exactly zero instead of 1 - ulp.
pub const WRAP_SNAP: f64 = 1e-9;

/// A nonzero lattice point whose physical part has Euclidean norm below this
/// is an injectivity violation witness.
pub const INJECTIVITY_NORM: f64 = 1e-9;

/// Torus character sums with modulus below this count as vanishing in the
/// injectivity verdict.
pub const RHO_MODULUS_FLOOR: f64 = 1e-9;

/// Default absolute tolerance for quadrature refinement.
pub const QUAD_TOL: f64 = 1e-9;

/// Sampled decay maxima may exceed the certified constant by this factor
/// before the certificate is rejected (grid maxima sit below the true sup).
pub const ADMISSIBILITY_HEADROOM: f64 = 1.01;

/// Radial extent of the decay-certificate sampling grid.
pub const DECAY_GRID_RADIUS: f64 = 50.0;

/// Default cap on enumeration candidates.
pub const ENUM_CAP: u128 = 100_000_000;
