//! Numerical laboratory for exponential sums twisted by Hecke eigenvalues of
//! level-1 cusp forms.
//!
//! The crate evaluates both sides of the classical identities (Voronoi,
//! Poisson, the δ-method expansion, Mellin inversion) independently, and
//! monitors the size of S(X, α, β) = Σ λ(n) e(αn² + βn) against power-law
//! ceilings.
//!
//! ```
//! use cusp_sum::coefficients::generate_tau;
//! use cusp_sum::expsum::{quad_exp_sum, Window};
//!
//! let tau = generate_tau(1024).unwrap();
//! let s = quad_exp_sum(&tau, 1000.0, 0.0, 0.0, Window::Full).unwrap();
//! assert!(s.abs <= 1000.0);
//! ```

pub mod arith;
pub mod bounds;
pub mod bump;
pub mod circle;
pub mod coefficients;
pub mod error;
pub mod expsum;
pub mod kloosterman;
pub mod numeric;
pub mod oscillatory;
pub mod summation;
pub mod voronoi;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/kloosterman.md")]
    mod kloosterman {}
    #[doc = include_str!("../../../book/src/oscillatory.md")]
    mod oscillatory {}
    #[doc = include_str!("../../../book/src/circle.md")]
    mod circle {}
    #[doc = include_str!("../../../book/src/voronoi.md")]
    mod voronoi {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/expsum.md")]
    mod expsum {}
    #[doc = include_str!("../../../book/src/summation.md")]
    mod summation {}
}
