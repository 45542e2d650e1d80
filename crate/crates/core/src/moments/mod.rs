//! Exact calculus over score-ratio monomials.
//!
//! A [`MomentExpr`] stands for `Σ c_m ∫ f·m dy` with `m` a product of the
//! ratios `ρ_i = f_i / f`. Time derivatives along heat flow and the
//! integration-by-parts identities `E_f[m' + ρ_1 m] = 0` are applied
//! symbolically with exact rationals; no floating point is involved.

mod calculus;
mod expr;
mod monomial;
mod text;

pub use calculus::{
    derive_t, derive_y, ibp_reduce, ibp_relation, Calculus, Reducer, RelationBasis, DEFAULT_DERIVATIVE_CAP,
};
pub use expr::MomentExpr;
pub use monomial::Monomial;
pub use text::{paper_monomial, parse_expr, parse_rational};
