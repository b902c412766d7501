//! Basis reduction and integer normal forms.

pub mod hnf;
pub mod lll;
pub mod snf;

pub use hnf::{canonical_hnf, hnf, hnf_basis, hnf_modular, HnfResult};
pub use lll::{
    check_reduced_bound, default_delta, is_lll_reduced, lll_reduce, lll_reduce_field, lll_reduce_ok, lll_reduce_rows,
};
pub use snf::{snf, SnfResult};
