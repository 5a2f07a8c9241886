//! Decentralized sparse multitask recursive least squares over networks.
//!
//! Every node `n` of an undirected graph tracks a sparse weight vector from its
//! own stream `d_n(t) = u_n(t)ᵀ w̃_n(t) + e_n(t)`, with neighbors pulled
//! together by a quadratic coupling and sparsity promoted by an ℓ1 term.
//! Two online solvers are provided ([`admm`] and [`subgrad`]) alongside a
//! centralized benchmark ([`oracle`]) and an experiment [`harness`].

pub mod admm;
pub mod analysis;
pub mod error;
pub mod graph;
pub mod harness;
pub mod network;
pub mod oracle;
pub mod rls;
pub mod seeds;
pub mod subgrad;
pub mod synthdata;

pub use error::{Error, Result};
pub use graph::Graph;
