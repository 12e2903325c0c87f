//! Monotonic relabeling: L0 (Hamming) isotonic regression over linear
//! orders, dags and point sets, with secondary Lp objectives.

pub mod error;
pub mod flow;
pub mod linear_strong;
mod maxflow;
pub mod model;
pub mod oracle;
pub mod pava;
pub mod penalized;
pub mod relabel;
pub mod violator;

pub use error::{Error, Result};
pub use model::{
    hamming_distance, is_isotonic, lp_error, stage_counts, validate, Instance, LabelFunction,
    LabelScale, LpError, Norm, Order, OrderKind, OrderSpec, RegressionResult,
};
pub use violator::{EdgeSet, ViolatorDag};
