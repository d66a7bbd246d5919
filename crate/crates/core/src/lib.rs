pub mod certify;
pub mod check;
pub mod error;
pub mod matrixcore;
pub mod ncycle;
pub mod output;
pub mod qsim;
pub mod sdpsolve;

pub use error::{Error, Result};
