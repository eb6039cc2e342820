pub mod cli;
pub mod cloud;
pub mod completion;
pub mod error;
pub mod eval;
pub mod gripper;
pub mod numeric;
pub mod rescore;
pub mod scene;
pub mod uncertainty;

pub use error::{Error, Result};
