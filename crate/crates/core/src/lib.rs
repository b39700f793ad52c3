pub mod egoview;
pub mod error;
pub mod graph;
pub mod layout;
pub mod math;
pub mod navigation;
pub mod protocol;
pub mod scene;
pub mod session;
pub mod study;
pub mod tasks;

pub use error::{Error, Result};
