pub mod density;
pub mod error;
pub mod fmo;
pub mod kernel;
pub mod lindblad;
pub mod linalg;
pub mod trajectory;
pub mod circuit;
pub mod config;
pub mod run;
