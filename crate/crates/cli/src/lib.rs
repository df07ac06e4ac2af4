pub mod app;
pub mod dot;
pub mod suite;
