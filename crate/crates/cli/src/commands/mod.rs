pub mod analyze;
pub mod robots;
pub mod run;
pub mod sweep;
