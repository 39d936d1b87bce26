pub mod analyze;
pub mod fit;
pub mod report;
pub mod simulate;
