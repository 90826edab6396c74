pub mod report;
pub mod spectrum;
pub mod sweep;
pub mod verify;
