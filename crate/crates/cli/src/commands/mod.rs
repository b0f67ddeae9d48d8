pub mod calibrate;
pub mod correlate;
pub mod process;
pub mod report;
pub mod simulate;
