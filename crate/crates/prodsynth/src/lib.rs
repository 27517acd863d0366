//! File formats, page extraction and the command-line driver.

pub mod cli;
pub mod extract;
pub mod io;
