//! Text formats and batch commands for the Maass lift toolkit. The `maass`
//! binary is a thin argument-parsing shell over [`commands`]; the formats are
//! exposed so test harnesses can produce and consume fixture files directly.

pub mod commands;
pub mod formats;
