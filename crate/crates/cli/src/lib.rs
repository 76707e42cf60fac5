//! Presets, output writers and command implementations behind the `gmab`
//! binary.

pub mod commands;
pub mod export;
pub mod presets;
