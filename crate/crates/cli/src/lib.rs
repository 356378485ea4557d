//! Manifest loading, expression parsing, and command drivers for the `z2n`
//! binary. Everything mathematical lives in `z2n-core`; this crate turns
//! JSON manifests into core objects and core reports into exit codes.

pub mod commands;
pub mod expr;
pub mod manifest;
