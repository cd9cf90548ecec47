//! File, network and command-line side of blockcheck: reading `.sb3`
//! archives, downloading corpora politely, analysing many projects in
//! parallel and rendering the results.

pub mod archive;
pub mod config;
pub mod corpus;
pub mod fetcher;
pub mod manifest;
pub mod render;

pub use blockcheck_core as core;
