//! Command-line front end and file formats for `superfact-core`.
//!
//! Every run is first resolved into a [`config::RunConfig`], executed by
//! [`commands::execute`], and recorded in a [`manifest::RunManifest`] next to
//! its outputs (`<out>.csv`, `<out>.report.json`, `<out>.manifest.json`).
//!
//! Exit codes: 0 success, 1 identity failure, 2 configuration error,
//! 3 domain breach, 4 step-size failure, 5 no point on the requested level set.

pub mod catalog;
pub mod cli;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod report;
