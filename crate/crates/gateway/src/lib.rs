//! Command-line pipeline and HTTP session service for explorable math
//! documents.

pub mod cli;
pub mod protocol;
pub mod service;
pub mod svg;
