//! Reactive, explorable math documents from OCR'd textbook pages.
//!
//! The pipeline reads an OCR ingestion bundle ([`doc`]), parses formulas
//! ([`expr`]), finds figure axes and graph paths ([`figure`]), and serves
//! interactive sessions ([`session`]) backed by symbolic services ([`cas`]).

pub mod cas;
pub mod doc;
pub mod expr;
pub mod figure;
pub mod session;
