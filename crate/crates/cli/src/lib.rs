//! File formats, data ingestion and the experiment battery behind the
//! `margin` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod experiments;
pub mod formats;
pub mod ingest;
pub mod report;
