// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Orchestration for ptomo experiments: plans, the results store, stage
//! execution and reports. The `ptomo` binary is a thin wrapper over
//! [`commands::run`].

pub mod commands;
pub mod error;
pub mod plan;
pub mod report;
pub mod stages;
pub mod store;

pub use error::{CliError, Result};
