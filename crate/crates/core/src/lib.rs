// SPDX-License-Identifier: Apache-2.0

pub mod analytic;
pub mod arrowhead;
pub mod bph;
pub mod branches;
pub mod cli;
pub mod darwinism;
pub mod error;
pub mod model;
pub mod nonmarkov;
pub mod seeding;

pub use error::{Error, Result};
