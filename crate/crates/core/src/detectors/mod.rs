//! Bug-pattern detectors.
//!
//! Each detector is a plain function from a [`Program`] to its findings,
//! mostly implemented as a [`Visitor`](crate::ast::Visitor) over the tree.
//! They are grouped the way the catalogue groups them: patterns a compiler
//! would reject, general programming bugs, and Scratch-specific bugs.

pub mod general;
pub mod scratch;
pub mod syntax;

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::ast::{Context, Locator, Program};

/// One detected instance of a bug pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub detector: String,
    pub actor: String,
    pub locator: Locator,
    pub message: String,
}

impl Finding {
    pub fn new(detector: &str, locator: Locator, message: impl Into<String>) -> Self {
        Finding {
            detector: detector.into(),
            actor: locator.actor.clone(),
            locator,
            message: message.into(),
        }
    }

    pub(crate) fn at(detector: &str, cx: &Context<'_>, block: &str, message: impl Into<String>) -> Self {
        Self::new(detector, cx.locator(Some(block)), message)
    }
}

pub type DetectFn = fn(&Program) -> alloc::vec::Vec<Finding>;
