//! The detector catalogue and the machinery to run a selection of it.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;

use crate::ast::Program;
use crate::detectors::{general, scratch, syntax, DetectFn, Finding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Syntax,
    General,
    Scratch,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Syntax => "syntax",
            Category::General => "general",
            Category::Scratch => "scratch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "syntax" => Some(Category::Syntax),
            "general" => Some(Category::General),
            "scratch" => Some(Category::Scratch),
            _ => None,
        }
    }
}

/// Static description of a detector. The `id` is the stable name used on
/// the command line and in report columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetectorDescriptor {
    pub id: &'static str,
    pub name: &'static str,
    pub category: Category,
    pub description: &'static str,
}

pub trait Detector: Send + Sync {
    fn descriptor(&self) -> DetectorDescriptor;
    fn detect(&self, program: &Program) -> Vec<Finding>;
}

struct Builtin {
    descriptor: DetectorDescriptor,
    detect: DetectFn,
}

impl Detector for Builtin {
    fn descriptor(&self) -> DetectorDescriptor {
        self.descriptor
    }

    fn detect(&self, program: &Program) -> Vec<Finding> {
        (self.detect)(program)
    }
}

macro_rules! builtin {
    ($id:path, $name:literal, $cat:ident, $f:path, $desc:literal) => {
        Builtin {
            descriptor: DetectorDescriptor {
                id: $id,
                name: $name,
                category: Category::$cat,
                description: $desc,
            },
            detect: $f,
        }
    };
}

fn builtins() -> [Builtin; 25] {
    use general as g;
    use scratch as sc;
    use syntax as sy;
    [
        builtin!(sy::AMBIGUOUS_CUSTOM_BLOCK_SIGNATURE, "Ambiguous Custom Block Signature", Syntax,
            sy::ambiguous_custom_block_signature, "Two custom blocks in one sprite share the same signature"),
        builtin!(sy::AMBIGUOUS_PARAMETER_NAME, "Ambiguous Parameter Name", Syntax,
            sy::ambiguous_parameter_name, "A custom block declares two parameters with the same name"),
        builtin!(sy::CALL_WITHOUT_DEFINITION, "Call Without Definition", Syntax,
            sy::call_without_definition, "A custom block is called but not defined in the sprite"),
        builtin!(sy::EXPRESSION_AS_TOUCHABLE_OR_COLOR, "Expression As Touchable Or Color", Syntax,
            sy::expression_as_touchable_or_color, "A sprite or colour slot holds a string or number expression"),
        builtin!(sy::MISSING_TERMINATION_CONDITION, "Missing Termination Condition", Syntax,
            sy::missing_termination_condition, "A repeat until or wait until has an empty condition"),
        builtin!(sy::ORPHANED_PARAMETER, "Orphaned Parameter", Syntax,
            sy::orphaned_parameter, "A custom block body uses a parameter that was removed"),
        builtin!(sy::PARAMETER_OUT_OF_SCOPE, "Parameter Out Of Scope", Syntax,
            sy::parameter_out_of_scope, "A parameter reporter is used outside its custom block"),
        builtin!(g::COMPARING_LITERALS, "Comparing Literals", General,
            g::comparing_literals, "A comparison whose operands are both literals"),
        builtin!(g::CUSTOM_BLOCK_WITH_FOREVER, "Custom Block With Forever", General,
            g::custom_block_with_forever, "A custom block containing forever is called before other blocks"),
        builtin!(g::CUSTOM_BLOCK_WITH_TERMINATION, "Custom Block With Termination", General,
            g::custom_block_with_termination, "A custom block that always stops is called before other blocks"),
        builtin!(g::ENDLESS_RECURSION, "Endless Recursion", General,
            g::endless_recursion, "A custom block calls itself with no condition to stop"),
        builtin!(g::FOREVER_INSIDE_LOOP, "Forever Inside Loop", General,
            g::forever_inside_loop, "A forever loop is nested inside another loop"),
        builtin!(g::MESSAGE_NEVER_RECEIVED, "Message Never Received", General,
            g::message_never_received, "A message is broadcast but no script receives it"),
        builtin!(g::MESSAGE_NEVER_SENT, "Message Never Sent", General,
            g::message_never_sent, "A script waits for a message that is never broadcast"),
        builtin!(g::MISSING_CLONE_CALL, "Missing Clone Call", General,
            g::missing_clone_call, "A sprite has clone scripts but is never cloned"),
        builtin!(g::MISSING_CLONE_INITIALIZATION, "Missing Clone Initialization", General,
            g::missing_clone_initialization, "A sprite is cloned but its clones have nothing to run"),
        builtin!(g::MISSING_LOOP_SENSING, "Missing Loop Sensing", General,
            g::missing_loop_sensing, "A sensing condition is checked once instead of in a loop"),
        builtin!(g::NO_WORKING_SCRIPTS, "No Working Scripts", General,
            g::no_working_scripts, "A sprite has only empty event handlers and detached blocks"),
        builtin!(g::POSITION_EQUALS_CHECK, "Position Equals Check", General,
            g::position_equals_check, "A position or distance is compared for exact equality in a condition"),
        builtin!(g::RECURSIVE_CLONING, "Recursive Cloning", General,
            g::recursive_cloning, "A clone script creates clones of its own sprite"),
        builtin!(sc::MISSING_BACKDROP_SWITCH, "Missing Backdrop Switch", Scratch,
            sc::missing_backdrop_switch, "A script waits for a backdrop that is never switched to"),
        builtin!(sc::MISSING_ERASE_ALL, "Missing Erase All", Scratch,
            sc::missing_erase_all, "A sprite draws but the project never erases the canvas"),
        builtin!(sc::MISSING_PEN_DOWN, "Missing Pen Down", Scratch,
            sc::missing_pen_down, "A sprite lifts the pen but never puts it down"),
        builtin!(sc::MISSING_PEN_UP, "Missing Pen Up", Scratch,
            sc::missing_pen_up, "A sprite puts the pen down but never lifts it"),
        builtin!(sc::STUTTERING_MOVEMENT, "Stuttering Movement", Scratch,
            sc::stuttering_movement, "A key event handler moves the sprite directly"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown detector id `{0}`")]
    UnknownDetectorId(String),
    #[error("detector id `{0}` is already registered")]
    DuplicateId(String),
}

/// Which detectors to run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Selection {
    #[default]
    All,
    Only(BTreeSet<String>),
}

impl Selection {
    /// Comma-separated list of ids; empty means all.
    pub fn parse(list: &str) -> Self {
        let ids: BTreeSet<String> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(ToString::to_string)
            .collect();
        if ids.is_empty() {
            Selection::All
        } else {
            Selection::Only(ids)
        }
    }

    pub fn includes(&self, id: &str) -> bool {
        match self {
            Selection::All => true,
            Selection::Only(ids) => ids.contains(id),
        }
    }
}

/// Ordered set of detectors, kept sorted by (category, id).
pub struct Registry {
    detectors: Vec<Box<dyn Detector>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry { detectors: Vec::new() }
    }

    /// All shipped detectors.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        for b in builtins() {
            registry.detectors.push(Box::new(b));
        }
        registry.sort();
        registry
    }

    fn sort(&mut self) {
        self.detectors.sort_by_key(|d| {
            let desc = d.descriptor();
            (desc.category, desc.id)
        });
    }

    pub fn register(&mut self, detector: Box<dyn Detector>) -> Result<(), RegistryError> {
        let id = detector.descriptor().id;
        if self.get(id).is_some() {
            return Err(RegistryError::DuplicateId(id.into()));
        }
        self.detectors.push(detector);
        self.sort();
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&dyn Detector> {
        self.detectors.iter().find(|d| d.descriptor().id == id).map(|d| d.as_ref())
    }

    pub fn descriptors(&self) -> Vec<DetectorDescriptor> {
        self.detectors.iter().map(|d| d.descriptor()).collect()
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    /// Fail on the first id the registry does not know.
    pub fn check(&self, selection: &Selection) -> Result<(), RegistryError> {
        if let Selection::Only(ids) = selection {
            if let Some(unknown) = ids.iter().find(|id| self.get(id).is_none()) {
                return Err(RegistryError::UnknownDetectorId(unknown.clone()));
            }
        }
        Ok(())
    }

    /// Findings of every selected detector, grouped by detector in catalogue
    /// order.
    pub fn run(&self, program: &Program, selection: &Selection) -> Result<Vec<Finding>, RegistryError> {
        self.check(selection)?;
        Ok(self
            .detectors
            .iter()
            .filter(|d| selection.includes(d.descriptor().id))
            .flat_map(|d| d.detect(program))
            .collect())
    }
}

pub fn list_detectors() -> Vec<DetectorDescriptor> {
    Registry::builtin().descriptors()
}

/// Run the shipped catalogue.
pub fn run(program: &Program, selection: &Selection) -> Result<Vec<Finding>, RegistryError> {
    Registry::builtin().run(program, selection)
}
