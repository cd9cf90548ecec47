//! Typed syntax tree of a Scratch program.
//!
//! Actors own scripts and custom block definitions; scripts own statement
//! lists; statements own expressions and nested statement lists. Menu and
//! literal shadow blocks are folded into their parents, so every node that
//! carries an `id` corresponds to exactly one non-shadow block of the raw
//! project.

mod build;
mod visit;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::iter;

use serde::{Deserialize, Serialize};

pub use crate::model::{BlockId, Literal, LiteralKind};
pub use build::{build_ast, AstBuildError, BuildErrorReason, MAX_NESTING};
pub use visit::{walk, walk_actor, Context, Locator, Node, Unit, UnitRef, Visitor};

/// Case-insensitive, whitespace-trimmed form used to match broadcast and
/// backdrop names.
pub fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub stage: Actor,
    pub sprites: Vec<Actor>,
}

impl Program {
    /// Stage first, then sprites in file order.
    pub fn actors(&self) -> impl Iterator<Item = &Actor> {
        iter::once(&self.stage).chain(self.sprites.iter())
    }

    pub fn actor(&self, name: &str) -> Option<&Actor> {
        self.actors().find(|a| a.name == name)
    }

    pub fn sprite(&self, name: &str) -> Option<&Actor> {
        self.sprites.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub name: String,
    pub is_stage: bool,
    pub scripts: Vec<Script>,
    pub procedures: Vec<ProcedureDefinition>,
    pub declared_broadcast_names: BTreeSet<String>,
}

impl Actor {
    /// First definition with this exact proccode; later duplicates are
    /// shadowed at runtime.
    pub fn procedure(&self, proccode: &str) -> Option<&ProcedureDefinition> {
        self.procedures.iter().find(|p| p.proccode == proccode)
    }
}

/// A stack of blocks, optionally headed by a hat.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub event: Option<Event>,
    pub body: Vec<Stmt>,
    /// Id of the top block (the hat when there is one).
    pub origin: BlockId,
}

impl Script {
    pub fn is_hat_only(&self) -> bool {
        self.event.is_some() && self.body.is_empty()
    }

    pub fn is_headless(&self) -> bool {
        self.event.is_none() && !self.body.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub id: BlockId,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    GreenFlag,
    KeyPressed(String),
    BroadcastReceived(String),
    BackdropSwitchesTo(String),
    SpriteClicked,
    StageClicked,
    StartAsClone,
    Other { opcode: String, args: Vec<Arg> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    StringNumber,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub kind: ParamKind,
}

/// A custom block definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureDefinition {
    /// Id of the `procedures_definition` block.
    pub id: BlockId,
    pub prototype: Option<BlockId>,
    pub proccode: String,
    pub parameters: Vec<Parameter>,
    pub body: Vec<Stmt>,
    pub actor: String,
    pub warp: bool,
}

/// A named input slot of a block without a dedicated node type.
#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub slot: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: BlockId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopScope {
    All,
    ThisScript,
    OtherScripts,
}

/// Value of a dropdown slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Menu {
    Choice(String),
    Dynamic(Box<Expr>),
    Empty,
}

/// A sprite-or-object slot: touching, distance, go-to and clone menus.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Myself,
    MousePointer,
    Edge,
    Stage,
    Random,
    Sprite(String),
    Dynamic(Box<Expr>),
    Empty,
}

impl Target {
    /// Sprite cloned by a `create clone of` block placed in `owner`.
    pub fn clone_target<'a>(&'a self, owner: &'a Actor) -> Option<&'a str> {
        match self {
            Target::Myself if !owner.is_stage => Some(&owner.name),
            Target::Sprite(name) => Some(name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backdrop {
    Named(String),
    Next,
    Previous,
    Random,
    Dynamic(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Constant(String),
    Dynamic(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Forever { body: Vec<Stmt> },
    Repeat { times: Expr, body: Vec<Stmt> },
    RepeatUntil { cond: Expr, body: Vec<Stmt> },
    /// `control_while`: hidden from the palette but loadable.
    While { cond: Expr, body: Vec<Stmt> },
    If { cond: Expr, then: Vec<Stmt> },
    IfElse { cond: Expr, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    Wait { duration: Expr },
    WaitUntil { cond: Expr },
    Stop(StopScope),
    CreateClone(Target),
    DeleteClone,
    MoveSteps(Expr),
    ChangeXBy(Expr),
    ChangeYBy(Expr),
    GoTo(Target),
    SwitchBackdrop { backdrop: Backdrop, wait: bool },
    NextBackdrop,
    PenDown,
    PenUp,
    EraseAll,
    SetPenColor(Expr),
    Broadcast { message: Message, wait: bool },
    Call { proccode: String, args: Vec<Expr> },
    /// A reporter lying on its own on the canvas.
    Reporter(Expr),
    Unknown { opcode: String, args: Vec<Arg>, substacks: Vec<Vec<Stmt>> },
}

impl StmtKind {
    pub fn is_loop(&self) -> bool {
        matches!(
            self,
            StmtKind::Forever { .. } | StmtKind::Repeat { .. } | StmtKind::RepeatUntil { .. } | StmtKind::While { .. }
        )
    }

    /// Constructs whose body may be skipped depending on a condition.
    pub fn is_conditional(&self) -> bool {
        matches!(
            self,
            StmtKind::If { .. } | StmtKind::IfElse { .. } | StmtKind::RepeatUntil { .. } | StmtKind::While { .. }
        )
    }

    pub fn is_movement(&self) -> bool {
        matches!(self, StmtKind::MoveSteps(_) | StmtKind::ChangeXBy(_) | StmtKind::ChangeYBy(_))
    }
}

/// A child of a node, in document order.
#[derive(Debug, Clone, Copy)]
pub enum Child<'a> {
    Expr(&'a Expr),
    Stmt(&'a Stmt),
}

impl Stmt {
    /// Argument expressions in slot order, then nested statements branch by
    /// branch.
    pub fn children(&self) -> Vec<Child<'_>> {
        let mut out = Vec::new();
        match &self.kind {
            StmtKind::Forever { body } => push_stmts(&mut out, body),
            StmtKind::Repeat { times: e, body }
            | StmtKind::RepeatUntil { cond: e, body }
            | StmtKind::While { cond: e, body }
            | StmtKind::If { cond: e, then: body } => {
                out.push(Child::Expr(e));
                push_stmts(&mut out, body);
            }
            StmtKind::IfElse { cond, then, otherwise } => {
                out.push(Child::Expr(cond));
                push_stmts(&mut out, then);
                push_stmts(&mut out, otherwise);
            }
            StmtKind::Wait { duration: e }
            | StmtKind::WaitUntil { cond: e }
            | StmtKind::MoveSteps(e)
            | StmtKind::ChangeXBy(e)
            | StmtKind::ChangeYBy(e)
            | StmtKind::SetPenColor(e)
            | StmtKind::Reporter(e) => out.push(Child::Expr(e)),
            StmtKind::CreateClone(t) | StmtKind::GoTo(t) => push_target(&mut out, t),
            StmtKind::SwitchBackdrop { backdrop: Backdrop::Dynamic(e), .. } => out.push(Child::Expr(e)),
            StmtKind::Broadcast { message: Message::Dynamic(e), .. } => out.push(Child::Expr(e)),
            StmtKind::Call { args, .. } => out.extend(args.iter().map(Child::Expr)),
            StmtKind::Unknown { args, substacks, .. } => {
                out.extend(args.iter().map(|a| Child::Expr(&a.value)));
                for s in substacks {
                    push_stmts(&mut out, s);
                }
            }
            StmtKind::Stop(_)
            | StmtKind::DeleteClone
            | StmtKind::SwitchBackdrop { .. }
            | StmtKind::NextBackdrop
            | StmtKind::PenDown
            | StmtKind::PenUp
            | StmtKind::EraseAll
            | StmtKind::Broadcast { .. } => {}
        }
        out
    }

    /// Nested statement lists, in document order.
    pub fn substacks(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::Forever { body }
            | StmtKind::Repeat { body, .. }
            | StmtKind::RepeatUntil { body, .. }
            | StmtKind::While { body, .. }
            | StmtKind::If { then: body, .. } => alloc::vec![body.as_slice()],
            StmtKind::IfElse { then, otherwise, .. } => alloc::vec![then.as_slice(), otherwise.as_slice()],
            StmtKind::Unknown { substacks, .. } => substacks.iter().map(Vec::as_slice).collect(),
            _ => Vec::new(),
        }
    }
}

fn push_stmts<'a>(out: &mut Vec<Child<'a>>, stmts: &'a [Stmt]) {
    out.extend(stmts.iter().map(Child::Stmt));
}

fn push_target<'a>(out: &mut Vec<Child<'a>>, target: &'a Target) {
    if let Target::Dynamic(e) = target {
        out.push(Child::Expr(e));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Subtract,
    Multiply,
    Divide,
    Modulo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    /// `None` for literals, folded shadows and empty slots.
    pub id: Option<BlockId>,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    /// A boolean slot with nothing in it.
    EmptyCondition,
    /// A value slot with nothing in it.
    Empty,
    /// A dropdown shadow in a slot without a dedicated node type.
    MenuOption(String),
    Variable(String),
    List(String),
    XPosition,
    YPosition,
    Direction,
    MouseX,
    MouseY,
    Timer,
    DistanceTo(Target),
    Touching(Target),
    TouchingColor(Box<Expr>),
    ColorTouchingColor(Box<Expr>, Box<Expr>),
    KeyPressed(Menu),
    MouseDown,
    Equals(Box<Expr>, Box<Expr>),
    GreaterThan(Box<Expr>, Box<Expr>),
    LessThan(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Arithmetic { op: ArithOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Parameter { name: String, kind: ParamKind },
    Unknown { opcode: String, args: Vec<Arg> },
}

/// Reporter opcodes without dedicated nodes that produce booleans.
const BOOLEAN_REPORTERS: &[&str] = &[
    "operator_contains",
    "data_listcontainsitem",
    "sensing_loud",
    "microbit_isButtonPressed",
    "microbit_isTilted",
    "ev3_buttonPressed",
    "wedo2_isTilted",
    "boost_seeingColor",
    "boost_isTilted",
    "gdxfor_isFreeFalling",
    "gdxfor_isTilted",
];

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { id: None, kind }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Literal(_))
    }

    /// Whether the expression reports a boolean (a hexagonal block).
    pub fn is_boolean(&self) -> bool {
        match &self.kind {
            ExprKind::EmptyCondition
            | ExprKind::Touching(_)
            | ExprKind::TouchingColor(_)
            | ExprKind::ColorTouchingColor(..)
            | ExprKind::KeyPressed(_)
            | ExprKind::MouseDown
            | ExprKind::Equals(..)
            | ExprKind::GreaterThan(..)
            | ExprKind::LessThan(..)
            | ExprKind::And(..)
            | ExprKind::Or(..)
            | ExprKind::Not(_) => true,
            ExprKind::Parameter { kind, .. } => *kind == ParamKind::Boolean,
            ExprKind::Unknown { opcode, .. } => BOOLEAN_REPORTERS.contains(&opcode.as_str()),
            _ => false,
        }
    }

    /// Sensing predicates that react to something happening on screen or on
    /// the keyboard.
    pub fn is_sensing_predicate(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Touching(_)
                | ExprKind::TouchingColor(_)
                | ExprKind::ColorTouchingColor(..)
                | ExprKind::KeyPressed(_)
                | ExprKind::MouseDown
        )
    }

    /// Reporters whose value is a screen position or a distance.
    pub fn is_position_reporter(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::XPosition | ExprKind::YPosition | ExprKind::MouseX | ExprKind::MouseY | ExprKind::DistanceTo(_)
        )
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::DistanceTo(Target::Dynamic(e))
            | ExprKind::Touching(Target::Dynamic(e))
            | ExprKind::KeyPressed(Menu::Dynamic(e))
            | ExprKind::TouchingColor(e)
            | ExprKind::Not(e) => alloc::vec![e.as_ref()],
            ExprKind::ColorTouchingColor(a, b)
            | ExprKind::Equals(a, b)
            | ExprKind::GreaterThan(a, b)
            | ExprKind::LessThan(a, b)
            | ExprKind::And(a, b)
            | ExprKind::Or(a, b)
            | ExprKind::Arithmetic { lhs: a, rhs: b, .. } => alloc::vec![a.as_ref(), b.as_ref()],
            ExprKind::Unknown { args, .. } => args.iter().map(|a| &a.value).collect(),
            _ => Vec::new(),
        }
    }

    /// Pre-order search over this expression and its descendants.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }
}

/// Pre-order search over statements, descending into nested lists but not
/// into expressions.
pub fn any_stmt(stmts: &[Stmt], pred: &mut impl FnMut(&Stmt) -> bool) -> bool {
    stmts
        .iter()
        .any(|s| pred(s) || s.substacks().into_iter().any(|inner| any_stmt(inner, pred)))
}
