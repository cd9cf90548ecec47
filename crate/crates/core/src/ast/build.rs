use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::model::{InputValue, Primitive, RawBlock, RawInput, RawProject, RawTarget};

/// Deepest nesting of statements and expressions accepted by the builder.
pub const MAX_NESTING: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildErrorReason {
    /// A block was reached twice, through a `next` cycle or a shared input.
    ReachedTwice,
    TooDeep,
    MissingBlock,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot build AST at block `{block}`: {reason:?}")]
pub struct AstBuildError {
    pub block: BlockId,
    pub reason: BuildErrorReason,
}

type Result<T> = core::result::Result<T, AstBuildError>;

/// Build the syntax tree for a loaded project.
///
/// Scripts start at every top-level non-shadow block. Non-shadow blocks that
/// no script reaches (a broken `parent` link, for example) are collected
/// afterwards into headless scripts so that no block is lost.
pub fn build_ast(project: &RawProject) -> core::result::Result<Program, AstBuildError> {
    let mut stage = None;
    let mut sprites = Vec::new();
    for target in &project.targets {
        let actor = TargetBuilder::new(target).build()?;
        if target.is_stage && stage.is_none() {
            stage = Some(actor);
        } else {
            sprites.push(actor);
        }
    }
    let stage = stage.unwrap_or_else(|| Actor {
        name: "Stage".to_owned(),
        is_stage: true,
        scripts: Vec::new(),
        procedures: Vec::new(),
        declared_broadcast_names: BTreeSet::new(),
    });
    Ok(Program { stage, sprites })
}

const HATS_WITHOUT_WHEN: &[&str] = &["control_start_as_clone"];

fn is_hat(opcode: &str) -> bool {
    if HATS_WITHOUT_WHEN.contains(&opcode) {
        return true;
    }
    opcode
        .split_once('_')
        .is_some_and(|(_, rest)| rest.starts_with("when"))
}

const LITERAL_SHADOWS: &[(&str, &str, LiteralKind)] = &[
    ("math_number", "NUM", LiteralKind::Number),
    ("math_positive_number", "NUM", LiteralKind::PositiveNumber),
    ("math_whole_number", "NUM", LiteralKind::WholeNumber),
    ("math_integer", "NUM", LiteralKind::Integer),
    ("math_angle", "NUM", LiteralKind::Angle),
    ("colour_picker", "COLOUR", LiteralKind::Color),
    ("text", "TEXT", LiteralKind::String),
];

/// Reporters that may be dropped loose on the canvas and should not be read
/// as statements.
fn is_known_reporter(opcode: &str) -> bool {
    matches!(
        opcode,
        "data_variable"
            | "data_listcontents"
            | "argument_reporter_string_number"
            | "argument_reporter_boolean"
            | "motion_xposition"
            | "motion_yposition"
            | "motion_direction"
            | "sensing_mousex"
            | "sensing_mousey"
            | "sensing_mousedown"
            | "sensing_timer"
            | "sensing_distanceto"
            | "sensing_touchingobject"
            | "sensing_touchingcolor"
            | "sensing_coloristouchingcolor"
            | "sensing_keypressed"
    ) || opcode.starts_with("operator_")
}

struct TargetBuilder<'a> {
    target: &'a RawTarget,
    visited: Vec<bool>,
    depth: usize,
}

impl<'a> TargetBuilder<'a> {
    fn new(target: &'a RawTarget) -> Self {
        Self {
            target,
            visited: vec![false; target.blocks.len()],
            depth: 0,
        }
    }

    fn build(mut self) -> Result<Actor> {
        let mut scripts = Vec::new();
        let mut procedures = Vec::new();

        for (id, block) in self.target.blocks.iter() {
            if !block.top_level || block.shadow || self.is_visited(id) {
                continue;
            }
            if block.opcode == "procedures_definition" {
                procedures.push(self.procedure(id, block)?);
            } else if block.opcode != "procedures_prototype" {
                scripts.push(self.script(id, block)?);
            }
        }

        // Sweep up blocks no top-level block reached.
        for (id, block) in self.target.blocks.iter() {
            if block.shadow || block.opcode == "procedures_prototype" || self.is_visited(id) {
                continue;
            }
            let root = self.detached_root(id);
            let root_block = self.get(root)?;
            if root_block.opcode == "procedures_definition" {
                procedures.push(self.procedure(root, root_block)?);
            } else {
                scripts.push(self.script(root, root_block)?);
            }
        }

        let declared_broadcast_names = self.target.broadcasts.values().map(|n| normalize_name(n)).collect();
        Ok(Actor {
            name: self.target.name.clone(),
            is_stage: self.target.is_stage,
            scripts,
            procedures,
            declared_broadcast_names,
        })
    }

    /// Highest unvisited non-shadow ancestor of an unreached block.
    fn detached_root(&self, start: &'a str) -> &'a str {
        let mut current = start;
        for _ in 0..self.target.blocks.len() {
            let Some(parent_id) = self.target.blocks.get(current).and_then(|b| b.parent.as_deref()) else {
                break;
            };
            match self.target.blocks.get(parent_id) {
                Some(parent) if !parent.shadow && !self.is_visited(parent_id) && parent.opcode != "procedures_prototype" => {
                    current = parent_id
                }
                _ => break,
            }
        }
        current
    }

    fn get(&self, id: &str) -> Result<&'a RawBlock> {
        self.target.blocks.get(id).ok_or_else(|| AstBuildError {
            block: id.to_owned(),
            reason: BuildErrorReason::MissingBlock,
        })
    }

    fn is_visited(&self, id: &str) -> bool {
        self.target.blocks.position(id).is_some_and(|i| self.visited[i])
    }

    fn mark(&mut self, id: &str) {
        if let Some(i) = self.target.blocks.position(id) {
            self.visited[i] = true;
        }
    }

    /// Take ownership of a non-shadow block, failing if something already did.
    fn claim(&mut self, id: &str) -> Result<&'a RawBlock> {
        let block = self.get(id)?;
        let i = self.target.blocks.position(id).unwrap_or_default();
        if self.visited[i] {
            return Err(AstBuildError {
                block: id.to_owned(),
                reason: BuildErrorReason::ReachedTwice,
            });
        }
        self.visited[i] = true;
        Ok(block)
    }

    fn descend(&mut self, id: &str) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(AstBuildError {
                block: id.to_owned(),
                reason: BuildErrorReason::TooDeep,
            });
        }
        Ok(())
    }

    fn ascend(&mut self) {
        self.depth -= 1;
    }

    fn script(&mut self, id: &str, block: &'a RawBlock) -> Result<Script> {
        let origin = id.to_owned();
        if is_hat(&block.opcode) {
            self.claim(id)?;
            let event = Event {
                id: origin.clone(),
                kind: self.event_kind(block)?,
            };
            let body = self.chain(block.next.as_deref())?;
            return Ok(Script { event: Some(event), body, origin });
        }
        if is_known_reporter(&block.opcode) && block.next.is_none() {
            let mut expr = self.expr(id)?;
            expr.id = None;
            let stmt = Stmt {
                id: origin.clone(),
                kind: StmtKind::Reporter(expr),
            };
            return Ok(Script { event: None, body: vec![stmt], origin });
        }
        let body = self.chain(Some(id))?;
        Ok(Script { event: None, body, origin })
    }

    fn event_kind(&mut self, block: &'a RawBlock) -> Result<EventKind> {
        let field = |name: &str| block.field(name).map(|f| f.value.clone()).unwrap_or_default();
        Ok(match block.opcode.as_str() {
            "event_whenflagclicked" => EventKind::GreenFlag,
            "event_whenkeypressed" => EventKind::KeyPressed(field("KEY_OPTION")),
            "event_whenbroadcastreceived" => EventKind::BroadcastReceived(field("BROADCAST_OPTION")),
            "event_whenbackdropswitchesto" => EventKind::BackdropSwitchesTo(field("BACKDROP")),
            "event_whenthisspriteclicked" => EventKind::SpriteClicked,
            "event_whenstageclicked" => EventKind::StageClicked,
            "control_start_as_clone" => EventKind::StartAsClone,
            other => EventKind::Other {
                opcode: other.to_owned(),
                args: self.generic_args(block)?.0,
            },
        })
    }

    fn procedure(&mut self, id: &str, block: &'a RawBlock) -> Result<ProcedureDefinition> {
        self.claim(id)?;
        let prototype_id = block
            .input("custom_block")
            .and_then(|i| i.value.as_ref())
            .and_then(InputValue::block_id)
            .filter(|p| self.target.blocks.contains_key(p));

        let mut proccode = String::new();
        let mut parameters = Vec::new();
        let mut warp = false;
        if let Some(pid) = prototype_id {
            let proto = self.get(pid)?;
            self.mark(pid);
            for input in proto.inputs.values() {
                if let Some(arg_id) = input.value.as_ref().and_then(InputValue::block_id) {
                    self.mark(arg_id);
                }
            }
            if let Some(m) = &proto.mutation {
                proccode = m.proccode.clone().unwrap_or_default();
                warp = m.warp.unwrap_or(false);
                let names = m.argument_names.clone().unwrap_or_default();
                parameters = placeholder_kinds(&proccode)
                    .into_iter()
                    .zip(names)
                    .map(|(kind, name)| Parameter { name, kind })
                    .collect();
            }
        }

        let body = self.chain(block.next.as_deref())?;
        Ok(ProcedureDefinition {
            id: id.to_owned(),
            prototype: prototype_id.map(ToOwned::to_owned),
            proccode,
            parameters,
            body,
            actor: self.target.name.clone(),
            warp,
        })
    }

    /// Follow a `next` chain starting at `start`.
    fn chain(&mut self, start: Option<&str>) -> Result<Vec<Stmt>> {
        let mut out = Vec::new();
        let mut current = start.map(ToOwned::to_owned);
        while let Some(id) = current {
            let block = self.claim(&id)?;
            out.push(self.stmt(&id, block)?);
            current = block.next.clone();
        }
        Ok(out)
    }

    fn substack(&mut self, block: &'a RawBlock, slot: &str) -> Result<Vec<Stmt>> {
        let start = block
            .input(slot)
            .and_then(|i| i.value.as_ref())
            .and_then(InputValue::block_id);
        match start {
            Some(id) => {
                self.descend(id)?;
                let body = self.chain(Some(id));
                self.ascend();
                body
            }
            None => Ok(Vec::new()),
        }
    }

    fn stmt(&mut self, id: &str, block: &'a RawBlock) -> Result<Stmt> {
        self.descend(id)?;
        let kind = self.stmt_kind(block);
        self.ascend();
        Ok(Stmt {
            id: id.to_owned(),
            kind: kind?,
        })
    }

    fn stmt_kind(&mut self, block: &'a RawBlock) -> Result<StmtKind> {
        Ok(match block.opcode.as_str() {
            "control_forever" => StmtKind::Forever {
                body: self.substack(block, "SUBSTACK")?,
            },
            "control_repeat" => StmtKind::Repeat {
                times: self.value(block, "TIMES")?,
                body: self.substack(block, "SUBSTACK")?,
            },
            "control_repeat_until" => StmtKind::RepeatUntil {
                cond: self.condition(block, "CONDITION")?,
                body: self.substack(block, "SUBSTACK")?,
            },
            "control_while" => StmtKind::While {
                cond: self.condition(block, "CONDITION")?,
                body: self.substack(block, "SUBSTACK")?,
            },
            "control_if" => StmtKind::If {
                cond: self.condition(block, "CONDITION")?,
                then: self.substack(block, "SUBSTACK")?,
            },
            "control_if_else" => StmtKind::IfElse {
                cond: self.condition(block, "CONDITION")?,
                then: self.substack(block, "SUBSTACK")?,
                otherwise: self.substack(block, "SUBSTACK2")?,
            },
            "control_wait" => StmtKind::Wait {
                duration: self.value(block, "DURATION")?,
            },
            "control_wait_until" => StmtKind::WaitUntil {
                cond: self.condition(block, "CONDITION")?,
            },
            "control_stop" => {
                let option = block.field("STOP_OPTION").map(|f| f.value.as_str()).unwrap_or("all");
                StmtKind::Stop(match option {
                    "all" => StopScope::All,
                    "this script" => StopScope::ThisScript,
                    _ => StopScope::OtherScripts,
                })
            }
            "control_create_clone_of" => StmtKind::CreateClone(self.target_slot(block, "CLONE_OPTION")?),
            "control_delete_this_clone" => StmtKind::DeleteClone,
            "motion_movesteps" => StmtKind::MoveSteps(self.value(block, "STEPS")?),
            "motion_changexby" => StmtKind::ChangeXBy(self.value(block, "DX")?),
            "motion_changeyby" => StmtKind::ChangeYBy(self.value(block, "DY")?),
            "motion_goto" => StmtKind::GoTo(self.target_slot(block, "TO")?),
            "looks_switchbackdropto" | "looks_switchbackdroptoandwait" => StmtKind::SwitchBackdrop {
                backdrop: self.backdrop(block)?,
                wait: block.opcode.ends_with("andwait"),
            },
            "looks_nextbackdrop" => StmtKind::NextBackdrop,
            "pen_penDown" => StmtKind::PenDown,
            "pen_penUp" => StmtKind::PenUp,
            "pen_clear" => StmtKind::EraseAll,
            "pen_setPenColorToColor" => StmtKind::SetPenColor(self.value(block, "COLOR")?),
            "event_broadcast" | "event_broadcastandwait" => StmtKind::Broadcast {
                message: self.message(block)?,
                wait: block.opcode == "event_broadcastandwait",
            },
            "procedures_call" => {
                let mutation = block.mutation.as_ref();
                let proccode = mutation.and_then(|m| m.proccode.clone()).unwrap_or_default();
                let arg_ids = mutation.and_then(|m| m.argument_ids.clone()).unwrap_or_default();
                let mut args = Vec::with_capacity(arg_ids.len());
                for arg in &arg_ids {
                    args.push(self.value(block, arg)?);
                }
                // Inputs not listed in the mutation still own their blocks.
                for (slot, _) in block.inputs.iter() {
                    if !arg_ids.iter().any(|a| a == slot) {
                        args.push(self.value(block, slot)?);
                    }
                }
                StmtKind::Call { proccode, args }
            }
            _ => {
                let (args, substacks) = self.generic_args(block)?;
                StmtKind::Unknown {
                    opcode: block.opcode.clone(),
                    args,
                    substacks,
                }
            }
        })
    }

    /// Inputs of a block without a dedicated node: `SUBSTACK*` slots become
    /// nested statement lists, everything else an expression.
    fn generic_args(&mut self, block: &'a RawBlock) -> Result<(Vec<Arg>, Vec<Vec<Stmt>>)> {
        let mut args = Vec::new();
        let mut substacks = Vec::new();
        for (slot, _) in block.inputs.iter() {
            if slot.starts_with("SUBSTACK") {
                substacks.push(self.substack(block, slot)?);
            } else {
                args.push(Arg {
                    slot: slot.to_owned(),
                    value: self.value(block, slot)?,
                });
            }
        }
        Ok((args, substacks))
    }

    fn input(&self, block: &'a RawBlock, slot: &str) -> Option<&'a RawInput> {
        block.input(slot)
    }

    /// Expression in a round slot; absent inputs become [`ExprKind::Empty`].
    fn value(&mut self, block: &'a RawBlock, slot: &str) -> Result<Expr> {
        match self.input(block, slot).and_then(|i| i.value.as_ref().or(i.shadow.as_ref())) {
            Some(value) => self.input_value(value),
            None => Ok(Expr::new(ExprKind::Empty)),
        }
    }

    /// Expression in a boolean slot; absent inputs become
    /// [`ExprKind::EmptyCondition`].
    fn condition(&mut self, block: &'a RawBlock, slot: &str) -> Result<Expr> {
        match self.input(block, slot).and_then(|i| i.value.as_ref()) {
            Some(value) => self.input_value(value),
            None => Ok(Expr::new(ExprKind::EmptyCondition)),
        }
    }

    fn input_value(&mut self, value: &InputValue) -> Result<Expr> {
        match value {
            InputValue::Block(id) => self.expr(id),
            InputValue::Primitive(p) => Ok(primitive_expr(p)),
        }
    }

    /// Dropdown slot. Shadow menu blocks give their selected option;
    /// anything else is dynamic.
    fn menu(&mut self, block: &'a RawBlock, slot: &str) -> Result<Menu> {
        let Some(value) = self.input(block, slot).and_then(|i| i.value.as_ref()) else {
            return Ok(Menu::Empty);
        };
        if let InputValue::Block(id) = value {
            let menu = self.get(id)?;
            if menu.shadow {
                self.mark(id);
                let choice = menu.fields.values().next().map(|f| f.value.clone()).unwrap_or_default();
                return Ok(Menu::Choice(choice));
            }
        }
        Ok(Menu::Dynamic(Box::new(self.input_value(value)?)))
    }

    fn target_slot(&mut self, block: &'a RawBlock, slot: &str) -> Result<Target> {
        Ok(match self.menu(block, slot)? {
            Menu::Choice(choice) => target_from_choice(choice),
            Menu::Dynamic(e) => Target::Dynamic(e),
            Menu::Empty => Target::Empty,
        })
    }

    fn backdrop(&mut self, block: &'a RawBlock) -> Result<Backdrop> {
        Ok(match self.menu(block, "BACKDROP")? {
            Menu::Choice(choice) => match choice.as_str() {
                "next backdrop" => Backdrop::Next,
                "previous backdrop" => Backdrop::Previous,
                "random backdrop" => Backdrop::Random,
                _ => Backdrop::Named(choice),
            },
            Menu::Dynamic(e) => match e.kind {
                ExprKind::Literal(Literal {
                    kind: LiteralKind::String,
                    ref value,
                }) => Backdrop::Named(value.clone()),
                _ => Backdrop::Dynamic(e),
            },
            Menu::Empty => Backdrop::Named(String::new()),
        })
    }

    fn message(&mut self, block: &'a RawBlock) -> Result<Message> {
        let Some(value) = self.input(block, "BROADCAST_INPUT").and_then(|i| i.value.as_ref()) else {
            return Ok(Message::Constant(String::new()));
        };
        match value {
            InputValue::Primitive(Primitive::Broadcast { name, .. }) => Ok(Message::Constant(name.clone())),
            InputValue::Primitive(Primitive::Literal(lit)) => Ok(Message::Constant(lit.value.clone())),
            InputValue::Block(id) if self.get(id)?.shadow => {
                self.mark(id);
                let menu = self.get(id)?;
                let name = menu.fields.values().next().map(|f| f.value.clone()).unwrap_or_default();
                Ok(Message::Constant(name))
            }
            other => Ok(Message::Dynamic(Box::new(self.input_value(other)?))),
        }
    }

    fn expr(&mut self, id: &str) -> Result<Expr> {
        let block = self.get(id)?;
        if block.shadow {
            self.mark(id);
            return Ok(fold_shadow(block));
        }
        self.claim(id)?;
        self.descend(id)?;
        let kind = self.expr_kind(block);
        self.ascend();
        Ok(Expr {
            id: Some(id.to_owned()),
            kind: kind?,
        })
    }

    fn expr_kind(&mut self, block: &'a RawBlock) -> Result<ExprKind> {
        let field = |name: &str| block.field(name).map(|f| f.value.clone()).unwrap_or_default();
        let boxed = |e: Expr| Box::new(e);
        Ok(match block.opcode.as_str() {
            "motion_xposition" => ExprKind::XPosition,
            "motion_yposition" => ExprKind::YPosition,
            "motion_direction" => ExprKind::Direction,
            "sensing_mousex" => ExprKind::MouseX,
            "sensing_mousey" => ExprKind::MouseY,
            "sensing_timer" => ExprKind::Timer,
            "sensing_mousedown" => ExprKind::MouseDown,
            "sensing_distanceto" => ExprKind::DistanceTo(self.target_slot(block, "DISTANCETOMENU")?),
            "sensing_touchingobject" => ExprKind::Touching(self.target_slot(block, "TOUCHINGOBJECTMENU")?),
            "sensing_touchingcolor" => ExprKind::TouchingColor(boxed(self.value(block, "COLOR")?)),
            "sensing_coloristouchingcolor" => {
                ExprKind::ColorTouchingColor(boxed(self.value(block, "COLOR")?), boxed(self.value(block, "COLOR2")?))
            }
            "sensing_keypressed" => ExprKind::KeyPressed(self.menu(block, "KEY_OPTION")?),
            "operator_equals" => {
                ExprKind::Equals(boxed(self.value(block, "OPERAND1")?), boxed(self.value(block, "OPERAND2")?))
            }
            "operator_gt" => {
                ExprKind::GreaterThan(boxed(self.value(block, "OPERAND1")?), boxed(self.value(block, "OPERAND2")?))
            }
            "operator_lt" => {
                ExprKind::LessThan(boxed(self.value(block, "OPERAND1")?), boxed(self.value(block, "OPERAND2")?))
            }
            "operator_and" => {
                ExprKind::And(boxed(self.condition(block, "OPERAND1")?), boxed(self.condition(block, "OPERAND2")?))
            }
            "operator_or" => {
                ExprKind::Or(boxed(self.condition(block, "OPERAND1")?), boxed(self.condition(block, "OPERAND2")?))
            }
            "operator_not" => ExprKind::Not(boxed(self.condition(block, "OPERAND")?)),
            op @ ("operator_add" | "operator_subtract" | "operator_multiply" | "operator_divide" | "operator_mod") => {
                let op = match op {
                    "operator_add" => ArithOp::Add,
                    "operator_subtract" => ArithOp::Subtract,
                    "operator_multiply" => ArithOp::Multiply,
                    "operator_divide" => ArithOp::Divide,
                    _ => ArithOp::Modulo,
                };
                ExprKind::Arithmetic {
                    op,
                    lhs: boxed(self.value(block, "NUM1")?),
                    rhs: boxed(self.value(block, "NUM2")?),
                }
            }
            "argument_reporter_string_number" => ExprKind::Parameter {
                name: field("VALUE"),
                kind: ParamKind::StringNumber,
            },
            "argument_reporter_boolean" => ExprKind::Parameter {
                name: field("VALUE"),
                kind: ParamKind::Boolean,
            },
            "data_variable" => ExprKind::Variable(field("VARIABLE")),
            "data_listcontents" => ExprKind::List(field("LIST")),
            _ => {
                let mut args = Vec::new();
                for (slot, _) in block.inputs.iter() {
                    args.push(Arg {
                        slot: slot.to_owned(),
                        value: self.value(block, slot)?,
                    });
                }
                ExprKind::Unknown {
                    opcode: block.opcode.clone(),
                    args,
                }
            }
        })
    }
}

fn target_from_choice(choice: String) -> Target {
    match choice.as_str() {
        "_myself_" => Target::Myself,
        "_mouse_" => Target::MousePointer,
        "_edge_" => Target::Edge,
        "_stage_" => Target::Stage,
        "_random_" => Target::Random,
        _ => Target::Sprite(choice),
    }
}

fn primitive_expr(p: &Primitive) -> Expr {
    Expr::new(match p {
        Primitive::Literal(lit) => ExprKind::Literal(lit.clone()),
        Primitive::Variable { name, .. } => ExprKind::Variable(name.clone()),
        Primitive::List { name, .. } => ExprKind::List(name.clone()),
        Primitive::Broadcast { name, .. } => ExprKind::MenuOption(name.clone()),
    })
}

fn fold_shadow(block: &RawBlock) -> Expr {
    for (opcode, field, kind) in LITERAL_SHADOWS {
        if block.opcode == *opcode {
            let value = block.field(field).map(|f| f.value.clone()).unwrap_or_default();
            return Expr::new(ExprKind::Literal(Literal { kind: *kind, value }));
        }
    }
    let choice = block.fields.values().next().map(|f| f.value.clone()).unwrap_or_default();
    Expr::new(ExprKind::MenuOption(choice))
}

/// Parameter kinds in the order of `%s`/`%n`/`%b` placeholders.
fn placeholder_kinds(proccode: &str) -> Vec<ParamKind> {
    let bytes = proccode.as_bytes();
    let mut kinds = Vec::new();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'%' {
            match bytes[i + 1] {
                b's' | b'n' => kinds.push(ParamKind::StringNumber),
                b'b' => kinds.push(ParamKind::Boolean),
                _ => {}
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    kinds
}
