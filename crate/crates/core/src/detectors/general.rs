//! Bugs that can occur in any programming language.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Finding;
use crate::ast::*;

pub const COMPARING_LITERALS: &str = "comparing-literals";
pub const CUSTOM_BLOCK_WITH_FOREVER: &str = "custom-block-with-forever";
pub const CUSTOM_BLOCK_WITH_TERMINATION: &str = "custom-block-with-termination";
pub const ENDLESS_RECURSION: &str = "endless-recursion";
pub const FOREVER_INSIDE_LOOP: &str = "forever-inside-loop";
pub const MESSAGE_NEVER_RECEIVED: &str = "message-never-received";
pub const MESSAGE_NEVER_SENT: &str = "message-never-sent";
pub const MISSING_CLONE_CALL: &str = "missing-clone-call";
pub const MISSING_CLONE_INITIALIZATION: &str = "missing-clone-initialization";
pub const MISSING_LOOP_SENSING: &str = "missing-loop-sensing";
pub const NO_WORKING_SCRIPTS: &str = "no-working-scripts";
pub const POSITION_EQUALS_CHECK: &str = "position-equals-check";
pub const RECURSIVE_CLONING: &str = "recursive-cloning";

fn run<'a, V: Visitor<'a>>(program: &'a Program, mut visitor: V) -> V {
    walk(program, &mut visitor);
    visitor
}

/// Search statements reached without passing through a conditional
/// construct (`if`, `if else`, `repeat until`, `while`). Unknown C-blocks
/// are not entered.
fn any_unconditional(stmts: &[Stmt], pred: &mut impl FnMut(&Stmt) -> bool) -> bool {
    stmts.iter().any(|s| {
        pred(s)
            || match &s.kind {
                StmtKind::Forever { body } | StmtKind::Repeat { body, .. } => any_unconditional(body, pred),
                _ => false,
            }
    })
}

fn literal_text(e: &Expr) -> &str {
    match &e.kind {
        ExprKind::Literal(lit) => &lit.value,
        _ => "",
    }
}

/// Comparison whose operands are both literals.
pub fn comparing_literals(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {
            let (ExprKind::Equals(a, b) | ExprKind::GreaterThan(a, b) | ExprKind::LessThan(a, b)) = &expr.kind else {
                return;
            };
            if a.is_literal() && b.is_literal() {
                self.findings.push(Finding::new(
                    COMPARING_LITERALS,
                    cx.locator(expr.id.as_deref()),
                    format!("comparison of the literals \"{}\" and \"{}\"", literal_text(a), literal_text(b)),
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// Calls followed by more statements, to custom blocks matching `pred`.
fn calls_with_successor(
    program: &Program,
    detector: &'static str,
    defines: fn(&ProcedureDefinition) -> bool,
    what: &'static str,
) -> Vec<Finding> {
    struct V {
        detector: &'static str,
        defines: fn(&ProcedureDefinition) -> bool,
        what: &'static str,
        matching: BTreeSet<String>,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn enter_actor(&mut self, actor: &'a Actor) {
            self.matching.clear();
            for p in &actor.procedures {
                // Only the first definition of a proccode is ever executed.
                if actor.procedure(&p.proccode).is_some_and(|first| core::ptr::eq(first, p)) && (self.defines)(p) {
                    self.matching.insert(p.proccode.clone());
                }
            }
        }
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            if let StmtKind::Call { proccode, .. } = &stmt.kind {
                if cx.is_followed() && self.matching.contains(proccode) {
                    self.findings.push(Finding::at(
                        self.detector,
                        cx,
                        &stmt.id,
                        format!("custom block `{proccode}` {} so the blocks after the call never run", self.what),
                    ));
                }
            }
        }
    }
    let v = V {
        detector,
        defines,
        what,
        matching: BTreeSet::new(),
        findings: Vec::new(),
    };
    run(program, v).findings
}

pub fn custom_block_with_forever(program: &Program) -> Vec<Finding> {
    calls_with_successor(
        program,
        CUSTOM_BLOCK_WITH_FOREVER,
        |p| any_stmt(&p.body, &mut |s| matches!(s.kind, StmtKind::Forever { .. })),
        "contains a forever loop",
    )
}

pub fn custom_block_with_termination(program: &Program) -> Vec<Finding> {
    calls_with_successor(
        program,
        CUSTOM_BLOCK_WITH_TERMINATION,
        |p| {
            any_unconditional(&p.body, &mut |s| {
                matches!(s.kind, StmtKind::Stop(StopScope::All) | StmtKind::DeleteClone)
            })
        },
        "always stops the program or deletes the clone",
    )
}

/// A definition calling itself outside any conditional construct. One
/// finding per definition, placed on the first such call.
pub fn endless_recursion(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        recursive_call: Option<String>,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn enter_procedure(&mut self, p: &'a ProcedureDefinition, _: &Context<'a>) {
            self.recursive_call = None;
            any_unconditional(&p.body, &mut |s| match &s.kind {
                StmtKind::Call { proccode, .. } if *proccode == p.proccode => {
                    self.recursive_call = Some(s.id.clone());
                    true
                }
                _ => false,
            });
        }
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            let Unit::Procedure(p) = cx.unit else { return };
            if self.recursive_call.as_deref() == Some(stmt.id.as_str()) {
                self.findings.push(Finding::at(
                    ENDLESS_RECURSION,
                    cx,
                    &stmt.id,
                    format!("custom block `{}` calls itself without a stopping condition", p.proccode),
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// `forever` nested anywhere inside another loop.
pub fn forever_inside_loop(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            if matches!(stmt.kind, StmtKind::Forever { .. }) && cx.enclosing_stmts().any(|s| s.kind.is_loop()) {
                self.findings.push(Finding::at(
                    FOREVER_INSIDE_LOOP,
                    cx,
                    &stmt.id,
                    "forever loop inside another loop never lets the outer loop continue",
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// Project-wide broadcast facts.
#[derive(Default)]
struct Broadcasts {
    sent: BTreeSet<String>,
    received: BTreeSet<String>,
    dynamic_send: bool,
}

impl<'a> Visitor<'a> for Broadcasts {
    fn visit_event(&mut self, event: &'a Event, _: &Context<'a>) {
        if let EventKind::BroadcastReceived(m) = &event.kind {
            self.received.insert(normalize_name(m));
        }
    }
    fn visit_stmt(&mut self, stmt: &'a Stmt, _: &Context<'a>) {
        match &stmt.kind {
            StmtKind::Broadcast {
                message: Message::Constant(m),
                ..
            } => {
                self.sent.insert(normalize_name(m));
            }
            StmtKind::Broadcast {
                message: Message::Dynamic(_),
                ..
            } => self.dynamic_send = true,
            _ => {}
        }
    }
}

pub fn message_never_received(program: &Program) -> Vec<Finding> {
    struct V {
        facts: Broadcasts,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            if let StmtKind::Broadcast {
                message: Message::Constant(m),
                ..
            } = &stmt.kind
            {
                if !self.facts.received.contains(&normalize_name(m)) {
                    self.findings.push(Finding::at(
                        MESSAGE_NEVER_RECEIVED,
                        cx,
                        &stmt.id,
                        format!("message \"{m}\" is sent but never received"),
                    ));
                }
            }
        }
    }
    let facts = run(program, Broadcasts::default());
    run(
        program,
        V {
            facts,
            findings: Vec::new(),
        },
    )
    .findings
}

pub fn message_never_sent(program: &Program) -> Vec<Finding> {
    struct V {
        facts: Broadcasts,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_event(&mut self, event: &'a Event, cx: &Context<'a>) {
            if let EventKind::BroadcastReceived(m) = &event.kind {
                if !self.facts.dynamic_send && !self.facts.sent.contains(&normalize_name(m)) {
                    self.findings.push(Finding::at(
                        MESSAGE_NEVER_SENT,
                        cx,
                        &event.id,
                        format!("message \"{m}\" is received but never sent"),
                    ));
                }
            }
        }
    }
    let facts = run(program, Broadcasts::default());
    run(
        program,
        V {
            facts,
            findings: Vec::new(),
        },
    )
    .findings
}

/// Project-wide clone facts.
#[derive(Default)]
struct Clones {
    cloned: BTreeSet<String>,
    dynamic_target: bool,
}

impl<'a> Visitor<'a> for Clones {
    fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
        if let StmtKind::CreateClone(target) = &stmt.kind {
            match target {
                Target::Dynamic(_) => self.dynamic_target = true,
                t => {
                    if let Some(name) = t.clone_target(cx.actor) {
                        self.cloned.insert(name.into());
                    }
                }
            }
        }
    }
}

fn has_hat(actor: &Actor, pred: impl Fn(&EventKind) -> bool) -> bool {
    actor.scripts.iter().any(|s| s.event.as_ref().is_some_and(|e| pred(&e.kind)))
}

/// `when I start as a clone` in a sprite that nothing clones.
pub fn missing_clone_call(program: &Program) -> Vec<Finding> {
    struct V {
        facts: Clones,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_event(&mut self, event: &'a Event, cx: &Context<'a>) {
            if event.kind != EventKind::StartAsClone || cx.actor.is_stage || self.facts.dynamic_target {
                return;
            }
            if !self.facts.cloned.contains(&cx.actor.name) {
                self.findings.push(Finding::at(
                    MISSING_CLONE_CALL,
                    cx,
                    &event.id,
                    format!("sprite \"{}\" is never cloned, so this script never runs", cx.actor.name),
                ));
            }
        }
    }
    let facts = run(program, Clones::default());
    run(
        program,
        V {
            facts,
            findings: Vec::new(),
        },
    )
    .findings
}

/// `create clone of` a sprite that has no clone or click scripts.
pub fn missing_clone_initialization(program: &Program) -> Vec<Finding> {
    struct V<'p> {
        program: &'p Program,
        findings: Vec<Finding>,
    }
    impl<'a, 'p> Visitor<'a> for V<'p> {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            let StmtKind::CreateClone(target) = &stmt.kind else { return };
            let Some(name) = target.clone_target(cx.actor) else { return };
            let Some(sprite) = self.program.sprite(name) else { return };
            if !has_hat(sprite, |k| matches!(k, EventKind::StartAsClone | EventKind::SpriteClicked)) {
                self.findings.push(Finding::at(
                    MISSING_CLONE_INITIALIZATION,
                    cx,
                    &stmt.id,
                    format!("clones of \"{name}\" have no script to run"),
                ));
            }
        }
    }
    run(
        program,
        V {
            program,
            findings: Vec::new(),
        },
    )
    .findings
}

/// An `if` testing a sensing predicate, sitting directly in a green-flag
/// script with no loop around it.
pub fn missing_loop_sensing(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            let (StmtKind::If { cond, .. } | StmtKind::IfElse { cond, .. }) = &stmt.kind else {
                return;
            };
            let green_flag = cx
                .unit
                .script()
                .and_then(|s| s.event.as_ref())
                .is_some_and(|e| e.kind == EventKind::GreenFlag);
            if green_flag && cx.ancestors().is_empty() && cond.any(&mut |e| e.is_sensing_predicate()) {
                self.findings.push(Finding::at(
                    MISSING_LOOP_SENSING,
                    cx,
                    &stmt.id,
                    "sensing condition is checked only once; it probably belongs in a loop",
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// An actor whose scripts are all either a bare hat or a hatless stack, with
/// at least one of each.
pub fn no_working_scripts(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        first: Option<super::Locator>,
        hat_only: usize,
        headless: usize,
        other: usize,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn enter_actor(&mut self, _: &'a Actor) {
            self.first = None;
            self.hat_only = 0;
            self.headless = 0;
            self.other = 0;
        }
        fn enter_script(&mut self, script: &'a Script, cx: &Context<'a>) {
            if self.first.is_none() {
                self.first = Some(cx.locator(Some(&script.origin)));
            }
            if script.is_hat_only() {
                self.hat_only += 1;
            } else if script.is_headless() {
                self.headless += 1;
            } else {
                self.other += 1;
            }
        }
        fn leave_actor(&mut self, actor: &'a Actor) {
            if self.other == 0 && self.hat_only > 0 && self.headless > 0 {
                if let Some(locator) = self.first.take() {
                    self.findings.push(Finding::new(
                        NO_WORKING_SCRIPTS,
                        locator,
                        format!("\"{}\" has only empty event handlers and detached blocks", actor.name),
                    ));
                }
            }
        }
    }
    run(program, V::default()).findings
}

/// `=` on a position or distance reporter used as a guard.
pub fn position_equals_check(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {
            let ExprKind::Equals(a, b) = &expr.kind else { return };
            if !(a.is_position_reporter() || b.is_position_reporter()) {
                return;
            }
            // Climb through boolean connectives to the statement owning the
            // condition.
            for node in cx.ancestors().iter().rev() {
                match node {
                    Node::Expr(e) if matches!(e.kind, ExprKind::And(..) | ExprKind::Or(..) | ExprKind::Not(_)) => {}
                    Node::Stmt(s)
                        if matches!(
                            s.kind,
                            StmtKind::If { .. }
                                | StmtKind::IfElse { .. }
                                | StmtKind::RepeatUntil { .. }
                                | StmtKind::WaitUntil { .. }
                                | StmtKind::While { .. }
                        ) =>
                    {
                        self.findings.push(Finding::new(
                            POSITION_EQUALS_CHECK,
                            cx.locator(expr.id.as_deref()),
                            "exact comparison of a position value in a condition",
                        ));
                        return;
                    }
                    _ => return,
                }
            }
        }
    }
    run(program, V::default()).findings
}

/// `create clone of myself` inside a `when I start as a clone` script.
pub fn recursive_cloning(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            let StmtKind::CreateClone(target) = &stmt.kind else { return };
            let clone_script = cx
                .unit
                .script()
                .and_then(|s| s.event.as_ref())
                .is_some_and(|e| e.kind == EventKind::StartAsClone);
            if clone_script && !cx.actor.is_stage && target.clone_target(cx.actor) == Some(cx.actor.name.as_str()) {
                self.findings.push(Finding::at(
                    RECURSIVE_CLONING,
                    cx,
                    &stmt.id,
                    "clones create further clones of themselves",
                ));
            }
        }
    }
    run(program, V::default()).findings
}
