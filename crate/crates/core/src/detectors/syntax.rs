//! Patterns that a compiler for a text language would reject.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::Finding;
use crate::ast::*;

pub const AMBIGUOUS_CUSTOM_BLOCK_SIGNATURE: &str = "ambiguous-custom-block-signature";
pub const AMBIGUOUS_PARAMETER_NAME: &str = "ambiguous-parameter-name";
pub const CALL_WITHOUT_DEFINITION: &str = "call-without-definition";
pub const EXPRESSION_AS_TOUCHABLE_OR_COLOR: &str = "expression-as-touchable-or-color";
pub const MISSING_TERMINATION_CONDITION: &str = "missing-termination-condition";
pub const ORPHANED_PARAMETER: &str = "orphaned-parameter";
pub const PARAMETER_OUT_OF_SCOPE: &str = "parameter-out-of-scope";

fn run<'a, V: Visitor<'a>>(program: &'a Program, mut visitor: V) -> V {
    walk(program, &mut visitor);
    visitor
}

/// Two definitions in one actor with the same proccode. Every definition
/// after the first is reported.
pub fn ambiguous_custom_block_signature(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V<'a> {
        seen: BTreeSet<&'a str>,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V<'a> {
        fn enter_actor(&mut self, _: &'a Actor) {
            self.seen.clear();
        }
        fn enter_procedure(&mut self, p: &'a ProcedureDefinition, cx: &Context<'a>) {
            if p.proccode.is_empty() {
                return;
            }
            if !self.seen.insert(&p.proccode) {
                self.findings.push(Finding::at(
                    AMBIGUOUS_CUSTOM_BLOCK_SIGNATURE,
                    cx,
                    &p.id,
                    format!("custom block `{}` is defined more than once", p.proccode),
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// A definition with two parameters of the same (case-sensitive) name.
pub fn ambiguous_parameter_name(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn enter_procedure(&mut self, p: &'a ProcedureDefinition, cx: &Context<'a>) {
            let mut names = BTreeSet::new();
            if let Some(dup) = p.parameters.iter().find(|param| !names.insert(param.name.as_str())) {
                self.findings.push(Finding::at(
                    AMBIGUOUS_PARAMETER_NAME,
                    cx,
                    &p.id,
                    format!("custom block `{}` has two parameters named `{}`", p.proccode, dup.name),
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// A call whose proccode has no definition in the calling actor.
pub fn call_without_definition(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            if let StmtKind::Call { proccode, .. } = &stmt.kind {
                if cx.actor.procedure(proccode).is_none() {
                    self.findings.push(Finding::at(
                        CALL_WITHOUT_DEFINITION,
                        cx,
                        &stmt.id,
                        format!("custom block `{proccode}` is called but not defined in this sprite"),
                    ));
                }
            }
        }
    }
    run(program, V::default()).findings
}

/// Touchable slot holding a string or number expression instead of a menu.
/// Boolean reporters are accepted there.
fn bad_touchable(target: &Target) -> bool {
    match target {
        Target::Dynamic(e) => !e.is_boolean(),
        _ => false,
    }
}

/// Colour slot holding anything but a colour literal.
fn bad_color(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::Literal(lit) => lit.kind != LiteralKind::Color,
        ExprKind::Empty | ExprKind::MenuOption(_) => false,
        _ => true,
    }
}

pub fn expression_as_touchable_or_color(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl V {
        fn report(&mut self, cx: &Context<'_>, block: Option<&str>, what: &str) {
            self.findings.push(super::Finding::new(
                EXPRESSION_AS_TOUCHABLE_OR_COLOR,
                cx.locator(block),
                format!("{what} slot holds an expression instead of a menu choice"),
            ));
        }
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            match &stmt.kind {
                StmtKind::CreateClone(t) if bad_touchable(t) => self.report(cx, Some(&stmt.id), "clone target"),
                StmtKind::SetPenColor(c) if bad_color(c) => self.report(cx, Some(&stmt.id), "colour"),
                _ => {}
            }
        }
        fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {
            let id = expr.id.as_deref();
            match &expr.kind {
                ExprKind::Touching(t) | ExprKind::DistanceTo(t) if bad_touchable(t) => {
                    self.report(cx, id, "sprite")
                }
                ExprKind::TouchingColor(c) if bad_color(c) => self.report(cx, id, "colour"),
                ExprKind::ColorTouchingColor(a, b) if bad_color(a) || bad_color(b) => self.report(cx, id, "colour"),
                _ => {}
            }
        }
    }
    run(program, V::default()).findings
}

/// `repeat until` or `wait until` with nothing in the condition slot.
pub fn missing_termination_condition(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
            let (StmtKind::RepeatUntil { cond, .. } | StmtKind::WaitUntil { cond }) = &stmt.kind else {
                return;
            };
            if cond.kind == ExprKind::EmptyCondition {
                self.findings.push(Finding::at(
                    MISSING_TERMINATION_CONDITION,
                    cx,
                    &stmt.id,
                    "loop or wait has no stopping condition",
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// Parameter reporter inside a definition that no longer declares it.
pub fn orphaned_parameter(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {
            let (ExprKind::Parameter { name, .. }, Unit::Procedure(p)) = (&expr.kind, cx.unit) else {
                return;
            };
            if !p.parameters.iter().any(|param| &param.name == name) {
                self.findings.push(Finding::new(
                    ORPHANED_PARAMETER,
                    cx.locator(expr.id.as_deref()),
                    format!("parameter `{name}` is not declared by `{}`", p.proccode),
                ));
            }
        }
    }
    run(program, V::default()).findings
}

/// Parameter reporter used in a script rather than a definition body.
pub fn parameter_out_of_scope(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {
            if let (ExprKind::Parameter { name, .. }, Unit::Script { .. }) = (&expr.kind, cx.unit) {
                self.findings.push(Finding::new(
                    PARAMETER_OUT_OF_SCOPE,
                    cx.locator(expr.id.as_deref()),
                    format!("parameter `{name}` is used outside its custom block"),
                ));
            }
        }
    }
    run(program, V::default()).findings
}
