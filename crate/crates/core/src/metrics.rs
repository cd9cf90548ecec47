//! Complexity metrics: cyclomatic complexity per script and weighted method
//! count per project.
//!
//! A script or custom block body starts at 1 and gains 1 for every `if`,
//! `if else`, `repeat`, `repeat until`, `while`, `forever` and `wait until`,
//! and for every `and`/`or` operator. `else` branches add nothing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ast::*;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorMetrics {
    pub name: String,
    pub wmc: u64,
    pub script_count: usize,
    pub procedure_count: usize,
    pub block_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMetrics {
    pub wmc: u64,
    pub script_count: usize,
    pub procedure_count: usize,
    pub block_count: usize,
    pub actors: Vec<ActorMetrics>,
}

fn expr_decisions(expr: &Expr) -> u64 {
    let own = matches!(expr.kind, ExprKind::And(..) | ExprKind::Or(..)) as u64;
    own + expr.children().into_iter().map(expr_decisions).sum::<u64>()
}

fn stmt_decisions(stmt: &Stmt) -> u64 {
    let own = matches!(
        stmt.kind,
        StmtKind::If { .. }
            | StmtKind::IfElse { .. }
            | StmtKind::Repeat { .. }
            | StmtKind::RepeatUntil { .. }
            | StmtKind::While { .. }
            | StmtKind::Forever { .. }
            | StmtKind::WaitUntil { .. }
    ) as u64;
    own + stmt
        .children()
        .into_iter()
        .map(|c| match c {
            Child::Expr(e) => expr_decisions(e),
            Child::Stmt(s) => stmt_decisions(s),
        })
        .sum::<u64>()
}

/// Complexity of a statement list, counting from the base value 1.
pub fn cyclomatic_complexity(body: &[Stmt]) -> u64 {
    1 + body.iter().map(stmt_decisions).sum::<u64>()
}

pub fn script_complexity(script: &Script) -> u64 {
    let hat = match script.event.as_ref().map(|e| &e.kind) {
        Some(EventKind::Other { args, .. }) => args.iter().map(|a| expr_decisions(&a.value)).sum(),
        _ => 0,
    };
    cyclomatic_complexity(&script.body) + hat
}

pub fn procedure_complexity(procedure: &ProcedureDefinition) -> u64 {
    cyclomatic_complexity(&procedure.body)
}

pub fn actor_wmc(actor: &Actor) -> u64 {
    actor.scripts.iter().map(script_complexity).sum::<u64>()
        + actor.procedures.iter().map(procedure_complexity).sum::<u64>()
}

/// Weighted method count: total complexity of every script and custom block
/// of every actor.
pub fn wmc(program: &Program) -> u64 {
    program.actors().map(actor_wmc).sum()
}

/// Ids of the raw blocks represented in an actor's tree.
pub fn block_ids(actor: &Actor) -> BTreeSet<&str> {
    struct Ids<'a>(BTreeSet<&'a str>);
    impl<'a> Visitor<'a> for Ids<'a> {
        fn enter_procedure(&mut self, p: &'a ProcedureDefinition, _: &Context<'a>) {
            self.0.insert(&p.id);
        }
        fn visit_event(&mut self, e: &'a Event, _: &Context<'a>) {
            self.0.insert(&e.id);
        }
        fn visit_stmt(&mut self, s: &'a Stmt, _: &Context<'a>) {
            self.0.insert(&s.id);
        }
        fn visit_expr(&mut self, e: &'a Expr, _: &Context<'a>) {
            if let Some(id) = &e.id {
                self.0.insert(id);
            }
        }
    }
    let mut ids = Ids(BTreeSet::new());
    walk_actor(actor, &mut ids);
    ids.0
}

pub fn project_metrics(program: &Program) -> ProjectMetrics {
    let actors: Vec<ActorMetrics> = program
        .actors()
        .map(|a| ActorMetrics {
            name: a.name.clone(),
            wmc: actor_wmc(a),
            script_count: a.scripts.len(),
            procedure_count: a.procedures.len(),
            block_count: block_ids(a).len(),
        })
        .collect();
    ProjectMetrics {
        wmc: actors.iter().map(|a| a.wmc).sum(),
        script_count: actors.iter().map(|a| a.script_count).sum(),
        procedure_count: actors.iter().map(|a| a.procedure_count).sum(),
        block_count: actors.iter().map(|a| a.block_count).sum(),
        actors,
    }
}
