use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::*;

/// Which script or custom block a node sits in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitRef {
    Script(usize),
    Procedure(String),
}

/// Position of a node, resolvable back to the raw block it came from.
///
/// `path` indexes into children in document order: for a script, `[i]` is the
/// `i`-th statement of its body; each further index picks a child of that
/// node, counting argument expressions first and then nested statements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Locator {
    pub actor: String,
    pub unit: UnitRef,
    pub path: Vec<usize>,
    pub block_id: BlockId,
}

#[derive(Debug, Clone, Copy)]
pub enum Unit<'a> {
    Script { index: usize, script: &'a Script },
    Procedure(&'a ProcedureDefinition),
}

impl<'a> Unit<'a> {
    pub fn body(&self) -> &'a [Stmt] {
        match self {
            Unit::Script { script, .. } => &script.body,
            Unit::Procedure(p) => &p.body,
        }
    }

    pub fn origin(&self) -> &'a str {
        match self {
            Unit::Script { script, .. } => &script.origin,
            Unit::Procedure(p) => &p.id,
        }
    }

    pub fn script(&self) -> Option<&'a Script> {
        match self {
            Unit::Script { script, .. } => Some(script),
            Unit::Procedure(_) => None,
        }
    }

    pub fn procedure(&self) -> Option<&'a ProcedureDefinition> {
        match self {
            Unit::Procedure(p) => Some(p),
            Unit::Script { .. } => None,
        }
    }

    fn to_ref(self) -> UnitRef {
        match self {
            Unit::Script { index, .. } => UnitRef::Script(index),
            Unit::Procedure(p) => UnitRef::Procedure(p.proccode.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Node<'a> {
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

impl<'a> Node<'a> {
    pub fn id(&self) -> Option<&'a str> {
        match self {
            Node::Stmt(s) => Some(&s.id),
            Node::Expr(e) => e.id.as_deref(),
        }
    }
}

/// Where the walker currently is. Handed to every callback.
pub struct Context<'a> {
    pub actor: &'a Actor,
    pub unit: Unit<'a>,
    path: Vec<usize>,
    ancestors: Vec<Node<'a>>,
    /// Per enclosing statement: whether anything runs after it in its script.
    followed: Vec<bool>,
}

impl<'a> Context<'a> {
    fn new(actor: &'a Actor, unit: Unit<'a>) -> Self {
        Context {
            actor,
            unit,
            path: Vec::new(),
            ancestors: Vec::new(),
            followed: Vec::new(),
        }
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    /// Enclosing nodes, outermost first, not including the current node.
    pub fn ancestors(&self) -> &[Node<'a>] {
        &self.ancestors
    }

    pub fn enclosing_stmts(&self) -> impl DoubleEndedIterator<Item = &'a Stmt> + '_ {
        self.ancestors.iter().filter_map(|n| match n {
            Node::Stmt(s) => Some(*s),
            Node::Expr(_) => None,
        })
    }

    /// Whether some statement runs after the current statement (or, for an
    /// expression, after its statement) once it completes.
    pub fn is_followed(&self) -> bool {
        self.followed.last().copied().unwrap_or(false)
    }

    /// Locator for the current position. Nodes without an id of their own
    /// (literals, folded menus) point at their nearest enclosing block.
    pub fn locator(&self, node: Option<&str>) -> Locator {
        let block_id = node
            .or_else(|| self.ancestors.iter().rev().find_map(Node::id))
            .unwrap_or_else(|| self.unit.origin());
        Locator {
            actor: self.actor.name.clone(),
            unit: self.unit.to_ref(),
            path: self.path.clone(),
            block_id: block_id.to_owned(),
        }
    }
}

/// Callbacks for [`walk`]. Every method defaults to doing nothing.
#[allow(unused_variables)]
pub trait Visitor<'a> {
    fn enter_actor(&mut self, actor: &'a Actor) {}
    fn leave_actor(&mut self, actor: &'a Actor) {}
    fn enter_script(&mut self, script: &'a Script, cx: &Context<'a>) {}
    fn leave_script(&mut self, script: &'a Script, cx: &Context<'a>) {}
    fn enter_procedure(&mut self, procedure: &'a ProcedureDefinition, cx: &Context<'a>) {}
    fn leave_procedure(&mut self, procedure: &'a ProcedureDefinition, cx: &Context<'a>) {}
    fn visit_event(&mut self, event: &'a Event, cx: &Context<'a>) {}
    fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {}
    fn visit_expr(&mut self, expr: &'a Expr, cx: &Context<'a>) {}
}

/// Depth-first, document-order traversal: stage then sprites; per actor its
/// scripts then its custom block definitions; nodes pre-order.
pub fn walk<'a, V: Visitor<'a>>(program: &'a Program, visitor: &mut V) {
    for actor in program.actors() {
        walk_actor(actor, visitor);
    }
}

/// Traversal of a single actor, in the same order `walk` uses.
pub fn walk_actor<'a, V: Visitor<'a>>(actor: &'a Actor, visitor: &mut V) {
    visitor.enter_actor(actor);
    for (index, script) in actor.scripts.iter().enumerate() {
        let mut cx = Context::new(actor, Unit::Script { index, script });
        visitor.enter_script(script, &cx);
        if let Some(event) = &script.event {
            visitor.visit_event(event, &cx);
            if let EventKind::Other { args, .. } = &event.kind {
                for arg in args {
                    walk_expr(&arg.value, visitor, &mut cx);
                }
            }
        }
        walk_list(&script.body, visitor, &mut cx);
        visitor.leave_script(script, &cx);
    }
    for procedure in &actor.procedures {
        let mut cx = Context::new(actor, Unit::Procedure(procedure));
        visitor.enter_procedure(procedure, &cx);
        walk_list(&procedure.body, visitor, &mut cx);
        visitor.leave_procedure(procedure, &cx);
    }
    visitor.leave_actor(actor);
}

fn walk_list<'a, V: Visitor<'a>>(stmts: &'a [Stmt], visitor: &mut V, cx: &mut Context<'a>) {
    let outer = cx.is_followed();
    for (i, stmt) in stmts.iter().enumerate() {
        cx.path.push(i);
        cx.followed.push(outer || i + 1 < stmts.len());
        walk_stmt(stmt, visitor, cx);
        cx.followed.pop();
        cx.path.pop();
    }
}

fn walk_stmt<'a, V: Visitor<'a>>(stmt: &'a Stmt, visitor: &mut V, cx: &mut Context<'a>) {
    visitor.visit_stmt(stmt, cx);
    cx.ancestors.push(Node::Stmt(stmt));

    // Child indices run over argument expressions first, then over every
    // statement of every nested list.
    let mut index = 0;
    for child in stmt.children() {
        if let Child::Expr(e) = child {
            cx.path.push(index);
            walk_expr(e, visitor, cx);
            cx.path.pop();
            index += 1;
        }
    }
    let outer = cx.is_followed();
    for list in stmt.substacks() {
        for (i, s) in list.iter().enumerate() {
            cx.path.push(index);
            cx.followed.push(outer || i + 1 < list.len());
            walk_stmt(s, visitor, cx);
            cx.followed.pop();
            cx.path.pop();
            index += 1;
        }
    }

    cx.ancestors.pop();
}

fn walk_expr<'a, V: Visitor<'a>>(expr: &'a Expr, visitor: &mut V, cx: &mut Context<'a>) {
    visitor.visit_expr(expr, cx);
    cx.ancestors.push(Node::Expr(expr));
    for (i, child) in expr.children().into_iter().enumerate() {
        cx.path.push(i);
        walk_expr(child, visitor, cx);
        cx.path.pop();
    }
    cx.ancestors.pop();
}
