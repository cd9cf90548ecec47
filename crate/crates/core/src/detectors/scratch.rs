//! Bugs specific to Scratch: backdrops, the pen extension and key events.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::Finding;
use crate::ast::*;

pub const MISSING_BACKDROP_SWITCH: &str = "missing-backdrop-switch";
pub const MISSING_ERASE_ALL: &str = "missing-erase-all";
pub const MISSING_PEN_DOWN: &str = "missing-pen-down";
pub const MISSING_PEN_UP: &str = "missing-pen-up";
pub const STUTTERING_MOVEMENT: &str = "stuttering-movement";

fn run<'a, V: Visitor<'a>>(program: &'a Program, mut visitor: V) -> V {
    walk(program, &mut visitor);
    visitor
}

/// `when backdrop switches to` a backdrop nothing switches to. Any relative
/// or computed switch anywhere silences the rule.
pub fn missing_backdrop_switch(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct Facts {
        switched: BTreeSet<String>,
        unpredictable: bool,
    }
    impl<'a> Visitor<'a> for Facts {
        fn visit_stmt(&mut self, stmt: &'a Stmt, _: &Context<'a>) {
            match &stmt.kind {
                StmtKind::SwitchBackdrop { backdrop, .. } => match backdrop {
                    Backdrop::Named(name) => {
                        self.switched.insert(normalize_name(name));
                    }
                    _ => self.unpredictable = true,
                },
                StmtKind::NextBackdrop => self.unpredictable = true,
                _ => {}
            }
        }
    }
    struct V {
        facts: Facts,
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_event(&mut self, event: &'a Event, cx: &Context<'a>) {
            if let EventKind::BackdropSwitchesTo(name) = &event.kind {
                if !self.facts.unpredictable && !self.facts.switched.contains(&normalize_name(name)) {
                    self.findings.push(Finding::at(
                        MISSING_BACKDROP_SWITCH,
                        cx,
                        &event.id,
                        format!("backdrop \"{name}\" is never switched to"),
                    ));
                }
            }
        }
    }
    let facts = run(program, Facts::default());
    run(
        program,
        V {
            facts,
            findings: Vec::new(),
        },
    )
    .findings
}

/// First pen-down and pen-up locations of one sprite, and whether the
/// project ever erases.
#[derive(Default)]
struct PenUse {
    erase_all: bool,
    per_sprite: Vec<(String, Option<Locator>, Option<Locator>)>,
}

impl<'a> Visitor<'a> for PenUse {
    fn enter_actor(&mut self, actor: &'a Actor) {
        self.per_sprite.push((actor.name.clone(), None, None));
    }
    fn visit_stmt(&mut self, stmt: &'a Stmt, cx: &Context<'a>) {
        let Some(entry) = self.per_sprite.last_mut() else { return };
        match stmt.kind {
            StmtKind::EraseAll => self.erase_all = true,
            StmtKind::PenDown if entry.1.is_none() && !cx.actor.is_stage => {
                entry.1 = Some(cx.locator(Some(&stmt.id)))
            }
            StmtKind::PenUp if entry.2.is_none() && !cx.actor.is_stage => entry.2 = Some(cx.locator(Some(&stmt.id))),
            _ => {}
        }
    }
}

fn pen_use(program: &Program) -> PenUse {
    run(program, PenUse::default())
}

/// Sprite drawing with pen down in a project that never erases.
pub fn missing_erase_all(program: &Program) -> Vec<Finding> {
    let pen = pen_use(program);
    if pen.erase_all {
        return Vec::new();
    }
    pen.per_sprite
        .into_iter()
        .filter_map(|(name, down, _)| {
            down.map(|loc| Finding::new(MISSING_ERASE_ALL, loc, format!("\"{name}\" draws but the project never erases")))
        })
        .collect()
}

pub fn missing_pen_down(program: &Program) -> Vec<Finding> {
    pen_use(program)
        .per_sprite
        .into_iter()
        .filter_map(|(name, down, up)| match (down, up) {
            (None, Some(loc)) => Some(Finding::new(
                MISSING_PEN_DOWN,
                loc,
                format!("\"{name}\" lifts the pen but never puts it down"),
            )),
            _ => None,
        })
        .collect()
}

pub fn missing_pen_up(program: &Program) -> Vec<Finding> {
    pen_use(program)
        .per_sprite
        .into_iter()
        .filter_map(|(name, down, up)| match (down, up) {
            (Some(loc), None) => Some(Finding::new(
                MISSING_PEN_UP,
                loc,
                format!("\"{name}\" puts the pen down but never lifts it"),
            )),
            _ => None,
        })
        .collect()
}

/// `when key pressed` moving the sprite directly, without a loop.
pub fn stuttering_movement(program: &Program) -> Vec<Finding> {
    #[derive(Default)]
    struct V {
        findings: Vec<Finding>,
    }
    impl<'a> Visitor<'a> for V {
        fn visit_event(&mut self, event: &'a Event, cx: &Context<'a>) {
            let EventKind::KeyPressed(key) = &event.kind else { return };
            let Some(script) = cx.unit.script() else { return };
            if cx.actor.is_stage {
                return;
            }
            let moves = any_stmt(&script.body, &mut |s| s.kind.is_movement());
            let loops = any_stmt(&script.body, &mut |s| s.kind.is_loop());
            if moves && !loops {
                self.findings.push(Finding::at(
                    STUTTERING_MOVEMENT,
                    cx,
                    &event.id,
                    format!("movement on \"when {key} key pressed\" stutters; poll the key in a loop instead"),
                ));
            }
        }
    }
    run(program, V::default()).findings
}
