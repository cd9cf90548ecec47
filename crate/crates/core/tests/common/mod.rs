//! Random well-formed projects for property tests.
#![allow(dead_code)]

use proptest::prelude::*;
use serde_json::{json, Map, Value};

pub const SPRITES: usize = 3;

#[derive(Debug, Clone)]
pub enum Cond {
    Touching(Option<usize>),
    Key,
    MouseDown,
    XEquals,
    LiteralLess,
    Param,
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

#[derive(Debug, Clone)]
pub enum S {
    Move,
    ChangeX,
    Say,
    SayParam,
    PenDown,
    PenUp,
    Clear,
    DeleteClone,
    StopAll,
    NextBackdrop,
    SwitchBackdrop(u8),
    Broadcast(u8),
    CreateClone(Option<usize>),
    Call(u8),
    Unknown,
    Forever(Vec<S>),
    Repeat(Vec<S>),
    RepeatUntil(Option<Cond>, Vec<S>),
    If(Cond, Vec<S>),
    IfElse(Cond, Vec<S>, Vec<S>),
    WaitUntil(Option<Cond>),
}

#[derive(Debug, Clone)]
pub enum Hat {
    Flag,
    Key,
    Receive(u8),
    Clone,
    Backdrop(u8),
    Clicked,
    Headless,
}

#[derive(Debug, Clone)]
pub struct GScript {
    pub hat: Hat,
    pub body: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct GProc {
    pub name: u8,
    pub body: Vec<S>,
}

#[derive(Debug, Clone, Default)]
pub struct GActor {
    pub scripts: Vec<GScript>,
    pub procs: Vec<GProc>,
}

#[derive(Debug, Clone)]
pub struct GProject {
    pub stage: GActor,
    pub sprites: Vec<GActor>,
}

fn cond() -> impl Strategy<Value = Cond> {
    let leaf = prop_oneof![
        proptest::option::of(0..SPRITES).prop_map(Cond::Touching),
        Just(Cond::Key),
        Just(Cond::MouseDown),
        Just(Cond::XEquals),
        Just(Cond::LiteralLess),
        Just(Cond::Param),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cond::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cond::Or(Box::new(a), Box::new(b))),
            inner.prop_map(|a| Cond::Not(Box::new(a))),
        ]
    })
}

fn stmt() -> impl Strategy<Value = S> {
    let leaf = prop_oneof![
        Just(S::Move),
        Just(S::ChangeX),
        Just(S::Say),
        Just(S::SayParam),
        Just(S::PenDown),
        Just(S::PenUp),
        Just(S::Clear),
        Just(S::DeleteClone),
        Just(S::StopAll),
        Just(S::NextBackdrop),
        (0u8..3).prop_map(S::SwitchBackdrop),
        (0u8..3).prop_map(S::Broadcast),
        proptest::option::of(0..SPRITES).prop_map(S::CreateClone),
        (0u8..2).prop_map(S::Call),
        Just(S::Unknown),
        proptest::option::of(cond()).prop_map(S::WaitUntil),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        let body = || prop::collection::vec(inner.clone(), 0..3);
        prop_oneof![
            body().prop_map(S::Forever),
            body().prop_map(S::Repeat),
            (proptest::option::of(cond()), body()).prop_map(|(c, b)| S::RepeatUntil(c, b)),
            (cond(), body()).prop_map(|(c, b)| S::If(c, b)),
            (cond(), body(), body()).prop_map(|(c, a, b)| S::IfElse(c, a, b)),
        ]
    })
}

fn hat() -> impl Strategy<Value = Hat> {
    prop_oneof![
        Just(Hat::Flag),
        Just(Hat::Key),
        (0u8..3).prop_map(Hat::Receive),
        Just(Hat::Clone),
        (0u8..3).prop_map(Hat::Backdrop),
        Just(Hat::Clicked),
        Just(Hat::Headless),
    ]
}

fn actor() -> impl Strategy<Value = GActor> {
    let script = (hat(), prop::collection::vec(stmt(), 0..4)).prop_map(|(hat, body)| GScript { hat, body });
    let proc_ = (0u8..2, prop::collection::vec(stmt(), 0..3)).prop_map(|(name, body)| GProc { name, body });
    (prop::collection::vec(script, 0..4), prop::collection::vec(proc_, 0..3))
        .prop_map(|(scripts, procs)| GActor { scripts, procs })
}

pub fn project() -> impl Strategy<Value = GProject> {
    (actor(), prop::collection::vec(actor(), 1..=SPRITES)).prop_map(|(stage, sprites)| GProject { stage, sprites })
}

pub fn sprite_name(i: usize) -> String {
    format!("Sprite{}", i + 1)
}

struct Emitter {
    prefix: String,
    n: usize,
    blocks: Map<String, Value>,
    count: usize,
}

impl Emitter {
    fn id(&mut self) -> String {
        self.n += 1;
        format!("{}-{}", self.prefix, self.n)
    }

    fn put(&mut self, id: &str, opcode: &str, parent: Option<&str>, inputs: Value, fields: Value, shadow: bool) {
        self.blocks.insert(
            id.to_owned(),
            json!({
                "opcode": opcode, "next": null, "parent": parent,
                "inputs": inputs, "fields": fields, "shadow": shadow, "topLevel": false,
            }),
        );
    }

    fn menu(&mut self, opcode: &str, field: &str, value: &str, parent: &str) -> String {
        let id = self.id();
        self.put(&id, opcode, Some(parent), json!({}), json!({ field: [value, null] }), true);
        id
    }

    fn cond(&mut self, c: &Cond, parent: &str) -> String {
        let id = self.id();
        let (opcode, inputs) = match c {
            Cond::Touching(t) => {
                let target = t.map(sprite_name).unwrap_or_else(|| "_edge_".into());
                let m = self.menu("sensing_touchingobjectmenu", "TOUCHINGOBJECTMENU", &target, &id);
                ("sensing_touchingobject", json!({ "TOUCHINGOBJECTMENU": [1, m] }))
            }
            Cond::Key => {
                let m = self.menu("sensing_keyoptions", "KEY_OPTION", "space", &id);
                ("sensing_keypressed", json!({ "KEY_OPTION": [1, m] }))
            }
            Cond::MouseDown => ("sensing_mousedown", json!({})),
            Cond::XEquals => {
                let x = self.id();
                self.put(&x, "motion_xposition", Some(&id), json!({}), json!({}), false);
                self.count += 1;
                ("operator_equals", json!({ "OPERAND1": [3, x, [10, ""]], "OPERAND2": [1, [10, "50"]] }))
            }
            Cond::LiteralLess => ("operator_lt", json!({ "OPERAND1": [1, [10, "1"]], "OPERAND2": [1, [10, "2"]] })),
            Cond::Param => {
                let p = self.id();
                self.put(&p, "argument_reporter_boolean", Some(&id), json!({}), json!({ "VALUE": ["flag", null] }), false);
                return self.wrap_not(p, id, parent);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                let a = self.cond(a, &id);
                let b = self.cond(b, &id);
                let op = if matches!(c, Cond::And(..)) { "operator_and" } else { "operator_or" };
                (op, json!({ "OPERAND1": [2, a], "OPERAND2": [2, b] }))
            }
            Cond::Not(a) => {
                let a = self.cond(a, &id);
                ("operator_not", json!({ "OPERAND": [2, a] }))
            }
        };
        self.put(&id, opcode, Some(parent), inputs, json!({}), false);
        self.count += 1;
        id
    }

    fn wrap_not(&mut self, inner: String, id: String, parent: &str) -> String {
        self.put(&id, "operator_not", Some(parent), json!({ "OPERAND": [2, inner] }), json!({}), false);
        self.count += 2;
        id
    }

    fn chain(&mut self, body: &[S], parent: &str) -> Option<String> {
        let mut first = None;
        let mut prev: Option<String> = None;
        for s in body {
            let p = prev.clone().unwrap_or_else(|| parent.to_owned());
            let id = self.stmt(s, &p);
            if let Some(prev) = &prev {
                self.blocks[prev]["next"] = json!(id);
            }
            first.get_or_insert_with(|| id.clone());
            prev = Some(id);
        }
        first
    }

    fn substack(&mut self, inputs: &mut Value, slot: &str, body: &[S], parent: &str) {
        if let Some(first) = self.chain(body, parent) {
            inputs[slot] = json!([2, first]);
        }
    }

    fn stmt(&mut self, s: &S, parent: &str) -> String {
        let id = self.id();
        let mut inputs = json!({});
        let mut fields = json!({});
        let mut mutation = None;
        let opcode = match s {
            S::Move => {
                inputs = json!({ "STEPS": [1, [4, "10"]] });
                "motion_movesteps"
            }
            S::ChangeX => {
                inputs = json!({ "DX": [1, [4, "5"]] });
                "motion_changexby"
            }
            S::Say => {
                inputs = json!({ "MESSAGE": [1, [10, "hi"]] });
                "looks_say"
            }
            S::SayParam => {
                let p = self.id();
                self.put(&p, "argument_reporter_string_number", Some(&id), json!({}), json!({ "VALUE": ["x", null] }), false);
                self.count += 1;
                inputs = json!({ "MESSAGE": [3, p, [10, ""]] });
                "looks_say"
            }
            S::PenDown => "pen_penDown",
            S::PenUp => "pen_penUp",
            S::Clear => "pen_clear",
            S::DeleteClone => "control_delete_this_clone",
            S::StopAll => {
                fields = json!({ "STOP_OPTION": ["all", null] });
                mutation = Some(json!({ "tagName": "mutation", "children": [], "hasnext": "false" }));
                "control_stop"
            }
            S::NextBackdrop => "looks_nextbackdrop",
            S::SwitchBackdrop(b) => {
                let m = self.menu("looks_backdrops", "BACKDROP", &format!("bd{b}"), &id);
                inputs = json!({ "BACKDROP": [1, m] });
                "looks_switchbackdropto"
            }
            S::Broadcast(m) => {
                inputs = json!({ "BROADCAST_INPUT": [1, [11, format!("m{m}"), format!("msg{m}")]] });
                "event_broadcast"
            }
            S::CreateClone(t) => {
                let target = t.map(sprite_name).unwrap_or_else(|| "_myself_".into());
                let m = self.menu("control_create_clone_of_menu", "CLONE_OPTION", &target, &id);
                inputs = json!({ "CLONE_OPTION": [1, m] });
                "control_create_clone_of"
            }
            S::Call(k) => {
                inputs = json!({ "arg0": [1, [10, "1"]] });
                mutation = Some(json!({
                    "tagName": "mutation", "children": [], "proccode": format!("proc{k} %s"),
                    "argumentids": "[\"arg0\"]", "warp": "false",
                }));
                "procedures_call"
            }
            S::Unknown => {
                inputs = json!({ "NOTE": [1, [4, "60"]], "BEATS": [1, [4, "0.25"]] });
                "music_playNoteForBeats"
            }
            S::Forever(body) => {
                self.substack(&mut inputs, "SUBSTACK", body, &id);
                "control_forever"
            }
            S::Repeat(body) => {
                inputs = json!({ "TIMES": [1, [6, "10"]] });
                self.substack(&mut inputs, "SUBSTACK", body, &id);
                "control_repeat"
            }
            S::RepeatUntil(c, body) => {
                if let Some(c) = c {
                    inputs["CONDITION"] = json!([2, self.cond(c, &id)]);
                }
                self.substack(&mut inputs, "SUBSTACK", body, &id);
                "control_repeat_until"
            }
            S::If(c, body) => {
                inputs["CONDITION"] = json!([2, self.cond(c, &id)]);
                self.substack(&mut inputs, "SUBSTACK", body, &id);
                "control_if"
            }
            S::IfElse(c, a, b) => {
                inputs["CONDITION"] = json!([2, self.cond(c, &id)]);
                self.substack(&mut inputs, "SUBSTACK", a, &id);
                self.substack(&mut inputs, "SUBSTACK2", b, &id);
                "control_if_else"
            }
            S::WaitUntil(c) => {
                if let Some(c) = c {
                    inputs["CONDITION"] = json!([2, self.cond(c, &id)]);
                }
                "control_wait_until"
            }
        };
        self.put(&id, opcode, Some(parent), inputs, fields, false);
        if let Some(m) = mutation {
            self.blocks[&id]["mutation"] = m;
        }
        self.count += 1;
        id
    }

    fn top(&mut self, id: &str, x: usize) {
        let b = &mut self.blocks[id];
        b["parent"] = Value::Null;
        b["topLevel"] = json!(true);
        b["x"] = json!(x * 200);
        b["y"] = json!(0);
    }

    fn script(&mut self, s: &GScript, x: usize) {
        let (opcode, fields) = match s.hat {
            Hat::Headless => {
                let body = if s.body.is_empty() { vec![S::Move] } else { s.body.clone() };
                let first = self.chain(&body, "").unwrap();
                self.top(&first, x);
                return;
            }
            Hat::Flag => ("event_whenflagclicked", json!({})),
            Hat::Key => ("event_whenkeypressed", json!({ "KEY_OPTION": ["space", null] })),
            Hat::Receive(m) => ("event_whenbroadcastreceived", json!({ "BROADCAST_OPTION": [format!("M{m} "), format!("msg{m}")] })),
            Hat::Clone => ("control_start_as_clone", json!({})),
            Hat::Backdrop(b) => ("event_whenbackdropswitchesto", json!({ "BACKDROP": [format!("bd{b}"), null] })),
            Hat::Clicked => ("event_whenthisspriteclicked", json!({})),
        };
        let hat = self.id();
        self.put(&hat, opcode, None, json!({}), fields, false);
        self.count += 1;
        self.top(&hat, x);
        if let Some(first) = self.chain(&s.body, &hat) {
            self.blocks[&hat]["next"] = json!(first);
        }
    }

    fn procedure(&mut self, p: &GProc, x: usize) {
        let def = self.id();
        let proto = self.id();
        let arg = self.id();
        self.put(&arg, "argument_reporter_string_number", Some(&proto), json!({}), json!({ "VALUE": ["x", null] }), true);
        self.put(&proto, "procedures_prototype", Some(&def), json!({ "arg0": [1, arg] }), json!({}), true);
        self.blocks[&proto]["mutation"] = json!({
            "tagName": "mutation", "children": [], "proccode": format!("proc{} %s", p.name),
            "argumentids": "[\"arg0\"]", "argumentnames": "[\"x\"]", "argumentdefaults": "[\"\"]",
            "warp": "false",
        });
        self.put(&def, "procedures_definition", None, json!({ "custom_block": [1, proto] }), json!({}), false);
        self.count += 1;
        self.top(&def, x);
        if let Some(first) = self.chain(&p.body, &def) {
            self.blocks[&def]["next"] = json!(first);
        }
    }
}

fn target(actor: &GActor, name: &str, stage: bool) -> (Value, usize) {
    let mut e = Emitter {
        prefix: name.to_lowercase(),
        n: 0,
        blocks: Map::new(),
        count: 0,
    };
    let mut x = 0;
    for s in &actor.scripts {
        e.script(s, x);
        x += 1;
    }
    for p in &actor.procs {
        e.procedure(p, x);
        x += 1;
    }
    let mut t = json!({
        "isStage": stage, "name": name, "variables": {}, "lists": {},
        "broadcasts": {}, "blocks": Value::Object(e.blocks), "comments": {},
        "currentCostume": 0, "costumes": [], "sounds": [], "volume": 100, "layerOrder": 0,
    });
    if stage {
        t["broadcasts"] = json!({ "msg0": "m0", "msg1": "m1", "msg2": "m2" });
    }
    (t, e.count)
}

impl GProject {
    /// The project and the number of non-shadow blocks it contains.
    pub fn emit(&self) -> (Value, usize) {
        let (stage, mut count) = target(&self.stage, "Stage", true);
        let mut targets = vec![stage];
        for (i, s) in self.sprites.iter().enumerate() {
            let (t, c) = target(s, &sprite_name(i), false);
            targets.push(t);
            count += c;
        }
        let v = json!({
            "targets": targets, "monitors": [], "extensions": ["pen", "music"],
            "meta": { "semver": "3.0.0", "vm": "0.2.0", "agent": "" },
        });
        (v, count)
    }

    pub fn bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.emit().0).unwrap()
    }
}
