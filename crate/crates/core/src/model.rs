//! Raw object model of a Scratch 3 `project.json`.
//!
//! This layer mirrors the on-disk encoding closely: block maps keep their
//! document order, inputs keep their shadow kind, and literal primitives are
//! decoded into tagged values. Everything the analysis does not need
//! (costumes, sounds, monitors) is carried as opaque JSON.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::marker::PhantomData;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub type BlockId = String;

/// Errors raised while loading a project.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("not a Scratch 3 project: {0}")]
    NotScratch3(String),
    #[error("dangling block reference `{0}`")]
    DanglingReference(BlockId),
    #[error("archive has no `project.json` entry")]
    MissingArchiveEntry,
    #[error("unreadable archive: {0}")]
    InvalidArchive(String),
}

/// A string-keyed map that remembers insertion order.
///
/// Scratch block maps are JSON objects whose key order carries meaning for
/// some rules (the earlier of two duplicate custom block definitions wins),
/// so a sorted map is not enough. Duplicate keys keep their first position
/// and take the last value, like a JSON parser would.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedMap<V> {
    entries: Vec<(String, V)>,
    index: BTreeMap<String, usize>,
}

impl<V> Default for OrderedMap<V> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            index: BTreeMap::new(),
        }
    }
}

impl<V> OrderedMap<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: String, value: V) {
        match self.index.get(&key) {
            Some(&i) => self.entries[i].1 = value,
            None => {
                self.index.insert(key.clone(), self.entries.len());
                self.entries.push((key, value));
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&V> {
        self.index.get(key).map(|&i| &self.entries[i].1)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    /// Position of `key` in document order.
    pub fn position(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &V)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = &V> {
        self.entries.iter().map(|(_, v)| v)
    }
}

impl<V> FromIterator<(String, V)> for OrderedMap<V> {
    fn from_iter<I: IntoIterator<Item = (String, V)>>(iter: I) -> Self {
        let mut map = OrderedMap::new();
        for (k, v) in iter {
            map.insert(k, v);
        }
        map
    }
}

impl<V: Serialize> Serialize for OrderedMap<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for OrderedMap<V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MapVisitor<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> Visitor<'de> for MapVisitor<V> {
            type Value = OrderedMap<V>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut map = OrderedMap::new();
                while let Some((k, v)) = access.next_entry::<String, V>()? {
                    map.insert(k, v);
                }
                Ok(map)
            }

            // Some exporters write `[]` for an empty map.
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("expected an object, found a non-empty array"));
                }
                Ok(OrderedMap::new())
            }
        }

        deserializer.deserialize_any(MapVisitor(PhantomData))
    }
}

/// Whole project file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProject {
    pub targets: Vec<RawTarget>,
    #[serde(default)]
    pub monitors: Vec<Value>,
    #[serde(default)]
    pub extensions: Vec<Value>,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub semver: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vm: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<Value>,
}

/// A sprite or the stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawTarget {
    #[serde(default)]
    pub is_stage: bool,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub variables: OrderedMap<RawVariable>,
    #[serde(default)]
    pub lists: OrderedMap<RawList>,
    #[serde(default)]
    pub broadcasts: OrderedMap<String>,
    #[serde(default)]
    pub blocks: OrderedMap<RawBlock>,
    #[serde(default)]
    pub costumes: Vec<Value>,
    #[serde(default)]
    pub sounds: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawVariable {
    pub name: String,
    pub value: Value,
    pub cloud: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawList {
    pub name: String,
    pub values: Vec<Value>,
}

impl Serialize for RawVariable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(None)?;
        seq.serialize_element(&self.name)?;
        seq.serialize_element(&self.value)?;
        if self.cloud {
            seq.serialize_element(&true)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RawVariable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<Value>::deserialize(deserializer)?;
        let mut it = items.into_iter();
        let name = value_to_text(it.next().unwrap_or(Value::Null));
        let value = it.next().unwrap_or(Value::Null);
        let cloud = matches!(it.next(), Some(Value::Bool(true)));
        Ok(RawVariable { name, value, cloud })
    }
}

impl Serialize for RawList {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.name, &self.values).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RawList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<Value>::deserialize(deserializer)?;
        let mut it = items.into_iter();
        let name = value_to_text(it.next().unwrap_or(Value::Null));
        let values = match it.next() {
            Some(Value::Array(values)) => values,
            _ => Vec::new(),
        };
        Ok(RawList { name, values })
    }
}

/// One block as stored in a target's block map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawBlock {
    pub opcode: String,
    pub next: Option<BlockId>,
    pub parent: Option<BlockId>,
    pub inputs: OrderedMap<RawInput>,
    pub fields: OrderedMap<RawField>,
    pub shadow: bool,
    #[serde(rename = "topLevel")]
    pub top_level: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
}

impl RawBlock {
    pub fn input(&self, slot: &str) -> Option<&RawInput> {
        self.inputs.get(slot)
    }

    pub fn field(&self, name: &str) -> Option<&RawField> {
        self.fields.get(name)
    }

    /// Block ids this block points at through `next`, `parent` or inputs.
    pub fn references(&self) -> impl Iterator<Item = &str> {
        let inputs = self.inputs.values().flat_map(|input| {
            [input.value.as_ref(), input.shadow.as_ref()]
                .into_iter()
                .flatten()
                .filter_map(InputValue::block_id)
        });
        self.next
            .as_deref()
            .into_iter()
            .chain(self.parent.as_deref())
            .chain(inputs)
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct BlockObject {
    opcode: String,
    #[serde(default)]
    next: Option<String>,
    #[serde(default)]
    parent: Option<String>,
    #[serde(default)]
    inputs: OrderedMap<RawInput>,
    #[serde(default)]
    fields: OrderedMap<RawField>,
    #[serde(default)]
    shadow: bool,
    #[serde(default)]
    top_level: bool,
    #[serde(default)]
    mutation: Option<Mutation>,
}

#[derive(Deserialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
enum BlockRepr {
    Object(BlockObject),
    Primitive(Vec<Value>),
}

impl<'de> Deserialize<'de> for RawBlock {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match BlockRepr::deserialize(deserializer)? {
            BlockRepr::Object(b) => Ok(RawBlock {
                opcode: b.opcode,
                next: b.next,
                parent: b.parent,
                inputs: b.inputs,
                fields: b.fields,
                shadow: b.shadow,
                top_level: b.top_level,
                mutation: b.mutation,
            }),
            // Loose variable and list reporters are stored as compact arrays:
            // `[12, name, id, x, y]`.
            BlockRepr::Primitive(items) => {
                let tag = items.first().and_then(Value::as_u64);
                let (opcode, field) = match tag {
                    Some(12) => ("data_variable", "VARIABLE"),
                    Some(13) => ("data_listcontents", "LIST"),
                    _ => return Err(de::Error::custom("unsupported top-level primitive block")),
                };
                let name = items.get(1).cloned().map(value_to_text).unwrap_or_default();
                let id = items.get(2).and_then(Value::as_str).map(ToOwned::to_owned);
                let mut fields = OrderedMap::new();
                fields.insert(field.to_owned(), RawField { value: name, id });
                Ok(RawBlock {
                    opcode: opcode.to_owned(),
                    next: None,
                    parent: None,
                    inputs: OrderedMap::new(),
                    fields,
                    shadow: false,
                    top_level: true,
                    mutation: None,
                })
            }
        }
    }
}

/// Kind tag of a literal primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiteralKind {
    Number,
    PositiveNumber,
    WholeNumber,
    Integer,
    Angle,
    Color,
    String,
}

impl LiteralKind {
    fn from_tag(tag: u64) -> Option<Self> {
        Some(match tag {
            4 => Self::Number,
            5 => Self::PositiveNumber,
            6 => Self::WholeNumber,
            7 => Self::Integer,
            8 => Self::Angle,
            9 => Self::Color,
            10 => Self::String,
            _ => return None,
        })
    }

    fn tag(self) -> u64 {
        match self {
            Self::Number => 4,
            Self::PositiveNumber => 5,
            Self::WholeNumber => 6,
            Self::Integer => 7,
            Self::Angle => 8,
            Self::Color => 9,
            Self::String => 10,
        }
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, Self::Color | Self::String)
    }
}

/// A constant typed into a block slot. The value is kept as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub kind: LiteralKind,
    pub value: String,
}

/// A decoded compact primitive from an input array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Literal(Literal),
    Broadcast { name: String, id: Option<String> },
    Variable { name: String, id: Option<String> },
    List { name: String, id: Option<String> },
}

impl Primitive {
    fn from_values(items: &[Value]) -> Result<Self, String> {
        let tag = items
            .first()
            .and_then(Value::as_u64)
            .ok_or_else(|| "primitive without numeric tag".to_owned())?;
        let text = items.get(1).cloned().map(value_to_text).unwrap_or_default();
        let id = items.get(2).and_then(Value::as_str).map(ToOwned::to_owned);
        Ok(match tag {
            11 => Primitive::Broadcast { name: text, id },
            12 => Primitive::Variable { name: text, id },
            13 => Primitive::List { name: text, id },
            t => match LiteralKind::from_tag(t) {
                Some(kind) => Primitive::Literal(Literal { kind, value: text }),
                None => return Err(format!("unknown primitive tag {t}")),
            },
        })
    }

    fn to_value(&self) -> Value {
        let named = |tag: u64, name: &String, id: &Option<String>| {
            Value::Array(alloc::vec![
                Value::from(tag),
                Value::String(name.clone()),
                id.clone().map(Value::String).unwrap_or(Value::Null),
            ])
        };
        match self {
            Primitive::Literal(lit) => Value::Array(alloc::vec![
                Value::from(lit.kind.tag()),
                Value::String(lit.value.clone())
            ]),
            Primitive::Broadcast { name, id } => named(11, name, id),
            Primitive::Variable { name, id } => named(12, name, id),
            Primitive::List { name, id } => named(13, name, id),
        }
    }
}

/// What an input slot holds: a reference to another block or a primitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputValue {
    Block(BlockId),
    Primitive(Primitive),
}

impl InputValue {
    pub fn block_id(&self) -> Option<&str> {
        match self {
            InputValue::Block(id) => Some(id),
            InputValue::Primitive(_) => None,
        }
    }

    fn from_value(value: Value) -> Result<Option<Self>, String> {
        match value {
            Value::Null => Ok(None),
            Value::String(id) => Ok(Some(InputValue::Block(id))),
            Value::Array(items) => Primitive::from_values(&items).map(|p| Some(InputValue::Primitive(p))),
            other => Err(format!("unexpected input value {other}")),
        }
    }

    fn to_value(&self) -> Value {
        match self {
            InputValue::Block(id) => Value::String(id.clone()),
            InputValue::Primitive(p) => p.to_value(),
        }
    }
}

/// How an input relates to its shadow, as encoded by the first array element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowKind {
    /// `[1, x]`: the slot holds only its shadow.
    SameBlockShadow,
    /// `[2, x]`: a block with no shadow behind it (boolean and stack slots).
    NoShadow,
    /// `[3, x, shadow]`: a block covering a shadow.
    ObscuredShadow,
}

/// One entry of a block's `inputs` map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInput {
    pub kind: ShadowKind,
    pub value: Option<InputValue>,
    pub shadow: Option<InputValue>,
}

impl<'de> Deserialize<'de> for RawInput {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<Value>::deserialize(deserializer)?;
        let mut it = items.into_iter();
        let kind = match it.next().as_ref().and_then(Value::as_u64) {
            Some(1) => ShadowKind::SameBlockShadow,
            Some(2) => ShadowKind::NoShadow,
            Some(3) => ShadowKind::ObscuredShadow,
            _ => return Err(de::Error::custom("input without valid shadow kind")),
        };
        let value = InputValue::from_value(it.next().unwrap_or(Value::Null)).map_err(de::Error::custom)?;
        let shadow = match kind {
            ShadowKind::SameBlockShadow => value.clone(),
            ShadowKind::NoShadow => None,
            ShadowKind::ObscuredShadow => {
                InputValue::from_value(it.next().unwrap_or(Value::Null)).map_err(de::Error::custom)?
            }
        };
        Ok(RawInput { kind, value, shadow })
    }
}

impl Serialize for RawInput {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let opt = |v: &Option<InputValue>| v.as_ref().map(InputValue::to_value).unwrap_or(Value::Null);
        let mut seq = serializer.serialize_seq(None)?;
        match self.kind {
            ShadowKind::SameBlockShadow => {
                seq.serialize_element(&1)?;
                seq.serialize_element(&opt(&self.value))?;
            }
            ShadowKind::NoShadow => {
                seq.serialize_element(&2)?;
                seq.serialize_element(&opt(&self.value))?;
            }
            ShadowKind::ObscuredShadow => {
                seq.serialize_element(&3)?;
                seq.serialize_element(&opt(&self.value))?;
                seq.serialize_element(&opt(&self.shadow))?;
            }
        }
        seq.end()
    }
}

/// One entry of a block's `fields` map: `[value, id]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawField {
    pub value: String,
    pub id: Option<String>,
}

impl<'de> Deserialize<'de> for RawField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<Value>::deserialize(deserializer)?;
        let mut it = items.into_iter();
        let value = value_to_text(it.next().unwrap_or(Value::Null));
        let id = match it.next() {
            Some(Value::String(s)) => Some(s),
            _ => None,
        };
        Ok(RawField { value, id })
    }
}

impl Serialize for RawField {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.value, &self.id).serialize(serializer)
    }
}

/// Extra data attached to custom block prototypes, calls and a few others.
///
/// The argument lists are stored in the file as JSON-encoded strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mutation {
    pub proccode: Option<String>,
    pub argument_ids: Option<Vec<String>>,
    pub argument_names: Option<Vec<String>>,
    pub argument_defaults: Option<Vec<Value>>,
    pub warp: Option<bool>,
    pub has_next: Option<bool>,
}

#[derive(Deserialize)]
struct MutationObject {
    #[serde(default)]
    proccode: Option<String>,
    #[serde(default)]
    argumentids: Option<Value>,
    #[serde(default)]
    argumentnames: Option<Value>,
    #[serde(default)]
    argumentdefaults: Option<Value>,
    #[serde(default)]
    warp: Option<Value>,
    #[serde(default)]
    hasnext: Option<Value>,
}

fn decode_json_list(raw: Option<Value>) -> Result<Option<Vec<Value>>, String> {
    match raw {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => Ok(Some(items)),
        Some(Value::String(s)) => serde_json::from_str::<Vec<Value>>(&s)
            .map(Some)
            .map_err(|e| format!("bad mutation argument list: {e}")),
        Some(other) => Err(format!("bad mutation argument list: {other}")),
    }
}

fn decode_flag(raw: Option<Value>) -> Option<bool> {
    match raw? {
        Value::Bool(b) => Some(b),
        Value::String(s) => Some(s == "true"),
        _ => None,
    }
}

impl<'de> Deserialize<'de> for Mutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MutationObject::deserialize(deserializer)?;
        let texts = |v: Option<Vec<Value>>| v.map(|items| items.into_iter().map(value_to_text).collect());
        Ok(Mutation {
            proccode: raw.proccode,
            argument_ids: texts(decode_json_list(raw.argumentids).map_err(de::Error::custom)?),
            argument_names: texts(decode_json_list(raw.argumentnames).map_err(de::Error::custom)?),
            argument_defaults: decode_json_list(raw.argumentdefaults).map_err(de::Error::custom)?,
            warp: decode_flag(raw.warp),
            has_next: decode_flag(raw.hasnext),
        })
    }
}

impl Serialize for Mutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let encode = |v: &Vec<String>| serde_json::to_string(v).unwrap_or_default();
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("tagName", "mutation")?;
        map.serialize_entry("children", &[] as &[Value])?;
        if let Some(p) = &self.proccode {
            map.serialize_entry("proccode", p)?;
        }
        if let Some(ids) = &self.argument_ids {
            map.serialize_entry("argumentids", &encode(ids))?;
        }
        if let Some(names) = &self.argument_names {
            map.serialize_entry("argumentnames", &encode(names))?;
        }
        if let Some(defaults) = &self.argument_defaults {
            map.serialize_entry("argumentdefaults", &serde_json::to_string(defaults).unwrap_or_default())?;
        }
        if let Some(w) = self.warp {
            map.serialize_entry("warp", if w { "true" } else { "false" })?;
        }
        if let Some(h) = self.has_next {
            map.serialize_entry("hasnext", if h { "true" } else { "false" })?;
        }
        map.end()
    }
}

/// Text form of a JSON scalar as Scratch would display it.
pub(crate) fn value_to_text(value: Value) -> String {
    match value {
        Value::String(s) => s,
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Parse and check a `project.json` document.
pub fn parse_project(bytes: &[u8]) -> Result<RawProject, LoadError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let project: RawProject = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => LoadError::NotScratch3(e.to_string()),
        _ => LoadError::MalformedJson(e.to_string()),
    })?;

    let semver = project.meta.semver.trim();
    if !(semver == "3" || semver.starts_with("3.")) {
        return Err(LoadError::NotScratch3(format!("unsupported format version `{semver}`")));
    }
    let stages = project.targets.iter().filter(|t| t.is_stage).count();
    if stages != 1 {
        return Err(LoadError::NotScratch3(format!("expected exactly one stage, found {stages}")));
    }
    for target in &project.targets {
        for (_, block) in target.blocks.iter() {
            if let Some(missing) = block.references().find(|id| !target.blocks.contains_key(id)) {
                return Err(LoadError::DanglingReference(missing.to_owned()));
            }
        }
    }
    Ok(project)
}

impl RawProject {
    pub fn stage(&self) -> &RawTarget {
        // parse_project guarantees exactly one stage
        self.targets.iter().find(|t| t.is_stage).unwrap_or(&self.targets[0])
    }

    pub fn target(&self, name: &str) -> Option<&RawTarget> {
        self.targets.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// Non-fatal structural issues reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    DuplicateTargetName { name: String },
    OrphanShadow { target: String, block: BlockId },
    DuplicateVariableName { target: String, name: String },
    TopLevelMismatch { target: String, block: BlockId },
    UnresolvedTargetReference { target: String, block: BlockId, name: String },
}

/// Menu fields that name another sprite, by menu opcode.
const TARGET_MENUS: &[(&str, &str)] = &[
    ("control_create_clone_of_menu", "CLONE_OPTION"),
    ("sensing_touchingobjectmenu", "TOUCHINGOBJECTMENU"),
    ("sensing_distancetomenu", "DISTANCETOMENU"),
    ("motion_goto_menu", "TO"),
    ("motion_glideto_menu", "TO"),
    ("motion_pointtowards_menu", "TOWARDS"),
];

pub fn validate(project: &RawProject) -> Vec<Warning> {
    let mut warnings = Vec::new();

    let mut seen = BTreeMap::new();
    for target in &project.targets {
        let count = seen.entry(target.name.as_str()).or_insert(0usize);
        *count += 1;
        if *count == 2 {
            warnings.push(Warning::DuplicateTargetName { name: target.name.clone() });
        }
    }

    let stage_vars: Vec<&str> = project.stage().variables.values().map(|v| v.name.as_str()).collect();
    for target in &project.targets {
        let mut names: Vec<&str> = target.variables.values().map(|v| v.name.as_str()).collect();
        if !target.is_stage {
            names.extend(stage_vars.iter().copied());
        }
        names.sort_unstable();
        let mut reported = Vec::new();
        for pair in names.windows(2) {
            if pair[0] == pair[1] && !reported.contains(&pair[0]) {
                reported.push(pair[0]);
                warnings.push(Warning::DuplicateVariableName {
                    target: target.name.clone(),
                    name: pair[0].to_owned(),
                });
            }
        }

        for (id, block) in target.blocks.iter() {
            if block.shadow && block.parent.is_none() {
                warnings.push(Warning::OrphanShadow { target: target.name.clone(), block: id.to_owned() });
            }
            if block.top_level != block.parent.is_none() {
                warnings.push(Warning::TopLevelMismatch { target: target.name.clone(), block: id.to_owned() });
            }
            for (menu, field) in TARGET_MENUS {
                if block.opcode != *menu {
                    continue;
                }
                if let Some(f) = block.field(field) {
                    let special = f.value.starts_with('_') && f.value.ends_with('_');
                    if !special && project.target(&f.value).is_none() {
                        warnings.push(Warning::UnresolvedTargetReference {
                            target: target.name.clone(),
                            block: id.to_owned(),
                            name: f.value.clone(),
                        });
                    }
                }
            }
        }
    }
    warnings
}
