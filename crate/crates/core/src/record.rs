//! Per-run outcome records and their JSON-lines form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use smallvec::SmallVec;
use thiserror::Error;

use crate::scenario::{Context, Event, MenuOption, Scenario};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("malformed event key `{0}` (expected `party:measurement`)")]
    Key(String),
    #[error("record line is not a JSON object: {0}")]
    Json(String),
    #[error("value for `{0}` must be 1, -1, null or an array of those")]
    Value(String),
    #[error("record has key `{0}` which is not in the layout")]
    UnexpectedKey(String),
    #[error("record lacks key `{0}`")]
    MissingKey(String),
}

/// Value of one measurement event as seen by one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
    /// The event did not occur for this party.
    Null,
}

impl Outcome {
    pub fn from_sign(v: i8) -> Self {
        if v >= 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn sign(self) -> Option<i8> {
        match self {
            Outcome::Plus => Some(1),
            Outcome::Minus => Some(-1),
            Outcome::Null => None,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Outcome::Plus => Value::from(1),
            Outcome::Minus => Value::from(-1),
            Outcome::Null => Value::Null,
        }
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Null => Some(Outcome::Null),
            Value::Number(n) => match n.as_i64() {
                Some(1) => Some(Outcome::Plus),
                Some(-1) => Some(Outcome::Minus),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
            Outcome::Null => "null",
        })
    }
}

/// `(party, measurement)`; written as `party:measurement`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventKey {
    pub party: String,
    pub measurement: String,
}

impl EventKey {
    pub fn new(party: &str, measurement: &str) -> Self {
        Self {
            party: party.into(),
            measurement: measurement.into(),
        }
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.party, self.measurement)
    }
}

impl FromStr for EventKey {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (party, measurement) = s.split_once(':').ok_or_else(|| RecordError::Key(s.into()))?;
        let ok = |t: &str| !t.is_empty() && !t.contains(':') && !t.chars().any(char::is_whitespace);
        if !ok(party) || !ok(measurement) {
            return Err(RecordError::Key(s.into()));
        }
        Ok(Self::new(party, measurement))
    }
}

/// One slot of a record layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub key: EventKey,
    pub event: Event,
    pub wing: usize,
}

/// Ordered event keys of a context: each friend's own result, then each
/// superobserver's result (the heard value when asking).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLayout {
    entries: Vec<LayoutEntry>,
}

impl RecordLayout {
    pub fn for_context(s: &Scenario, context: &Context) -> Self {
        let mut entries = Vec::new();
        for (w, wing) in s.wings().iter().enumerate() {
            entries.push(LayoutEntry {
                key: EventKey::new(&wing.friend, &wing.friend_var),
                event: Event::FriendMeasurement(w),
                wing: w,
            });
        }
        for (w, (wing, &option)) in s.wings().iter().zip(&context.options).enumerate() {
            entries.push(LayoutEntry {
                key: EventKey::new(&wing.superobserver, wing.observed_var(option)),
                event: Event::SuperMeasurement(w),
                wing: w,
            });
        }
        Self { entries }
    }

    pub fn from_entries(entries: Vec<LayoutEntry>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[LayoutEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, key: &EventKey) -> Option<usize> {
        self.entries.iter().position(|e| &e.key == key)
    }

    pub fn friend_slot(&self, wing: usize) -> usize {
        wing
    }

    pub fn super_slot(&self, wing: usize) -> usize {
        self.entries
            .iter()
            .position(|e| e.event == Event::SuperMeasurement(wing))
            .expect("every wing has a superobserver slot")
    }
}

/// Values of one run, indexed by layout slot. A well-formed record holds
/// exactly one value per slot; the representation admits more so that
/// checkers can detect violations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeRecord {
    values: Vec<SmallVec<[Outcome; 1]>>,
}

impl OutcomeRecord {
    pub fn from_outcomes(values: impl IntoIterator<Item = Outcome>) -> Self {
        Self {
            values: values.into_iter().map(|o| smallvec::smallvec![o]).collect(),
        }
    }

    pub fn from_multi(values: Vec<SmallVec<[Outcome; 1]>>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The single value in `slot`, if it holds exactly one.
    pub fn get(&self, slot: usize) -> Option<Outcome> {
        match self.values.get(slot).map(SmallVec::as_slice) {
            Some([o]) => Some(*o),
            _ => None,
        }
    }

    pub fn values(&self, slot: usize) -> &[Outcome] {
        self.values.get(slot).map_or(&[], SmallVec::as_slice)
    }

    pub fn push_extra(&mut self, slot: usize, o: Outcome) {
        self.values[slot].push(o);
    }

    pub fn set(&mut self, slot: usize, o: Outcome) {
        self.values[slot] = smallvec::smallvec![o];
    }

    /// Signs of the listed slots; `None` if any is Null or multi-valued.
    pub fn signs(&self, slots: &[usize]) -> Option<Vec<i8>> {
        slots.iter().map(|&s| self.get(s).and_then(Outcome::sign)).collect()
    }

    /// One JSON object, keys in layout order.
    pub fn to_json_line(&self, layout: &RecordLayout) -> String {
        let mut out = String::from("{");
        for (i, (entry, vals)) in layout.entries.iter().zip(&self.values).enumerate() {
            if i > 0 {
                out.push(',');
            }
            let key = Value::String(entry.key.to_string());
            let value = match vals.as_slice() {
                [o] => o.to_json(),
                many => Value::Array(many.iter().map(|o| o.to_json()).collect()),
            };
            out.push_str(&format!("{key}:{value}"));
        }
        out.push('}');
        out
    }

    /// Parses a line produced by [`Self::to_json_line`] for `layout`. Key
    /// order is free; every layout key must appear exactly once.
    pub fn from_json_line(line: &str, layout: &RecordLayout) -> Result<Self, RecordError> {
        let parsed = parse_record_line(line)?;
        let mut values: Vec<Option<SmallVec<[Outcome; 1]>>> = vec![None; layout.len()];
        for (key, vals) in parsed {
            let slot = layout
                .index_of(&key)
                .ok_or_else(|| RecordError::UnexpectedKey(key.to_string()))?;
            values[slot] = Some(vals);
        }
        let values = values
            .into_iter()
            .zip(&layout.entries)
            .map(|(v, e)| v.ok_or_else(|| RecordError::MissingKey(e.key.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self { values })
    }
}

/// One `key: values` entry of a parsed record line.
pub type RecordEntry = (EventKey, SmallVec<[Outcome; 1]>);

/// Parses one JSON-lines record into `(key, values)` pairs without a layout.
pub fn parse_record_line(line: &str) -> Result<Vec<RecordEntry>, RecordError> {
    let obj: serde_json::Map<String, Value> =
        serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
    obj.iter()
        .map(|(k, v)| {
            let key: EventKey = k.parse()?;
            let bad = || RecordError::Value(k.clone());
            let vals: SmallVec<[Outcome; 1]> = match v {
                Value::Array(items) => {
                    if items.is_empty() {
                        return Err(bad());
                    }
                    items
                        .iter()
                        .map(|x| Outcome::from_json(x).ok_or_else(bad))
                        .collect::<Result<_, _>>()?
                }
                other => smallvec::smallvec![Outcome::from_json(other).ok_or_else(bad)?],
            };
            Ok((key, vals))
        })
        .collect()
}

/// Records of one model in one context.
#[derive(Debug, Clone, PartialEq)]
pub struct RunBatch {
    pub model: String,
    pub scenario: String,
    pub context: Context,
    pub seed: u64,
    pub layout: RecordLayout,
    pub records: Vec<OutcomeRecord>,
}

impl RunBatch {
    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line(&self.layout));
            out.push('\n');
        }
        out
    }

    /// Relative frequency of each `±1` tuple over `slots`, skipping records
    /// where any slot is Null. Returns the table and the number of records used.
    pub fn frequencies(&self, slots: &[usize]) -> (Vec<f64>, usize) {
        let mut counts = vec![0usize; 1 << slots.len()];
        let mut used = 0;
        for r in &self.records {
            if let Some(signs) = r.signs(slots) {
                counts[crate::distribution::cell_index(&signs)] += 1;
                used += 1;
            }
        }
        let freq = counts
            .iter()
            .map(|&c| if used == 0 { 0.0 } else { c as f64 / used as f64 })
            .collect();
        (freq, used)
    }

    /// Whether the context asks in `wing`.
    pub fn asks(&self, wing: usize) -> bool {
        matches!(self.context.options.get(wing), Some(MenuOption::Ask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout() -> RecordLayout {
        RecordLayout::from_entries(vec![
            LayoutEntry {
                key: EventKey::new("Chidi", "C"),
                event: Event::FriendMeasurement(0),
                wing: 0,
            },
            LayoutEntry {
                key: EventKey::new("Alice", "A"),
                event: Event::SuperMeasurement(0),
                wing: 0,
            },
        ])
    }

    #[test]
    fn json_line_shape() {
        let r = OutcomeRecord::from_outcomes([Outcome::Null, Outcome::Minus]);
        assert_eq!(r.to_json_line(&layout()), r#"{"Chidi:C":null,"Alice:A":-1}"#);
    }

    #[test]
    fn multi_valued_slots_serialize_as_arrays() {
        let mut r = OutcomeRecord::from_outcomes([Outcome::Plus, Outcome::Plus]);
        r.push_extra(0, Outcome::Minus);
        let line = r.to_json_line(&layout());
        assert_eq!(line, r#"{"Chidi:C":[1,-1],"Alice:A":1}"#);
        assert_eq!(OutcomeRecord::from_json_line(&line, &layout()).unwrap(), r);
        assert_eq!(r.get(0), None);
    }

    #[test]
    fn parse_errors() {
        let l = layout();
        assert!(matches!(
            OutcomeRecord::from_json_line(r#"{"Chidi:C":1}"#, &l),
            Err(RecordError::MissingKey(_))
        ));
        assert!(matches!(
            OutcomeRecord::from_json_line(r#"{"Chidi:C":2,"Alice:A":1}"#, &l),
            Err(RecordError::Value(_))
        ));
        assert!(matches!(
            OutcomeRecord::from_json_line(r#"{"Chidi":1}"#, &l),
            Err(RecordError::Key(_))
        ));
        assert!(matches!(
            OutcomeRecord::from_json_line("[1]", &l),
            Err(RecordError::Json(_))
        ));
        assert!(matches!(
            OutcomeRecord::from_json_line(r#"{"Chidi:C":[],"Alice:A":1}"#, &l),
            Err(RecordError::Value(_))
        ));
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![Just(Outcome::Plus), Just(Outcome::Minus), Just(Outcome::Null)]
    }

    proptest! {
        #[test]
        fn json_round_trip(a in outcome(), b in outcome()) {
            let r = OutcomeRecord::from_outcomes([a, b]);
            let line = r.to_json_line(&layout());
            prop_assert_eq!(OutcomeRecord::from_json_line(&line, &layout()).unwrap(), r);
        }
    }
}
