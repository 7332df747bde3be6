//! Reports: JSON (default) or CSV residual tables.

use ellchain::verify::{Bound, Check};
use ellchain::C64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Serialize)]
pub struct Entry<'a> {
    pub name: &'a str,
    pub value: f64,
    pub tolerance: f64,
    pub bound: &'static str,
    pub pass: bool,
    pub blocking: bool,
    #[serde(rename = "ref")]
    pub reference: &'static str,
}

impl<'a> From<&'a Check> for Entry<'a> {
    fn from(c: &'a Check) -> Self {
        let bound = match c.bound {
            Bound::Below => "below",
            Bound::Above => "above",
            Bound::Exact => "exact",
        };
        Entry {
            name: &c.name,
            value: c.value,
            tolerance: c.tolerance,
            bound,
            pass: c.pass(),
            blocking: c.blocking,
            reference: c.reference,
        }
    }
}

pub fn cx(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cx_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| cx(z)).collect())
}

/// A report under construction: command, echoed parameters, checks and extra sections.
pub struct Report {
    pub command: String,
    pub params: Value,
    pub checks: Vec<Check>,
    pub extra: Map<String, Value>,
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, params: Value) -> Self {
        Self {
            command: command.into(),
            params,
            checks: Vec::new(),
            extra: Map::new(),
            error: None,
        }
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && ellchain::verify::all_pass(&self.checks)
    }

    /// Replace the tolerance of every blocking `below` check.
    pub fn override_tolerance(&mut self, tol: Option<f64>) {
        let Some(tol) = tol else { return };
        for c in self
            .checks
            .iter_mut()
            .filter(|c| c.bound == Bound::Below && c.blocking)
        {
            c.tolerance = tol;
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("params".into(), self.params.clone());
        m.insert("pass".into(), json!(self.pass()));
        if let Some(e) = &self.error {
            m.insert("error".into(), json!(e));
        }
        let entries: Vec<Entry> = self.checks.iter().map(Entry::from).collect();
        m.insert(
            "checks".into(),
            serde_json::to_value(entries).expect("entries serialise"),
        );
        m.extend(self.extra.clone());
        Value::Object(m)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,tolerance,bound,pass,blocking,ref\n");
        for c in &self.checks {
            let e = Entry::from(c);
            s.push_str(&format!(
                "\"{}\",{:e},{:e},{},{},{},{}\n",
                e.name.replace('"', "\"\""),
                e.value,
                e.tolerance,
                e.bound,
                e.pass,
                e.blocking,
                e.reference
            ));
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            _ => serde_json::to_string_pretty(&self.to_json()).expect("report serialises") + "\n",
        }
    }
}
