use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use super::config::Format;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Output of one subcommand.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub body: Value,
    pub table: Table,
    pub status: Status,
    pub svg: Option<(PathBuf, String)>,
}

impl Report {
    pub fn new<T: Serialize>(command: &'static str, body: &T, table: Table, status: Status) -> Result<Self> {
        let body = serde_json::to_value(body).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Report { command, body, table, status, svg: None })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut obj = serde_json::Map::new();
                obj.insert("schema_version".into(), SCHEMA_VERSION.into());
                obj.insert("command".into(), self.command.into());
                match &self.body {
                    Value::Object(m) => obj.extend(m.clone()),
                    other => {
                        obj.insert("result".into(), other.clone());
                    }
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| Error::Parse(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Io(e.to_string());
                w.write_record(&self.table.headers).map_err(io)?;
                for row in &self.table.rows {
                    w.write_record(row).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv() {
        let table = Table { headers: vec!["a", "b"], rows: vec![vec!["1".into(), "x,y".into()]] };
        let r = Report::new("demo", &serde_json::json!({"z": 1, "a": [1, 2]}), table, Status::Inconclusive).unwrap();
        let j = r.render(Format::Json).unwrap();
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], "demo");
        assert_eq!(v["z"], 1);
        assert_eq!(r.render(Format::Csv).unwrap(), "a,b\n1,\"x,y\"\n");
        assert_eq!(r.status.exit_code(), 2);
    }
}
