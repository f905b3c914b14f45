//! CSV and JSON-lines document files.
//!
//! Both formats share field names: `id`, `text`, `source`, `location`,
//! `timestamp`, an optional `clean_text`, and either the nine raw label
//! columns or the seven canonical ones with 0/1 values.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::{aggregate_labels, Category, Document, DocumentSet, LabelVector, RawCategory, RawLabelVector9, Source};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses from the file extension, defaulting to JSON lines.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

const BASE_FIELDS: [&str; 6] = ["id", "text", "source", "location", "timestamp", "clean_text"];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum LabelSchema {
    None,
    Raw,
    Canonical,
}

fn is_raw_only(name: &str) -> bool {
    matches!(name, "energy" | "business_industry" | "tourism_recreation")
}

fn label_schema<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<LabelSchema> {
    let mut labels = Vec::new();
    for n in names {
        if BASE_FIELDS.contains(&n) {
            continue;
        }
        let known = Category::ALL.iter().any(|c| c.name() == n) || RawCategory::ALL.iter().any(|c| c.name() == n);
        if !known {
            return Err(Error::UnknownLabelColumn(n.to_string()));
        }
        labels.push(n);
    }
    if labels.is_empty() {
        return Ok(LabelSchema::None);
    }
    let has_raw = labels.iter().any(|n| is_raw_only(n));
    let has_economy = labels.contains(&"economy");
    if has_raw && has_economy {
        return Err(Error::IncompleteLabels("mixes raw and canonical label columns".into()));
    }
    let (schema, expected): (_, Vec<&str>) = if has_raw {
        (LabelSchema::Raw, RawCategory::ALL.iter().map(|c| c.name()).collect())
    } else {
        (LabelSchema::Canonical, Category::ALL.iter().map(|c| c.name()).collect())
    };
    let missing: Vec<_> = expected.iter().filter(|e| !labels.contains(e)).copied().collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteLabels(format!("missing {}", missing.join(", "))));
    }
    Ok(schema)
}

fn parse_bit(row: usize, field: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::MalformedRow { row, message: format!("label {field} must be 0 or 1, found {other:?}") }),
    }
}

/// Assembles a document from (field, value) pairs.
fn build_document(row: usize, fields: &[(&str, String)], schema: LabelSchema) -> Result<Document> {
    let get = |name: &str| fields.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str());
    let non_empty = |name: &str| get(name).filter(|v| !v.is_empty()).map(str::to_string);
    let id = non_empty("id").ok_or_else(|| Error::MalformedRow { row, message: "missing id".into() })?;
    let text = get("text").ok_or_else(|| Error::MalformedRow { row, message: "missing text".into() })?;
    if text.trim().is_empty() {
        return Err(Error::MalformedRow { row, message: "empty text".into() });
    }
    let source = match get("source").filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map_err(|e: Error| Error::MalformedRow { row, message: e.to_string() })?,
        None => Source::default(),
    };
    let mut doc = Document::new(id, text, source);
    doc.location = non_empty("location");
    doc.timestamp = non_empty("timestamp");
    doc.clean_text = non_empty("clean_text");
    let bit = |name: &str| -> Result<bool> {
        let v = get(name).ok_or_else(|| Error::MalformedRow { row, message: format!("missing label {name}") })?;
        parse_bit(row, name, v)
    };
    match schema {
        LabelSchema::None => {}
        LabelSchema::Raw => {
            let mut raw = RawLabelVector9::default();
            for (i, rc) in RawCategory::ALL.iter().enumerate() {
                raw.0[i] = bit(rc.name())?;
            }
            doc.labels = Some(aggregate_labels(&raw));
            doc.raw_labels = Some(raw);
        }
        LabelSchema::Canonical => {
            let mut v = LabelVector::EMPTY;
            for c in Category::ALL {
                v[c] = bit(c.name())?;
            }
            doc.labels = Some(v);
        }
    }
    Ok(doc)
}

fn json_field(row: usize, key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => u8::from(*b).to_string(),
        Value::Number(n) => n.to_string(),
        _ => return Err(Error::MalformedRow { row, message: format!("field {key} has unsupported type") }),
    })
}

fn read_csv(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let schema = label_schema(names.iter().copied())?;
    let mut docs = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            Error::MalformedRow { row, message: e.to_string() }
        })?;
        let row = rec.position().map_or(docs.len() + 2, |p| p.line() as usize);
        let fields: Vec<(&str, String)> = names.iter().copied().zip(rec.iter().map(str::to_string)).collect();
        docs.push(build_document(row, &fields, schema)?);
    }
    Ok(docs)
}

fn read_jsonl(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow { row, message: e.to_string() })?;
        let Value::Object(obj) = value else {
            return Err(Error::MalformedRow { row, message: "expected a JSON object".into() });
        };
        let schema = label_schema(obj.keys().map(String::as_str))?;
        let fields = obj.iter().map(|(k, v)| Ok((k.as_str(), json_field(row, k, v)?))).collect::<Result<Vec<_>>>()?;
        docs.push(build_document(row, &fields, schema)?);
    }
    Ok(docs)
}

/// Reads a document file, validating the schema and id uniqueness.
pub fn load_documents(path: impl AsRef<Path>, format: Format) -> Result<DocumentSet> {
    let path = path.as_ref();
    let docs = match format {
        Format::Csv => read_csv(path)?,
        Format::Jsonl => read_jsonl(path)?,
    };
    DocumentSet::new(docs)
}

/// Writes documents with canonical label columns; label columns appear only
/// when every document is labeled.
pub fn write_documents<W: Write>(docs: &DocumentSet, out: W, format: Format) -> Result<()> {
    let labeled = !docs.is_empty() && docs.iter().all(|d| d.labels.is_some());
    let cleaned = docs.iter().any(|d| d.clean_text.is_some());
    let mut header: Vec<&str> = vec!["id", "text", "source", "location", "timestamp"];
    if cleaned {
        header.push("clean_text");
    }
    if labeled {
        header.extend(Category::ALL.iter().map(|c| c.name()));
    }
    let row = |d: &Document| -> Vec<(String, Value)> {
        let opt = |o: &Option<String>| o.clone().map_or(Value::Null, Value::String);
        let mut fields = vec![
            ("id".to_string(), Value::String(d.id.clone())),
            ("text".to_string(), Value::String(d.text.clone())),
            ("source".to_string(), Value::String(d.source.name().into())),
            ("location".to_string(), opt(&d.location)),
            ("timestamp".to_string(), opt(&d.timestamp)),
        ];
        if cleaned {
            fields.push(("clean_text".into(), opt(&d.clean_text)));
        }
        if let (true, Some(l)) = (labeled, d.labels) {
            for c in Category::ALL {
                fields.push((c.name().into(), Value::from(u8::from(l[c]))));
            }
        }
        fields
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for d in docs {
                let rec: Vec<String> = row(d)
                    .into_iter()
                    .map(|(_, v)| match v {
                        Value::Null => String::new(),
                        Value::String(s) => s,
                        other => other.to_string(),
                    })
                    .collect();
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| Error::io("<output>", e))?;
        }
        Format::Jsonl => {
            let mut out = out;
            for d in docs {
                let parts: Vec<String> =
                    row(d).into_iter().map(|(k, v)| format!("{}:{}", Value::String(k), v)).collect();
                writeln!(out, "{{{}}}", parts.join(",")).map_err(|e| Error::io("<output>", e))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_three_rows() {
        let f = file(
            "id,text,source,location,timestamp\n\
             t1,dry wells,tweet,CA,2018-01-01\n\
             t2,\"crops, failing\",tweet,,\n\
             t3,fire season,tweet,NV,\n",
            ".csv",
        );
        let set = load_documents(f.path(), Format::Csv).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.get("t2").unwrap().text, "crops, failing");
        assert_eq!(set.get("t2").unwrap().location, None);
        assert!(set.get("t1").unwrap().labels.is_none());
    }

    #[test]
    fn csv_duplicate_id() {
        let f = file("id,text,source,location,timestamp\nt1,a,tweet,,\nt1,b,tweet,,\n", ".csv");
        let err = load_documents(f.path(), Format::Csv).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "t1"), "{err}");
    }

    #[test]
    fn jsonl_missing_text_reports_line() {
        let f = file("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n", ".jsonl");
        let err = load_documents(f.path(), Format::Jsonl).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 2, .. }), "{err}");
    }

    #[test]
    fn raw_labels_are_aggregated() {
        let f = file(
            "id,text,source,location,timestamp,agriculture,energy,plants_wildlife,society_public_health,water_supply_quality,business_industry,fire,relief_response_restrictions,tourism_recreation\n\
             d1,power plant cuts output,dir,,,0,1,0,0,0,0,0,0,1\n",
            ".csv",
        );
        let set = load_documents(f.path(), Format::Csv).unwrap();
        let d = set.get("d1").unwrap();
        assert_eq!(d.labels, Some(LabelVector::from_categories([Category::Economy])));
        assert!(d.raw_labels.unwrap().get(RawCategory::TourismRecreation));
    }

    #[test]
    fn unknown_and_partial_label_columns() {
        let f = file("id,text,source,location,timestamp,floods\nt1,a,tweet,,,1\n", ".csv");
        assert!(matches!(load_documents(f.path(), Format::Csv), Err(Error::UnknownLabelColumn(c)) if c == "floods"));
        let f = file("id,text,source,location,timestamp,fire\nt1,a,tweet,,,1\n", ".csv");
        assert!(matches!(load_documents(f.path(), Format::Csv), Err(Error::IncompleteLabels(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_documents("/nonexistent/x.csv", Format::Csv), Err(Error::Io { .. })));
    }

    #[test]
    fn write_then_read_both_formats() {
        let mut d = Document::new("a", "wells \"dry\", again", Source::Dir);
        d.labels = Some(LabelVector::from_categories([Category::WaterSupplyQuality]));
        d.clean_text = Some("wells dry again".into());
        let set = DocumentSet::new(vec![d]).unwrap();
        for fmt in [Format::Csv, Format::Jsonl] {
            let mut buf = Vec::new();
            write_documents(&set, &mut buf, fmt).unwrap();
            let f = file(std::str::from_utf8(&buf).unwrap(), ".tmp");
            assert_eq!(load_documents(f.path(), fmt).unwrap(), set);
        }
    }
}
