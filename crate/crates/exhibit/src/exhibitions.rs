//! Exhibitions JSON: the raw corpus shape and the flattened target export.

use std::io::{Read, Write};

use exhibit_core::corpus::{flatten_sparse, ArtworkRecord, Catalog, ExhibitionRecord, Field};
use serde_json::{json, Map, Value};

use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct ExhibitionLoad {
    pub exhibitions: Vec<ExhibitionRecord>,
    /// Exhibitions none of whose object ids resolved.
    pub dropped_exhibitions: usize,
    /// Object ids absent from the catalog, over the kept and dropped
    /// exhibitions.
    pub unresolved_ids: usize,
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str, i: usize) -> Result<&'a str> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(Value::Null) | None if key == "overview_text" => Ok(""),
        _ => Err(Error::format(format!("exhibition {i}: {key:?} must be a string"))),
    }
}

/// Reads `{"exhibitions": [{"title", "overview_text", "object_ids"}]}` and
/// resolves the object ids (keys of the `object_ids` mapping, in document
/// order) against the catalog. Embedded metadata is ignored in favour of the
/// catalog row.
pub fn parse_exhibitions<R: Read>(source: R, catalog: &Catalog) -> Result<ExhibitionLoad> {
    let doc: Value = serde_json::from_reader(source)?;
    let list = doc
        .get("exhibitions")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::format("top level must hold an \"exhibitions\" array"))?;
    let mut out = ExhibitionLoad::default();
    for (i, ex) in list.iter().enumerate() {
        let obj = ex
            .as_object()
            .ok_or_else(|| Error::format(format!("exhibition {i} is not an object")))?;
        let title = str_field(obj, "title", i)?;
        let overview = str_field(obj, "overview_text", i)?;
        let keys: Vec<String> = match obj.get("object_ids") {
            Some(Value::Object(m)) => m.keys().cloned().collect(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect(),
            _ => return Err(Error::format(format!("exhibition {i}: \"object_ids\" missing"))),
        };
        let mut ids = Vec::with_capacity(keys.len());
        for k in keys {
            match k.trim().parse::<u64>() {
                Ok(id) => ids.push(id),
                Err(_) => out.unresolved_ids += 1,
            }
        }
        let (record, unresolved) = catalog.resolve_exhibition(title, overview, &ids);
        out.unresolved_ids += unresolved;
        match record {
            Some(r) => out.exhibitions.push(r),
            None => out.dropped_exhibitions += 1,
        }
    }
    Ok(out)
}

fn opt(v: &Option<String>) -> Value {
    v.as_ref().map_or(Value::Null, |s| Value::String(s.clone()))
}

fn artwork_json(a: &ArtworkRecord) -> Value {
    json!({
        "Department": opt(&a.department),
        "Object Name": opt(&a.object_name),
        "Title": opt(&a.title),
        "Artist Display Name": a.artist_display_name,
        "Object Begin Date": opt(&a.object_begin_date),
        "Medium": opt(&a.medium),
        "Classification": a.classification,
        "Tags": a.tags,
    })
}

/// The raw corpus shape, with each artwork's metadata embedded.
pub fn exhibitions_json(exhibitions: &[ExhibitionRecord]) -> Value {
    let list: Vec<Value> = exhibitions
        .iter()
        .map(|ex| {
            let mut ids = Map::new();
            for a in &ex.artworks {
                ids.insert(a.object_id.to_string(), artwork_json(a));
            }
            json!({
                "title": ex.title,
                "overview_text": ex.overview_text,
                "object_ids": ids,
            })
        })
        .collect();
    json!({ "exhibitions": list })
}

pub fn write_exhibitions<W: Write>(exhibitions: &[ExhibitionRecord], sink: W) -> Result<()> {
    serde_json::to_writer_pretty(sink, &exhibitions_json(exhibitions))?;
    Ok(())
}

/// `{"exhibitions": [{"x": prompt, "y": {tag: probability}, "z": [ids]}]}`
/// with tags in field order, then first appearance.
pub fn flattened_json(exhibitions: &[ExhibitionRecord]) -> Value {
    let list: Vec<Value> = exhibitions
        .iter()
        .map(|ex| {
            let mut y = Map::new();
            for (tag, p) in flatten_sparse(ex) {
                y.insert(tag, json!(p));
            }
            let z: Vec<String> = ex.object_ids().iter().map(u64::to_string).collect();
            json!({ "x": ex.prompt_text, "y": y, "z": z })
        })
        .collect();
    json!({ "exhibitions": list })
}

/// The flattened value lists of one exhibition, one entry per artwork and
/// `None` for a missing value.
pub fn flat_value_lists(ex: &ExhibitionRecord) -> Value {
    let mut m = Map::new();
    for f in Field::ALL {
        let vals: Vec<Value> = ex
            .artworks
            .iter()
            .map(|a| match a.field_values(f) {
                [] => Value::String("None".into()),
                vs => Value::String(vs.join("|")),
            })
            .collect();
        m.insert(f.header().into(), Value::Array(vals));
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use exhibit_core::sample;

    fn catalog() -> Catalog {
        Catalog::new(sample::spanish_renaissance_artworks()).unwrap()
    }

    #[test]
    fn round_trip_through_raw_shape() {
        let ex = sample::spanish_renaissance_exhibition();
        let mut buf = Vec::new();
        write_exhibitions(std::slice::from_ref(&ex), &mut buf).unwrap();
        let load = parse_exhibitions(buf.as_slice(), &catalog()).unwrap();
        assert_eq!(load.exhibitions, vec![ex]);
        assert_eq!(load.exhibitions[0].artworks.len(), 11);
        assert_eq!(load.exhibitions[0].object_ids(), sample::OBJECT_IDS);
    }

    #[test]
    fn unresolved_ids_are_counted_and_empty_exhibitions_dropped() {
        let doc = r#"{"exhibitions": [
            {"title": "a", "overview_text": "b", "object_ids": {"187702": {}, "1": {}, "x": {}}},
            {"title": "c", "overview_text": "d", "object_ids": {"2": {}}}
        ]}"#;
        let load = parse_exhibitions(doc.as_bytes(), &catalog()).unwrap();
        assert_eq!(load.exhibitions.len(), 1);
        assert_eq!(load.exhibitions[0].artworks.len(), 1);
        assert_eq!(load.dropped_exhibitions, 1);
        assert_eq!(load.unresolved_ids, 3);
    }

    #[test]
    fn structural_errors() {
        assert!(parse_exhibitions(&b"{}"[..], &catalog()).is_err());
        assert!(parse_exhibitions(&b"[1]"[..], &catalog()).is_err());
        assert!(parse_exhibitions(&br#"{"exhibitions": [{"title": 3}]}"#[..], &catalog()).is_err());
        let empty = parse_exhibitions(&br#"{"exhibitions": []}"#[..], &catalog()).unwrap();
        assert!(empty.exhibitions.is_empty());
    }

    #[test]
    fn flattened_export_keys() {
        let v = flattened_json(&[sample::spanish_renaissance_exhibition()]);
        let ex = &v["exhibitions"][0];
        assert!(ex["x"].as_str().unwrap().starts_with("Title of exhibition is: "));
        let p = ex["y"]["European Sculpture and Decorative Arts"].as_f64().unwrap();
        assert_eq!(format!("{p:.8}"), "0.90909091");
        assert_eq!(ex["z"][0], "187702");
        let first_key = ex["y"].as_object().unwrap().keys().next().unwrap();
        assert_eq!(first_key, "European Sculpture and Decorative Arts");
        let lists = flat_value_lists(&sample::spanish_renaissance_exhibition());
        assert_eq!(lists["Department"].as_array().unwrap().len(), 11);
        assert_eq!(lists["Artist Display Name"][0], "None");
    }
}
