//! The museum's open-access catalog CSV.

use std::io::{Read, Write};

use exhibit_core::corpus::{catalog_stats, ArtworkRecord, CatalogStats, Field};

use crate::{Error, Result};

pub const OBJECT_ID: &str = "Object ID";
pub const TITLE: &str = "Title";
pub const OBJECT_NAME: &str = "Object Name";
pub const IMAGE_URL: &str = "Primary Image";

/// Multi-value separator inside a cell.
pub const PIPE: char = '|';

#[derive(Debug, Clone, Default)]
pub struct CatalogLoad {
    pub records: Vec<ArtworkRecord>,
    /// Rows with an unparseable object id or the wrong number of cells.
    pub skipped_rows: usize,
}

impl CatalogLoad {
    pub fn stats(&self) -> CatalogStats {
        catalog_stats(&self.records)
    }
}

struct Columns {
    id: usize,
    fields: [usize; 6],
    title: Option<usize>,
    object_name: Option<usize>,
    image: Option<usize>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
        };
        let need = |name: &str| find(name).ok_or_else(|| Error::Config(format!("catalog is missing column {name:?}")));
        let mut fields = [0; 6];
        for f in Field::ALL {
            fields[f.index()] = need(f.header())?;
        }
        Ok(Columns {
            id: need(OBJECT_ID)?,
            fields,
            title: find(TITLE),
            object_name: find(OBJECT_NAME),
            image: find(IMAGE_URL),
        })
    }
}

fn single(cell: &str) -> Option<String> {
    let t = cell.trim();
    (!t.is_empty()).then(|| t.to_string())
}

fn multi(cell: &str) -> Vec<String> {
    cell.split(PIPE)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Reads a comma-separated catalog with a header row. Cells of the
/// multi-valued fields are split on `|`.
pub fn parse_artwork_catalog<R: Read>(source: R) -> Result<CatalogLoad> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let cols = Columns::locate(&headers)?;
    let mut out = CatalogLoad::default();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                out.skipped_rows += 1;
                continue;
            }
        }
        if record.len() != headers.len() {
            out.skipped_rows += 1;
            continue;
        }
        let Ok(object_id) = record[cols.id].trim().parse::<u64>() else {
            out.skipped_rows += 1;
            continue;
        };
        let cell = |f: Field| &record[cols.fields[f.index()]];
        let opt = |c: Option<usize>| c.and_then(|i| single(&record[i]));
        out.records.push(ArtworkRecord {
            object_id,
            department: single(cell(Field::Department)),
            artist_display_name: multi(cell(Field::ArtistDisplayName)),
            object_begin_date: single(cell(Field::ObjectBeginDate)),
            medium: single(cell(Field::Medium)),
            classification: multi(cell(Field::Classification)),
            tags: multi(cell(Field::Tags)),
            title: opt(cols.title),
            object_name: opt(cols.object_name),
            public_image_url: opt(cols.image),
        });
    }
    Ok(out)
}

pub fn write_catalog_csv<W: Write>(records: &[ArtworkRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![OBJECT_ID, OBJECT_NAME, TITLE];
    header.extend(Field::ALL.iter().map(|f| f.header()));
    header.push(IMAGE_URL);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.object_id.to_string(),
            r.object_name.clone().unwrap_or_default(),
            r.title.clone().unwrap_or_default(),
        ];
        for f in Field::ALL {
            row.push(r.field_values(f).join("|"));
        }
        row.push(r.public_image_url.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
