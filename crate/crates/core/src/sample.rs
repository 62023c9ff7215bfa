//! The "Sculpture and Decorative Arts of the Spanish Renaissance" exhibition
//! (The Met, 2000) as reference data: its eleven artworks with the metadata
//! of the published exhibition excerpt. Tags are only known for the first two
//! objects; the rest carry none.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{ArtworkRecord, ExhibitionRecord};

pub const TITLE: &str = "Sculpture and Decorative Arts of the Spanish Renaissance";

pub const OVERVIEW: &str = "The Metropolitan Museum of Art's small but excellent collection of Spanish polychrome sculpture, including sacred reliefs and freestanding carved figures once housed in the churches of Spain, is displayed in the gallery adjacent to the newly reopened Velez Blanco Patio. The selection, which displays the unique blending of early western European and Islamic stylistic and technical influences, emphasizes the diversity in the material culture of Renaissance Spain after the Catholic reconquest by Ferdinand and Isabella.";

pub const OBJECT_IDS: [u64; 11] = [
    187702, 187863, 196434, 197089, 199674, 210828, 210826, 201910, 202718, 205084, 197090,
];

const ESDA: &str = "European Sculpture and Decorative Arts";

type Row = (&'static str, &'static str, &'static str, &'static str, &'static str);

// department, artist, begin date, medium, classification ("" = missing)
const ROWS: [Row; 11] = [
    (ESDA, "", "1600", "Tin-glazed earthenware", "Ceramics-Faience"),
    (ESDA, "", "1500", "Tin-glazed and luster-painted earthenware", "Ceramics-Pottery"),
    (ESDA, "", "1585", "Tin-glazed and luster-painted earthenware", "Ceramics-Pottery"),
    ("The American Wing", "", "1630", "Silver gilt, enamel", ""),
    (ESDA, "Diego de Pesquera", "1567", "Wood, painted and gilt", "Sculpture"),
    (ESDA, "", "1585", "Wool, silk, metal thread on canvas", "Textiles-Embroidered"),
    (ESDA, "", "1585", "Wool, silk, metal thread on canvas", "Textiles-Embroidered"),
    (ESDA, "", "1600", "Tin-glazed and luster-painted earthenware", "Ceramics-Pottery"),
    (ESDA, "Juan Martinez Montanes", "1615", "Polychromed wood with gilding", "Sculpture"),
    (ESDA, "Juan de Ancheta", "1575", "Wood, polychromed and gilded", "Sculpture"),
    (ESDA, "Diego de Atienza", "1646", "Silver gilt with enamel, cast, chased, and engraved", "Metalwork-Silver"),
];

fn opt(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

fn list(s: &str) -> Vec<String> {
    opt(s).into_iter().collect()
}

pub fn spanish_renaissance_artworks() -> Vec<ArtworkRecord> {
    OBJECT_IDS
        .iter()
        .zip(ROWS)
        .enumerate()
        .map(|(i, (&id, (dept, artist, date, medium, class)))| {
            let (object_name, title, tags): (&str, &str, &[&str]) = match i {
                0 => ("Jug", "Jug", &["Cranes", "Donkeys", "Trees"]),
                1 => ("Bottle", "Bottle (Refredador)", &["Coat of Arms"]),
                _ => ("", "", &[]),
            };
            ArtworkRecord {
                object_id: id,
                department: opt(dept),
                artist_display_name: list(artist),
                object_begin_date: opt(date),
                medium: opt(medium),
                classification: list(class),
                tags: tags.iter().map(|t| t.to_string()).collect(),
                title: opt(title),
                object_name: opt(object_name),
                public_image_url: None,
            }
        })
        .collect()
}

pub fn spanish_renaissance_exhibition() -> ExhibitionRecord {
    ExhibitionRecord::new(TITLE.into(), OVERVIEW.into(), spanish_renaissance_artworks())
}

/// The assistant message of the published fine-tuning example, verbatim
/// (including the outer double quotes).
pub const ASSISTANT_CONTENT: &str = "\"{'Department': ['European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'The American Wing', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts', 'European Sculpture and Decorative Arts'], 'Artist Display Name': ['None', 'None', 'None', 'None', 'Diego de Pesquera', 'None', 'None', 'None', 'Juan Martinez Montanes', 'Juan de Ancheta', 'Diego de Atienza'], 'Object Begin Date': ['1600', '1500', '1585', '1630', '1567', '1585', '1585', '1600', '1615', '1575', '1646'], 'Medium': ['Tin-glazed earthenware', 'Tin-glazed and luster-painted earthenware', 'Tin-glazed and luster-painted earthenware', 'Silver gilt, enamel', 'Wood, painted and gilt', 'Wool, silk, metal thread on canvas', 'Wool, silk, metal thread on canvas', 'Tin-glazed and luster-painted earthenware', 'Polychromed wood with gilding', 'Wood, polychromed and gilded', 'Silver gilt with enamel, cast, chased, and engraved'], 'Classification': ['Ceramics-Faience', 'Ceramics-Pottery', 'Ceramics-Pottery', 'None', 'Sculpture', 'Textiles-Embroidered', 'Textiles-Embroidered', 'Ceramics-Pottery', 'Sculpture', 'Sculpture', 'Metalwork-Silver']}\"";
