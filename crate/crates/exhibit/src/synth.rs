//! Seeded synthetic museum: a catalog with themed clusters of artworks and
//! exhibitions whose prompts mention their theme.
//!
//! Each theme owns a pool of artworks carrying the theme's artists, date
//! range, media, classifications and tags. Exhibitions of a theme draw most
//! of their artworks from its pool, plus a few unrelated catalog rows, and
//! their title and overview mix theme keywords with generic gallery prose.

use exhibit_core::corpus::{ArtworkRecord, ExhibitionRecord};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Theme {
    department: &'static str,
    keywords: [&'static str; 6],
    media: [&'static str; 3],
    classes: [&'static str; 2],
    tags: [&'static str; 6],
    object: &'static str,
}

const THEMES: [Theme; 15] = [
    Theme {
        department: "Arms and Armor",
        keywords: ["samurai", "armor", "katana", "helmet", "warrior", "shogun"],
        media: ["Iron, lacquer, silk", "Steel, gold", "Iron, leather, silk cord"],
        classes: ["Armor for Man", "Swords"],
        tags: ["Warriors", "Dragons", "Cranes", "Battles", "Crests", "Lions"],
        object: "Armor",
    },
    Theme {
        department: "European Paintings",
        keywords: ["impressionist", "landscape", "light", "river", "seine", "plein"],
        media: ["Oil on canvas", "Oil on wood", "Pastel on paper"],
        classes: ["Paintings", "Pastels"],
        tags: ["Rivers", "Boats", "Bridges", "Sunsets", "Poplars", "Harbors"],
        object: "Painting",
    },
    Theme {
        department: "Egyptian Art",
        keywords: ["pharaoh", "tomb", "nile", "scarab", "dynasty", "hieroglyph"],
        media: ["Faience", "Limestone, paint", "Gold, carnelian"],
        classes: ["Amulets", "Reliefs"],
        tags: ["Scarabs", "Hieroglyphs", "Falcons", "Ankh", "Lotuses", "Jackals"],
        object: "Amulet",
    },
    Theme {
        department: "Greek and Roman Art",
        keywords: ["amphora", "athens", "olympian", "marble", "hero", "symposium"],
        media: ["Terracotta", "Marble", "Bronze"],
        classes: ["Vases", "Stone Sculpture"],
        tags: ["Athletes", "Heracles", "Satyrs", "Chariots", "Owls", "Amazons"],
        object: "Amphora",
    },
    Theme {
        department: "Asian Art",
        keywords: ["porcelain", "ming", "celadon", "kiln", "dragon", "jingdezhen"],
        media: ["Porcelain painted in underglaze blue", "Stoneware with celadon glaze", "Porcelain with overglaze enamels"],
        classes: ["Ceramics", "Ceramics-Porcelain"],
        tags: ["Phoenixes", "Peonies", "Clouds", "Waves", "Bats", "Chrysanthemums"],
        object: "Vase",
    },
    Theme {
        department: "The American Wing",
        keywords: ["colonial", "mahogany", "cabinetmaker", "federal", "philadelphia", "parlor"],
        media: ["Mahogany, white pine", "Walnut, tulip poplar", "Maple, oak"],
        classes: ["Furniture", "Woodwork"],
        tags: ["Eagles", "Shells", "Urns", "Acanthus", "Stars", "Scrolls"],
        object: "Chest",
    },
    Theme {
        department: "Photographs",
        keywords: ["daguerreotype", "camera", "portrait", "studio", "negative", "albumen"],
        media: ["Daguerreotype", "Albumen silver print from glass negative", "Salted paper print"],
        classes: ["Photographs", "Daguerreotypes"],
        tags: ["Portraits", "Children", "Streets", "Soldiers", "Ruins", "Families"],
        object: "Photograph",
    },
    Theme {
        department: "Islamic Art",
        keywords: ["mosque", "calligraphy", "safavid", "carpet", "minaret", "persian"],
        media: ["Wool pile on cotton foundation", "Ink, opaque watercolor and gold on paper", "Stonepaste, glazed"],
        classes: ["Textiles-Rugs", "Codices"],
        tags: ["Arabesques", "Calligraphy", "Gardens", "Peacocks", "Medallions", "Vines"],
        object: "Carpet",
    },
    Theme {
        department: "Costume Institute",
        keywords: ["couture", "gown", "fashion", "silhouette", "corset", "runway"],
        media: ["Silk satin", "Silk taffeta, lace", "Wool, silk, metal"],
        classes: ["Dresses", "Evening wear"],
        tags: ["Flowers", "Bows", "Ruffles", "Feathers", "Pearls", "Embroidery"],
        object: "Evening dress",
    },
    Theme {
        department: "Musical Instruments",
        keywords: ["violin", "harpsichord", "luthier", "concerto", "organ", "strings"],
        media: ["Spruce, maple, ebony", "Wood, ivory, brass", "Brass"],
        classes: ["Chordophone-Lute-bowed-unfretted", "Idiophone"],
        tags: ["Musicians", "Angels", "Scrolls of music", "Masks", "Garlands", "Cherubs"],
        object: "Violin",
    },
    Theme {
        department: "Medieval Art",
        keywords: ["reliquary", "gothic", "abbey", "pilgrim", "enamel", "saints"],
        media: ["Copper, champleve enamel", "Limestone", "Pot-metal glass"],
        classes: ["Enamels-Champleve", "Glass-Stained"],
        tags: ["Saints", "Christ", "Apostles", "Crosses", "Virgin Mary", "Knights"],
        object: "Reliquary",
    },
    Theme {
        department: "Drawings and Prints",
        keywords: ["etching", "engraver", "woodcut", "printmaker", "plate", "rembrandt"],
        media: ["Etching", "Engraving", "Woodcut"],
        classes: ["Prints", "Drawings"],
        tags: ["Beggars", "Windmills", "Shepherds", "Allegories", "Skeletons", "Horses"],
        object: "Print",
    },
    Theme {
        department: "Arts of Africa, Oceania, and the Americas",
        keywords: ["mask", "ancestor", "ritual", "benin", "yoruba", "oba"],
        media: ["Brass", "Wood, pigment", "Ivory"],
        classes: ["Metal-Sculpture", "Wood-Sculpture"],
        tags: ["Kings", "Leopards", "Mudfish", "Masks", "Ancestors", "Drums"],
        object: "Plaque",
    },
    Theme {
        department: "Modern and Contemporary Art",
        keywords: ["abstract", "cubism", "avant", "collage", "manifesto", "geometry"],
        media: ["Oil and sand on canvas", "Collage on paperboard", "Acrylic on canvas"],
        classes: ["Paintings", "Collages"],
        tags: ["Abstraction", "Guitars", "Still Life", "Cityscapes", "Circles", "Newspapers"],
        object: "Painting",
    },
    Theme {
        department: "Ancient Near Eastern Art",
        keywords: ["assyrian", "cuneiform", "nimrud", "babylon", "palace", "sumerian"],
        media: ["Gypsum alabaster", "Clay", "Ivory, gold leaf"],
        classes: ["Stone-Reliefs", "Clay-Tablets-Inscribed"],
        tags: ["Genies", "Bulls", "Palms", "Lions", "Kings", "Inscriptions"],
        object: "Relief",
    },
];

const GIVEN: [&str; 20] = [
    "Anna", "Carlo", "Diego", "Elise", "Felix", "Grace", "Hugo", "Ines", "Jonas", "Kei", "Lucia", "Marek", "Nadia", "Omar", "Paula", "Quentin", "Rosa",
    "Sven", "Teresa", "Viktor",
];
const FAMILY: [&str; 20] = [
    "Abrams", "Bellini", "Castell", "Dorn", "Esposito", "Fujita", "Garnier", "Holm", "Ito", "Jansen", "Kovacs", "Lindqvist", "Moreau", "Novak", "Okafor",
    "Petrov", "Quiroga", "Rossi", "Sato", "Tanaka",
];

const GENERIC_MEDIA: [&str; 12] = [
    "Watercolor on paper", "Graphite on paper", "Silver", "Pewter", "Glass", "Linen", "Brass, iron", "Ink on paper", "Earthenware", "Bone", "Cotton",
    "Gilt bronze",
];
const GENERIC_CLASSES: [&str; 8] = ["Metalwork", "Textiles", "Glass", "Ceramics-Pottery", "Books", "Jewelry", "Ephemera", "Tools"];
const GENERIC_TAGS: [&str; 16] = [
    "Men", "Women", "Dogs", "Trees", "Houses", "Ships", "Birds", "Fruit", "Mountains", "Fans", "Coats of Arms", "Letters", "Cats", "Insects",
    "Coins", "Landscapes",
];
const FILLER: [&str; 24] = [
    "the", "exhibition", "presents", "works", "from", "collection", "museum", "galleries", "including", "rare", "objects", "which", "reveal", "history",
    "of", "and", "in", "celebrated", "examples", "visitors", "will", "discover", "remarkable", "selection",
];
const OPENERS: [&str; 6] = ["Masterpieces of", "Treasures of", "The Art of", "Splendors of", "Visions of", "Echoes of"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub artworks: usize,
    pub themes: usize,
    pub exhibitions_per_theme: usize,
    pub pool_size: usize,
    pub min_artworks: usize,
    pub max_artworks: usize,
    /// Off-theme catalog rows of the same department added to each
    /// exhibition, at most.
    pub noise_artworks: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            artworks: 10_000,
            themes: 15,
            exhibitions_per_theme: 4,
            pool_size: 40,
            min_artworks: 16,
            max_artworks: 24,
            noise_artworks: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub catalog: Vec<ArtworkRecord>,
    pub exhibitions: Vec<ExhibitionRecord>,
    /// Theme index of each exhibition.
    pub themes: Vec<usize>,
    /// Object ids of each theme's pool.
    pub pools: Vec<Vec<u64>>,
}

fn artist(theme: usize, i: usize) -> String {
    let g = GIVEN[(theme * 7 + i * 3) % GIVEN.len()];
    let f = FAMILY[(theme * 11 + i * 5) % FAMILY.len()];
    format!("{g} {f} of the {} workshop", ordinal(theme * 5 + i + 1))
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn themed_artwork(rng: &mut ChaCha8Rng, t: usize, id: u64) -> ArtworkRecord {
    let th = &THEMES[t];
    let dept = th.department;
    let artists: Vec<String> = if rng.random_bool(0.7) {
        vec![artist(t, rng.random_range(0..5))]
    } else {
        Vec::new()
    };
    let year = 1000 + 30 * t + rng.random_range(0..10);
    let n_tags = rng.random_range(1..=3);
    let mut tags: Vec<String> = th.tags.choose_multiple(rng, n_tags).map(|s| s.to_string()).collect();
    tags.sort();
    let class = *th.classes.choose(rng).unwrap();
    ArtworkRecord {
        object_id: id,
        department: Some(dept.into()),
        artist_display_name: artists,
        object_begin_date: Some(year.to_string()),
        medium: Some(th.media.choose(rng).unwrap().to_string()),
        classification: vec![class.into()],
        tags,
        title: Some(format!("{} ({year})", th.object)),
        object_name: Some(th.object.into()),
        public_image_url: None,
    }
}

fn background_artwork(rng: &mut ChaCha8Rng, id: u64) -> ArtworkRecord {
    let dept = THEMES.choose(rng).unwrap().department;
    let artists = if rng.random_bool(0.4) {
        vec![format!("{} {}", GIVEN.choose(rng).unwrap(), FAMILY.choose(rng).unwrap())]
    } else {
        Vec::new()
    };
    let ntags = rng.random_range(0..=2);
    let tags: Vec<String> = GENERIC_TAGS.choose_multiple(rng, ntags).map(|s| s.to_string()).collect();
    let class = GENERIC_CLASSES.choose(rng).unwrap().to_string();
    let year = rng.random_range(1700..2000);
    ArtworkRecord {
        object_id: id,
        department: Some(dept.into()),
        artist_display_name: artists,
        object_begin_date: rng.random_bool(0.95).then(|| year.to_string()),
        medium: Some(GENERIC_MEDIA.choose(rng).unwrap().to_string()),
        classification: if rng.random_bool(0.8) { vec![class] } else { Vec::new() },
        tags,
        title: Some(format!("Object {id}")),
        object_name: None,
        public_image_url: None,
    }
}

fn prompt(rng: &mut ChaCha8Rng, t: usize) -> (String, String) {
    let th = &THEMES[t];
    let mut kw: Vec<&str> = th.keywords.to_vec();
    kw.shuffle(rng);
    let title = format!("{} the {} {}", OPENERS.choose(rng).unwrap(), kw[0], kw[1]);
    let mut words: Vec<&str> = kw[..4].to_vec();
    words.extend(FILLER.choose_multiple(rng, 16));
    words.shuffle(rng);
    let mut overview = words.join(" ");
    overview.push('.');
    if let Some(first) = overview.get(..1) {
        overview.replace_range(..1, &first.to_uppercase());
    }
    (title, overview)
}

/// Builds the corpus; identical configs give identical corpora.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let themes = config.themes.min(THEMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pooled = (themes * config.pool_size).min(config.artworks);
    let mut slots: Vec<usize> = (0..config.artworks).collect();
    slots.shuffle(&mut rng);
    let id_of = |row: usize| 100_000 + row as u64 * 3;

    let mut catalog: Vec<Option<ArtworkRecord>> = vec![None; config.artworks];
    let mut pools = vec![Vec::new(); themes];
    for (k, &row) in slots[..pooled].iter().enumerate() {
        let t = k % themes;
        catalog[row] = Some(themed_artwork(&mut rng, t, id_of(row)));
        pools[t].push(id_of(row));
    }
    for &row in &slots[pooled..] {
        catalog[row] = Some(background_artwork(&mut rng, id_of(row)));
    }
    let catalog: Vec<ArtworkRecord> = catalog.into_iter().map(Option::unwrap).collect();
    let background: Vec<usize> = slots[pooled..].to_vec();

    let mut exhibitions = Vec::new();
    let mut theme_of = Vec::new();
    for _ in 0..config.exhibitions_per_theme {
        for (t, pool) in pools.iter().enumerate() {
            let size = rng.random_range(config.min_artworks..=config.max_artworks).min(pool.len());
            let mut ids: Vec<u64> = pool.choose_multiple(&mut rng, size).copied().collect();
            let same_department: Vec<usize> = background
                .iter()
                .copied()
                .filter(|&r| catalog[r].department.as_deref() == Some(THEMES[t].department))
                .collect();
            let noise = rng.random_range(0..=config.noise_artworks);
            ids.extend(same_department.choose_multiple(&mut rng, noise).map(|&r| id_of(r)));
            ids.shuffle(&mut rng);
            let artworks = ids.iter().map(|&id| catalog[((id - 100_000) / 3) as usize].clone()).collect();
            let (title, overview) = prompt(&mut rng, t);
            exhibitions.push(ExhibitionRecord::new(title, overview, artworks));
            theme_of.push(t);
        }
    }
    SynthCorpus {
        catalog,
        exhibitions,
        themes: theme_of,
        pools,
    }
}
