use std::collections::{BTreeMap, HashMap};

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedCorpus, ClaimSpan, Codebook, Document, Polarity};
use crate::translation::DictionaryBackend;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilingualParams {
    pub source_documents: usize,
    pub target_documents: usize,
    pub sentences_per_document: usize,
    pub claim_rate: f64,
    /// Share of claims carrying two categories.
    pub multi_label_rate: f64,
    pub seed: u64,
}

impl Default for BilingualParams {
    fn default() -> Self {
        BilingualParams {
            source_documents: 200,
            target_documents: 60,
            sentences_per_document: 10,
            claim_rate: 0.3,
            multi_label_rate: 0.25,
            seed: 0,
        }
    }
}

/// German source corpus, an independently generated English corpus with the
/// same annotation scheme, and a word-level German/English dictionary.
#[derive(Debug, Clone)]
pub struct BilingualCorpus {
    pub source: AnnotatedCorpus,
    pub target: AnnotatedCorpus,
    pub dictionary: DictionaryBackend,
    /// English token to German token, for aligned multilingual encoders.
    pub alignment: BTreeMap<String, String>,
}

type Pairs = &'static [(&'static str, &'static str)];

const CUES: Pairs = &[
    ("fordert", "demands"),
    ("verlangt", "requests"),
    ("kritisiert", "criticizes"),
    ("befürwortet", "endorses"),
];
// "erklärte" and "sagte" share a translation, so the English-German leg
// cannot restore every German verb.
const NEUTRAL: Pairs = &[
    ("sagte", "said"),
    ("erklärte", "said"),
    ("berichtete", "reported"),
    ("besuchte", "visited"),
];
const ACTORS: &[(&str, &str, &str)] = &[
    ("Die", "Regierung", "government"),
    ("Die", "Opposition", "opposition"),
    ("Die", "Ministerin", "minister"),
    ("Der", "Bürgermeister", "mayor"),
    ("Der", "Verband", "association"),
    ("Die", "Partei", "party"),
    ("Die", "Kanzlerin", "chancellor"),
    ("Der", "Senat", "senate"),
];
const TOPICS: [Pairs; 8] = [
    &[
        ("Grenze", "border"),
        ("Abschiebung", "deportation"),
        ("Obergrenze", "cap"),
        ("Zuwanderung", "immigration"),
        ("Grenzkontrolle", "checkpoint"),
        ("Kontingent", "quota"),
    ],
    &[
        ("Aufenthalt", "residence"),
        ("Duldung", "tolerance"),
        ("Bleiberecht", "settlement"),
        ("Asylantrag", "application"),
        ("Familiennachzug", "reunification"),
        ("Staatsbürgerschaft", "citizenship"),
    ],
    &[
        ("Integration", "integration"),
        ("Sprachkurs", "language"),
        ("Schule", "school"),
        ("Wohnung", "housing"),
        ("Ausbildung", "training"),
        ("Kita", "daycare"),
    ],
    &[
        ("Polizei", "police"),
        ("Kriminalität", "crime"),
        ("Terror", "terrorism"),
        ("Sicherheit", "security"),
        ("Überwachung", "surveillance"),
        ("Gewalt", "violence"),
    ],
    &[
        ("Außenpolitik", "diplomacy"),
        ("Syrien", "syria"),
        ("Türkei", "turkey"),
        ("Krieg", "war"),
        ("Nachbarstaaten", "neighbours"),
        ("Entwicklungshilfe", "aid"),
    ],
    &[
        ("Arbeitsmarkt", "labour"),
        ("Wirtschaft", "economy"),
        ("Mindestlohn", "wage"),
        ("Fachkräfte", "workers"),
        ("Arbeitsplätze", "jobs"),
        ("Steuern", "taxes"),
    ],
    &[
        ("Gesellschaft", "society"),
        ("Religion", "religion"),
        ("Werte", "values"),
        ("Solidarität", "solidarity"),
        ("Rassismus", "racism"),
        ("Ehrenamt", "volunteering"),
    ],
    &[
        ("Verfahren", "procedure"),
        ("Behörde", "authority"),
        ("Bearbeitung", "processing"),
        ("Registrierung", "registration"),
        ("Bundesamt", "office"),
        ("Gesetz", "law"),
    ],
];
const FILLERS_DE: &[&str] = &[
    "am Montag",
    "in Berlin",
    "nach Angaben",
    "im Bundestag",
    "gestern",
    "heute erneut",
    "deutlich",
];
const FILLERS_EN: &[&str] = &[
    "on Monday",
    "in Berlin",
    "after reports",
    "in parliament",
    "yesterday",
    "today again",
    "clearly",
    "on Tuesday",
    "in London",
    "last week",
];
const FUNCTION_WORDS: Pairs = &[
    ("die", "the"),
    ("der", "the"),
    ("das", "the"),
    ("mehr", "more"),
    ("und", "and"),
    ("über", "about"),
    ("am", "on"),
    ("montag", "monday"),
    ("in", "in"),
    ("im", "in"),
    ("nach", "after"),
    ("angaben", "reports"),
    ("bundestag", "parliament"),
    ("gestern", "yesterday"),
    ("heute", "today"),
    ("erneut", "again"),
    ("deutlich", "clearly"),
    ("dienstag", "tuesday"),
    ("letzte", "last"),
    ("woche", "week"),
    ("neue", "new"),
    ("pläne", "plans"),
];

fn lexicons() -> (HashMap<String, String>, HashMap<String, String>) {
    let mut de_en = HashMap::new();
    let mut en_de: BTreeMap<String, String> = BTreeMap::new();
    let mut add = |de: &str, en: &str| {
        let (de, en) = (de.to_lowercase(), en.to_lowercase());
        de_en.insert(de.clone(), en.clone());
        // first German word listed for an English word is the reverse entry
        en_de.entry(en).or_insert(de);
    };
    let topics = TOPICS.iter().flat_map(|t| t.iter());
    for &(de, en) in CUES.iter().chain(NEUTRAL).chain(topics).chain(FUNCTION_WORDS) {
        add(de, en);
    }
    for &(_, de, en) in ACTORS {
        add(de, en);
    }
    // English-only filler has a return translation but no German source.
    let mut en_de: HashMap<String, String> = en_de.into_iter().collect();
    en_de.insert("tuesday".into(), "dienstag".into());
    en_de.insert("last".into(), "letzte".into());
    en_de.insert("week".into(), "woche".into());
    (de_en, en_de)
}

#[derive(Clone, Copy)]
enum Lang {
    De,
    En,
}

struct Sentence {
    text: String,
    claim: Option<(Vec<String>, &'static str, Polarity)>,
}

fn sentence(rng: &mut ChaCha8Rng, lang: Lang, params: &BilingualParams) -> Sentence {
    let actor = ACTORS[rng.gen_range(0..ACTORS.len())];
    let subject = match lang {
        Lang::De => format!("{} {}", actor.0, actor.1),
        Lang::En => format!("The {}", actor.2),
    };
    let pick = |(de, en): (&'static str, &'static str)| match lang {
        Lang::De => de,
        Lang::En => en,
    };
    let filler = match lang {
        Lang::De => FILLERS_DE[rng.gen_range(0..FILLERS_DE.len())],
        Lang::En => FILLERS_EN[rng.gen_range(0..FILLERS_EN.len())],
    };
    let (more, and, about) = match lang {
        Lang::De => ("mehr", "und", "über"),
        Lang::En => ("more", "and", "about"),
    };
    let mut cat_order: Vec<usize> = (0..TOPICS.len()).collect();
    cat_order.shuffle(rng);
    let topic = |c: usize, rng: &mut ChaCha8Rng| pick(TOPICS[c][rng.gen_range(0..TOPICS[c].len())]);

    if rng.gen_bool(params.claim_rate) {
        let n_cats = if rng.gen_bool(params.multi_label_rate) { 2 } else { 1 };
        let cats = &cat_order[..n_cats];
        let mut words = vec![topic(cats[0], rng), topic(cats[0], rng)];
        if n_cats == 2 {
            words.push(topic(cats[1], rng));
        }
        let cue_idx = rng.gen_range(0..CUES.len());
        let cue = pick(CUES[cue_idx]);
        let polarity = if cue_idx == 2 { Polarity::Oppose } else { Polarity::Support };
        let text = format!(
            "{subject} {cue} {more} {} {and} {} {filler}.",
            words[0],
            words[1..].join(" ")
        );
        let mut codes: Vec<String> = cats.iter().map(|c| format!("C{}", c + 1)).collect();
        codes.sort();
        Sentence {
            text,
            claim: Some((codes, actor.2, polarity)),
        }
    } else {
        let verb = pick(NEUTRAL[rng.gen_range(0..NEUTRAL.len())]);
        let text = match rng.gen_range(0..3) {
            0 => format!("{subject} {verb} {filler}."),
            1 => format!("{subject} {verb} {about} {} {filler}.", topic(cat_order[0], rng)),
            _ => format!(
                "{subject} {verb} {about} {} {and} {}.",
                topic(cat_order[0], rng),
                topic(cat_order[1], rng)
            ),
        };
        Sentence { text, claim: None }
    }
}

fn corpus(
    rng: &mut ChaCha8Rng,
    lang: Lang,
    n_docs: usize,
    params: &BilingualParams,
) -> Result<AnnotatedCorpus> {
    let (code, prefix) = match lang {
        Lang::De => ("de", "syn-de"),
        Lang::En => ("en", "syn-en"),
    };
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let mut documents = Vec::with_capacity(n_docs);
    let mut claims = Vec::new();
    for d in 0..n_docs {
        let id = format!("{prefix}-{d:04}");
        let mut sentences = Vec::with_capacity(params.sentences_per_document);
        for i in 0..params.sentences_per_document {
            let s = sentence(rng, lang, params);
            if let Some((codes, actor, polarity)) = s.claim {
                let refs: Vec<&str> = codes.iter().map(String::as_str).collect();
                let mut span = ClaimSpan::new(&id, vec![i], &refs);
                span.actor = Some(actor.to_string());
                span.polarity = Some(polarity);
                claims.push(span);
            }
            sentences.push(s.text);
        }
        documents.push(Document {
            id,
            outlet: format!("synthetic-{code}"),
            date: start + Duration::days((d % 365) as i64),
            language: code.to_string(),
            sentences,
        });
    }
    AnnotatedCorpus::new(documents, claims, Codebook::debatenet(), Some(code.to_string()))
}

/// Generates the bilingual corpus. Claims are sentences with a demand verb;
/// their categories are given by the topic words they contain. Non-claim
/// sentences use the same topic vocabulary with neutral verbs.
pub fn bilingual_claims(params: &BilingualParams) -> Result<BilingualCorpus> {
    if params.source_documents < 3 || params.sentences_per_document == 0 {
        return Err(Error::Config(
            "need at least 3 source documents with at least one sentence".into(),
        ));
    }
    for (name, p) in [
        ("claim_rate", params.claim_rate),
        ("multi_label_rate", params.multi_label_rate),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let source = corpus(&mut rng, Lang::De, params.source_documents, params)?;
    rng.set_stream(1);
    let target = if params.target_documents == 0 {
        AnnotatedCorpus::empty(Codebook::debatenet())
    } else {
        corpus(&mut rng, Lang::En, params.target_documents, params)?
    };
    let (de_en, en_de) = lexicons();
    let alignment = en_de.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let dictionary = DictionaryBackend::new("dictionary")
        .with_pair("de", "en", de_en)
        .with_pair("en", "de", en_de);
    Ok(BilingualCorpus {
        source,
        target,
        dictionary,
        alignment,
    })
}
