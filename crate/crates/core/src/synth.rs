//! Deterministic synthetic benchmark: a small knowledge base about
//! fictional people, works, cities and organizations, plus 300
//! question-SPARQL pairs instantiated from templates. Everything is a
//! pure function of the tables below, so generated files are stable
//! byte for byte.
//!
//! The same module also builds an adversarial corpus in which entity
//! surfaces are shared across schema-unrelated questions; it exercises
//! the gap between raw-text and anonymized retrieval.

use std::collections::BTreeSet;

use crate::dataset::{Corpus, EntitySpan, EntityType, QuestionRecord};
use crate::kb::{execute, KnowledgeBase};
use crate::sparql::parse_sparql;

/// Generated benchmark: in-memory KB and training corpus, plus the
/// canonical file renderings that ship in-repo.
pub struct Benchmark {
    pub kb: KnowledgeBase,
    pub train: Corpus,
    pub kb_tsv: String,
    pub corpus_jsonl: String,
    pub lexicon_tsv: String,
}

const PEOPLE: [(&str, &str); 8] = [
    ("p01", "Alice Moreau"),
    ("p02", "Boris Chen"),
    ("p03", "Clara Okafor"),
    ("p04", "David Lindqvist"),
    ("p05", "Elena Vasquez"),
    ("p06", "Farid Haddad"),
    ("p07", "Grace Kimura"),
    ("p08", "Henry Doyle"),
];

const WORKS: [(&str, &str); 8] = [
    ("w01", "The Silent Mountain"),
    ("w02", "Crimson Harbor"),
    ("w03", "A Garden of Echoes"),
    ("w04", "The Last Cartographer"),
    ("w05", "Midnight on the Delta"),
    ("w06", "The Glass Aviary"),
    ("w07", "Seven Days in Amber"),
    ("w08", "Voices of the Tide"),
];

const CITIES: [(&str, &str); 6] = [
    ("c01", "Porto Verde"),
    ("c02", "Lakewood Falls"),
    ("c03", "New Alexandria"),
    ("c04", "North Haven"),
    ("c05", "East Meridian"),
    ("c06", "Silver Creek"),
];

const ORGS: [(&str, &str); 4] = [
    ("o01", "Northern Lights Studio"),
    ("o02", "Meridian Press"),
    ("o03", "Atlas Film Collective"),
    ("o04", "Harbor Light Records"),
];

/// (id, birth_date, birth_place, occupation)
const PERSON_BASICS: [(&str, &str, &str, &str); 8] = [
    ("p01", "1948-03-12", "c01", "novelist"),
    ("p02", "1952-09-30", "c02", "film director"),
    ("p03", "1961-01-25", "c03", "composer"),
    ("p04", "1957-06-08", "c01", "actor"),
    ("p05", "1963-11-17", "c04", "actor"),
    ("p06", "1970-02-03", "c05", "screenwriter"),
    ("p07", "1975-08-22", "c02", "producer"),
    ("p08", "1944-12-01", "c06", "cinematographer"),
];

/// (id, publication_date, directed_by, duration_min)
const WORK_BASICS: [(&str, &str, &str, &str); 8] = [
    ("w01", "1979-05-20", "p02", "88"),
    ("w02", "1984-11-02", "p02", "95"),
    ("w03", "1991-07-14", "p04", "102"),
    ("w04", "1996-03-09", "p07", "110"),
    ("w05", "2003-02-27", "p02", "124"),
    ("w06", "2008-09-30", "p07", "131"),
    ("w07", "2014-06-21", "p08", "143"),
    ("w08", "2019-12-05", "p04", "156"),
];

fn world_triples() -> Vec<(String, String, String)> {
    let mut t: Vec<(&str, &str, String)> = Vec::new();
    let mut add = |s: &'static str, p: &'static str, o: &str| {
        t.push((s, p, o.to_string()));
    };

    for (id, name) in PEOPLE.iter().chain(&WORKS).chain(&CITIES).chain(&ORGS) {
        add(id, "pred:name", name);
    }
    for (id, _) in WORKS {
        add(id, "pred:instance_of", "film");
    }

    for (id, birth, place, occupation) in PERSON_BASICS {
        add(id, "birth_date", birth);
        add(id, "birth_place", place);
        add(id, "occupation", occupation);
    }
    for (id, country) in [
        ("p01", "Veridia"),
        ("p02", "Norland"),
        ("p04", "Suvonia"),
        ("p06", "Katari"),
    ] {
        add(id, "nationality", country);
    }
    for (a, b) in [("p01", "p02"), ("p04", "p05")] {
        add(a, "spouse", b);
        add(b, "spouse", a);
    }
    for (id, cm) in [
        ("p01", "165"),
        ("p02", "178"),
        ("p03", "171"),
        ("p05", "162"),
        ("p08", "183"),
    ] {
        add(id, "height_cm", cm);
    }
    for (id, org) in [("p01", "o02"), ("p02", "o03"), ("p04", "o01"), ("p06", "o04")] {
        add(id, "member_of", org);
    }
    add("p01", "award_won", "National Book Medal");
    add("p06", "award_won", "Golden Quill Prize");
    add("p04", "death_date", "2015-04-19");
    add("p03", "educated_at", "o01");
    add("p01", "residence", "c03");
    add("p07", "residence", "c06");

    for (id, published, director, duration) in WORK_BASICS {
        add(id, "publication_date", published);
        add(id, "directed_by", director);
        add(id, "duration_min", duration);
    }
    for (id, writer) in [("w01", "p01"), ("w03", "p06"), ("w05", "p06"), ("w07", "p01")] {
        add(id, "written_by", writer);
    }
    for (id, member) in [
        ("w01", "p04"),
        ("w01", "p05"),
        ("w02", "p05"),
        ("w03", "p04"),
        ("w03", "p07"),
        ("w04", "p05"),
        ("w04", "p08"),
        ("w05", "p04"),
        ("w06", "p05"),
        ("w08", "p07"),
    ] {
        add(id, "cast_member", member);
    }
    for (id, genre) in [
        ("w01", "drama"),
        ("w02", "thriller"),
        ("w05", "documentary"),
        ("w07", "drama"),
    ] {
        add(id, "genre", genre);
    }
    for (id, language) in [("w03", "Veridian"), ("w06", "Norlandic"), ("w08", "Veridian")] {
        add(id, "language", language);
    }
    add("w02", "producer", "o03");
    add("w04", "producer", "o01");
    add("w01", "composer", "p03");
    add("w06", "composer", "p03");
    add("w02", "box_office", "815000000");
    add("w07", "box_office", "45200000");
    add("w03", "based_on", "a folk legend");
    add("w01", "filming_location", "c04");
    add("w04", "filming_location", "c01");
    add("w05", "review_score", "7.9");
    add("w08", "review_score", "8.4");

    for (id, country) in [
        ("c01", "Veridia"),
        ("c02", "Norland"),
        ("c03", "Veridia"),
        ("c04", "Suvonia"),
        ("c05", "Katari"),
    ] {
        add(id, "located_in", country);
    }
    for (id, pop) in [
        ("c01", "342000"),
        ("c02", "87500"),
        ("c03", "2140000"),
        ("c04", "460900"),
        ("c05", "1190000"),
    ] {
        add(id, "population", pop);
    }
    for (id, founded) in [("c01", "1812-10-05"), ("c03", "1698-03-21"), ("c06", "1854-05-30")] {
        add(id, "founded_date", founded);
    }
    add("c03", "mayor", "p08");
    add("c05", "area_km2", "910");
    add("c02", "timezone", "UTC-5");

    for (id, founder) in [("o01", "p07"), ("o02", "p01"), ("o03", "p02"), ("o04", "p06")] {
        add(id, "founded_by", founder);
    }
    for (id, hq) in [("o01", "c02"), ("o02", "c03"), ("o03", "c01"), ("o04", "c05")] {
        add(id, "headquarters", hq);
    }
    for (id, industry) in [
        ("o01", "film production"),
        ("o02", "publishing"),
        ("o03", "film production"),
        ("o04", "music"),
    ] {
        add(id, "industry", industry);
    }
    add("o01", "employee_count", "240");
    add("o02", "employee_count", "85");
    add("o03", "ceo", "p07");
    add("o04", "parent_org", "o03");

    t.into_iter()
        .map(|(s, p, o)| (s.to_string(), p.to_string(), o))
        .collect()
}

/// Question text under construction, tracking entity spans by char
/// offset as segments are appended.
struct QText {
    text: String,
    chars: usize,
    spans: Vec<EntitySpan>,
}

impl QText {
    fn new() -> Self {
        QText {
            text: String::new(),
            chars: 0,
            spans: Vec::new(),
        }
    }

    fn lit(mut self, s: &str) -> Self {
        self.text.push_str(s);
        self.chars += s.chars().count();
        self
    }

    fn ent(mut self, surface: &str, entity_type: EntityType) -> Self {
        let start = self.chars;
        self.text.push_str(surface);
        self.chars += surface.chars().count();
        self.spans.push(EntitySpan {
            start,
            end: self.chars,
            entity_type,
            surface: surface.to_string(),
        });
        self
    }
}

struct Candidate {
    template: &'static str,
    q: QText,
    sparql: String,
    topic: String,
}

fn name_of(id: &str) -> &'static str {
    PEOPLE
        .iter()
        .chain(&WORKS)
        .chain(&CITIES)
        .chain(&ORGS)
        .find(|(eid, _)| *eid == id)
        .map(|(_, name)| *name)
        .unwrap_or_else(|| panic!("unknown entity id {id}"))
}

fn candidates() -> Vec<Candidate> {
    use EntityType::{Cardinal, Date, Gpe, Org, Person, WorkOfArt};

    let mut out: Vec<Candidate> = Vec::new();
    let mut push = |template: &'static str, q: QText, sparql: String, topic: &str| {
        out.push(Candidate {
            template,
            q,
            sparql,
            topic: topic.to_string(),
        });
    };

    let select_attr = |name: &str, rel: &str| {
        format!(r#"SELECT ?x WHERE {{ ?e <pred:name> "{name}" . ?e <{rel}> ?x . }}"#)
    };
    let select_attr_name = |name: &str, rel: &str| {
        format!(
            r#"SELECT ?x WHERE {{ ?e <pred:name> "{name}" . ?e <{rel}> ?t . ?t <pred:name> ?x . }}"#
        )
    };
    // Person questions.
    for (id, _, _, _) in PERSON_BASICS {
        let name = name_of(id);
        for (tpl, prefix, suffix) in [
            ("person_birth_date", "When was ", " born?"),
            ("person_birth_date", "What is the birth date of ", "?"),
            ("person_birth_date", "On which date was ", " born?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Person).lit(suffix),
                select_attr(name, "birth_date"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("person_birth_place", "Where was ", " born?"),
            ("person_birth_place", "In which city was ", " born?"),
            ("person_birth_place", "What is the birthplace of ", "?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Person).lit(suffix),
                select_attr_name(name, "birth_place"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("person_occupation", "What is the occupation of ", "?"),
            ("person_occupation", "What does ", " do for a living?"),
            ("person_occupation", "Which profession does ", " have?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Person).lit(suffix),
                select_attr(name, "occupation"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("person_directed_count", "How many works did ", " direct?"),
            ("person_directed_count", "How many films has ", " directed?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Person).lit(suffix),
                format!(
                    r#"SELECT (COUNT(?w) AS ?c) WHERE {{ ?e <pred:name> "{name}" . ?w <directed_by> ?e . }}"#
                ),
                id,
            );
        }
    }

    for id in ["p01", "p02", "p04", "p06"] {
        let name = name_of(id);
        push(
            "person_nationality",
            QText::new()
                .lit("Which country is ")
                .ent(name, Person)
                .lit(" a citizen of?"),
            select_attr(name, "nationality"),
            id,
        );
        push(
            "person_member_of",
            QText::new()
                .lit("Which organization is ")
                .ent(name, Person)
                .lit(" a member of?"),
            select_attr_name(name, "member_of"),
            id,
        );
    }

    for id in ["p01", "p02", "p04", "p05"] {
        let name = name_of(id);
        for (prefix, suffix) in [("Who is ", " married to?"), ("Who is the spouse of ", "?")] {
            push(
                "person_spouse",
                QText::new().lit(prefix).ent(name, Person).lit(suffix),
                select_attr_name(name, "spouse"),
                id,
            );
        }
    }

    for (a, b) in [
        ("p01", "p02"),
        ("p04", "p05"),
        ("p01", "p04"),
        ("p02", "p05"),
        ("p03", "p06"),
        ("p07", "p08"),
    ] {
        let (na, nb) = (name_of(a), name_of(b));
        push(
            "person_married_ask",
            QText::new()
                .lit("Is ")
                .ent(na, Person)
                .lit(" married to ")
                .ent(nb, Person)
                .lit("?"),
            format!(
                r#"ASK {{ ?a <pred:name> "{na}" . ?b <pred:name> "{nb}" . ?a <spouse> ?b . }}"#
            ),
            a,
        );
    }

    for n in ["160", "170", "175"] {
        push(
            "person_taller_than",
            QText::new()
                .lit("Which people are taller than ")
                .ent(n, Cardinal)
                .lit(" centimeters?"),
            format!(
                "SELECT ?x WHERE {{ ?p <height_cm> ?h . ?p <pred:name> ?x . FILTER(?h > {n}) }}"
            ),
            "",
        );
    }

    for id in ["p01", "p02", "p03", "p05", "p08"] {
        let name = name_of(id);
        push(
            "person_height",
            QText::new()
                .lit("How tall is ")
                .ent(name, Person)
                .lit(" in centimeters?"),
            select_attr(name, "height_cm"),
            id,
        );
    }

    for id in ["p01", "p06"] {
        let name = name_of(id);
        push(
            "person_award",
            QText::new()
                .lit("Which award did ")
                .ent(name, Person)
                .lit(" win?"),
            select_attr(name, "award_won"),
            id,
        );
        push(
            "person_written_count",
            QText::new()
                .lit("How many works did ")
                .ent(name, Person)
                .lit(" write?"),
            format!(
                r#"SELECT (COUNT(?w) AS ?c) WHERE {{ ?e <pred:name> "{name}" . ?w <written_by> ?e . }}"#
            ),
            id,
        );
    }

    push(
        "person_death_date",
        QText::new()
            .lit("When did ")
            .ent(name_of("p04"), Person)
            .lit(" die?"),
        select_attr(name_of("p04"), "death_date"),
        "p04",
    );

    for id in ["p01", "p07"] {
        let name = name_of(id);
        push(
            "person_residence",
            QText::new()
                .lit("Which city does ")
                .ent(name, Person)
                .lit(" live in?"),
            select_attr_name(name, "residence"),
            id,
        );
    }

    // Work questions.
    for (id, _, _, _) in WORK_BASICS {
        let name = name_of(id);
        for (tpl, prefix, suffix) in [
            ("work_publication_date", "When was ", " published?"),
            ("work_publication_date", "On which date was ", " released?"),
            ("work_publication_date", "What is the publication date of ", "?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, WorkOfArt).lit(suffix),
                select_attr(name, "publication_date"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("work_director", "Who directed ", "?"),
            ("work_director", "Who is the director of ", "?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, WorkOfArt).lit(suffix),
                select_attr_name(name, "directed_by"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("work_duration", "How long is ", " in minutes?"),
            ("work_duration", "What is the duration of ", "?"),
            ("work_duration", "How many minutes does ", " run?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, WorkOfArt).lit(suffix),
                select_attr(name, "duration_min"),
                id,
            );
        }
        push(
            "work_cast_count",
            QText::new()
                .lit("How many cast members does ")
                .ent(name, WorkOfArt)
                .lit(" have?"),
            format!(
                r#"SELECT (COUNT(?p) AS ?c) WHERE {{ ?e <pred:name> "{name}" . ?e <cast_member> ?p . }}"#
            ),
            id,
        );
    }

    for id in ["w01", "w02", "w03", "w04", "w05", "w06", "w08"] {
        let name = name_of(id);
        for (prefix, suffix) in [
            ("Who are the cast members of ", "?"),
            ("Which actors appear in ", "?"),
        ] {
            push(
                "work_cast_list",
                QText::new().lit(prefix).ent(name, WorkOfArt).lit(suffix),
                format!(
                    r#"SELECT ?x WHERE {{ ?e <pred:name> "{name}" . ?e <cast_member> ?p . ?p <pred:name> ?x . }}"#
                ),
                id,
            );
        }
    }

    for id in ["w01", "w02", "w05", "w07"] {
        let name = name_of(id);
        push(
            "work_genre",
            QText::new()
                .lit("What genre is ")
                .ent(name, WorkOfArt)
                .lit("?"),
            select_attr(name, "genre"),
            id,
        );
    }

    for id in ["w03", "w06", "w08"] {
        let name = name_of(id);
        push(
            "work_language",
            QText::new()
                .lit("In which language is ")
                .ent(name, WorkOfArt)
                .lit("?"),
            select_attr(name, "language"),
            id,
        );
    }

    for (a, b) in [
        ("w01", "w05"),
        ("w03", "w02"),
        ("w04", "w06"),
        ("w07", "w01"),
        ("w02", "w08"),
        ("w06", "w03"),
    ] {
        let (na, nb) = (name_of(a), name_of(b));
        push(
            "work_shorter_ask",
            QText::new()
                .lit("Is ")
                .ent(na, WorkOfArt)
                .lit(" shorter than ")
                .ent(nb, WorkOfArt)
                .lit("?"),
            format!(
                r#"ASK {{ ?a <pred:name> "{na}" . ?a <duration_min> ?da . ?b <pred:name> "{nb}" . ?b <duration_min> ?db . FILTER(?da < ?db) }}"#
            ),
            a,
        );
    }

    for n in ["100", "120", "140"] {
        push(
            "work_longer_than",
            QText::new()
                .lit("Which films run longer than ")
                .ent(n, Cardinal)
                .lit(" minutes?"),
            format!(
                "SELECT ?x WHERE {{ ?w <duration_min> ?d . ?w <pred:name> ?x . FILTER(?d > {n}) }}"
            ),
            "",
        );
    }

    for d in ["1990-01-01", "2000-01-01", "2010-01-01"] {
        push(
            "work_published_after",
            QText::new()
                .lit("Which works were published after ")
                .ent(d, Date)
                .lit("?"),
            format!(
                r#"SELECT ?x WHERE {{ ?w <publication_date> ?p . ?w <pred:name> ?x . FILTER(?p > "{d}") }}"#
            ),
            "",
        );
    }

    for (p, w) in [
        ("p02", "w01"),
        ("p04", "w03"),
        ("p07", "w04"),
        ("p08", "w07"),
        ("p01", "w01"),
        ("p05", "w02"),
        ("p03", "w06"),
        ("p06", "w08"),
    ] {
        let (np, nw) = (name_of(p), name_of(w));
        push(
            "work_directed_ask",
            QText::new()
                .lit("Did ")
                .ent(np, Person)
                .lit(" direct ")
                .ent(nw, WorkOfArt)
                .lit("?"),
            format!(
                r#"ASK {{ ?p <pred:name> "{np}" . ?w <pred:name> "{nw}" . ?w <directed_by> ?p . }}"#
            ),
            p,
        );
    }

    for id in ["w01", "w03", "w05", "w07"] {
        let name = name_of(id);
        push(
            "work_writer",
            QText::new()
                .lit("Who wrote ")
                .ent(name, WorkOfArt)
                .lit("?"),
            select_attr_name(name, "written_by"),
            id,
        );
    }

    for (surface, ty, id) in [
        ("The Silent Mountain", WorkOfArt, "w01"),
        ("Voices of the Tide", WorkOfArt, "w08"),
        ("Alice Moreau", Person, "p01"),
        ("Henry Doyle", Person, "p08"),
    ] {
        push(
            "work_film_ask",
            QText::new().lit("Is ").ent(surface, ty).lit(" a film?"),
            format!(
                r#"ASK {{ ?e <pred:name> "{surface}" . ?e <pred:instance_of> "film" . }}"#
            ),
            id,
        );
    }

    for id in ["w01", "w04"] {
        let name = name_of(id);
        push(
            "work_filming_location",
            QText::new()
                .lit("Where was ")
                .ent(name, WorkOfArt)
                .lit(" filmed?"),
            select_attr_name(name, "filming_location"),
            id,
        );
    }

    // City questions.
    for id in ["c01", "c02", "c03", "c04", "c05"] {
        let name = name_of(id);
        for (tpl, prefix, suffix) in [
            ("city_country", "Which country is ", " located in?"),
            ("city_country", "In which country is ", "?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Gpe).lit(suffix),
                select_attr(name, "located_in"),
                id,
            );
        }
        for (tpl, prefix, suffix) in [
            ("city_population", "What is the population of ", "?"),
            ("city_population", "How many people live in ", "?"),
        ] {
            push(
                tpl,
                QText::new().lit(prefix).ent(name, Gpe).lit(suffix),
                select_attr(name, "population"),
                id,
            );
        }
    }

    for id in ["c01", "c03", "c06"] {
        let name = name_of(id);
        for (prefix, suffix) in [("When was ", " founded?"), ("On which date was ", " founded?")] {
            push(
                "city_founded",
                QText::new().lit(prefix).ent(name, Gpe).lit(suffix),
                select_attr(name, "founded_date"),
                id,
            );
        }
    }

    push(
        "city_mayor",
        QText::new()
            .lit("Who is the mayor of ")
            .ent(name_of("c03"), Gpe)
            .lit("?"),
        select_attr_name(name_of("c03"), "mayor"),
        "c03",
    );

    for (a, b) in [("c03", "c01"), ("c02", "c04"), ("c05", "c01")] {
        let (na, nb) = (name_of(a), name_of(b));
        push(
            "city_population_ask",
            QText::new()
                .lit("Does ")
                .ent(na, Gpe)
                .lit(" have a larger population than ")
                .ent(nb, Gpe)
                .lit("?"),
            format!(
                r#"ASK {{ ?a <pred:name> "{na}" . ?a <population> ?pa . ?b <pred:name> "{nb}" . ?b <population> ?pb . FILTER(?pa > ?pb) }}"#
            ),
            a,
        );
    }

    // Organization questions.
    for (id, _) in ORGS {
        let name = name_of(id);
        for (prefix, suffix) in [("Who founded ", "?"), ("Who is the founder of ", "?")] {
            push(
                "org_founder",
                QText::new().lit(prefix).ent(name, Org).lit(suffix),
                select_attr_name(name, "founded_by"),
                id,
            );
        }
        for (prefix, suffix) in [
            ("Where is the headquarters of ", "?"),
            ("In which city is ", " based?"),
        ] {
            push(
                "org_headquarters",
                QText::new().lit(prefix).ent(name, Org).lit(suffix),
                select_attr_name(name, "headquarters"),
                id,
            );
        }
        push(
            "org_industry",
            QText::new()
                .lit("What industry does ")
                .ent(name, Org)
                .lit(" operate in?"),
            select_attr(name, "industry"),
            id,
        );
    }

    for id in ["o01", "o02"] {
        let name = name_of(id);
        push(
            "org_employees",
            QText::new()
                .lit("How many employees does ")
                .ent(name, Org)
                .lit(" have?"),
            select_attr(name, "employee_count"),
            id,
        );
    }

    push(
        "org_ceo",
        QText::new()
            .lit("Who is the CEO of ")
            .ent(name_of("o03"), Org)
            .lit("?"),
        select_attr_name(name_of("o03"), "ceo"),
        "o03",
    );

    out
}

/// Round-robin over templates so the 300 picked questions stay diverse.
fn select_round_robin(mut candidates: Vec<Candidate>, target: usize) -> Vec<Candidate> {
    assert!(
        candidates.len() >= target,
        "only {} candidates generated, need {target}",
        candidates.len()
    );
    let mut order: Vec<&'static str> = Vec::new();
    for c in &candidates {
        if !order.contains(&c.template) {
            order.push(c.template);
        }
    }
    let mut lanes: Vec<Vec<Candidate>> = order
        .iter()
        .map(|tpl| {
            let mut lane: Vec<Candidate> = Vec::new();
            let mut rest = Vec::new();
            for c in candidates.drain(..) {
                if c.template == *tpl {
                    lane.push(c);
                } else {
                    rest.push(c);
                }
            }
            candidates = rest;
            lane
        })
        .collect();
    for lane in &mut lanes {
        lane.reverse(); // pop() then yields original order
    }
    let mut picked = Vec::with_capacity(target);
    while picked.len() < target {
        let mut advanced = false;
        for lane in &mut lanes {
            if picked.len() >= target {
                break;
            }
            if let Some(c) = lane.pop() {
                picked.push(c);
                advanced = true;
            }
        }
        assert!(advanced, "ran out of candidates before reaching {target}");
    }
    picked
}

/// Builds the 300-question benchmark. Panics only on internal
/// inconsistency (every gold must parse and execute to a non-empty
/// answer set on the generated KB).
pub fn benchmark() -> Benchmark {
    let rows = world_triples();
    let kb_tsv: String = rows
        .iter()
        .map(|(s, p, o)| format!("{s}\t{p}\t{o}\n"))
        .collect();
    let kb = KnowledgeBase::from_triples(rows);

    let picked = select_round_robin(candidates(), 300);
    let mut records = Vec::with_capacity(picked.len());
    for (i, c) in picked.into_iter().enumerate() {
        let query = parse_sparql(&c.sparql)
            .unwrap_or_else(|e| panic!("benchmark gold fails to parse: {} ({e})", c.sparql));
        let answers = execute(&kb, &query)
            .unwrap_or_else(|e| panic!("benchmark gold fails to execute: {} ({e})", c.sparql));
        assert!(
            !answers.values.is_empty(),
            "benchmark gold has empty answers: {}",
            c.sparql
        );
        records.push(QuestionRecord {
            id: format!("q{:03}", i + 1),
            question: c.q.text,
            gold_sparql: Some(c.sparql),
            answers: answers.values.iter().cloned().collect::<BTreeSet<String>>(),
            topic_entity_id: if c.topic.is_empty() { None } else { Some(c.topic) },
            entity_annotations: Some(c.q.spans),
        });
    }
    let train = Corpus::new(records, "train").expect("benchmark ids are unique");
    let corpus_jsonl = train.to_canonical_string();

    let mut lexicon_tsv = String::new();
    for (_, name) in PEOPLE {
        lexicon_tsv.push_str(&format!("{name}\tPERSON\n"));
    }
    for (_, name) in WORKS {
        lexicon_tsv.push_str(&format!("{name}\tWORK_OF_ART\n"));
    }
    for (_, name) in CITIES {
        lexicon_tsv.push_str(&format!("{name}\tGPE\n"));
    }
    for (_, name) in ORGS {
        lexicon_tsv.push_str(&format!("{name}\tORG\n"));
    }

    Benchmark {
        kb,
        train,
        kb_tsv,
        corpus_jsonl,
        lexicon_tsv,
    }
}

// Long names with globally unique tokens, so raw-text similarity is
// dominated by the entity surface rather than the question stem.
const ADVERSARIAL_PEOPLE: [&str; 8] = [
    "Maria Elena Santos Vega Aranda Cruz",
    "John Patrick Fitzgerald Moore Callahan Reid",
    "Anna Sofia Lindgren Berg Dahl Holm",
    "Carlos Eduardo Ramos Silva Montoya Paz",
    "Yuki Haruko Tanaka Mori Sakamoto Abe",
    "Peter Johan Vermeer Kuyt Bakker Smit",
    "Fatima Noor Hassan Ali Rahim Zafar",
    "Dmitri Ivan Volkov Orlov Sokolov Melnik",
];

/// Eight templates per entity, each with its own relation. Raw-text
/// neighbors of any question are its same-entity siblings (long shared
/// names), which cover the wrong relations; anonymized neighbors are
/// same-template questions, which cover the right ones.
const ADVERSARIAL_TEMPLATES: [(&str, &str, &str); 8] = [
    ("When was ", " born?", "adv:birth_date"),
    ("Where did ", " study?", "adv:educated_at"),
    ("What award did ", " win?", "adv:award_won"),
    ("Which city does ", " live in?", "adv:residence"),
    ("What instrument does ", " play?", "adv:plays_instrument"),
    ("Who is ", " married to?", "adv:spouse"),
    ("How tall is ", "?", "adv:height"),
    ("When did ", " first perform?", "adv:debut_date"),
];

/// Corpus where entity surfaces are shared across schema-unrelated
/// questions; no KB is attached (only retrieval and recall use it).
pub fn adversarial_corpus() -> Corpus {
    let mut records = Vec::new();
    for (ti, (prefix, suffix, relation)) in ADVERSARIAL_TEMPLATES.iter().enumerate() {
        for (ei, name) in ADVERSARIAL_PEOPLE.iter().enumerate() {
            let q = QText::new()
                .lit(prefix)
                .ent(name, EntityType::Person)
                .lit(suffix);
            records.push(QuestionRecord {
                id: format!("adv{:02}_{:02}", ti, ei),
                question: q.text,
                gold_sparql: Some(format!(
                    r#"SELECT ?x WHERE {{ ?e <pred:name> "{name}" . ?e <{relation}> ?x . }}"#
                )),
                answers: std::iter::once("unused".to_string()).collect(),
                topic_entity_id: None,
                entity_annotations: Some(q.spans),
            });
        }
    }
    Corpus::new(records, "adversarial").expect("adversarial ids are unique")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_corpus_from_str, validate_annotations};
    use crate::kb::load_kb_from_str;
    use crate::sparql::extract_relations;

    #[test]
    fn benchmark_has_300_questions_and_desk_scale_kb() {
        let b = benchmark();
        assert_eq!(b.train.len(), 300);
        assert!(
            (120..=220).contains(&b.kb.len()),
            "kb size {} out of range",
            b.kb.len()
        );
        let relations: std::collections::BTreeSet<&str> =
            b.kb.triples().iter().map(|t| t.predicate.as_str()).collect();
        assert!(
            (30..=45).contains(&relations.len()),
            "relation count {} out of range",
            relations.len()
        );
    }

    #[test]
    fn every_gold_parses_executes_and_matches_stored_answers() {
        let b = benchmark();
        for r in b.train.iter() {
            let gold = r.gold_sparql.as_ref().expect("gold present");
            let q = parse_sparql(gold).expect("gold parses");
            assert!(!extract_relations(&q).is_empty(), "gold without relations: {gold}");
            let ans = execute(&b.kb, &q).expect("gold executes");
            let stored: BTreeSet<String> = r.answers.iter().cloned().collect();
            assert_eq!(ans.values, stored, "answers diverge for {}", r.id);
        }
    }

    #[test]
    fn file_renderings_reload_to_the_same_data() {
        let b = benchmark();
        let kb2 = load_kb_from_str(&b.kb_tsv).unwrap();
        assert_eq!(kb2.len(), b.kb.len());
        let corpus2 = load_corpus_from_str(&b.corpus_jsonl, "train").unwrap();
        assert_eq!(corpus2, b.train);
        assert!(validate_annotations(&b.train).is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = benchmark();
        let b = benchmark();
        assert_eq!(a.kb_tsv, b.kb_tsv);
        assert_eq!(a.corpus_jsonl, b.corpus_jsonl);
        assert_eq!(a.lexicon_tsv, b.lexicon_tsv);
    }

    #[test]
    fn bundled_files_match_generator() {
        let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmark");
        let b = benchmark();
        for (name, expect) in [
            ("kb.tsv", &b.kb_tsv),
            ("train.jsonl", &b.corpus_jsonl),
            ("lexicon.tsv", &b.lexicon_tsv),
        ] {
            let on_disk = std::fs::read_to_string(root.join(name))
                .unwrap_or_else(|e| panic!("{name} missing; run the gen_benchmark example ({e})"));
            assert_eq!(
                on_disk, *expect,
                "{name} is stale; re-run the gen_benchmark example"
            );
        }
    }

    #[test]
    fn adversarial_corpus_shares_surfaces_across_templates() {
        let c = adversarial_corpus();
        assert_eq!(c.len(), 64);
        assert!(validate_annotations(&c).is_empty());
        // Every entity name appears in all eight templates.
        for name in ADVERSARIAL_PEOPLE {
            let uses = c.iter().filter(|r| r.question.contains(name)).count();
            assert_eq!(uses, 8);
        }
    }
}
