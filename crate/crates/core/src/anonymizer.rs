//! Entity anonymization: replaces mentions with typed, numbered
//! placeholders like `[WORK_OF_ART_0]` so retrieval keys on question
//! structure instead of entity surfaces.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::dataset::{char_slice, EntitySpan, EntityType};

/// A question with entity mentions replaced by placeholders, plus the
/// mapping needed to undo the substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnonymizedQuestion {
    pub text: String,
    /// (placeholder, original surface, entity type), in order of first
    /// appearance.
    pub mapping: Vec<(String, String, EntityType)>,
}

impl AnonymizedQuestion {
    /// Substitutes every placeholder back; inverse of [`anonymize`].
    pub fn deanonymize(&self) -> String {
        let mut text = self.text.clone();
        for (placeholder, surface, _) in &self.mapping {
            text = text.replacen(placeholder, surface, 1);
        }
        text
    }
}

#[derive(Debug, Error)]
pub enum AnonymizeError {
    #[error("spans {a_start}..{a_end} and {b_start}..{b_end} overlap")]
    OverlappingSpans {
        a_start: usize,
        a_end: usize,
        b_start: usize,
        b_end: usize,
    },
    #[error("span {start}..{end} out of bounds for question of length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon line {line}: {reason}")]
    LexiconFormat { line: usize, reason: String },
}

/// Replaces each span with `[TYPE_i]`, counting `i` per entity type in
/// left-to-right span order. Text outside the spans is untouched.
pub fn anonymize(
    question: &str,
    spans: &[EntitySpan],
) -> Result<AnonymizedQuestion, AnonymizeError> {
    let n_chars = question.chars().count();
    let mut ordered: Vec<&EntitySpan> = spans.iter().collect();
    ordered.sort_by_key(|s| (s.start, s.end));
    for s in &ordered {
        if s.start >= s.end || s.end > n_chars {
            return Err(AnonymizeError::SpanOutOfBounds {
                start: s.start,
                end: s.end,
                len: n_chars,
            });
        }
    }
    for pair in ordered.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(AnonymizeError::OverlappingSpans {
                a_start: pair[0].start,
                a_end: pair[0].end,
                b_start: pair[1].start,
                b_end: pair[1].end,
            });
        }
    }

    let mut counters: BTreeMap<EntityType, usize> = BTreeMap::new();
    let mut text = String::new();
    let mut mapping = Vec::with_capacity(ordered.len());
    let mut cursor = 0usize;
    for s in ordered {
        text.push_str(&char_slice(question, cursor, s.start));
        let index = counters.entry(s.entity_type).or_insert(0);
        let placeholder = format!("[{}_{}]", s.entity_type, *index);
        *index += 1;
        text.push_str(&placeholder);
        mapping.push((
            placeholder,
            char_slice(question, s.start, s.end),
            s.entity_type,
        ));
        cursor = s.end;
    }
    text.push_str(&char_slice(question, cursor, n_chars));
    Ok(AnonymizedQuestion { text, mapping })
}

/// Surface-to-type lexicon backing the offline annotator.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<(String, EntityType)>,
}

impl Gazetteer {
    pub fn new(entries: Vec<(String, EntityType)>) -> Self {
        let mut entries = entries;
        // Longest surfaces first so greedy matching prefers them.
        entries.sort_by(|a, b| {
            b.0.chars()
                .count()
                .cmp(&a.0.chars().count())
                .then_with(|| a.0.cmp(&b.0))
        });
        Gazetteer { entries }
    }

    /// Loads a tab-separated `surface<TAB>TYPE` file, one entry per line.
    pub fn load(path: &Path) -> Result<Self, AnonymizeError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_content(&text)
    }

    pub fn from_str_content(text: &str) -> Result<Self, AnonymizeError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, '\t');
            let surface = parts.next().unwrap_or("");
            let ty = parts.next().ok_or_else(|| AnonymizeError::LexiconFormat {
                line: idx + 1,
                reason: "expected surface<TAB>TYPE".into(),
            })?;
            if surface.is_empty() {
                return Err(AnonymizeError::LexiconFormat {
                    line: idx + 1,
                    reason: "empty surface".into(),
                });
            }
            let entity_type: EntityType =
                ty.trim().parse().map_err(|_| AnonymizeError::LexiconFormat {
                    line: idx + 1,
                    reason: format!("unknown entity type {ty:?}"),
                })?;
            entries.push((surface.to_string(), entity_type));
        }
        Ok(Gazetteer::new(entries))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Greedy left-to-right annotator: at each position the longest lexicon
/// surface that matches wins, and matching resumes past it.
pub fn gazetteer_annotate(question: &str, lexicon: &Gazetteer) -> Vec<EntitySpan> {
    let chars: Vec<char> = question.chars().collect();
    let mut spans = Vec::new();
    let mut pos = 0usize;
    while pos < chars.len() {
        let mut matched: Option<(usize, EntityType)> = None;
        for (surface, ty) in &lexicon.entries {
            let s_chars: Vec<char> = surface.chars().collect();
            if pos + s_chars.len() <= chars.len() && chars[pos..pos + s_chars.len()] == s_chars[..]
            {
                matched = Some((s_chars.len(), *ty));
                break; // entries are longest-first
            }
        }
        match matched {
            Some((len, ty)) => {
                spans.push(EntitySpan {
                    start: pos,
                    end: pos + len,
                    entity_type: ty,
                    surface: chars[pos..pos + len].iter().collect(),
                });
                pos += len;
            }
            None => pos += 1,
        }
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(q: &str, start: usize, end: usize, ty: EntityType) -> EntitySpan {
        EntitySpan::from_offsets(q, start, end, ty).unwrap()
    }

    #[test]
    fn two_works_get_numbered_placeholders() {
        let q = "Which movie is shorter, The Greatest Story Ever Told or Rhinestone?";
        let spans = vec![
            span(q, 24, 52, EntityType::WorkOfArt),
            span(q, 56, 66, EntityType::WorkOfArt),
        ];
        let anon = anonymize(q, &spans).unwrap();
        assert_eq!(
            anon.text,
            "Which movie is shorter, [WORK_OF_ART_0] or [WORK_OF_ART_1]?"
        );
        assert_eq!(anon.deanonymize(), q);
    }

    #[test]
    fn no_spans_is_identity() {
        let anon = anonymize("plain question?", &[]).unwrap();
        assert_eq!(anon.text, "plain question?");
        assert!(anon.mapping.is_empty());
        // Idempotent on its own output when given no spans.
        let again = anonymize(&anon.text, &[]).unwrap();
        assert_eq!(again.text, anon.text);
    }

    #[test]
    fn counters_are_per_type() {
        let q = "Did Alice direct Titanic?";
        let spans = vec![
            span(q, 4, 9, EntityType::Person),
            span(q, 17, 24, EntityType::WorkOfArt),
        ];
        let anon = anonymize(q, &spans).unwrap();
        assert_eq!(anon.text, "Did [PERSON_0] direct [WORK_OF_ART_0]?");
        assert_eq!(anon.mapping.len(), 2);
        assert_eq!(anon.mapping[0].1, "Alice");
    }

    #[test]
    fn surface_swap_of_same_type_gives_identical_text() {
        let q1 = "Did Alice direct Titanic?";
        let q2 = "Did Brian direct Gravity?";
        let s1 = vec![
            span(q1, 4, 9, EntityType::Person),
            span(q1, 17, 24, EntityType::WorkOfArt),
        ];
        let s2 = vec![
            span(q2, 4, 9, EntityType::Person),
            span(q2, 17, 24, EntityType::WorkOfArt),
        ];
        assert_eq!(anonymize(q1, &s1).unwrap().text, anonymize(q2, &s2).unwrap().text);
    }

    #[test]
    fn overlapping_spans_rejected() {
        let q = "Alice Smith spoke";
        let spans = vec![
            span(q, 0, 5, EntityType::Person),
            span(q, 3, 11, EntityType::Person),
        ];
        assert!(matches!(
            anonymize(q, &spans),
            Err(AnonymizeError::OverlappingSpans { .. })
        ));
    }

    #[test]
    fn gazetteer_single_match() {
        let lex = Gazetteer::from_str_content("Titanic\tWORK_OF_ART\n").unwrap();
        let spans = gazetteer_annotate("Did Alice direct Titanic?", &lex);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].surface, "Titanic");
        assert_eq!(spans[0].entity_type, EntityType::WorkOfArt);
    }

    #[test]
    fn gazetteer_longest_match_wins() {
        let lex = Gazetteer::from_str_content("New York\tGPE\nYork\tGPE\n").unwrap();
        let spans = gazetteer_annotate("in New York", &lex);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].surface, "New York");
        assert_eq!((spans[0].start, spans[0].end), (3, 11));
    }

    #[test]
    fn empty_lexicon_yields_no_spans() {
        let lex = Gazetteer::default();
        assert!(gazetteer_annotate("anything at all", &lex).is_empty());
    }

    #[test]
    fn lexicon_rejects_bad_lines() {
        assert!(Gazetteer::from_str_content("no-tab-here\n").is_err());
        assert!(Gazetteer::from_str_content("x\tNOT_A_TYPE\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        // Random question text plus a random set of disjoint spans.
        fn question_with_spans() -> impl Strategy<Value = (String, Vec<EntitySpan>)> {
            ("[a-zA-Z ?,]{10,60}", proptest::collection::vec((0usize..60, 1usize..6, 0usize..3), 0..4))
                .prop_map(|(q, raw)| {
                    let n = q.chars().count();
                    let types = [EntityType::Person, EntityType::WorkOfArt, EntityType::Gpe];
                    let mut picked: Vec<(usize, usize, EntityType)> = Vec::new();
                    for (start, len, ty) in raw {
                        let start = start % n.max(1);
                        let end = (start + len).min(n);
                        if start >= end {
                            continue;
                        }
                        if picked.iter().any(|&(s, e, _)| start < e && s < end) {
                            continue;
                        }
                        picked.push((start, end, types[ty]));
                    }
                    picked.sort_by_key(|&(s, _, _)| s);
                    let spans = picked
                        .into_iter()
                        .map(|(s, e, ty)| EntitySpan::from_offsets(&q, s, e, ty).unwrap())
                        .collect();
                    (q, spans)
                })
        }

        proptest! {
            #[test]
            fn deanonymize_round_trips((q, spans) in question_with_spans()) {
                let anon = anonymize(&q, &spans).unwrap();
                prop_assert_eq!(anon.deanonymize(), q);
            }

            #[test]
            fn placeholders_appear_once_each((q, spans) in question_with_spans()) {
                let anon = anonymize(&q, &spans).unwrap();
                for (placeholder, _, _) in &anon.mapping {
                    prop_assert_eq!(anon.text.matches(placeholder.as_str()).count(), 1);
                }
            }
        }
    }
}
