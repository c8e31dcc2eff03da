//! Few-shot prompt assembly.
//!
//! A prompt is an instruction, a numbered list of question/SPARQL
//! example pairs, and the input question:
//!
//! ```text
//! <instruction>
//! Input 1: <example question>
//! Output 1: <example SPARQL>
//! ...
//! Input n+1: <question>
//! Output n+1:
//! ```
//!
//! The final `Output n+1: ` line (trailing space, no newline) is where
//! the model continues.

use thiserror::Error;

use crate::dataset::QuestionRecord;

/// Default task instruction used when the caller does not override it.
pub const DEFAULT_INSTRUCTION: &str = "You are given natural questions that could be answered over some complex reasoning steps on one knowledge base. Your task is to convert the given natural questions into SPARQL queries which can be excuted to find out the answer.";

/// A rendered few-shot prompt plus the pieces it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub instruction: String,
    /// (question text, SPARQL text) in retrieval order.
    pub examples: Vec<(String, String)>,
    pub question: String,
    pub rendered: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("example record {0:?} has no gold SPARQL")]
    ExampleWithoutSparql(String),
    #[error("prompt text does not match the expected layout: {0}")]
    Layout(String),
}

/// Renders the prompt. Example order is kept as given (most similar
/// first); `inject_topic_entity` appends `, Topic Entity Id: <id>` to
/// the final input line when the record carries one.
pub fn build_prompt(
    examples: &[&QuestionRecord],
    question: &QuestionRecord,
    instruction: &str,
    inject_topic_entity: bool,
) -> Result<Prompt, PromptError> {
    let mut pairs = Vec::with_capacity(examples.len());
    for ex in examples {
        let sparql = ex
            .gold_sparql
            .as_ref()
            .ok_or_else(|| PromptError::ExampleWithoutSparql(ex.id.clone()))?;
        pairs.push((ex.question.clone(), sparql.clone()));
    }

    let mut rendered = String::from(instruction);
    for (i, (q, s)) in pairs.iter().enumerate() {
        rendered.push_str(&format!("\nInput {}: {q}\nOutput {}: {s}", i + 1, i + 1));
    }
    let final_no = pairs.len() + 1;
    rendered.push_str(&format!("\nInput {final_no}: {}", question.question));
    if inject_topic_entity {
        if let Some(id) = &question.topic_entity_id {
            rendered.push_str(&format!(", Topic Entity Id: {id}"));
        }
    }
    rendered.push_str(&format!("\nOutput {final_no}: "));

    Ok(Prompt {
        instruction: instruction.to_string(),
        examples: pairs,
        question: question.question.clone(),
        rendered,
    })
}

/// Parses a rendered prompt back into (instruction, examples, final
/// input line). Inverse of [`build_prompt`] up to the topic-entity
/// suffix on the final line; used to verify prompt-format conformance.
pub fn parse_prompt(rendered: &str) -> Result<(String, Vec<(String, String)>, String), PromptError> {
    let lines: Vec<&str> = rendered.split('\n').collect();

    let input_marker = |n: usize| format!("Input {n}: ");
    let output_marker = |n: usize| format!("Output {n}: ");

    let first_input = lines
        .iter()
        .position(|l| l.starts_with(&input_marker(1)))
        .ok_or_else(|| PromptError::Layout("no 'Input 1:' line".into()))?;
    let instruction = lines[..first_input].join("\n");

    let mut examples = Vec::new();
    let mut n = 1usize;
    let mut at = first_input;
    loop {
        let input_line = lines
            .get(at)
            .filter(|l| l.starts_with(&input_marker(n)))
            .ok_or_else(|| PromptError::Layout(format!("expected 'Input {n}:' line")))?;
        let question = input_line[input_marker(n).len()..].to_string();

        let output_line = lines
            .get(at + 1)
            .filter(|l| l.starts_with(output_marker(n).trim_end()))
            .ok_or_else(|| PromptError::Layout(format!("expected 'Output {n}:' line")))?;

        let is_last = at + 2 == lines.len();
        if is_last {
            if *output_line != output_marker(n) {
                return Err(PromptError::Layout(format!(
                    "final line must be exactly 'Output {n}: '"
                )));
            }
            return Ok((instruction, examples, question));
        }

        // An example output may span lines until the next input marker.
        let mut sparql = output_line[output_marker(n).len().min(output_line.len())..].to_string();
        let mut next = at + 2;
        while next < lines.len() && !lines[next].starts_with(&input_marker(n + 1)) {
            sparql.push('\n');
            sparql.push_str(lines[next]);
            next += 1;
        }
        if next == lines.len() {
            return Err(PromptError::Layout(format!(
                "no 'Input {}:' line after example {n}",
                n + 1
            )));
        }
        examples.push((question, sparql));
        n += 1;
        at = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn record(id: &str, question: &str, sparql: Option<&str>) -> QuestionRecord {
        QuestionRecord {
            id: id.to_string(),
            question: question.to_string(),
            gold_sparql: sparql.map(|s| s.to_string()),
            answers: BTreeSet::new(),
            topic_entity_id: None,
            entity_annotations: None,
        }
    }

    #[test]
    fn six_examples_render_inputs_one_through_seven() {
        let examples: Vec<QuestionRecord> = (1..=6)
            .map(|i| record(&format!("e{i}"), &format!("question {i}"), Some("ASK { ?a <p> ?b . }")))
            .collect();
        let refs: Vec<&QuestionRecord> = examples.iter().collect();
        let q = record(
            "q",
            "Where was Sabrina (which has Angie Dickinson as a cast member) published on 1996-01-11?",
            None,
        );
        let p = build_prompt(&refs, &q, DEFAULT_INSTRUCTION, false).unwrap();

        let expected = format!(
            "{DEFAULT_INSTRUCTION}\n\
             Input 1: question 1\nOutput 1: ASK {{ ?a <p> ?b . }}\n\
             Input 2: question 2\nOutput 2: ASK {{ ?a <p> ?b . }}\n\
             Input 3: question 3\nOutput 3: ASK {{ ?a <p> ?b . }}\n\
             Input 4: question 4\nOutput 4: ASK {{ ?a <p> ?b . }}\n\
             Input 5: question 5\nOutput 5: ASK {{ ?a <p> ?b . }}\n\
             Input 6: question 6\nOutput 6: ASK {{ ?a <p> ?b . }}\n\
             Input 7: {}\nOutput 7: ",
            q.question
        );
        assert_eq!(p.rendered, expected);
        assert!(p.rendered.ends_with("Output 7: "));
        assert_eq!(p.rendered.matches("Input ").count(), 7);
    }

    #[test]
    fn zero_examples_is_the_zero_shot_layout() {
        let q = record("q", "who wrote it?", None);
        let p = build_prompt(&[], &q, "Translate.", false).unwrap();
        assert_eq!(p.rendered, "Translate.\nInput 1: who wrote it?\nOutput 1: ");
    }

    #[test]
    fn topic_entity_id_is_appended_when_requested() {
        let mut q = record("q", "where is it", None);
        q.topic_entity_id = Some("m.0abc".into());
        let ex = record("e", "sample", Some("ASK { ?a <p> ?b . }"));
        let p = build_prompt(&[&ex], &q, "I.", true).unwrap();
        assert!(p.rendered.contains("Input 2: where is it, Topic Entity Id: m.0abc\n"));
        // Without the flag the id is left out.
        let p2 = build_prompt(&[&ex], &q, "I.", false).unwrap();
        assert!(p2.rendered.contains("Input 2: where is it\n"));
    }

    #[test]
    fn example_without_sparql_is_an_error() {
        let ex = record("bad-ex", "sample", None);
        let q = record("q", "question", None);
        assert_eq!(
            build_prompt(&[&ex], &q, "I.", false).unwrap_err(),
            PromptError::ExampleWithoutSparql("bad-ex".into())
        );
    }

    #[test]
    fn rendering_is_byte_stable() {
        let ex = record("e", "sample", Some("SELECT ?x WHERE { ?a <p> ?x . }"));
        let q = record("q", "question", None);
        let a = build_prompt(&[&ex], &q, DEFAULT_INSTRUCTION, false).unwrap();
        let b = build_prompt(&[&ex], &q, DEFAULT_INSTRUCTION, false).unwrap();
        assert_eq!(a.rendered, b.rendered);
    }

    #[test]
    fn parse_prompt_recovers_example_list() {
        let examples: Vec<QuestionRecord> = (1..=3)
            .map(|i| {
                record(
                    &format!("e{i}"),
                    &format!("question number {i}?"),
                    Some(&format!("SELECT ?x WHERE {{ ?a <p{i}> ?x . }}")),
                )
            })
            .collect();
        let refs: Vec<&QuestionRecord> = examples.iter().collect();
        let q = record("q", "the final question?", None);
        let p = build_prompt(&refs, &q, DEFAULT_INSTRUCTION, false).unwrap();

        let (instruction, parsed, final_q) = parse_prompt(&p.rendered).unwrap();
        assert_eq!(instruction, DEFAULT_INSTRUCTION);
        assert_eq!(parsed, p.examples);
        assert_eq!(final_q, "the final question?");
    }

    #[test]
    fn parse_prompt_handles_multiline_sparql() {
        let ex = record("e", "sample", Some("SELECT ?x\nWHERE { ?a <p> ?x . }"));
        let q = record("q", "final?", None);
        let p = build_prompt(&[&ex], &q, "I.", false).unwrap();
        let (_, parsed, _) = parse_prompt(&p.rendered).unwrap();
        assert_eq!(parsed, vec![("sample".to_string(), "SELECT ?x\nWHERE { ?a <p> ?x . }".to_string())]);
    }

    #[test]
    fn parse_prompt_rejects_truncated_text() {
        let ex = record("e", "sample", Some("ASK { ?a <p> ?b . }"));
        let q = record("q", "final?", None);
        let p = build_prompt(&[&ex], &q, "I.", false).unwrap();
        let truncated = p.rendered.trim_end_matches("Output 2: ");
        assert!(parse_prompt(truncated).is_err());
    }
}
