//! Scoring and diagnostics: answer-set accuracy/F1/EM, relation recall
//! of retrieved examples, and the recall-vs-accuracy binning used to
//! study how schema coverage drives correctness.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::QuestionRecord;
use crate::kb::AnswerSet;
use crate::sparql::{extract_relations, parse_sparql};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    ParseError,
    ExecError,
    WrongAnswer,
    LlmError,
}

/// Outcome for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionVerdict {
    pub id: String,
    pub predicted_sparql: Option<String>,
    pub predicted_answers: Option<AnswerSet>,
    pub gold_answers: AnswerSet,
    pub correct: bool,
    pub f1: f64,
    pub em: bool,
    /// Defined iff the gold SPARQL is available and parses.
    pub relation_recall: Option<f64>,
    pub failure_kind: Option<FailureKind>,
}

/// One equal-width relation-recall bin over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallBin {
    pub lo: f64,
    pub hi: f64,
    /// Unset for empty bins.
    pub mean_accuracy: Option<f64>,
    pub count: usize,
}

fn normalize(values: &BTreeSet<String>) -> BTreeSet<String> {
    values.iter().map(|v| v.trim().to_lowercase()).collect()
}

/// Compares answer sets after trim+casefold normalization. `correct`
/// and `em` are both exact set equality; `f1 = 2|P∩G| / (|P|+|G|)`.
pub fn score_answers(predicted: &AnswerSet, gold: &AnswerSet) -> (bool, f64, bool) {
    let p = normalize(&predicted.values);
    let g = normalize(&gold.values);
    if p.is_empty() {
        return (false, 0.0, false);
    }
    let inter = p.intersection(&g).count();
    let f1 = if p.len() + g.len() == 0 {
        0.0
    } else {
        2.0 * inter as f64 / (p.len() + g.len()) as f64
    };
    let exact = p == g;
    (exact, f1, exact)
}

/// Fraction of the gold query's relations covered by the union of the
/// example records' gold queries. Counts predicates only. 1.0 when the
/// gold has no relations; `None` when the gold does not parse.
pub fn relation_recall(gold_sparql: &str, example_records: &[&QuestionRecord]) -> Option<f64> {
    let gold_query = parse_sparql(gold_sparql).ok()?;
    let gold_relations = extract_relations(&gold_query);
    if gold_relations.is_empty() {
        return Some(1.0);
    }
    let mut covered: BTreeSet<String> = BTreeSet::new();
    for record in example_records {
        if let Some(sparql) = &record.gold_sparql {
            if let Ok(q) = parse_sparql(sparql) {
                covered.extend(extract_relations(&q));
            }
        }
    }
    let hit = gold_relations.iter().filter(|r| covered.contains(*r)).count();
    Some(hit as f64 / gold_relations.len() as f64)
}

/// Equal-width bins over [0, 1]; a recall of exactly 1.0 lands in the
/// last bin. Verdicts without a defined recall are not binned.
pub fn bin_recall_accuracy(verdicts: &[QuestionVerdict], bin_count: usize) -> Vec<RecallBin> {
    assert!(bin_count >= 2, "bin_count must be at least 2");
    let width = 1.0 / bin_count as f64;
    let mut correct = vec![0usize; bin_count];
    let mut total = vec![0usize; bin_count];
    for v in verdicts {
        let recall = match v.relation_recall {
            Some(r) => r,
            None => continue,
        };
        let bin = ((recall / width) as usize).min(bin_count - 1);
        total[bin] += 1;
        if v.correct {
            correct[bin] += 1;
        }
    }
    (0..bin_count)
        .map(|i| RecallBin {
            lo: i as f64 * width,
            hi: if i + 1 == bin_count { 1.0 } else { (i + 1) as f64 * width },
            mean_accuracy: if total[i] == 0 {
                None
            } else {
                Some(correct[i] as f64 / total[i] as f64)
            },
            count: total[i],
        })
        .collect()
}

/// Aggregate metrics over a verdict list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub em_rate: f64,
}

pub fn aggregate(verdicts: &[QuestionVerdict]) -> Aggregates {
    if verdicts.is_empty() {
        return Aggregates {
            accuracy: 0.0,
            macro_f1: 0.0,
            em_rate: 0.0,
        };
    }
    let n = verdicts.len() as f64;
    Aggregates {
        accuracy: verdicts.iter().filter(|v| v.correct).count() as f64 / n,
        macro_f1: verdicts.iter().map(|v| v.f1).sum::<f64>() / n,
        em_rate: verdicts.iter().filter(|v| v.em).count() as f64 / n,
    }
}

/// Full run outcome: per-question verdicts, aggregates, the recall
/// binning, and a snapshot of the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub verdicts: Vec<QuestionVerdict>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub em_rate: f64,
    pub recall_bins: Vec<RecallBin>,
    pub config_snapshot: serde_json::Value,
    /// Set when a request budget stopped the run before every question.
    pub partial: bool,
}

impl EvalReport {
    pub fn assemble(
        verdicts: Vec<QuestionVerdict>,
        config_snapshot: serde_json::Value,
        partial: bool,
        bin_count: usize,
    ) -> Self {
        let aggregates = aggregate(&verdicts);
        let recall_bins = bin_recall_accuracy(&verdicts, bin_count);
        EvalReport {
            verdicts,
            accuracy: aggregates.accuracy,
            macro_f1: aggregates.macro_f1,
            em_rate: aggregates.em_rate,
            recall_bins,
            config_snapshot,
            partial,
        }
    }
}

/// One verdict per line, JSON.
pub fn write_verdicts_jsonl(verdicts: &[QuestionVerdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&serde_json::to_string(v).expect("verdict serializes"));
        out.push('\n');
    }
    out
}

pub fn read_verdicts_jsonl(text: &str) -> Result<Vec<QuestionVerdict>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Human-readable run summary.
pub fn render_summary(report: &EvalReport) -> String {
    let mut out = String::new();
    let n = report.verdicts.len();
    out.push_str(&format!("questions {n}\n"));
    out.push_str(&format!("accuracy {:.3}\n", report.accuracy));
    out.push_str(&format!("macro_f1 {:.3}\n", report.macro_f1));
    out.push_str(&format!("em_rate {:.3}\n", report.em_rate));
    out.push_str(&format!("partial {}\n", report.partial));

    let mut failures: std::collections::BTreeMap<&str, usize> = Default::default();
    for v in &report.verdicts {
        if let Some(kind) = &v.failure_kind {
            let key = match kind {
                FailureKind::ParseError => "parse_error",
                FailureKind::ExecError => "exec_error",
                FailureKind::WrongAnswer => "wrong_answer",
                FailureKind::LlmError => "llm_error",
            };
            *failures.entry(key).or_default() += 1;
        }
    }
    out.push_str("failures");
    if failures.is_empty() {
        out.push_str(" none\n");
    } else {
        out.push('\n');
        for (kind, count) in failures {
            out.push_str(&format!("  {kind} {count}\n"));
        }
    }

    out.push_str("relation recall (predicates) vs accuracy\n");
    for bin in &report.recall_bins {
        let mean = match bin.mean_accuracy {
            Some(m) => format!("{m:.3}"),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "  [{:.2}, {:.2}{} n={:<4} acc={mean}\n",
            bin.lo,
            bin.hi,
            if bin.hi >= 1.0 { "]" } else { ")" },
            bin.count
        ));
    }
    out
}

/// Plot-friendly two-column form: bin midpoint and mean accuracy.
/// Empty bins are omitted.
pub fn render_recall_bins_tsv(bins: &[RecallBin]) -> String {
    let mut out = String::new();
    for bin in bins {
        if let Some(mean) = bin.mean_accuracy {
            out.push_str(&format!("{:.3}\t{:.6}\n", (bin.lo + bin.hi) / 2.0, mean));
        }
    }
    out
}

/// Sample Pearson correlation; `None` when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn answers(values: &[&str]) -> AnswerSet {
        AnswerSet::from_values(values.iter().map(|s| s.to_string()))
    }

    fn verdict(id: &str, correct: bool, recall: Option<f64>) -> QuestionVerdict {
        QuestionVerdict {
            id: id.to_string(),
            predicted_sparql: None,
            predicted_answers: None,
            gold_answers: answers(&["x"]),
            correct,
            f1: if correct { 1.0 } else { 0.0 },
            em: correct,
            relation_recall: recall,
            failure_kind: None,
        }
    }

    #[test]
    fn identical_single_answer_scores_perfectly() {
        let (correct, f1, em) = score_answers(&answers(&["1996-01-11"]), &answers(&["1996-01-11"]));
        assert!(correct && em);
        assert_eq!(f1, 1.0);
    }

    #[test]
    fn partial_overlap_scores_half_f1() {
        let (correct, f1, em) = score_answers(&answers(&["a", "b"]), &answers(&["b", "c"]));
        assert!(!correct && !em);
        assert_eq!(f1, 0.5);
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let (correct, f1, em) = score_answers(&answers(&[]), &answers(&["a"]));
        assert!(!correct && !em);
        assert_eq!(f1, 0.0);
    }

    #[test]
    fn normalization_is_casefold_and_trim() {
        let (correct, f1, _) = score_answers(&answers(&["  Alice Moreau "]), &answers(&["alice moreau"]));
        assert!(correct);
        assert_eq!(f1, 1.0);
        // No deeper canonicalization: "01" stays distinct from "1".
        let (correct, _, _) = score_answers(&answers(&["01"]), &answers(&["1"]));
        assert!(!correct);
    }

    #[test]
    fn recall_counts_covered_relations() {
        use std::collections::BTreeSet;
        let rec = |sparql: &str| QuestionRecord {
            id: "e".into(),
            question: "q".into(),
            gold_sparql: Some(sparql.into()),
            answers: BTreeSet::new(),
            topic_entity_id: None,
            entity_annotations: None,
        };
        let gold = "SELECT ?x WHERE { ?e <p> ?x . ?e <q> ?y . }";
        let covering_p = rec("ASK { ?a <p> ?b . }");
        let r = relation_recall(gold, &[&covering_p]).unwrap();
        assert_eq!(r, 0.5);

        // Examples that include the gold itself give full recall.
        let full = rec(gold);
        assert_eq!(relation_recall(gold, &[&full]).unwrap(), 1.0);

        // A gold with no relations has vacuous recall 1.0.
        assert_eq!(relation_recall("ASK { ?a ?p ?b . }", &[]).unwrap(), 1.0);

        // Unparseable gold leaves recall undefined.
        assert!(relation_recall("not sparql at all", &[&full]).is_none());
    }

    #[test]
    fn bins_place_one_verdict_each() {
        let verdicts: Vec<QuestionVerdict> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .enumerate()
            .map(|(i, r)| verdict(&format!("q{i}"), true, Some(*r)))
            .collect();
        let bins = bin_recall_accuracy(&verdicts, 5);
        assert_eq!(bins.len(), 5);
        for b in &bins {
            assert_eq!(b.count, 1);
            assert_eq!(b.mean_accuracy, Some(1.0));
        }
    }

    #[test]
    fn full_recall_lands_in_last_bin() {
        let verdicts = vec![verdict("a", true, Some(1.0)), verdict("b", true, Some(1.0))];
        let bins = bin_recall_accuracy(&verdicts, 5);
        assert_eq!(bins[4].count, 2);
        assert_eq!(bins[4].mean_accuracy, Some(1.0));
        for b in &bins[..4] {
            assert_eq!(b.count, 0);
            assert_eq!(b.mean_accuracy, None);
        }
    }

    #[test]
    fn undefined_recall_is_not_binned() {
        let verdicts = vec![verdict("a", true, None), verdict("b", false, Some(0.5))];
        let bins = bin_recall_accuracy(&verdicts, 5);
        let total: usize = bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn aggregates_are_order_independent_and_bounded() {
        let mut verdicts = vec![
            verdict("a", true, Some(1.0)),
            verdict("b", false, Some(0.2)),
            verdict("c", true, Some(0.9)),
        ];
        let forward = aggregate(&verdicts);
        verdicts.reverse();
        let backward = aggregate(&verdicts);
        assert_eq!(forward, backward);
        for value in [forward.accuracy, forward.macro_f1, forward.em_rate] {
            assert!((0.0..=1.0).contains(&value));
        }
        assert!((forward.accuracy - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_answer_correct_iff_em() {
        for (p, g) in [(vec!["a"], vec!["a"]), (vec!["b"], vec!["a"]), (vec!["a", "b"], vec!["a"])] {
            let (correct, _, em) = score_answers(&answers(&p), &answers(&g));
            assert_eq!(correct, em);
        }
    }

    #[test]
    fn verdicts_round_trip_through_jsonl() {
        let verdicts = vec![
            verdict("a", true, Some(1.0)),
            QuestionVerdict {
                id: "b".into(),
                predicted_sparql: Some("not sparql".into()),
                predicted_answers: Some(answers(&["x", "y"])),
                gold_answers: answers(&["x"]),
                correct: false,
                f1: 2.0 / 3.0,
                em: false,
                relation_recall: None,
                failure_kind: Some(FailureKind::WrongAnswer),
            },
        ];
        let text = write_verdicts_jsonl(&verdicts);
        assert_eq!(read_verdicts_jsonl(&text).unwrap(), verdicts);
    }

    #[test]
    fn summary_and_bins_render() {
        let verdicts = vec![verdict("a", true, Some(1.0)), verdict("b", false, Some(0.1))];
        let report = EvalReport::assemble(verdicts, serde_json::json!({"k": 6}), false, 5);
        let summary = render_summary(&report);
        assert!(summary.contains("accuracy 0.500"));
        assert!(summary.contains("relation recall (predicates)"));
        let tsv = render_recall_bins_tsv(&report.recall_bins);
        // Two non-empty bins, one line each, two columns per line.
        assert_eq!(tsv.lines().count(), 2);
        assert!(tsv.lines().all(|l| l.split('\t').count() == 2));
    }

    #[test]
    fn pearson_known_values() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let anti = [8.0, 6.0, 4.0, 2.0];
        assert!((pearson(&xs, &anti).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&xs, &[1.0, 1.0, 1.0, 1.0]).is_none());
    }
}
