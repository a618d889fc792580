//! File formats: the vote+prediction dataset, per-question ground truths,
//! experiment results, and JSON helpers for specs and configs.
//!
//! Dataset files are UTF-8 comma-separated text with `>` separating the
//! alternatives of a ranking. A profile file row is
//!
//! ```text
//! domain,question_id,participant_id,vote,prediction_type,prediction_value
//! ```
//!
//! where `prediction_type` is one of `top`, `rank`, or `top_t` and
//! `prediction_value` is, respectively, a single alternative id, a ranking
//! (`a>b>c`), or a comma-joined set (`a,b`). The value is the last field of
//! the row, so the commas of a `top_t` set need no quoting. Alternative ids
//! are arbitrary tokens without commas or `>`; the loader remaps each
//! question's ids to dense indices `0..k` (retaining the mapping) so the
//! aggregation machinery can work with plain rankings.
//!
//! Saves are byte-stable: questions are written in sorted key order with
//! fixed 6-decimal float formatting, so saving the same value twice yields
//! identical bytes, and `load ∘ save` is the identity on the data model.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{de::DeserializeOwned, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Aggregator, ExperimentResult, ResultRow};
use crate::rankings::{PartialRanking, Ranking};
use crate::sp::{PredictionReport, Profile, VoterReport};

/// Header line of a profile dataset file.
pub const PROFILE_HEADER: &str = "domain,question_id,participant_id,vote,prediction_type,prediction_value";
/// Header line of a ground-truth file.
pub const GROUND_TRUTH_HEADER: &str = "domain,question_id,ranking";
/// Header line of an experiment-result file.
pub const RESULT_HEADER: &str = "aggregator,n,mean_kt,ci_lo,ci_hi,trials";

/// `(domain, question_id)`: the unit votes are grouped by.
pub type QuestionKey = (String, String);

/// How a prediction is encoded in a dataset row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionType {
    /// A single alternative believed most likely to rank first.
    Top,
    /// A full ranking of the question's alternatives.
    Rank,
    /// A set of alternatives believed to occupy the top positions.
    TopT,
}

impl PredictionType {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionType::Top => "top",
            PredictionType::Rank => "rank",
            PredictionType::TopT => "top_t",
        }
    }

    fn parse(text: &str, line: usize) -> Result<Self> {
        match text {
            "top" => Ok(PredictionType::Top),
            "rank" => Ok(PredictionType::Rank),
            "top_t" => Ok(PredictionType::TopT),
            other => Err(Error::parse(
                line,
                "prediction_type",
                format!("expected top, rank, or top_t, got {other:?}"),
            )),
        }
    }
}

/// One line of a profile dataset file, still in terms of the file's own
/// alternative ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetRow {
    pub domain: String,
    pub question_id: String,
    pub participant_id: String,
    /// Ranking text, ids separated by `>`.
    pub vote: String,
    pub prediction_type: PredictionType,
    /// Id, ranking text, or comma-joined set, per `prediction_type`.
    pub prediction_value: String,
}

/// One question's parsed reports plus the id mapping the dense indices
/// came from.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedQuestion {
    pub profile: Profile,
    /// Dense index → original alternative id, sorted.
    pub alternatives: Vec<String>,
    /// Participant ids, parallel to `profile.reports()`.
    pub participants: Vec<String>,
}

fn split_ranking_text<'a>(text: &'a str, line: usize, field: &str) -> Result<Vec<&'a str>> {
    let ids: Vec<&str> = text.split('>').collect();
    let mut seen = BTreeSet::new();
    for id in &ids {
        if id.is_empty() {
            return Err(Error::parse(line, field, "empty alternative id"));
        }
        if !seen.insert(*id) {
            return Err(Error::parse(
                line,
                field,
                format!("duplicate alternative `{id}`"),
            ));
        }
    }
    Ok(ids)
}

fn parse_dataset_row(text: &str, line: usize) -> Result<DatasetRow> {
    let fields: Vec<&str> = text.splitn(6, ',').collect();
    if fields.len() != 6 {
        return Err(Error::parse(
            line,
            "row",
            format!("expected 6 comma-separated fields, got {}", fields.len()),
        ));
    }
    for (field, name) in fields[..3].iter().zip(["domain", "question_id", "participant_id"]) {
        if field.is_empty() {
            return Err(Error::parse(line, name, "must be non-empty"));
        }
    }
    let prediction_type = PredictionType::parse(fields[4], line)?;
    split_ranking_text(fields[3], line, "vote")?;
    match prediction_type {
        PredictionType::Top => {
            if fields[5].is_empty() || fields[5].contains(['>', ',']) {
                return Err(Error::parse(
                    line,
                    "prediction_value",
                    "a top prediction is a single alternative id",
                ));
            }
        }
        PredictionType::Rank => {
            split_ranking_text(fields[5], line, "prediction_value")?;
        }
        PredictionType::TopT => {
            let mut seen = BTreeSet::new();
            for id in fields[5].split(',') {
                if id.is_empty() || id.contains('>') {
                    return Err(Error::parse(
                        line,
                        "prediction_value",
                        "a top_t prediction is a comma-joined set of alternative ids",
                    ));
                }
                if !seen.insert(id) {
                    return Err(Error::parse(
                        line,
                        "prediction_value",
                        format!("duplicate alternative `{id}`"),
                    ));
                }
            }
        }
    }
    Ok(DatasetRow {
        domain: fields[0].to_string(),
        question_id: fields[1].to_string(),
        participant_id: fields[2].to_string(),
        vote: fields[3].to_string(),
        prediction_type,
        prediction_value: fields[5].to_string(),
    })
}

/// Parses profile-file text into per-question profiles. See [`load_profiles`].
pub fn parse_profiles(text: &str) -> Result<BTreeMap<QuestionKey, LoadedQuestion>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == PROFILE_HEADER => {}
        _ => {
            return Err(Error::parse(
                1,
                "header",
                format!("expected `{PROFILE_HEADER}`"),
            ))
        }
    }
    // group rows (with their line numbers, for later errors) per question
    let mut grouped: BTreeMap<QuestionKey, Vec<(usize, DatasetRow)>> = BTreeMap::new();
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let row = parse_dataset_row(raw, line)?;
        if !seen.insert((
            row.domain.clone(),
            row.question_id.clone(),
            row.participant_id.clone(),
        )) {
            return Err(Error::parse(
                line,
                "participant_id",
                format!(
                    "participant `{}` reported twice for question {}/{}",
                    row.participant_id, row.domain, row.question_id
                ),
            ));
        }
        grouped
            .entry((row.domain.clone(), row.question_id.clone()))
            .or_default()
            .push((line, row));
    }

    let mut out = BTreeMap::new();
    for (key, rows) in grouped {
        out.insert(key, build_question(&rows)?);
    }
    Ok(out)
}

fn build_question(rows: &[(usize, DatasetRow)]) -> Result<LoadedQuestion> {
    // the first vote fixes the question's alternative set; every other vote
    // must rank exactly that set (the aggregation profile requires it)
    let (first_line, first) = &rows[0];
    let alternatives: Vec<String> = {
        let mut ids: Vec<String> = split_ranking_text(&first.vote, *first_line, "vote")?
            .into_iter()
            .map(str::to_string)
            .collect();
        ids.sort_unstable();
        ids
    };
    let index: BTreeMap<&str, usize> = alternatives
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let k = alternatives.len();

    let to_dense = |ids: &[&str], line: usize, field: &str| -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                index.get(id).copied().ok_or_else(|| {
                    Error::parse(
                        line,
                        field,
                        format!("alternative `{id}` is not part of this question"),
                    )
                })
            })
            .collect()
    };

    let mut reports = Vec::with_capacity(rows.len());
    let mut participants = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let vote_ids = split_ranking_text(&row.vote, *line, "vote")?;
        if vote_ids.len() != k {
            return Err(Error::parse(
                *line,
                "vote",
                format!(
                    "vote ranks {} alternative(s) but this question has {k}",
                    vote_ids.len()
                ),
            ));
        }
        let vote = PartialRanking::new(to_dense(&vote_ids, *line, "vote")?, k)?;
        let prediction = match row.prediction_type {
            PredictionType::Top => {
                let dense = to_dense(&[row.prediction_value.as_str()], *line, "prediction_value")?;
                PredictionReport::Top(dense[0])
            }
            PredictionType::Rank => {
                let ids = split_ranking_text(&row.prediction_value, *line, "prediction_value")?;
                if ids.len() != k {
                    return Err(Error::parse(
                        *line,
                        "prediction_value",
                        format!(
                            "rank prediction ranks {} alternative(s) but this question has {k}",
                            ids.len()
                        ),
                    ));
                }
                PredictionReport::ModalRanking(PartialRanking::new(
                    to_dense(&ids, *line, "prediction_value")?,
                    k,
                )?)
            }
            PredictionType::TopT => {
                let ids: Vec<&str> = row.prediction_value.split(',').collect();
                PredictionReport::TopT(to_dense(&ids, *line, "prediction_value")?)
            }
        };
        reports.push(VoterReport { vote, prediction });
        participants.push(row.participant_id.clone());
    }
    Ok(LoadedQuestion {
        profile: Profile::new_full(k, reports)?,
        alternatives,
        participants,
    })
}

/// I/O errors re-wrapped to name the file involved.
fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| io_with_path(path, e))
}

fn write_file(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| io_with_path(path, e))
}

fn io_with_path(path: &Path, err: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        err.kind(),
        format!("{}: {err}", path.display()),
    ))
}

/// Loads a profile dataset file: rows grouped by `(domain, question_id)`,
/// alternative ids remapped to dense indices per question (mapping
/// retained). Malformed rows are reported with their line number and field;
/// a participant may report at most once per question.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<BTreeMap<QuestionKey, LoadedQuestion>> {
    parse_profiles(&read_file(path)?)
}

fn check_token(token: &str, what: &str, ranking_id: bool) -> Result<()> {
    let bad = token.is_empty()
        || token.contains(',')
        || token.contains('\n')
        || (ranking_id && token.contains('>'));
    if bad {
        return Err(Error::InvalidParameter(format!(
            "{what} `{token}` cannot be written to a dataset file"
        )));
    }
    Ok(())
}

/// Renders per-question profiles as profile-file text. Inverse of
/// [`parse_profiles`]; byte-stable (sorted question keys, reports in
/// stored order).
pub fn profiles_csv(questions: &BTreeMap<QuestionKey, LoadedQuestion>) -> Result<String> {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for ((domain, question_id), q) in questions {
        check_token(domain, "domain", false)?;
        check_token(question_id, "question id", false)?;
        for id in &q.alternatives {
            check_token(id, "alternative id", true)?;
        }
        if q.participants.len() != q.profile.reports().len() {
            return Err(Error::DimensionMismatch {
                expected: q.profile.reports().len(),
                got: q.participants.len(),
            });
        }
        let id_of = |dense: usize| q.alternatives[dense].as_str();
        let ranking_text = |order: &[usize]| -> String {
            order.iter().map(|&a| id_of(a)).collect::<Vec<_>>().join(">")
        };
        for (report, participant) in q.profile.reports().iter().zip(&q.participants) {
            check_token(participant, "participant id", false)?;
            let (ptype, pvalue) = match &report.prediction {
                PredictionReport::Top(a) => (PredictionType::Top, id_of(*a).to_string()),
                PredictionReport::ModalRanking(p) => {
                    (PredictionType::Rank, ranking_text(p.as_slice()))
                }
                PredictionReport::TopT(ts) => (
                    PredictionType::TopT,
                    ts.iter().map(|&a| id_of(a)).collect::<Vec<_>>().join(","),
                ),
                PredictionReport::FullPosterior(_) => {
                    return Err(Error::Precondition(
                        "full-posterior predictions have no dataset-file encoding".into(),
                    ))
                }
            };
            let _ = writeln!(
                out,
                "{domain},{question_id},{participant},{},{},{pvalue}",
                ranking_text(report.vote.as_slice()),
                ptype.as_str(),
            );
        }
    }
    Ok(out)
}

/// Writes per-question profiles to a file. See [`profiles_csv`].
pub fn save_profiles(
    questions: &BTreeMap<QuestionKey, LoadedQuestion>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_file(path, &profiles_csv(questions)?)
}

/// Parses ground-truth text: one ranking (in original alternative ids) per
/// `(domain, question_id)`.
pub fn parse_ground_truths(text: &str) -> Result<BTreeMap<QuestionKey, Vec<String>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == GROUND_TRUTH_HEADER => {}
        _ => {
            return Err(Error::parse(
                1,
                "header",
                format!("expected `{GROUND_TRUTH_HEADER}`"),
            ))
        }
    }
    let mut out = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.splitn(3, ',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line,
                "row",
                format!("expected 3 comma-separated fields, got {}", fields.len()),
            ));
        }
        for (field, name) in fields[..2].iter().zip(["domain", "question_id"]) {
            if field.is_empty() {
                return Err(Error::parse(line, name, "must be non-empty"));
            }
        }
        let ranking: Vec<String> = split_ranking_text(fields[2], line, "ranking")?
            .into_iter()
            .map(str::to_string)
            .collect();
        match out.entry((fields[0].to_string(), fields[1].to_string())) {
            Entry::Vacant(v) => {
                v.insert(ranking);
            }
            Entry::Occupied(_) => {
                return Err(Error::parse(
                    line,
                    "question_id",
                    format!(
                        "question {}/{} has two ground-truth rows",
                        fields[0], fields[1]
                    ),
                ))
            }
        }
    }
    Ok(out)
}

/// Loads a ground-truth file. See [`parse_ground_truths`].
pub fn load_ground_truths(path: impl AsRef<Path>) -> Result<BTreeMap<QuestionKey, Vec<String>>> {
    parse_ground_truths(&read_file(path)?)
}

/// Renders ground truths as file text; inverse of [`parse_ground_truths`].
pub fn ground_truths_csv(truths: &BTreeMap<QuestionKey, Vec<String>>) -> Result<String> {
    let mut out = String::from(GROUND_TRUTH_HEADER);
    out.push('\n');
    for ((domain, question_id), ranking) in truths {
        check_token(domain, "domain", false)?;
        check_token(question_id, "question id", false)?;
        for id in ranking {
            check_token(id, "alternative id", true)?;
        }
        let _ = writeln!(out, "{domain},{question_id},{}", ranking.join(">"));
    }
    Ok(out)
}

/// Writes ground truths to a file. See [`ground_truths_csv`].
pub fn save_ground_truths(
    truths: &BTreeMap<QuestionKey, Vec<String>>,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_file(path, &ground_truths_csv(truths)?)
}

/// Pairs every loaded question with its ground truth as a dense [`Ranking`],
/// in sorted question-key order — the shape the collected-data experiment
/// runner consumes. Every question must have a ground truth ranking exactly
/// its alternative set; extra ground truths are ignored.
pub fn join_ground_truths(
    questions: &BTreeMap<QuestionKey, LoadedQuestion>,
    truths: &BTreeMap<QuestionKey, Vec<String>>,
) -> Result<Vec<(Profile, Ranking)>> {
    let mut out = Vec::with_capacity(questions.len());
    for ((domain, question_id), q) in questions {
        let truth = truths.get(&(domain.clone(), question_id.clone())).ok_or_else(|| {
            Error::Precondition(format!("no ground truth for question {domain}/{question_id}"))
        })?;
        let dense = truth
            .iter()
            .map(|id| {
                q.alternatives
                    .binary_search_by(|a| a.as_str().cmp(id.as_str()))
                    .map_err(|_| {
                        Error::Precondition(format!(
                            "ground truth for {domain}/{question_id} names `{id}`, which is not \
                             among the question's alternatives"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        if dense.len() != q.alternatives.len() {
            return Err(Error::Precondition(format!(
                "ground truth for {domain}/{question_id} ranks {} of {} alternatives",
                dense.len(),
                q.alternatives.len()
            )));
        }
        out.push((q.profile.clone(), Ranking::new(dense)?));
    }
    Ok(out)
}

/// Writes an experiment result as CSV (header plus one row per cell).
/// Metadata notes are not part of the CSV; surface them separately.
pub fn save_results(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    write_file(path, &result.to_csv())
}

/// Parses result CSV back into an [`ExperimentResult`] (with empty
/// metadata). Floats are read back at the file's 6-decimal precision.
pub fn parse_results(text: &str) -> Result<ExperimentResult> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == RESULT_HEADER => {}
        _ => {
            return Err(Error::parse(
                1,
                "header",
                format!("expected `{RESULT_HEADER}`"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                line,
                "row",
                format!("expected 6 comma-separated fields, got {}", fields.len()),
            ));
        }
        let aggregator = Aggregator::from_str(fields[0])
            .map_err(|e| Error::parse(line, "aggregator", e.to_string()))?;
        let n: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(line, "n", format!("not a count: {:?}", fields[1])))?;
        let mut floats = [0.0f64; 3];
        for (slot, (field, name)) in floats
            .iter_mut()
            .zip(fields[2..5].iter().zip(["mean_kt", "ci_lo", "ci_hi"]))
        {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(line, name, format!("not a finite number: {field:?}"))
                })?;
        }
        let trials: usize = fields[5]
            .parse()
            .map_err(|_| Error::parse(line, "trials", format!("not a count: {:?}", fields[5])))?;
        rows.push(ResultRow {
            aggregator,
            n,
            mean_kt: floats[0],
            ci_lo: floats[1],
            ci_hi: floats[2],
            trials,
        });
    }
    Ok(ExperimentResult {
        rows,
        metadata: Vec::new(),
    })
}

/// Loads a result CSV. See [`parse_results`].
pub fn load_results(path: impl AsRef<Path>) -> Result<ExperimentResult> {
    parse_results(&read_file(path)?)
}

/// Reads a JSON value (model spec, experiment config) from a file.
pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&read_file(path)?)?)
}

/// Writes a JSON value pretty-printed, with a trailing newline.
pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}
