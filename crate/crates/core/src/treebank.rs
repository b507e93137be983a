//! CoNLL-X / CoNLL-U ingestion and per-sentence crossing statistics.
//!
//! Only the ID, FORM, POS (column 4) and HEAD (column 7) columns are read.
//! Head links are undirected into a [`Tree`]; the root's link to `0` yields no
//! edge. The observed word order is the identity arrangement. Malformed
//! sentences never stop the stream: they come back with a [`SkipReason`].

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{count_crossings, LinearArrangement};
use crate::random_lab::estimate_expected_crossings;
use crate::rational::serde_pq;
use crate::theory;
use crate::tree::Tree;
use crate::{format_pq, Rational};

/// Why a sentence produced no statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SkipReason {
    MultipleRoots,
    CycleDetected,
    MissingHead,
    NonIntegerIndex,
    /// Token IDs are integers but not `1..=n` in order.
    BadIndexSequence,
    PunctRemovalDisconnects,
    EmptySentence,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("I/O: {0}")]
    Io(#[from] io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    /// Column 4: UPOS in CoNLL-U, CPOSTAG in CoNLL-X.
    pub pos: String,
    /// `0` marks the root.
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub sentence_id: String,
    pub tokens: Vec<Token>,
    pub tree: Option<Tree>,
    pub natural: Option<LinearArrangement>,
    pub skipped_reason: Option<SkipReason>,
}

impl SentenceRecord {
    fn skipped(sentence_id: String, tokens: Vec<Token>, reason: SkipReason) -> Self {
        SentenceRecord {
            sentence_id,
            tokens,
            tree: None,
            natural: None,
            skipped_reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Remove punctuation tokens before building the tree.
    pub drop_punct: bool,
}

/// Whether a token counts as punctuation: UPOS `PUNCT`, or (for CoNLL-X
/// tagsets) a form made only of punctuation characters.
pub fn is_punct(token: &Token) -> bool {
    if token.pos == "PUNCT" {
        return true;
    }
    !token.form.is_empty()
        && token.form.chars().all(|c| {
            c.is_ascii_punctuation()
                || matches!(
                    c,
                    '«' | '»'
                        | '‹'
                        | '›'
                        | '“'
                        | '”'
                        | '„'
                        | '‘'
                        | '’'
                        | '‚'
                        | '–'
                        | '—'
                        | '…'
                        | '¿'
                        | '¡'
                        | '·'
                        | '。'
                        | '、'
                        | '，'
                        | '：'
                        | '；'
                        | '！'
                        | '？'
                )
        })
}

/// Streams sentences from CoNLL text.
pub fn parse_conll<R: BufRead>(input: R, options: ParseOptions) -> ConllReader<R> {
    ConllReader {
        lines: input.lines(),
        options,
        ordinal: 0,
    }
}

/// Opens a CoNLL file, decompressing it when it starts with the gzip magic.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let read = file.read(&mut magic)?;
    let head = io::Cursor::new(magic[..read].to_vec());
    let stream = head.chain(file);
    if read == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(stream))))
    } else {
        Ok(Box::new(BufReader::new(stream)))
    }
}

pub struct ConllReader<R> {
    lines: io::Lines<R>,
    options: ParseOptions,
    ordinal: usize,
}

impl<R: BufRead> Iterator for ConllReader<R> {
    type Item = io::Result<SentenceRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut comments = Vec::new();
        let mut rows = Vec::new();
        loop {
            match self.lines.next() {
                Some(Ok(line)) => {
                    let line = line.trim_end_matches(['\r', '\n']);
                    if line.trim().is_empty() {
                        if rows.is_empty() && comments.is_empty() {
                            continue;
                        }
                        break;
                    }
                    if line.starts_with('#') {
                        comments.push(line.to_string());
                    } else {
                        rows.push(line.to_string());
                    }
                }
                Some(Err(e)) => return Some(Err(e)),
                None => break,
            }
        }
        if rows.is_empty() && comments.is_empty() {
            return None;
        }
        self.ordinal += 1;
        let id = comments
            .iter()
            .find_map(|c| {
                let (key, value) = c.trim_start_matches('#').split_once('=')?;
                (key.trim() == "sent_id").then(|| value.trim().to_string())
            })
            .unwrap_or_else(|| format!("s{}", self.ordinal));
        Some(Ok(build_record(id, &rows, self.options)))
    }
}

fn split_columns(row: &str) -> Vec<&str> {
    if row.contains('\t') {
        row.split('\t').collect()
    } else {
        row.split_whitespace().collect()
    }
}

fn build_record(sentence_id: String, rows: &[String], options: ParseOptions) -> SentenceRecord {
    let mut tokens = Vec::new();
    let mut reason = None;
    for row in rows {
        let cols = split_columns(row);
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let Ok(index) = id.parse::<usize>() else {
            reason.get_or_insert(SkipReason::NonIntegerIndex);
            continue;
        };
        let head = cols.get(6).and_then(|h| h.parse::<usize>().ok());
        if head.is_none() {
            reason.get_or_insert(SkipReason::MissingHead);
        }
        tokens.push(Token {
            index,
            form: cols.get(1).unwrap_or(&"_").to_string(),
            pos: cols.get(3).unwrap_or(&"_").to_string(),
            head: head.unwrap_or(0),
        });
    }
    if let Some(reason) = reason {
        return SentenceRecord::skipped(sentence_id, tokens, reason);
    }
    if let Err(reason) = validate_heads(&tokens) {
        return SentenceRecord::skipped(sentence_id, tokens, reason);
    }

    let kept: Vec<&Token> = if options.drop_punct {
        tokens.iter().filter(|t| !is_punct(t)).collect()
    } else {
        tokens.iter().collect()
    };
    if kept.is_empty() {
        return SentenceRecord::skipped(sentence_id, tokens, SkipReason::EmptySentence);
    }
    // Old index -> new index, 0 for removed tokens.
    let mut renumber = vec![0usize; tokens.len() + 1];
    for (new, t) in kept.iter().enumerate() {
        renumber[t.index] = new + 1;
    }
    let mut edges = Vec::with_capacity(kept.len());
    for t in &kept {
        if t.head == 0 {
            continue;
        }
        let head = renumber[t.head];
        if head == 0 {
            return SentenceRecord::skipped(
                sentence_id,
                tokens,
                SkipReason::PunctRemovalDisconnects,
            );
        }
        edges.push((renumber[t.index], head));
    }
    let Ok(tree) = Tree::new(kept.len(), &edges) else {
        return SentenceRecord::skipped(sentence_id, tokens, SkipReason::PunctRemovalDisconnects);
    };
    let natural = LinearArrangement::identity(tree.n());
    SentenceRecord {
        sentence_id,
        tokens,
        tree: Some(tree),
        natural: Some(natural),
        skipped_reason: None,
    }
}

/// Checks that head links form a single-rooted tree over `1..=n`.
fn validate_heads(tokens: &[Token]) -> Result<(), SkipReason> {
    let n = tokens.len();
    if n == 0 {
        return Err(SkipReason::EmptySentence);
    }
    if tokens.iter().enumerate().any(|(i, t)| t.index != i + 1) {
        return Err(SkipReason::BadIndexSequence);
    }
    if tokens.iter().any(|t| t.head > n) {
        return Err(SkipReason::MissingHead);
    }
    if tokens.iter().filter(|t| t.head == 0).count() > 1 {
        return Err(SkipReason::MultipleRoots);
    }
    // 0 = unvisited, 1 = on the current path, 2 = reaches the root.
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            v = tokens[v - 1].head;
        }
        if state[v] == 1 {
            return Err(SkipReason::CycleDetected);
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

/// Encodes a tree as a CoNLL-U sentence with heads pointing towards `root`.
pub fn tree_to_conll(tree: &Tree, root: usize, sentence_id: &str) -> String {
    let n = tree.n();
    let mut neighbors = vec![Vec::new(); n + 1];
    for &(u, v) in tree.edges() {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    let mut head = vec![usize::MAX; n + 1];
    head[root] = 0;
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &y in &neighbors[x] {
            if head[y] == usize::MAX {
                head[y] = x;
                stack.push(y);
            }
        }
    }
    let mut out = format!("# sent_id = {sentence_id}\n");
    for (v, &h) in head.iter().enumerate().skip(1) {
        let deprel = if h == 0 { "root" } else { "dep" };
        out.push_str(&format!("{v}\tw{v}\t_\tX\t_\t_\t{h}\t{deprel}\t_\t_\n"));
    }
    out.push('\n');
    out
}

/// Observed and expected crossing statistics of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceStats {
    pub n: usize,
    #[serde(with = "serde_pq")]
    pub k2_moment: Rational,
    pub c_observed: u64,
    #[serde(with = "serde_pq")]
    pub c_expected: Rational,
    #[serde(with = "serde_pq")]
    pub c_pairs: Rational,
    #[serde(with = "serde_pq")]
    pub mean_d_observed: Rational,
    #[serde(with = "serde_pq")]
    pub e_d: Rational,
    /// `c_observed / c_expected`; `None` when nothing can cross.
    pub ratio_c: Option<f64>,
    pub planar: bool,
}

pub fn sentence_stats(rec: &SentenceRecord) -> Result<SentenceStats, SkipReason> {
    if let Some(reason) = rec.skipped_reason {
        return Err(reason);
    }
    let tree = rec.tree.as_ref().ok_or(SkipReason::EmptySentence)?;
    let natural = rec.natural.as_ref().ok_or(SkipReason::EmptySentence)?;
    let observed = count_crossings(tree, natural).expect("natural order matches the tree");
    let c_expected = theory::expected_crossings(tree);
    let ratio_c = (c_expected != Rational::from_integer(0)).then(|| {
        observed.crossings as f64 / (*c_expected.numer() as f64 / *c_expected.denom() as f64)
    });
    Ok(SentenceStats {
        n: tree.n(),
        k2_moment: tree.degree_second_moment(),
        c_observed: observed.crossings,
        c_expected,
        c_pairs: theory::c_pairs(tree),
        mean_d_observed: observed.mean_distance,
        e_d: theory::expected_mean_distance(tree.n()),
        ratio_c,
        planar: observed.planar,
    })
}

pub const CSV_HEADER: [&str; 14] = [
    "sentence_id",
    "n",
    "k2_num",
    "k2_den",
    "C",
    "EC_num",
    "EC_den",
    "Cpairs",
    "meand_num",
    "meand_den",
    "Ed_num",
    "Ed_den",
    "planar",
    "skipped_reason",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportOptions {
    /// Monte Carlo `(samples, seed)` for per-sentence dispersion of `C`.
    pub dispersion: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthRow {
    pub n: usize,
    pub sentences: u64,
    pub mean_k2: f64,
    pub mean_c: f64,
    pub mean_ec: f64,
}

/// Where an observed `C` sits in its sentence's random-order distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    pub sentence_id: String,
    pub c_observed: u64,
    pub mc_mean: f64,
    pub mc_sd: f64,
    /// `(C - E[C]) / sd`; absent when the sample shows no spread.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub sentences: u64,
    pub parsed: u64,
    pub skipped: u64,
    pub skipped_by_reason: BTreeMap<SkipReason, u64>,
    pub per_n: Vec<LengthRow>,
    pub total_c_observed: u64,
    #[serde(with = "serde_pq")]
    pub total_c_expected: Rational,
    pub total_c_expected_float: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<Vec<Dispersion>>,
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Writes one CSV row per sentence, in input order, and tallies the corpus.
pub fn corpus_report<I, W>(
    records: I,
    csv_out: W,
    options: ReportOptions,
) -> Result<CorpusSummary, TreebankError>
where
    I: IntoIterator<Item = io::Result<SentenceRecord>>,
    W: Write,
{
    let mut writer = csv::Writer::from_writer(csv_out);
    writer.write_record(CSV_HEADER)?;

    let mut summary = CorpusSummary {
        sentences: 0,
        parsed: 0,
        skipped: 0,
        skipped_by_reason: BTreeMap::new(),
        per_n: Vec::new(),
        total_c_observed: 0,
        total_c_expected: Rational::from_integer(0),
        total_c_expected_float: 0.0,
        dispersion: options.dispersion.map(|_| Vec::new()),
    };
    // n -> (count, sum k2, sum C, sum E[C])
    let mut by_n: BTreeMap<usize, (u64, Rational, u64, Rational)> = BTreeMap::new();

    for record in records {
        let record = record?;
        summary.sentences += 1;
        match sentence_stats(&record) {
            Ok(s) => {
                summary.parsed += 1;
                summary.total_c_observed += s.c_observed;
                summary.total_c_expected += s.c_expected;
                let entry = by_n.entry(s.n).or_insert((
                    0,
                    Rational::from_integer(0),
                    0,
                    Rational::from_integer(0),
                ));
                entry.0 += 1;
                entry.1 += s.k2_moment;
                entry.2 += s.c_observed;
                entry.3 += s.c_expected;
                writer.write_record([
                    record.sentence_id.clone(),
                    s.n.to_string(),
                    s.k2_moment.numer().to_string(),
                    s.k2_moment.denom().to_string(),
                    s.c_observed.to_string(),
                    s.c_expected.numer().to_string(),
                    s.c_expected.denom().to_string(),
                    s.c_pairs.to_integer().to_string(),
                    s.mean_d_observed.numer().to_string(),
                    s.mean_d_observed.denom().to_string(),
                    s.e_d.numer().to_string(),
                    s.e_d.denom().to_string(),
                    s.planar.to_string(),
                    String::new(),
                ])?;
                if let (Some((samples, seed)), Some(list)) =
                    (options.dispersion, summary.dispersion.as_mut())
                {
                    let tree = record.tree.as_ref().expect("parsed sentence has a tree");
                    let sentence_seed = seed.wrapping_add(summary.sentences - 1);
                    if let Ok(est) =
                        estimate_expected_crossings(tree, samples.max(2), sentence_seed)
                    {
                        let sd = est.std_error * (est.samples as f64).sqrt();
                        let z =
                            (sd > 0.0).then(|| (s.c_observed as f64 - to_f64(s.c_expected)) / sd);
                        list.push(Dispersion {
                            sentence_id: record.sentence_id.clone(),
                            c_observed: s.c_observed,
                            mc_mean: est.mean,
                            mc_sd: sd,
                            z,
                        });
                    }
                }
            }
            Err(reason) => {
                summary.skipped += 1;
                *summary.skipped_by_reason.entry(reason).or_default() += 1;
                let mut row = vec![String::new(); CSV_HEADER.len()];
                row[0] = record.sentence_id.clone();
                row[13] = reason.to_string();
                writer.write_record(&row)?;
            }
        }
    }
    writer.flush()?;

    summary.total_c_expected_float = to_f64(summary.total_c_expected);
    summary.per_n = by_n
        .into_iter()
        .map(|(n, (count, k2, c, ec))| {
            let count_r = Rational::from_integer(count as i64);
            LengthRow {
                n,
                sentences: count,
                mean_k2: to_f64(k2 / count_r),
                mean_c: c as f64 / count as f64,
                mean_ec: to_f64(ec / count_r),
            }
        })
        .collect();
    Ok(summary)
}

impl CorpusSummary {
    pub fn total_c_expected_pq(&self) -> String {
        format_pq(self.total_c_expected)
    }
}
