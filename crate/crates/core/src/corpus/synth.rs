//! Synthetic annotated corpora.
//!
//! Documents are interleavings of generated blocks: prose, aligned numeric
//! tables, code, formulas, and slide/caption debris. Each line carries the
//! label of the block that produced it.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{AnnotatedDocument, Corpus, Label, LineRecord};
use crate::downstream::GoldClustering;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Share of lines per unnatural label in the lecture-slide corpus
/// (table 1.4%, code 14.6%, formula 0.5%, misc 9.8%; 26.3% total).
pub const TABLE2_SLIDES_RATIOS: [(Label, f64); 4] = [
    (Label::Table, 0.014),
    (Label::Code, 0.146),
    (Label::Formula, 0.005),
    (Label::Misc, 0.098),
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_docs: usize,
    /// Line shares of the unnatural labels; TEXT takes the remainder.
    pub ratios: BTreeMap<Label, f64>,
    pub seed: u64,
    pub min_lines: usize,
    pub max_lines: usize,
    /// Lower bound on every block length (1 keeps the natural ranges).
    pub min_block_len: usize,
}

impl SynthConfig {
    pub fn new(n_docs: usize, ratios: BTreeMap<Label, f64>, seed: u64) -> Self {
        SynthConfig {
            n_docs,
            ratios,
            seed,
            min_lines: 30,
            max_lines: 70,
            min_block_len: 1,
        }
    }

    pub fn slides(n_docs: usize, seed: u64) -> Self {
        Self::new(n_docs, TABLE2_SLIDES_RATIOS.into_iter().collect(), seed)
    }
}

pub fn generate_synthetic_corpus(n_docs: usize, ratios: &BTreeMap<Label, f64>, seed: u64) -> Result<Corpus> {
    SynthConfig::new(n_docs, ratios.clone(), seed).generate()
}

impl SynthConfig {
    pub fn generate(&self) -> Result<Corpus> {
        if self.n_docs == 0 {
            return Err(Error::InvalidArgument("n_docs must be positive".into()));
        }
        if self.min_lines == 0 || self.min_lines > self.max_lines {
            return Err(Error::InvalidArgument("invalid document length range".into()));
        }
        let shares = line_shares(&self.ratios)?;
        let min_block = self.min_block_len.max(1);
        let ranges: Vec<(usize, usize)> = Label::ALL
            .iter()
            .map(|&l| {
                let (lo, hi) = block_range(l);
                (lo.max(min_block), hi.max(min_block))
            })
            .collect();
        // Choosing blocks with probability share/E[len] makes line shares match.
        let weights: Vec<f64> = Label::ALL
            .iter()
            .map(|l| {
                let (lo, hi) = ranges[l.index()];
                shares[l.index()] / ((lo + hi) as f64 / 2.0)
            })
            .collect();

        let mut rng = rng::stream(self.seed, rng::STREAM_SYNTH);
        let mut documents = Vec::with_capacity(self.n_docs);
        for d in 0..self.n_docs {
            let target = rng.gen_range(self.min_lines..=self.max_lines);
            let mut lines = Vec::with_capacity(target + 12);
            while lines.len() < target {
                let label = sample_weighted(&mut rng, &weights);
                let (lo, hi) = ranges[label.index()];
                let n = rng.gen_range(lo..=hi);
                for text in gen_block(&mut rng, label, n, &[]) {
                    lines.push(LineRecord::labeled(text, label));
                }
            }
            documents.push(AnnotatedDocument::new(format!("doc{d:05}"), lines));
        }
        Corpus::new(documents)
    }
}

fn line_shares(ratios: &BTreeMap<Label, f64>) -> Result<[f64; 5]> {
    let mut shares = [0.0; 5];
    let mut unnatural = 0.0;
    for (&label, &r) in ratios {
        if label == Label::Text {
            return Err(Error::InvalidRatios("TEXT is the remainder and cannot be set".into()));
        }
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidRatios(format!("{label} ratio {r} is not a fraction")));
        }
        shares[label.index()] = r;
        unnatural += r;
    }
    if unnatural > 1.0 + 1e-12 {
        return Err(Error::InvalidRatios(format!("unnatural ratios sum to {unnatural} > 1")));
    }
    shares[Label::Text.index()] = (1.0 - unnatural).max(0.0);
    Ok(shares)
}

fn block_range(label: Label) -> (usize, usize) {
    match label {
        Label::Text => (2, 8),
        Label::Table => (4, 9),
        Label::Code => (3, 12),
        Label::Formula => (1, 3),
        Label::Misc => (1, 3),
    }
}

fn sample_weighted(rng: &mut Rng, weights: &[f64]) -> Label {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            if x < *w {
                return Label::ALL[i];
            }
            x -= w;
        }
    }
    // rounding fallthrough: last label with positive weight
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    Label::ALL[last]
}

fn gen_block(rng: &mut Rng, label: Label, n: usize, topic_words: &[&str]) -> Vec<String> {
    match label {
        Label::Text => (0..n).map(|_| prose_line(rng, topic_words)).collect(),
        Label::Table => table_block(rng, n),
        Label::Code => code_block(rng, n),
        Label::Formula => (0..n).map(|_| formula_line(rng)).collect(),
        Label::Misc => (0..n).map(|_| misc_line(rng)).collect(),
    }
}

fn pick<'a>(rng: &mut Rng, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().expect("word lists are nonempty")
}

const DETERMINERS: &[&str] = &[
    "the", "a", "this", "each", "every", "our", "their", "these", "an", "some",
];
const NOUNS: &[&str] = &[
    "algorithm",
    "method",
    "result",
    "system",
    "model",
    "student",
    "lecture",
    "course",
    "data",
    "value",
    "process",
    "memory",
    "network",
    "example",
    "problem",
    "solution",
    "structure",
    "approach",
    "performance",
    "user",
    "page",
    "question",
    "section",
    "term",
    "idea",
    "rule",
    "property",
    "goal",
    "number",
    "step",
    "input",
    "output",
    "function",
    "list",
    "case",
    "time",
    "cost",
    "design",
    "analysis",
    "assignment",
    "exam",
    "program",
    "language",
    "machine",
    "operation",
    "element",
    "argument",
    "variable",
    "loop",
    "file",
];
const VERBS: &[&str] = &[
    "describes",
    "uses",
    "shows",
    "computes",
    "returns",
    "stores",
    "requires",
    "improves",
    "explains",
    "reduces",
    "contains",
    "defines",
    "represents",
    "allows",
    "provides",
    "compares",
    "handles",
    "changes",
    "follows",
    "creates",
    "checks",
    "builds",
    "takes",
    "is",
    "was",
    "can",
    "will",
    "should",
    "makes",
    "gives",
];
const ADJECTIVES: &[&str] = &[
    "simple",
    "large",
    "small",
    "efficient",
    "important",
    "different",
    "new",
    "common",
    "basic",
    "recursive",
    "linear",
    "general",
    "final",
    "main",
    "next",
    "previous",
    "good",
    "fast",
    "slow",
    "correct",
    "same",
    "other",
    "first",
    "last",
];
const PREPOSITIONS: &[&str] = &[
    "of", "in", "for", "with", "on", "by", "from", "to", "into", "over", "between", "at", "about",
];
const CONJUNCTIONS: &[&str] = &[
    "and", "but", "or", "because", "so", "while", "if", "when", "that", "since",
];
const ADVERBS: &[&str] = &[
    "often", "also", "usually", "then", "quickly", "always", "only", "now", "still", "not",
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ter", "ran", "vek", "sor", "plu", "den", "gra", "ix", "bo", "tra", "nel", "qui", "zen",
];
const JARGON_SIZE: f64 = 20_000.0;

/// Open-vocabulary jargon (names, technical terms). Ranks are drawn
/// log-uniformly, which gives a Zipf-like frequency profile, and each rank
/// always spells the same word.
fn rare_word(rng: &mut Rng) -> String {
    let mut r = JARGON_SIZE.powf(rng.gen::<f64>()) as usize;
    let mut w = String::new();
    loop {
        w.push_str(SYLLABLES[r % SYLLABLES.len()]);
        r /= SYLLABLES.len();
        if r == 0 {
            break;
        }
    }
    if w.len() < 4 {
        w.push_str("ton");
    }
    w
}

fn noun(rng: &mut Rng, topic_words: &[&str]) -> String {
    if !topic_words.is_empty() && rng.gen_bool(0.45) {
        pick(rng, topic_words).to_string()
    } else if rng.gen_bool(0.15) {
        rare_word(rng)
    } else {
        pick(rng, NOUNS).to_string()
    }
}

fn noun_phrase(rng: &mut Rng, topic_words: &[&str], out: &mut Vec<String>) {
    out.push(pick(rng, DETERMINERS).to_string());
    if rng.gen_bool(0.4) {
        out.push(pick(rng, ADJECTIVES).to_string());
    }
    out.push(noun(rng, topic_words));
}

fn clause(rng: &mut Rng, topic_words: &[&str], out: &mut Vec<String>) {
    noun_phrase(rng, topic_words, out);
    if rng.gen_bool(0.25) {
        out.push(pick(rng, ADVERBS).to_string());
    }
    out.push(pick(rng, VERBS).to_string());
    noun_phrase(rng, topic_words, out);
    if rng.gen_bool(0.6) {
        out.push(pick(rng, PREPOSITIONS).to_string());
        if rng.gen_bool(0.15) {
            out.push(rng.gen_range(2..2020).to_string());
            out.push(noun(rng, topic_words));
        } else {
            noun_phrase(rng, topic_words, out);
        }
    }
}

/// Prose that talks about code, as lecture slides on programming do.
fn code_talk_line(rng: &mut Rng, topic_words: &[&str]) -> String {
    let a = identifier(rng);
    let b = identifier(rng);
    let kw = pick(
        rng,
        &[
            "for", "while", "if", "return", "else", "break", "def", "int", "do", "then",
        ],
    );
    let mut w: Vec<String> = Vec::new();
    match rng.gen_range(0..6) {
        0 => {
            w.extend([
                "the".to_string(),
                kw.to_string(),
                pick(rng, &["loop", "statement", "keyword", "clause", "branch"]).to_string(),
            ]);
            w.push(pick(rng, VERBS).to_string());
            noun_phrase(rng, topic_words, &mut w);
        }
        1 => {
            noun_phrase(rng, topic_words, &mut w);
            w.push("returns".into());
            w.push(a);
            w.push(pick(rng, &["when", "if", "once", "unless"]).to_string());
            w.push(b);
            w.push(pick(rng, &["==", "<", ">", "is"]).to_string());
            w.push(rng.gen_range(0..3).to_string());
        }
        2 => {
            w.push(pick(rng, &["call", "use", "we call", "then call"]).to_string());
            w.push(format!("{}({a})", pick(rng, FUNCS)));
            w.push("to".into());
            w.push(pick(rng, IMPERATIVES).to_string());
            noun_phrase(rng, topic_words, &mut w);
        }
        3 => {
            w.push(pick(rng, &["if", "when", "while"]).to_string());
            w.push(a);
            w.push(pick(rng, &["<", ">", "=", "!="]).to_string());
            w.push(b);
            w.push(",".into());
            w.push(pick(rng, &["we", "the program", "it", "this"]).to_string());
            w.push(pick(rng, VERBS).to_string());
            noun_phrase(rng, topic_words, &mut w);
        }
        4 => {
            w.push(pick(rng, &["set", "we set", "initialize", "update"]).to_string());
            w.push(format!("{a} = {a} + 1"));
            w.push(pick(rng, &["after", "before", "in", "at"]).to_string());
            noun_phrase(rng, topic_words, &mut w);
        }
        _ => {
            w.push(pick(rng, &["note that", "remember that", "here", "in this case"]).to_string());
            w.push(a);
            w.push(pick(rng, &["is", "holds", "stores", "points to"]).to_string());
            noun_phrase(rng, topic_words, &mut w);
            w.push(format!("[{b}]"));
        }
    }
    if rng.gen_bool(0.5) {
        capitalize(&mut w[0]);
    }
    w.join(" ")
}

fn prose_line(rng: &mut Rng, topic_words: &[&str]) -> String {
    if rng.gen_bool(0.2) {
        return code_talk_line(rng, topic_words);
    }
    let mut w: Vec<String> = Vec::new();
    match rng.gen_range(0..10) {
        // slide bullet
        0..=2 => {
            if rng.gen_bool(0.5) {
                w.push(pick(rng, &["-", "•", "*", "o"]).to_string());
            }
            let mut first = noun(rng, topic_words);
            if rng.gen_bool(0.5) {
                capitalize(&mut first);
            }
            w.push(first);
            out_extend_bullet(rng, topic_words, &mut w);
        }
        // running sentence, possibly spanning into a second clause
        _ => {
            clause(rng, topic_words, &mut w);
            if rng.gen_bool(0.4) {
                if rng.gen_bool(0.5) {
                    w.push(",".to_string());
                }
                w.push(pick(rng, CONJUNCTIONS).to_string());
                clause(rng, topic_words, &mut w);
            }
            if rng.gen_bool(0.15) {
                w.push(inline_aside(rng));
            }
            if rng.gen_bool(0.5) {
                capitalize(&mut w[0]);
            }
            if rng.gen_bool(0.6) {
                let last = w.last_mut().expect("clause is nonempty");
                last.push('.');
            }
        }
    }
    w.join(" ")
}

/// Symbols and code fragments that slide prose mentions inline.
fn inline_aside(rng: &mut Rng) -> String {
    match rng.gen_range(0..6) {
        0 => format!("(e.g. {})", identifier(rng)),
        1 => format!(
            "(see {} {})",
            pick(rng, &["Section", "slide", "Chapter", "Figure", "Table"]),
            rng.gen_range(1..20)
        ),
        2 => format!(
            "in {} time",
            pick(rng, &["O(n)", "O(n log n)", "O(n^2)", "O(1)", "O(log n)"])
        ),
        3 => format!("called {}()", pick(rng, FUNCS)),
        4 => format!("with {} = {}", pick(rng, &["k", "n", "m", "p"]), rng.gen_range(1..100)),
        _ => format!("using {}", identifier(rng)),
    }
}

fn out_extend_bullet(rng: &mut Rng, topic_words: &[&str], w: &mut Vec<String>) {
    let extra = rng.gen_range(0..4);
    for _ in 0..extra {
        match rng.gen_range(0..3) {
            0 => w.push(pick(rng, PREPOSITIONS).to_string()),
            1 => w.push(pick(rng, ADJECTIVES).to_string()),
            _ => {}
        }
        w.push(noun(rng, topic_words));
    }
}

fn capitalize(s: &mut String) {
    if let Some(c) = s.chars().next() {
        let upper: String = c.to_uppercase().collect();
        s.replace_range(..c.len_utf8(), &upper);
    }
}

const ROW_NAMES: &[&str] = &[
    "Quicksort",
    "Mergesort",
    "Heapsort",
    "Baseline",
    "Linux",
    "Windows",
    "MacOS",
    "SVM",
    "CRF",
    "Ours",
    "Total",
    "Average",
    "Train",
    "Test",
    "Dev",
    "Group",
    "Week",
    "Lab",
    "Insertion",
    "Bubble",
    "Radix",
    "Python",
    "Java",
    "C++",
];
const HEADER_WORDS: &[&str] = &[
    "Method",
    "Accuracy",
    "Time",
    "Precision",
    "Recall",
    "F1",
    "Size",
    "Score",
    "Count",
    "Mean",
    "Std",
    "Runtime",
    "Memory",
    "Best",
    "Worst",
    "Year",
    "Rate",
    "Error",
    "Speed",
    "Items",
    "Avg",
];

fn cell(rng: &mut Rng) -> String {
    match rng.gen_range(0..12) {
        0..=4 => format!("{:.1}", rng.gen_range(0.0..100.0)),
        5..=7 => rng.gen_range(1..5000).to_string(),
        8 => format!("{:.2}", rng.gen::<f64>()),
        9 => format!("{}%", rng.gen_range(1..100)),
        10 => format!("{},{:03}", rng.gen_range(1..99), rng.gen_range(0..1000)),
        _ => pick(rng, &["-", "N/A", "yes", "no", "x"]).to_string(),
    }
}

fn table_block(rng: &mut Rng, n: usize) -> Vec<String> {
    let cols = rng.gen_range(2..=5);
    let named_rows = rng.gen_bool(0.7);
    let mut out = Vec::with_capacity(n);
    let with_header = n >= 2 && rng.gen_bool(0.7);
    if with_header {
        let mut h: Vec<&str> = Vec::new();
        if named_rows {
            h.push(pick(rng, HEADER_WORDS));
        }
        for _ in 0..cols {
            h.push(pick(rng, HEADER_WORDS));
        }
        out.push(h.join(" "));
    }
    while out.len() < n {
        let mut row: Vec<String> = Vec::new();
        if named_rows {
            row.push(if rng.gen_bool(0.3) {
                let mut w = rare_word(rng);
                capitalize(&mut w);
                w
            } else {
                pick(rng, ROW_NAMES).to_string()
            });
            if rng.gen_bool(0.15) {
                row.push(if rng.gen_bool(0.3) {
                    let mut w = rare_word(rng);
                    capitalize(&mut w);
                    w
                } else {
                    pick(rng, ROW_NAMES).to_string()
                });
            }
        }
        for _ in 0..cols {
            row.push(cell(rng));
        }
        out.push(row.join(" "));
    }
    out
}

const IDENTS: &[&str] = &[
    "i",
    "j",
    "k",
    "n",
    "x",
    "y",
    "count",
    "total",
    "result",
    "arr",
    "node",
    "left",
    "right",
    "key",
    "value",
    "temp",
    "index",
    "sum",
    "data",
    "list",
    "head",
    "tail",
    "queue",
    "stack",
    "size",
    "max_val",
    "min_idx",
    "buf",
    "ptr",
    "curr",
    "prev",
    "lo",
    "hi",
    "mid",
    "graph",
    "visited",
    "dist",
    "table",
    "item",
    "obj",
    "self.items",
    "root",
    "parent",
];
const FUNCS: &[&str] = &[
    "len",
    "range",
    "print",
    "append",
    "sort",
    "insert",
    "push",
    "pop",
    "swap",
    "merge",
    "find",
    "get",
    "printf",
    "malloc",
    "free",
    "partition",
    "search",
    "update",
    "add",
    "remove",
    "hash",
    "visit",
    "solve",
    "main",
    "helper",
];
#[derive(Clone, Copy, PartialEq, Eq)]
enum Dialect {
    Python,
    CLike,
    Pseudo,
}

const IMPERATIVES: &[&str] = &[
    "add",
    "remove",
    "mark",
    "insert",
    "append",
    "swap",
    "update",
    "compute",
    "set",
    "find",
    "increment",
    "initialize",
    "sort",
    "push",
    "pop",
    "select",
    "store",
    "output",
    "report",
];

/// Identifiers are an open vocabulary: stock names plus compounds such as
/// `node_count` or `maxValue`.
fn identifier(rng: &mut Rng) -> String {
    match rng.gen_range(0..12) {
        10 => rare_word(rng),
        11 => format!("{}_{}", rare_word(rng), pick(rng, IDENTS)),
        0..=4 => pick(rng, IDENTS).to_string(),
        5 | 6 => format!("{}_{}", pick(rng, IDENTS), pick(rng, NOUNS)),
        7 => {
            let mut tail = pick(rng, NOUNS).to_string();
            capitalize(&mut tail);
            format!(
                "{}{tail}",
                pick(rng, &["max", "min", "cur", "num", "new", "old", "tmp", "is", "get"])
            )
        }
        8 => format!(
            "{}{}",
            pick(rng, &["a", "b", "t", "v", "u", "w", "s"]),
            rng.gen_range(0..4)
        ),
        _ => pick(rng, NOUNS).to_string(),
    }
}

/// An English comment line.
fn comment_text(rng: &mut Rng) -> Vec<String> {
    let mut c = vec![pick(rng, IMPERATIVES).to_string()];
    noun_phrase(rng, &[], &mut c);
    if rng.gen_bool(0.5) {
        c.push(pick(rng, PREPOSITIONS).to_string());
        noun_phrase(rng, &[], &mut c);
    }
    c
}

fn pseudo_line(rng: &mut Rng, idents: &[String]) -> String {
    let a = pick_owned(rng, idents);
    let b = pick_owned(rng, idents);
    let assign = pick(rng, &["←", ":=", "="]);
    let cmp = pick(rng, &["<", ">", "≤", "≥", "=", "≠"]);
    let mut w: Vec<String> = Vec::new();
    match rng.gen_range(0..13) {
        0 => {
            w.extend(["for", "each"].map(String::from));
            w.push(pick(rng, NOUNS).to_string());
            w.push(a.into());
            w.push("in".into());
            w.push(b.into());
            w.push("do".into());
        }
        1 => return format!("for {a} {assign} {} to {b} do", rng.gen_range(0..3)),
        2 => return format!("if {a} {cmp} {b} then"),
        3 => {
            w.push("while".into());
            noun_phrase(rng, &[], &mut w);
            w.extend(["is", "not", "empty", "do"].map(String::from));
        }
        4 => {
            w.extend(["let", a, "be"].map(String::from));
            noun_phrase(rng, &[], &mut w);
        }
        5 => return format!("{a} {assign} {b} + {}", rng.gen_range(1..3)),
        6 => return format!("return {a}"),
        7 => return pick(rng, &["end if", "end for", "end while", "else", "end", "repeat"]).to_string(),
        8 => {
            w.push(pick(rng, &["Input:", "Output:", "Require:", "Ensure:"]).to_string());
            noun_phrase(rng, &[], &mut w);
            w.push(a.into());
        }
        9 => return format!("{}({a}, {b})", pick(rng, FUNCS)),
        _ => {
            w = comment_text(rng);
            w.push(a.into());
        }
    }
    w.join(" ")
}

fn pick_owned<'a>(rng: &mut Rng, xs: &'a [String]) -> &'a str {
    xs.choose(rng)
        .map(String::as_str)
        .expect("identifier lists are nonempty")
}

fn code_line(rng: &mut Rng, dialect: Dialect, idents: &[String]) -> String {
    if dialect == Dialect::Pseudo {
        return pseudo_line(rng, idents);
    }
    let python = dialect == Dialect::Python;
    let a = pick_owned(rng, idents);
    let b = pick_owned(rng, idents);
    let f = pick(rng, FUNCS);
    let num = rng.gen_range(0..10);
    let cmp = pick(rng, &["<", ">", "<=", ">=", "==", "!="]);
    let op = pick(rng, &["+", "-", "*", "/", "%"]);
    let compact = rng.gen_bool(0.35);
    let s = match (python, rng.gen_range(0..12)) {
        (true, 0) => format!("for {a} in range ( {b} ) :"),
        (true, 1) => format!("while {a} {cmp} {b} :"),
        (true, 2) => format!("if {a} {cmp} {num} :"),
        (true, 3) => format!("def {f} ( {a} , {b} ) :"),
        (true, 4) => format!("return {a}"),
        (true, 5) => "else :".to_string(),
        (true, 6) => format!("{a} . {f} ( {b} )"),
        (false, 0) => format!("for ( int {a} = 0 ; {a} {cmp} {b} ; {a} ++ ) {{"),
        (false, 1) => format!("while ( {a} {cmp} {b} ) {{"),
        (false, 2) => format!("if ( {a} {cmp} {num} ) {{"),
        (false, 3) => format!("int {f} ( int {a} , int {b} ) {{"),
        (false, 4) => format!("return {a} ;"),
        (false, 5) => pick(rng, &["}", "} else {", "break ;", "};"]).to_string(),
        (false, 6) => format!("{f} ( {a} , {b} ) ;"),
        (_, 7) => format!("{a} [ {b} ] = {a} [ {b} {op} 1 ]"),
        (_, 8) => {
            let mut c = vec![if python { "#" } else { "//" }.to_string()];
            c.extend(comment_text(rng));
            return c.join(" ");
        }
        (_, 9) if rng.gen_bool(0.5) => {
            let mut msg = Vec::new();
            noun_phrase(rng, &[], &mut msg);
            msg.push(pick(rng, &["is", "was", "found", "not found", "updated"]).to_string());
            let msg = msg.join(" ");
            if python {
                format!("print ( \"{msg}\" , {a} )")
            } else {
                format!("printf ( \"{msg} %d\\n\" , {a} ) ;")
            }
        }
        (_, 9) => format!("{a} = {f} ( {b} )"),
        (_, 10) => format!("{a} = {b} {op} {num}"),
        _ => format!("{a} = {a} {op} {b}"),
    };
    if compact {
        compact_code(&s)
    } else {
        s
    }
}

/// Collapses the spaces around brackets and separators the way extracted
/// code often appears: `f ( a , b )` becomes `f(a, b)`.
fn compact_code(s: &str) -> String {
    s.replace(" ( ", "(")
        .replace(" )", ")")
        .replace(" [ ", "[")
        .replace(" ]", "]")
        .replace(" , ", ", ")
        .replace(" ;", ";")
        .replace(" . ", ".")
}

fn code_block(rng: &mut Rng, n: usize) -> Vec<String> {
    let dialect = match rng.gen_range(0..10) {
        0..=2 => Dialect::Python,
        3..=5 => Dialect::CLike,
        _ => Dialect::Pseudo,
    };
    let mut idents: Vec<String> = (0..6).map(|_| identifier(rng)).collect();
    idents.sort_unstable();
    idents.dedup();
    (0..n).map(|_| code_line(rng, dialect, &idents)).collect()
}

const GREEK: &[&str] = &["α", "β", "γ", "δ", "λ", "μ", "σ", "θ", "π", "ε", "ω"];
const VARS: &[&str] = &[
    "x", "y", "z", "n", "m", "a", "b", "c", "f", "g", "p", "q", "t", "x_i", "y_j", "w_k",
];
const RELATIONS: &[&str] = &["=", "≤", "≥", "<", ">", "≈", "∝", "∈"];
const OPERATORS: &[&str] = &["+", "-", "·", "/", "×", "^"];

fn formula_term(rng: &mut Rng, depth: usize) -> String {
    match rng.gen_range(0..8) {
        0 | 1 => pick(rng, VARS).to_string(),
        2 => pick(rng, GREEK).to_string(),
        3 => rng.gen_range(1..10).to_string(),
        4 => format!("{} ^ {}", pick(rng, VARS), rng.gen_range(2..4)),
        5 if depth < 2 => format!(
            "{} ( {} )",
            pick(rng, &["f", "g", "P", "O", "log", "exp", "sin", "T"]),
            formula_expr(rng, depth + 1)
        ),
        6 if depth < 2 => format!(
            "{} {}",
            pick(rng, &["∑", "∏", "∫", "√", "lim", "max", "∂"]),
            formula_expr(rng, depth + 1)
        ),
        _ => format!("{} {}", pick(rng, VARS), pick(rng, GREEK)),
    }
}

fn formula_expr(rng: &mut Rng, depth: usize) -> String {
    let n = rng.gen_range(1..=3);
    let mut parts = vec![formula_term(rng, depth)];
    for _ in 1..n {
        parts.push(pick(rng, OPERATORS).to_string());
        parts.push(formula_term(rng, depth));
    }
    parts.join(" ")
}

fn formula_line(rng: &mut Rng) -> String {
    let lhs = formula_expr(rng, 1);
    let rhs = formula_expr(rng, 0);
    let mut s = format!("{lhs} {} {rhs}", pick(rng, RELATIONS));
    if rng.gen_bool(0.2) {
        s.push_str(&format!(" ( {} )", rng.gen_range(1..30)));
    }
    s
}

const MISC_WORDS: &[&str] = &[
    "Lecture",
    "Slide",
    "Page",
    "Figure",
    "Fig.",
    "Table",
    "Chapter",
    "Source",
    "Prof.",
    "Dept.",
    "CS",
    "Fall",
    "Spring",
    "Week",
    "Copyright",
    "©",
    "University",
    "Outline",
    "Agenda",
    "Questions?",
    "Thanks",
    "Notes",
];

fn misc_line(rng: &mut Rng) -> String {
    match rng.gen_range(0..8) {
        0 => format!(
            "{} {}",
            pick(rng, &["Slide", "Page", "Lecture", "Week"]),
            rng.gen_range(1..60)
        ),
        1 => format!(
            "{} {} of {}",
            pick(rng, &["Page", "Slide"]),
            rng.gen_range(1..30),
            rng.gen_range(30..60)
        ),
        2 => format!(
            "http://www.{}.edu/~{}/{}",
            pick(rng, &["cs", "ece", "math", "uni"]),
            pick(rng, IDENTS).replace(['.', '_'], ""),
            pick(rng, &["notes.pdf", "index.html", "slides"])
        ),
        3 => format!(
            "{} {} {}",
            pick(rng, &["CS", "CSE", "EE", "COMP"]),
            rng.gen_range(100..700),
            pick(rng, &["Fall", "Spring", "Summer"])
        ),
        4 => format!(
            "{} {} :",
            pick(rng, &["Figure", "Fig.", "Table", "Source"]),
            rng.gen_range(1..12)
        ),
        5 => format!(
            "© {} {}",
            rng.gen_range(1995..2020),
            pick(rng, &["Pearson", "University", "McGraw-Hill", "Wiley", "MIT"])
        ),
        6 => format!("[ {} ]", rng.gen_range(1..40)),
        _ => {
            let n = rng.gen_range(1..4);
            (0..n).map(|_| pick(rng, MISC_WORDS)).collect::<Vec<_>>().join(" ")
        }
    }
}

/// Lexicons for the topic corpus: the first two or three words of each list
/// form the topic keyword string.
const TOPIC_LEXICONS: &[(&str, &[&str])] = &[
    (
        "sorting",
        &[
            "sorting",
            "pivot",
            "quicksort",
            "mergesort",
            "comparison",
            "ordering",
            "swaps",
            "heapsort",
            "inversions",
            "stability",
            "runs",
            "insertion",
        ],
    ),
    (
        "graphs",
        &[
            "graph",
            "vertex",
            "edges",
            "traversal",
            "dijkstra",
            "adjacency",
            "shortest",
            "path",
            "spanning",
            "cycle",
            "neighbors",
            "bfs",
        ],
    ),
    (
        "hashing",
        &[
            "hashing",
            "bucket",
            "collision",
            "probing",
            "chaining",
            "load",
            "factor",
            "rehash",
            "keys",
            "slots",
            "digest",
            "universal",
        ],
    ),
    (
        "scheduling",
        &[
            "scheduling",
            "process",
            "preemption",
            "quantum",
            "priority",
            "dispatcher",
            "starvation",
            "burst",
            "roundrobin",
            "deadline",
            "waiting",
            "throughput",
        ],
    ),
    (
        "networking",
        &[
            "packet",
            "routing",
            "protocol",
            "tcp",
            "congestion",
            "latency",
            "bandwidth",
            "router",
            "socket",
            "handshake",
            "header",
            "datagram",
        ],
    ),
    (
        "memory",
        &[
            "paging",
            "cache",
            "virtual",
            "tlb",
            "frames",
            "eviction",
            "locality",
            "segmentation",
            "swap",
            "allocation",
            "fragmentation",
            "heap",
        ],
    ),
];

#[derive(Debug, Clone)]
pub struct TopicCorpusConfig {
    pub n_topics: usize,
    pub docs_per_topic: usize,
    pub prose_lines: (usize, usize),
    /// Number of distinct code blocks shared across documents of different topics.
    pub shared_blocks: usize,
    pub shared_block_lines: usize,
    /// Shared blocks injected into each document.
    pub blocks_per_doc: usize,
    /// Share of prose lines written about a different, randomly chosen topic.
    pub off_topic_rate: f64,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        TopicCorpusConfig {
            n_topics: 4,
            docs_per_topic: 10,
            prose_lines: (6, 16),
            shared_blocks: 3,
            shared_block_lines: 10,
            blocks_per_doc: 1,
            off_topic_rate: 0.1,
            seed: 0,
        }
    }
}

/// Topic-clustered documents in which documents of different topics carry
/// identical injected code blocks, together with the gold clustering.
///
/// With `shared_blocks == 0` the documents are pure prose.
pub fn generate_topic_corpus(cfg: &TopicCorpusConfig) -> Result<(Corpus, GoldClustering)> {
    if cfg.n_topics == 0 || cfg.n_topics > TOPIC_LEXICONS.len() {
        return Err(Error::InvalidArgument(format!(
            "n_topics must be in 1..={}",
            TOPIC_LEXICONS.len()
        )));
    }
    if !(0.0..=1.0).contains(&cfg.off_topic_rate) {
        return Err(Error::InvalidArgument("off_topic_rate must be in [0, 1]".into()));
    }
    if cfg.docs_per_topic == 0 || cfg.prose_lines.0 == 0 || cfg.prose_lines.0 > cfg.prose_lines.1 {
        return Err(Error::InvalidArgument("invalid topic corpus sizes".into()));
    }
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SYNTH);
    let blocks: Vec<Vec<String>> = (0..cfg.shared_blocks)
        .map(|_| code_block(&mut rng, cfg.shared_block_lines.max(1)))
        .collect();

    let mut documents = Vec::new();
    let mut topics = BTreeMap::new();
    let mut clusters: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (t, (name, lexicon)) in TOPIC_LEXICONS.iter().take(cfg.n_topics).enumerate() {
        let tid = format!("t{t}");
        topics.insert(tid.clone(), lexicon[..3].join(" "));
        for d in 0..cfg.docs_per_topic {
            let id = format!("{name}-{d:03}");
            let n_prose = rng.gen_range(cfg.prose_lines.0..=cfg.prose_lines.1);
            let mut prose: Vec<LineRecord> = (0..n_prose)
                .map(|_| {
                    let words = if cfg.n_topics > 1 && rng.gen_bool(cfg.off_topic_rate) {
                        let other = (t + rng.gen_range(1..cfg.n_topics)) % cfg.n_topics;
                        TOPIC_LEXICONS[other].1
                    } else {
                        lexicon
                    };
                    LineRecord::labeled(prose_line(&mut rng, words), Label::Text)
                })
                .collect();
            if !blocks.is_empty() {
                for b in 0..cfg.blocks_per_doc {
                    // rotate through the pool so every block spans several topics
                    let block = &blocks[(d + b + t) % blocks.len()];
                    let at = rng.gen_range(0..=prose.len());
                    let injected = block.iter().map(|l| LineRecord::labeled(l.clone(), Label::Code));
                    prose.splice(at..at, injected);
                }
            }
            clusters.entry(tid.clone()).or_default().push(id.clone());
            documents.push(AnnotatedDocument::new(id, prose));
        }
    }
    let gold = GoldClustering::new(topics, clusters)?;
    Ok((Corpus::new(documents)?, gold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slides_ratios() -> BTreeMap<Label, f64> {
        TABLE2_SLIDES_RATIOS.into_iter().collect()
    }

    #[test]
    fn slides_ratios_sum_to_reported_total() {
        let total: f64 = TABLE2_SLIDES_RATIOS.iter().map(|(_, r)| r).sum();
        assert!((total - 0.263).abs() < 1e-12);
    }

    #[test]
    fn unnatural_share_matches_request() {
        let c = generate_synthetic_corpus(200, &slides_ratios(), 3).unwrap();
        assert!(c.fully_labeled());
        let shares = c.label_shares();
        let unnatural = 1.0 - shares[Label::Text.index()];
        assert!((unnatural - 0.263).abs() <= 0.02, "unnatural share {unnatural}");
    }

    #[test]
    fn per_label_shares_converge() {
        let c = generate_synthetic_corpus(400, &slides_ratios(), 11).unwrap();
        assert!(c.line_count() >= 10_000);
        let shares = c.label_shares();
        for (label, r) in TABLE2_SLIDES_RATIOS {
            let got = shares[label.index()];
            assert!((got - r).abs() <= 0.02, "{label}: {got} vs {r}");
        }
    }

    #[test]
    fn zero_ratios_give_all_text() {
        let zeros: BTreeMap<Label, f64> = Label::UNNATURAL.iter().map(|&l| (l, 0.0)).collect();
        let c = generate_synthetic_corpus(20, &zeros, 1).unwrap();
        assert!(c
            .documents()
            .iter()
            .flat_map(|d| &d.lines)
            .all(|l| l.gold == Some(Label::Text)));
        let empty = generate_synthetic_corpus(5, &BTreeMap::new(), 1).unwrap();
        assert_eq!(empty.label_shares()[0], 1.0);
    }

    #[test]
    fn deterministic_bytes() {
        let a = generate_synthetic_corpus(30, &slides_ratios(), 9).unwrap();
        let b = generate_synthetic_corpus(30, &slides_ratios(), 9).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let c = generate_synthetic_corpus(30, &slides_ratios(), 10).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn invalid_ratios() {
        let mut r = slides_ratios();
        r.insert(Label::Code, 0.95);
        assert!(matches!(
            generate_synthetic_corpus(3, &r, 0),
            Err(Error::InvalidRatios(_))
        ));
        let r: BTreeMap<_, _> = [(Label::Table, -0.1)].into_iter().collect();
        assert!(matches!(
            generate_synthetic_corpus(3, &r, 0),
            Err(Error::InvalidRatios(_))
        ));
        let r: BTreeMap<_, _> = [(Label::Text, 0.5)].into_iter().collect();
        assert!(matches!(
            generate_synthetic_corpus(3, &r, 0),
            Err(Error::InvalidRatios(_))
        ));
        let r: BTreeMap<_, _> = [(Label::Misc, f64::NAN)].into_iter().collect();
        assert!(generate_synthetic_corpus(3, &r, 0).is_err());
    }

    #[test]
    fn min_block_len_respected() {
        let mut cfg = SynthConfig::slides(40, 2);
        cfg.min_block_len = 3;
        let c = cfg.generate().unwrap();
        for doc in c.documents() {
            let labels = doc.gold_labels().unwrap();
            let mut run = 1;
            for w in labels.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    assert!(run >= 3, "short block in {}", doc.id);
                    run = 1;
                }
            }
        }
    }

    #[test]
    fn no_line_breaks_in_generated_text() {
        let c = generate_synthetic_corpus(50, &slides_ratios(), 4).unwrap();
        assert!(c
            .documents()
            .iter()
            .flat_map(|d| &d.lines)
            .all(|l| !l.text.contains('\n')));
    }

    #[test]
    fn topic_corpus_shape() {
        let cfg = TopicCorpusConfig::default();
        let (c, gold) = generate_topic_corpus(&cfg).unwrap();
        assert_eq!(c.len(), 40);
        assert_eq!(gold.clusters().len(), 4);
        // each shared block appears in documents of at least two topics
        let first_code: Vec<_> = c
            .documents()
            .iter()
            .map(|d| {
                d.lines
                    .iter()
                    .find(|l| l.gold == Some(Label::Code))
                    .unwrap()
                    .text
                    .clone()
            })
            .collect();
        assert!(first_code.iter().filter(|t| **t == first_code[0]).count() > cfg.docs_per_topic / 3);
    }
}
