//! Group presentations given by shortlex-reducing rewriting systems.
//!
//! A presentation consists of an ordered generating set with an inverse
//! involution and a finite list of rewrite rules `lhs -> rhs`, each strictly
//! decreasing in the shortlex order induced by the declared generator order.
//! Rewriting to an irreducible word is the word-problem oracle for the whole
//! crate; it is only trusted after [`bounded_confluence_check`] passes.
//!
//! The peripheral subgroup `K` is given by a subset of the generators. It must
//! be *normal-form closed*: a word lies in `K` iff its normal form only uses
//! letters of `K`. Under that assumption the word length of the normal form of
//! `u⁻¹v` is exactly the peripheral distance `d_K(u, v)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Default bound for the confluence and closure checks.
pub const DEFAULT_CONFLUENCE_LENGTH: usize = 8;

/// Index of a generator symbol in its [`GeneratorSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u8);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered generating set with its inverse involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    symbols: Vec<char>,
    inverse: Vec<Letter>,
}

impl GeneratorSet {
    /// Builds a generating set from `(x, x⁻¹)` pairs. A pair `(x, x)` declares an
    /// order-two generator, which then appears once.
    pub fn from_pairs(pairs: &[(char, char)]) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut inverse = Vec::new();
        for &(x, y) in pairs {
            if symbols.contains(&x) || (x != y && symbols.contains(&y)) {
                return Err(CoreError::InvalidParameter(format!(
                    "duplicate generator in pair ({x}, {y})"
                )));
            }
            if symbols.len() + 2 > 256 {
                return Err(CoreError::InvalidParameter("too many generators".into()));
            }
            let i = symbols.len() as u8;
            if x == y {
                symbols.push(x);
                inverse.push(Letter(i));
            } else {
                symbols.push(x);
                symbols.push(y);
                inverse.push(Letter(i + 1));
                inverse.push(Letter(i));
            }
        }
        Ok(GeneratorSet { symbols, inverse })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.symbols.len()).map(|i| Letter(i as u8))
    }

    pub fn symbol(&self, l: Letter) -> char {
        self.symbols[l.index()]
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn inverse(&self, l: Letter) -> Letter {
        self.inverse[l.index()]
    }

    pub fn lookup(&self, c: char) -> Option<Letter> {
        self.symbols
            .iter()
            .position(|&s| s == c)
            .map(|i| Letter(i as u8))
    }

    /// Parses a word written as a run of symbols. Whitespace is ignored and
    /// `ε`, `e` (when `e` is not a generator) or `1` denote the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let trimmed = text.trim();
        if trimmed == "ε" || trimmed == "1" || (trimmed == "e" && self.lookup('e').is_none()) {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for (column, c) in trimmed.chars().enumerate() {
            if c.is_whitespace() {
                continue;
            }
            let l = self.lookup(c).ok_or_else(|| CoreError::UnknownSymbol {
                symbol: c.to_string(),
                line: 1,
                column: column + 1,
            })?;
            letters.push(l);
        }
        Ok(Word(letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        w.0.iter().map(|&l| self.symbol(l)).collect()
    }

    pub fn inverse_word(&self, w: &Word) -> Word {
        Word(w.0.iter().rev().map(|&l| self.inverse(l)).collect())
    }
}

/// A word over a generating set; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, l: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }
}

/// Shortlex order: shorter words first, then lexicographic by generator index.
pub fn shortlex(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex(&self.0, &other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Word,
}

/// Finite set of shortlex-decreasing rewrite rules.
#[derive(Clone, Debug)]
pub struct RewritingSystem {
    rules: Vec<Rule>,
    // rule indices keyed by the last letter of their left-hand side
    by_last: Vec<Vec<usize>>,
}

impl RewritingSystem {
    pub fn new(gens: &GeneratorSet, rules: Vec<Rule>) -> Result<Self> {
        let mut by_last = vec![Vec::new(); gens.len()];
        for (i, rule) in rules.iter().enumerate() {
            if rule.lhs.is_empty() || shortlex(&rule.rhs.0, &rule.lhs.0) != Ordering::Less {
                return Err(CoreError::RuleNotDecreasing {
                    lhs: gens.format_word(&rule.lhs),
                    rhs: gens.format_word(&rule.rhs),
                });
            }
            by_last[rule.lhs.0.last().unwrap().index()].push(i);
        }
        Ok(RewritingSystem { rules, by_last })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn max_lhs_len(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.len()).max().unwrap_or(0)
    }

    fn suffix_match(&self, out: &[Letter]) -> Option<&Rule> {
        let last = out.last()?;
        self.by_last[last.index()]
            .iter()
            .map(|&i| &self.rules[i])
            .find(|r| out.ends_with(&r.lhs.0))
    }

    /// Rewrites `w` to an irreducible word.
    ///
    /// The output buffer is kept irreducible, so a new redex can only end at
    /// the letter just appended; rewritten right-hand sides are fed back in.
    pub fn reduce(&self, w: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        let mut pending: Vec<Letter> = w.iter().rev().copied().collect();
        while let Some(x) = pending.pop() {
            out.push(x);
            if let Some(rule) = self.suffix_match(&out) {
                out.truncate(out.len() - rule.lhs.len());
                pending.extend(rule.rhs.0.iter().rev());
            }
        }
        Word(out)
    }

    /// Every single-step rewrite of `w`, in (position, rule) order.
    pub fn one_step_rewrites(&self, w: &[Letter]) -> Vec<Word> {
        let mut result = Vec::new();
        for start in 0..w.len() {
            for rule in &self.rules {
                let l = rule.lhs.len();
                if start + l <= w.len() && w[start..start + l] == rule.lhs.0[..] {
                    let mut v = w[..start].to_vec();
                    v.extend_from_slice(&rule.rhs.0);
                    v.extend_from_slice(&w[start + l..]);
                    result.push(Word(v));
                }
            }
        }
        result
    }
}

/// A finitely generated group given by generators and a rewriting system.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub name: String,
    pub gens: GeneratorSet,
    pub rws: RewritingSystem,
}

impl GroupPresentation {
    pub fn new(name: impl Into<String>, gens: GeneratorSet, rules: Vec<Rule>) -> Result<Self> {
        let rws = RewritingSystem::new(&gens, rules)?;
        Ok(GroupPresentation {
            name: name.into(),
            gens,
            rws,
        })
    }

    pub fn word(&self, text: &str) -> Result<Word> {
        self.gens.parse_word(text)
    }

    pub fn format(&self, w: &Word) -> String {
        self.gens.format_word(w)
    }

    pub fn inverse(&self, w: &Word) -> Word {
        self.gens.inverse_word(w)
    }

    /// Normal form of the product `u⁻¹ v`.
    pub fn quotient(&self, u: &Word, v: &Word) -> Word {
        let mut letters = self.gens.inverse_word(u).0;
        letters.extend_from_slice(&v.0);
        self.rws.reduce(&letters)
    }
}

/// The unique shortlex-least representative of `w` (given confluence).
pub fn normal_form(w: &Word, p: &GroupPresentation) -> Word {
    p.rws.reduce(&w.0)
}

/// Peripheral subgroup `K`, generated by a subset of the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralSpec {
    pub sub_gens: Vec<Letter>,
    pub normal_form_closed: bool,
    mask: Vec<bool>,
}

impl PeripheralSpec {
    pub fn new(
        gens: &GeneratorSet,
        sub_gens: Vec<Letter>,
        normal_form_closed: bool,
    ) -> Result<Self> {
        let mut mask = vec![false; gens.len()];
        for &l in &sub_gens {
            mask[l.index()] = true;
        }
        for &l in &sub_gens {
            if !mask[gens.inverse(l).index()] {
                return Err(CoreError::PeripheralNotInverseClosed(
                    gens.symbol(l).to_string(),
                ));
            }
        }
        Ok(PeripheralSpec {
            sub_gens,
            normal_form_closed,
            mask,
        })
    }

    pub fn contains_letter(&self, l: Letter) -> bool {
        self.mask.get(l.index()).copied().unwrap_or(false)
    }

    /// True when every letter of `w` is a generator of `K`.
    pub fn is_k_word(&self, w: &[Letter]) -> bool {
        w.iter().all(|&l| self.contains_letter(l))
    }
}

/// A parsed presentation file.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub group: GroupPresentation,
    pub peripheral: PeripheralSpec,
    pub confluence_check_length: usize,
}

/// Outcome of [`bounded_confluence_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfluenceReport {
    Pass { words_checked: usize },
    Fail { word: Word, left: Word, right: Word },
}

impl ConfluenceReport {
    pub fn passed(&self) -> bool {
        matches!(self, ConfluenceReport::Pass { .. })
    }
}

/// Calls `f` on every word of length `<= max_len` over `alphabet`, in shortlex
/// order. Stops early when `f` returns false.
pub fn for_each_word(alphabet: &[Letter], max_len: usize, mut f: impl FnMut(&[Letter]) -> bool) {
    let mut buf: Vec<Letter> = Vec::with_capacity(max_len);
    if !f(&buf) || alphabet.is_empty() {
        return;
    }
    let mut digits: Vec<usize> = Vec::with_capacity(max_len);
    for len in 1..=max_len {
        digits.clear();
        digits.resize(len, 0);
        loop {
            buf.clear();
            buf.extend(digits.iter().map(|&d| alphabet[d]));
            if !f(&buf) {
                return;
            }
            // odometer increment, last position fastest
            let mut pos = len;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < alphabet.len() {
                    break;
                }
                digits[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
}

/// Checks local confluence on every word of length `<= max_len`.
///
/// Rewriting terminates, so it suffices that all one-step rewrites of each
/// word reduce to the same irreducible word: by induction along the shortlex
/// order this makes every maximal rewrite sequence end at one normal form.
/// The first failing word in shortlex order is returned as a witness.
pub fn bounded_confluence_check(p: &GroupPresentation, max_len: usize) -> ConfluenceReport {
    let alphabet: Vec<Letter> = p.gens.letters().collect();
    let mut checked = 0usize;
    let mut failure = None;
    for_each_word(&alphabet, max_len, |w| {
        checked += 1;
        let successors = p.rws.one_step_rewrites(w);
        if successors.len() < 2 {
            return true;
        }
        let first = p.rws.reduce(&successors[0].0);
        for s in &successors[1..] {
            let nf = p.rws.reduce(&s.0);
            if nf != first {
                failure = Some(ConfluenceReport::Fail {
                    word: Word(w.to_vec()),
                    left: first.clone(),
                    right: nf,
                });
                return false;
            }
        }
        true
    });
    failure.unwrap_or(ConfluenceReport::Pass {
        words_checked: checked,
    })
}

/// Checks that every `K`-word of length `<= max_len` has a `K`-word as its
/// normal form; returns the first offending word.
pub fn check_normal_form_closed(
    p: &GroupPresentation,
    k: &PeripheralSpec,
    max_len: usize,
) -> Option<(Word, Word)> {
    let mut bad = None;
    for_each_word(&k.sub_gens, max_len, |w| {
        let nf = p.rws.reduce(w);
        if k.is_k_word(&nf.0) {
            true
        } else {
            bad = Some((Word(w.to_vec()), nf));
            false
        }
    });
    bad
}

/// True iff the normal form of `w` uses only generators of `K`.
pub fn is_peripheral_member(w: &Word, p: &GroupPresentation, k: &PeripheralSpec) -> bool {
    k.is_k_word(&normal_form(w, p).0)
}

/// `d_K(w1, w2)`, or `None` when `w1` and `w2` lie in different `K`-cosets.
pub fn peripheral_distance(
    w1: &Word,
    w2: &Word,
    p: &GroupPresentation,
    k: &PeripheralSpec,
) -> Option<usize> {
    let q = p.quotient(w1, w2);
    k.is_k_word(&q.0).then_some(q.len())
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CoreError {
    CoreError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Default)]
struct RawFile {
    name: Option<String>,
    generators: Option<(Vec<(char, usize)>, usize)>,
    rules: Vec<(String, usize, usize)>,
    peripheral: Option<(Vec<(char, usize)>, usize)>,
    normal_form_closed: Option<bool>,
    confluence_check_length: Option<usize>,
}

fn split_symbols(value: &str, line: usize, offset: usize) -> Result<Vec<(char, usize)>> {
    let mut out = Vec::new();
    let mut chars = value.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if let Some(&(_, next)) = chars.peek() {
            if !next.is_whitespace() {
                return Err(syntax(
                    line,
                    offset + i + 1,
                    "generator tokens must be single symbols",
                ));
            }
        }
        out.push((c, offset + i + 1));
    }
    Ok(out)
}

fn read_file(text: &str) -> Result<RawFile> {
    let mut raw = RawFile::default();
    let mut section: Option<String> = None;
    for (n, full_line) in text.lines().enumerate() {
        let line_no = n + 1;
        let content = match full_line.find('#') {
            Some(i) => &full_line[..i],
            None => full_line,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(syntax(line_no, 1, "unterminated section header"));
            }
            let name = trimmed[1..trimmed.len() - 1].trim().to_string();
            if name != "group" && name != "peripheral" {
                return Err(syntax(line_no, 2, format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(syntax(line_no, 1, "expected key = value"));
        };
        let key = content[..eq].trim();
        let value = &content[eq + 1..];
        let value_col = eq + 1;
        match (section.as_deref(), key) {
            (None, _) => return Err(syntax(line_no, 1, "key outside of a section")),
            (Some("group"), "name") => raw.name = Some(value.trim().to_string()),
            (Some("group"), "generators") => {
                raw.generators = Some((split_symbols(value, line_no, value_col)?, line_no))
            }
            (Some("group"), "rules") => {
                let mut start = 0;
                for piece in value.split(';') {
                    raw.rules
                        .push((piece.to_string(), line_no, value_col + start));
                    start += piece.len() + 1;
                }
            }
            (Some("peripheral"), "generators") => {
                raw.peripheral = Some((split_symbols(value, line_no, value_col)?, line_no))
            }
            (Some("peripheral"), "normal_form_closed") => {
                raw.normal_form_closed = Some(match value.trim() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(syntax(line_no, value_col + 1, "expected true or false")),
                })
            }
            (Some(_), "confluence_check_length") => {
                let v = value
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| syntax(line_no, value_col + 1, "expected a positive integer"))?;
                if v == 0 {
                    return Err(syntax(
                        line_no,
                        value_col + 1,
                        "expected a positive integer",
                    ));
                }
                raw.confluence_check_length = Some(v);
            }
            (Some(s), k) => return Err(syntax(line_no, 1, format!("unknown key '{k}' in [{s}]"))),
        }
    }
    Ok(raw)
}

fn parse_rule_word(gens: &GeneratorSet, text: &str, line: usize, col: usize) -> Result<Word> {
    let mut letters = Vec::new();
    for (i, c) in text.char_indices() {
        if c.is_whitespace() || c == 'ε' {
            continue;
        }
        let l = gens.lookup(c).ok_or_else(|| CoreError::UnknownSymbol {
            symbol: c.to_string(),
            line,
            column: col + i + 1,
        })?;
        letters.push(l);
    }
    Ok(Word(letters))
}

/// Parses a presentation file without running the confluence and closure
/// checks.
pub fn parse_presentation_unchecked(text: &str) -> Result<Fixture> {
    let raw = read_file(text)?;
    let name = raw.name.clone().unwrap_or_else(|| "unnamed".to_string());
    let Some((gen_tokens, gen_line)) = raw.generators else {
        return Err(syntax(1, 1, "missing generators in [group]"));
    };
    if gen_tokens.len() % 2 != 0 {
        return Err(syntax(gen_line, 1, "generator list must have even length"));
    }
    let pairs: Vec<(char, char)> = gen_tokens.chunks(2).map(|c| (c[0].0, c[1].0)).collect();
    let gens = GeneratorSet::from_pairs(&pairs).map_err(|e| match e {
        CoreError::InvalidParameter(m) => syntax(gen_line, 1, m),
        other => other,
    })?;

    let mut rules = Vec::new();
    for (piece, line, col) in &raw.rules {
        if piece.trim().is_empty() {
            continue;
        }
        let Some(arrow) = piece.find("->") else {
            return Err(syntax(
                *line,
                *col + 1,
                format!("expected lhs->rhs, found '{}'", piece.trim()),
            ));
        };
        let lhs = parse_rule_word(&gens, &piece[..arrow], *line, *col)?;
        let rhs = parse_rule_word(&gens, &piece[arrow + 2..], *line, *col + arrow + 2)?;
        if lhs.is_empty() {
            return Err(syntax(*line, *col + 1, "rule with empty left-hand side"));
        }
        rules.push(Rule { lhs, rhs });
    }
    let group = GroupPresentation::new(name, gens, rules)?;

    let mut sub_gens = Vec::new();
    if let Some((tokens, _)) = raw.peripheral {
        for (c, _) in tokens {
            let l = group
                .gens
                .lookup(c)
                .ok_or_else(|| CoreError::PeripheralNotInGroup(c.to_string()))?;
            if !sub_gens.contains(&l) {
                sub_gens.push(l);
            }
        }
    }
    let peripheral = PeripheralSpec::new(
        &group.gens,
        sub_gens,
        raw.normal_form_closed.unwrap_or(true),
    )?;
    let max_lhs = group.rws.max_lhs_len();
    let confluence_check_length = raw
        .confluence_check_length
        .unwrap_or(DEFAULT_CONFLUENCE_LENGTH)
        .max(max_lhs);
    Ok(Fixture {
        group,
        peripheral,
        confluence_check_length,
    })
}

/// Parses and validates a presentation file: rules are checked for bounded
/// confluence and the peripheral subgroup for normal-form closure, both up to
/// the file's `confluence_check_length`.
pub fn parse_presentation(text: &str) -> Result<Fixture> {
    let fixture = parse_presentation_unchecked(text)?;
    let p = &fixture.group;
    if let ConfluenceReport::Fail { word, left, right } =
        bounded_confluence_check(p, fixture.confluence_check_length)
    {
        return Err(CoreError::NonConfluent {
            word: p.format(&word),
            left: p.format(&left),
            right: p.format(&right),
        });
    }
    if fixture.peripheral.normal_form_closed {
        if let Some((w, nf)) =
            check_normal_form_closed(p, &fixture.peripheral, fixture.confluence_check_length)
        {
            return Err(CoreError::PeripheralNotClosed {
                word: p.format(&w),
                normal_form: p.format(&nf),
            });
        }
    }
    Ok(fixture)
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
