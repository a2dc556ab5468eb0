//! Answer-letter extraction from free-form completions.

use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;

use crate::benchmark::letter_index;
use crate::pipeline::balanced_objects;

fn patterns() -> &'static [Regex] {
    static P: OnceLock<Vec<Regex>> = OnceLock::new();
    P.get_or_init(|| {
        [
            r"(?i)\banswer\s+is\s*[:\-]?\s*[\(\[\*]*([a-f])\b",
            r"(?i)\banswer\s*:\s*[\(\[\*]*([a-f])\b",
            r"\(([A-Fa-f])\)",
            r"(?m)^[ \t>*#\-]*[\(\[]?([A-Fa-f])[\)\]\.:]?[ \t*]*$",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern"))
        .collect()
    })
}

// A competing letter joined to the winner by "or", "and", "/" or ",".
// Only capitals or parenthesized letters count, so articles are not letters.
fn alternative_after() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| {
        Regex::new(r"^[\)\]\*]*\s*(?:,|/|\bor\b|\band\b)\s*(?:\(([A-Fa-f])\)|\*{0,2}([A-F])\b)").expect("static pattern")
    })
}

fn alternative_before() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| {
        Regex::new(r"(?:\(([A-Fa-f])\)|\b([A-F])\b)\**\s*(?:,|/|\bor\b|\band\b)\s*[\(\[\*]*$").expect("static pattern")
    })
}

fn captured_letter(caps: &regex::Captures<'_>) -> char {
    caps.get(1).or_else(|| caps.get(2)).and_then(|m| m.as_str().chars().next()).expect("one group matched")
}

fn in_range(letter: char, n_options: usize) -> Option<usize> {
    letter_index(letter).filter(|&i| i < n_options)
}

fn from_json(text: &str, n_options: usize) -> Option<usize> {
    balanced_objects(text)
        .into_iter()
        .filter_map(|obj| serde_json::from_str::<Value>(obj).ok())
        .filter_map(|v| {
            let s = v.get("answer")?.as_str()?.trim();
            let s = s.trim_matches(|c| matches!(c, '(' | ')' | '.' | '*'));
            let mut chars = s.chars();
            let c = chars.next()?;
            if chars.next().is_some() {
                return None;
            }
            in_range(c, n_options)
        })
        .next_back()
}

/// Predicted option index, or `None` when no unambiguous choice is found.
///
/// A JSON object with a letter `answer` field takes precedence; otherwise the
/// last of the phrase patterns (`answer is X`, `answer: X`, `(X)`, a lone
/// letter on its own line) decides. A lowercase letter followed by a word
/// ("answer is a stroke") is prose, not a choice. A winning letter directly
/// paired with a different one ("answer is A or B") is ambiguous.
pub fn extract_choice(text: &str, n_options: usize) -> Option<usize> {
    if let Some(i) = from_json(text, n_options) {
        return Some(i);
    }
    let mut matches: Vec<(usize, usize, char)> = Vec::new();
    for re in patterns() {
        for caps in re.captures_iter(text) {
            let m = caps.get(1).expect("one group");
            let c = m.as_str().chars().next().expect("non-empty");
            let rest = &text[m.end()..];
            if c.is_ascii_lowercase() && rest.starts_with(|ch: char| ch.is_whitespace()) && rest.trim_start().starts_with(|ch: char| ch.is_alphabetic()) {
                let next_word: String = rest.trim_start().chars().take_while(|ch| ch.is_alphabetic()).collect();
                if !matches!(next_word.as_str(), "or" | "and") {
                    continue;
                }
            }
            if in_range(c, n_options).is_some() {
                matches.push((m.start(), m.end(), c));
            }
        }
    }
    let last = matches.iter().map(|m| m.0).max()?;
    let winners: Vec<&(usize, usize, char)> = matches.iter().filter(|m| m.0 == last).collect();
    let (start, end, letter) = *winners[0];
    if winners.iter().any(|w| !w.2.eq_ignore_ascii_case(&letter)) {
        return None;
    }
    let prefix = text[..start].strip_suffix(['(', '[', '*']).unwrap_or(&text[..start]);
    let rivals = [alternative_after().captures(&text[end..]), alternative_before().captures(prefix)];
    if rivals.iter().flatten().any(|c| !captured_letter(c).eq_ignore_ascii_case(&letter)) {
        return None;
    }
    in_range(letter, n_options)
}
