/// A token as a byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }
}

/// Pluggable tokenizer. Token ranges must be ordered, non-overlapping and on char boundaries.
pub trait Tokenizer: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<Token>;

    fn count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }
}

/// Splits on whitespace; each punctuation or symbol character is its own token,
/// runs of alphanumeric characters form one token.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultTokenizer;

impl Tokenizer for DefaultTokenizer {
    fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut tokens = Vec::new();
        let mut word_start: Option<usize> = None;
        for (i, c) in text.char_indices() {
            if c.is_alphanumeric() || c == '_' {
                word_start.get_or_insert(i);
                continue;
            }
            if let Some(start) = word_start.take() {
                tokens.push(Token { start, end: i });
            }
            if !c.is_whitespace() {
                tokens.push(Token { start: i, end: i + c.len_utf8() });
            }
        }
        if let Some(start) = word_start {
            tokens.push(Token { start, end: text.len() });
        }
        tokens
    }
}

/// Token count under the default tokenizer.
pub fn count_tokens(text: &str) -> usize {
    DefaultTokenizer.count(text)
}

/// The first `n` tokens of `text`, as the original substring.
pub fn prefix_tokens<'a>(tokenizer: &dyn Tokenizer, text: &'a str, n: usize) -> &'a str {
    let tokens = tokenizer.tokenize(text);
    match tokens.get(n.min(tokens.len()).wrapping_sub(1)) {
        Some(last) if n > 0 => &text[tokens[0].start..last.end],
        _ => "",
    }
}
