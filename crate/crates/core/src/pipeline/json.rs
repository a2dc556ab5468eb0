//! Recovering JSON objects from free-form model replies.

/// Byte ranges of the top-level balanced `{...}` regions, in order.
/// Braces inside JSON strings are ignored.
pub fn balanced_objects(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    while let Some(offset) = text[start..].find('{') {
        let open = start + offset;
        match closing_brace(bytes, open) {
            Some(close) => {
                out.push(&text[open..=close]);
                start = close + 1;
            }
            None => start = open + 1,
        }
    }
    out
}

fn closing_brace(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// The first balanced region that parses as a JSON object.
pub fn extract_object(text: &str) -> Result<serde_json::Value, String> {
    let regions = balanced_objects(text);
    if regions.is_empty() {
        return Err("reply contains no JSON object".into());
    }
    let mut first_err = None;
    for region in regions {
        match serde_json::from_str::<serde_json::Value>(region) {
            Ok(v) if v.is_object() => return Ok(v),
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert_with(|| format!("invalid JSON: {e}"));
            }
        }
    }
    Err(first_err.unwrap_or_else(|| "reply contains no JSON object".into()))
}
