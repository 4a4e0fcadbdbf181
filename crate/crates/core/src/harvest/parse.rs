use crate::error::{Error, Result};

/// Values this far outside `[0, 1]` are treated as formatting noise and clamped.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSimilarity {
    pub value: f64,
    /// Set when the response held several numbers that disagree.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct NumberToken {
    value: f64,
    has_point: bool,
}

/// Extracts a similarity in `[0, 1]` from a model response.
///
/// The first number in the text is used. Values in `(1, 100]` are read as
/// percentages unless the text also holds a decimal-point number `<= 1`.
pub fn parse_similarity(raw: &str) -> Result<ParsedSimilarity> {
    let tokens = tokenize(raw);
    let first = *tokens.first().ok_or_else(|| Error::Unparseable {
        raw: raw.to_string(),
        reason: "no numeric token".into(),
    })?;
    let has_fraction = tokens.iter().any(|t| t.has_point && t.value <= 1.0);
    let value = interpret(first.value, has_fraction).map_err(|reason| Error::Unparseable {
        raw: raw.to_string(),
        reason,
    })?;
    let conflicting = tokens[1..]
        .iter()
        .filter(|t| match interpret(t.value, has_fraction) {
            Ok(v) => (v - value).abs() > CLAMP_SLACK,
            Err(_) => true,
        })
        .count();
    let warning = (conflicting > 0).then(|| {
        format!(
            "ambiguous response: {} numbers found, {conflicting} conflicting; used the first",
            tokens.len()
        )
    });
    Ok(ParsedSimilarity { value, warning })
}

fn interpret(v: f64, has_fraction: bool) -> std::result::Result<f64, String> {
    if (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&v) {
        Ok(v.clamp(0.0, 1.0))
    } else if v > 1.0 && v <= 100.0 {
        if has_fraction {
            Err(format!("{v} is above 1 but the response also contains a fraction"))
        } else {
            Ok(v / 100.0)
        }
    } else {
        Err(format!("number {v} outside [0, 100]"))
    }
}

fn tokenize(text: &str) -> Vec<NumberToken> {
    let bytes = text.as_bytes();
    let alpha = |i: usize| bytes.get(i).is_some_and(u8::is_ascii_alphabetic);
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let start = pos;
        let mut cursor = pos;
        // A minus sign counts only when it does not join two words or numbers.
        if bytes[cursor] == b'-' && (start == 0 || !bytes[start - 1].is_ascii_alphanumeric()) {
            cursor += 1;
        }
        let digits_start = cursor;
        while cursor < bytes.len() && bytes[cursor].is_ascii_digit() {
            cursor += 1;
        }
        let int_digits = cursor - digits_start;
        let mut frac_digits = 0;
        if cursor + 1 < bytes.len() && bytes[cursor] == b'.' && bytes[cursor + 1].is_ascii_digit() {
            cursor += 1;
            while cursor < bytes.len() && bytes[cursor].is_ascii_digit() {
                cursor += 1;
                frac_digits += 1;
            }
        }
        if int_digits + frac_digits == 0 {
            pos = start + 1;
            continue;
        }
        // Digits that belong to a word such as "gpt4", "3D" or "cis-3-hexenol".
        let glued = (start > 0 && alpha(start - 1))
            || alpha(cursor)
            || (start > 1 && bytes[start - 1] == b'-' && alpha(start - 2))
            || (bytes.get(cursor) == Some(&b'-') && alpha(cursor + 1));
        if !glued {
            if let Ok(value) = text[start..cursor].parse::<f64>() {
                tokens.push(NumberToken {
                    value,
                    has_point: frac_digits > 0,
                });
            }
        }
        pos = cursor;
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(s: &str) -> f64 {
        parse_similarity(s).unwrap().value
    }

    #[test]
    fn direct_and_sentence() {
        assert_eq!(value("0.8"), 0.8);
        assert_eq!(value("The similarity is 0.35."), 0.35);
        assert_eq!(value(".5"), 0.5);
        assert_eq!(value("1"), 1.0);
        assert_eq!(value("0"), 0.0);
        assert_eq!(value("  0.72\n"), 0.72);
    }

    #[test]
    fn percentage_rescaling_enumeration() {
        // Independent oracle: for integer responses k, 0 and 1 are already on
        // the unit scale and 2..=100 are percentages.
        for k in 0..=100u32 {
            let expected = if k <= 1 { k as f64 } else { k as f64 / 100.0 };
            assert_eq!(value(&k.to_string()), expected, "response {k}");
        }
        assert_eq!(value("85"), 0.85);
        assert_eq!(value("85.5"), 0.855);
        assert_eq!(value("Similarity: 85%"), 0.85);
    }

    #[test]
    fn clamps_formatting_noise_only() {
        assert_eq!(value("1.0000000001"), 1.0);
        assert_eq!(value("-0.0000000001"), 0.0);
        assert!(parse_similarity("-0.2").is_err());
        assert!(parse_similarity("150").is_err());
    }

    #[test]
    fn rejects_missing_numbers() {
        assert!(matches!(
            parse_similarity("quite similar"),
            Err(Error::Unparseable { .. })
        ));
        assert!(parse_similarity("").is_err());
    }

    #[test]
    fn percentage_blocked_by_fraction() {
        assert!(parse_similarity("85 or 0.85").is_err());
    }

    #[test]
    fn conflicting_numbers_warn() {
        let p = parse_similarity("0.8 (on a scale of 0 to 1)").unwrap();
        assert_eq!(p.value, 0.8);
        assert!(p.warning.is_some());
        let p = parse_similarity("0.8, i.e. 0.80").unwrap();
        assert!(p.warning.is_none());
        assert!(parse_similarity("0.4").unwrap().warning.is_none());
    }

    #[test]
    fn hyphens_are_not_signs() {
        // "0-1" is a range, not 0 followed by -1
        let p = parse_similarity("On a 0-1 scale: 0.6").unwrap();
        assert_eq!(p.value, 0.0);
        assert_eq!(value("cis-3-hexenol vs beta-ionone: 0.3"), 0.3);
    }
}
