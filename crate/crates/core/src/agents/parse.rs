//! Action extraction from free-form agent replies. The decision token is
//! a single integer in square brackets; the last such token wins, since
//! reasoning text often carries intermediate bracketed candidates.

use regex::Regex;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseActionError {
    #[error("no bracketed integer action found in reply")]
    NoActionFound,
    #[error("bracketed action is negative: {value}")]
    NegativeAction { value: i64 },
}

fn action_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(-?\d+)\s*\]").expect("valid regex"))
}

/// Extract the last `[n]` token. Values beyond u32 saturate; bounds
/// clamping downstream keeps them sane.
pub fn parse_action(text: &str) -> Result<u32, ParseActionError> {
    let captures: Vec<&str> = action_regex()
        .captures_iter(text)
        .map(|c| c.get(1).expect("group 1 always present").as_str())
        .collect();
    let last = captures.last().ok_or(ParseActionError::NoActionFound)?;
    if let Some(digits) = last.strip_prefix('-') {
        let value = digits.parse::<i64>().unwrap_or(i64::MAX);
        return Err(ParseActionError::NegativeAction { value: -value });
    }
    Ok(last.parse::<u32>().unwrap_or(u32::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extracts_trailing_decision() {
        let reply = "Given the persistent upstream backlog (36 units) and fluctuating demand up to 8 units, ordering 12 units maintains the safety buffer strategy to preempt stockouts despite unreliable supplier deliveries, ensuring future coverage after 2-round lead time. [12]";
        assert_eq!(parse_action(reply), Ok(12));
    }

    #[test]
    fn last_bracket_wins() {
        assert_eq!(parse_action("I considered [28] but choose [30]"), Ok(30));
    }

    #[test]
    fn missing_action_is_an_error() {
        assert_eq!(parse_action("no decision given"), Err(ParseActionError::NoActionFound));
        assert_eq!(parse_action("a list [1, 2, 3] is not a decision"), Err(ParseActionError::NoActionFound));
    }

    #[test]
    fn negative_action_is_an_error() {
        assert_eq!(
            parse_action("cutting back [-4]"),
            Err(ParseActionError::NegativeAction { value: -4 })
        );
    }

    #[test]
    fn whitespace_inside_brackets_tolerated() {
        assert_eq!(parse_action("order [ 7 ] now"), Ok(7));
    }

    #[test]
    fn absurdly_large_values_saturate() {
        assert_eq!(parse_action("[99999999999999999999]"), Ok(u32::MAX));
    }

    proptest! {
        #[test]
        fn any_single_bracketed_integer_roundtrips(n in 0u32..1_000_000, prefix in "[a-zA-Z ,.0-9]{0,40}", suffix in "[a-zA-Z ,.]{0,40}") {
            // prefix may contain digits but no brackets, so [n] stays the only token
            let reply = format!("{prefix} [{n}] {suffix}");
            prop_assert_eq!(parse_action(&reply), Ok(n));
        }
    }
}
