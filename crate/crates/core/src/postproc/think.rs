use super::RejectReason;

const OPEN: &str = "<think>";
const CLOSE: &str = "</think>";

/// Splits a response into its reasoning trace and the text after `</think>`.
///
/// The response must start with `<think>` and contain exactly one open and
/// one close tag, so that `"<think>" + trace + "</think>" + remainder`
/// rebuilds the input byte for byte.
pub fn extract_think(response_text: &str) -> Result<(&str, &str), RejectReason> {
    if !response_text.starts_with(OPEN)
        || response_text.matches(OPEN).count() != 1
        || response_text.matches(CLOSE).count() != 1
    {
        return Err(RejectReason::MissingThink);
    }
    let body = &response_text[OPEN.len()..];
    let close = body.find(CLOSE).ok_or(RejectReason::MissingThink)?;
    Ok((&body[..close], &body[close + CLOSE.len()..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_trace_and_answer() {
        assert_eq!(extract_think("<think>plan</think>final"), Ok(("plan", "final")));
        assert_eq!(extract_think("<think></think>"), Ok(("", "")));
    }

    #[test]
    fn malformed_spans() {
        for bad in [
            "<think>plan",
            "no tags at all",
            "plan</think>final",
            "</think><think>x",
            "<think>a</think><think>b</think>",
            "<think>a<think>b</think></think>",
            "preamble <think>a</think>b",
        ] {
            assert_eq!(extract_think(bad), Err(RejectReason::MissingThink), "{bad}");
        }
    }
}
