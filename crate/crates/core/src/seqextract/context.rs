use super::Span;

/// Maximum characters taken on each side of the span.
pub const CONTEXT_CAP: usize = 1500;

/// Byte ranges of paragraphs: maximal regions separated by blank lines.
pub fn paragraph_ranges(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut para_start: Option<usize> = None;
    let mut para_end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() {
            if let Some(s) = para_start.take() {
                out.push((s, para_end));
            }
        } else {
            let lead = content.len() - content.trim_start().len();
            if para_start.is_none() {
                para_start = Some(offset + lead);
            }
            para_end = offset + content.trim_end().len();
        }
        offset += line.len();
    }
    if let Some(s) = para_start {
        out.push((s, para_end));
    }
    out
}

fn floor_boundary(text: &str, mut i: usize) -> usize {
    while !text.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn ceil_boundary(text: &str, mut i: usize) -> usize {
    while i < text.len() && !text.is_char_boundary(i) {
        i += 1;
    }
    i
}

/// Byte range of the paragraph containing `span` plus one paragraph on each
/// side, clipped to [`CONTEXT_CAP`] characters before and after the span.
pub fn context_window_range(text: &str, span: Span) -> (usize, usize) {
    let paras = paragraph_ranges(text);
    if paras.is_empty() {
        return (span.start.min(text.len()), span.end.min(text.len()));
    }
    let idx = paras
        .iter()
        .position(|&(s, e)| span.start >= s && span.start < e.max(s + 1))
        .or_else(|| paras.iter().position(|&(s, _)| s > span.start))
        .unwrap_or(paras.len() - 1);
    let start = paras[idx.saturating_sub(1)].0;
    let end = paras[(idx + 1).min(paras.len() - 1)].1.max(span.end.min(text.len()));

    let before: usize = text[..span.start.min(text.len())]
        .char_indices()
        .rev()
        .nth(CONTEXT_CAP - 1)
        .map(|(i, _)| i)
        .unwrap_or(0);
    let after_end = span.end.min(text.len());
    let after: usize = text[after_end..]
        .char_indices()
        .nth(CONTEXT_CAP)
        .map(|(i, _)| after_end + i)
        .unwrap_or(text.len());
    let start = floor_boundary(text, start.max(before).min(span.start));
    let end = ceil_boundary(text, end.min(after).max(after_end));
    (start, end)
}

/// The paragraph holding `span` with its neighbours (see
/// [`context_window_range`]).
pub fn context_window(text: &str, span: Span) -> String {
    let (s, e) = context_window_range(text, span);
    text[s..e].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_of(text: &str, needle: &str) -> Span {
        let s = text.find(needle).unwrap();
        Span::new(s, s + needle.len())
    }

    #[test]
    fn middle_paragraph_gets_both_neighbours() {
        let text = "First para.\n\nMiddle XYZ para.\n\nLast para.";
        assert_eq!(context_window(text, span_of(text, "XYZ")), text);
    }

    #[test]
    fn first_paragraph_gets_next_only() {
        let text = "First XYZ para.\n\nSecond para.\n\nThird para.";
        assert_eq!(context_window(text, span_of(text, "XYZ")), "First XYZ para.\n\nSecond para.");
    }

    #[test]
    fn single_paragraph() {
        let text = "  Only XYZ here.  \n";
        assert_eq!(context_window(text, span_of(text, "XYZ")), "Only XYZ here.");
    }

    #[test]
    fn cap_applies_on_each_side() {
        let long = "w".repeat(4000);
        let text = format!("{long} XYZ {long}");
        let ctx = context_window(&text, span_of(&text, "XYZ"));
        assert_eq!(ctx.chars().count(), CONTEXT_CAP * 2 + 3);
        assert!(ctx.contains("XYZ"));
    }

    #[test]
    fn multibyte_text_is_safe() {
        let text = format!("{}µ XYZ µ{}", "é".repeat(2000), "ü".repeat(2000));
        let ctx = context_window(&text, span_of(&text, "XYZ"));
        assert!(ctx.contains("XYZ"));
    }

    #[test]
    fn paragraphs_split_on_blank_lines_with_spaces() {
        let text = "a\nb\n  \n\nc";
        assert_eq!(paragraph_ranges(text), vec![(0, 3), (8, 9)]);
    }
}
