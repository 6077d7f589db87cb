use std::process::Command;

use super::IngestError;

pub(crate) fn normalize_newlines(text: &str) -> String {
    text.trim_start_matches('\u{feff}').replace("\r\n", "\n").replace('\r', "\n")
}

/// Trims line ends and collapses runs of blank lines to one.
fn tidy(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut blank = 0;
    for line in text.lines() {
        let line = line.trim_end();
        if line.trim().is_empty() {
            blank += 1;
            continue;
        }
        if !out.is_empty() {
            out.push_str(if blank > 0 { "\n\n" } else { "\n" });
        }
        blank = 0;
        out.push_str(line);
    }
    out
}

fn run_converter(bytes: &[u8], template: &str) -> Result<String, IngestError> {
    let failed = |m: String| IngestError::ConversionFailed(m);
    let dir = tempfile::tempdir().map_err(|e| failed(e.to_string()))?;
    let input = dir.path().join("input.pdf");
    let output = dir.path().join("output.md");
    std::fs::write(&input, bytes).map_err(|e| failed(e.to_string()))?;
    let args: Vec<String> = shlex::split(template)
        .filter(|a| !a.is_empty())
        .ok_or_else(|| failed(format!("cannot parse converter command {template:?}")))?
        .into_iter()
        .map(|a| {
            a.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
        })
        .collect();
    let status = Command::new(&args[0])
        .args(&args[1..])
        .output()
        .map_err(|e| failed(format!("{}: {e}", args[0])))?;
    if !status.status.success() {
        return Err(failed(format!(
            "converter exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr).trim()
        )));
    }
    let text = std::fs::read(&output).map_err(|e| failed(format!("converter wrote no output: {e}")))?;
    Ok(String::from_utf8_lossy(&text).into_owned())
}

fn builtin_pdf(bytes: &[u8]) -> Result<String, IngestError> {
    let owned = bytes.to_vec();
    match std::panic::catch_unwind(move || pdf_extract::extract_text_from_mem(&owned)) {
        Ok(Ok(text)) => Ok(text),
        Ok(Err(e)) => Err(IngestError::ConversionFailed(e.to_string())),
        Err(_) => Err(IngestError::ConversionFailed("PDF extractor crashed".into())),
    }
}

/// Text of a PDF, markdown or plain-text file. PDFs go through the
/// converter command when one is given (`{input}` and `{output}` are
/// replaced by file paths), else the built-in extractor.
pub fn extract_text(bytes: &[u8], converter_cmd: Option<&str>) -> Result<String, IngestError> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(IngestError::ConversionFailed("empty input".into()));
    }
    if bytes.starts_with(b"%PDF-") {
        let raw = match converter_cmd.filter(|c| !c.trim().is_empty()) {
            Some(cmd) => run_converter(bytes, cmd)?,
            None => builtin_pdf(bytes)?,
        };
        let text = tidy(&normalize_newlines(&raw));
        if text.is_empty() {
            return Err(IngestError::ConversionFailed("no extractable text".into()));
        }
        return Ok(text);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::UnsupportedFormat("not UTF-8 text or PDF".into()))?;
    if text.contains('\0') {
        return Err(IngestError::UnsupportedFormat("binary content".into()));
    }
    Ok(normalize_newlines(text))
}

#[cfg(test)]
mod tests {
    use super::super::text_to_pdf;
    use super::*;

    #[test]
    fn plain_text_only_normalizes_newlines() {
        assert_eq!(extract_text(b"a\r\nb\rc\n\nd", None).unwrap(), "a\nb\nc\n\nd");
    }

    #[test]
    fn empty_and_binary_inputs() {
        assert!(matches!(extract_text(b"", None), Err(IngestError::ConversionFailed(_))));
        assert!(matches!(extract_text(b" \n", None), Err(IngestError::ConversionFailed(_))));
        assert!(matches!(extract_text(&[0xff, 0xfe, 0x00], None), Err(IngestError::UnsupportedFormat(_))));
    }

    #[test]
    fn builtin_pdf_extraction() {
        let pdf = text_to_pdf(&["Thrombin aptamer study", "", "The aptamer GGTTGGTGTGGTTGG binds thrombin."]);
        let text = extract_text(&pdf, None).unwrap();
        assert!(text.contains("GGTTGGTGTGGTTGG"), "{text:?}");
        assert!(text.starts_with("Thrombin aptamer study"));
    }

    #[test]
    fn broken_pdf_fails_cleanly() {
        assert!(matches!(extract_text(b"%PDF-1.4\ngarbage", None), Err(IngestError::ConversionFailed(_))));
    }

    #[cfg(unix)]
    #[test]
    fn converter_hook() {
        let pdf = text_to_pdf(&["ignored"]);
        let ok = extract_text(&pdf, Some("sh -c 'printf \"from hook\\n\" > \"$1\"' sh {output}")).unwrap();
        assert_eq!(ok, "from hook");
        let err = extract_text(&pdf, Some("sh -c 'exit 3'")).unwrap_err();
        assert!(matches!(err, IngestError::ConversionFailed(m) if m.contains("exited")));
    }
}
