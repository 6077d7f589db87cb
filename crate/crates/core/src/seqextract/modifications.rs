//! Decoration grammar around a matched sequence:
//!
//! ```text
//! token    := prefix* body suffix*
//! prefix   := ("5'" | "3'") sep | "^" LABEL sep
//! suffix   := sep ("3'" | "5'") | sep "^" LABEL
//! body     := (base | "*" code | sep)+
//! code     := [a-z]{1,3} [A-Z]          e.g. *dT, *mC
//! sep      := whitespace or hyphen
//! ```
//!
//! `*code` at the very start or end of the body is a terminal modification;
//! anywhere else it is interior and records how many bases precede it.

use thiserror::Error;

use super::{is_nucleotide, is_prime, is_separator, ModPosition, Modification, Notation, Orientation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecorationError {
    #[error("unparseable decoration {found:?} at byte {at}")]
    Unparseable { at: usize, found: char },
    #[error("conflicting orientation markers")]
    ConflictingOrientation,
    #[error("no bases left after removing decorations")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedToken {
    pub core: String,
    pub modifications: Vec<Modification>,
    pub orientation: Orientation,
}

impl ParsedToken {
    /// Canonical rendering: markers, modifications and the core with no
    /// separators.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self.orientation {
            Orientation::Forward => out.push_str("5'-"),
            Orientation::Reversed => out.push_str("3'-"),
            Orientation::Unmarked => {}
        }
        out.push_str(&render_core(&self.core, &self.modifications));
        match self.orientation {
            Orientation::Forward => out.push_str("-3'"),
            Orientation::Reversed => out.push_str("-5'"),
            Orientation::Unmarked => {}
        }
        out
    }
}

/// Re-inserts modifications into a core.
pub(crate) fn render_core(core: &str, mods: &[Modification]) -> String {
    let mut out = String::new();
    for m in mods.iter().filter(|m| m.position == ModPosition::FivePrimeEnd) {
        match m.notation {
            Notation::Caret => {
                out.push('^');
                out.push_str(&m.code);
                out.push('-');
            }
            Notation::Star => {
                out.push('*');
                out.push_str(&m.code);
            }
        }
    }
    for (i, base) in core.chars().enumerate() {
        for m in mods.iter().filter(|m| m.position == ModPosition::Interior(i)) {
            push_interior(&mut out, m);
        }
        out.push(base);
    }
    let len = core.chars().count();
    for m in mods.iter().filter(|m| matches!(m.position, ModPosition::Interior(i) if i >= len)) {
        push_interior(&mut out, m);
    }
    for m in mods.iter().filter(|m| m.position == ModPosition::ThreePrimeEnd) {
        match m.notation {
            Notation::Caret => {
                out.push_str("-^");
                out.push_str(&m.code);
            }
            Notation::Star => {
                out.push('*');
                out.push_str(&m.code);
            }
        }
    }
    out
}

fn push_interior(out: &mut String, m: &Modification) {
    out.push(match m.notation {
        Notation::Star => '*',
        Notation::Caret => '^',
    });
    out.push_str(&m.code);
}

/// Length in bytes of a `*code` token starting at `s[0] == '*'`.
pub(crate) fn star_code_len(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('*')?;
    let lower = rest.chars().take_while(|c| c.is_ascii_lowercase()).count();
    if !(1..=3).contains(&lower) {
        return None;
    }
    let last = rest[lower..].chars().next()?;
    last.is_ascii_uppercase().then_some(1 + lower + 1)
}

fn label_len(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('^')?;
    let n = rest.chars().take_while(|c| c.is_ascii_alphanumeric()).count();
    (n > 0).then_some(1 + n)
}

fn marker_at_start(s: &str) -> Option<char> {
    let mut it = s.chars();
    let digit = it.next()?;
    let prime = it.next()?;
    ((digit == '5' || digit == '3') && is_prime(prime)).then_some(digit)
}

fn marker_at_end(s: &str) -> Option<(char, usize)> {
    let mut it = s.chars().rev();
    let prime = it.next()?;
    let digit = it.next()?;
    ((digit == '5' || digit == '3') && is_prime(prime)).then(|| (digit, digit.len_utf8() + prime.len_utf8()))
}

fn set_orientation(current: &mut Orientation, new: Orientation) -> Result<(), DecorationError> {
    match (*current, new) {
        (Orientation::Unmarked, n) => {
            *current = n;
            Ok(())
        }
        (c, n) if c == n => Ok(()),
        _ => Err(DecorationError::ConflictingOrientation),
    }
}

/// Splits a matched token into its core, its modifications and its
/// orientation markers.
pub fn parse_modifications(raw: &str) -> Result<ParsedToken, DecorationError> {
    let mut orientation = Orientation::Unmarked;
    let mut five: Vec<Modification> = Vec::new();
    let mut three: Vec<Modification> = Vec::new();

    let base_offset = raw.len() - raw.trim_start().len();
    let mut s = raw.trim();
    let mut offset = base_offset;

    // prefixes
    loop {
        if let Some(d) = marker_at_start(s) {
            let o = if d == '5' { Orientation::Forward } else { Orientation::Reversed };
            set_orientation(&mut orientation, o)?;
            let consumed = d.len_utf8() + s[d.len_utf8()..].chars().next().unwrap().len_utf8();
            let after = &s[consumed..];
            let trimmed = after.trim_start_matches(is_separator);
            offset += s.len() - trimmed.len();
            s = trimmed;
        } else if let Some(n) = label_len(s) {
            let after = &s[n..];
            if !after.starts_with(is_separator) {
                break;
            }
            five.push(Modification {
                position: ModPosition::FivePrimeEnd,
                code: s[1..n].to_string(),
                notation: Notation::Caret,
            });
            let trimmed = after.trim_start_matches(is_separator);
            offset += s.len() - trimmed.len();
            s = trimmed;
        } else {
            break;
        }
    }

    // suffixes, collected back to front
    loop {
        if let Some((d, n)) = marker_at_end(s) {
            let before = &s[..s.len() - n];
            if !before.ends_with(is_separator) {
                break;
            }
            let o = if d == '3' { Orientation::Forward } else { Orientation::Reversed };
            set_orientation(&mut orientation, o)?;
            s = before.trim_end_matches(is_separator);
        } else if let Some(caret) = s.rfind('^') {
            let tail = &s[caret..];
            if label_len(tail) != Some(tail.len()) || !s[..caret].ends_with(is_separator) {
                break;
            }
            three.insert(
                0,
                Modification {
                    position: ModPosition::ThreePrimeEnd,
                    code: tail[1..].to_string(),
                    notation: Notation::Caret,
                },
            );
            s = s[..caret].trim_end_matches(is_separator);
        } else {
            break;
        }
    }

    // body
    let mut core = String::new();
    let mut stars: Vec<(usize, String)> = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i..].chars().next().unwrap();
        if is_nucleotide(c) {
            core.push(c.to_ascii_uppercase());
            i += 1;
        } else if is_separator(c) {
            i += c.len_utf8();
        } else if let Some(n) = star_code_len(&s[i..]) {
            stars.push((core.len(), s[i + 1..i + n].to_string()));
            i += n;
        } else {
            return Err(DecorationError::Unparseable { at: offset + i, found: c });
        }
    }
    if core.is_empty() {
        return Err(DecorationError::Empty);
    }
    let len = core.len();
    let mut modifications = five;
    let mut tail_stars = Vec::new();
    for (idx, code) in stars {
        let position = if idx == 0 {
            ModPosition::FivePrimeEnd
        } else if idx == len {
            ModPosition::ThreePrimeEnd
        } else {
            ModPosition::Interior(idx)
        };
        let m = Modification {
            position,
            code,
            notation: Notation::Star,
        };
        if position == ModPosition::ThreePrimeEnd {
            tail_stars.push(m);
        } else {
            modifications.push(m);
        }
    }
    modifications.extend(tail_stars);
    modifications.extend(three);
    Ok(ParsedToken {
        core,
        modifications,
        orientation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CORE: &str = "ACGTTGCAACGTTGCAACGT";

    #[test]
    fn orientation_markers_are_not_modifications() {
        let p = parse_modifications(&format!("5'-{CORE}-3'")).unwrap();
        assert_eq!(p.core, CORE);
        assert!(p.modifications.is_empty());
        assert_eq!(p.orientation, Orientation::Forward);
        let p = parse_modifications(&format!("5\u{2032}-{CORE}-3\u{2032}")).unwrap();
        assert_eq!(p.core, CORE);
    }

    #[test]
    fn caret_label_at_five_prime_end() {
        let p = parse_modifications(&format!("^FAM-{CORE}")).unwrap();
        assert_eq!(p.core, CORE);
        assert_eq!(
            p.modifications,
            vec![Modification {
                position: ModPosition::FivePrimeEnd,
                code: "FAM".into(),
                notation: Notation::Caret
            }]
        );
    }

    #[test]
    fn interior_star_modification() {
        let p = parse_modifications("ACGTACGTAC*dTGTACGTACGT").unwrap();
        assert_eq!(p.core, "ACGTACGTACGTACGTACGT");
        assert_eq!(
            p.modifications,
            vec![Modification {
                position: ModPosition::Interior(10),
                code: "dT".into(),
                notation: Notation::Star
            }]
        );
    }

    #[test]
    fn terminal_stars_and_labels() {
        let raw = format!("5'-^FAM-*dT{CORE}*iT-^BHQ1-3'");
        let p = parse_modifications(&raw).unwrap();
        assert_eq!(p.core, CORE);
        let positions: Vec<_> = p.modifications.iter().map(|m| (m.position, m.code.as_str())).collect();
        assert_eq!(
            positions,
            vec![
                (ModPosition::FivePrimeEnd, "FAM"),
                (ModPosition::FivePrimeEnd, "dT"),
                (ModPosition::ThreePrimeEnd, "iT"),
                (ModPosition::ThreePrimeEnd, "BHQ1"),
            ]
        );
        assert_eq!(p.render(), raw);
    }

    #[test]
    fn wrapped_body_and_lowercase() {
        let p = parse_modifications("acgtacgtac\ngtacgtacgt").unwrap();
        assert_eq!(p.core, "ACGTACGTACGTACGTACGT");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_modifications("ACGT#ACGT"),
            Err(DecorationError::Unparseable { found: '#', .. })
        ));
        assert_eq!(parse_modifications("5'-ACGT-5'"), Err(DecorationError::ConflictingOrientation));
        assert_eq!(parse_modifications("^FAM-"), Err(DecorationError::Empty));
    }

    fn arb_mod_code() -> impl Strategy<Value = String> {
        ("[a-z]{1,3}", "[A-Z]").prop_map(|(a, b)| format!("{a}{b}"))
    }

    proptest! {
        #[test]
        fn render_then_parse_round_trips(
            core in "[ACGT]{2,40}",
            fives in proptest::collection::vec("[A-Z][A-Za-z0-9]{0,5}", 0..2),
            five_star in proptest::option::of(arb_mod_code()),
            interior in proptest::collection::vec((1usize..39, arb_mod_code()), 0..3),
            three_star in proptest::option::of(arb_mod_code()),
            threes in proptest::collection::vec("[A-Z][A-Za-z0-9]{0,5}", 0..2),
            orientation in prop_oneof![Just(Orientation::Unmarked), Just(Orientation::Forward), Just(Orientation::Reversed)],
        ) {
            let len = core.len();
            let mut mods: Vec<Modification> = fives.into_iter().map(|code| Modification { position: ModPosition::FivePrimeEnd, code, notation: Notation::Caret }).collect();
            if let Some(code) = five_star { mods.push(Modification { position: ModPosition::FivePrimeEnd, code, notation: Notation::Star }); }
            let mut inner: Vec<_> = interior.into_iter().filter(|(i, _)| *i < len).collect();
            inner.sort_by_key(|(i, _)| *i);
            for (i, code) in inner { mods.push(Modification { position: ModPosition::Interior(i), code, notation: Notation::Star }); }
            if let Some(code) = three_star { mods.push(Modification { position: ModPosition::ThreePrimeEnd, code, notation: Notation::Star }); }
            for code in threes { mods.push(Modification { position: ModPosition::ThreePrimeEnd, code, notation: Notation::Caret }); }
            let token = ParsedToken { core: core.clone(), modifications: mods, orientation };
            let raw = token.render();
            let parsed = parse_modifications(&raw).unwrap();
            prop_assert_eq!(&parsed, &token);
            prop_assert_eq!(parsed.render(), raw);
        }
    }
}
