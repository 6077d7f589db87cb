use std::sync::LazyLock;

use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{context_window, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AffinityKind {
    Kd,
    Ki,
    IC50,
    EC50,
}

impl AffinityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AffinityKind::Kd => "Kd",
            AffinityKind::Ki => "Ki",
            AffinityKind::IC50 => "IC50",
            AffinityKind::EC50 => "EC50",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinityMeasurement {
    pub kind: AffinityKind,
    /// Value in `unit`, with any `e`/`× 10^` exponent applied.
    pub value: Decimal,
    /// Unit as written.
    pub unit: String,
    #[serde(rename = "value_nM")]
    pub value_nm: Decimal,
    pub span: Span,
    pub context: String,
    pub source_doc: Option<String>,
}

/// Multiplier taking a value in `unit` to nanomolar.
pub fn unit_factor_nm(unit: &str) -> Option<Decimal> {
    Some(match unit {
        "pM" => Decimal::new(1, 3),
        "nM" => Decimal::ONE,
        "µM" | "μM" | "uM" => Decimal::new(1_000, 0),
        "mM" => Decimal::new(1_000_000, 0),
        "M" => Decimal::new(1_000_000_000, 0),
        _ => return None,
    })
}

static AFFINITY_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)
        \b(?P<kind> K_?[dD] | K_?i | IC50 | IC₅₀ | EC50 | EC₅₀ )
        (?:\s+values?)?
        \s* (?: = | : | ≈ | ~ | \bof\b ) \s*
        (?P<num> \d+(?:\.\d+)? | \.\d+ )
        (?: [eE] (?P<exp>[-−+]?\d{1,2}) )?
        (?: \s* (?: ± | \+/- | \+/− ) \s* \d+(?:\.\d+)? )?
        (?: \s* [×x] \s* 10 (?: \^ (?P<exp2>[-−+]?\d{1,2}) | (?P<sup>⁻?[⁰¹²³⁴⁵⁶⁷⁸⁹]{1,2}) ) )?
        \s* (?P<unit> pM | nM | µM | μM | uM | mM | M ) \b
        ",
    )
    .expect("affinity pattern")
});

fn parse_exponent(s: &str) -> Option<i32> {
    let mut out = String::new();
    for c in s.chars() {
        out.push(match c {
            '−' | '⁻' => '-',
            '⁰' => '0',
            '¹' => '1',
            '²' => '2',
            '³' => '3',
            '⁴' => '4',
            '⁵' => '5',
            '⁶' => '6',
            '⁷' => '7',
            '⁸' => '8',
            '⁹' => '9',
            c => c,
        });
    }
    out.parse().ok()
}

fn pow10(exp: i32) -> Option<Decimal> {
    if exp.unsigned_abs() > 20 {
        return None;
    }
    let base = Decimal::from_i128_with_scale(10i128.pow(exp.unsigned_abs()), 0);
    if exp >= 0 {
        Some(base)
    } else {
        Decimal::ONE.checked_div(base)
    }
}

/// Finds `{kind}{separator}{number}{unit}` statements. Comparators such as
/// `<` or `>` never match.
pub fn extract_affinities(text: &str) -> Vec<AffinityMeasurement> {
    let mut out = Vec::new();
    for caps in AFFINITY_RE.captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let kind = match &caps["kind"] {
            k if k.starts_with('K') && k.ends_with(['d', 'D']) => AffinityKind::Kd,
            k if k.starts_with('K') => AffinityKind::Ki,
            k if k.starts_with("IC") => AffinityKind::IC50,
            _ => AffinityKind::EC50,
        };
        let Ok(mut value) = caps["num"].parse::<Decimal>() else {
            continue;
        };
        let exp = caps
            .name("exp")
            .or_else(|| caps.name("exp2"))
            .or_else(|| caps.name("sup"))
            .map(|m| parse_exponent(m.as_str()));
        if let Some(exp) = exp {
            match exp.and_then(pow10).and_then(|p| value.checked_mul(p)) {
                Some(v) => value = v,
                None => continue,
            }
        }
        let unit = caps["unit"].to_string();
        let Some(value_nm) = unit_factor_nm(&unit).and_then(|f| value.checked_mul(f)) else {
            continue;
        };
        if value <= Decimal::ZERO {
            continue;
        }
        let span = Span::new(whole.start(), whole.end());
        out.push(AffinityMeasurement {
            kind,
            value: value.normalize(),
            unit,
            value_nm: value_nm.normalize(),
            span,
            context: context_window(text, span),
            source_doc: None,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(text: &str) -> AffinityMeasurement {
        let found = extract_affinities(text);
        assert_eq!(found.len(), 1, "{text}: {found:?}");
        found.into_iter().next().unwrap()
    }

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn plain_kd_in_nanomolar() {
        let m = one("Kd = 4.5 nM");
        assert_eq!((m.kind, m.value, m.unit.as_str(), m.value_nm), (AffinityKind::Kd, dec("4.5"), "nM", dec("4.5")));
    }

    #[test]
    fn micromolar_with_of() {
        let m = one("KD of 2 µM");
        assert_eq!((m.kind, m.value, m.unit.as_str(), m.value_nm), (AffinityKind::Kd, dec("2"), "µM", dec("2000")));
    }

    #[test]
    fn comparators_are_rejected() {
        for text in ["Kd < 5 nM", "Kd > 5 nM", "Kd ≤ 5 nM", "Kd = <5 nM", "Kd in the low nM range"] {
            assert!(extract_affinities(text).is_empty(), "{text}");
        }
    }

    #[test]
    fn every_kind_and_unit() {
        // value_nM written out by hand from the unit table.
        let cases = [
            ("K_d: 350 pM", AffinityKind::Kd, "0.35"),
            ("Ki ≈ 12 nM", AffinityKind::Ki, "12"),
            ("K_i ~ 0.8 uM", AffinityKind::Ki, "800"),
            ("IC50 = 1.5 mM", AffinityKind::IC50, "1500000"),
            ("IC₅₀ of 3 μM", AffinityKind::IC50, "3000"),
            ("EC50 = 2 M", AffinityKind::EC50, "2000000000"),
            ("EC₅₀: 40 nM", AffinityKind::EC50, "40"),
        ];
        for (text, kind, nm) in cases {
            let m = one(text);
            assert_eq!(m.kind, kind, "{text}");
            assert_eq!(m.value_nm, dec(nm), "{text}");
        }
    }

    #[test]
    fn scientific_notation() {
        assert_eq!(one("Kd = 4.5e-9 M").value_nm, dec("4.5"));
        assert_eq!(one("Kd = 4.5 × 10^-9 M").value_nm, dec("4.5"));
        assert_eq!(one("Kd = 4.5 × 10⁻⁹ M").value_nm, dec("4.5"));
        assert_eq!(one("Kd = 2.1 x 10^-7 M").value_nm, dec("210"));
    }

    #[test]
    fn error_terms_are_dropped_but_kept_in_context() {
        let text = "The Kd = 25 ± 3 nM for thrombin.";
        let m = one(text);
        assert_eq!(m.value, dec("25"));
        assert!(m.context.contains("± 3"));
    }

    #[test]
    fn value_word_and_multiple_matches() {
        let found = extract_affinities("a Kd value of 10 nM and an IC50 = 2 µM were seen");
        let kinds: Vec<_> = found.iter().map(|m| m.kind).collect();
        assert_eq!(kinds, vec![AffinityKind::Kd, AffinityKind::IC50]);
    }

    #[test]
    fn spans_point_at_text() {
        let text = "binding (Kd = 7 nM) was strong";
        let m = one(text);
        assert_eq!(&text[m.span.start..m.span.end], "Kd = 7 nM");
    }

    #[test]
    fn unknown_units_and_zero_values() {
        assert!(extract_affinities("Kd = 5 mg").is_empty());
        assert!(extract_affinities("Kd = 0 nM").is_empty());
        assert!(extract_affinities("Kd = 5 Mb").is_empty());
    }

    proptest! {
        #[test]
        fn normalization_is_exact(int in 1u32..100_000, frac in 0u32..1000, unit in prop::sample::select(vec!["pM", "nM", "µM", "uM", "mM", "M"])) {
            let written = format!("{int}.{frac:03}");
            let m = one(&format!("Kd = {written} {unit}"));
            let value = dec(&written);
            prop_assert_eq!(m.value, value.normalize());
            prop_assert_eq!(m.value_nm, (value * unit_factor_nm(unit).unwrap()).normalize());
        }
    }
}
