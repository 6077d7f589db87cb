//! Finds sequence candidates, decorations, affinities and conditions in a
//! passage of text.

use aptamine::seqextract::{extract_affinities, extract_conditions, find_sequences, SequenceBounds};

const TEXT: &str = "\
The selected aptamer 5'-^FAM-GGTTGGTGTGGTT*dTGGAAAACCCCTTTT-3' bound thrombin with Kd = 25 ± 3 nM \
in PBS at pH 7.4 and 25 °C.

A truncated variant, written 3'-TTTTCCCCAAAAGGTTGGTGTGGTTGG-5' in the original table, \
inhibited clotting with IC50 = 1.2 × 10^-7 M.

The long form was printed across two lines: ACGTTGCAAGCTTGCA
TTGCAAGCTTGCAACGT and bound with Kd < 5 nM.

The forward primer ACGTACGTACGTACGTACGTAC was used for PCR.";

fn main() {
    let bounds = SequenceBounds::default();
    for c in find_sequences(TEXT, bounds) {
        println!("raw   {:?}", c.raw);
        println!("core  {} ({} nt, {:?}, joined {})", c.core, c.core.len(), c.orientation, c.was_joined);
        for m in &c.modifications {
            println!("  mod {:?} {} at {:?}", m.notation, m.code, m.position);
        }
        for a in extract_affinities(&c.context) {
            println!("  {} = {} {} -> {} nM", a.kind.as_str(), a.value, a.unit, a.value_nm);
        }
        let cond = extract_conditions(&c.context);
        if !cond.is_empty() {
            println!("  conditions pH {:?}, {:?} °C, buffer {:?}", cond.ph, cond.temperature, cond.buffer);
        }
    }
}
