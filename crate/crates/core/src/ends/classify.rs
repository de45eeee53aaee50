use serde::Serialize;

use super::LevelDecomposition;

/// End-count verdict in the 0 / 1 / 2 / infinitely-many vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Zero,
    One,
    Two,
    /// Strictly increasing counts over the final levels; stands in for
    /// "infinitely many", never a claim about a Cantor set.
    ManyGrowing,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Zero => "zero",
            Verdict::One => "one",
            Verdict::Two => "two",
            Verdict::ManyGrowing => "many_growing",
            Verdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndClassification {
    pub verdict: Verdict,
    pub counts: Vec<usize>,
    /// 1-based level from which the counts stay constant (at least three
    /// final levels).
    pub stabilization_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const WINDOW: usize = 3;

pub fn classify(dec: &LevelDecomposition) -> EndClassification {
    classify_counts(&dec.counts())
}

pub fn classify_counts(counts: &[usize]) -> EndClassification {
    let l = counts.len();
    if l < WINDOW {
        return EndClassification {
            verdict: Verdict::Undetermined,
            counts: counts.to_vec(),
            stabilization_level: None,
            note: Some(format!("{l} levels; at least {WINDOW} are needed")),
        };
    }
    let last = counts[l - 1];
    let constant_suffix = counts.iter().rev().take_while(|&&c| c == last).count();
    let stabilization_level = (constant_suffix >= WINDOW).then_some(l - constant_suffix + 1);
    let tail = &counts[l - WINDOW..];
    let verdict = if counts.iter().all(|&c| c == 0) {
        Verdict::Zero
    } else if constant_suffix >= WINDOW && last == 1 {
        Verdict::One
    } else if constant_suffix >= WINDOW && last == 2 {
        Verdict::Two
    } else if tail.windows(2).all(|w| w[0] < w[1]) {
        Verdict::ManyGrowing
    } else {
        Verdict::Undetermined
    };
    EndClassification {
        verdict,
        counts: counts.to_vec(),
        stabilization_level,
        note: None,
    }
}
