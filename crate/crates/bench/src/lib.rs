//! Shared fixtures for the performance benchmarks.

use snowleopard_core::ParameterSpec;

/// Ten parameters with twenty-six values each: the stress shape used to size
/// the combination counter and the pairwise generator.
pub fn ten_by_twenty_six() -> ParameterSpec {
    let values: Vec<String> = (b'a'..=b'z').map(|c| (c as char).to_string()).collect();
    let params: Vec<(String, Vec<String>)> = (0..10)
        .map(|i| (format!("p{i}"), values.clone()))
        .collect();
    ParameterSpec::new(params).expect("well-formed spec")
}

/// A small mixed-arity spec for benchmarks that need full enumeration.
pub fn small_mixed() -> ParameterSpec {
    ParameterSpec::new(vec![
        ("freq", vec!["25", "29.97", "50"]),
        ("mode", vec!["pal", "ntsc"]),
        ("depth", vec!["8", "10", "12"]),
        ("rate", vec!["cbr", "vbr"]),
    ])
    .expect("well-formed spec")
}
