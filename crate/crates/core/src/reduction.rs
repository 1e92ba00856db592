//! Combinatorial reduction of test-case inputs.
//!
//! A [`ParameterSpec`] describes the inputs of a test scenario as named
//! parameters with finite value lists. The number of exhaustive combinations
//! grows as the product of the value counts, which is unrunnable for any
//! realistic scenario, so [`gen_tway`] produces a much smaller row set that
//! still covers every t-way interaction between parameters. [`verify_coverage`]
//! re-checks any row set against a spec by exhaustive tuple enumeration, and
//! [`min_size_bruteforce`] finds the true optimum on tiny specs so the greedy
//! output can be judged against it.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use num_bigint::BigUint;
use thiserror::Error;

/// Default ceiling on the number of rows [`gen_all`] will materialize.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Largest exhaustive-combination count [`min_size_bruteforce`] will search.
/// The subset search is exponential in this number, so it stays desk-sized.
pub const BRUTE_FORCE_ROW_LIMIT: u64 = 16;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("parameter spec line {line}: {message}")]
    ParseLine { line: usize, message: String },
    #[error("invalid parameter spec: {0}")]
    InvalidSpec(String),
    #[error("strength {strength} is out of range for {params} parameter(s)")]
    StrengthOutOfRange { strength: usize, params: usize },
    #[error(
        "full enumeration would produce {count} rows, over the cap of {cap}; \
         use t-way generation instead"
    )]
    EnumerationCapExceeded { count: BigUint, cap: u64 },
    #[error(
        "exhaustive search refused: the parameter space holds {count} rows, over the \
         brute-force limit of {limit}"
    )]
    SearchSpaceExceeded { count: BigUint, limit: u64 },
    #[error("row {row}: parameter \"{parameter}\" does not declare the value \"{value}\"")]
    UnknownValue {
        row: usize,
        parameter: String,
        value: String,
    },
    #[error("row {row}: expected {expected} column(s), found {found}")]
    RowShape {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row header [{found}] does not match the declared parameters [{expected}]")]
    HeaderMismatch { expected: String, found: String },
    #[error("reading rows: {0}")]
    Csv(#[from] csv::Error),
}

/// One named parameter and its allowed values, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    name: String,
    values: Vec<String>,
}

impl Parameter {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// An ordered list of parameters, each with at least one value.
///
/// Names are unique across the spec and values are unique within a parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSpec {
    params: Vec<Parameter>,
}

impl ParameterSpec {
    /// Builds a spec from `(name, values)` pairs, enforcing the uniqueness
    /// and non-emptiness invariants.
    pub fn new<N, V>(params: Vec<(N, Vec<V>)>) -> Result<Self, ReductionError>
    where
        N: Into<String>,
        V: Into<String>,
    {
        let params: Vec<Parameter> = params
            .into_iter()
            .map(|(name, values)| Parameter {
                name: name.into(),
                values: values.into_iter().map(Into::into).collect(),
            })
            .collect();

        if params.is_empty() {
            return Err(ReductionError::InvalidSpec(
                "at least one parameter is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for p in &params {
            if p.name.is_empty() {
                return Err(ReductionError::InvalidSpec(
                    "parameter names must be non-empty".into(),
                ));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(ReductionError::InvalidSpec(format!(
                    "duplicate parameter name \"{}\"",
                    p.name
                )));
            }
            if p.values.is_empty() {
                return Err(ReductionError::InvalidSpec(format!(
                    "parameter \"{}\" has an empty value list",
                    p.name
                )));
            }
            let mut vals = HashSet::new();
            for v in &p.values {
                if !vals.insert(v.as_str()) {
                    return Err(ReductionError::InvalidSpec(format!(
                        "parameter \"{}\" lists value \"{}\" twice",
                        p.name, v
                    )));
                }
            }
        }
        Ok(ParameterSpec { params })
    }

    /// Parses the line-oriented text form: one `name: v1, v2, ...` per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut params: Vec<(String, Vec<String>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((name, rest)) = line.split_once(':') else {
                return Err(ReductionError::ParseLine {
                    line: line_no,
                    message: format!("expected \"name: v1, v2, ...\", found \"{raw}\""),
                });
            };
            let name = name.trim();
            if name.is_empty() {
                return Err(ReductionError::ParseLine {
                    line: line_no,
                    message: "parameter name is empty".into(),
                });
            }
            if params.iter().any(|(n, _)| n == name) {
                return Err(ReductionError::ParseLine {
                    line: line_no,
                    message: format!("duplicate parameter name \"{name}\""),
                });
            }
            if rest.trim().is_empty() {
                return Err(ReductionError::ParseLine {
                    line: line_no,
                    message: format!("parameter \"{name}\" has an empty value list"),
                });
            }
            let mut values = Vec::new();
            for v in rest.split(',') {
                let v = v.trim();
                if v.is_empty() {
                    return Err(ReductionError::ParseLine {
                        line: line_no,
                        message: format!("parameter \"{name}\" has an empty value"),
                    });
                }
                if values.iter().any(|seen| seen == v) {
                    return Err(ReductionError::ParseLine {
                        line: line_no,
                        message: format!("parameter \"{name}\" lists value \"{v}\" twice"),
                    });
                }
                values.push(v.to_string());
            }
            params.push((name.to_string(), values));
        }
        ParameterSpec::new(params)
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn value_counts(&self) -> Vec<usize> {
        self.params.iter().map(|p| p.values.len()).collect()
    }

    /// Index of each value string within each parameter, for row validation.
    fn value_indices(&self) -> Vec<HashMap<&str, usize>> {
        self.params
            .iter()
            .map(|p| {
                p.values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.as_str(), i))
                    .collect()
            })
            .collect()
    }
}

/// One generated combination: a value per parameter, in spec order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestRow {
    values: Vec<String>,
}

impl TestRow {
    pub fn values(&self) -> &[String] {
        &self.values
    }

    /// Looks up this row's value for a named parameter of `spec`.
    pub fn value<'a>(&'a self, spec: &ParameterSpec, name: &str) -> Option<&'a str> {
        spec.params
            .iter()
            .position(|p| p.name == name)
            .map(|i| self.values[i].as_str())
    }

    fn from_indices(spec: &ParameterSpec, indices: &[usize]) -> Self {
        TestRow {
            values: indices
                .iter()
                .enumerate()
                .map(|(p, &v)| spec.params[p].values[v].clone())
                .collect(),
        }
    }
}

/// A set of rows intended to cover every `strength`-way value combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSet {
    pub spec: ParameterSpec,
    pub strength: usize,
    pub rows: Vec<TestRow>,
}

/// Result of checking a row set against a spec at some strength.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub complete: bool,
    pub total_tuples: usize,
    pub uncovered: Vec<UncoveredTuple>,
}

/// One t-way value combination that no row covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncoveredTuple {
    /// `(parameter, value)` pairs in spec parameter order.
    pub entries: Vec<(String, String)>,
}

impl std::fmt::Display for UncoveredTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, v)| format!("{p}={v}"))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Exact number of exhaustive combinations, as an arbitrary-precision count.
/// The count is reported without ever materializing the rows.
pub fn count_all(spec: &ParameterSpec) -> BigUint {
    spec.params
        .iter()
        .fold(BigUint::from(1u32), |acc, p| acc * p.values.len())
}

/// Materializes every combination, outermost loop on the first parameter.
/// Refuses specs whose exact count exceeds `cap` (default one million rows).
pub fn gen_all(spec: &ParameterSpec, cap: Option<u64>) -> Result<CoveringSet, ReductionError> {
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let count = count_all(spec);
    if count > BigUint::from(cap) {
        return Err(ReductionError::EnumerationCapExceeded { count, cap });
    }
    let counts = spec.value_counts();
    let mut indices = vec![0usize; counts.len()];
    let mut rows = Vec::new();
    loop {
        rows.push(TestRow::from_indices(spec, &indices));
        // Mixed-radix increment, last parameter varying fastest.
        let mut pos = counts.len();
        loop {
            if pos == 0 {
                return Ok(CoveringSet {
                    spec: spec.clone(),
                    strength: spec.len(),
                    rows,
                });
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < counts[pos] {
                break;
            }
            indices[pos] = 0;
        }
    }
}

/// Dense index over every t-subset of parameters and every value combination
/// within each subset. Tuple ids are ordered by subset (lexicographic on the
/// sorted parameter indices) and then by value indices, which fixes the
/// deterministic order the generator and verifier both rely on.
struct TupleIndex {
    subsets: Vec<Vec<usize>>,
    subset_rank: HashMap<Vec<usize>, usize>,
    offsets: Vec<usize>,
    counts: Vec<usize>,
    total: usize,
}

impl TupleIndex {
    fn new(spec: &ParameterSpec, strength: usize) -> Self {
        let counts = spec.value_counts();
        let subsets: Vec<Vec<usize>> = (0..spec.len()).combinations(strength).collect();
        let mut offsets = Vec::with_capacity(subsets.len());
        let mut total = 0usize;
        for subset in &subsets {
            offsets.push(total);
            total += subset.iter().map(|&p| counts[p]).product::<usize>();
        }
        let subset_rank = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        TupleIndex {
            subsets,
            subset_rank,
            offsets,
            counts,
            total,
        }
    }

    /// Tuple id for a sorted parameter subset with the given value indices.
    fn id(&self, subset: &[usize], value_of: impl Fn(usize) -> usize) -> usize {
        let rank = self.subset_rank[subset];
        let mut combo = 0usize;
        for &p in subset {
            combo = combo * self.counts[p] + value_of(p);
        }
        self.offsets[rank] + combo
    }

    /// Inverse of [`TupleIndex::id`].
    fn decode(&self, id: usize) -> (&[usize], Vec<usize>) {
        let rank = match self.offsets.binary_search(&id) {
            Ok(r) => r,
            Err(r) => r - 1,
        };
        let subset = &self.subsets[rank];
        let mut combo = id - self.offsets[rank];
        let mut values = vec![0usize; subset.len()];
        for (slot, &p) in subset.iter().enumerate().rev() {
            values[slot] = combo % self.counts[p];
            combo /= self.counts[p];
        }
        (subset, values)
    }
}

fn check_strength(spec: &ParameterSpec, strength: usize) -> Result<(), ReductionError> {
    if strength == 0 || strength > spec.len() {
        return Err(ReductionError::StrengthOutOfRange {
            strength,
            params: spec.len(),
        });
    }
    Ok(())
}

/// Greedy construction of a t-way covering row set.
///
/// Each new row is seeded with the first still-uncovered tuple, then the
/// remaining parameters are filled in descending order of value count, picking
/// for each the value that completes the most uncovered tuples. Ties keep the
/// earliest value in the parameter's list, so slots with nothing left to gain
/// fall back to the first value. The construction never consults randomness;
/// `_seed` is accepted for signature stability with randomized variants and
/// identical inputs always produce identical rows.
pub fn gen_tway(
    spec: &ParameterSpec,
    strength: usize,
    _seed: u64,
) -> Result<CoveringSet, ReductionError> {
    check_strength(spec, strength)?;
    let index = TupleIndex::new(spec, strength);
    let counts = spec.value_counts();
    let mut covered = vec![false; index.total];
    let mut remaining = index.total;
    let mut cursor = 0usize;

    // Fill order: larger parameters first, spec order breaking ties.
    let mut fill_order: Vec<usize> = (0..spec.len()).collect();
    fill_order.sort_by_key(|&p| (std::cmp::Reverse(counts[p]), p));

    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut scratch = Vec::with_capacity(strength);

    while remaining > 0 {
        while covered[cursor] {
            cursor += 1;
        }
        let (seed_subset, seed_values) = index.decode(cursor);

        let mut row: Vec<Option<usize>> = vec![None; spec.len()];
        let mut assigned: Vec<usize> = seed_subset.to_vec();
        for (&p, &v) in seed_subset.iter().zip(&seed_values) {
            row[p] = Some(v);
        }

        for &p in &fill_order {
            if row[p].is_some() {
                continue;
            }
            let mut best_value = 0usize;
            let mut best_gain = 0usize;
            for v in 0..counts[p] {
                row[p] = Some(v);
                let mut gain = 0usize;
                for partial in assigned.iter().copied().combinations(strength - 1) {
                    scratch.clear();
                    scratch.extend(partial);
                    let at = scratch.partition_point(|&q| q < p);
                    scratch.insert(at, p);
                    let id = index.id(&scratch, |q| row[q].unwrap());
                    if !covered[id] {
                        gain += 1;
                    }
                }
                if gain > best_gain {
                    best_gain = gain;
                    best_value = v;
                }
            }
            row[p] = Some(best_value);
            let at = assigned.partition_point(|&q| q < p);
            assigned.insert(at, p);
        }

        let full: Vec<usize> = row.into_iter().map(Option::unwrap).collect();
        for subset in &index.subsets {
            let id = index.id(subset, |q| full[q]);
            if !covered[id] {
                covered[id] = true;
                remaining -= 1;
            }
        }
        rows.push(full);
    }

    Ok(CoveringSet {
        spec: spec.clone(),
        strength,
        rows: rows
            .iter()
            .map(|r| TestRow::from_indices(spec, r))
            .collect(),
    })
}

/// Converts rows to value-index form, validating every value against the spec.
/// Row numbers in errors are 1-based over the given slice.
fn rows_to_indices(
    spec: &ParameterSpec,
    rows: &[TestRow],
) -> Result<Vec<Vec<usize>>, ReductionError> {
    let lookup = spec.value_indices();
    rows.iter()
        .enumerate()
        .map(|(row_idx, row)| {
            if row.values.len() != spec.len() {
                return Err(ReductionError::RowShape {
                    row: row_idx + 1,
                    expected: spec.len(),
                    found: row.values.len(),
                });
            }
            row.values
                .iter()
                .enumerate()
                .map(|(p, v)| {
                    lookup[p].get(v.as_str()).copied().ok_or_else(|| {
                        ReductionError::UnknownValue {
                            row: row_idx + 1,
                            parameter: spec.params[p].name.clone(),
                            value: v.clone(),
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// Exhaustively checks `set.rows` against `set.spec` at the given strength,
/// reporting every uncovered tuple in deterministic order.
pub fn verify_coverage(set: &CoveringSet, strength: usize) -> Result<CoverageReport, ReductionError> {
    check_strength(&set.spec, strength)?;
    let indexed = rows_to_indices(&set.spec, &set.rows)?;
    let index = TupleIndex::new(&set.spec, strength);
    let mut covered = vec![false; index.total];
    for row in &indexed {
        for subset in &index.subsets {
            covered[index.id(subset, |q| row[q])] = true;
        }
    }
    let uncovered: Vec<UncoveredTuple> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(id, _)| {
            let (subset, values) = index.decode(id);
            UncoveredTuple {
                entries: subset
                    .iter()
                    .zip(&values)
                    .map(|(&p, &v)| {
                        (
                            set.spec.params[p].name.clone(),
                            set.spec.params[p].values[v].clone(),
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(CoverageReport {
        complete: uncovered.is_empty(),
        total_tuples: index.total,
        uncovered,
    })
}

/// Finds the size of the smallest row subset with complete t-coverage by
/// exhaustive search over subsets of the full enumeration, or `None` if no
/// subset of size `cap` or less suffices. Refuses specs whose exhaustive
/// row count exceeds [`BRUTE_FORCE_ROW_LIMIT`].
pub fn min_size_bruteforce(
    spec: &ParameterSpec,
    strength: usize,
    cap: usize,
) -> Result<Option<usize>, ReductionError> {
    check_strength(spec, strength)?;
    let count = count_all(spec);
    if count > BigUint::from(BRUTE_FORCE_ROW_LIMIT) {
        return Err(ReductionError::SearchSpaceExceeded {
            count,
            limit: BRUTE_FORCE_ROW_LIMIT,
        });
    }
    let all = gen_all(spec, Some(BRUTE_FORCE_ROW_LIMIT))?;
    let indexed = rows_to_indices(spec, &all.rows)?;
    let index = TupleIndex::new(spec, strength);
    let per_row: Vec<Vec<usize>> = indexed
        .iter()
        .map(|row| {
            index
                .subsets
                .iter()
                .map(|subset| index.id(subset, |q| row[q]))
                .collect()
        })
        .collect();

    let mut covered = vec![false; index.total];
    for k in 1..=cap.min(per_row.len()) {
        for pick in (0..per_row.len()).combinations(k) {
            covered.iter_mut().for_each(|c| *c = false);
            let mut hit = 0usize;
            for &r in &pick {
                for &id in &per_row[r] {
                    if !covered[id] {
                        covered[id] = true;
                        hit += 1;
                    }
                }
            }
            if hit == index.total {
                return Ok(Some(k));
            }
        }
    }
    Ok(None)
}

/// Renders rows as CSV: header of parameter names, one line per row. Values
/// are left bare unless they contain a comma, quote, or line break.
pub fn rows_to_csv(set: &CoveringSet) -> String {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    writer
        .write_record(set.spec.params.iter().map(|p| p.name.as_str()))
        .expect("in-memory write");
    for row in &set.rows {
        writer
            .write_record(row.values.iter().map(String::as_str))
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 rows")
}

/// Reads rows back from CSV produced by [`rows_to_csv`] (or by hand). The
/// header must name the spec's parameters in spec order.
pub fn parse_rows_csv(spec: &ParameterSpec, text: &str) -> Result<Vec<TestRow>, ReductionError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let expected: Vec<&str> = spec.params.iter().map(|p| p.name.as_str()).collect();
    if header != expected {
        return Err(ReductionError::HeaderMismatch {
            expected: expected.join(","),
            found: header.join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let values: Vec<String> = record.iter().map(|s| s.to_string()).collect();
        if values.len() != spec.len() {
            return Err(ReductionError::RowShape {
                row: i + 1,
                expected: spec.len(),
                found: values.len(),
            });
        }
        rows.push(TestRow { values });
    }
    Ok(rows)
}
