//! Benchmark problem definitions: typed I/O signatures, dataset generators
//! with reference oracles, and per-case error functions.
//!
//! Six problems are built in, spanning integer, boolean, float, and vector
//! outputs. Datasets are regenerated deterministically from a seed; each
//! generator mixes a documented quota of edge cases with random cases.

use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ParseError};
use crate::genome::{genome_from_line, ErcKind, GenePool, PlushyGenome};
use crate::vm::{instruction_catalog, PushValue, TypeTag};

/// Defined errors are clamped below this; the NO_OUTPUT (or wrong-type)
/// penalty sits exactly here, strictly above every defined error.
pub const NO_OUTPUT_PENALTY: f64 = 1.0e6;
const ERROR_CAP: f64 = NO_OUTPUT_PENALTY - 1.0;

/// Absolute tolerance mapping float outputs to pass/fail.
pub const FLOAT_TOLERANCE: f64 = 1.0e-3;

/// Full-scale execution budget per training case.
pub const EXECUTIONS_PER_TRAIN_CASE: u64 = 300_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// One input/output example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingCase {
    pub inputs: Vec<PushValue>,
    pub output: PushValue,
    pub split: Split,
}

/// The built-in benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Smallest,
    MirrorImage,
    CompareStringLengths,
    NegativeToZero,
    VectorAverage,
    LastIndexOfZero,
}

pub const ALL_PROBLEMS: &[Problem] = &[
    Problem::Smallest,
    Problem::MirrorImage,
    Problem::CompareStringLengths,
    Problem::NegativeToZero,
    Problem::VectorAverage,
    Problem::LastIndexOfZero,
];

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Smallest => "smallest",
            Problem::MirrorImage => "mirror-image",
            Problem::CompareStringLengths => "compare-string-lengths",
            Problem::NegativeToZero => "negative-to-zero",
            Problem::VectorAverage => "vector-average",
            Problem::LastIndexOfZero => "last-index-of-zero",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        ALL_PROBLEMS
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| ConfigError::UnknownProblem(name.to_string()))
    }

    /// Stack types the problem declares; controls the instruction catalog
    /// and which ERC generators enter the gene pool.
    pub fn types(self) -> &'static [TypeTag] {
        match self {
            Problem::Smallest => &[TypeTag::Integer, TypeTag::Boolean],
            Problem::MirrorImage => {
                &[TypeTag::VectorInteger, TypeTag::Integer, TypeTag::Boolean]
            }
            Problem::CompareStringLengths => {
                &[TypeTag::String, TypeTag::Integer, TypeTag::Boolean]
            }
            Problem::NegativeToZero => {
                &[TypeTag::VectorInteger, TypeTag::Integer, TypeTag::Boolean]
            }
            Problem::VectorAverage => &[
                TypeTag::VectorFloat,
                TypeTag::Float,
                TypeTag::Integer,
                TypeTag::Boolean,
            ],
            Problem::LastIndexOfZero => {
                &[TypeTag::VectorInteger, TypeTag::Integer, TypeTag::Boolean]
            }
        }
    }

    pub fn num_inputs(self) -> usize {
        match self {
            Problem::Smallest => 4,
            Problem::MirrorImage => 2,
            Problem::CompareStringLengths => 3,
            Problem::NegativeToZero => 1,
            Problem::VectorAverage => 1,
            Problem::LastIndexOfZero => 1,
        }
    }

    pub fn output_type(self) -> TypeTag {
        match self {
            Problem::Smallest => TypeTag::Integer,
            Problem::MirrorImage => TypeTag::Boolean,
            Problem::CompareStringLengths => TypeTag::Boolean,
            Problem::NegativeToZero => TypeTag::VectorInteger,
            Problem::VectorAverage => TypeTag::Float,
            Problem::LastIndexOfZero => TypeTag::Integer,
        }
    }

    /// Full training set size.
    pub fn default_train_size(self) -> usize {
        match self {
            Problem::Smallest => 100,
            Problem::MirrorImage => 100,
            Problem::CompareStringLengths => 100,
            Problem::NegativeToZero => 200,
            Problem::VectorAverage => 250,
            Problem::LastIndexOfZero => 150,
        }
    }

    pub fn default_test_size(self) -> usize {
        100
    }

    /// Full-scale execution budget: 300,000 executions per training case.
    pub fn default_budget(self, train_size: usize) -> u64 {
        train_size as u64 * EXECUTIONS_PER_TRAIN_CASE
    }

    /// The ground-truth function the datasets are built from.
    pub fn oracle(self, inputs: &[PushValue]) -> PushValue {
        match self {
            Problem::Smallest => {
                let xs: Vec<i64> = inputs.iter().map(as_int).collect();
                PushValue::Integer(xs.into_iter().min().expect("four inputs"))
            }
            Problem::MirrorImage => {
                let a = as_vec_int(&inputs[0]);
                let b = as_vec_int(&inputs[1]);
                let mirrored = a.len() == b.len() && a.iter().eq(b.iter().rev());
                PushValue::Boolean(mirrored)
            }
            Problem::CompareStringLengths => {
                let lens: Vec<usize> = inputs.iter().map(|v| as_str(v).chars().count()).collect();
                PushValue::Boolean(lens[0] < lens[1] && lens[1] < lens[2])
            }
            Problem::NegativeToZero => {
                let v = as_vec_int(&inputs[0]);
                PushValue::VectorInteger(v.iter().map(|&x| x.max(0)).collect())
            }
            Problem::VectorAverage => {
                let v = as_vec_float(&inputs[0]);
                PushValue::Float(v.iter().sum::<f64>() / v.len() as f64)
            }
            Problem::LastIndexOfZero => {
                let v = as_vec_int(&inputs[0]);
                let idx = v.iter().rposition(|&x| x == 0).expect("at least one zero");
                PushValue::Integer(idx as i64)
            }
        }
    }

    /// The gene pool for this problem: its instruction catalog plus ERC
    /// generators for its literal types.
    pub fn gene_pool(self) -> GenePool {
        let instructions = instruction_catalog(self.types(), self.num_inputs())
            .expect("built-in problems declare non-empty type sets");
        GenePool::new(instructions, ErcKind::for_types(self.types()))
    }

    /// A hand-written solution genome; translating and running it attains
    /// error 0 on every generated case. Used by tests and as a known-good
    /// fixture for simplification and generalization.
    pub fn reference_genome(self) -> PlushyGenome {
        let line = match self {
            Problem::Smallest => "in1 in2 integer_min in3 integer_min in4 integer_min",
            Problem::MirrorImage => "in1 in2 vector_integer_reverse vector_integer_eq",
            Problem::CompareStringLengths => {
                "in1 string_length in2 string_length integer_lt \
                 in2 string_length in3 string_length integer_lt boolean_and"
            }
            Problem::NegativeToZero => {
                "vector_integer_emptyvector in1 vector_integer_length exec_do*count \
                 in1 vector_integer_nth i:0 integer_max vector_integer_conj"
            }
            Problem::VectorAverage => {
                "f:0 in1 vector_float_length exec_do*count in1 vector_float_nth float_add CLOSE \
                 in1 vector_float_length float_from_integer float_div"
            }
            Problem::LastIndexOfZero => {
                "in1 vector_integer_length exec_do*count integer_dup in1 vector_integer_nth \
                 i:0 integer_eq exec_if CLOSE integer_pop"
            }
        };
        genome_from_line(line).expect("reference genomes parse")
    }

    /// Generates the full dataset: `train_size` training cases followed by
    /// `test_size` test cases, oracle-labeled, edge cases first.
    pub fn generate_dataset(
        self,
        train_size: usize,
        test_size: usize,
        rng: &mut impl Rng,
    ) -> Vec<TrainingCase> {
        let mut cases = Vec::with_capacity(train_size + test_size);
        let mut edge = self.edge_case_inputs();
        edge.truncate(train_size);
        for inputs in &edge {
            cases.push(self.labeled(inputs.clone(), Split::Train));
        }
        while cases.len() < train_size {
            let inputs = self.random_inputs(rng);
            cases.push(self.labeled(inputs, Split::Train));
        }
        for _ in 0..test_size {
            let inputs = self.random_inputs(rng);
            cases.push(self.labeled(inputs, Split::Test));
        }
        cases
    }

    fn labeled(self, inputs: Vec<PushValue>, split: Split) -> TrainingCase {
        let output = self.oracle(&inputs);
        TrainingCase {
            inputs,
            output,
            split,
        }
    }

    /// Fixed edge-case quota, documented per problem.
    fn edge_case_inputs(self) -> Vec<Vec<PushValue>> {
        fn ints(xs: [i64; 4]) -> Vec<PushValue> {
            xs.iter().map(|&x| PushValue::Integer(x)).collect()
        }
        fn vi(xs: &[i64]) -> PushValue {
            PushValue::VectorInteger(xs.to_vec())
        }
        fn strs(xs: [&str; 3]) -> Vec<PushValue> {
            xs.iter().map(|s| PushValue::String(s.to_string())).collect()
        }
        match self {
            // All-equal tuples, a unique minimum at each position, zeros,
            // extremes, and sorted runs.
            Problem::Smallest => vec![
                ints([0, 0, 0, 0]),
                ints([-100, -100, -100, -100]),
                ints([100, 100, 100, 100]),
                ints([-7, 83, 100, 40]),
                ints([83, -7, 100, 40]),
                ints([100, 83, -7, 40]),
                ints([100, 83, 40, -7]),
                ints([-100, -99, -98, -97]),
                ints([97, 98, 99, 100]),
                ints([100, 99, 98, 97]),
                ints([5, 5, 0, 5]),
                ints([-1, 1, -1, 1]),
            ],
            // Empty pair, singletons, palindromes, true mirrors, near misses.
            Problem::MirrorImage => vec![
                vec![vi(&[]), vi(&[])],
                vec![vi(&[1]), vi(&[1])],
                vec![vi(&[1]), vi(&[2])],
                vec![vi(&[0, 0, 0]), vi(&[0, 0, 0])],
                vec![vi(&[1, 2, 1]), vi(&[1, 2, 1])],
                vec![vi(&[1, 2, 3]), vi(&[3, 2, 1])],
                vec![vi(&[1, 2, 3]), vi(&[1, 2, 3])],
                vec![vi(&[1, 2, 3]), vi(&[3, 2, 2])],
                vec![vi(&[-5, 100]), vi(&[100, -5])],
                vec![vi(&[1, 2]), vi(&[1, 2, 3])],
            ],
            // Empties, equal lengths, strictly increasing and decreasing.
            Problem::CompareStringLengths => vec![
                strs(["", "", ""]),
                strs(["", "a", "ab"]),
                strs(["ab", "a", ""]),
                strs(["a", "a", "a"]),
                strs(["a", "ab", "ab"]),
                strs(["ab", "ab", "abc"]),
                strs(["", "", "a"]),
                strs(["a", "", "ab"]),
            ],
            // Empty, all-negative, all-positive, zeros, mixed.
            Problem::NegativeToZero => vec![
                vec![vi(&[])],
                vec![vi(&[0])],
                vec![vi(&[-1])],
                vec![vi(&[1])],
                vec![vi(&[-100, -50, -1])],
                vec![vi(&[100, 50, 1])],
                vec![vi(&[0, 0, 0, 0])],
                vec![vi(&[-1, 0, 1, -2, 2])],
                vec![vi(&[-100, 100])],
            ],
            // Singletons, equal elements, sign mixes.
            Problem::VectorAverage => {
                fn vf(xs: &[f64]) -> Vec<PushValue> {
                    vec![PushValue::VectorFloat(xs.to_vec())]
                }
                vec![
                    vf(&[0.0]),
                    vf(&[100.0]),
                    vf(&[-100.0]),
                    vf(&[2.0, 4.0]),
                    vf(&[7.5, 7.5, 7.5]),
                    vf(&[-50.0, 50.0]),
                    vf(&[1.0, 2.0, 3.0, 4.0]),
                ]
            }
            // Zero first, zero last, all zeros, single zero in the middle.
            Problem::LastIndexOfZero => vec![
                vec![vi(&[0])],
                vec![vi(&[0, 1])],
                vec![vi(&[1, 0])],
                vec![vi(&[0, 0, 0])],
                vec![vi(&[5, 0, 5])],
                vec![vi(&[0, 5, 5, 5])],
                vec![vi(&[5, 5, 5, 0])],
                vec![vi(&[0, 1, 0, 1, 0])],
                vec![vi(&[-50, 0, 50])],
            ],
        }
    }

    fn random_inputs(self, rng: &mut impl Rng) -> Vec<PushValue> {
        match self {
            Problem::Smallest => (0..4)
                .map(|_| PushValue::Integer(rng.random_range(-100..=100)))
                .collect(),
            Problem::MirrorImage => {
                let len = rng.random_range(0..=20);
                let a: Vec<i64> = (0..len).map(|_| rng.random_range(-100..=100)).collect();
                // Mix constructed positives and near-misses with random pairs
                // so both output classes stay frequent.
                let b: Vec<i64> = match rng.random_range(0..10) {
                    0..=3 => a.iter().rev().copied().collect(),
                    4..=5 => {
                        let mut b: Vec<i64> = a.iter().rev().copied().collect();
                        if !b.is_empty() {
                            let i = rng.random_range(0..b.len());
                            b[i] = b[i].wrapping_add(1);
                        }
                        b
                    }
                    6..=7 => a.clone(),
                    _ => (0..len).map(|_| rng.random_range(-100..=100)).collect(),
                };
                vec![PushValue::VectorInteger(a), PushValue::VectorInteger(b)]
            }
            Problem::CompareStringLengths => {
                // Half the cases get constructed strictly-increasing lengths.
                let increasing = rng.random_bool(0.5);
                let lens: [usize; 3] = if increasing {
                    let a = rng.random_range(0..=7);
                    let b = rng.random_range(a + 1..=8);
                    let c = rng.random_range(b + 1..=9);
                    [a, b, c]
                } else {
                    [
                        rng.random_range(0..=10),
                        rng.random_range(0..=10),
                        rng.random_range(0..=10),
                    ]
                };
                lens.iter()
                    .map(|&l| {
                        let s: String =
                            (0..l).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
                        PushValue::String(s)
                    })
                    .collect()
            }
            Problem::NegativeToZero => {
                let len = rng.random_range(0..=20);
                let v: Vec<i64> = (0..len).map(|_| rng.random_range(-100..=100)).collect();
                vec![PushValue::VectorInteger(v)]
            }
            Problem::VectorAverage => {
                let len = rng.random_range(1..=20);
                let v: Vec<f64> = (0..len).map(|_| rng.random_range(-100.0..=100.0)).collect();
                vec![PushValue::VectorFloat(v)]
            }
            Problem::LastIndexOfZero => {
                let len = rng.random_range(1..=20);
                let mut v: Vec<i64> = (0..len).map(|_| rng.random_range(-50..=50)).collect();
                // Guarantee at least one zero.
                let i = rng.random_range(0..len);
                v[i] = 0;
                vec![PushValue::VectorInteger(v)]
            }
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn as_int(v: &PushValue) -> i64 {
    match v {
        PushValue::Integer(x) => *x,
        other => panic!("expected integer input, got {other:?}"),
    }
}

fn as_str(v: &PushValue) -> &str {
    match v {
        PushValue::String(s) => s,
        other => panic!("expected string input, got {other:?}"),
    }
}

fn as_vec_int(v: &PushValue) -> &[i64] {
    match v {
        PushValue::VectorInteger(xs) => xs,
        other => panic!("expected integer vector input, got {other:?}"),
    }
}

fn as_vec_float(v: &PushValue) -> &[f64] {
    match v {
        PushValue::VectorFloat(xs) => xs,
        other => panic!("expected float vector input, got {other:?}"),
    }
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Error of `actual` against `expected`: 0 exactly when the case is passed.
///
/// Integer outputs use absolute difference; floats use absolute difference
/// mapped to 0 inside the pass tolerance; booleans and chars are 0/1;
/// vectors use element edit distance plus a length penalty. Missing output
/// or a type mismatch costs the fixed `NO_OUTPUT_PENALTY`, strictly larger
/// than any defined (clamped) error.
pub fn case_error(actual: Option<&PushValue>, expected: &PushValue) -> f64 {
    let Some(actual) = actual else {
        return NO_OUTPUT_PENALTY;
    };
    match (actual, expected) {
        (PushValue::Integer(a), PushValue::Integer(e)) => {
            clamp((*a as i128 - *e as i128).unsigned_abs() as f64)
        }
        (PushValue::Float(a), PushValue::Float(e)) => {
            let diff = (a - e).abs();
            if diff < FLOAT_TOLERANCE {
                0.0
            } else {
                clamp(diff)
            }
        }
        (PushValue::Boolean(a), PushValue::Boolean(e)) => {
            if a == e {
                0.0
            } else {
                1.0
            }
        }
        (PushValue::Char(a), PushValue::Char(e)) => {
            if a == e {
                0.0
            } else {
                1.0
            }
        }
        (PushValue::String(a), PushValue::String(e)) => {
            let a: Vec<char> = a.chars().collect();
            let e: Vec<char> = e.chars().collect();
            clamp(edit_distance(&a, &e) as f64 + a.len().abs_diff(e.len()) as f64)
        }
        (PushValue::VectorInteger(a), PushValue::VectorInteger(e)) => {
            clamp(edit_distance(a, e) as f64 + a.len().abs_diff(e.len()) as f64)
        }
        (PushValue::VectorFloat(a), PushValue::VectorFloat(e)) => {
            let a: Vec<u64> = a.iter().map(|x| x.to_bits()).collect();
            let e: Vec<u64> = e.iter().map(|x| x.to_bits()).collect();
            clamp(edit_distance(&a, &e) as f64 + a.len().abs_diff(e.len()) as f64)
        }
        _ => NO_OUTPUT_PENALTY,
    }
}

fn clamp(e: f64) -> f64 {
    e.min(ERROR_CAP)
}

/// Levenshtein distance over elements (unit insert/delete/substitute).
fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

/// Header line of a dataset file; records the generator seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub problem: Problem,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub catalog_version: u32,
}

/// Writes a dataset as a header line followed by one JSON record per case.
pub fn write_dataset(
    w: &mut impl Write,
    header: &DatasetHeader,
    cases: &[TrainingCase],
) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, header)?;
    w.write_all(b"\n")?;
    for case in cases {
        serde_json::to_writer(&mut *w, case)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a dataset file written by [`write_dataset`].
pub fn read_dataset(r: impl BufRead) -> Result<(DatasetHeader, Vec<TrainingCase>), ParseError> {
    let mut lines = r.lines();
    let header_line = lines
        .next()
        .ok_or(ParseError::MissingHeader)?
        .map_err(|e| ParseError::MalformedRecord(e.to_string()))?;
    let header: DatasetHeader = serde_json::from_str(&header_line)
        .map_err(|e| ParseError::MalformedRecord(e.to_string()))?;
    let mut cases = Vec::new();
    for line in lines {
        let line = line.map_err(|e| ParseError::MalformedRecord(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        cases.push(
            serde_json::from_str(&line).map_err(|e| ParseError::MalformedRecord(e.to_string()))?,
        );
    }
    Ok((header, cases))
}

#[cfg(test)]
mod tests;
