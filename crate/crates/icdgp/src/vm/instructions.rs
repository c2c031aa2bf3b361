//! The fixed instruction catalog (version 1).
//!
//! Every instruction is a no-op when its stack preconditions are unmet.
//! The full table (consumed stacks, produced stacks, semantics) is kept in
//! `docs/instruction_catalog.md`; a test checks the two stay in sync.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Catalog version, recorded in dataset headers and run logs.
pub const CATALOG_VERSION: u32 = 1;

/// Type tags for the interpreter's value stacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeTag {
    Integer,
    Float,
    Boolean,
    Char,
    String,
    VectorInteger,
    VectorFloat,
}

impl TypeTag {
    pub fn name(self) -> &'static str {
        match self {
            TypeTag::Integer => "integer",
            TypeTag::Float => "float",
            TypeTag::Boolean => "boolean",
            TypeTag::Char => "char",
            TypeTag::String => "string",
            TypeTag::VectorInteger => "vector_integer",
            TypeTag::VectorFloat => "vector_float",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "integer" => Ok(TypeTag::Integer),
            "float" => Ok(TypeTag::Float),
            "boolean" => Ok(TypeTag::Boolean),
            "char" => Ok(TypeTag::Char),
            "string" => Ok(TypeTag::String),
            "vector_integer" => Ok(TypeTag::VectorInteger),
            "vector_float" => Ok(TypeTag::VectorFloat),
            other => Err(ConfigError::UnknownTypeTag(other.to_string())),
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! catalog {
    ($( $variant:ident, $name:literal, opens $opens:literal, req [$($req:ident),*]; )*) => {
        /// A named instruction from the catalog, plus indexed input instructions.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Instruction {
            /// `inK`: pushes the K-th input onto the stack matching its type.
            In(u8),
            $($variant,)*
        }

        /// Every non-input instruction, in stable catalog order.
        pub const CATALOG: &[Instruction] = &[$(Instruction::$variant,)*];

        impl Instruction {
            /// Stable wire name (used in genome serialization and docs).
            pub fn name(self) -> std::borrow::Cow<'static, str> {
                match self {
                    Instruction::In(k) => {
                        std::borrow::Cow::Owned(format!("in{}", k as usize + 1))
                    }
                    $(Instruction::$variant => std::borrow::Cow::Borrowed($name),)*
                }
            }

            pub fn parse(s: &str) -> Option<Instruction> {
                if let Some(rest) = s.strip_prefix("in") {
                    if let Ok(k) = rest.parse::<usize>() {
                        if k >= 1 && k <= u8::MAX as usize + 1 {
                            return Some(Instruction::In((k - 1) as u8));
                        }
                    }
                }
                match s {
                    $($name => Some(Instruction::$variant),)*
                    _ => None,
                }
            }

            /// How many code blocks the instruction opens in the Plushy encoding.
            pub fn opens(self) -> usize {
                match self {
                    $(Instruction::$variant => $opens,)*
                    Instruction::In(_) => 0,
                }
            }

            /// Stacks the instruction touches; it is only admitted to a
            /// problem's catalog when all of these are declared by the problem.
            pub fn required_types(self) -> &'static [TypeTag] {
                match self {
                    $(Instruction::$variant => &[$(TypeTag::$req),*],)*
                    Instruction::In(_) => &[],
                }
            }
        }
    };
}

catalog! {
    IntegerAdd, "integer_add", opens 0, req [Integer];
    IntegerSub, "integer_sub", opens 0, req [Integer];
    IntegerMult, "integer_mult", opens 0, req [Integer];
    IntegerDiv, "integer_div", opens 0, req [Integer];
    IntegerMod, "integer_mod", opens 0, req [Integer];
    IntegerMin, "integer_min", opens 0, req [Integer];
    IntegerMax, "integer_max", opens 0, req [Integer];
    IntegerInc, "integer_inc", opens 0, req [Integer];
    IntegerDec, "integer_dec", opens 0, req [Integer];
    IntegerDup, "integer_dup", opens 0, req [Integer];
    IntegerSwap, "integer_swap", opens 0, req [Integer];
    IntegerPop, "integer_pop", opens 0, req [Integer];
    IntegerLt, "integer_lt", opens 0, req [Integer, Boolean];
    IntegerGt, "integer_gt", opens 0, req [Integer, Boolean];
    IntegerEq, "integer_eq", opens 0, req [Integer, Boolean];
    IntegerFromBoolean, "integer_from_boolean", opens 0, req [Integer, Boolean];
    IntegerFromFloat, "integer_from_float", opens 0, req [Integer, Float];
    FloatFromInteger, "float_from_integer", opens 0, req [Float, Integer];
    FloatAdd, "float_add", opens 0, req [Float];
    FloatSub, "float_sub", opens 0, req [Float];
    FloatMult, "float_mult", opens 0, req [Float];
    FloatDiv, "float_div", opens 0, req [Float];
    FloatDup, "float_dup", opens 0, req [Float];
    FloatSwap, "float_swap", opens 0, req [Float];
    FloatPop, "float_pop", opens 0, req [Float];
    FloatLt, "float_lt", opens 0, req [Float, Boolean];
    FloatGt, "float_gt", opens 0, req [Float, Boolean];
    BooleanAnd, "boolean_and", opens 0, req [Boolean];
    BooleanOr, "boolean_or", opens 0, req [Boolean];
    BooleanNot, "boolean_not", opens 0, req [Boolean];
    BooleanDup, "boolean_dup", opens 0, req [Boolean];
    BooleanPop, "boolean_pop", opens 0, req [Boolean];
    CharEq, "char_eq", opens 0, req [Char, Boolean];
    CharIsLetter, "char_is_letter", opens 0, req [Char, Boolean];
    CharDup, "char_dup", opens 0, req [Char];
    CharPop, "char_pop", opens 0, req [Char];
    StringLength, "string_length", opens 0, req [String, Integer];
    StringConcat, "string_concat", opens 0, req [String];
    StringReverse, "string_reverse", opens 0, req [String];
    StringEq, "string_eq", opens 0, req [String, Boolean];
    StringDup, "string_dup", opens 0, req [String];
    StringPop, "string_pop", opens 0, req [String];
    VectorIntegerLength, "vector_integer_length", opens 0, req [VectorInteger, Integer];
    VectorIntegerNth, "vector_integer_nth", opens 0, req [VectorInteger, Integer];
    VectorIntegerConj, "vector_integer_conj", opens 0, req [VectorInteger, Integer];
    VectorIntegerReverse, "vector_integer_reverse", opens 0, req [VectorInteger];
    VectorIntegerEmpty, "vector_integer_emptyvector", opens 0, req [VectorInteger];
    VectorIntegerEq, "vector_integer_eq", opens 0, req [VectorInteger, Boolean];
    VectorIntegerDup, "vector_integer_dup", opens 0, req [VectorInteger];
    VectorIntegerPop, "vector_integer_pop", opens 0, req [VectorInteger];
    VectorFloatLength, "vector_float_length", opens 0, req [VectorFloat, Integer];
    VectorFloatNth, "vector_float_nth", opens 0, req [VectorFloat, Float, Integer];
    VectorFloatConj, "vector_float_conj", opens 0, req [VectorFloat, Float];
    VectorFloatReverse, "vector_float_reverse", opens 0, req [VectorFloat];
    VectorFloatEmpty, "vector_float_emptyvector", opens 0, req [VectorFloat];
    VectorFloatEq, "vector_float_eq", opens 0, req [VectorFloat, Boolean];
    VectorFloatDup, "vector_float_dup", opens 0, req [VectorFloat];
    VectorFloatPop, "vector_float_pop", opens 0, req [VectorFloat];
    ExecIf, "exec_if", opens 2, req [Boolean];
    ExecDup, "exec_dup", opens 1, req [];
    ExecSwap, "exec_swap", opens 2, req [];
    ExecRot, "exec_rot", opens 3, req [];
    ExecDoTimes, "exec_do*times", opens 1, req [Integer];
    ExecDoCount, "exec_do*count", opens 1, req [Integer];
    ExecDoRange, "exec_do*range", opens 1, req [Integer];
    ExecWhile, "exec_while", opens 1, req [Boolean];
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// The closed instruction set for a problem: `in1..inK` followed by every
/// catalog instruction whose required stacks are all declared by the problem.
///
/// Catalog order is stable across runs; reproducibility depends on it.
pub fn instruction_catalog(
    problem_types: &[TypeTag],
    num_inputs: usize,
) -> Result<Vec<Instruction>, ConfigError> {
    if problem_types.is_empty() {
        return Err(ConfigError::EmptyTypeSet);
    }
    let mut out: Vec<Instruction> = (0..num_inputs)
        .map(|k| Instruction::In(k as u8))
        .collect();
    out.extend(
        CATALOG
            .iter()
            .copied()
            .filter(|ins| ins.required_types().iter().all(|t| problem_types.contains(t))),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for &ins in CATALOG {
            assert_eq!(Instruction::parse(&ins.name()), Some(ins));
        }
        assert_eq!(Instruction::parse("in1"), Some(Instruction::In(0)));
        assert_eq!(Instruction::parse("in4"), Some(Instruction::In(3)));
        assert_eq!(Instruction::parse("in0"), None);
        assert_eq!(Instruction::parse("no_such_thing"), None);
    }

    #[test]
    fn catalog_for_integer_boolean() {
        let cat = instruction_catalog(&[TypeTag::Integer, TypeTag::Boolean], 2).unwrap();
        assert!(cat.contains(&Instruction::In(0)));
        assert!(cat.contains(&Instruction::In(1)));
        assert!(cat.contains(&Instruction::IntegerAdd));
        assert!(cat.contains(&Instruction::IntegerLt));
        assert!(cat.contains(&Instruction::BooleanAnd));
        assert!(cat.contains(&Instruction::ExecIf));
        assert!(cat.contains(&Instruction::ExecDup));
        assert!(cat.contains(&Instruction::ExecDoTimes));
        assert!(!cat.contains(&Instruction::FloatAdd));
        assert!(!cat.contains(&Instruction::IntegerFromFloat));
        assert!(!cat.contains(&Instruction::VectorIntegerNth));
    }

    #[test]
    fn catalog_for_vector_problems() {
        let types = [TypeTag::VectorInteger, TypeTag::Integer, TypeTag::Boolean];
        let cat = instruction_catalog(&types, 1).unwrap();
        assert!(cat.contains(&Instruction::VectorIntegerNth));
        assert!(cat.contains(&Instruction::VectorIntegerLength));
        assert!(cat.contains(&Instruction::VectorIntegerConj));
        assert!(!cat.contains(&Instruction::VectorFloatNth));
    }

    #[test]
    fn empty_type_set_is_an_error() {
        assert!(matches!(
            instruction_catalog(&[], 1),
            Err(ConfigError::EmptyTypeSet)
        ));
    }

    #[test]
    fn catalog_is_stable_and_deduplicated() {
        let mut names: Vec<String> = CATALOG.iter().map(|i| i.name().into_owned()).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(before, names.len());
        // Pinned size of catalog v1; bump CATALOG_VERSION when this changes.
        assert_eq!(before, 65);
    }
}
