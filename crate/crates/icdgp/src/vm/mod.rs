//! Deterministic interpreter for a Push-style typed-stack language.
//!
//! Programs are hierarchical lists of literals, instructions, and nested
//! blocks. Execution pops atoms from an exec stack: literals go to the stack
//! matching their type, blocks expand onto the exec stack, and instructions
//! take their arguments from the typed stacks and return results there.
//! An instruction whose argument stacks cannot supply it is a no-op, so any
//! atom sequence runs without error; a step limit bounds every execution.

mod instructions;

use serde::{Deserialize, Serialize};

pub use instructions::{instruction_catalog, Instruction, TypeTag, CATALOG, CATALOG_VERSION};

/// Caps evolved strings and vectors; a producing instruction becomes a no-op
/// rather than exceed it.
pub const MAX_COLLECTION_LEN: usize = 10_000;

/// Default interpreter step limit per execution.
pub const DEFAULT_STEP_LIMIT: u64 = 2000;

/// A typed runtime value.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum PushValue {
    Integer(i64),
    Float(f64),
    Boolean(bool),
    Char(char),
    String(String),
    VectorInteger(Vec<i64>),
    VectorFloat(Vec<f64>),
}

impl PushValue {
    pub fn type_tag(&self) -> TypeTag {
        match self {
            PushValue::Integer(_) => TypeTag::Integer,
            PushValue::Float(_) => TypeTag::Float,
            PushValue::Boolean(_) => TypeTag::Boolean,
            PushValue::Char(_) => TypeTag::Char,
            PushValue::String(_) => TypeTag::String,
            PushValue::VectorInteger(_) => TypeTag::VectorInteger,
            PushValue::VectorFloat(_) => TypeTag::VectorFloat,
        }
    }
}

// Equality and hashing compare floats bit-for-bit; behavior vectors rely on
// this being a total equivalence.
impl PartialEq for PushValue {
    fn eq(&self, other: &Self) -> bool {
        use PushValue::*;
        match (self, other) {
            (Integer(a), Integer(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Boolean(a), Boolean(b)) => a == b,
            (Char(a), Char(b)) => a == b,
            (String(a), String(b)) => a == b,
            (VectorInteger(a), VectorInteger(b)) => a == b,
            (VectorFloat(a), VectorFloat(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            _ => false,
        }
    }
}

impl Eq for PushValue {}

impl std::hash::Hash for PushValue {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        use PushValue::*;
        std::mem::discriminant(self).hash(state);
        match self {
            Integer(v) => v.hash(state),
            Float(v) => v.to_bits().hash(state),
            Boolean(v) => v.hash(state),
            Char(v) => v.hash(state),
            String(v) => v.hash(state),
            VectorInteger(v) => v.hash(state),
            VectorFloat(v) => {
                for x in v {
                    x.to_bits().hash(state);
                }
            }
        }
    }
}

/// One node of a Push program: a literal, an instruction, or a nested block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProgramAtom {
    Literal(PushValue),
    Instruction(Instruction),
    Block(Vec<ProgramAtom>),
}

/// A whole program: the top-level block.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PushProgram(pub Vec<ProgramAtom>);

impl PushProgram {
    pub fn len_atoms(&self) -> usize {
        fn count(atoms: &[ProgramAtom]) -> usize {
            atoms
                .iter()
                .map(|a| match a {
                    ProgramAtom::Block(inner) => 1 + count(inner),
                    _ => 1,
                })
                .sum()
        }
        count(&self.0)
    }

    /// Parenthesized text form, e.g. `(exec_if (integer_add) (integer_sub))`.
    pub fn to_text(&self) -> String {
        fn write_atoms(atoms: &[ProgramAtom], out: &mut String) {
            for (i, atom) in atoms.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                match atom {
                    ProgramAtom::Instruction(ins) => out.push_str(&ins.name()),
                    ProgramAtom::Literal(v) => out.push_str(&crate::genome::literal_token(v)),
                    ProgramAtom::Block(inner) => {
                        out.push('(');
                        write_atoms(inner, out);
                        out.push(')');
                    }
                }
            }
        }
        let mut out = String::from("(");
        write_atoms(&self.0, &mut out);
        out.push(')');
        out
    }
}

/// Interpreter state: one stack per value type plus the exec stack.
#[derive(Clone, Debug, Default)]
pub struct MachineState {
    pub integer: Vec<i64>,
    pub float: Vec<f64>,
    pub boolean: Vec<bool>,
    pub character: Vec<char>,
    pub string: Vec<String>,
    pub vector_integer: Vec<Vec<i64>>,
    pub vector_float: Vec<Vec<f64>>,
    pub exec: Vec<ProgramAtom>,
    pub inputs: Vec<PushValue>,
    pub steps: u64,
    pub step_limit: u64,
}

impl MachineState {
    pub fn new(inputs: Vec<PushValue>, step_limit: u64) -> Self {
        MachineState {
            inputs,
            step_limit,
            ..Default::default()
        }
    }

    fn push_value(&mut self, v: PushValue) {
        match v {
            PushValue::Integer(x) => self.integer.push(x),
            PushValue::Float(x) => self.float.push(x),
            PushValue::Boolean(x) => self.boolean.push(x),
            PushValue::Char(x) => self.character.push(x),
            PushValue::String(x) => self.string.push(x),
            PushValue::VectorInteger(x) => self.vector_integer.push(x),
            PushValue::VectorFloat(x) => self.vector_float.push(x),
        }
    }

    /// Top of the stack named by `tag`, or `None` when that stack is empty.
    pub fn top_of(&self, tag: TypeTag) -> Option<PushValue> {
        match tag {
            TypeTag::Integer => self.integer.last().map(|&v| PushValue::Integer(v)),
            TypeTag::Float => self.float.last().map(|&v| PushValue::Float(v)),
            TypeTag::Boolean => self.boolean.last().map(|&v| PushValue::Boolean(v)),
            TypeTag::Char => self.character.last().map(|&v| PushValue::Char(v)),
            TypeTag::String => self.string.last().map(|v| PushValue::String(v.clone())),
            TypeTag::VectorInteger => self
                .vector_integer
                .last()
                .map(|v| PushValue::VectorInteger(v.clone())),
            TypeTag::VectorFloat => self
                .vector_float
                .last()
                .map(|v| PushValue::VectorFloat(v.clone())),
        }
    }
}

/// Runs `program` on `inputs`. Deterministic; always terminates within
/// `step_limit` interpreter steps.
pub fn execute(program: &PushProgram, inputs: &[PushValue], step_limit: u64) -> MachineState {
    let mut state = MachineState::new(inputs.to_vec(), step_limit);
    for atom in program.0.iter().rev() {
        state.exec.push(atom.clone());
    }
    while state.steps < state.step_limit {
        let Some(atom) = state.exec.pop() else {
            break;
        };
        state.steps += 1;
        match atom {
            ProgramAtom::Literal(v) => state.push_value(v),
            ProgramAtom::Block(atoms) => {
                for a in atoms.into_iter().rev() {
                    state.exec.push(a);
                }
            }
            ProgramAtom::Instruction(ins) => dispatch(&mut state, ins),
        }
    }
    state
}

/// Reads the problem's answer from the designated stack top.
/// `None` is the NO_OUTPUT sentinel.
pub fn output_of(state: &MachineState, output_spec: TypeTag) -> Option<PushValue> {
    state.top_of(output_spec)
}

fn bin_int(st: &mut MachineState, f: impl Fn(i64, i64) -> Option<i64>) {
    let n = st.integer.len();
    if n >= 2 {
        if let Some(r) = f(st.integer[n - 2], st.integer[n - 1]) {
            st.integer.truncate(n - 2);
            st.integer.push(r);
        }
    }
}

fn un_int(st: &mut MachineState, f: impl Fn(i64) -> Option<i64>) {
    if let Some(&a) = st.integer.last() {
        if let Some(r) = f(a) {
            *st.integer.last_mut().unwrap() = r;
        }
    }
}

fn cmp_int(st: &mut MachineState, f: impl Fn(i64, i64) -> bool) {
    let n = st.integer.len();
    if n >= 2 {
        let r = f(st.integer[n - 2], st.integer[n - 1]);
        st.integer.truncate(n - 2);
        st.boolean.push(r);
    }
}

// Float results must stay finite; anything else makes the instruction a no-op.
fn bin_float(st: &mut MachineState, f: impl Fn(f64, f64) -> f64) {
    let n = st.float.len();
    if n >= 2 {
        let r = f(st.float[n - 2], st.float[n - 1]);
        if r.is_finite() {
            st.float.truncate(n - 2);
            st.float.push(r);
        }
    }
}

fn cmp_float(st: &mut MachineState, f: impl Fn(f64, f64) -> bool) {
    let n = st.float.len();
    if n >= 2 {
        let r = f(st.float[n - 2], st.float[n - 1]);
        st.float.truncate(n - 2);
        st.boolean.push(r);
    }
}

fn bin_bool(st: &mut MachineState, f: impl Fn(bool, bool) -> bool) {
    let n = st.boolean.len();
    if n >= 2 {
        let r = f(st.boolean[n - 2], st.boolean[n - 1]);
        st.boolean.truncate(n - 2);
        st.boolean.push(r);
    }
}

fn dup<T: Clone>(stack: &mut Vec<T>) {
    if let Some(top) = stack.last().cloned() {
        stack.push(top);
    }
}

fn swap<T>(stack: &mut [T]) {
    let n = stack.len();
    if n >= 2 {
        stack.swap(n - 1, n - 2);
    }
}

fn dispatch(st: &mut MachineState, ins: Instruction) {
    use Instruction::*;
    match ins {
        In(k) => {
            if let Some(v) = st.inputs.get(k as usize).cloned() {
                st.push_value(v);
            }
        }

        IntegerAdd => bin_int(st, |a, b| a.checked_add(b)),
        IntegerSub => bin_int(st, |a, b| a.checked_sub(b)),
        IntegerMult => bin_int(st, |a, b| a.checked_mul(b)),
        IntegerDiv => bin_int(st, |a, b| if b == 0 { None } else { a.checked_div(b) }),
        IntegerMod => bin_int(st, |a, b| {
            if b == 0 {
                None
            } else {
                a.checked_rem_euclid(b)
            }
        }),
        IntegerMin => bin_int(st, |a, b| Some(a.min(b))),
        IntegerMax => bin_int(st, |a, b| Some(a.max(b))),
        IntegerInc => un_int(st, |a| a.checked_add(1)),
        IntegerDec => un_int(st, |a| a.checked_sub(1)),
        IntegerDup => dup(&mut st.integer),
        IntegerSwap => swap(&mut st.integer),
        IntegerPop => {
            st.integer.pop();
        }
        IntegerLt => cmp_int(st, |a, b| a < b),
        IntegerGt => cmp_int(st, |a, b| a > b),
        IntegerEq => cmp_int(st, |a, b| a == b),
        IntegerFromBoolean => {
            if let Some(b) = st.boolean.pop() {
                st.integer.push(if b { 1 } else { 0 });
            }
        }
        IntegerFromFloat => {
            if let Some(&f) = st.float.last() {
                // Truncation is exact and in-range below this bound.
                if f.abs() < 9.0e18 {
                    st.float.pop();
                    st.integer.push(f.trunc() as i64);
                }
            }
        }
        FloatFromInteger => {
            if let Some(i) = st.integer.pop() {
                st.float.push(i as f64);
            }
        }

        FloatAdd => bin_float(st, |a, b| a + b),
        FloatSub => bin_float(st, |a, b| a - b),
        FloatMult => bin_float(st, |a, b| a * b),
        FloatDiv => {
            let n = st.float.len();
            if n >= 2 && st.float[n - 1] != 0.0 {
                let r = st.float[n - 2] / st.float[n - 1];
                if r.is_finite() {
                    st.float.truncate(n - 2);
                    st.float.push(r);
                }
            }
        }
        FloatDup => dup(&mut st.float),
        FloatSwap => swap(&mut st.float),
        FloatPop => {
            st.float.pop();
        }
        FloatLt => cmp_float(st, |a, b| a < b),
        FloatGt => cmp_float(st, |a, b| a > b),

        BooleanAnd => bin_bool(st, |a, b| a && b),
        BooleanOr => bin_bool(st, |a, b| a || b),
        BooleanNot => {
            if let Some(b) = st.boolean.last_mut() {
                *b = !*b;
            }
        }
        BooleanDup => dup(&mut st.boolean),
        BooleanPop => {
            st.boolean.pop();
        }

        CharEq => {
            let n = st.character.len();
            if n >= 2 {
                let r = st.character[n - 2] == st.character[n - 1];
                st.character.truncate(n - 2);
                st.boolean.push(r);
            }
        }
        CharIsLetter => {
            if let Some(c) = st.character.pop() {
                st.boolean.push(c.is_alphabetic());
            }
        }
        CharDup => dup(&mut st.character),
        CharPop => {
            st.character.pop();
        }

        StringLength => {
            if let Some(s) = st.string.pop() {
                st.integer.push(s.chars().count() as i64);
            }
        }
        StringConcat => {
            let n = st.string.len();
            if n >= 2 && st.string[n - 2].len() + st.string[n - 1].len() <= MAX_COLLECTION_LEN {
                let b = st.string.pop().unwrap();
                let mut a = st.string.pop().unwrap();
                a.push_str(&b);
                st.string.push(a);
            }
        }
        StringReverse => {
            if let Some(s) = st.string.last_mut() {
                *s = s.chars().rev().collect();
            }
        }
        StringEq => {
            let n = st.string.len();
            if n >= 2 {
                let r = st.string[n - 2] == st.string[n - 1];
                st.string.truncate(n - 2);
                st.boolean.push(r);
            }
        }
        StringDup => dup(&mut st.string),
        StringPop => {
            st.string.pop();
        }

        VectorIntegerLength => {
            if let Some(v) = st.vector_integer.pop() {
                st.integer.push(v.len() as i64);
            }
        }
        VectorIntegerNth => {
            // Indexes modulo the length, so any index hits the vector.
            if !st.vector_integer.is_empty() && !st.integer.is_empty() {
                let v = st.vector_integer.last().unwrap();
                if !v.is_empty() {
                    let i = st.integer.pop().unwrap();
                    let idx = i.rem_euclid(v.len() as i64) as usize;
                    let elem = v[idx];
                    st.vector_integer.pop();
                    st.integer.push(elem);
                }
            }
        }
        VectorIntegerConj => {
            if !st.vector_integer.is_empty()
                && !st.integer.is_empty()
                && st.vector_integer.last().unwrap().len() < MAX_COLLECTION_LEN
            {
                let x = st.integer.pop().unwrap();
                st.vector_integer.last_mut().unwrap().push(x);
            }
        }
        VectorIntegerReverse => {
            if let Some(v) = st.vector_integer.last_mut() {
                v.reverse();
            }
        }
        VectorIntegerEmpty => st.vector_integer.push(Vec::new()),
        VectorIntegerEq => {
            let n = st.vector_integer.len();
            if n >= 2 {
                let r = st.vector_integer[n - 2] == st.vector_integer[n - 1];
                st.vector_integer.truncate(n - 2);
                st.boolean.push(r);
            }
        }
        VectorIntegerDup => dup(&mut st.vector_integer),
        VectorIntegerPop => {
            st.vector_integer.pop();
        }

        VectorFloatLength => {
            if let Some(v) = st.vector_float.pop() {
                st.integer.push(v.len() as i64);
            }
        }
        VectorFloatNth => {
            if !st.vector_float.is_empty() && !st.integer.is_empty() {
                let v = st.vector_float.last().unwrap();
                if !v.is_empty() {
                    let i = st.integer.pop().unwrap();
                    let idx = i.rem_euclid(v.len() as i64) as usize;
                    let elem = v[idx];
                    st.vector_float.pop();
                    st.float.push(elem);
                }
            }
        }
        VectorFloatConj => {
            if !st.vector_float.is_empty()
                && !st.float.is_empty()
                && st.vector_float.last().unwrap().len() < MAX_COLLECTION_LEN
            {
                let x = st.float.pop().unwrap();
                st.vector_float.last_mut().unwrap().push(x);
            }
        }
        VectorFloatReverse => {
            if let Some(v) = st.vector_float.last_mut() {
                v.reverse();
            }
        }
        VectorFloatEmpty => st.vector_float.push(Vec::new()),
        VectorFloatEq => {
            let n = st.vector_float.len();
            if n >= 2 {
                let r = st.vector_float[n - 2].len() == st.vector_float[n - 1].len()
                    && st.vector_float[n - 2]
                        .iter()
                        .zip(&st.vector_float[n - 1])
                        .all(|(a, b)| a == b);
                st.vector_float.truncate(n - 2);
                st.boolean.push(r);
            }
        }
        VectorFloatDup => dup(&mut st.vector_float),
        VectorFloatPop => {
            st.vector_float.pop();
        }

        ExecIf => {
            if !st.boolean.is_empty() && st.exec.len() >= 2 {
                let b = st.boolean.pop().unwrap();
                let when_true = st.exec.pop().unwrap();
                let when_false = st.exec.pop().unwrap();
                st.exec.push(if b { when_true } else { when_false });
            }
        }
        ExecDup => dup(&mut st.exec),
        ExecSwap => swap(&mut st.exec),
        ExecRot => {
            let n = st.exec.len();
            if n >= 3 {
                // Third item out and on top.
                st.exec[n - 3..].rotate_left(1);
            }
        }
        ExecDoRange => {
            // Top integer is the destination, second is the current index.
            // Pushes the counter each iteration and re-expands lazily, so the
            // step limit bounds total work.
            if st.integer.len() >= 2 && !st.exec.is_empty() {
                let dest = st.integer.pop().unwrap();
                let current = st.integer.pop().unwrap();
                let body = st.exec.pop().unwrap();
                st.integer.push(current);
                if current != dest {
                    let next = if current < dest {
                        current + 1
                    } else {
                        current - 1
                    };
                    st.exec.push(ProgramAtom::Block(vec![
                        ProgramAtom::Literal(PushValue::Integer(next)),
                        ProgramAtom::Literal(PushValue::Integer(dest)),
                        ProgramAtom::Instruction(ExecDoRange),
                        body.clone(),
                    ]));
                }
                st.exec.push(body);
            }
        }
        ExecDoCount => {
            // Runs the body with counter 0..n-1; n < 1 is a no-op.
            if !st.integer.is_empty() && !st.exec.is_empty() && *st.integer.last().unwrap() >= 1 {
                let n = st.integer.pop().unwrap();
                let body = st.exec.pop().unwrap();
                st.exec.push(ProgramAtom::Block(vec![
                    ProgramAtom::Literal(PushValue::Integer(0)),
                    ProgramAtom::Literal(PushValue::Integer(n - 1)),
                    ProgramAtom::Instruction(ExecDoRange),
                    body,
                ]));
            }
        }
        ExecDoTimes => {
            // Like do*count, but the counter is popped before the body runs.
            if !st.integer.is_empty() && !st.exec.is_empty() && *st.integer.last().unwrap() >= 1 {
                let n = st.integer.pop().unwrap();
                let body = st.exec.pop().unwrap();
                let body = ProgramAtom::Block(vec![
                    ProgramAtom::Instruction(IntegerPop),
                    body,
                ]);
                st.exec.push(ProgramAtom::Block(vec![
                    ProgramAtom::Literal(PushValue::Integer(0)),
                    ProgramAtom::Literal(PushValue::Integer(n - 1)),
                    ProgramAtom::Instruction(ExecDoRange),
                    body,
                ]));
            }
        }
        ExecWhile => {
            if !st.boolean.is_empty() && !st.exec.is_empty() {
                let b = st.boolean.pop().unwrap();
                let body = st.exec.pop().unwrap();
                if b {
                    st.exec.push(ProgramAtom::Block(vec![
                        body.clone(),
                        ProgramAtom::Instruction(ExecWhile),
                        body,
                    ]));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
