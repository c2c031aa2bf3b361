use proptest::prelude::*;

use super::*;
use crate::genome::{genome_from_line, random_genome, translate, ErcKind, GenePool};
use crate::rng;

fn program(line: &str) -> PushProgram {
    translate(&genome_from_line(line).expect("test program parses"))
}

fn run(line: &str, inputs: &[PushValue]) -> MachineState {
    execute(&program(line), inputs, DEFAULT_STEP_LIMIT)
}

fn ints(xs: &[i64]) -> Vec<PushValue> {
    xs.iter().map(|&x| PushValue::Integer(x)).collect()
}

#[test]
fn add_from_inputs() {
    let state = run("in1 in2 integer_add", &ints(&[3, 4]));
    assert_eq!(state.integer, vec![7]);
}

#[test]
fn empty_program_is_identity() {
    let state = run("", &ints(&[5]));
    assert_eq!(state.steps, 0);
    assert!(state.integer.is_empty());
    assert!(state.boolean.is_empty());
    assert!(state.exec.is_empty());
}

// Hand trace: literal 5, in1 pushes 3, do*times consumes 3 and runs the
// body three times, each iteration popping the loop counter and
// incrementing the seeded value. 5 -> 6 -> 7 -> 8.
#[test]
fn do_times_increments_seeded_value() {
    let state = run("i:5 in1 exec_do*times integer_inc", &ints(&[3]));
    assert_eq!(state.integer, vec![8]);
}

#[test]
fn do_count_pushes_ascending_counters() {
    // Body leaves each counter on the stack: expect 0, 1, 2 in order.
    let state = run("i:3 exec_do*count integer_dup integer_pop", &[]);
    assert_eq!(state.integer, vec![0, 1, 2]);
}

#[test]
fn do_count_with_nonpositive_count_is_noop() {
    let state = run("i:0 exec_do*count integer_inc", &[]);
    // n < 1: nothing consumed, nothing run.
    assert_eq!(state.integer, vec![0]);
    let state = run("i:-3 exec_do*count integer_inc", &[]);
    assert_eq!(state.integer, vec![-3]);
}

#[test]
fn do_range_counts_down_too() {
    let state = run("i:3 i:1 exec_do*range integer_dup integer_pop", &[]);
    assert_eq!(state.integer, vec![3, 2, 1]);
}

#[test]
fn exec_if_picks_branch() {
    let state = run("b:true exec_if i:1 CLOSE i:2", &[]);
    assert_eq!(state.integer, vec![1]);
    let state = run("b:false exec_if i:1 CLOSE i:2", &[]);
    assert_eq!(state.integer, vec![2]);
}

#[test]
fn exec_while_runs_until_false() {
    // Counts down from 3: each pass decrements and refreshes the condition.
    let state = run(
        "i:3 b:true exec_while integer_dec integer_dup i:0 integer_gt",
        &[],
    );
    assert_eq!(state.integer, vec![0]);
    assert_eq!(state.boolean, vec![false]);
}

#[test]
fn division_by_zero_restores_operands() {
    let state = run("i:5 i:0 integer_div", &[]);
    assert_eq!(state.integer, vec![5, 0]);
    let state = run("i:5 i:0 integer_mod", &[]);
    assert_eq!(state.integer, vec![5, 0]);
    let state = run("f:5 f:0 float_div", &[]);
    assert_eq!(state.float, vec![5.0, 0.0]);
}

#[test]
fn integer_overflow_is_noop() {
    let state = run("i:9223372036854775807 i:1 integer_add", &[]);
    assert_eq!(state.integer, vec![i64::MAX, 1]);
    let state = run("i:-9223372036854775808 i:-1 integer_div", &[]);
    assert_eq!(state.integer, vec![i64::MIN, -1]);
}

#[test]
fn float_results_stay_finite() {
    let state = run("f:1e308 f:1e308 float_mult", &[]);
    assert_eq!(state.float, vec![1e308, 1e308]);
}

#[test]
fn string_cap_makes_concat_noop() {
    let long = "x".repeat(6000);
    let state = run(&format!("s:\"{long}\" s:\"{long}\" string_concat"), &[]);
    assert_eq!(state.string.len(), 2);
    assert_eq!(state.string[0].len(), 6000);
}

#[test]
fn vector_nth_indexes_modulo_length() {
    let state = run("in1 i:7 vector_integer_nth", &[PushValue::VectorInteger(vec![10, 20, 30])]);
    // 7 mod 3 = 1
    assert_eq!(state.integer, vec![20]);
    let state = run("in1 i:-1 vector_integer_nth", &[PushValue::VectorInteger(vec![10, 20, 30])]);
    // -1 mod 3 = 2
    assert_eq!(state.integer, vec![30]);
}

#[test]
fn output_reads_designated_stack_top() {
    let state = run("i:2 i:7", &[]);
    assert_eq!(output_of(&state, TypeTag::Integer), Some(PushValue::Integer(7)));
    assert_eq!(output_of(&state, TypeTag::Boolean), None);
}

#[test]
fn smallest_reference_solution() {
    let genome = crate::problems::Problem::Smallest.reference_genome();
    let state = execute(&translate(&genome), &ints(&[4, 1, 9, 3]), DEFAULT_STEP_LIMIT);
    assert_eq!(output_of(&state, TypeTag::Integer), Some(PushValue::Integer(1)));
}

#[test]
fn runaway_loop_stops_at_step_limit() {
    let state = execute(&program("b:true exec_while b:true"), &[], 500);
    assert_eq!(state.steps, 500);
}

#[test]
fn missing_input_is_noop() {
    let state = run("in3 in1", &ints(&[42]));
    assert_eq!(state.integer, vec![42]);
}

// Every instruction executed on an empty machine must leave all data stacks
// unchanged (the two emptyvector constructors are the only producers that
// need no arguments).
#[test]
fn noop_safety_on_empty_machine() {
    for &ins in CATALOG {
        let p = PushProgram(vec![ProgramAtom::Instruction(ins)]);
        let state = execute(&p, &[], DEFAULT_STEP_LIMIT);
        let expect_vec_int = usize::from(ins == Instruction::VectorIntegerEmpty);
        let expect_vec_float = usize::from(ins == Instruction::VectorFloatEmpty);
        assert!(state.integer.is_empty(), "{ins} touched integer");
        assert!(state.float.is_empty(), "{ins} touched float");
        assert!(state.boolean.is_empty(), "{ins} touched boolean");
        assert!(state.character.is_empty(), "{ins} touched char");
        assert!(state.string.is_empty(), "{ins} touched string");
        assert_eq!(state.vector_integer.len(), expect_vec_int, "{ins}");
        assert_eq!(state.vector_float.len(), expect_vec_float, "{ins}");
    }
}

fn all_type_pool() -> GenePool {
    let types = [
        TypeTag::Integer,
        TypeTag::Float,
        TypeTag::Boolean,
        TypeTag::Char,
        TypeTag::String,
        TypeTag::VectorInteger,
        TypeTag::VectorFloat,
    ];
    GenePool::new(
        instruction_catalog(&types, 2).unwrap(),
        ErcKind::for_types(&types),
    )
}

#[test]
fn random_programs_terminate_within_step_limit() {
    let pool = all_type_pool();
    let mut rng = rng::seeded(7);
    let inputs = [PushValue::Integer(5), PushValue::VectorInteger(vec![1, 0, 2])];
    for _ in 0..300 {
        let genome = random_genome(&pool, 500, &mut rng);
        let state = execute(&translate(&genome), &inputs, 1000);
        assert!(state.steps <= 1000);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Determinism: identical runs produce identical final states.
    #[test]
    fn execution_is_deterministic(seed in any::<u64>(), len in 0usize..200) {
        let pool = all_type_pool();
        let mut r = rng::seeded(seed);
        let genome = random_genome(&pool, len, &mut r);
        let prog = translate(&genome);
        let inputs = [PushValue::Integer(3), PushValue::String("ab".into())];
        let a = execute(&prog, &inputs, 800);
        let b = execute(&prog, &inputs, 800);
        prop_assert_eq!(a.integer, b.integer);
        prop_assert_eq!(a.float, b.float);
        prop_assert_eq!(a.boolean, b.boolean);
        prop_assert_eq!(a.character, b.character);
        prop_assert_eq!(a.string, b.string);
        prop_assert_eq!(a.vector_integer, b.vector_integer);
        prop_assert_eq!(a.vector_float, b.vector_float);
        prop_assert_eq!(a.steps, b.steps);
    }
}

// ---------------------------------------------------------------------------
// Independent reference interpreter for the integer/boolean/loop subset.
//
// Evaluates the program tree recursively with native Rust loops instead of
// an exec stack. Only valid for programs where every exec-consuming
// instruction finds its bodies as following siblings in the same block; the
// generator below only produces such programs.
// ---------------------------------------------------------------------------

#[derive(Default)]
struct RefMachine {
    int: Vec<i64>,
    boolean: Vec<bool>,
    work: u64,
}

fn ref_eval_block(atoms: &[ProgramAtom], inputs: &[i64], m: &mut RefMachine) -> Result<(), ()> {
    let mut i = 0;
    while i < atoms.len() {
        m.work += 1;
        if m.work > 200_000 {
            return Err(()); // fuel exhausted; caller skips the sample
        }
        match &atoms[i] {
            ProgramAtom::Literal(PushValue::Integer(x)) => m.int.push(*x),
            ProgramAtom::Literal(PushValue::Boolean(b)) => m.boolean.push(*b),
            ProgramAtom::Literal(_) => panic!("subset holds ints and bools only"),
            ProgramAtom::Block(inner) => ref_eval_block(inner, inputs, m)?,
            ProgramAtom::Instruction(ins) => match ins {
                Instruction::In(k) => {
                    if let Some(&v) = inputs.get(*k as usize) {
                        m.int.push(v);
                    }
                }
                Instruction::IntegerAdd => ref_bin(m, |a, b| a.checked_add(b)),
                Instruction::IntegerSub => ref_bin(m, |a, b| a.checked_sub(b)),
                Instruction::IntegerMult => ref_bin(m, |a, b| a.checked_mul(b)),
                Instruction::IntegerMin => ref_bin(m, |a, b| Some(a.min(b))),
                Instruction::IntegerMax => ref_bin(m, |a, b| Some(a.max(b))),
                Instruction::IntegerInc => {
                    if let Some(&a) = m.int.last() {
                        if let Some(r) = a.checked_add(1) {
                            *m.int.last_mut().unwrap() = r;
                        }
                    }
                }
                Instruction::IntegerDup => {
                    if let Some(&a) = m.int.last() {
                        m.int.push(a);
                    }
                }
                Instruction::IntegerPop => {
                    m.int.pop();
                }
                Instruction::IntegerLt => ref_cmp(m, |a, b| a < b),
                Instruction::IntegerEq => ref_cmp(m, |a, b| a == b),
                Instruction::BooleanNot => {
                    if let Some(b) = m.boolean.last_mut() {
                        *b = !*b;
                    }
                }
                Instruction::ExecDoTimes | Instruction::ExecDoCount => {
                    // Body is the next sibling by construction.
                    if i + 1 < atoms.len() && !m.int.is_empty() && *m.int.last().unwrap() >= 1 {
                        let n = m.int.pop().unwrap();
                        for counter in 0..n {
                            if *ins == Instruction::ExecDoCount {
                                m.int.push(counter);
                            }
                            ref_eval_block(
                                std::slice::from_ref(&atoms[i + 1]),
                                inputs,
                                m,
                            )?;
                        }
                        i += 1; // skip the consumed body
                    }
                }
                Instruction::ExecIf => {
                    // Needs a boolean and two following siblings; otherwise
                    // the machine no-ops and both siblings run as plain code,
                    // which the fall-through here reproduces.
                    if i + 2 < atoms.len() && !m.boolean.is_empty() {
                        let b = m.boolean.pop().unwrap();
                        let chosen = if b { &atoms[i + 1] } else { &atoms[i + 2] };
                        ref_eval_block(std::slice::from_ref(chosen), inputs, m)?;
                        i += 2;
                    }
                }
                other => panic!("{other} not in reference subset"),
            },
        }
        i += 1;
    }
    Ok(())
}

fn ref_bin(m: &mut RefMachine, f: impl Fn(i64, i64) -> Option<i64>) {
    let n = m.int.len();
    if n >= 2 {
        if let Some(r) = f(m.int[n - 2], m.int[n - 1]) {
            m.int.truncate(n - 2);
            m.int.push(r);
        }
    }
}

fn ref_cmp(m: &mut RefMachine, f: impl Fn(i64, i64) -> bool) {
    let n = m.int.len();
    if n >= 2 {
        let r = f(m.int[n - 2], m.int[n - 1]);
        m.int.truncate(n - 2);
        m.boolean.push(r);
    }
}

// Random structured programs for the subset: exec instructions always get
// their bodies as same-block siblings, loop counts stay small.
fn gen_subset_block(depth: usize, len: usize, rng: &mut impl rand::Rng) -> Vec<ProgramAtom> {
    use Instruction::*;
    let plain = [
        IntegerAdd, IntegerSub, IntegerMult, IntegerMin, IntegerMax, IntegerInc, IntegerDup,
        IntegerPop, IntegerLt, IntegerEq, BooleanNot,
    ];
    let mut atoms = Vec::new();
    let mut remaining = len;
    while remaining > 0 {
        remaining -= 1;
        match rng.random_range(0..10) {
            0..=3 => atoms.push(ProgramAtom::Literal(PushValue::Integer(
                rng.random_range(-5..=5),
            ))),
            4 => atoms.push(ProgramAtom::Literal(PushValue::Boolean(rng.random_bool(0.5)))),
            5..=7 => atoms.push(ProgramAtom::Instruction(
                plain[rng.random_range(0..plain.len())],
            )),
            8 if depth > 0 => {
                let ins = if rng.random_bool(0.5) { ExecDoTimes } else { ExecDoCount };
                atoms.push(ProgramAtom::Instruction(ins));
                atoms.push(ProgramAtom::Block(gen_subset_block(
                    depth - 1,
                    rng.random_range(1..=4),
                    rng,
                )));
            }
            9 if depth > 0 => {
                atoms.push(ProgramAtom::Instruction(ExecIf));
                for _ in 0..2 {
                    atoms.push(ProgramAtom::Block(gen_subset_block(
                        depth - 1,
                        rng.random_range(0..=3),
                        rng,
                    )));
                }
            }
            _ => atoms.push(ProgramAtom::Instruction(In(rng.random_range(0..2)))),
        }
    }
    atoms
}

// The exec-stack machine and the recursive reference interpreter must agree
// on final integer and boolean stacks for the whole structured subset.
#[test]
fn exec_stack_machine_matches_reference_interpreter() {
    let mut rng = rng::seeded(20260809);
    let inputs = [4i64, -2];
    let push_inputs: Vec<PushValue> = inputs.iter().map(|&x| PushValue::Integer(x)).collect();
    let mut checked = 0;
    for _ in 0..400 {
        let atoms = gen_subset_block(2, rng.random_range(1..=10), &mut rng);
        let prog = PushProgram(atoms.clone());

        let mut reference = RefMachine::default();
        if ref_eval_block(&atoms, &inputs, &mut reference).is_err() {
            continue; // reference fuel exhausted
        }
        let state = execute(&prog, &push_inputs, 2_000_000);
        assert!(state.steps < 2_000_000, "vm unexpectedly hit step limit");
        assert_eq!(state.integer, reference.int, "program: {}", prog.to_text());
        assert_eq!(state.boolean, reference.boolean, "program: {}", prog.to_text());
        checked += 1;
    }
    assert!(checked >= 300, "too few comparable samples: {checked}");
}
