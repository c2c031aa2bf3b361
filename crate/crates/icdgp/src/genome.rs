//! Plushy genomes: a flat gene sequence that variation operates on, plus the
//! total translation into executable Push programs.
//!
//! Serialization is one genome per line, genes space-separated, literals
//! type-prefixed (`i:42`, `f:1.5`, `b:true`, `c:"a"`, `s:"ab c"`,
//! `vi:[1,2]`, `vf:[0.5]`), block-closing markers spelled `CLOSE`.
//! Round-trips are bit-exact, including floats.

use rand::Rng;

use crate::error::ParseError;
use crate::vm::{Instruction, ProgramAtom, PushProgram, PushValue, TypeTag};

/// One gene: an instruction, a literal, or the block-closing marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gene {
    Instruction(Instruction),
    Literal(PushValue),
    Close,
}

/// A flat, ordered gene sequence.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PlushyGenome(pub Vec<Gene>);

impl PlushyGenome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Translates a genome into a program. Total: every gene sequence yields a
/// well-formed program.
///
/// An instruction that opens N blocks is followed by N sibling blocks;
/// `CLOSE` ends the innermost open block (surplus closes are ignored), and
/// any blocks still open at the end of the genome are closed, materializing
/// empty blocks for openers that never received content.
pub fn translate(genome: &PlushyGenome) -> PushProgram {
    // Each frame holds the atoms collected so far and how many sibling
    // blocks remain to open once it closes.
    struct Frame {
        atoms: Vec<ProgramAtom>,
        siblings_after: usize,
    }
    let mut stack = vec![Frame {
        atoms: Vec::new(),
        siblings_after: 0,
    }];

    fn close_top(stack: &mut Vec<Frame>) {
        let frame = stack.pop().expect("root frame never closes");
        let siblings = frame.siblings_after;
        stack
            .last_mut()
            .expect("root frame below any closable frame")
            .atoms
            .push(ProgramAtom::Block(frame.atoms));
        if siblings > 0 {
            stack.push(Frame {
                atoms: Vec::new(),
                siblings_after: siblings - 1,
            });
        }
    }

    for gene in &genome.0 {
        match gene {
            Gene::Literal(v) => stack
                .last_mut()
                .unwrap()
                .atoms
                .push(ProgramAtom::Literal(v.clone())),
            Gene::Instruction(ins) => {
                stack
                    .last_mut()
                    .unwrap()
                    .atoms
                    .push(ProgramAtom::Instruction(*ins));
                let opens = ins.opens();
                if opens > 0 {
                    stack.push(Frame {
                        atoms: Vec::new(),
                        siblings_after: opens - 1,
                    });
                }
            }
            Gene::Close => {
                if stack.len() > 1 {
                    close_top(&mut stack);
                }
            }
        }
    }
    while stack.len() > 1 {
        close_top(&mut stack);
    }
    PushProgram(stack.pop().unwrap().atoms)
}

// ---------------------------------------------------------------------------
// Random genomes and UMAD
// ---------------------------------------------------------------------------

/// Ephemeral random constant generators, one per literal type the problem
/// declares. Ranges are fixed and documented for reproducibility: integers
/// and floats uniform in [-100, 100], chars from visible ASCII, strings of
/// up to 10 visible-ASCII-or-space chars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErcKind {
    Integer,
    Float,
    Char,
    String,
}

impl ErcKind {
    fn generate(self, rng: &mut impl Rng) -> PushValue {
        match self {
            ErcKind::Integer => PushValue::Integer(rng.random_range(-100..=100)),
            ErcKind::Float => PushValue::Float(rng.random_range(-100.0..=100.0)),
            ErcKind::Char => PushValue::Char(random_visible_char(rng)),
            ErcKind::String => {
                let len = rng.random_range(0..=10);
                let s: String = (0..len)
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            ' '
                        } else {
                            random_visible_char(rng)
                        }
                    })
                    .collect();
                PushValue::String(s)
            }
        }
    }

    pub fn for_types(types: &[TypeTag]) -> Vec<ErcKind> {
        let mut out = Vec::new();
        if types.contains(&TypeTag::Integer) {
            out.push(ErcKind::Integer);
        }
        if types.contains(&TypeTag::Float) {
            out.push(ErcKind::Float);
        }
        if types.contains(&TypeTag::Char) {
            out.push(ErcKind::Char);
        }
        if types.contains(&TypeTag::String) {
            out.push(ErcKind::String);
        }
        out
    }
}

fn random_visible_char(rng: &mut impl Rng) -> char {
    rng.random_range(33u8..=126) as char
}

/// The gene source for random genomes and UMAD additions: instructions and
/// ERC generators with weight 1 each, CLOSE weighted by the total number of
/// blocks the instruction entries open so expected closes match expected
/// opens.
#[derive(Clone, Debug)]
pub struct GenePool {
    instructions: Vec<Instruction>,
    ercs: Vec<ErcKind>,
    close_weight: usize,
}

impl GenePool {
    pub fn new(instructions: Vec<Instruction>, ercs: Vec<ErcKind>) -> Self {
        let close_weight = instructions.iter().map(|i| i.opens()).sum();
        GenePool {
            instructions,
            ercs,
            close_weight,
        }
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn random_gene(&self, rng: &mut impl Rng) -> Gene {
        let total = self.instructions.len() + self.ercs.len() + self.close_weight;
        assert!(total > 0, "gene pool is empty");
        let pick = rng.random_range(0..total);
        if pick < self.instructions.len() {
            Gene::Instruction(self.instructions[pick])
        } else if pick < self.instructions.len() + self.ercs.len() {
            Gene::Literal(self.ercs[pick - self.instructions.len()].generate(rng))
        } else {
            Gene::Close
        }
    }
}

/// A genome of exactly `size` genes drawn from the pool.
pub fn random_genome(pool: &GenePool, size: usize, rng: &mut impl Rng) -> PlushyGenome {
    PlushyGenome((0..size).map(|_| pool.random_gene(rng)).collect())
}

/// Uniform mutation by addition and deletion, size-neutral in expectation.
///
/// Pass 1 inserts a fresh random gene before or after each parent gene with
/// probability `add_rate`; pass 2 deletes each gene of the intermediate
/// genome with probability `add_rate / (1 + add_rate)`.
pub fn umad(
    parent: &PlushyGenome,
    pool: &GenePool,
    add_rate: f64,
    rng: &mut impl Rng,
) -> PlushyGenome {
    assert!((0.0..1.0).contains(&add_rate), "add_rate must be in [0, 1)");
    let mut intermediate: Vec<Gene> = Vec::with_capacity(parent.0.len() + 8);
    for gene in &parent.0 {
        if rng.random_bool(add_rate) {
            let fresh = pool.random_gene(rng);
            if rng.random_bool(0.5) {
                intermediate.push(fresh);
                intermediate.push(gene.clone());
            } else {
                intermediate.push(gene.clone());
                intermediate.push(fresh);
            }
        } else {
            intermediate.push(gene.clone());
        }
    }
    if add_rate == 0.0 {
        return PlushyGenome(intermediate);
    }
    let delete_rate = add_rate / (1.0 + add_rate);
    PlushyGenome(
        intermediate
            .into_iter()
            .filter(|_| !rng.random_bool(delete_rate))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Line serialization
// ---------------------------------------------------------------------------

fn escape_into(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
}

fn unescape(s: &str) -> Result<String, ParseError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('\\') => out.push('\\'),
                Some('"') => out.push('"'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                _ => return Err(ParseError::BadEscape(s.to_string())),
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// The wire token for a literal value.
pub fn literal_token(v: &PushValue) -> String {
    match v {
        PushValue::Integer(x) => format!("i:{x}"),
        PushValue::Float(x) => format!("f:{x}"),
        PushValue::Boolean(x) => format!("b:{x}"),
        PushValue::Char(c) => {
            let mut out = String::from("c:\"");
            let mut buf = [0u8; 4];
            escape_into(c.encode_utf8(&mut buf), &mut out);
            out.push('"');
            out
        }
        PushValue::String(s) => {
            let mut out = String::from("s:\"");
            escape_into(s, &mut out);
            out.push('"');
            out
        }
        PushValue::VectorInteger(xs) => {
            let body: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            format!("vi:[{}]", body.join(","))
        }
        PushValue::VectorFloat(xs) => {
            let body: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            format!("vf:[{}]", body.join(","))
        }
    }
}

fn gene_token(gene: &Gene) -> String {
    match gene {
        Gene::Close => "CLOSE".to_string(),
        Gene::Instruction(ins) => ins.name().into_owned(),
        Gene::Literal(v) => literal_token(v),
    }
}

/// One genome as a single line.
pub fn genome_to_line(genome: &PlushyGenome) -> String {
    genome
        .0
        .iter()
        .map(gene_token)
        .collect::<Vec<_>>()
        .join(" ")
}

fn split_tokens(line: &str) -> Result<Vec<&str>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b' ' {
            i += 1;
            continue;
        }
        let start = i;
        let mut in_quotes = false;
        while i < bytes.len() {
            match bytes[i] {
                b'"' => in_quotes = !in_quotes,
                b'\\' if in_quotes => i += 1,
                b' ' if !in_quotes => break,
                _ => {}
            }
            i += 1;
        }
        if in_quotes {
            return Err(ParseError::UnterminatedQuote(line[start..].to_string()));
        }
        tokens.push(&line[start..i]);
    }
    Ok(tokens)
}

fn parse_quoted(token: &str, body: &str) -> Result<String, ParseError> {
    let inner = body
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .ok_or_else(|| ParseError::BadLiteral(token.to_string(), "expected quotes".into()))?;
    unescape(inner)
}

fn parse_gene(token: &str) -> Result<Gene, ParseError> {
    if token == "CLOSE" {
        return Ok(Gene::Close);
    }
    let bad = |reason: &str| ParseError::BadLiteral(token.to_string(), reason.to_string());
    if let Some((prefix, body)) = token.split_once(':') {
        match prefix {
            "i" => {
                let x: i64 = body.parse().map_err(|_| bad("not an integer"))?;
                return Ok(Gene::Literal(PushValue::Integer(x)));
            }
            "f" => {
                let x: f64 = body.parse().map_err(|_| bad("not a float"))?;
                return Ok(Gene::Literal(PushValue::Float(x)));
            }
            "b" => {
                let x: bool = body.parse().map_err(|_| bad("not a boolean"))?;
                return Ok(Gene::Literal(PushValue::Boolean(x)));
            }
            "c" => {
                let s = parse_quoted(token, body)?;
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => return Ok(Gene::Literal(PushValue::Char(c))),
                    _ => return Err(bad("expected exactly one char")),
                }
            }
            "s" => {
                let s = parse_quoted(token, body)?;
                return Ok(Gene::Literal(PushValue::String(s)));
            }
            "vi" => {
                let inner = body
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| bad("expected [..]"))?;
                let xs = if inner.is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|p| p.parse::<i64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad vector element"))?
                };
                return Ok(Gene::Literal(PushValue::VectorInteger(xs)));
            }
            "vf" => {
                let inner = body
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| bad("expected [..]"))?;
                let xs = if inner.is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|p| p.parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad vector element"))?
                };
                return Ok(Gene::Literal(PushValue::VectorFloat(xs)));
            }
            _ => {}
        }
    }
    Instruction::parse(token)
        .map(Gene::Instruction)
        .ok_or_else(|| ParseError::UnknownInstruction(token.to_string()))
}

/// Parses one serialized genome line.
pub fn genome_from_line(line: &str) -> Result<PlushyGenome, ParseError> {
    let tokens = split_tokens(line.trim_end_matches(['\n', '\r']))?;
    let genes = tokens
        .iter()
        .map(|t| parse_gene(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PlushyGenome(genes))
}

#[cfg(test)]
mod tests;
