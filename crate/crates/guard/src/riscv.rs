//! Symbolic execution of straight-line RV32I assembly.
//!
//! Every register starts as a fresh 32-bit bitvector variable (x0 pinned to
//! the literal zero) and memory as a symbolic word array; each instruction
//! rewrites that state with the corresponding bitvector operation.  The
//! final state is therefore a closed-form term for every register, and
//! questions like "does a0 stay within signed bounds?" or "do these two
//! sequences compute the same thing?" become single solver queries whose
//! models are concrete initial register values.
//!
//! Only the straight-line core of RV32I is modeled: branches, jumps, and
//! labels are reported as unsupported rather than approximated.  Loads and
//! stores are word-sized, with 4-byte-alignment proof obligations emitted
//! at every access and range obligations added when a memory region is
//! supplied.  `ecall`/`ebreak` set a privileged-trap flag and halt
//! execution, which is what the no-privilege property inspects.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::report::{ObligationRecord, ObligationStatus, Verdict};
use crate::smt::{eval, Decl, Env, Model, Proof, Solver, SolverError, Sort, Term};

/// Canonical ABI register names, indexed by register number.
const ABI_NAMES: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4",
    "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4",
    "t5", "t6",
];

/// Resolve `x7`-style or ABI register names to a register number.
pub fn reg_index(name: &str) -> Option<u8> {
    if let Some(rest) = name.strip_prefix('x') {
        if let Ok(n) = rest.parse::<u8>() {
            if n < 32 {
                return Some(n);
            }
        }
    }
    if name == "fp" {
        return Some(8); // frame-pointer alias for s0
    }
    ABI_NAMES.iter().position(|&n| n == name).map(|i| i as u8)
}

/// The canonical ABI name for a register number.
pub fn reg_name(index: u8) -> &'static str {
    ABI_NAMES[index as usize]
}

/// Register-register operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Sll,
    Srl,
    Sra,
    Slt,
    Sltu,
}

/// Register-immediate operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImmOp {
    Addi,
    Andi,
    Ori,
    Xori,
    Slti,
    Sltiu,
    Slli,
    Srli,
    Srai,
}

impl RegOp {
    fn name(&self) -> &'static str {
        match self {
            RegOp::Add => "add",
            RegOp::Sub => "sub",
            RegOp::And => "and",
            RegOp::Or => "or",
            RegOp::Xor => "xor",
            RegOp::Sll => "sll",
            RegOp::Srl => "srl",
            RegOp::Sra => "sra",
            RegOp::Slt => "slt",
            RegOp::Sltu => "sltu",
        }
    }
}

impl ImmOp {
    fn name(&self) -> &'static str {
        match self {
            ImmOp::Addi => "addi",
            ImmOp::Andi => "andi",
            ImmOp::Ori => "ori",
            ImmOp::Xori => "xori",
            ImmOp::Slti => "slti",
            ImmOp::Sltiu => "sltiu",
            ImmOp::Slli => "slli",
            ImmOp::Srli => "srli",
            ImmOp::Srai => "srai",
        }
    }

    fn is_shift(&self) -> bool {
        matches!(self, ImmOp::Slli | ImmOp::Srli | ImmOp::Srai)
    }
}

/// One validated instruction.  Pseudo-instructions (`li`, `mv`, `neg`,
/// `nop`) are expanded during parsing and never appear here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstKind {
    Reg { op: RegOp, rd: u8, rs1: u8, rs2: u8 },
    Imm { op: ImmOp, rd: u8, rs1: u8, imm: i32 },
    Lui { rd: u8, imm: u32 },
    Lw { rd: u8, offset: i32, base: u8 },
    Sw { rs2: u8, offset: i32, base: u8 },
    Ecall,
    Ebreak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    /// 1-based source line, kept for obligation labels.
    pub line: usize,
    pub kind: InstKind,
}

impl fmt::Display for InstKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstKind::Reg { op, rd, rs1, rs2 } => write!(
                f,
                "{} {}, {}, {}",
                op.name(),
                reg_name(*rd),
                reg_name(*rs1),
                reg_name(*rs2)
            ),
            InstKind::Imm { op, rd, rs1, imm } => write!(
                f,
                "{} {}, {}, {}",
                op.name(),
                reg_name(*rd),
                reg_name(*rs1),
                imm
            ),
            InstKind::Lui { rd, imm } => write!(f, "lui {}, {:#x}", reg_name(*rd), imm),
            InstKind::Lw { rd, offset, base } => {
                write!(f, "lw {}, {}({})", reg_name(*rd), offset, reg_name(*base))
            }
            InstKind::Sw { rs2, offset, base } => {
                write!(f, "sw {}, {}({})", reg_name(*rs2), offset, reg_name(*base))
            }
            InstKind::Ecall => write!(f, "ecall"),
            InstKind::Ebreak => write!(f, "ebreak"),
        }
    }
}

/// Parse-stage failures.
#[derive(Debug, Error)]
pub enum AsmError {
    /// Constructs outside the modeled fragment (branches, jumps, labels,
    /// unknown mnemonics).  Surfaces as an unsupported-feature verdict.
    #[error("line {line}: unsupported construct `{what}`")]
    Unsupported { line: usize, what: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: immediate {value} out of range for {mnemonic} ({lo}..={hi})")]
    ImmediateRange {
        line: usize,
        mnemonic: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> AsmError {
    AsmError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parse GNU-style assembly text into instructions.
///
/// `#` starts a comment; assembler directives (`.text`, `.globl`, …) are
/// skipped — they carry no data-flow semantics at this level.
pub fn parse_asm(text: &str) -> Result<Vec<Instruction>, AsmError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() || code.starts_with('.') {
            continue;
        }
        if code.contains(':') {
            return Err(AsmError::Unsupported {
                line,
                what: "label".into(),
            });
        }
        parse_instruction(code, line, &mut out)?;
    }
    Ok(out)
}

fn parse_instruction(code: &str, line: usize, out: &mut Vec<Instruction>) -> Result<(), AsmError> {
    let (mnemonic, rest) = match code.split_once(char::is_whitespace) {
        Some((m, r)) => (m, r.trim()),
        None => (code, ""),
    };
    let mnemonic = mnemonic.to_ascii_lowercase();
    let operands: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(str::trim).collect()
    };
    let expect = |n: usize| -> Result<(), AsmError> {
        if operands.len() == n && operands.iter().all(|o| !o.is_empty()) {
            Ok(())
        } else {
            Err(syntax(
                line,
                format!("{mnemonic} expects {n} operands, found {}", operands.len()),
            ))
        }
    };
    let reg = |tok: &str| -> Result<u8, AsmError> {
        reg_index(tok).ok_or_else(|| syntax(line, format!("unknown register {tok:?}")))
    };
    let int = |tok: &str| -> Result<i64, AsmError> {
        parse_int(tok).ok_or_else(|| syntax(line, format!("malformed immediate {tok:?}")))
    };
    let ranged = |value: i64, lo: i64, hi: i64| -> Result<i32, AsmError> {
        if (lo..=hi).contains(&value) {
            Ok(value as i32)
        } else {
            Err(AsmError::ImmediateRange {
                line,
                mnemonic: mnemonic.clone(),
                value,
                lo,
                hi,
            })
        }
    };

    let reg_op = |op: RegOp| -> Result<InstKind, AsmError> {
        expect(3)?;
        Ok(InstKind::Reg {
            op,
            rd: reg(operands[0])?,
            rs1: reg(operands[1])?,
            rs2: reg(operands[2])?,
        })
    };
    let imm_op = |op: ImmOp| -> Result<InstKind, AsmError> {
        expect(3)?;
        let value = int(operands[2])?;
        let imm = if op.is_shift() {
            ranged(value, 0, 31)?
        } else {
            ranged(value, -2048, 2047)?
        };
        Ok(InstKind::Imm {
            op,
            rd: reg(operands[0])?,
            rs1: reg(operands[1])?,
            imm,
        })
    };

    let kind = match mnemonic.as_str() {
        "add" => reg_op(RegOp::Add)?,
        "sub" => reg_op(RegOp::Sub)?,
        "and" => reg_op(RegOp::And)?,
        "or" => reg_op(RegOp::Or)?,
        "xor" => reg_op(RegOp::Xor)?,
        "sll" => reg_op(RegOp::Sll)?,
        "srl" => reg_op(RegOp::Srl)?,
        "sra" => reg_op(RegOp::Sra)?,
        "slt" => reg_op(RegOp::Slt)?,
        "sltu" => reg_op(RegOp::Sltu)?,
        "addi" => imm_op(ImmOp::Addi)?,
        "andi" => imm_op(ImmOp::Andi)?,
        "ori" => imm_op(ImmOp::Ori)?,
        "xori" => imm_op(ImmOp::Xori)?,
        "slti" => imm_op(ImmOp::Slti)?,
        "sltiu" => imm_op(ImmOp::Sltiu)?,
        "slli" => imm_op(ImmOp::Slli)?,
        "srli" => imm_op(ImmOp::Srli)?,
        "srai" => imm_op(ImmOp::Srai)?,
        "lui" => {
            expect(2)?;
            let imm = ranged(int(operands[1])?, 0, 0xF_FFFF)?;
            InstKind::Lui {
                rd: reg(operands[0])?,
                imm: imm as u32,
            }
        }
        "lw" => {
            expect(2)?;
            let (offset, base) = parse_mem_operand(operands[1], line)?;
            InstKind::Lw {
                rd: reg(operands[0])?,
                offset: ranged(offset, -2048, 2047)?,
                base,
            }
        }
        "sw" => {
            expect(2)?;
            let (offset, base) = parse_mem_operand(operands[1], line)?;
            InstKind::Sw {
                rs2: reg(operands[0])?,
                offset: ranged(offset, -2048, 2047)?,
                base,
            }
        }
        "ecall" => {
            expect(0)?;
            InstKind::Ecall
        }
        "ebreak" => {
            expect(0)?;
            InstKind::Ebreak
        }
        // Pseudo-instructions, expanded the way an assembler would.
        "li" => {
            expect(2)?;
            let rd = reg(operands[0])?;
            let value = int(operands[1])?;
            if !(-(1i64 << 31)..(1i64 << 32)).contains(&value) {
                return Err(AsmError::ImmediateRange {
                    line,
                    mnemonic,
                    value,
                    lo: i32::MIN as i64,
                    hi: u32::MAX as i64,
                });
            }
            expand_li(rd, value as u32, line, out);
            return Ok(());
        }
        "mv" => {
            expect(2)?;
            InstKind::Imm {
                op: ImmOp::Addi,
                rd: reg(operands[0])?,
                rs1: reg(operands[1])?,
                imm: 0,
            }
        }
        "neg" => {
            expect(2)?;
            InstKind::Reg {
                op: RegOp::Sub,
                rd: reg(operands[0])?,
                rs1: 0,
                rs2: reg(operands[1])?,
            }
        }
        "nop" => {
            expect(0)?;
            InstKind::Imm {
                op: ImmOp::Addi,
                rd: 0,
                rs1: 0,
                imm: 0,
            }
        }
        other => {
            return Err(AsmError::Unsupported {
                line,
                what: other.to_string(),
            })
        }
    };
    out.push(Instruction { line, kind });
    Ok(())
}

/// `li rd, imm` becomes `addi` when the value fits 12 signed bits, else
/// `lui` + optional `addi` with the usual carry-rounded upper part.
fn expand_li(rd: u8, value: u32, line: usize, out: &mut Vec<Instruction>) {
    let signed = value as i32;
    if (-2048..=2047).contains(&signed) {
        out.push(Instruction {
            line,
            kind: InstKind::Imm {
                op: ImmOp::Addi,
                rd,
                rs1: 0,
                imm: signed,
            },
        });
        return;
    }
    let hi = value.wrapping_add(0x800) >> 12;
    let lo = signed.wrapping_sub((hi << 12) as i32);
    out.push(Instruction {
        line,
        kind: InstKind::Lui { rd, imm: hi },
    });
    if lo != 0 {
        out.push(Instruction {
            line,
            kind: InstKind::Imm {
                op: ImmOp::Addi,
                rd,
                rs1: rd,
                imm: lo,
            },
        });
    }
}

fn parse_mem_operand(tok: &str, line: usize) -> Result<(i64, u8), AsmError> {
    let open = tok
        .find('(')
        .ok_or_else(|| syntax(line, format!("expected offset(register), found {tok:?}")))?;
    let close = tok
        .strip_suffix(')')
        .ok_or_else(|| syntax(line, format!("missing ')' in {tok:?}")))?;
    let offset_text = tok[..open].trim();
    let offset = if offset_text.is_empty() {
        0
    } else {
        parse_int(offset_text)
            .ok_or_else(|| syntax(line, format!("malformed offset {offset_text:?}")))?
    };
    let reg_text = close[open + 1..].trim();
    let base = reg_index(reg_text)
        .ok_or_else(|| syntax(line, format!("unknown register {reg_text:?}")))?;
    Ok((offset, base))
}

/// Decimal or `0x` hexadecimal integer, optionally negated.
fn parse_int(tok: &str) -> Option<i64> {
    let (neg, body) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    let magnitude = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        body.parse::<i64>().ok()?
    };
    Some(if neg { -magnitude } else { magnitude })
}

/// Name of the symbolic memory array in solver queries and models.
pub const MEM_VAR: &str = "mem";

const WORD: Sort = Sort::BitVec(32);

fn word(value: u32) -> Term {
    Term::bits(32, value as u64)
}

/// Symbolic machine state: one term per register plus a memory array.
#[derive(Debug, Clone)]
pub struct MachineState {
    pub regs: [Term; 32],
    pub mem: Term,
    /// Proof obligations emitted by memory accesses: label and the
    /// condition that must hold.
    pub obligations: Vec<(String, Term)>,
    /// Line and mnemonic of the first `ecall`/`ebreak`, if execution
    /// reached one.
    pub trap: Option<(usize, &'static str)>,
    /// Whether any `sw` executed (controls memory comparison in
    /// equivalence checks).
    pub wrote_mem: bool,
}

/// The state before the first instruction: register `xN` holds a variable
/// named by its ABI name, x0 holds literal zero, memory is the `mem`
/// array variable.
pub fn initial_state() -> MachineState {
    let regs = std::array::from_fn(|i| {
        if i == 0 {
            word(0)
        } else {
            Term::var(reg_name(i as u8), WORD)
        }
    });
    MachineState {
        regs,
        mem: Term::var(MEM_VAR, Sort::array(WORD, WORD)),
        obligations: Vec::new(),
        trap: None,
        wrote_mem: false,
    }
}

/// Execute a program symbolically from the standard initial state.
///
/// With a `(base, size)` memory region, every load and store additionally
/// obliges its address to stay inside `[base, base+size)`; alignment
/// obligations are emitted regardless.
pub fn symexec(program: &[Instruction], region: Option<(u32, u32)>) -> MachineState {
    let mut state = initial_state();
    for inst in program {
        if state.trap.is_some() {
            break;
        }
        step(&mut state, inst, region);
    }
    state
}

fn step(state: &mut MachineState, inst: &Instruction, region: Option<(u32, u32)>) {
    match inst.kind {
        InstKind::Reg { op, rd, rs1, rs2 } => {
            let value = alu_reg(op, &state.regs[rs1 as usize], &state.regs[rs2 as usize]);
            write_reg(state, rd, value);
        }
        InstKind::Imm { op, rd, rs1, imm } => {
            let value = alu_imm(op, &state.regs[rs1 as usize], imm);
            write_reg(state, rd, value);
        }
        InstKind::Lui { rd, imm } => write_reg(state, rd, word(imm << 12)),
        InstKind::Lw { rd, offset, base } => {
            let addr = address(state, base, offset);
            memory_obligations(state, inst.line, "lw", &addr, region);
            let value = state.mem.select(&addr).expect("word load");
            write_reg(state, rd, value);
        }
        InstKind::Sw { rs2, offset, base } => {
            let addr = address(state, base, offset);
            memory_obligations(state, inst.line, "sw", &addr, region);
            state.mem = state
                .mem
                .store(&addr, &state.regs[rs2 as usize])
                .expect("word store");
            state.wrote_mem = true;
        }
        InstKind::Ecall => state.trap = Some((inst.line, "ecall")),
        InstKind::Ebreak => state.trap = Some((inst.line, "ebreak")),
    }
}

fn write_reg(state: &mut MachineState, rd: u8, value: Term) {
    // Writes to x0 are architecturally discarded.
    if rd != 0 {
        state.regs[rd as usize] = value;
    }
}

fn address(state: &MachineState, base: u8, offset: i32) -> Term {
    state.regs[base as usize]
        .bv_add(&word(offset as u32))
        .expect("address arithmetic")
}

fn memory_obligations(
    state: &mut MachineState,
    line: usize,
    mnemonic: &str,
    addr: &Term,
    region: Option<(u32, u32)>,
) {
    let aligned = addr
        .bv_and(&word(3))
        .expect("alignment mask")
        .eq(&word(0))
        .expect("alignment check");
    state
        .obligations
        .push((format!("{mnemonic} at line {line}: 4-byte aligned address"), aligned));
    if let Some((base, size)) = region {
        // Last valid word start; `base + size ≤ 2^32` is checked when the
        // region is parsed, so this cannot wrap.
        let last = base.wrapping_add(size - 4);
        let within = word(base)
            .bv_ule(addr)
            .expect("lower bound")
            .and(&addr.bv_ule(&word(last)).expect("upper bound"))
            .expect("range check");
        state.obligations.push((
            format!(
                "{mnemonic} at line {line}: address within {:#x}..{:#x}",
                base,
                base as u64 + size as u64
            ),
            within,
        ));
    }
}

fn alu_reg(op: RegOp, a: &Term, b: &Term) -> Term {
    // Register shift amounts use only the low five bits, per the ISA.
    let shamt = || b.bv_and(&word(31)).expect("shift mask");
    let result = match op {
        RegOp::Add => a.bv_add(b),
        RegOp::Sub => a.bv_sub(b),
        RegOp::And => a.bv_and(b),
        RegOp::Or => a.bv_or(b),
        RegOp::Xor => a.bv_xor(b),
        RegOp::Sll => a.bv_shl(&shamt()),
        RegOp::Srl => a.bv_lshr(&shamt()),
        RegOp::Sra => a.bv_ashr(&shamt()),
        RegOp::Slt => return flag(a.bv_slt(b).expect("signed compare")),
        RegOp::Sltu => return flag(a.bv_ult(b).expect("unsigned compare")),
    };
    result.expect("bitvector operation")
}

fn alu_imm(op: ImmOp, a: &Term, imm: i32) -> Term {
    let b = word(imm as u32); // sign-extension happened in the i32
    let result = match op {
        ImmOp::Addi => a.bv_add(&b),
        ImmOp::Andi => a.bv_and(&b),
        ImmOp::Ori => a.bv_or(&b),
        ImmOp::Xori => a.bv_xor(&b),
        ImmOp::Slli => a.bv_shl(&b),
        ImmOp::Srli => a.bv_lshr(&b),
        ImmOp::Srai => a.bv_ashr(&b),
        ImmOp::Slti => return flag(a.bv_slt(&b).expect("signed compare")),
        ImmOp::Sltiu => return flag(a.bv_ult(&b).expect("unsigned compare")),
    };
    result.expect("bitvector operation")
}

/// 0/1 result of a comparison, as the slt family produces.
fn flag(cond: Term) -> Term {
    Term::ite(&cond, &word(1), &word(0)).expect("comparison flag")
}

/// A property to prove about the final machine state.
#[derive(Debug, Clone)]
pub enum HwProperty {
    /// Final register value stays within inclusive signed bounds.
    RegisterBound { reg: u8, lo: i32, hi: i32 },
    /// Execution never reaches `ecall`/`ebreak`.
    NoPrivilege,
    /// Every memory access is aligned and inside `[base, base+size)`.
    MemoryWithin { base: u32, size: u32 },
    /// An arbitrary condition.  Variables named after registers (`a0`)
    /// denote initial values; a trailing apostrophe (`a0'`) denotes the
    /// final value.
    Custom { label: String, property: Term },
}

/// An initial-state constraint with its source text.
#[derive(Debug, Clone)]
pub struct Assumption {
    pub text: String,
    pub term: Term,
}

/// Parsed contents of a property file.
#[derive(Debug, Clone, Default)]
pub struct PropertySet {
    pub properties: Vec<HwProperty>,
    pub assumptions: Vec<Assumption>,
}

#[derive(Debug, Error)]
pub enum PropsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn props_err(line: usize, message: impl Into<String>) -> PropsError {
    PropsError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parse a property file: one directive per line.
///
/// ```text
/// bound a0 0 2147483647      # final a0 within signed bounds
/// nopriv                     # no ecall/ebreak
/// memwithin 0x1000 256       # all accesses inside the region
/// assume a0 != 0x80000000    # constraint on the initial state
/// ```
///
/// Assumptions compare two atoms (register or literal) with `==`, `!=`,
/// or signed `<` `<=` `>` `>=`; suffix `u` (`<u`, `>=u`, …) switches to
/// unsigned comparison.
pub fn parse_properties(text: &str) -> Result<PropertySet, PropsError> {
    let mut set = PropertySet::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let mut words = code.split_whitespace();
        let keyword = words.next().expect("non-empty line");
        let args: Vec<&str> = words.collect();
        match keyword {
            "bound" => {
                if args.len() != 3 {
                    return Err(props_err(line, "bound expects: bound <reg> <lo> <hi>"));
                }
                let reg = reg_index(args[0])
                    .ok_or_else(|| props_err(line, format!("unknown register {:?}", args[0])))?;
                let lo = parse_signed32(args[1])
                    .ok_or_else(|| props_err(line, format!("bad signed bound {:?}", args[1])))?;
                let hi = parse_signed32(args[2])
                    .ok_or_else(|| props_err(line, format!("bad signed bound {:?}", args[2])))?;
                if lo > hi {
                    return Err(props_err(line, format!("empty bound range [{lo}, {hi}]")));
                }
                set.properties.push(HwProperty::RegisterBound { reg, lo, hi });
            }
            "nopriv" => {
                if !args.is_empty() {
                    return Err(props_err(line, "nopriv takes no arguments"));
                }
                set.properties.push(HwProperty::NoPrivilege);
            }
            "memwithin" => {
                if args.len() != 2 {
                    return Err(props_err(line, "memwithin expects: memwithin <base> <size>"));
                }
                let base = parse_unsigned32(args[0])
                    .ok_or_else(|| props_err(line, format!("bad address {:?}", args[0])))?;
                let size = parse_unsigned32(args[1])
                    .ok_or_else(|| props_err(line, format!("bad size {:?}", args[1])))?;
                if size == 0 || size % 4 != 0 {
                    return Err(props_err(line, "size must be a positive multiple of 4"));
                }
                if base as u64 + size as u64 > 1 << 32 {
                    return Err(props_err(line, "region extends past the 32-bit address space"));
                }
                if set
                    .properties
                    .iter()
                    .any(|p| matches!(p, HwProperty::MemoryWithin { .. }))
                {
                    return Err(props_err(line, "at most one memwithin region"));
                }
                set.properties.push(HwProperty::MemoryWithin { base, size });
            }
            "assume" => {
                if args.len() != 3 {
                    return Err(props_err(line, "assume expects: assume <atom> <op> <atom>"));
                }
                let lhs = parse_atom(args[0], line)?;
                let rhs = parse_atom(args[2], line)?;
                let term = build_comparison(&lhs, args[1], &rhs)
                    .ok_or_else(|| props_err(line, format!("unknown operator {:?}", args[1])))?;
                set.assumptions.push(Assumption {
                    text: code.to_string(),
                    term,
                });
            }
            other => return Err(props_err(line, format!("unknown directive {other:?}"))),
        }
    }
    Ok(set)
}

/// Accepts decimal in the i32 range or hex up to 32 bits, reinterpreted
/// as the signed bit pattern.
fn parse_signed32(tok: &str) -> Option<i32> {
    let v = parse_int(tok)?;
    if (i32::MIN as i64..=i32::MAX as i64).contains(&v) {
        Some(v as i32)
    } else {
        None
    }
}

fn parse_unsigned32(tok: &str) -> Option<u32> {
    let v = parse_int(tok)?;
    if (0..=u32::MAX as i64).contains(&v) {
        Some(v as u32)
    } else {
        None
    }
}

fn parse_atom(tok: &str, line: usize) -> Result<Term, PropsError> {
    if let Some(reg) = reg_index(tok) {
        return Ok(if reg == 0 {
            word(0)
        } else {
            Term::var(reg_name(reg), WORD)
        });
    }
    let v = parse_int(tok)
        .ok_or_else(|| props_err(line, format!("expected register or literal, found {tok:?}")))?;
    if !(-(1i64 << 31)..(1i64 << 32)).contains(&v) {
        return Err(props_err(line, format!("literal {tok} does not fit in 32 bits")));
    }
    Ok(word(v as u32))
}

fn build_comparison(lhs: &Term, op: &str, rhs: &Term) -> Option<Term> {
    let t = match op {
        "==" => lhs.eq(rhs),
        "!=" => lhs.ne(rhs),
        "<" => lhs.bv_slt(rhs),
        "<=" => lhs.bv_sle(rhs),
        ">" => rhs.bv_slt(lhs),
        ">=" => rhs.bv_sle(lhs),
        "<u" => lhs.bv_ult(rhs),
        "<=u" => lhs.bv_ule(rhs),
        ">u" => rhs.bv_ult(lhs),
        ">=u" => rhs.bv_ule(lhs),
        _ => return None,
    };
    Some(t.expect("32-bit comparison"))
}

/// Verdict plus per-obligation records for one program.
#[derive(Debug)]
pub struct HwOutcome {
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
}

/// Prove every property in the set against the program's final state.
pub fn verify_program(
    program: &[Instruction],
    props: &PropertySet,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<HwOutcome, SolverError> {
    let region = props.properties.iter().find_map(|p| match p {
        HwProperty::MemoryWithin { base, size } => Some((*base, *size)),
        _ => None,
    });
    let state = symexec(program, region);
    let assumptions: Vec<Term> = props.assumptions.iter().map(|a| a.term.clone()).collect();

    let mut verdict = Verdict::Verified;
    let mut obligations = Vec::new();

    for prop in &props.properties {
        match prop {
            HwProperty::NoPrivilege => {
                let label = "no privileged instructions".to_string();
                let outcome = match state.trap {
                    None => PropResult::Proven,
                    Some((line, mnemonic)) => PropResult::Violated {
                        witness: format!("execution reaches `{mnemonic}` at line {line}"),
                        model: Model::new(),
                    },
                };
                let status = fold_outcome(&mut verdict, &label, outcome);
                obligations.push(ObligationRecord::new(label, status, 0));
            }
            HwProperty::RegisterBound { reg, lo, hi } => {
                let label = format!("final {} within [{lo}, {hi}]", reg_name(*reg));
                let final_reg = &state.regs[*reg as usize];
                let goal = final_reg
                    .signed_within(&word(*lo as u32), &word(*hi as u32))
                    .expect("signed bound");
                let (outcome, elapsed) = prove_goal(
                    solver,
                    &assumptions,
                    &goal,
                    timeout_ms,
                    |model| bound_witness(final_reg, *reg, *lo, *hi, model),
                )?;
                let status = fold_outcome(&mut verdict, &label, outcome);
                obligations.push(ObligationRecord::new(label, status, elapsed));
            }
            HwProperty::MemoryWithin { base, size } => {
                if state.obligations.is_empty() {
                    let label = format!(
                        "memory accesses within {:#x}..{:#x} (no accesses present)",
                        base,
                        *base as u64 + *size as u64
                    );
                    let status = fold_outcome(&mut verdict, &label, PropResult::Proven);
                    obligations.push(ObligationRecord::new(label, status, 0));
                }
                for (label, goal) in &state.obligations {
                    let (outcome, elapsed) = prove_goal(
                        solver,
                        &assumptions,
                        goal,
                        timeout_ms,
                        |model| format!("{}: violated by {}", label, initial_values(model)),
                    )?;
                    let status = fold_outcome(&mut verdict, label, outcome);
                    obligations.push(ObligationRecord::new(label.clone(), status, elapsed));
                }
            }
            HwProperty::Custom { label, property } => {
                let (goal, bindings) = bind_final_state(property, &state);
                let mut assume = assumptions.clone();
                assume.extend(bindings);
                let (outcome, elapsed) =
                    prove_goal(solver, &assume, &goal, timeout_ms, |model| {
                        format!("violated by {}", initial_values(model))
                    })?;
                let status = fold_outcome(&mut verdict, label, outcome);
                obligations.push(ObligationRecord::new(label.clone(), status, elapsed));
            }
        }
    }

    Ok(HwOutcome {
        verdict,
        obligations,
    })
}

enum PropResult {
    Proven,
    Violated { witness: String, model: Model },
    Unknown { reason: String },
}

/// Record one property outcome, demoting the verdict on the first
/// violation or unknown.
fn fold_outcome(verdict: &mut Verdict, label: &str, outcome: PropResult) -> ObligationStatus {
    match outcome {
        PropResult::Proven => ObligationStatus::Proven,
        PropResult::Violated { witness, model } => {
            if verdict.is_verified() {
                *verdict = Verdict::Unsafe {
                    obligation: label.to_string(),
                    witness,
                    model,
                };
            }
            ObligationStatus::Violated
        }
        PropResult::Unknown { reason } => {
            if verdict.is_verified() {
                *verdict = Verdict::Unknown {
                    reason: format!("{label}: {reason}"),
                };
            }
            ObligationStatus::Unknown
        }
    }
}

/// Prove one goal under assumptions; on counterexample, format the
/// witness with the provided function and keep only initial-state
/// variables in the reported model.
fn prove_goal(
    solver: &Solver,
    assumptions: &[Term],
    goal: &Term,
    timeout_ms: u64,
    witness: impl FnOnce(&Model) -> String,
) -> Result<(PropResult, u64), SolverError> {
    let decls = decls_for(assumptions.iter().chain(std::iter::once(goal)));
    let outcome = solver.prove(&decls, assumptions, goal, timeout_ms)?;
    let result = match outcome.result {
        Proof::Proven => PropResult::Proven,
        Proof::Counterexample(model) => PropResult::Violated {
            witness: witness(&model),
            model: registers_only(&model),
        },
        Proof::Unknown { reason } => PropResult::Unknown { reason },
    };
    Ok((result, outcome.elapsed_ms))
}

/// Declarations for every free variable in the given terms.
fn decls_for<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vec<Decl> {
    let mut vars: BTreeMap<String, Sort> = BTreeMap::new();
    for term in terms {
        vars.extend(term.free_vars());
    }
    vars.into_iter()
        .map(|(name, sort)| Decl::new(name, sort))
        .collect()
}

/// "a1 = #x80000000 (-2147483648), a2 = …" for the initial registers in a
/// model.
fn initial_values(model: &Model) -> String {
    let parts: Vec<String> = model
        .iter()
        .filter(|(name, _)| reg_index(name).is_some())
        .map(|(name, value)| format!("{name} = {}", value.describe()))
        .collect();
    if parts.is_empty() {
        "any initial state".to_string()
    } else {
        format!("initial {}", parts.join(", "))
    }
}

fn registers_only(model: &Model) -> Model {
    let mut out = Model::new();
    for (name, value) in model.iter() {
        if reg_index(name).is_some() {
            out.insert(name.clone(), value.clone());
        }
    }
    out
}

fn bound_witness(final_reg: &Term, reg: u8, lo: i32, hi: i32, model: &Model) -> String {
    let initial = initial_values(model);
    match eval(final_reg, &Env::from_model(model)) {
        Ok(value) => format!(
            "{initial}; final {} = {}, outside [{lo}, {hi}]",
            reg_name(reg),
            value.describe()
        ),
        Err(_) => format!("{initial}; final {} leaves [{lo}, {hi}]", reg_name(reg)),
    }
}

/// Substitute final-state references in a custom property.
///
/// Occurrences of `reg'` become fresh variables constrained equal to the
/// final term for that register, so the property itself stays a plain
/// formula.
fn bind_final_state(property: &Term, state: &MachineState) -> (Term, Vec<Term>) {
    let mut bindings = Vec::new();
    for (name, _sort) in property.free_vars() {
        if let Some(stem) = name.strip_suffix('\'') {
            if let Some(reg) = reg_index(stem) {
                let var = Term::var(&name, WORD);
                bindings.push(
                    var.eq(&state.regs[reg as usize])
                        .expect("final-state binding"),
                );
            }
        }
    }
    (property.clone(), bindings)
}

/// Registers written by either program — the default observation set for
/// equivalence checks, falling back to a0 for programs that write none.
pub fn default_observed(a: &[Instruction], b: &[Instruction]) -> Vec<u8> {
    let mut written: Vec<u8> = a
        .iter()
        .chain(b)
        .filter_map(|inst| match inst.kind {
            InstKind::Reg { rd, .. }
            | InstKind::Imm { rd, .. }
            | InstKind::Lui { rd, .. }
            | InstKind::Lw { rd, .. } => (rd != 0).then_some(rd),
            _ => None,
        })
        .collect();
    written.sort_unstable();
    written.dedup();
    if written.is_empty() {
        written.push(10); // a0
    }
    written
}

/// Verdict and obligation record for an equivalence check.
#[derive(Debug)]
pub struct EquivOutcome {
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
}

/// Prove two sequences leave identical observed registers (and identical
/// memory, when either stores) from every shared initial state.
pub fn check_equivalence(
    a: &[Instruction],
    b: &[Instruction],
    observed: &[u8],
    solver: &Solver,
    timeout_ms: u64,
) -> Result<EquivOutcome, SolverError> {
    assert!(!observed.is_empty(), "observation set must be nonempty");
    if let Some(inst) = a
        .iter()
        .chain(b)
        .find(|i| matches!(i.kind, InstKind::Ecall | InstKind::Ebreak))
    {
        return Ok(EquivOutcome {
            verdict: Verdict::Unsupported {
                feature: format!(
                    "privileged instruction in an equivalence comparison (line {})",
                    inst.line
                ),
            },
            obligations: Vec::new(),
        });
    }

    // Both runs read the same initial register variables, so "shared
    // initial state" is by construction.
    let sa = symexec(a, None);
    let sb = symexec(b, None);
    let compare_mem = sa.wrote_mem || sb.wrote_mem;

    let mut parts = Vec::new();
    for &reg in observed {
        parts.push(
            sa.regs[reg as usize]
                .eq(&sb.regs[reg as usize])
                .expect("register comparison"),
        );
    }
    if compare_mem {
        parts.push(sa.mem.eq(&sb.mem).expect("memory comparison"));
    }
    let goal = Term::and_all(parts).expect("conjunction");

    let names: Vec<&str> = observed.iter().map(|&r| reg_name(r)).collect();
    let label = format!(
        "sequences agree on {}{}",
        names.join(", "),
        if compare_mem { " and memory" } else { "" }
    );

    let (outcome, elapsed) = prove_goal(solver, &[], &goal, timeout_ms, |model| {
        equiv_witness(&sa, &sb, observed, compare_mem, model)
    })?;
    let mut verdict = Verdict::Verified;
    let mut obligations = Vec::new();
    let status = match outcome {
        PropResult::Proven => ObligationStatus::Proven,
        PropResult::Violated { witness, model } => {
            verdict = Verdict::Unsafe {
                obligation: label.clone(),
                witness,
                model,
            };
            ObligationStatus::Violated
        }
        PropResult::Unknown { reason } => {
            verdict = Verdict::Unknown {
                reason: format!("{label}: {reason}"),
            };
            ObligationStatus::Unknown
        }
    };
    obligations.push(ObligationRecord::new(label, status, elapsed));

    Ok(EquivOutcome {
        verdict,
        obligations,
    })
}

fn equiv_witness(
    sa: &MachineState,
    sb: &MachineState,
    observed: &[u8],
    compare_mem: bool,
    model: &Model,
) -> String {
    let env = Env::from_model(model);
    let mut diffs = Vec::new();
    for &reg in observed {
        let va = eval(&sa.regs[reg as usize], &env);
        let vb = eval(&sb.regs[reg as usize], &env);
        match (va, vb) {
            (Ok(va), Ok(vb)) if va != vb => diffs.push(format!(
                "first leaves {} = {}, second {}",
                reg_name(reg),
                va.describe(),
                vb.describe()
            )),
            _ => {}
        }
    }
    if compare_mem && diffs.is_empty() {
        diffs.push("final memory contents differ".to_string());
    }
    format!("{}: {}", initial_values(model), diffs.join("; "))
}
