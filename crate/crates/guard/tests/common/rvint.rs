//! A concrete RV32I interpreter, written directly from the ISA semantics
//! against the parsed instruction list.  It shares nothing with the
//! symbolic executor — register values are plain machine integers — so it
//! serves as the independent reference the oracle suites compare against.
//!
//! The interpreter can also run width-shrunk: masking every result to 8
//! bits turns each register into a byte, which makes exhaustive input
//! enumeration feasible for equivalence checks on shift-free programs.

use std::collections::BTreeMap;

use guard::riscv::{ImmOp, InstKind, Instruction, RegOp};

/// Concrete machine: 32 registers, sparse word memory, trap flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub regs: [u32; 32],
    /// Byte-address -> word cells, mirroring the symbolic memory model.
    pub mem: BTreeMap<u32, u32>,
    /// Value read from any address never stored to.
    pub mem_default: u32,
    /// Line and mnemonic of the first ecall/ebreak reached.
    pub trap: Option<(usize, &'static str)>,
    /// Every executed memory access: (mnemonic, byte address).
    pub accesses: Vec<(&'static str, u32)>,
    pub wrote_mem: bool,
    /// All-ones mask for the simulated register width (`u32::MAX` for the
    /// real machine, `0xFF` for 8-bit shrunk runs).
    pub mask: u32,
}

impl Machine {
    pub fn new() -> Machine {
        Machine::with_mask(u32::MAX)
    }

    pub fn with_mask(mask: u32) -> Machine {
        Machine {
            regs: [0; 32],
            mem: BTreeMap::new(),
            mem_default: 0,
            trap: None,
            accesses: Vec::new(),
            wrote_mem: false,
            mask,
        }
    }

    fn width(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Interpret a register value as signed at the simulated width.
    fn signed(&self, v: u32) -> i64 {
        let w = self.width();
        let v = (v & self.mask) as i64;
        if v >= 1 << (w - 1) {
            v - (1 << w)
        } else {
            v
        }
    }

    fn set(&mut self, rd: u8, value: u32) {
        if rd != 0 {
            self.regs[rd as usize] = value & self.mask;
        }
    }

    fn get(&self, r: u8) -> u32 {
        self.regs[r as usize] & self.mask
    }

    fn alu(&self, op: RegOp, a: u32, b: u32) -> u32 {
        let sh = b & 31;
        match op {
            RegOp::Add => a.wrapping_add(b),
            RegOp::Sub => a.wrapping_sub(b),
            RegOp::And => a & b,
            RegOp::Or => a | b,
            RegOp::Xor => a ^ b,
            RegOp::Sll => a << sh,
            RegOp::Srl => a >> sh,
            RegOp::Sra => (a as i32 >> sh) as u32,
            RegOp::Slt => ((a as i32) < b as i32) as u32,
            RegOp::Sltu => (a < b) as u32,
        }
    }

    fn alu_masked(&self, op: RegOp, a: u32, b: u32) -> u32 {
        match op {
            RegOp::Add => a.wrapping_add(b),
            RegOp::Sub => a.wrapping_sub(b),
            RegOp::And => a & b,
            RegOp::Or => a | b,
            RegOp::Xor => a ^ b,
            RegOp::Slt => (self.signed(a) < self.signed(b)) as u32,
            RegOp::Sltu => ((a & self.mask) < (b & self.mask)) as u32,
            RegOp::Sll | RegOp::Srl | RegOp::Sra => {
                panic!("shift in width-shrunk run; callers must filter shift-free programs")
            }
        }
    }

    pub fn step(&mut self, inst: &Instruction) {
        match inst.kind {
            InstKind::Reg { op, rd, rs1, rs2 } => {
                let (a, b) = (self.get(rs1), self.get(rs2));
                let v = if self.mask == u32::MAX {
                    self.alu(op, a, b)
                } else {
                    self.alu_masked(op, a, b)
                };
                self.set(rd, v);
            }
            InstKind::Imm { op, rd, rs1, imm } => {
                let a = self.get(rs1);
                let b = imm as u32;
                let v = match op {
                    ImmOp::Addi => a.wrapping_add(b),
                    ImmOp::Andi => a & b,
                    ImmOp::Ori => a | b,
                    ImmOp::Xori => a ^ b,
                    ImmOp::Slti => (self.signed(a) < self.signed(b)) as u32,
                    ImmOp::Sltiu => ((a & self.mask) < (b & self.mask)) as u32,
                    ImmOp::Slli => {
                        assert_eq!(self.mask, u32::MAX, "shift in width-shrunk run");
                        a << (b & 31)
                    }
                    ImmOp::Srli => {
                        assert_eq!(self.mask, u32::MAX, "shift in width-shrunk run");
                        a >> (b & 31)
                    }
                    ImmOp::Srai => {
                        assert_eq!(self.mask, u32::MAX, "shift in width-shrunk run");
                        (a as i32 >> (b & 31)) as u32
                    }
                };
                self.set(rd, v);
            }
            InstKind::Lui { rd, imm } => self.set(rd, imm << 12),
            InstKind::Lw { rd, offset, base } => {
                let addr = self.get(base).wrapping_add(offset as u32) & self.mask;
                self.accesses.push(("lw", addr));
                let v = self.mem.get(&addr).copied().unwrap_or(self.mem_default);
                self.set(rd, v);
            }
            InstKind::Sw { rs2, offset, base } => {
                let addr = self.get(base).wrapping_add(offset as u32) & self.mask;
                self.accesses.push(("sw", addr));
                let v = self.get(rs2);
                self.mem.insert(addr, v);
                self.wrote_mem = true;
            }
            InstKind::Ecall => self.trap = Some((inst.line, "ecall")),
            InstKind::Ebreak => self.trap = Some((inst.line, "ebreak")),
        }
    }

    /// Run to completion or to the first trap.
    pub fn run(&mut self, program: &[Instruction]) {
        for inst in program {
            if self.trap.is_some() {
                break;
            }
            self.step(inst);
        }
    }
}

impl Default for Machine {
    fn default() -> Self {
        Machine::new()
    }
}

/// Registers a program reads before writing: the inputs that determine
/// its behaviour (x0 excluded — it is constant).
pub fn input_registers(program: &[Instruction]) -> Vec<u8> {
    let mut written = [false; 32];
    let mut inputs = Vec::new();
    let read = |r: u8, written: &[bool; 32], inputs: &mut Vec<u8>| {
        if r != 0 && !written[r as usize] && !inputs.contains(&r) {
            inputs.push(r);
        }
    };
    for inst in program {
        match inst.kind {
            InstKind::Reg { rd, rs1, rs2, .. } => {
                read(rs1, &written, &mut inputs);
                read(rs2, &written, &mut inputs);
                written[rd as usize] = true;
            }
            InstKind::Imm { rd, rs1, .. } => {
                read(rs1, &written, &mut inputs);
                written[rd as usize] = true;
            }
            InstKind::Lui { rd, .. } => written[rd as usize] = true,
            InstKind::Lw { rd, base, .. } => {
                read(base, &written, &mut inputs);
                written[rd as usize] = true;
            }
            InstKind::Sw { rs2, base, .. } => {
                read(base, &written, &mut inputs);
                read(rs2, &written, &mut inputs);
            }
            InstKind::Ecall | InstKind::Ebreak => {}
        }
    }
    inputs.sort_unstable();
    inputs
}

/// Does the program contain any shift instruction?  Shifts do not survive
/// width shrinking, so the 8-bit oracle skips them.
pub fn has_shift(program: &[Instruction]) -> bool {
    program.iter().any(|i| {
        matches!(
            i.kind,
            InstKind::Reg {
                op: RegOp::Sll | RegOp::Srl | RegOp::Sra,
                ..
            } | InstKind::Imm {
                op: ImmOp::Slli | ImmOp::Srli | ImmOp::Srai,
                ..
            }
        )
    })
}

/// Does the program touch memory?
pub fn has_memory(program: &[Instruction]) -> bool {
    program
        .iter()
        .any(|i| matches!(i.kind, InstKind::Lw { .. } | InstKind::Sw { .. }))
}
