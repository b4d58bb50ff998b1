//! Contract verification for functions written in a small Python-compatible
//! subset.
//!
//! The accepted language is a single `def` with integer/real parameters and
//! a body of assignments, `if`/`elif`/`else`, ternary expressions, and
//! returns, over arithmetic (`+ - * / // %`), chained comparisons, boolean
//! operators, and the builtins `abs`, `min`, `max`.  Anything else — loops,
//! strings, containers, other calls — is reported as a named unsupported
//! feature rather than approximated.
//!
//! Verification translates the body to one closed-form term per function by
//! substituting assignments forward and merging branches into if-then-else
//! terms, so the result's only free variables are the parameters.  Division
//! sites emit reachability-conditioned obligations (`reach → divisor ≠ 0`),
//! honoring source-level short-circuiting of `and`/`or`, ternaries, and
//! comparison chains.  Contracts come from spec files of `requires:` /
//! `ensures:` lines sharing the expression grammar, with `result` naming
//! the return value; each clause is proven separately so failures point at
//! one line.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, Zero};
use thiserror::Error;

use crate::report::{ObligationRecord, ObligationStatus, Verdict};
use crate::smt::{eval, Decl, Env, Model, Proof, Solver, SolverError, Sort, Term, Value};

/// How an input can fail before any proof is attempted.
#[derive(Debug, Error)]
pub enum CodeError {
    /// Malformed text.
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    /// Well-formed source using a construct outside the verified subset.
    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },
    /// In-grammar source that fails validation (missing returns, unbound
    /// or ill-typed variables, bad contracts).
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> CodeError {
    CodeError::Syntax {
        line,
        message: message.into(),
    }
}

fn unsupported(line: usize, feature: impl Into<String>) -> CodeError {
    CodeError::Unsupported {
        line,
        feature: feature.into(),
    }
}

fn semantic(line: usize, message: impl Into<String>) -> CodeError {
    CodeError::Semantic {
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(BigInt),
    Float(BigRational),
    /// Supported keyword: def return if elif else and or not True False.
    Kw(&'static str),
    Op(&'static str),
}

const SUPPORTED_KW: &[&str] = &[
    "def", "return", "if", "elif", "else", "and", "or", "not", "True", "False",
];

/// Keywords that are valid Python but outside the subset, with the feature
/// name reported for each.
const UNSUPPORTED_KW: &[(&str, &str)] = &[
    ("while", "loop"),
    ("for", "loop"),
    ("break", "loop"),
    ("continue", "loop"),
    ("lambda", "lambda"),
    ("import", "import"),
    ("from", "import"),
    ("class", "class"),
    ("try", "exception handling"),
    ("except", "exception handling"),
    ("finally", "exception handling"),
    ("raise", "exception handling"),
    ("with", "context manager"),
    ("yield", "generator"),
    ("async", "async function"),
    ("await", "async function"),
    ("global", "global statement"),
    ("nonlocal", "global statement"),
    ("assert", "assert statement"),
    ("del", "delete statement"),
    ("pass", "pass statement"),
    ("in", "membership test"),
    ("is", "identity comparison"),
    ("None", "None value"),
];

/// Tokenize one line (or line fragment).  Detects out-of-subset constructs
/// at the character level so they are named precisely instead of producing
/// confusing downstream syntax errors.
fn lex_fragment(text: &str, line: usize) -> Result<Vec<Tok>, CodeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let at = |i: usize| chars.get(i).copied().unwrap_or('\0');
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '#' => break,
            '"' | '\'' => return Err(unsupported(line, "string literal")),
            '[' | ']' => return Err(unsupported(line, "list")),
            '{' | '}' => return Err(unsupported(line, "dictionary or set")),
            '&' | '|' | '^' | '~' => return Err(unsupported(line, "bitwise operator")),
            '@' => return Err(unsupported(line, "decorator")),
            '\\' => return Err(syntax(line, "line continuation is not supported")),
            '0'..='9' => {
                let (tok, next) = lex_number(&chars, i, line)?;
                toks.push(tok);
                i = next;
            }
            '.' => {
                if at(i + 1).is_ascii_digit() {
                    let (tok, next) = lex_number(&chars, i, line)?;
                    toks.push(tok);
                    i = next;
                } else {
                    return Err(unsupported(line, "attribute access"));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if let Some(kw) = SUPPORTED_KW.iter().find(|k| **k == word) {
                    toks.push(Tok::Kw(kw));
                } else if let Some((_, feature)) =
                    UNSUPPORTED_KW.iter().find(|(k, _)| *k == word)
                {
                    return Err(unsupported(line, *feature));
                } else {
                    toks.push(Tok::Name(word));
                }
            }
            _ => {
                let two = |op: &'static str| (op, 2usize);
                let one = |op: &'static str| (op, 1usize);
                let (op, len) = match (c, at(i + 1)) {
                    (_, '=') if "+-*/%".contains(c) => {
                        return Err(unsupported(line, "augmented assignment"))
                    }
                    ('*', '*') => return Err(unsupported(line, "exponentiation")),
                    (':', '=') => return Err(unsupported(line, "walrus operator")),
                    ('<', '<') | ('>', '>') => return Err(unsupported(line, "bitwise operator")),
                    ('-', '>') => two("->"),
                    ('/', '/') => {
                        if at(i + 2) == '=' {
                            return Err(unsupported(line, "augmented assignment"));
                        }
                        two("//")
                    }
                    ('<', '=') => two("<="),
                    ('>', '=') => two(">="),
                    ('=', '=') => two("=="),
                    ('!', '=') => two("!="),
                    ('!', _) => return Err(syntax(line, "unexpected '!'")),
                    ('+', _) => one("+"),
                    ('-', _) => one("-"),
                    ('*', _) => one("*"),
                    ('/', _) => one("/"),
                    ('%', _) => one("%"),
                    ('<', _) => one("<"),
                    ('>', _) => one(">"),
                    ('=', _) => one("="),
                    ('(', _) => one("("),
                    (')', _) => one(")"),
                    (',', _) => one(","),
                    (':', _) => one(":"),
                    (';', _) => one(";"),
                    _ => return Err(syntax(line, format!("unexpected character {c:?}"))),
                };
                toks.push(Tok::Op(op));
                i += len;
            }
        }
    }
    Ok(toks)
}

/// Integer or decimal literal, starting at `chars[i]`.  Decimals become
/// exact rationals.
fn lex_number(chars: &[char], start: usize, line: usize) -> Result<(Tok, usize), CodeError> {
    let mut i = start;
    let mut whole = String::new();
    let mut frac = String::new();
    let mut exp = String::new();
    while i < chars.len() && chars[i].is_ascii_digit() {
        whole.push(chars[i]);
        i += 1;
    }
    let mut is_float = false;
    if i < chars.len() && chars[i] == '.' {
        is_float = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            frac.push(chars[i]);
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            exp.push(chars[j]);
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            is_float = true;
            while j < chars.len() && chars[j].is_ascii_digit() {
                exp.push(chars[j]);
                j += 1;
            }
            i = j;
        }
    }
    if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
        return Err(syntax(line, "malformed number"));
    }
    if !is_float {
        return Ok((Tok::Int(whole.parse().expect("digits")), i));
    }
    let mantissa: BigInt = format!("{whole}{frac}").parse().unwrap_or_else(|_| 0.into());
    let mut num = mantissa;
    let mut den = BigInt::from(10).pow(frac.len() as u32);
    let e: i32 = if exp.is_empty() {
        0
    } else {
        exp.parse()
            .map_err(|_| syntax(line, "exponent out of range"))?
    };
    if e >= 0 {
        num *= BigInt::from(10).pow(e as u32);
    } else {
        den *= BigInt::from(10).pow(e.unsigned_abs());
    }
    Ok((Tok::Float(BigRational::new(num, den)), i))
}

#[derive(Debug, Clone)]
struct SrcLine {
    number: usize,
    indent: usize,
    toks: Vec<Tok>,
}

fn lex_source(text: &str) -> Result<Vec<SrcLine>, CodeError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let mut indent = 0;
        for c in raw.chars() {
            match c {
                ' ' => indent += 1,
                '\t' => return Err(syntax(number, "tab in indentation; use spaces")),
                _ => break,
            }
        }
        let toks = lex_fragment(&raw[indent..], number)?;
        if !toks.is_empty() {
            lines.push(SrcLine {
                number,
                indent,
                toks,
            });
        }
    }
    Ok(lines)
}

// ---------------------------------------------------------------------------
// Syntax trees

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub line: usize,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Float(BigRational),
    Bool(bool),
    Name(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Chained comparison: `a < b <= c` keeps all links.
    Compare {
        first: Box<Expr>,
        rest: Vec<(CmpOp, Expr)>,
    },
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Ternary {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Call {
        builtin: Builtin,
        args: Vec<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Abs,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign { name: String, value: Expr },
    Return(Expr),
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
}

// ---------------------------------------------------------------------------
// Expression parsing

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

/// Parse a full expression from a token slice, requiring every token to be
/// consumed.
fn parse_expr_all(toks: &[Tok], line: usize) -> Result<Expr, CodeError> {
    let mut p = ExprParser { toks, pos: 0, line };
    let e = p.ternary()?;
    if p.pos != toks.len() {
        return Err(syntax(line, "unexpected tokens after the expression"));
    }
    Ok(e)
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Kw(k)) if *k == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &'static str) -> Result<(), CodeError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(syntax(self.line, format!("expected {op:?}")))
        }
    }

    fn mk(&self, kind: ExprKind) -> Expr {
        Expr {
            line: self.line,
            kind,
        }
    }

    fn ternary(&mut self) -> Result<Expr, CodeError> {
        let value = self.or_chain()?;
        if self.eat_kw("if") {
            let cond = self.or_chain()?;
            if !self.eat_kw("else") {
                return Err(syntax(self.line, "conditional expression needs `else`"));
            }
            let els = self.ternary()?;
            return Ok(self.mk(ExprKind::Ternary {
                cond: Box::new(cond),
                then: Box::new(value),
                els: Box::new(els),
            }));
        }
        Ok(value)
    }

    fn or_chain(&mut self) -> Result<Expr, CodeError> {
        let first = self.and_chain()?;
        let mut parts = vec![first];
        while self.eat_kw("or") {
            parts.push(self.and_chain()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            self.mk(ExprKind::Or(parts))
        })
    }

    fn and_chain(&mut self) -> Result<Expr, CodeError> {
        let first = self.not_expr()?;
        let mut parts = vec![first];
        while self.eat_kw("and") {
            parts.push(self.not_expr()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            self.mk(ExprKind::And(parts))
        })
    }

    fn not_expr(&mut self) -> Result<Expr, CodeError> {
        if self.eat_kw("not") {
            let inner = self.not_expr()?;
            return Ok(self.mk(ExprKind::Not(Box::new(inner))));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, CodeError> {
        let first = self.arith()?;
        let mut rest = Vec::new();
        while let Some(op) = self.peek_cmp() {
            self.pos += 1;
            rest.push((op, self.arith()?));
        }
        Ok(if rest.is_empty() {
            first
        } else {
            self.mk(ExprKind::Compare {
                first: Box::new(first),
                rest,
            })
        })
    }

    fn peek_cmp(&self) -> Option<CmpOp> {
        match self.peek() {
            Some(Tok::Op("<")) => Some(CmpOp::Lt),
            Some(Tok::Op("<=")) => Some(CmpOp::Le),
            Some(Tok::Op(">")) => Some(CmpOp::Gt),
            Some(Tok::Op(">=")) => Some(CmpOp::Ge),
            Some(Tok::Op("==")) => Some(CmpOp::Eq),
            Some(Tok::Op("!=")) => Some(CmpOp::Ne),
            _ => None,
        }
    }

    fn arith(&mut self) -> Result<Expr, CodeError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_op("+") {
                BinOp::Add
            } else if self.eat_op("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = self.mk(ExprKind::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
    }

    fn term(&mut self) -> Result<Expr, CodeError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat_op("*") {
                BinOp::Mul
            } else if self.eat_op("//") {
                BinOp::FloorDiv
            } else if self.eat_op("/") {
                BinOp::Div
            } else if self.eat_op("%") {
                BinOp::Mod
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = self.mk(ExprKind::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
    }

    fn factor(&mut self) -> Result<Expr, CodeError> {
        if self.eat_op("-") {
            let inner = self.factor()?;
            return Ok(self.mk(ExprKind::Neg(Box::new(inner))));
        }
        if self.eat_op("+") {
            return self.factor();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, CodeError> {
        let tok = self
            .peek()
            .ok_or_else(|| syntax(self.line, "expected an expression"))?
            .clone();
        match tok {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Int(n)))
            }
            Tok::Float(r) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Float(r)))
            }
            Tok::Kw("True") => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Bool(true)))
            }
            Tok::Kw("False") => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Bool(false)))
            }
            Tok::Name(name) => {
                self.pos += 1;
                if !self.eat_op("(") {
                    return Ok(self.mk(ExprKind::Name(name)));
                }
                let builtin = match name.as_str() {
                    "abs" => Builtin::Abs,
                    "min" => Builtin::Min,
                    "max" => Builtin::Max,
                    other => return Err(unsupported(self.line, format!("call:{other}"))),
                };
                let mut args = vec![self.ternary()?];
                while self.eat_op(",") {
                    args.push(self.ternary()?);
                }
                self.expect_op(")")?;
                match builtin {
                    Builtin::Abs if args.len() != 1 => {
                        Err(semantic(self.line, "abs takes exactly one argument"))
                    }
                    Builtin::Min | Builtin::Max if args.len() < 2 => Err(semantic(
                        self.line,
                        format!("{name} needs at least two arguments"),
                    )),
                    _ => Ok(self.mk(ExprKind::Call { builtin, args })),
                }
            }
            Tok::Op("(") => {
                self.pos += 1;
                let e = self.ternary()?;
                self.expect_op(")")?;
                Ok(e)
            }
            other => Err(syntax(
                self.line,
                format!("expected an expression, found {other:?}"),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Statement parsing

struct Parser {
    lines: Vec<SrcLine>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&SrcLine> {
        self.lines.get(self.pos)
    }

    fn parse(mut self) -> Result<(String, Vec<(String, Sort)>, Option<Sort>, Vec<Stmt>), CodeError>
    {
        let header = self.lines[0].clone();
        if header.indent != 0 {
            return Err(syntax(header.number, "function must start at column 0"));
        }
        self.pos = 1;
        let (name, params, declared, inline) = parse_def_header(&header)?;
        let body = self.parse_suite(&inline, header.number, 0)?;
        if let Some(extra) = self.peek() {
            return Err(if extra.toks.first() == Some(&Tok::Kw("def")) {
                unsupported(extra.number, "multiple functions")
            } else {
                syntax(extra.number, "unexpected code after the function")
            });
        }
        Ok((name, params, declared, body))
    }

    /// A suite is either the statements after the `:` on the same line or
    /// an indented block.
    fn parse_suite(
        &mut self,
        inline: &[Tok],
        header_line: usize,
        parent_indent: usize,
    ) -> Result<Vec<Stmt>, CodeError> {
        if !inline.is_empty() {
            let mut stmts = Vec::new();
            for part in split_top_level(inline, ";") {
                if part.is_empty() {
                    return Err(syntax(header_line, "empty statement"));
                }
                stmts.push(parse_simple_stmt(part, header_line)?);
            }
            return Ok(stmts);
        }
        self.parse_block(parent_indent, header_line)
    }

    fn parse_block(
        &mut self,
        parent_indent: usize,
        header_line: usize,
    ) -> Result<Vec<Stmt>, CodeError> {
        let level = match self.peek() {
            Some(line) if line.indent > parent_indent => line.indent,
            _ => return Err(syntax(header_line, "expected an indented block")),
        };
        let mut stmts = Vec::new();
        while let Some(line) = self.peek() {
            if line.indent < level {
                if line.indent > parent_indent {
                    return Err(syntax(line.number, "inconsistent indentation"));
                }
                break;
            }
            if line.indent > level {
                return Err(syntax(line.number, "unexpected indent"));
            }
            stmts.push(self.parse_statement(level)?);
        }
        Ok(stmts)
    }

    fn parse_statement(&mut self, level: usize) -> Result<Stmt, CodeError> {
        let line = self.lines[self.pos].clone();
        self.pos += 1;
        match line.toks.first() {
            Some(Tok::Kw("if")) => self.parse_if(&line, level),
            Some(Tok::Kw("elif")) | Some(Tok::Kw("else")) => Err(syntax(
                line.number,
                "elif/else without a matching if",
            )),
            _ => parse_simple_stmt(&line.toks, line.number),
        }
    }

    /// Parse an `if`/`elif`/`else` chain starting at the given line; `elif`
    /// arms become nested conditionals.
    fn parse_if(&mut self, line: &SrcLine, level: usize) -> Result<Stmt, CodeError> {
        let (cond_toks, inline) = split_colon(&line.toks[1..], line.number)?;
        let cond = parse_expr_all(cond_toks, line.number)?;
        let then = self.parse_suite(inline, line.number, level)?;
        let els = match self.peek() {
            Some(next) if next.indent == level => match next.toks.first() {
                Some(Tok::Kw("elif")) => {
                    let elif_line = self.lines[self.pos].clone();
                    self.pos += 1;
                    vec![self.parse_if(&elif_line, level)?]
                }
                Some(Tok::Kw("else")) => {
                    let else_line = self.lines[self.pos].clone();
                    self.pos += 1;
                    let (rest, inline) = split_colon(&else_line.toks[1..], else_line.number)?;
                    if !rest.is_empty() {
                        return Err(syntax(else_line.number, "unexpected tokens after else"));
                    }
                    self.parse_suite(inline, else_line.number, level)?
                }
                _ => Vec::new(),
            },
            _ => Vec::new(),
        };
        Ok(Stmt {
            line: line.number,
            kind: StmtKind::If { cond, then, els },
        })
    }
}

fn parse_simple_stmt(toks: &[Tok], line: usize) -> Result<Stmt, CodeError> {
    match toks {
        [Tok::Kw("return")] => Err(syntax(line, "return needs an expression")),
        [Tok::Kw("return"), rest @ ..] => Ok(Stmt {
            line,
            kind: StmtKind::Return(parse_expr_all(rest, line)?),
        }),
        [Tok::Name(name), Tok::Op("="), rest @ ..] if !rest.is_empty() => Ok(Stmt {
            line,
            kind: StmtKind::Assign {
                name: name.clone(),
                value: parse_expr_all(rest, line)?,
            },
        }),
        [Tok::Kw("if"), ..] => Err(syntax(line, "block statement on a single line")),
        [Tok::Name(_), Tok::Op("("), ..] => Err(unsupported(line, "expression statement")),
        _ => Err(syntax(line, "expected an assignment, return, or if")),
    }
}

/// `def name(params) [-> type]:` plus whatever follows the colon.
fn parse_def_header(
    line: &SrcLine,
) -> Result<(String, Vec<(String, Sort)>, Option<Sort>, Vec<Tok>), CodeError> {
    let n = line.number;
    let toks = &line.toks;
    if toks.first() != Some(&Tok::Kw("def")) {
        return Err(syntax(n, "expected a function definition"));
    }
    let name = match toks.get(1) {
        Some(Tok::Name(name)) => name.clone(),
        _ => return Err(syntax(n, "expected a function name after def")),
    };
    if toks.get(2) != Some(&Tok::Op("(")) {
        return Err(syntax(n, "expected '(' after the function name"));
    }
    let mut params = Vec::new();
    let mut i = 3;
    if toks.get(i) == Some(&Tok::Op(")")) {
        i += 1;
    } else {
        loop {
            let p = match toks.get(i) {
                Some(Tok::Name(p)) => p.clone(),
                _ => return Err(syntax(n, "expected a parameter name")),
            };
            if params.iter().any(|(q, _)| *q == p) {
                return Err(semantic(n, format!("duplicate parameter {p:?}")));
            }
            i += 1;
            let sort = if toks.get(i) == Some(&Tok::Op(":")) {
                i += 1;
                let s = annotation_sort(toks.get(i), n, &p)?;
                i += 1;
                s
            } else {
                Sort::Int
            };
            params.push((p, sort));
            match toks.get(i) {
                Some(Tok::Op(",")) => i += 1,
                Some(Tok::Op(")")) => {
                    i += 1;
                    break;
                }
                _ => return Err(syntax(n, "expected ',' or ')' in the parameter list")),
            }
        }
    }
    let declared = if toks.get(i) == Some(&Tok::Op("->")) {
        i += 1;
        let s = match toks.get(i) {
            Some(Tok::Name(t)) if t == "int" => Sort::Int,
            Some(Tok::Name(t)) if t == "float" => Sort::Real,
            Some(Tok::Name(t)) if t == "bool" => Sort::Bool,
            _ => return Err(semantic(n, "return annotation must be int, float, or bool")),
        };
        i += 1;
        Some(s)
    } else {
        None
    };
    if toks.get(i) != Some(&Tok::Op(":")) {
        return Err(syntax(n, "expected ':' after the function signature"));
    }
    Ok((name, params, declared, toks[i + 1..].to_vec()))
}

fn annotation_sort(tok: Option<&Tok>, line: usize, param: &str) -> Result<Sort, CodeError> {
    match tok {
        Some(Tok::Name(t)) if t == "int" => Ok(Sort::Int),
        Some(Tok::Name(t)) if t == "float" => Ok(Sort::Real),
        _ => Err(semantic(
            line,
            format!("parameter {param:?} must be annotated int or float"),
        )),
    }
}

/// Split on a top-level occurrence of `op` (not inside parentheses).
fn split_top_level<'t>(toks: &'t [Tok], op: &str) -> Vec<&'t [Tok]> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::Op("(") => depth += 1,
            Tok::Op(")") => depth = depth.saturating_sub(1),
            Tok::Op(o) if *o == op && depth == 0 => {
                parts.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&toks[start..]);
    parts
}

fn split_colon(toks: &[Tok], line: usize) -> Result<(&[Tok], &[Tok]), CodeError> {
    let mut depth = 0usize;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::Op("(") => depth += 1,
            Tok::Op(")") => depth = depth.saturating_sub(1),
            Tok::Op(":") if depth == 0 => return Ok((&toks[..i], &toks[i + 1..])),
            _ => {}
        }
    }
    Err(syntax(line, "missing ':'"))
}

// ---------------------------------------------------------------------------
// Validation (sorts, definite assignment, returns)

fn numeric_unify(a: &Sort, b: &Sort) -> Option<Sort> {
    match (a, b) {
        (Sort::Int, Sort::Int) => Some(Sort::Int),
        (Sort::Int | Sort::Real, Sort::Int | Sort::Real) => Some(Sort::Real),
        _ => None,
    }
}

fn expr_sort(e: &Expr, env: &BTreeMap<String, Sort>) -> Result<Sort, CodeError> {
    let numeric = |s: &Sort| matches!(s, Sort::Int | Sort::Real);
    match &e.kind {
        ExprKind::Int(_) => Ok(Sort::Int),
        ExprKind::Float(_) => Ok(Sort::Real),
        ExprKind::Bool(_) => Ok(Sort::Bool),
        ExprKind::Name(name) => env.get(name).cloned().ok_or_else(|| {
            semantic(e.line, format!("{name:?} may be used before assignment"))
        }),
        ExprKind::Neg(inner) => {
            let s = expr_sort(inner, env)?;
            if numeric(&s) {
                Ok(s)
            } else {
                Err(semantic(e.line, "unary minus needs a numeric operand"))
            }
        }
        ExprKind::Not(inner) => {
            if expr_sort(inner, env)? == Sort::Bool {
                Ok(Sort::Bool)
            } else {
                Err(semantic(e.line, "`not` needs a boolean operand"))
            }
        }
        ExprKind::Bin { op, lhs, rhs } => {
            let a = expr_sort(lhs, env)?;
            let b = expr_sort(rhs, env)?;
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => numeric_unify(&a, &b).ok_or_else(|| {
                    semantic(e.line, format!("`{}` needs numeric operands", op.symbol()))
                }),
                BinOp::Div => numeric_unify(&a, &b).map(|_| Sort::Real).ok_or_else(|| {
                    semantic(e.line, "`/` needs numeric operands")
                }),
                BinOp::FloorDiv | BinOp::Mod => {
                    if a == Sort::Int && b == Sort::Int {
                        Ok(Sort::Int)
                    } else {
                        Err(semantic(
                            e.line,
                            format!("`{}` is integer-only here", op.symbol()),
                        ))
                    }
                }
            }
        }
        ExprKind::Compare { first, rest } => {
            let mut prev = expr_sort(first, env)?;
            for (op, rhs) in rest {
                let next = expr_sort(rhs, env)?;
                let ok = match op {
                    CmpOp::Eq | CmpOp::Ne => {
                        numeric_unify(&prev, &next).is_some() || prev == next
                    }
                    _ => numeric_unify(&prev, &next).is_some(),
                };
                if !ok {
                    return Err(semantic(e.line, "comparison between incompatible types"));
                }
                prev = next;
            }
            Ok(Sort::Bool)
        }
        ExprKind::And(parts) | ExprKind::Or(parts) => {
            for p in parts {
                if expr_sort(p, env)? != Sort::Bool {
                    return Err(semantic(e.line, "`and`/`or` need boolean operands"));
                }
            }
            Ok(Sort::Bool)
        }
        ExprKind::Ternary { cond, then, els } => {
            if expr_sort(cond, env)? != Sort::Bool {
                return Err(semantic(e.line, "conditional test must be boolean"));
            }
            let a = expr_sort(then, env)?;
            let b = expr_sort(els, env)?;
            if a == b {
                Ok(a)
            } else {
                numeric_unify(&a, &b).ok_or_else(|| {
                    semantic(e.line, "conditional branches have incompatible types")
                })
            }
        }
        ExprKind::Call { builtin, args } => {
            let mut acc = expr_sort(&args[0], env)?;
            if !numeric(&acc) {
                return Err(semantic(e.line, "builtin calls need numeric arguments"));
            }
            for a in &args[1..] {
                let s = expr_sort(a, env)?;
                acc = numeric_unify(&acc, &s).ok_or_else(|| {
                    semantic(e.line, "builtin calls need numeric arguments")
                })?;
            }
            let _ = builtin;
            Ok(acc)
        }
    }
}

#[derive(Default)]
struct Checker {
    returns: Vec<(Sort, usize)>,
}

impl Checker {
    /// Check a block; `true` means every path through it returns.
    fn check_block(
        &mut self,
        stmts: &[Stmt],
        env: &mut BTreeMap<String, Sort>,
    ) -> Result<bool, CodeError> {
        for (i, s) in stmts.iter().enumerate() {
            let returned = match &s.kind {
                StmtKind::Assign { name, value } => {
                    let sort = expr_sort(value, env)?;
                    env.insert(name.clone(), sort);
                    false
                }
                StmtKind::Return(e) => {
                    let sort = expr_sort(e, env)?;
                    self.returns.push((sort, s.line));
                    true
                }
                StmtKind::If { cond, then, els } => {
                    if expr_sort(cond, env)? != Sort::Bool {
                        return Err(semantic(s.line, "if condition must be boolean"));
                    }
                    let mut then_env = env.clone();
                    let then_ret = self.check_block(then, &mut then_env)?;
                    let mut else_env = env.clone();
                    let else_ret = self.check_block(els, &mut else_env)?;
                    match (then_ret, else_ret) {
                        (true, true) => true,
                        (true, false) => {
                            *env = else_env;
                            false
                        }
                        (false, true) => {
                            *env = then_env;
                            false
                        }
                        (false, false) => {
                            // Only variables assigned on both paths stay
                            // definitely assigned.
                            let mut merged = BTreeMap::new();
                            for (k, a) in &then_env {
                                if let Some(b) = else_env.get(k) {
                                    let sort = if a == b {
                                        a.clone()
                                    } else {
                                        numeric_unify(a, b).ok_or_else(|| {
                                            semantic(
                                                s.line,
                                                format!(
                                                    "{k:?} has incompatible types across branches"
                                                ),
                                            )
                                        })?
                                    };
                                    merged.insert(k.clone(), sort);
                                }
                            }
                            *env = merged;
                            false
                        }
                    }
                }
            };
            if returned {
                if i + 1 < stmts.len() {
                    return Err(semantic(stmts[i + 1].line, "unreachable code after return"));
                }
                return Ok(true);
            }
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// Public function unit

/// A validated function: every path returns, every read is definitely
/// assigned, and all expressions are type-consistent.
#[derive(Debug, Clone)]
pub struct FunctionUnit {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: Vec<Stmt>,
    /// Sort of the returned value (Int, Real, or Bool).
    pub result_sort: Sort,
}

/// Parse and validate one function.
pub fn parse_function(text: &str) -> Result<FunctionUnit, CodeError> {
    let lines = lex_source(text)?;
    if lines.is_empty() {
        return Err(syntax(1, "no function found"));
    }
    let (name, params, declared, body) = Parser { lines, pos: 0 }.parse()?;

    let mut env: BTreeMap<String, Sort> = params.iter().cloned().collect();
    let mut checker = Checker::default();
    let all_return = checker.check_block(&body, &mut env)?;
    if !all_return {
        let line = body.last().map(|s| s.line).unwrap_or(1);
        return Err(semantic(line, "not every path returns a value"));
    }

    let (mut result_sort, _) = checker.returns[0].clone();
    for (sort, line) in &checker.returns[1..] {
        result_sort = if result_sort == *sort {
            result_sort
        } else {
            numeric_unify(&result_sort, sort).ok_or_else(|| {
                semantic(*line, "return type conflicts with an earlier return")
            })?
        };
    }
    if let Some(declared) = declared {
        result_sort = match (&declared, &result_sort) {
            (d, r) if d == r => result_sort,
            (Sort::Real, Sort::Int) => Sort::Real, // int values are valid floats
            _ => {
                let line = checker.returns.last().map(|(_, l)| *l).unwrap_or(1);
                return Err(semantic(
                    line,
                    format!("body returns {result_sort}, conflicting with the annotation"),
                ));
            }
        };
    }

    Ok(FunctionUnit {
        name,
        params,
        body,
        result_sort,
    })
}

// ---------------------------------------------------------------------------
// Translation to terms

/// Result of translating a function body: a closed-form term over the
/// parameters plus the division obligations collected along the way.
#[derive(Debug, Clone)]
pub struct SsaResult {
    pub result: Term,
    /// `(label, condition)` pairs; each condition must hold for all inputs.
    pub obligations: Vec<(String, Term)>,
}

struct Translator {
    obligations: Vec<(String, Term)>,
    /// Spec expressions share the translator but do not emit obligations.
    collect: bool,
}

fn t_true() -> Term {
    Term::bool_lit(true)
}

/// Conjunction that skips the leading literal `true` guard.
fn conj(g: &Term, c: &Term) -> Term {
    if *g == t_true() {
        c.clone()
    } else {
        g.and(c).expect("boolean guard")
    }
}

fn imp(g: &Term, p: &Term) -> Term {
    if *g == t_true() {
        p.clone()
    } else {
        g.implies(p).expect("boolean guard")
    }
}

/// Promote Int to Real when the two sides disagree.
fn unify_pair(a: Term, b: Term) -> (Term, Term) {
    match (a.sort(), b.sort()) {
        (Sort::Int, Sort::Real) => (a.to_real().expect("promotion"), b),
        (Sort::Real, Sort::Int) => (a, b.to_real().expect("promotion")),
        _ => (a, b),
    }
}

fn to_sort(t: Term, target: &Sort) -> Term {
    if t.sort() == &Sort::Int && target == &Sort::Real {
        t.to_real().expect("promotion")
    } else {
        t
    }
}

fn statically_nonzero(t: &Term) -> bool {
    if !t.is_constant() {
        return false;
    }
    match eval(t, &Env::new()) {
        Ok(Value::Int(n)) => !n.is_zero(),
        Ok(Value::Real(r)) => !r.is_zero(),
        _ => false,
    }
}

impl Translator {
    fn expr(&mut self, e: &Expr, env: &BTreeMap<String, Term>, reach: &Term) -> Term {
        match &e.kind {
            ExprKind::Int(n) => Term::int(n.clone()),
            ExprKind::Float(r) => Term::real(r.clone()),
            ExprKind::Bool(b) => Term::bool_lit(*b),
            ExprKind::Name(name) => env.get(name).expect("definitely assigned").clone(),
            ExprKind::Neg(inner) => self.expr(inner, env, reach).neg().expect("numeric"),
            ExprKind::Not(inner) => self.expr(inner, env, reach).not().expect("boolean"),
            ExprKind::Bin { op, lhs, rhs } => {
                let l = self.expr(lhs, env, reach);
                let r = self.expr(rhs, env, reach);
                if matches!(op, BinOp::Div | BinOp::FloorDiv | BinOp::Mod) {
                    self.divisor_obligation(op, &r, e.line, reach);
                }
                let (l, r) = unify_pair(l, r);
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                    BinOp::Div => to_sort(l, &Sort::Real)
                        .div_real(&to_sort(r, &Sort::Real)),
                    BinOp::FloorDiv => l.div_floor(&r),
                    BinOp::Mod => l.mod_floor(&r),
                }
                .expect("type-checked arithmetic")
            }
            ExprKind::Compare { first, rest } => {
                // Later operands are evaluated only while the chain still
                // holds, which scopes their division obligations.
                let mut prev = self.expr(first, env, reach);
                let mut holds = reach.clone();
                let mut parts = Vec::new();
                for (op, rhs) in rest {
                    let next = self.expr(rhs, env, &holds);
                    let (a, b) = unify_pair(prev.clone(), next.clone());
                    let link = match op {
                        CmpOp::Lt => a.lt(&b),
                        CmpOp::Le => a.le(&b),
                        CmpOp::Gt => a.gt(&b),
                        CmpOp::Ge => a.ge(&b),
                        CmpOp::Eq => a.eq(&b),
                        CmpOp::Ne => a.ne(&b),
                    }
                    .expect("type-checked comparison");
                    holds = conj(&holds, &link);
                    parts.push(link);
                    prev = next;
                }
                Term::and_all(parts).expect("boolean links")
            }
            ExprKind::And(exprs) => {
                let mut holds = reach.clone();
                let mut parts = Vec::new();
                for x in exprs {
                    let t = self.expr(x, env, &holds);
                    holds = conj(&holds, &t);
                    parts.push(t);
                }
                Term::and_all(parts).expect("boolean operands")
            }
            ExprKind::Or(exprs) => {
                let mut reach_next = reach.clone();
                let mut parts = Vec::new();
                for x in exprs {
                    let t = self.expr(x, env, &reach_next);
                    reach_next = conj(&reach_next, &t.not().expect("boolean"));
                    parts.push(t);
                }
                Term::or_all(parts).expect("boolean operands")
            }
            ExprKind::Ternary { cond, then, els } => {
                let c = self.expr(cond, env, reach);
                let t = self.expr(then, env, &conj(reach, &c));
                let f = self.expr(els, env, &conj(reach, &c.not().expect("boolean")));
                let (t, f) = unify_pair(t, f);
                Term::ite(&c, &t, &f).expect("type-checked conditional")
            }
            ExprKind::Call { builtin, args } => {
                let mut acc = self.expr(&args[0], env, reach);
                match builtin {
                    Builtin::Abs => acc.abs().expect("numeric"),
                    Builtin::Min | Builtin::Max => {
                        for a in &args[1..] {
                            let next = self.expr(a, env, reach);
                            let (x, y) = unify_pair(acc, next);
                            acc = match builtin {
                                Builtin::Min => x.min(&y),
                                Builtin::Max => x.max(&y),
                                Builtin::Abs => unreachable!(),
                            }
                            .expect("numeric");
                        }
                        acc
                    }
                }
            }
        }
    }

    fn divisor_obligation(&mut self, op: &BinOp, divisor: &Term, line: usize, reach: &Term) {
        if !self.collect || statically_nonzero(divisor) {
            return;
        }
        let zero = if divisor.sort() == &Sort::Real {
            Term::real(BigRational::zero())
        } else {
            Term::int(0)
        };
        let nonzero = divisor.ne(&zero).expect("numeric divisor");
        self.obligations.push((
            format!("`{}` divisor at line {line} is nonzero", op.symbol()),
            imp(reach, &nonzero),
        ));
    }

    /// Execute a block, threading assignments through `env` and collecting
    /// `(path-condition, value)` pairs for each return.  `true` means every
    /// path returned.
    fn block(
        &mut self,
        stmts: &[Stmt],
        env: &mut BTreeMap<String, Term>,
        guard: &Term,
        arms: &mut Vec<(Term, Term)>,
    ) -> bool {
        // Narrowed as partially-returning conditionals are passed: code
        // after `if c: return e` only runs when `!c`, and its obligations
        // must say so.
        let mut guard = guard.clone();
        for s in stmts {
            match &s.kind {
                StmtKind::Assign { name, value } => {
                    let t = self.expr(value, env, &guard);
                    env.insert(name.clone(), t);
                }
                StmtKind::Return(e) => {
                    let t = self.expr(e, env, &guard);
                    arms.push((guard.clone(), t));
                    return true;
                }
                StmtKind::If { cond, then, els } => {
                    let c = self.expr(cond, env, &guard);
                    let mut then_env = env.clone();
                    let then_ret =
                        self.block(then, &mut then_env, &conj(&guard, &c), arms);
                    let not_c = c.not().expect("boolean condition");
                    let mut else_env = env.clone();
                    let else_ret =
                        self.block(els, &mut else_env, &conj(&guard, &not_c), arms);
                    match (then_ret, else_ret) {
                        (true, true) => return true,
                        (true, false) => {
                            *env = else_env;
                            guard = conj(&guard, &not_c);
                        }
                        (false, true) => {
                            *env = then_env;
                            guard = conj(&guard, &c);
                        }
                        (false, false) => {
                            let mut merged = BTreeMap::new();
                            for (k, tv) in &then_env {
                                if let Some(ev) = else_env.get(k) {
                                    let t = if tv == ev {
                                        tv.clone()
                                    } else {
                                        let (a, b) = unify_pair(tv.clone(), ev.clone());
                                        Term::ite(&c, &a, &b).expect("branch merge")
                                    };
                                    merged.insert(k.clone(), t);
                                }
                            }
                            *env = merged;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Translate a validated function into its result term and obligations.
pub fn ssa_translate(fun: &FunctionUnit) -> SsaResult {
    let mut tr = Translator {
        obligations: Vec::new(),
        collect: true,
    };
    let mut env: BTreeMap<String, Term> = fun
        .params
        .iter()
        .map(|(name, sort)| (name.clone(), Term::var(name, sort.clone())))
        .collect();
    let mut arms = Vec::new();
    let returned = tr.block(&fun.body, &mut env, &t_true(), &mut arms);
    assert!(returned, "validation guarantees all paths return");

    // Fold the return arms into a single conditional chain.  Path
    // conditions are disjoint and exhaustive, so the last arm serves as
    // the default branch.
    let mut rev = arms.into_iter().rev();
    let (_, last) = rev.next().expect("at least one return");
    let mut result = to_sort(last, &fun.result_sort);
    for (g, v) in rev {
        result = Term::ite(&g, &to_sort(v, &fun.result_sort), &result).expect("arm merge");
    }
    SsaResult {
        result,
        obligations: tr.obligations,
    }
}

// ---------------------------------------------------------------------------
// Contracts

/// One `requires:` or `ensures:` line.
#[derive(Debug, Clone)]
pub struct Clause {
    pub line: usize,
    pub text: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, Default)]
pub struct FunctionSpec {
    pub requires: Vec<Clause>,
    pub ensures: Vec<Clause>,
}

/// Parse a contract file: `requires:`/`ensures:` lines, `#` comments.
pub fn parse_spec(text: &str) -> Result<FunctionSpec, CodeError> {
    let mut spec = FunctionSpec::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.trim();
        if code.is_empty() || code.starts_with('#') {
            continue;
        }
        let Some((keyword, fragment)) = code.split_once(':') else {
            return Err(syntax(line, "expected `requires:` or `ensures:`"));
        };
        let toks = lex_fragment(fragment, line)?;
        if toks.is_empty() {
            return Err(syntax(line, "missing expression after the keyword"));
        }
        let clause = Clause {
            line,
            text: fragment.trim().to_string(),
            expr: parse_expr_all(&toks, line)?,
        };
        match keyword.trim() {
            "requires" => spec.requires.push(clause),
            "ensures" => spec.ensures.push(clause),
            other => {
                return Err(syntax(
                    line,
                    format!("unknown keyword {other:?}; use requires or ensures"),
                ))
            }
        }
    }
    Ok(spec)
}

fn collect_names(e: &Expr, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Name(n) => {
            out.insert(n.clone());
        }
        ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Bool(_) => {}
        ExprKind::Neg(x) | ExprKind::Not(x) => collect_names(x, out),
        ExprKind::Bin { lhs, rhs, .. } => {
            collect_names(lhs, out);
            collect_names(rhs, out);
        }
        ExprKind::Compare { first, rest } => {
            collect_names(first, out);
            for (_, x) in rest {
                collect_names(x, out);
            }
        }
        ExprKind::And(xs) | ExprKind::Or(xs) => {
            for x in xs {
                collect_names(x, out);
            }
        }
        ExprKind::Ternary { cond, then, els } => {
            collect_names(cond, out);
            collect_names(then, out);
            collect_names(els, out);
        }
        ExprKind::Call { args, .. } => {
            for x in args {
                collect_names(x, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Verification

/// Verdict plus per-obligation records for one function.
#[derive(Debug)]
pub struct CodeOutcome {
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
}

/// Prove the contract: first every division obligation under the conjoined
/// `requires`, then each `ensures` clause with `result` bound to the
/// function's result term.
///
/// The outer error is an I/O-level solver failure; the inner error reports
/// a contract that does not fit the function (unknown names, non-boolean
/// clauses).
pub fn verify_code(
    fun: &FunctionUnit,
    spec: &FunctionSpec,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<Result<CodeOutcome, CodeError>, SolverError> {
    let sort_env: BTreeMap<String, Sort> = fun.params.iter().cloned().collect();
    if let Err(e) = check_spec_clauses(fun, spec, &sort_env) {
        return Ok(Err(e));
    }

    let ssa = ssa_translate(fun);
    let mut tr = Translator {
        obligations: Vec::new(),
        collect: false,
    };
    let param_env: BTreeMap<String, Term> = fun
        .params
        .iter()
        .map(|(name, sort)| (name.clone(), Term::var(name, sort.clone())))
        .collect();
    let requires: Vec<Term> = spec
        .requires
        .iter()
        .map(|c| tr.expr(&c.expr, &param_env, &t_true()))
        .collect();
    let mut ensures_env = param_env.clone();
    ensures_env.insert("result".to_string(), ssa.result.clone());

    let decls: Vec<Decl> = fun
        .params
        .iter()
        .map(|(name, sort)| Decl::new(name, sort.clone()))
        .collect();

    let mut verdict = Verdict::Verified;
    let mut obligations = Vec::new();
    let settle = |verdict: &mut Verdict,
                      label: &str,
                      outcome: Proof,
                      witness: &dyn Fn(&Model) -> String| {
        match outcome {
            Proof::Proven => (ObligationStatus::Proven, None),
            Proof::Counterexample(model) => {
                if verdict.is_verified() {
                    *verdict = Verdict::Unsafe {
                        obligation: label.to_string(),
                        witness: witness(&model),
                        model: model.clone(),
                    };
                }
                (ObligationStatus::Violated, Some(model))
            }
            Proof::Unknown { reason } => {
                if verdict.is_verified() {
                    *verdict = Verdict::Unknown {
                        reason: format!("{label}: {reason}"),
                    };
                }
                (ObligationStatus::Unknown, None)
            }
        }
    };

    for (label, term) in &ssa.obligations {
        let outcome = solver.prove(&decls, &requires, term, timeout_ms)?;
        let (status, _) = settle(&mut verdict, label, outcome.result, &|model| {
            format!("{} falsifies: {label}", inputs_text(model))
        });
        obligations.push(ObligationRecord::new(label.clone(), status, outcome.elapsed_ms));
    }

    for clause in &spec.ensures {
        let prop = tr.expr(&clause.expr, &ensures_env, &t_true());
        let label = format!("ensures: {}", clause.text);
        let outcome = solver.prove(&decls, &requires, &prop, timeout_ms)?;
        let result_term = &ssa.result;
        let text = clause.text.clone();
        let (status, _) = settle(&mut verdict, &label, outcome.result, &move |model| {
            let result = match eval(result_term, &Env::from_model(model)) {
                Ok(v) => v.describe(),
                Err(_) => "undefined (division by zero)".to_string(),
            };
            format!("{}; result = {result} violates `{text}`", inputs_text(model))
        });
        obligations.push(ObligationRecord::new(label, status, outcome.elapsed_ms));
    }

    Ok(Ok(CodeOutcome {
        verdict,
        obligations,
    }))
}

fn check_spec_clauses(
    fun: &FunctionUnit,
    spec: &FunctionSpec,
    sort_env: &BTreeMap<String, Sort>,
) -> Result<(), CodeError> {
    let param_names: BTreeSet<&str> = fun.params.iter().map(|(n, _)| n.as_str()).collect();
    let check = |clause: &Clause, allow_result: bool, kind: &str| -> Result<(), CodeError> {
        let mut names = BTreeSet::new();
        collect_names(&clause.expr, &mut names);
        for n in &names {
            if n == "result" {
                if !allow_result {
                    return Err(semantic(
                        clause.line,
                        "`result` may only appear in ensures clauses",
                    ));
                }
            } else if !param_names.contains(n.as_str()) {
                return Err(semantic(
                    clause.line,
                    format!("{n:?} is not a parameter of {}", fun.name),
                ));
            }
        }
        let mut env = sort_env.clone();
        if allow_result {
            env.insert("result".to_string(), fun.result_sort.clone());
        }
        if expr_sort(&clause.expr, &env)? != Sort::Bool {
            return Err(semantic(
                clause.line,
                format!("{kind} clause must be a boolean expression"),
            ));
        }
        Ok(())
    };
    for c in &spec.requires {
        check(c, false, "requires")?;
    }
    for c in &spec.ensures {
        check(c, true, "ensures")?;
    }
    Ok(())
}

/// "x = 1, y = 2" from a counterexample model, in parameter order.
fn inputs_text(model: &Model) -> String {
    let parts: Vec<String> = model
        .iter()
        .map(|(name, value)| format!("{name} = {}", value.describe()))
        .collect();
    if parts.is_empty() {
        "any input".to_string()
    } else {
        parts.join(", ")
    }
}
