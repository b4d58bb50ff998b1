//! Sorts, operators, and the immutable term tree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational};
use thiserror::Error;

use super::value::Value;

/// SMT sorts used by the verifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Int,
    Real,
    BitVec(u32),
    Str,
    Array(Box<Sort>, Box<Sort>),
}

impl Sort {
    pub fn array(index: Sort, element: Sort) -> Sort {
        Sort::Array(Box::new(index), Box::new(element))
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Sort::Int | Sort::Real)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Real => write!(f, "Real"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
            Sort::Str => write!(f, "String"),
            Sort::Array(i, e) => write!(f, "(Array {i} {e})"),
        }
    }
}

/// An inclusive set of character ranges, e.g. `a-z0-9_`.
///
/// Used to constrain string parameters: membership compiles to a regular
/// expression (`(re.* (re.union ...))`) on the solver side and to a direct
/// scan in the evaluator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Charset {
    ranges: Vec<(char, char)>,
}

/// Error from [`Charset::parse`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharsetError {
    #[error("charset is empty")]
    Empty,
    #[error("charset range {0:?}-{1:?} runs backwards")]
    Backwards(char, char),
    #[error("charset has a dangling '-'")]
    DanglingDash,
}

impl Charset {
    /// Parse a character-class body: plain characters plus `a-z` ranges.
    /// A leading or trailing `-` is a literal dash.
    pub fn parse(text: &str) -> Result<Charset, CharsetError> {
        let chars: Vec<char> = text.chars().collect();
        if chars.is_empty() {
            return Err(CharsetError::Empty);
        }
        let mut ranges = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if i + 2 < chars.len() && chars[i + 1] == '-' {
                let (lo, hi) = (chars[i], chars[i + 2]);
                if lo > hi {
                    return Err(CharsetError::Backwards(lo, hi));
                }
                ranges.push((lo, hi));
                i += 3;
            } else if chars[i] == '-' && i != 0 && i != chars.len() - 1 {
                return Err(CharsetError::DanglingDash);
            } else {
                ranges.push((chars[i], chars[i]));
                i += 1;
            }
        }
        Ok(Charset { ranges })
    }

    pub fn contains(&self, c: char) -> bool {
        self.ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&c))
    }

    pub fn ranges(&self) -> &[(char, char)] {
        &self.ranges
    }
}

impl fmt::Display for Charset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(lo, hi) in &self.ranges {
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}-{hi}")?;
            }
        }
        Ok(())
    }
}

/// Term operators.
///
/// The arithmetic group works uniformly over `Int` and `Real` (mixing the
/// two in one application is rejected).  `DivFloor`/`ModFloor` are
/// floor-division as in Python, lowered to SMT-LIB's Euclidean `div`/`mod`
/// at serialization.  `BvSignBound` is a convenience ternary
/// `lo <=s x <=s hi` used for register-bound obligations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    // Boolean.
    Not,
    And,
    Or,
    Implies,
    Ite,
    // Polymorphic comparison.
    Eq,
    Ne,
    // Int/Real arithmetic.
    Add,
    Sub,
    Mul,
    Neg,
    DivReal,
    DivFloor,
    ModFloor,
    Abs,
    Min,
    Max,
    ToReal,
    Lt,
    Le,
    Gt,
    Ge,
    // Fixed-width bit-vectors.
    BvAdd,
    BvSub,
    BvNeg,
    BvAnd,
    BvOr,
    BvXor,
    BvShl,
    BvLshr,
    BvAshr,
    BvSlt,
    BvSle,
    BvUlt,
    BvUle,
    BvSignBound,
    // Strings.
    StrConcat,
    StrLen,
    StrContains,
    StrPrefixOf,
    StrInCharset(Charset),
    // Arrays.
    Select,
    Store,
}

/// Ill-sorted term construction.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot apply {op} to ({args}): {detail}")]
pub struct SortError {
    pub op: String,
    pub args: String,
    pub detail: String,
}

fn sort_error(op: &Op, args: &[Term], detail: impl Into<String>) -> SortError {
    SortError {
        op: format!("{op:?}"),
        args: args
            .iter()
            .map(|a| a.sort().to_string())
            .collect::<Vec<_>>()
            .join(", "),
        detail: detail.into(),
    }
}

/// One node of the term tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind {
    /// Free variable, bound by a declaration when serialized.
    Var(String),
    /// Scalar literal.
    Lit(Value),
    /// Operator application.
    App(Op, Vec<Term>),
}

#[derive(Debug, PartialEq, Eq)]
struct Node {
    kind: TermKind,
    sort: Sort,
}

/// An immutable, well-sorted term.  Cloning is cheap (reference counted);
/// equality is structural with a pointer fast path.
#[derive(Debug, Clone, Eq)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Term {
    fn new(kind: TermKind, sort: Sort) -> Term {
        Term(Arc::new(Node { kind, sort }))
    }

    /// Free variable of the given sort.
    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::new(TermKind::Var(name.into()), sort)
    }

    /// Literal from a scalar value.  Array and raw values cannot appear in
    /// terms, only in models.
    pub fn lit(value: Value) -> Result<Term, SortError> {
        match value.sort() {
            Some(sort) => Ok(Term::new(TermKind::Lit(value), sort)),
            None => Err(SortError {
                op: "lit".into(),
                args: String::new(),
                detail: format!("{} is not a scalar literal", value.lexical()),
            }),
        }
    }

    pub fn bool_lit(b: bool) -> Term {
        Term::new(TermKind::Lit(Value::Bool(b)), Sort::Bool)
    }

    pub fn int<T: Into<BigInt>>(n: T) -> Term {
        Term::new(TermKind::Lit(Value::Int(n.into())), Sort::Int)
    }

    pub fn real(r: BigRational) -> Term {
        Term::new(TermKind::Lit(Value::Real(r)), Sort::Real)
    }

    pub fn bits(width: u32, bits: u64) -> Term {
        Term::new(TermKind::Lit(Value::bits(width, bits)), Sort::BitVec(width))
    }

    pub fn str_lit(s: impl Into<String>) -> Term {
        Term::new(TermKind::Lit(Value::Str(s.into())), Sort::Str)
    }

    pub fn sort(&self) -> &Sort {
        &self.0.sort
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// The literal value if this term is one.
    pub fn as_value(&self) -> Option<&Value> {
        match self.kind() {
            TermKind::Lit(v) => Some(v),
            _ => None,
        }
    }

    /// True if no variable occurs anywhere below this term.
    pub fn is_constant(&self) -> bool {
        match self.kind() {
            TermKind::Var(_) => false,
            TermKind::Lit(_) => true,
            TermKind::App(_, args) => args.iter().all(Term::is_constant),
        }
    }

    /// All free variables with their sorts, ordered by name.
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeMap<String, Sort>) {
        match self.kind() {
            TermKind::Var(name) => {
                out.insert(name.clone(), self.sort().clone());
            }
            TermKind::Lit(_) => {}
            TermKind::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Sort-checked application: the only way to combine terms.
    pub fn app(op: Op, args: Vec<Term>) -> Result<Term, SortError> {
        let sort = check_application(&op, &args)?;
        Ok(Term::new(TermKind::App(op, args), sort))
    }
}

/// Verify operator/argument sorts and compute the result sort.
fn check_application(op: &Op, args: &[Term]) -> Result<Sort, SortError> {
    use Op::*;
    let fail = |detail: &str| Err(sort_error(op, args, detail));
    let arity = |n: usize| -> Result<(), SortError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(sort_error(op, args, format!("expected {n} arguments")))
        }
    };
    match op {
        Not => {
            arity(1)?;
            if args[0].sort() != &Sort::Bool {
                return fail("argument must be Bool");
            }
            Ok(Sort::Bool)
        }
        And | Or => {
            if args.is_empty() {
                return fail("needs at least one argument");
            }
            if args.iter().any(|a| a.sort() != &Sort::Bool) {
                return fail("all arguments must be Bool");
            }
            Ok(Sort::Bool)
        }
        Implies => {
            arity(2)?;
            if args.iter().any(|a| a.sort() != &Sort::Bool) {
                return fail("both arguments must be Bool");
            }
            Ok(Sort::Bool)
        }
        Ite => {
            arity(3)?;
            if args[0].sort() != &Sort::Bool {
                return fail("condition must be Bool");
            }
            if args[1].sort() != args[2].sort() {
                return fail("branches must share a sort");
            }
            Ok(args[1].sort().clone())
        }
        Eq | Ne => {
            arity(2)?;
            if args[0].sort() != args[1].sort() {
                return fail("operands must share a sort");
            }
            Ok(Sort::Bool)
        }
        Add | Sub | Mul | Min | Max => {
            arity(2)?;
            numeric_pair(op, args)?;
            Ok(args[0].sort().clone())
        }
        Neg | Abs => {
            arity(1)?;
            if !args[0].sort().is_numeric() {
                return fail("argument must be Int or Real");
            }
            Ok(args[0].sort().clone())
        }
        DivReal => {
            arity(2)?;
            if args.iter().any(|a| a.sort() != &Sort::Real) {
                return fail("both arguments must be Real");
            }
            Ok(Sort::Real)
        }
        DivFloor | ModFloor => {
            arity(2)?;
            if args.iter().any(|a| a.sort() != &Sort::Int) {
                return fail("both arguments must be Int");
            }
            Ok(Sort::Int)
        }
        ToReal => {
            arity(1)?;
            if args[0].sort() != &Sort::Int {
                return fail("argument must be Int");
            }
            Ok(Sort::Real)
        }
        Lt | Le | Gt | Ge => {
            arity(2)?;
            numeric_pair(op, args)?;
            Ok(Sort::Bool)
        }
        BvAdd | BvSub | BvAnd | BvOr | BvXor | BvShl | BvLshr | BvAshr => {
            arity(2)?;
            bitvec_pair(op, args)?;
            Ok(args[0].sort().clone())
        }
        BvNeg => {
            arity(1)?;
            match args[0].sort() {
                Sort::BitVec(_) => Ok(args[0].sort().clone()),
                _ => fail("argument must be a bit-vector"),
            }
        }
        BvSlt | BvSle | BvUlt | BvUle => {
            arity(2)?;
            bitvec_pair(op, args)?;
            Ok(Sort::Bool)
        }
        BvSignBound => {
            arity(3)?;
            let w = match args[0].sort() {
                Sort::BitVec(w) => *w,
                _ => return fail("first argument must be a bit-vector"),
            };
            if args[1].sort() != &Sort::BitVec(w) || args[2].sort() != &Sort::BitVec(w) {
                return fail("bounds must match the subject's width");
            }
            Ok(Sort::Bool)
        }
        StrConcat => {
            if args.len() < 2 {
                return fail("needs at least two arguments");
            }
            if args.iter().any(|a| a.sort() != &Sort::Str) {
                return fail("all arguments must be String");
            }
            Ok(Sort::Str)
        }
        StrLen => {
            arity(1)?;
            if args[0].sort() != &Sort::Str {
                return fail("argument must be String");
            }
            Ok(Sort::Int)
        }
        StrContains | StrPrefixOf => {
            arity(2)?;
            if args.iter().any(|a| a.sort() != &Sort::Str) {
                return fail("both arguments must be String");
            }
            Ok(Sort::Bool)
        }
        StrInCharset(_) => {
            arity(1)?;
            if args[0].sort() != &Sort::Str {
                return fail("argument must be String");
            }
            Ok(Sort::Bool)
        }
        Select => {
            arity(2)?;
            match args[0].sort() {
                Sort::Array(index, element) => {
                    if args[1].sort() != index.as_ref() {
                        return fail("index sort does not match the array");
                    }
                    Ok(element.as_ref().clone())
                }
                _ => fail("first argument must be an array"),
            }
        }
        Store => {
            arity(3)?;
            match args[0].sort() {
                Sort::Array(index, element) => {
                    if args[1].sort() != index.as_ref() {
                        return fail("index sort does not match the array");
                    }
                    if args[2].sort() != element.as_ref() {
                        return fail("element sort does not match the array");
                    }
                    Ok(args[0].sort().clone())
                }
                _ => fail("first argument must be an array"),
            }
        }
    }
}

fn numeric_pair(op: &Op, args: &[Term]) -> Result<(), SortError> {
    if !args[0].sort().is_numeric() || args[0].sort() != args[1].sort() {
        return Err(sort_error(
            op,
            args,
            "arguments must both be Int or both be Real",
        ));
    }
    Ok(())
}

fn bitvec_pair(op: &Op, args: &[Term]) -> Result<(), SortError> {
    match (args[0].sort(), args[1].sort()) {
        (Sort::BitVec(a), Sort::BitVec(b)) if a == b => Ok(()),
        _ => Err(sort_error(op, args, "arguments must be same-width bit-vectors")),
    }
}

macro_rules! binary_builders {
    ($($fn_name:ident => $op:ident),* $(,)?) => {
        impl Term {
            $(
                pub fn $fn_name(&self, other: &Term) -> Result<Term, SortError> {
                    Term::app(Op::$op, vec![self.clone(), other.clone()])
                }
            )*
        }
    };
}

binary_builders! {
    eq => Eq, ne => Ne,
    add => Add, sub => Sub, mul => Mul,
    div_real => DivReal, div_floor => DivFloor, mod_floor => ModFloor,
    min => Min, max => Max,
    lt => Lt, le => Le, gt => Gt, ge => Ge,
    implies => Implies,
    bv_add => BvAdd, bv_sub => BvSub,
    bv_and => BvAnd, bv_or => BvOr, bv_xor => BvXor,
    bv_shl => BvShl, bv_lshr => BvLshr, bv_ashr => BvAshr,
    bv_slt => BvSlt, bv_sle => BvSle, bv_ult => BvUlt, bv_ule => BvUle,
    str_contains => StrContains, str_prefix_of => StrPrefixOf,
}

impl Term {
    pub fn not(&self) -> Result<Term, SortError> {
        Term::app(Op::Not, vec![self.clone()])
    }

    pub fn neg(&self) -> Result<Term, SortError> {
        Term::app(Op::Neg, vec![self.clone()])
    }

    pub fn abs(&self) -> Result<Term, SortError> {
        Term::app(Op::Abs, vec![self.clone()])
    }

    pub fn to_real(&self) -> Result<Term, SortError> {
        Term::app(Op::ToReal, vec![self.clone()])
    }

    pub fn bv_neg(&self) -> Result<Term, SortError> {
        Term::app(Op::BvNeg, vec![self.clone()])
    }

    pub fn str_len(&self) -> Result<Term, SortError> {
        Term::app(Op::StrLen, vec![self.clone()])
    }

    pub fn in_charset(&self, charset: Charset) -> Result<Term, SortError> {
        Term::app(Op::StrInCharset(charset), vec![self.clone()])
    }

    /// `lo <=s self <=s hi` over bit-vectors.
    pub fn signed_within(&self, lo: &Term, hi: &Term) -> Result<Term, SortError> {
        Term::app(
            Op::BvSignBound,
            vec![self.clone(), lo.clone(), hi.clone()],
        )
    }

    pub fn ite(cond: &Term, then: &Term, els: &Term) -> Result<Term, SortError> {
        Term::app(Op::Ite, vec![cond.clone(), then.clone(), els.clone()])
    }

    /// Conjunction; an empty list is `true`, a singleton is the term itself.
    pub fn and_all(terms: Vec<Term>) -> Result<Term, SortError> {
        match terms.len() {
            0 => Ok(Term::bool_lit(true)),
            1 => {
                if terms[0].sort() != &Sort::Bool {
                    return Term::app(Op::And, terms);
                }
                Ok(terms.into_iter().next().unwrap())
            }
            _ => Term::app(Op::And, terms),
        }
    }

    /// Disjunction; an empty list is `false`.
    pub fn or_all(terms: Vec<Term>) -> Result<Term, SortError> {
        match terms.len() {
            0 => Ok(Term::bool_lit(false)),
            1 => {
                if terms[0].sort() != &Sort::Bool {
                    return Term::app(Op::Or, terms);
                }
                Ok(terms.into_iter().next().unwrap())
            }
            _ => Term::app(Op::Or, terms),
        }
    }

    pub fn and(&self, other: &Term) -> Result<Term, SortError> {
        Term::app(Op::And, vec![self.clone(), other.clone()])
    }

    pub fn or(&self, other: &Term) -> Result<Term, SortError> {
        Term::app(Op::Or, vec![self.clone(), other.clone()])
    }

    pub fn str_concat(parts: Vec<Term>) -> Result<Term, SortError> {
        match parts.len() {
            0 => Ok(Term::str_lit("")),
            1 => {
                if parts[0].sort() != &Sort::Str {
                    return Term::app(Op::StrConcat, parts);
                }
                Ok(parts.into_iter().next().unwrap())
            }
            _ => Term::app(Op::StrConcat, parts),
        }
    }

    pub fn select(&self, index: &Term) -> Result<Term, SortError> {
        Term::app(Op::Select, vec![self.clone(), index.clone()])
    }

    pub fn store(&self, index: &Term, value: &Term) -> Result<Term, SortError> {
        Term::app(Op::Store, vec![self.clone(), index.clone(), value.clone()])
    }
}

impl fmt::Display for Term {
    /// Debug-oriented s-expression (operator names, no lowering).  The
    /// solver-facing form lives in the script serializer.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            TermKind::Var(name) => f.write_str(name),
            TermKind::Lit(v) => f.write_str(&v.lexical()),
            TermKind::App(op, args) => {
                write!(f, "({op:?}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
