//! Deterministic SMT-LIB v2 script emission.
//!
//! The serializer is a pure function of its inputs: declarations appear in
//! the order given, assertions likewise, and every derived operator is
//! lowered to the same core form each time.  Byte-identical scripts for
//! identical inputs make solver behaviour reproducible and cacheable.

use std::collections::BTreeMap;
use std::fmt::Write;

use num::{One, Signed};
use thiserror::Error;

use super::term::{Charset, Op, Sort, Term, TermKind};
use super::value::{quote_string, render_bits, Value};

/// A variable declaration: `(declare-const name sort)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

impl Decl {
    pub fn new(name: impl Into<String>, sort: Sort) -> Decl {
        Decl {
            name: name.into(),
            sort,
        }
    }
}

/// Errors detected before a script is handed to the solver.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScriptError {
    #[error("assertion {index} has sort {sort}, expected Bool")]
    NonBoolAssertion { index: usize, sort: String },
    #[error("variable {name} ({sort}) is used but not declared")]
    UndeclaredVariable { name: String, sort: String },
    #[error("variable {name} declared as {declared} but used as {used}")]
    SortClash {
        name: String,
        declared: String,
        used: String,
    },
    #[error("duplicate declaration of {name}")]
    DuplicateDeclaration { name: String },
    #[error("symbol {name:?} cannot be quoted (contains '|' or '\\')")]
    UnquotableSymbol { name: String },
}

/// Render declarations and assertions as a complete SMT-LIB script ending
/// in `(check-sat)` and `(get-model)`.
pub fn serialize(decls: &[Decl], assertions: &[Term]) -> Result<String, ScriptError> {
    let mut declared: BTreeMap<&str, &Sort> = BTreeMap::new();
    for d in decls {
        if declared.insert(d.name.as_str(), &d.sort).is_some() {
            return Err(ScriptError::DuplicateDeclaration {
                name: d.name.clone(),
            });
        }
    }
    for (index, a) in assertions.iter().enumerate() {
        if a.sort() != &Sort::Bool {
            return Err(ScriptError::NonBoolAssertion {
                index,
                sort: a.sort().to_string(),
            });
        }
        for (name, sort) in a.free_vars() {
            match declared.get(name.as_str()) {
                None => {
                    return Err(ScriptError::UndeclaredVariable {
                        name,
                        sort: sort.to_string(),
                    })
                }
                Some(decl_sort) if **decl_sort != sort => {
                    return Err(ScriptError::SortClash {
                        name,
                        declared: decl_sort.to_string(),
                        used: sort.to_string(),
                    })
                }
                Some(_) => {}
            }
        }
    }

    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    let _ = writeln!(out, "(set-logic {})", choose_logic(decls, assertions));
    for d in decls {
        let _ = writeln!(
            out,
            "(declare-const {} {})",
            quote_symbol(&d.name)?,
            d.sort
        );
    }
    for a in assertions {
        out.push_str("(assert ");
        write_term(&mut out, a)?;
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}

/// Pick the weakest standard logic that covers the given problem.
///
/// Strings force `ALL` (the string theory interacts with everything);
/// arrays over bit-vectors use `QF_ABV`; pure bit-vector problems use
/// `QF_BV`.  Arithmetic problems pick the linear fragment when every
/// multiplication has a constant side and no division appears, and the
/// nonlinear one otherwise.  Purely boolean problems run under `QF_UF`.
fn choose_logic(decls: &[Decl], assertions: &[Term]) -> &'static str {
    let mut shape = Shape::default();
    for d in decls {
        shape.visit_sort(&d.sort);
    }
    for a in assertions {
        shape.visit_term(a);
    }

    if shape.strings {
        "ALL"
    } else if shape.arrays {
        if shape.ints || shape.reals {
            "ALL"
        } else {
            "QF_ABV"
        }
    } else if shape.bitvecs {
        if shape.ints || shape.reals {
            "ALL"
        } else {
            "QF_BV"
        }
    } else if shape.ints || shape.reals {
        match (shape.ints, shape.reals, shape.nonlinear) {
            (true, false, false) => "QF_LIA",
            (false, true, false) => "QF_LRA",
            (true, true, false) => "QF_LIRA",
            (true, false, true) => "QF_NIA",
            (false, true, true) => "QF_NRA",
            _ => "QF_NIRA",
        }
    } else {
        "QF_UF"
    }
}

#[derive(Default)]
struct Shape {
    ints: bool,
    reals: bool,
    bitvecs: bool,
    strings: bool,
    arrays: bool,
    nonlinear: bool,
}

impl Shape {
    fn visit_sort(&mut self, sort: &Sort) {
        match sort {
            Sort::Bool => {}
            Sort::Int => self.ints = true,
            Sort::Real => self.reals = true,
            Sort::BitVec(_) => self.bitvecs = true,
            Sort::Str => self.strings = true,
            Sort::Array(i, e) => {
                self.arrays = true;
                self.visit_sort(i);
                self.visit_sort(e);
            }
        }
    }

    fn visit_term(&mut self, term: &Term) {
        self.visit_sort(term.sort());
        if let TermKind::App(op, args) = term.kind() {
            match op {
                Op::Mul => {
                    if !args[0].is_constant() && !args[1].is_constant() {
                        self.nonlinear = true;
                    }
                }
                // Division is outside the linear fragments even with a
                // constant divisor.
                Op::DivReal | Op::DivFloor | Op::ModFloor => self.nonlinear = true,
                Op::StrConcat
                | Op::StrLen
                | Op::StrContains
                | Op::StrPrefixOf
                | Op::StrInCharset(_) => self.strings = true,
                _ => {}
            }
            for a in args {
                self.visit_term(a);
            }
        }
    }
}

/// SMT-LIB simple symbols need no quoting; anything else is wrapped in
/// `|...|`, which cannot itself contain `|` or `\`.
pub(crate) fn quote_symbol(name: &str) -> Result<String, ScriptError> {
    let simple = !name.is_empty()
        && !name.chars().next().unwrap().is_ascii_digit()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        Ok(name.to_string())
    } else if name.contains('|') || name.contains('\\') {
        Err(ScriptError::UnquotableSymbol {
            name: name.to_string(),
        })
    } else {
        Ok(format!("|{name}|"))
    }
}

/// Render one term, lowering derived operators to SMT-LIB core forms.
fn write_term(out: &mut String, term: &Term) -> Result<(), ScriptError> {
    match term.kind() {
        TermKind::Var(name) => out.push_str(&quote_symbol(name)?),
        TermKind::Lit(v) => write_literal(out, v),
        TermKind::App(op, args) => write_app(out, op, args, term)?,
    }
    Ok(())
}

fn write_literal(out: &mut String, v: &Value) {
    match v {
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Int(n) => {
            if n.is_negative() {
                let _ = write!(out, "(- {})", n.magnitude());
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::Real(r) => {
            let mag = r.abs();
            let body = if mag.denom().is_one() {
                format!("{}.0", mag.numer())
            } else {
                format!("(/ {}.0 {}.0)", mag.numer(), mag.denom())
            };
            if r.is_negative() {
                let _ = write!(out, "(- {body})");
            } else {
                out.push_str(&body);
            }
        }
        Value::Bits { width, bits } => out.push_str(&render_bits(*width, *bits)),
        Value::Str(s) => out.push_str(&quote_string(s)),
        // Unreachable: term construction rejects non-scalar literals.
        Value::Array(_) | Value::Raw(_) => out.push_str("<non-scalar>"),
    }
}

fn write_app(out: &mut String, op: &Op, args: &[Term], term: &Term) -> Result<(), ScriptError> {
    match op {
        // (abs x) exists in SMT-LIB for Int only; lower uniformly instead.
        Op::Abs => {
            let x = &args[0];
            out.push_str("(ite (< ");
            write_term(out, x)?;
            out.push(' ');
            write_zero(out, x.sort());
            out.push_str(") (- ");
            write_term(out, x)?;
            out.push_str(") ");
            write_term(out, x)?;
            out.push(')');
        }
        Op::Min | Op::Max => {
            let (a, b) = (&args[0], &args[1]);
            out.push_str("(ite (<= ");
            write_term(out, a)?;
            out.push(' ');
            write_term(out, b)?;
            out.push_str(") ");
            let (first, second) = if matches!(op, Op::Min) { (a, b) } else { (b, a) };
            write_term(out, first)?;
            out.push(' ');
            write_term(out, second)?;
            out.push(')');
        }
        // SMT-LIB div/mod are Euclidean (round toward -inf only for
        // positive divisors); adjust to floor semantics for negative ones.
        Op::DivFloor | Op::ModFloor => {
            let (a, b) = (&args[0], &args[1]);
            let euclidean = if matches!(op, Op::DivFloor) { "div" } else { "mod" };
            let mut cond = String::new();
            cond.push_str("(and (< ");
            write_term(&mut cond, b)?;
            cond.push_str(" 0) (distinct (mod ");
            write_term(&mut cond, a)?;
            cond.push(' ');
            write_term(&mut cond, b)?;
            cond.push_str(") 0))");
            let mut plain = String::new();
            plain.push_str("(");
            plain.push_str(euclidean);
            plain.push(' ');
            write_term(&mut plain, a)?;
            plain.push(' ');
            write_term(&mut plain, b)?;
            plain.push(')');
            let adjusted = if matches!(op, Op::DivFloor) {
                format!("(- {plain} 1)")
            } else {
                let mut b_text = String::new();
                write_term(&mut b_text, b)?;
                format!("(+ {plain} {b_text})")
            };
            let _ = write!(out, "(ite {cond} {adjusted} {plain})");
        }
        Op::BvSignBound => {
            let (x, lo, hi) = (&args[0], &args[1], &args[2]);
            out.push_str("(and (bvsle ");
            write_term(out, lo)?;
            out.push(' ');
            write_term(out, x)?;
            out.push_str(") (bvsle ");
            write_term(out, x)?;
            out.push(' ');
            write_term(out, hi)?;
            out.push_str("))");
        }
        Op::StrInCharset(charset) => {
            out.push_str("(str.in_re ");
            write_term(out, &args[0])?;
            out.push(' ');
            write_charset_regex(out, charset);
            out.push(')');
        }
        other => {
            let _ = write!(out, "({}", smt_name(other));
            for a in args {
                out.push(' ');
                write_term(out, a)?;
            }
            out.push(')');
            // `term` only participates for its span in errors; silence the
            // unused warning when no error path fires.
            let _ = term;
        }
    }
    Ok(())
}

fn write_zero(out: &mut String, sort: &Sort) {
    match sort {
        Sort::Real => out.push_str("0.0"),
        _ => out.push('0'),
    }
}

fn write_charset_regex(out: &mut String, charset: &Charset) {
    let mut parts = Vec::new();
    for &(lo, hi) in charset.ranges() {
        if lo == hi {
            parts.push(format!("(str.to_re {})", quote_string(&lo.to_string())));
        } else {
            parts.push(format!(
                "(re.range {} {})",
                quote_string(&lo.to_string()),
                quote_string(&hi.to_string())
            ));
        }
    }
    let union = match parts.len() {
        1 => parts.pop().unwrap(),
        _ => format!("(re.union {})", parts.join(" ")),
    };
    let _ = write!(out, "(re.* {union})");
}

fn smt_name(op: &Op) -> &'static str {
    match op {
        Op::Not => "not",
        Op::And => "and",
        Op::Or => "or",
        Op::Implies => "=>",
        Op::Ite => "ite",
        Op::Eq => "=",
        Op::Ne => "distinct",
        Op::Add => "+",
        Op::Sub | Op::Neg => "-",
        Op::Mul => "*",
        Op::DivReal => "/",
        Op::ToReal => "to_real",
        Op::Lt => "<",
        Op::Le => "<=",
        Op::Gt => ">",
        Op::Ge => ">=",
        Op::BvAdd => "bvadd",
        Op::BvSub => "bvsub",
        Op::BvNeg => "bvneg",
        Op::BvAnd => "bvand",
        Op::BvOr => "bvor",
        Op::BvXor => "bvxor",
        Op::BvShl => "bvshl",
        Op::BvLshr => "bvlshr",
        Op::BvAshr => "bvashr",
        Op::BvSlt => "bvslt",
        Op::BvSle => "bvsle",
        Op::BvUlt => "bvult",
        Op::BvUle => "bvule",
        Op::StrConcat => "str.++",
        Op::StrLen => "str.len",
        Op::StrContains => "str.contains",
        Op::StrPrefixOf => "str.prefixof",
        Op::Select => "select",
        Op::Store => "store",
        Op::Abs
        | Op::Min
        | Op::Max
        | Op::DivFloor
        | Op::ModFloor
        | Op::BvSignBound
        | Op::StrInCharset(_) => unreachable!("lowered before name lookup"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_var(name: &str) -> Term {
        Term::var(name, Sort::Int)
    }

    #[test]
    fn script_contains_the_expected_pieces() {
        let x = int_var("x");
        let a = x.gt(&Term::int(5)).unwrap();
        let script = serialize(&[Decl::new("x", Sort::Int)], &[a]).unwrap();
        assert!(script.contains("(set-option :produce-models true)"));
        assert!(script.contains("(set-logic QF_LIA)"));
        assert!(script.contains("(declare-const x Int)"));
        assert!(script.contains("(assert (> x 5))"));
        assert!(script.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn serialization_is_deterministic() {
        let x = int_var("x");
        let y = int_var("y");
        let decls = vec![Decl::new("x", Sort::Int), Decl::new("y", Sort::Int)];
        let asserts = vec![
            x.add(&y).unwrap().lt(&Term::int(10)).unwrap(),
            y.ge(&Term::int(0)).unwrap(),
        ];
        let a = serialize(&decls, &asserts).unwrap();
        let b = serialize(&decls, &asserts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn undeclared_and_clashing_variables_are_rejected() {
        let x = int_var("x");
        let a = x.gt(&Term::int(0)).unwrap();
        assert!(matches!(
            serialize(&[], &[a.clone()]),
            Err(ScriptError::UndeclaredVariable { .. })
        ));
        assert!(matches!(
            serialize(&[Decl::new("x", Sort::Bool)], &[a.clone()]),
            Err(ScriptError::SortClash { .. })
        ));
        assert!(matches!(
            serialize(
                &[Decl::new("x", Sort::Int), Decl::new("x", Sort::Int)],
                &[a]
            ),
            Err(ScriptError::DuplicateDeclaration { .. })
        ));
        assert!(matches!(
            serialize(&[Decl::new("x", Sort::Int)], &[int_var("x")]),
            Err(ScriptError::NonBoolAssertion { .. })
        ));
    }

    #[test]
    fn logic_selection_covers_the_fragments() {
        let x = int_var("x");
        let r = Term::var("r", Sort::Real);
        let b = Term::var("b", Sort::BitVec(32));
        let s = Term::var("s", Sort::Str);
        let p = Term::var("p", Sort::Bool);
        let mem = Term::var("m", Sort::array(Sort::BitVec(32), Sort::BitVec(32)));

        let logic = |decls: &[Decl], t: &Term| {
            let script = serialize(decls, &[t.clone()]).unwrap();
            script
                .lines()
                .find(|l| l.starts_with("(set-logic"))
                .unwrap()
                .trim_start_matches("(set-logic ")
                .trim_end_matches(')')
                .to_string()
        };

        let dx = Decl::new("x", Sort::Int);
        let dr = Decl::new("r", Sort::Real);
        assert_eq!(logic(&[dx.clone()], &x.gt(&Term::int(0)).unwrap()), "QF_LIA");
        assert_eq!(
            logic(
                &[dx.clone()],
                &x.mul(&Term::int(3)).unwrap().gt(&Term::int(0)).unwrap()
            ),
            "QF_LIA"
        );
        assert_eq!(
            logic(&[dx.clone()], &x.mul(&x).unwrap().gt(&Term::int(0)).unwrap()),
            "QF_NIA"
        );
        assert_eq!(
            logic(
                &[dx.clone()],
                &x.div_floor(&Term::int(2)).unwrap().gt(&Term::int(0)).unwrap()
            ),
            "QF_NIA"
        );
        assert_eq!(
            logic(&[dr.clone()], &r.lt(&Term::real(num::BigRational::from_integer(1.into()))).unwrap()),
            "QF_LRA"
        );
        assert_eq!(
            logic(
                &[dx.clone(), dr.clone()],
                &x.to_real().unwrap().le(&r).unwrap()
            ),
            "QF_LIRA"
        );
        assert_eq!(
            logic(
                &[Decl::new("b", Sort::BitVec(32))],
                &b.bv_slt(&Term::bits(32, 0)).unwrap()
            ),
            "QF_BV"
        );
        assert_eq!(
            logic(
                &[
                    Decl::new("m", Sort::array(Sort::BitVec(32), Sort::BitVec(32))),
                    Decl::new("b", Sort::BitVec(32))
                ],
                &mem.select(&b).unwrap().eq(&Term::bits(32, 0)).unwrap()
            ),
            "QF_ABV"
        );
        assert_eq!(
            logic(
                &[Decl::new("s", Sort::Str)],
                &s.str_contains(&Term::str_lit("x")).unwrap()
            ),
            "ALL"
        );
        assert_eq!(logic(&[Decl::new("p", Sort::Bool)], &p), "QF_UF");
    }

    #[test]
    fn derived_operators_are_lowered() {
        let x = int_var("x");
        let d = Decl::new("x", Sort::Int);
        let abs = x.abs().unwrap().ge(&Term::int(0)).unwrap();
        let script = serialize(&[d.clone()], &[abs]).unwrap();
        assert!(script.contains("(ite (< x 0) (- x) x)"));

        let fd = x.div_floor(&Term::int(-2)).unwrap().eq(&Term::int(1)).unwrap();
        let script = serialize(&[d.clone()], &[fd]).unwrap();
        assert!(script.contains("(div x (- 2))"));
        assert!(script.contains("(ite (and (< (- 2) 0)"));

        let mn = x.min(&Term::int(3)).unwrap().eq(&Term::int(3)).unwrap();
        let script = serialize(&[d.clone()], &[mn]).unwrap();
        assert!(script.contains("(ite (<= x 3) x 3)"));

        let mx = x.max(&Term::int(3)).unwrap().eq(&Term::int(3)).unwrap();
        let script = serialize(&[d], &[mx]).unwrap();
        assert!(script.contains("(ite (<= x 3) 3 x)"));

        let r = Term::var("r", Sort::BitVec(32));
        let bound = r
            .signed_within(&Term::bits(32, 0), &Term::bits(32, 100))
            .unwrap();
        let script = serialize(&[Decl::new("r", Sort::BitVec(32))], &[bound]).unwrap();
        assert!(script.contains("(and (bvsle #x00000000 r) (bvsle r #x00000064))"));
    }

    #[test]
    fn ssa_style_names_are_pipe_quoted() {
        let v = Term::var("x#1", Sort::Int);
        let script = serialize(
            &[Decl::new("x#1", Sort::Int)],
            &[v.ge(&Term::int(0)).unwrap()],
        )
        .unwrap();
        assert!(script.contains("(declare-const |x#1| Int)"));
        assert!(script.contains("(assert (>= |x#1| 0))"));
        assert!(quote_symbol("weird|name").is_err());
    }

    #[test]
    fn string_and_charset_terms_serialize() {
        let s = Term::var("s", Sort::Str);
        let cs = Charset::parse("a-z_").unwrap();
        let t = Term::and_all(vec![
            s.in_charset(cs).unwrap(),
            s.str_len().unwrap().le(&Term::int(5)).unwrap(),
            Term::str_concat(vec![Term::str_lit("rm "), s.clone()])
                .unwrap()
                .str_contains(&Term::str_lit("-rf"))
                .unwrap(),
        ])
        .unwrap();
        let script = serialize(&[Decl::new("s", Sort::Str)], &[t]).unwrap();
        assert!(script.contains("(str.in_re s (re.* (re.union (re.range \"a\" \"z\") (str.to_re \"_\"))))"));
        assert!(script.contains("(<= (str.len s) 5)"));
        assert!(script.contains("(str.contains (str.++ \"rm \" s) \"-rf\")"));
    }

    #[test]
    fn negative_literals_render_with_unary_minus() {
        let x = int_var("x");
        let t = x.eq(&Term::int(-7)).unwrap();
        let script = serialize(&[Decl::new("x", Sort::Int)], &[t]).unwrap();
        assert!(script.contains("(= x (- 7))"));

        let r = Term::var("r", Sort::Real);
        let half = Term::real(num::BigRational::new((-1).into(), 2.into()));
        let t = r.eq(&half).unwrap();
        let script = serialize(&[Decl::new("r", Sort::Real)], &[t]).unwrap();
        assert!(script.contains("(= r (- (/ 1.0 2.0)))"));
    }
}
