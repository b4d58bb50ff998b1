//! A direct interpreter for the verified Python subset, written against
//! the parsed AST and nothing else.  It shares no code with the symbolic
//! translation — integers are plain `i64` with Python's floor-division
//! and modulo rules, floats are exact rationals — so agreement between
//! the two is meaningful evidence, not an identity.

use std::collections::BTreeMap;

use guard::code::{BinOp, Builtin, CmpOp, Expr, ExprKind, FunctionUnit, Stmt, StmtKind};
use num::{BigInt, BigRational, Signed, Zero};

/// A runtime value.  Floats are modelled as exact rationals, matching the
/// real-valued semantics the verifier assigns them.
#[derive(Debug, Clone, PartialEq)]
pub enum PyVal {
    Int(i64),
    Rat(BigRational),
    Bool(bool),
}

impl PyVal {
    fn as_int(&self) -> i64 {
        match self {
            PyVal::Int(n) => *n,
            other => panic!("expected int, found {other:?}"),
        }
    }

    fn as_bool(&self) -> bool {
        match self {
            PyVal::Bool(b) => *b,
            other => panic!("expected bool, found {other:?}"),
        }
    }

    fn as_rat(&self) -> BigRational {
        match self {
            PyVal::Int(n) => BigRational::from_integer(BigInt::from(*n)),
            PyVal::Rat(r) => r.clone(),
            PyVal::Bool(_) => panic!("expected number, found bool"),
        }
    }

    fn is_rat(&self) -> bool {
        matches!(self, PyVal::Rat(_))
    }
}

/// The one runtime error the subset can raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivByZero;

pub type Env = BTreeMap<String, PyVal>;

/// Python `//`: quotient rounded toward negative infinity.
fn floordiv(a: i64, b: i64) -> Result<i64, DivByZero> {
    if b == 0 {
        return Err(DivByZero);
    }
    let q = a / b;
    if a % b != 0 && (a < 0) != (b < 0) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

/// Python `%`: remainder with the divisor's sign.
fn pymod(a: i64, b: i64) -> Result<i64, DivByZero> {
    Ok(a - floordiv(a, b)?.checked_mul(b).expect("overflow in mod"))
}

/// Apply `+`, `-` or `*`, promoting to rationals when either side is one.
fn ring_op(op: &BinOp, a: &PyVal, b: &PyVal) -> PyVal {
    if a.is_rat() || b.is_rat() {
        let (x, y) = (a.as_rat(), b.as_rat());
        PyVal::Rat(match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            _ => unreachable!(),
        })
    } else {
        let (x, y) = (a.as_int(), b.as_int());
        PyVal::Int(
            match op {
                BinOp::Add => x.checked_add(y),
                BinOp::Sub => x.checked_sub(y),
                BinOp::Mul => x.checked_mul(y),
                _ => unreachable!(),
            }
            .expect("overflow"),
        )
    }
}

fn compare(op: CmpOp, a: &PyVal, b: &PyVal) -> bool {
    match (a, b) {
        (PyVal::Bool(x), PyVal::Bool(y)) => match op {
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
            _ => panic!("ordering comparison on booleans"),
        },
        (PyVal::Bool(_), _) | (_, PyVal::Bool(_)) => panic!("comparison across number and bool"),
        _ => {
            let (x, y) = (a.as_rat(), b.as_rat());
            match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
            }
        }
    }
}

pub fn eval_expr(expr: &Expr, env: &Env) -> Result<PyVal, DivByZero> {
    match &expr.kind {
        ExprKind::Int(n) => Ok(PyVal::Int(
            i64::try_from(n.clone()).expect("literal beyond i64"),
        )),
        ExprKind::Float(r) => Ok(PyVal::Rat(r.clone())),
        ExprKind::Bool(b) => Ok(PyVal::Bool(*b)),
        ExprKind::Name(name) => Ok(env
            .get(name)
            .unwrap_or_else(|| panic!("unbound name {name}"))
            .clone()),
        ExprKind::Neg(inner) => Ok(match eval_expr(inner, env)? {
            PyVal::Int(n) => PyVal::Int(n.checked_neg().expect("overflow")),
            PyVal::Rat(r) => PyVal::Rat(-r),
            PyVal::Bool(_) => panic!("negation of a boolean"),
        }),
        ExprKind::Not(inner) => Ok(PyVal::Bool(!eval_expr(inner, env)?.as_bool())),
        ExprKind::Bin { op, lhs, rhs } => {
            let a = eval_expr(lhs, env)?;
            let b = eval_expr(rhs, env)?;
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => Ok(ring_op(op, &a, &b)),
                BinOp::FloorDiv => Ok(PyVal::Int(floordiv(a.as_int(), b.as_int())?)),
                BinOp::Mod => Ok(PyVal::Int(pymod(a.as_int(), b.as_int())?)),
                BinOp::Div => {
                    let d = b.as_rat();
                    if d.is_zero() {
                        return Err(DivByZero);
                    }
                    Ok(PyVal::Rat(a.as_rat() / d))
                }
            }
        }
        ExprKind::Compare { first, rest } => {
            // Chained comparison short-circuits left to right, as Python does.
            let mut left = eval_expr(first, env)?;
            for (op, next) in rest {
                let right = eval_expr(next, env)?;
                if !compare(*op, &left, &right) {
                    return Ok(PyVal::Bool(false));
                }
                left = right;
            }
            Ok(PyVal::Bool(true))
        }
        ExprKind::And(parts) => {
            for p in parts {
                if !eval_expr(p, env)?.as_bool() {
                    return Ok(PyVal::Bool(false));
                }
            }
            Ok(PyVal::Bool(true))
        }
        ExprKind::Or(parts) => {
            for p in parts {
                if eval_expr(p, env)?.as_bool() {
                    return Ok(PyVal::Bool(true));
                }
            }
            Ok(PyVal::Bool(false))
        }
        ExprKind::Ternary { cond, then, els } => {
            if eval_expr(cond, env)?.as_bool() {
                eval_expr(then, env)
            } else {
                eval_expr(els, env)
            }
        }
        ExprKind::Call { builtin, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_expr(a, env)?);
            }
            if vals.iter().any(PyVal::is_rat) {
                let rats: Vec<BigRational> = vals.iter().map(PyVal::as_rat).collect();
                let value = match builtin {
                    Builtin::Abs => rats[0].abs(),
                    Builtin::Min => rats.iter().min().expect("min of nothing").clone(),
                    Builtin::Max => rats.iter().max().expect("max of nothing").clone(),
                };
                return Ok(PyVal::Rat(value));
            }
            let ints: Vec<i64> = vals.iter().map(PyVal::as_int).collect();
            let value = match builtin {
                Builtin::Abs => ints[0].checked_abs().expect("overflow"),
                Builtin::Min => *ints.iter().min().expect("min of nothing"),
                Builtin::Max => *ints.iter().max().expect("max of nothing"),
            };
            Ok(PyVal::Int(value))
        }
    }
}

fn run_block(body: &[Stmt], env: &mut Env) -> Result<Option<PyVal>, DivByZero> {
    for stmt in body {
        match &stmt.kind {
            StmtKind::Assign { name, value } => {
                let v = eval_expr(value, env)?;
                env.insert(name.clone(), v);
            }
            StmtKind::Return(expr) => return Ok(Some(eval_expr(expr, env)?)),
            StmtKind::If { cond, then, els } => {
                let taken = if eval_expr(cond, env)?.as_bool() { then } else { els };
                if let Some(v) = run_block(taken, env)? {
                    return Ok(Some(v));
                }
            }
        }
    }
    Ok(None)
}

/// Execute a function on concrete arguments, positionally.
pub fn run_vals(fun: &FunctionUnit, args: &[PyVal]) -> Result<PyVal, DivByZero> {
    assert_eq!(args.len(), fun.params.len(), "arity mismatch");
    let mut env: Env = fun
        .params
        .iter()
        .zip(args)
        .map(|((name, _), v)| (name.clone(), v.clone()))
        .collect();
    match run_block(&fun.body, &mut env)? {
        Some(v) => Ok(v),
        None => panic!("function fell off the end without returning"),
    }
}

/// Integer entry point for exhaustive sweeps over integer functions.
pub fn run(fun: &FunctionUnit, args: &[i64]) -> Result<i64, DivByZero> {
    let vals: Vec<PyVal> = args.iter().map(|v| PyVal::Int(*v)).collect();
    match run_vals(fun, &vals)? {
        PyVal::Int(n) => Ok(n),
        other => panic!("integer function produced {other:?}"),
    }
}

/// Evaluate one contract clause as a boolean under concrete bindings
/// (parameters plus, for `ensures` clauses, `result`).
pub fn eval_clause(expr: &Expr, env: &Env) -> Result<bool, DivByZero> {
    Ok(eval_expr(expr, env)?.as_bool())
}
